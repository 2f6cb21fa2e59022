//! Experiment recipe: a TOML document with fixed sections. Unknown keys are
//! rejected; every omitted key takes the default below.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub interaction: InteractionConfig,
    pub schedule: ScheduleConfig,
    pub units: Option<UnitsConfig>,
    pub engine: EngineConfig,
    pub measurement: MeasurementConfig,
    pub scan: ScanConfig,
    pub fit: FitConfig,
    pub outputs: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    DoubletChain,
    Grid,
    Zigzag,
    EnhancedRabi,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub builder: Builder,
    /// Chain sites L.
    pub sites: usize,
    /// Equilateral side length (µm) for doublet chains; NN distance for the others.
    pub spacing: f64,
    /// Non-equilateral doublet chain: step between sites is `spacing_x / 2`
    /// (default `spacing·√3`).
    pub spacing_x: Option<f64>,
    /// Non-equilateral doublet chain: doublet height (default `spacing`).
    pub spacing_y: Option<f64>,
    pub rows: usize,
    pub cols: usize,
    pub grid_spacing: f64,
    pub doublet_separation: f64,
    pub offset: f64,
    pub rabi_factor: f64,
    pub path: Option<String>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            builder: Builder::DoubletChain,
            sites: 15,
            spacing: 5.5,
            spacing_x: None,
            spacing_y: None,
            rows: 3,
            cols: 3,
            grid_spacing: 6.5,
            doublet_separation: 3.0,
            offset: 0.0,
            rabi_factor: 1.0,
            path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationChoice {
    Auto,
    Nn,
    Nnn,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintChoice {
    Auto,
    Blockade,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Interaction energy in units of Ω at `distance`.
    pub energy: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionConfig {
    /// C6 in Ω·µm⁶; mutually exclusive with `calibration`.
    pub c6: Option<f64>,
    pub calibration: Option<Calibration>,
    /// `auto`: next-nearest-neighbour range on chains, all pairs on grids.
    pub truncation: TruncationChoice,
    /// `auto`: blockade-constrained basis on chains, full basis on grids.
    pub constraint: ConstraintChoice,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig { c6: None, calibration: None, truncation: TruncationChoice::Auto, constraint: ConstraintChoice::Auto }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Sqs,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResumeChoice {
    Initial,
    Quench,
}

/// Detunings in Ω, times in 2π/Ω, rates in Ω²/2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub delta_start: f64,
    pub delta_end: f64,
    pub rate: f64,
    pub delta_i: f64,
    pub delta_q: f64,
    pub t_q: f64,
    pub resume: ResumeChoice,
    pub response_tau: f64,
    pub response_shift: f64,
    /// Physical alternatives to the two fields above; need a `[units]` block.
    pub response_tau_ns: Option<f64>,
    pub response_shift_ns: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            kind: ScheduleKind::Sqs,
            delta_start: -4.0,
            delta_end: 4.0,
            rate: 1.5,
            delta_i: 0.55,
            delta_q: 1.5,
            t_q: 0.45,
            resume: ResumeChoice::Initial,
            response_tau: 0.0,
            response_shift: 0.0,
            response_tau_ns: None,
            response_shift_ns: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUnit {
    RadPerUs,
    CyclesPerUs,
}

/// Physical Rabi frequency. The unit must be given explicitly since "MHz" is
/// ambiguous between angular and ordinary frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub omega: f64,
    pub omega_unit: OmegaUnit,
}

impl UnitsConfig {
    /// Length of one time unit 2π/Ω in microseconds.
    pub fn time_unit_us(&self) -> f64 {
        let angular = match self.omega_unit {
            OmegaUnit::RadPerUs => self.omega,
            OmegaUnit::CyclesPerUs => 2.0 * std::f64::consts::PI * self.omega,
        };
        2.0 * std::f64::consts::PI / angular
    }

    pub fn ns_to_units(&self, ns: f64) -> f64 {
        ns * 1e-3 / self.time_unit_us()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Dense,
    Mps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Krylov,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialChoice {
    ExactGround,
    AllGround,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub kind: EngineKind,
    pub n_steps: usize,
    pub method: MethodChoice,
    pub initial: InitialChoice,
    pub krylov_tol: f64,
    /// Bond-dimension cap for the MPS engine; 0 means uncapped.
    pub chi_max: usize,
    pub cutoff: f64,
    pub record_stride: usize,
    /// Chain cuts for entropy columns; empty means the central cut.
    pub cuts: Vec<usize>,
    pub checkpoint_stride: usize,
    pub threads: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            kind: EngineKind::Dense,
            n_steps: 1000,
            method: MethodChoice::Krylov,
            initial: InitialChoice::ExactGround,
            krylov_tol: 1e-10,
            chi_max: 50,
            cutoff: 1e-8,
            record_stride: 10,
            cuts: Vec::new(),
            checkpoint_stride: 20,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    pub seed: u64,
    pub shots: usize,
    pub noise: bool,
    pub p_r_to_g: f64,
    pub p_g_to_r: f64,
    /// Blockade repair of shots; unset means only for 2D arrays.
    pub postprocess: Option<bool>,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        MeasurementConfig { seed: 0, shots: 1000, noise: true, p_r_to_g: 0.08, p_g_to_r: 0.01, postprocess: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub t_q_start: f64,
    pub t_q_stop: f64,
    pub t_q_step: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
    pub levels: usize,
    /// Detuning window searched for the minimum gap.
    pub gap_window: [f64; 2],
    pub sizes: Vec<usize>,
    /// Reference size N₀ of the exponential fit.
    pub n0: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            t_q_start: 0.0,
            t_q_stop: 1.2,
            t_q_step: 0.05,
            delta_min: 0.0,
            delta_max: 4.0,
            delta_points: 41,
            levels: 4,
            gap_window: [1.0, 4.0],
            sizes: vec![9, 11, 13, 15],
            n0: 13.0,
        }
    }
}

impl ScanConfig {
    pub fn t_q_grid(&self) -> anyhow::Result<Vec<f64>> {
        if !(self.t_q_step > 0.0) || self.t_q_stop < self.t_q_start || self.t_q_start < 0.0 {
            return Err(cfg_err("scan: need 0 <= t_q_start <= t_q_stop and t_q_step > 0"));
        }
        let n = ((self.t_q_stop - self.t_q_start) / self.t_q_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.t_q_start + k as f64 * self.t_q_step).collect())
    }

    pub fn delta_grid(&self) -> anyhow::Result<Vec<f64>> {
        if self.delta_points < 2 || !(self.delta_max > self.delta_min) {
            return Err(cfg_err("scan: need delta_points >= 2 and delta_max > delta_min"));
        }
        let step = (self.delta_max - self.delta_min) / (self.delta_points - 1) as f64;
        Ok((0..self.delta_points).map(|k| self.delta_min + k as f64 * step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// CSV with header `size,p` or `size,p,err`.
    pub input: Option<String>,
    pub n0: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { input: None, n0: 13.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: "out".into() }
    }
}

/// Parses a `key.path=value` override; the value is read as a TOML literal
/// and falls back to a bare string.
fn apply_override(root: &mut toml::Value, spec: &str) -> anyhow::Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| cfg_err(format!("override '{spec}' is not key=value")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| cfg_err(format!("override '{key}': '{part}' is not a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    Err(cfg_err("empty override key"))
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| cfg_err(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse(&text, overrides)
}

pub fn parse(text: &str, overrides: &[String]) -> anyhow::Result<ExperimentConfig> {
    let mut root = toml::Value::Table(toml::from_str::<toml::Table>(text).map_err(|e| cfg_err(e.to_string()))?);
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    let cfg: ExperimentConfig = root.try_into().map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.interaction.c6.is_some() && self.interaction.calibration.is_some() {
            return Err(cfg_err("interaction: give either c6 or calibration, not both"));
        }
        if (self.schedule.response_tau_ns.is_some() || self.schedule.response_shift_ns.is_some()) && self.units.is_none() {
            return Err(cfg_err("schedule: *_ns values need a [units] block"));
        }
        if let Some(u) = &self.units {
            if !(u.omega > 0.0) {
                return Err(cfg_err("units: omega must be positive"));
            }
        }
        if self.engine.n_steps == 0 {
            return Err(cfg_err("engine: n_steps must be positive"));
        }
        if !(0.0..1.0).contains(&self.engine.cutoff) {
            return Err(cfg_err("engine: cutoff must lie in [0, 1)"));
        }
        if self.geometry.builder == Builder::File && self.geometry.path.is_none() {
            return Err(cfg_err("geometry: builder = \"file\" needs a path"));
        }
        Ok(())
    }

    /// Response-filter parameters in units of 2π/Ω.
    pub fn response(&self) -> (f64, f64) {
        let conv = |ns: Option<f64>, v: f64| match (ns, &self.units) {
            (Some(x), Some(u)) => u.ns_to_units(x),
            _ => v,
        };
        (conv(self.schedule.response_tau_ns, self.schedule.response_tau), conv(self.schedule.response_shift_ns, self.schedule.response_shift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse("", &[]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("[engine]\nn_stepz = 10\n", &[]).unwrap_err();
        assert!(e.downcast_ref::<ConfigError>().is_some());
        assert!(parse("[bogus]\nx = 1\n", &[]).is_err());
    }

    #[test]
    fn overrides() {
        let c = parse("[geometry]\nsites = 9\n", &["geometry.sites=11".into(), "engine.kind=mps".into(), "scan.sizes=[9, 11]".into()]).unwrap();
        assert_eq!(c.geometry.sites, 11);
        assert_eq!(c.engine.kind, EngineKind::Mps);
        assert_eq!(c.scan.sizes, vec![9, 11]);
        assert!(parse("", &["engine.n_steps=abc".into()]).is_err());
        assert!(parse("", &["noequals".into()]).is_err());
    }

    #[test]
    fn unit_conversion() {
        let u = UnitsConfig { omega: 2.5, omega_unit: OmegaUnit::CyclesPerUs };
        // 2π/Ω with Ω = 2π · 2.5 MHz is 0.4 µs, so 8 ns is 0.02 units
        assert!((u.time_unit_us() - 0.4).abs() < 1e-15);
        assert!((u.ns_to_units(8.0) - 0.02).abs() < 1e-15);
        let r = UnitsConfig { omega: 2.5, omega_unit: OmegaUnit::RadPerUs };
        assert!((r.time_unit_us() - 2.0 * std::f64::consts::PI / 2.5).abs() < 1e-15);
        assert!(parse("[units]\nomega = 2.5\n", &[]).is_err());
        assert!(parse("[schedule]\nresponse_shift_ns = 8.0\n", &[]).is_err());
        let c = parse("[units]\nomega = 2.5\nomega_unit = \"cycles_per_us\"\n[schedule]\nresponse_shift_ns = 8.0\n", &[]).unwrap();
        assert!((c.response().1 - 0.02).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        let s = ScanConfig::default();
        let g = s.t_q_grid().unwrap();
        assert_eq!(g.len(), 25);
        assert!((g[24] - 1.2).abs() < 1e-12);
        assert_eq!(s.delta_grid().unwrap().len(), 41);
    }
}
