use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sqs_core::analysis::{quench_scan_summary, scaling_fit};
use sqs_core::dyn_dense::Record;
use sqs_core::measure::{self, Estimate, Predicate, ShotSet};
use sqs_core::model::{exact_mis, mis_config};
use sqs_core::schedule::sample_csv;
use sqs_core::spectra::{ground_scan, instantaneous_overlaps, min_gap};
use sqs_core::{config_to_string, AtomArray, ErrorKind, Layout};

use crate::config::{ConfigError, EngineKind, ExperimentConfig};
use crate::output::{f, RunDir};
use crate::pipeline::{self, System};

/// Coarse grid used to bracket the minimum gap before golden-section refinement.
const GAP_COARSE_POINTS: usize = 41;
const GAP_RESOLUTION: f64 = 1e-4;
const WAVEFORM_SAMPLES: usize = 2001;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub run: RunDir,
    header: Map<String, Value>,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, command: &'static str) -> Result<Self> {
        let run = RunDir::create(std::path::Path::new(&cfg.outputs.directory))?;
        let resolved = serde_json::to_value(&cfg)?;
        let mut header = Map::new();
        header.insert("tool".into(), json!("sqs"));
        header.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        header.insert("command".into(), json!(command));
        header.insert("config_sha256".into(), json!(crate::output::sha256_hex(serde_json::to_string(&resolved)?.as_bytes())));
        header.insert("config".into(), resolved);
        header.insert("seed".into(), json!(cfg.measurement.seed));
        if let Some(u) = &cfg.units {
            header.insert("time_unit_us".into(), json!(u.time_unit_us()));
        }
        Ok(Context { cfg, run, header })
    }

    fn note(&mut self, key: &str, value: Value) {
        self.header.insert(key.into(), value);
    }

    fn system(&mut self) -> Result<System> {
        let array = pipeline::build_array(&self.cfg.geometry)?;
        self.note("array_sha256", json!(array.content_hash()));
        self.note("n_atoms", json!(array.len()));
        System::new(&self.cfg, array)
    }

    pub fn finish(self) -> Result<std::path::PathBuf> {
        self.run.finish(self.header)
    }
}

fn chain_sites(array: &AtomArray) -> Option<usize> {
    match array.layout() {
        Layout::DoubletChain { sites } | Layout::Chain { sites } => Some(sites),
        _ => None,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, f)
}

pub fn geometry(ctx: &mut Context) -> Result<()> {
    let sys = ctx.system()?;
    ctx.run.write("geometry.json", sys.array.to_json()?)?;
    ctx.run.write_json("graph.json", &json!({ "n_vertices": sys.graph.n_vertices(), "edges": sys.graph.edges() }))?;
    let mut csv = String::from("i,j,distance_um,energy\n");
    for (i, j, v) in sys.interactions.pairs() {
        let _ = writeln!(csv, "{i},{j},{},{}", f(sys.array.distance(i, j)), f(v));
    }
    ctx.run.write("interactions.csv", csv)?;
    let n = sys.array.len();
    let mis = exact_mis(&sys.graph)?;
    let designated = mis_config(&sys.array).ok();
    ctx.run.write_json(
        "mis.json",
        &json!({
            "size": mis.size,
            "count": mis.maximizers.len(),
            "maximizers": mis.maximizers.iter().map(|&c| config_to_string(c, n)).collect::<Vec<_>>(),
            "designated": designated.map(|c| config_to_string(c, n)),
            "designated_is_maximum": designated.map(|c| mis.maximizers.contains(&c)),
            "search_nodes": mis.nodes,
        }),
    )?;
    Ok(())
}

pub fn groundscan(ctx: &mut Context) -> Result<()> {
    let sys = ctx.system()?;
    let h = sys.hamiltonian()?;
    ctx.note("basis_dim", json!(h.dim()));
    let scan = ground_scan(&sys.array, &h, &ctx.cfg.scan.delta_grid()?, ctx.cfg.scan.levels)?;
    ctx.run.write("scan.csv", scan.to_csv())?;
    let [lo, hi] = ctx.cfg.scan.gap_window;
    let gap = min_gap(&h, 1.0, (lo, hi), GAP_COARSE_POINTS, GAP_RESOLUTION)?;
    ctx.run.write_json(
        "gap.json",
        &json!({ "window": [lo, hi], "delta_min_gap": gap.delta, "min_gap": gap.gap, "mis_transition": scan.mis_transition() }),
    )?;
    Ok(())
}

fn summary(rec: &Record) -> Value {
    json!({
        "t": rec.t,
        "delta": rec.delta,
        "norm": rec.norm,
        "p_mis": rec.p_mis,
        "p_zigzag": rec.p_zigzag,
        "order_parameter": rec.order_parameter,
        "entropies": rec.entropies,
        "bond_dim_max": rec.bond_dim_max,
        "kept_norm": rec.kept_norm,
    })
}

pub fn sweep(ctx: &mut Context) -> Result<()> {
    let sys = ctx.system()?;
    let control = pipeline::waveform(&ctx.cfg, None)?;
    let spec = pipeline::observables(&ctx.cfg, &sys.array, ctx.cfg.engine.record_stride)?;
    let (traj, _) = pipeline::run(&ctx.cfg, &sys, None, control.as_ref(), &spec)?;
    ctx.run.write("trajectory.csv", traj.to_csv())?;
    ctx.run.write("waveform.csv", sample_csv(control.as_ref(), WAVEFORM_SAMPLES)?)?;
    let last = traj.last().expect("trajectory has records");
    let duration_us = ctx.cfg.units.map(|u| u.time_unit_us() * control.duration());
    ctx.run.write_json(
        "summary.json",
        &json!({ "duration": control.duration(), "duration_us": duration_us, "cuts": traj.cuts, "final": summary(last) }),
    )?;
    Ok(())
}

pub fn scan_tq(ctx: &mut Context) -> Result<()> {
    let sys = ctx.system()?;
    let grid = ctx.cfg.scan.t_q_grid()?;
    let h = match ctx.cfg.engine.kind {
        EngineKind::Dense => Some(sys.hamiltonian()?),
        EngineKind::Mps => None,
    };
    let cfg = &ctx.cfg;
    let spec = pipeline::observables(cfg, &sys.array, cfg.engine.n_steps)?;
    let finals: Vec<Record> = grid
        .par_iter()
        .map(|&t_q| {
            let control = pipeline::waveform(cfg, Some(t_q))?;
            let (traj, _) = pipeline::run(cfg, &sys, h.as_ref(), control.as_ref(), &spec)?;
            Ok(traj.last().expect("trajectory has records").clone())
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("t_q,p_mis,p_zigzag,order_parameter,entropy\n");
    for (t, r) in grid.iter().zip(&finals) {
        let _ = writeln!(csv, "{},{},{},{},{}", f(*t), opt(r.p_mis), opt(r.p_zigzag), opt(r.order_parameter), opt(r.entropies.first().copied()));
    }
    ctx.run.write("scan.csv", csv)?;
    let p: Vec<f64> = finals.iter().map(|r| r.p_mis.unwrap_or(0.0)).collect();
    let argmax = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
    let revival = match quench_scan_summary(&grid, &p, None) {
        Ok(s) => Some(s.first_revival),
        Err(e) if e.kind() == ErrorKind::Numeric => None,
        Err(e) => return Err(e.into()),
    };
    ctx.run.write_json("quench.json", &json!({ "argmax": grid[argmax], "p_max": p[argmax], "first_revival": revival }))?;
    Ok(())
}

pub fn scan_size(ctx: &mut Context) -> Result<()> {
    let sizes = ctx.cfg.scan.sizes.clone();
    if sizes.len() < 2 {
        return Err(ConfigError("scan.sizes needs at least two entries".into()).into());
    }
    let cfg = &ctx.cfg;
    let rows: Vec<(usize, usize, Record)> = sizes
        .par_iter()
        .map(|&l| {
            let mut c = cfg.clone();
            c.geometry.sites = l;
            let sys = System::new(&c, pipeline::build_array(&c.geometry)?)?;
            let control = pipeline::waveform(&c, None)?;
            let spec = pipeline::observables(&c, &sys.array, c.engine.n_steps)?;
            let (traj, _) = pipeline::run(&c, &sys, None, control.as_ref(), &spec)?;
            Ok((l, sys.array.len(), traj.last().expect("trajectory has records").clone()))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("sites,atoms,p_mis,entropy,bond_dim_max\n");
    for (l, n, r) in &rows {
        let bond = r.bond_dim_max.map_or_else(String::new, |b| b.to_string());
        let _ = writeln!(csv, "{l},{n},{},{},{bond}", opt(r.p_mis), opt(r.entropies.first().copied()));
    }
    ctx.run.write("scan.csv", csv)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ps: Vec<f64> = rows.iter().map(|r| r.2.p_mis.unwrap_or(0.0)).collect();
    let fit = scaling_fit(&xs, &ps, None, cfg.scan.n0)?;
    ctx.run.write_json("fit.json", &fit)?;
    Ok(())
}

pub fn spectra(ctx: &mut Context) -> Result<()> {
    if ctx.cfg.engine.kind != EngineKind::Dense {
        return Err(ConfigError("spectra needs the dense engine".into()).into());
    }
    let sys = ctx.system()?;
    let h = sys.hamiltonian()?;
    let control = pipeline::waveform(&ctx.cfg, None)?;
    let spec = pipeline::observables(&ctx.cfg, &sys.array, ctx.cfg.engine.record_stride)?
        .with_checkpoints(ctx.cfg.engine.checkpoint_stride.max(1));
    let (traj, _) = pipeline::run(&ctx.cfg, &sys, Some(&h), control.as_ref(), &spec)?;
    let table = instantaneous_overlaps(&traj.checkpoints, &h, ctx.cfg.scan.levels)?;
    ctx.run.write("overlaps.csv", table.to_csv())?;
    ctx.run.write("trajectory.csv", traj.to_csv())?;
    Ok(())
}

fn estimates(shots: &ShotSet, preds: &[(&str, Predicate)]) -> Result<Value> {
    let mut out = Map::new();
    for (name, p) in preds {
        let e: Estimate = measure::estimate(shots, p)?;
        out.insert(
            name.to_string(),
            json!({ "probability": e.probability, "standard_error": e.standard_error, "hits": e.hits, "shots": e.shots }),
        );
    }
    Ok(Value::Object(out))
}

pub fn sample(ctx: &mut Context) -> Result<()> {
    let sys = ctx.system()?;
    let control = pipeline::waveform(&ctx.cfg, None)?;
    let spec = pipeline::observables(&ctx.cfg, &sys.array, ctx.cfg.engine.n_steps)?;
    let (traj, mut state) = pipeline::run(&ctx.cfg, &sys, None, control.as_ref(), &spec)?;
    let m = &ctx.cfg.measurement;
    let seed = m.seed;
    let postprocess = m.postprocess.unwrap_or(chain_sites(&sys.array).is_none());

    let mut preds = vec![("mis", Predicate::mis(&sys.array)?)];
    if let Ok(z) = Predicate::zigzag(&sys.array) {
        preds.push(("zigzag", z));
    }
    let mut stages = Map::new();
    let mut shots = state.sample(m.shots, seed)?.with_array(&sys.array)?;
    stages.insert("raw".into(), estimates(&shots, &preds)?);
    if m.noise {
        measure::write_shots(&ctx.run.path("shots_raw.txt"), &shots)?;
        ctx.run.adopt("shots_raw.txt")?;
        ctx.run.adopt("shots_raw.txt.json")?;
        shots = measure::detection_channel(&shots, m.p_r_to_g, m.p_g_to_r, seed)?;
        stages.insert("noisy".into(), estimates(&shots, &preds)?);
    }
    if postprocess {
        shots = measure::postprocess_shots(&shots, &sys.graph, seed)?;
        stages.insert("postprocessed".into(), estimates(&shots, &preds)?);
    }
    measure::write_shots(&ctx.run.path("shots.txt"), &shots)?;
    ctx.run.adopt("shots.txt")?;
    ctx.run.adopt("shots.txt.json")?;
    let last = traj.last().expect("trajectory has records");
    ctx.run.write_json("estimate.json", &json!({ "exact": summary(last), "stages": Value::Object(stages) }))?;
    Ok(())
}

/// Reads `size,p[,err]` rows with a header line.
fn read_fit_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().map(|h| h.split(',').map(str::trim).collect()).unwrap_or_default();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(si), Some(pi)) = (col("size"), col("p")) else {
        bail!(ConfigError("fit input needs a header with 'size' and 'p' columns".into()));
    };
    let ei = col("err");
    let (mut s, mut p, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| ConfigError(format!("fit input row {}: bad number in column {i}", k + 2)).into())
        };
        s.push(get(si)?);
        p.push(get(pi)?);
        if let Some(i) = ei {
            e.push(get(i)?);
        }
    }
    Ok((s, p, ei.map(|_| e)))
}

pub fn fit(ctx: &mut Context) -> Result<()> {
    let Some(path) = ctx.cfg.fit.input.clone() else {
        bail!(ConfigError("fit needs fit.input".into()));
    };
    let text = std::fs::read_to_string(&path)?;
    let (s, p, e) = read_fit_csv(&text)?;
    ctx.note("fit_input_sha256", json!(crate::output::sha256_hex(text.as_bytes())));
    let fit = scaling_fit(&s, &p, e.as_deref(), ctx.cfg.fit.n0)?;
    ctx.run.write_json("fit.json", &fit)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_csv_parsing() {
        let (s, p, e) = read_fit_csv("size,p\n9,0.5\n11,0.25\n").unwrap();
        assert_eq!((s, p, e), (vec![9.0, 11.0], vec![0.5, 0.25], None));
        let (_, _, e) = read_fit_csv("p,err,size\n0.5,0.01,9\n0.25,0.02,11\n").unwrap();
        assert_eq!(e, Some(vec![0.01, 0.02]));
        assert!(read_fit_csv("n,p\n9,0.5\n").is_err());
        assert!(read_fit_csv("size,p\n9,x\n").is_err());
    }
}
