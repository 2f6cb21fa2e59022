//! Exact evolution of amplitude vectors over an enumerated basis, with
//! diagonal observables, bipartite entropies and binary checkpoints.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::analysis::{order_pairs, order_parameter_from_distribution};
use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, Layout};
use crate::linalg;
use crate::model::{mis_config, named_state, BasisSet, BoundHamiltonian, HamiltonianOperator, NamedKind, NamedState};
use crate::schedule::{step_grid, Control};
use crate::{Config, C64};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    basis: Arc<BasisSet>,
    amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(basis: Arc<BasisSet>, amplitudes: Vec<C64>) -> Result<Self> {
        ensure!(amplitudes.len() == basis.len(), InvalidArgument, "{} amplitudes for a {}-state basis", amplitudes.len(), basis.len());
        Ok(DenseState { basis, amplitudes })
    }

    pub fn basis_state(basis: Arc<BasisSet>, config: Config) -> Result<Self> {
        let idx = basis
            .index_of(config)
            .ok_or_else(|| Error::InvalidArgument("configuration outside the basis".into()))?;
        let mut amplitudes = vec![C64::default(); basis.len()];
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(DenseState { basis, amplitudes })
    }

    pub fn from_named(basis: Arc<BasisSet>, named: &NamedState) -> Result<Self> {
        let amplitudes = named.amplitudes(&basis)?;
        Ok(DenseState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `(config, |amplitude|²)` pairs with non-zero weight.
    pub fn distribution(&self) -> impl Iterator<Item = (Config, f64)> + '_ {
        self.basis
            .configs()
            .iter()
            .zip(&self.amplitudes)
            .map(|(&c, a)| (c, a.norm_sqr()))
            .filter(|p| p.1 > 0.0)
    }

    pub fn overlap(&self, other: &DenseState) -> Result<C64> {
        ensure!(self.basis.len() == other.basis.len(), InvalidArgument, "states live in different bases");
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialMode {
    AllGround,
    /// Ground state of H at the control values at t = 0.
    ExactGround,
}

pub fn initial_state(h: &HamiltonianOperator, control: &dyn Control, mode: InitialMode) -> Result<DenseState> {
    let basis = h.basis().clone();
    match mode {
        InitialMode::AllGround => DenseState::basis_state(basis, 0),
        InitialMode::ExactGround => {
            let (omega, delta) = control.value(0.0);
            ground_state(h, omega, delta)
        }
    }
}

pub fn ground_state(h: &HamiltonianOperator, omega: f64, delta: f64) -> Result<DenseState> {
    let eig = crate::spectra::low_eigs(&h.at(omega, delta), 1)?;
    let amplitudes = eig.vectors[0].iter().map(|&x| C64::new(x, 0.0)).collect();
    DenseState::new(h.basis().clone(), amplitudes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Krylov,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// A-posteriori error bound per Krylov application.
    pub krylov_tol: f64,
    pub krylov_max_dim: usize,
    /// Allowed norm drift per RK4 step.
    pub rk4_norm_tol: f64,
    /// Maximum number of step halvings before giving up.
    pub max_refinements: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { krylov_tol: 1e-10, krylov_max_dim: 30, rk4_norm_tol: 1e-12, max_refinements: 20 }
    }
}

/// Bipartition of basis configurations into left/right substrings.
#[derive(Clone, Debug)]
pub struct CutPartition {
    rows: Vec<u32>,
    cols: Vec<u32>,
    n_rows: usize,
    n_cols: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl CutPartition {
    /// `left_mask` selects the atoms on the left of the cut.
    pub fn new(basis: &BasisSet, left_mask: Config) -> Self {
        let mut lefts: Vec<Config> = basis.configs().iter().map(|c| c & left_mask).collect();
        let mut rights: Vec<Config> = basis.configs().iter().map(|c| c & !left_mask).collect();
        lefts.sort_unstable();
        lefts.dedup();
        rights.sort_unstable();
        rights.dedup();
        let rows = basis.configs().iter().map(|c| lefts.binary_search(&(c & left_mask)).unwrap() as u32).collect();
        let cols = basis.configs().iter().map(|c| rights.binary_search(&(c & !left_mask)).unwrap() as u32).collect();
        CutPartition { rows, cols, n_rows: lefts.len(), n_cols: rights.len() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// Amplitudes arranged as a (left × right) matrix.
    pub fn matrix(&self, amplitudes: &[C64]) -> Array2<C64> {
        let mut m = Array2::zeros((self.n_rows, self.n_cols));
        for (k, a) in amplitudes.iter().enumerate() {
            m[[self.rows[k] as usize, self.cols[k] as usize]] = *a;
        }
        m
    }

    /// Eigenvalues of the reduced density matrix on one side.
    pub fn reduced_spectrum(&self, amplitudes: &[C64], side: Side) -> Result<Vec<f64>> {
        let m = self.matrix(amplitudes);
        let m = match side {
            Side::Left => m,
            Side::Right => m.t().to_owned(),
        };
        let rho = m.dot(&m.t().mapv(|x| x.conj()));
        linalg::eigvalsh_complex(&rho.view())
    }

    /// Schmidt spectrum from whichever side is smaller.
    pub fn schmidt_weights(&self, amplitudes: &[C64]) -> Result<Vec<f64>> {
        let side = if self.n_rows <= self.n_cols { Side::Left } else { Side::Right };
        self.reduced_spectrum(amplitudes, side)
    }

    pub fn entropy(&self, amplitudes: &[C64]) -> Result<f64> {
        Ok(entropy_of_weights(&self.schmidt_weights(amplitudes)?))
    }
}

/// von Neumann entropy (nats) of a normalised set of Schmidt weights σ².
pub fn entropy_of_weights(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    -weights
        .iter()
        .map(|w| w.max(0.0) / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

pub fn entanglement_entropy(state: &DenseState, array: &AtomArray, cut: usize) -> Result<f64> {
    let mask = array.cut_mask(cut)?;
    CutPartition::new(&state.basis, mask).entropy(&state.amplitudes)
}

pub fn expectation_n(state: &DenseState) -> Vec<f64> {
    let n = state.basis.n_atoms();
    let mut out = vec![0.0; n];
    for (c, p) in state.distribution() {
        let mut bits = c;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out[i] += p;
        }
    }
    out
}

/// Occupation per chain site, summing the two atoms of each doublet.
pub fn site_occupation(n: &[f64], array: &AtomArray) -> Result<Vec<f64>> {
    Ok(array.site_groups()?.iter().map(|atoms| atoms.iter().map(|&i| n[i]).sum()).collect())
}

/// What a probability is measured against.
#[derive(Clone, Debug)]
pub enum Target {
    Config(Config),
    Named(NamedState),
}

pub fn state_probability(state: &DenseState, target: &Target) -> Result<f64> {
    match target {
        Target::Config(c) => state
            .basis
            .index_of(*c)
            .map(|i| state.amplitudes[i].norm_sqr())
            .ok_or_else(|| Error::InvalidArgument("target configuration outside the basis".into())),
        Target::Named(named) => named.probability(&state.basis, &state.amplitudes),
    }
}

/// Which observables to record along a trajectory.
#[derive(Clone, Debug, Default)]
pub struct ObservableSpec {
    /// Record every `stride` steps (plus the first and last step).
    pub stride: usize,
    pub mis: Option<Config>,
    pub zigzag: Vec<Config>,
    pub order_pairs: Vec<(usize, usize)>,
    /// Chain cuts (between site `c` and `c + 1`) with their left-atom masks.
    pub cuts: Vec<(usize, Config)>,
    /// Store the full state every `checkpoint_stride` steps.
    pub checkpoint_stride: Option<usize>,
}

impl ObservableSpec {
    /// Observables that make sense for `array`: MIS probability, zigzag
    /// probability and order parameter on doublet chains, central-cut entropy
    /// on any chain.
    pub fn for_array(array: &AtomArray, stride: usize) -> Result<Self> {
        let mut spec = ObservableSpec { stride: stride.max(1), mis: mis_config(array).ok(), ..Default::default() };
        if let Layout::DoubletChain { sites } = array.layout() {
            if sites >= 7 {
                spec.zigzag = named_state(NamedKind::ZigzagMix, array)?.configs().collect();
            }
            if sites >= 9 {
                spec.order_pairs = order_pairs(array)?;
            }
        }
        if array.chain_sites().is_some_and(|s| s >= 2) {
            let cut = array.central_cut()?;
            spec.cuts.push((cut, array.cut_mask(cut)?));
        }
        Ok(spec)
    }

    pub fn with_cuts(mut self, array: &AtomArray, cuts: &[usize]) -> Result<Self> {
        self.cuts = cuts.iter().map(|&c| Ok((c, array.cut_mask(c)?))).collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn with_checkpoints(mut self, stride: usize) -> Self {
        self.checkpoint_stride = Some(stride.max(1));
        self
    }

    pub(crate) fn diagonal_record(&self, t: f64, omega: f64, delta: f64, n_atoms: usize, dist: &[(Config, f64)]) -> Record {
        let mut n = vec![0.0; n_atoms];
        let mut norm = 0.0;
        let mut p_mis = 0.0;
        let mut p_zz = 0.0;
        for &(c, p) in dist {
            norm += p;
            let mut bits = c;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                n[i] += p;
            }
            if Some(c) == self.mis {
                p_mis += p;
            }
            if self.zigzag.contains(&c) {
                p_zz += p;
            }
        }
        let order_parameter = (!self.order_pairs.is_empty())
            .then(|| order_parameter_from_distribution(dist.iter().copied(), &self.order_pairs));
        Record {
            t,
            omega,
            delta,
            norm: norm.sqrt(),
            p_mis: self.mis.map(|_| p_mis),
            p_zigzag: (!self.zigzag.is_empty()).then_some(p_zz),
            order_parameter,
            entropies: Vec::new(),
            n,
            bond_dim_max: None,
            kept_norm: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub omega: f64,
    pub delta: f64,
    pub norm: f64,
    pub p_mis: Option<f64>,
    pub p_zigzag: Option<f64>,
    pub order_parameter: Option<f64>,
    /// Entropy at each requested cut, in the order of the spec.
    pub entropies: Vec<f64>,
    pub n: Vec<f64>,
    pub bond_dim_max: Option<usize>,
    pub kept_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub omega: f64,
    pub delta: f64,
    pub amplitudes: Vec<C64>,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub cuts: Vec<usize>,
    pub records: Vec<Record>,
    pub checkpoints: Vec<Checkpoint>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map_or(String::new(), |x| format!("{x:.16e}"))
        }
        let n_atoms = self.records.first().map_or(0, |r| r.n.len());
        let has_mps = self.records.iter().any(|r| r.bond_dim_max.is_some());
        let mut out = String::from("t,omega,delta,norm,p_mis,p_zigzag,order_parameter");
        for c in &self.cuts {
            let _ = write!(out, ",entropy_cut{c}");
        }
        for i in 0..n_atoms {
            let _ = write!(out, ",n{i}");
        }
        if has_mps {
            out.push_str(",bond_dim_max,kept_norm");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                r.t,
                r.omega,
                r.delta,
                r.norm,
                opt(r.p_mis),
                opt(r.p_zigzag),
                opt(r.order_parameter)
            );
            for s in &r.entropies {
                let _ = write!(out, ",{s:.16e}");
            }
            for x in &r.n {
                let _ = write!(out, ",{x:.16e}");
            }
            if has_mps {
                let _ = write!(out, ",{},{}", r.bond_dim_max.map_or(String::new(), |b| b.to_string()), opt(r.kept_norm));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "cuts": self.cuts,
            "records": self.records,
        }))?)
    }
}

struct Recorder<'a> {
    spec: &'a ObservableSpec,
    partitions: Vec<CutPartition>,
    trajectory: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a ObservableSpec, basis: &BasisSet) -> Self {
        let partitions = spec.cuts.iter().map(|&(_, mask)| CutPartition::new(basis, mask)).collect();
        let trajectory = Trajectory { cuts: spec.cuts.iter().map(|c| c.0).collect(), ..Default::default() };
        Recorder { spec, partitions, trajectory }
    }

    fn record(&mut self, state: &DenseState, t: f64, omega: f64, delta: f64) -> Result<()> {
        let dist: Vec<(Config, f64)> = state.distribution().collect();
        let mut rec = self.spec.diagonal_record(t, omega, delta, state.basis.n_atoms(), &dist);
        rec.entropies = self.partitions.iter().map(|p| p.entropy(&state.amplitudes)).collect::<Result<_>>()?;
        self.trajectory.records.push(rec);
        Ok(())
    }

    fn checkpoint(&mut self, state: &DenseState, t: f64, omega: f64, delta: f64) {
        self.trajectory.checkpoints.push(Checkpoint { t, omega, delta, amplitudes: state.amplitudes.clone() });
    }
}

/// Evolves `state` under `control` with H frozen at each step's midpoint.
/// The step grid places boundaries on every waveform breakpoint.
pub fn evolve(
    state: &mut DenseState,
    h: &HamiltonianOperator,
    control: &dyn Control,
    n_steps: usize,
    method: Method,
    spec: &ObservableSpec,
) -> Result<Trajectory> {
    evolve_with(state, h, control, n_steps, method, spec, &Tolerances::default())
}

pub fn evolve_with(
    state: &mut DenseState,
    h: &HamiltonianOperator,
    control: &dyn Control,
    n_steps: usize,
    method: Method,
    spec: &ObservableSpec,
    tol: &Tolerances,
) -> Result<Trajectory> {
    ensure!(state.basis.len() == h.dim(), InvalidArgument, "state and Hamiltonian bases differ");
    let grid = step_grid(control, n_steps)?;
    let steps = grid.len() - 1;
    let stride = spec.stride.max(1);
    let mut rec = Recorder::new(spec, &state.basis);
    let mut work = Workspace::new(h.dim());

    let (o0, d0) = control.value(0.0);
    rec.record(state, 0.0, o0, d0)?;
    if spec.checkpoint_stride.is_some() {
        rec.checkpoint(state, 0.0, o0, d0);
    }
    for k in 0..steps {
        let (t0, t1) = (grid[k], grid[k + 1]);
        let (omega, delta) = control.value(0.5 * (t0 + t1));
        let tau = TWO_PI * (t1 - t0);
        let bound = h.at(omega, delta);
        match method {
            Method::Krylov => krylov_propagate(&bound, &mut state.amplitudes, tau, tol, &mut work)?,
            Method::Rk4 => rk4_propagate(&bound, &mut state.amplitudes, tau, tol, &mut work)?,
        }
        let done = k + 1;
        let (o, d) = control.value(t1);
        if done % stride == 0 || done == steps {
            rec.record(state, t1, o, d)?;
        }
        if let Some(cs) = spec.checkpoint_stride {
            if done % cs == 0 || done == steps {
                rec.checkpoint(state, t1, o, d);
            }
        }
    }
    Ok(rec.trajectory)
}

/// Scratch buffers reused across propagation steps.
pub struct Workspace {
    v: Vec<Vec<C64>>,
    w: Vec<C64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    // last accepted Krylov substep, reused as the first guess of the next call
    step_hint: f64,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        let z = || vec![C64::default(); dim];
        Workspace { v: Vec::new(), w: z(), k: [z(), z(), z(), z()], tmp: z(), step_hint: 0.0 }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `psi ← exp(-i τ H) psi`, splitting τ whenever the Krylov space of the
/// allowed dimension does not reach the tolerance.
pub fn krylov_propagate(h: &BoundHamiltonian, psi: &mut [C64], tau: f64, tol: &Tolerances, work: &mut Workspace) -> Result<()> {
    let mut remaining = tau;
    let mut sub = if work.step_hint > 0.0 { tau.min(1.25 * work.step_hint) } else { tau };
    let mut refinements = 0;
    while remaining > 0.0 {
        sub = sub.min(remaining);
        if krylov_try(h, psi, sub, tol, work)? {
            if sub < remaining {
                work.step_hint = sub;
            }
            remaining -= sub;
            if remaining <= 1e-15 * tau {
                break;
            }
        } else {
            refinements += 1;
            ensure!(refinements <= tol.max_refinements, Numeric, "Krylov propagation did not reach {:e}", tol.krylov_tol);
            sub *= 0.5;
        }
    }
    Ok(())
}

fn krylov_try(h: &BoundHamiltonian, psi: &mut [C64], tau: f64, tol: &Tolerances, work: &mut Workspace) -> Result<bool> {
    let dim = psi.len();
    let beta0 = norm(psi);
    if beta0 == 0.0 {
        return Ok(true);
    }
    let m_max = tol.krylov_max_dim.min(dim).max(1);
    while work.v.len() < m_max {
        work.v.push(vec![C64::default(); dim]);
    }
    for (v, p) in work.v[0].iter_mut().zip(psi.iter()) {
        *v = p / beta0;
    }
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    for j in 0..m_max {
        h.apply(&work.v[j], &mut work.w);
        // three-term recurrence; the short spaces used here stay orthogonal
        // to well within the propagation tolerance
        if j > 0 {
            let b_prev = beta[j - 1];
            for (w, v) in work.w.iter_mut().zip(&work.v[j - 1]) {
                *w -= b_prev * v;
            }
        }
        let a = dot(&work.v[j], &work.w).re;
        alpha.push(a);
        for (w, v) in work.w.iter_mut().zip(&work.v[j]) {
            *w -= a * v;
        }
        let b = norm(&work.w);
        let m = j + 1;
        let coeffs = exp_tridiagonal(&alpha, &beta, tau)?;
        let err = b * coeffs[m - 1].norm();
        let breakdown = b < 1e-13 * (1.0 + a.abs());
        if breakdown || err < tol.krylov_tol {
            for p in psi.iter_mut() {
                *p = C64::default();
            }
            for (k, c) in coeffs.iter().enumerate() {
                let c = c * beta0;
                for (p, v) in psi.iter_mut().zip(&work.v[k]) {
                    *p += c * v;
                }
            }
            return Ok(true);
        }
        if m == m_max {
            return Ok(false);
        }
        beta.push(b);
        for (v, w) in work.v[j + 1].iter_mut().zip(&work.w) {
            *v = w / b;
        }
    }
    Ok(false)
}

/// First column of exp(-i τ T) for the tridiagonal T(alpha, beta).
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], tau: f64) -> Result<Vec<C64>> {
    let m = alpha.len();
    if m == 1 {
        return Ok(vec![C64::from_polar(1.0, -tau * alpha[0])]);
    }
    let (evals, evecs) = linalg::eigh_tridiagonal(alpha, &beta[..m - 1])?;
    Ok((0..m)
        .map(|r| (0..m).map(|k| evecs[[r, k]] * evecs[[0, k]] * C64::from_polar(1.0, -tau * evals[k])).sum())
        .collect())
}

/// `psi ← exp(-i τ H) psi` by classical RK4, halving the substep until the
/// norm drift of the step is below tolerance.
pub fn rk4_propagate(h: &BoundHamiltonian, psi: &mut [C64], tau: f64, tol: &Tolerances, work: &mut Workspace) -> Result<()> {
    let bound = h.op.norm_bound(h.omega, h.delta).max(1e-12);
    let mut n_sub = ((tau * bound / 0.05).ceil() as usize).max(1);
    let start = psi.to_vec();
    let n0 = norm(psi);
    for _ in 0..=tol.max_refinements {
        psi.copy_from_slice(&start);
        let dt = tau / n_sub as f64;
        for _ in 0..n_sub {
            rk4_substep(h, psi, dt, work);
        }
        if (norm(psi) - n0).abs() <= tol.rk4_norm_tol * n0.max(1.0) {
            return Ok(());
        }
        n_sub *= 2;
    }
    Err(Error::Numeric("RK4 norm drift above tolerance after all refinements".into()))
}

fn rk4_substep(h: &BoundHamiltonian, psi: &mut [C64], dt: f64, work: &mut Workspace) {
    let minus_i = C64::new(0.0, -1.0);
    let Workspace { k, tmp, .. } = work;
    // k_s = -i H (psi + c_s dt k_{s-1})
    let coef = [0.0, 0.5, 0.5, 1.0];
    for s in 0..4 {
        if s == 0 {
            tmp.copy_from_slice(psi);
        } else {
            let (prev, _) = k.split_at(s);
            for (t, (p, kp)) in tmp.iter_mut().zip(psi.iter().zip(&prev[s - 1])) {
                *t = p + kp * (coef[s] * dt);
            }
        }
        h.apply(tmp, &mut k[s]);
        for x in k[s].iter_mut() {
            *x *= minus_i;
        }
    }
    for (i, p) in psi.iter_mut().enumerate() {
        *p += (k[0][i] + k[1][i] * 2.0 + k[2][i] * 2.0 + k[3][i]) * (dt / 6.0);
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    basis_hash: String,
    dim: usize,
    t: f64,
    omega: f64,
    delta: f64,
}

/// Writes amplitudes as little-endian complex64 (two f32 per entry) to `path`
/// and a JSON header to `path` + `.json`.
pub fn write_checkpoint(path: &Path, basis: &BasisSet, cp: &Checkpoint) -> Result<()> {
    let mut bytes = Vec::with_capacity(cp.amplitudes.len() * 8);
    for a in &cp.amplitudes {
        bytes.extend_from_slice(&(a.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(a.im as f32).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&bytes)?;
    let header = CheckpointHeader {
        format: "complex64-le".into(),
        basis_hash: basis.content_hash(),
        dim: cp.amplitudes.len(),
        t: cp.t,
        omega: cp.omega,
        delta: cp.delta,
    };
    std::fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path, basis: &BasisSet) -> Result<Checkpoint> {
    let header: CheckpointHeader = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
    ensure!(header.format == "complex64-le", Parse, "unknown checkpoint format {:?}", header.format);
    ensure!(header.basis_hash == basis.content_hash(), InvalidArgument, "checkpoint was written for a different basis");
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    ensure!(bytes.len() == header.dim * 8, Parse, "checkpoint holds {} bytes, expected {}", bytes.len(), header.dim * 8);
    let amplitudes = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            C64::new(re as f64, im as f64)
        })
        .collect();
    Ok(Checkpoint { t: header.t, omega: header.omega, delta: header.delta, amplitudes })
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
