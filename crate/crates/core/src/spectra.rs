//! Low-lying spectra: eigenpairs of H(Δ), ground-state scans, minimum-gap
//! search, instantaneous eigenstate overlaps and independent-set counting.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{order_pairs, order_parameter_from_distribution};
use crate::dyn_dense::Checkpoint;
use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, BlockadeGraph, Layout};
use crate::linalg;
use crate::model::{mis_config, named_state, BoundHamiltonian, HamiltonianOperator, NamedKind};
use crate::{Config, C64};

/// Largest dimension solved with the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const RESTART_BUDGET: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit-norm, mutually orthogonal; largest-magnitude entry positive.
    pub vectors: Vec<Vec<f64>>,
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `k` lowest eigenpairs: dense solve up to [`DENSE_LIMIT`], Lanczos
/// with full reorthogonalisation and locking above it.
pub fn low_eigs(h: &BoundHamiltonian, k: usize) -> Result<Eigenpairs> {
    ensure!(k >= 1, InvalidArgument, "k must be at least 1");
    ensure!(k <= h.dim(), InvalidArgument, "k = {k} exceeds the dimension {}", h.dim());
    if h.dim() <= DENSE_LIMIT {
        dense_low_eigs(h, k)
    } else {
        lanczos_low_eigs(h, k, RESIDUAL_TOL, RESTART_BUDGET)
    }
}

pub fn dense_low_eigs(h: &BoundHamiltonian, k: usize) -> Result<Eigenpairs> {
    let (values, vecs) = linalg::eigh_real(&h.op.to_dense(h.omega, h.delta).view())?;
    let vectors = (0..k)
        .map(|j| {
            let mut v = vecs.column(j).to_vec();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(Eigenpairs { values: values[..k].to_vec(), vectors })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in against {
            let c = dot(v, w);
            w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(w: &mut [f64]) -> f64 {
    let n = dot(w, w).sqrt();
    if n > 0.0 {
        w.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Restarted Lanczos with locking. Converged Ritz vectors are locked and
/// projected out of later Krylov spaces, so exactly degenerate eigenvalues
/// are found once per copy. Once `k` pairs are locked, a pass from a fresh
/// start vector checks that nothing below them was missed.
pub fn lanczos_low_eigs(h: &BoundHamiltonian, k: usize, tol: f64, restarts: usize) -> Result<Eigenpairs> {
    let dim = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let random_start = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect() };
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut start = random_start(&mut rng);
    let mut hx = vec![0.0; dim];
    let mut verifying = false;
    for _ in 0..=restarts {
        let locked_vecs: Vec<Vec<f64>> = locked.iter().map(|l| l.1.clone()).collect();
        orthogonalize(&mut start, &locked_vecs);
        if dim == locked.len() || normalize(&mut start) < 1e-300 {
            break;
        }
        let wanted = if locked.len() >= k { 1 } else { k - locked.len() };
        let m_max = (dim - locked.len()).min((20 * k + 40).max(300));
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz = None;
        for j in 0..m_max {
            let mut w = vec![0.0; dim];
            h.apply(&basis[j], &mut w);
            alpha.push(dot(&basis[j], &w));
            orthogonalize(&mut w, &locked_vecs);
            orthogonalize(&mut w, &basis);
            let b = normalize(&mut w);
            let m = j + 1;
            let last = m == m_max || b < 1e-12;
            if last || (m >= wanted && m % 10 == 0) {
                let (theta, y) = linalg::eigh_tridiagonal(&alpha, &beta)?;
                let settled = (0..wanted.min(m)).all(|i| b * y[[m - 1, i]].abs() < 0.1 * tol);
                if last || (settled && m >= wanted) {
                    ritz = Some((theta, y));
                    break;
                }
            }
            beta.push(b);
            basis.push(w);
        }
        let (theta, y) = ritz.expect("Krylov loop always ends with a Ritz solve");
        let m = alpha.len();
        let mut unconverged = vec![0.0; dim];
        let mut newly_locked = 0;
        for i in 0..wanted.min(m) {
            let mut x = vec![0.0; dim];
            for (r, v) in basis.iter().enumerate().take(m) {
                let c = y[[r, i]];
                x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
            }
            normalize(&mut x);
            h.apply(&x, &mut hx);
            let res = hx.iter().zip(&x).map(|(a, b)| (a - theta[i] * b).powi(2)).sum::<f64>().sqrt();
            if res < tol {
                locked.push((theta[i], x));
                newly_locked += 1;
            } else {
                unconverged.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
            }
        }
        locked.sort_by(|a, b| a.0.total_cmp(&b.0));
        if locked.len() >= k {
            let kth = locked[k - 1].0;
            if verifying && theta[0] >= kth - tol {
                break;
            }
            if !verifying || newly_locked > 0 {
                verifying = true;
                start = random_start(&mut rng);
                continue;
            }
        }
        start = if unconverged.iter().any(|&x| x != 0.0) { unconverged } else { random_start(&mut rng) };
    }
    ensure!(locked.len() >= k, Numeric, "Lanczos found {} of {k} eigenpairs within {restarts} restarts", locked.len());
    locked.truncate(k);
    let values = locked.iter().map(|l| l.0).collect();
    let vectors = locked
        .into_iter()
        .map(|(_, mut v)| {
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(Eigenpairs { values, vectors })
}

/// Per-Δ ground-state data and low-lying energies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub delta: f64,
    pub energies: Vec<f64>,
    /// |⟨MIS|E_j⟩|² per eigenstate.
    pub overlap_mis: Vec<f64>,
    /// |⟨Z|E_j⟩|² + |⟨Z̄|E_j⟩|² per eigenstate.
    pub overlap_zigzag: Vec<f64>,
    pub n_total: f64,
    pub n_site: Vec<f64>,
    pub p_mis: f64,
    pub order_parameter: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpectrumScan {
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumScan {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta).collect()
    }

    /// Δ where the ground-state MIS probability first crosses 1/2, linearly
    /// interpolated between grid points.
    pub fn mis_transition(&self) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.p_mis < 0.5 && b.p_mis >= 0.5)
                .then(|| a.delta + (0.5 - a.p_mis) / (b.p_mis - a.p_mis) * (b.delta - a.delta))
        })
    }

    pub fn to_csv(&self) -> String {
        let k = self.points.first().map_or(0, |p| p.energies.len());
        let mut out = String::from("delta");
        for prefix in ["E", "ovl_mis_", "ovl_zz_"] {
            for j in 0..k {
                let _ = write!(out, ",{prefix}{j}");
            }
        }
        out.push_str(",n_total,P_mis,O\n");
        for p in &self.points {
            let _ = write!(out, "{:.16e}", p.delta);
            for x in p.energies.iter().chain(&p.overlap_mis).chain(&p.overlap_zigzag) {
                let _ = write!(out, ",{x:.16e}");
            }
            let o = p.order_parameter.map_or(String::new(), |o| format!("{o:.16e}"));
            let _ = writeln!(out, ",{:.16e},{:.16e},{o}", p.n_total, p.p_mis);
        }
        out
    }
}

struct Targets {
    mis: Option<usize>,
    zigzag: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl Targets {
    fn new(array: &AtomArray, h: &HamiltonianOperator) -> Result<Self> {
        let basis = h.basis();
        let mis = mis_config(array).ok().and_then(|c| basis.index_of(c));
        let mut zigzag = Vec::new();
        let mut pairs = Vec::new();
        if let Layout::DoubletChain { sites } = array.layout() {
            if sites >= 7 {
                zigzag = named_state(NamedKind::ZigzagMix, array)?.configs().filter_map(|c| basis.index_of(c)).collect();
            }
            if sites >= 9 {
                pairs = order_pairs(array)?;
            }
        }
        Ok(Targets { mis, zigzag, pairs })
    }
}

/// Lowest `k` levels and ground-state observables at every Δ of `grid` (Ω = 1).
pub fn ground_scan(array: &AtomArray, h: &HamiltonianOperator, grid: &[f64], k: usize) -> Result<SpectrumScan> {
    ensure!(!grid.is_empty(), InvalidArgument, "empty detuning grid");
    let targets = Targets::new(array, h)?;
    let basis = h.basis();
    let points = grid
        .par_iter()
        .map(|&delta| {
            let eig = low_eigs(&h.at(1.0, delta), k)?;
            let overlap_mis = eig.vectors.iter().map(|v| targets.mis.map_or(0.0, |i| v[i] * v[i])).collect();
            let overlap_zigzag = eig.vectors.iter().map(|v| targets.zigzag.iter().map(|&i| v[i] * v[i]).sum()).collect();
            let g = &eig.vectors[0];
            let mut n = vec![0.0; basis.n_atoms()];
            for (idx, &c) in basis.configs().iter().enumerate() {
                let p = g[idx] * g[idx];
                let mut bits = c;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    n[i] += p;
                }
            }
            let n_site = match array.site_groups() {
                Ok(groups) => groups.iter().map(|atoms| atoms.iter().map(|&i| n[i]).sum()).collect(),
                Err(_) => n.clone(),
            };
            let order_parameter = (!targets.pairs.is_empty()).then(|| {
                let dist = basis.configs().iter().zip(g).map(|(&c, a)| (c, a * a));
                order_parameter_from_distribution(dist, &targets.pairs)
            });
            Ok(SpectrumPoint {
                delta,
                p_mis: targets.mis.map_or(0.0, |i| g[i] * g[i]),
                energies: eig.values,
                overlap_mis,
                overlap_zigzag,
                n_total: n.iter().sum(),
                n_site,
                order_parameter,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan { points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinGap {
    pub delta: f64,
    pub gap: f64,
}

pub fn gap_at(h: &HamiltonianOperator, omega: f64, delta: f64) -> Result<f64> {
    let e = low_eigs(&h.at(omega, delta), 2)?.values;
    Ok(e[1] - e[0])
}

/// Minimum of E₁ − E₀ over `window`: a coarse scan of `coarse` points, then
/// golden-section refinement to a Δ resolution of `resolution`.
pub fn min_gap(h: &HamiltonianOperator, omega: f64, window: (f64, f64), coarse: usize, resolution: f64) -> Result<MinGap> {
    let (lo, hi) = window;
    ensure!(hi > lo, InvalidArgument, "empty detuning window");
    ensure!(coarse >= 3, InvalidArgument, "need at least 3 coarse points");
    ensure!(h.dim() >= 2, InvalidArgument, "a gap needs at least two levels");
    let grid: Vec<f64> = (0..coarse).map(|i| lo + (hi - lo) * i as f64 / (coarse - 1) as f64).collect();
    let gaps: Vec<f64> = grid.par_iter().map(|&d| gap_at(h, omega, d)).collect::<Result<_>>()?;
    let best = (0..coarse).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap();
    ensure!(
        best != 0 && best != coarse - 1,
        Numeric,
        "gap minimum lies on the window edge (Δ = {}); widen the window",
        grid[best]
    );
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = gap_at(h, omega, c)?;
    let mut fd = gap_at(h, omega, d)?;
    while b - a > resolution {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = gap_at(h, omega, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = gap_at(h, omega, d)?;
        }
    }
    let delta = 0.5 * (a + b);
    Ok(MinGap { delta, gap: gap_at(h, omega, delta)? })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapTable {
    pub times: Vec<f64>,
    pub deltas: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
    /// `overlaps[t][j]` = |⟨E_j(Δ(t))|ψ(t)⟩|².
    pub overlaps: Vec<Vec<f64>>,
}

impl OverlapTable {
    pub fn to_csv(&self) -> String {
        let k = self.overlaps.first().map_or(0, |o| o.len());
        let mut out = String::from("t,delta");
        for j in 0..k {
            let _ = write!(out, ",E{j}");
        }
        for j in 0..k {
            let _ = write!(out, ",ovl_{j}");
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.16e},{:.16e}", self.deltas[i]);
            for x in self.energies[i].iter().chain(&self.overlaps[i]) {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Decomposes checkpointed states onto the `k` lowest instantaneous eigenstates.
pub fn instantaneous_overlaps(checkpoints: &[Checkpoint], h: &HamiltonianOperator, k: usize) -> Result<OverlapTable> {
    ensure!(!checkpoints.is_empty(), InvalidArgument, "no checkpoints to analyse; enable checkpointing");
    let rows: Vec<(Vec<f64>, Vec<f64>)> = checkpoints
        .par_iter()
        .map(|cp| {
            ensure!(cp.amplitudes.len() == h.dim(), InvalidArgument, "checkpoint dimension does not match the basis");
            let eig = low_eigs(&h.at(cp.omega, cp.delta), k)?;
            let ovl = eig
                .vectors
                .iter()
                .map(|v| v.iter().zip(&cp.amplitudes).map(|(&e, a)| a * e).sum::<C64>().norm_sqr())
                .collect();
            Ok((eig.values, ovl))
        })
        .collect::<Result<_>>()?;
    let (energies, overlaps) = rows.into_iter().unzip();
    Ok(OverlapTable {
        times: checkpoints.iter().map(|c| c.t).collect(),
        deltas: checkpoints.iter().map(|c| c.delta).collect(),
        energies,
        overlaps,
    })
}

pub const DEFAULT_COUNT_BUDGET: usize = 1 << 22;

/// Number of independent sets of the subgraph induced by `subset`.
///
/// Vertices are processed in index order while tracking which chosen vertices
/// still have unprocessed neighbours; for chain-like orderings that frontier
/// stays tiny.
pub fn count_independent_sets(graph: &BlockadeGraph, subset: Config) -> Result<u128> {
    count_independent_sets_with_budget(graph, subset, DEFAULT_COUNT_BUDGET)
}

pub fn count_independent_sets_with_budget(graph: &BlockadeGraph, subset: Config, budget: usize) -> Result<u128> {
    let n = graph.n_vertices();
    let subset = if n == 128 { subset } else { subset & ((1u128 << n) - 1) };
    let vertices: Vec<usize> = (0..n).filter(|&v| (subset >> v) & 1 == 1).collect();
    let position: HashMap<usize, usize> = vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    // last position at which each vertex still matters
    let last_use: Vec<usize> = vertices
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let nb = graph.neighbors(v) & subset;
            (0..n).filter(|&u| (nb >> u) & 1 == 1).map(|u| position[&u]).max().unwrap_or(k).max(k)
        })
        .collect();
    let mut frontier: HashMap<Config, u128> = HashMap::from([(0, 1)]);
    for (k, &v) in vertices.iter().enumerate() {
        let mut next: HashMap<Config, u128> = HashMap::with_capacity(frontier.len() * 2);
        let retire: Config = vertices[..=k]
            .iter()
            .enumerate()
            .filter(|&(p, _)| last_use[p] <= k)
            .fold(0, |m, (_, &u)| m | (1 << u));
        for (&state, &count) in &frontier {
            *next.entry(state & !retire).or_default() += count;
            if state & graph.neighbors(v) == 0 {
                *next.entry((state | (1 << v)) & !retire).or_default() += count;
            }
        }
        ensure!(next.len() <= budget, Budget, "independent-set frontier exceeds {budget} states");
        frontier = next;
    }
    frontier.values().try_fold(0u128, |acc, &c| acc.checked_add(c)).ok_or_else(|| Error::Numeric("count overflow".into()))
}

/// Plain backtracking count, used as a cross-check.
pub fn count_independent_sets_backtracking(graph: &BlockadeGraph, subset: Config) -> u128 {
    fn go(graph: &BlockadeGraph, cand: Config) -> u128 {
        if cand == 0 {
            return 1;
        }
        let v = cand.trailing_zeros() as usize;
        let rest = cand & !(1 << v);
        go(graph, rest) + go(graph, rest & !graph.neighbors(v))
    }
    let n = graph.n_vertices();
    let all = if n == 128 { Config::MAX } else { (1u128 << n) - 1 };
    go(graph, subset & all)
}
