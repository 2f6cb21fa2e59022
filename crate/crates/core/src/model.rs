//! Computational bases, the Rydberg Hamiltonian as a sparse operator, named
//! reference states and an exact maximum-independent-set solver.
//!
//! H = (Ω/2) Σ kᵢ σˣᵢ − Δ Σ nᵢ + Σ_{i<j} Vᵢⱼ nᵢ nⱼ, with kᵢ the per-atom Rabi scale.

use std::ops::{Add, Mul};
use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, AtomKind, BlockadeGraph, InteractionMatrix, Layout};
use crate::{config_to_string, Config, C64};

/// Default cap on the number of enumerated basis states.
pub const DEFAULT_BASIS_BUDGET: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Full,
    Blockade,
}

/// Sorted list of occupation configurations spanning the simulated space.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSet {
    n_atoms: usize,
    configs: Vec<Config>,
    constraint: Constraint,
    graph: BlockadeGraph,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn config(&self, idx: usize) -> Config {
        self.configs[idx]
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn graph(&self) -> &BlockadeGraph {
        &self.graph
    }

    pub fn index_of(&self, config: Config) -> Option<usize> {
        self.configs.binary_search(&config).ok()
    }

    pub fn contains(&self, config: Config) -> bool {
        self.index_of(config).is_some()
    }

    /// SHA-256 over the atom count, constraint and config list.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n_atoms as u64).to_le_bytes());
        h.update([self.constraint as u8]);
        for c in &self.configs {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Result<String> {
        let configs: Vec<String> = self.configs.iter().map(|&c| config_to_string(c, self.n_atoms)).collect();
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "n_atoms": self.n_atoms,
            "constraint": self.constraint,
            "configs": configs,
        }))?)
    }
}

pub fn enumerate_basis(graph: &BlockadeGraph, constraint: Constraint) -> Result<BasisSet> {
    enumerate_basis_with_budget(graph, constraint, DEFAULT_BASIS_BUDGET)
}

/// Enumerates every configuration (full) or every independent set of `graph`
/// (blockade), failing once more than `budget` states would be produced.
pub fn enumerate_basis_with_budget(graph: &BlockadeGraph, constraint: Constraint, budget: usize) -> Result<BasisSet> {
    let n = graph.n_vertices();
    let configs = match constraint {
        Constraint::Full => {
            ensure!(n < 64 && (1usize << n) <= budget, Budget, "full basis of {n} atoms exceeds budget {budget}");
            (0..(1u128 << n)).collect()
        }
        Constraint::Blockade => {
            let mut out = Vec::new();
            // vertices are added in ascending order so only lower neighbours need checking
            let lower: Vec<Config> = (0..n).map(|v| graph.neighbors(v) & ((1u128 << v) - 1)).collect();
            let mut stack: Vec<(usize, Config)> = vec![(0, 0)];
            while let Some((v, c)) = stack.pop() {
                if v == n {
                    ensure!(out.len() < budget, Budget, "blockade basis exceeds budget {budget}");
                    out.push(c);
                    continue;
                }
                stack.push((v + 1, c));
                if c & lower[v] == 0 {
                    stack.push((v + 1, c | (1 << v)));
                }
            }
            out.sort_unstable();
            out
        }
    };
    Ok(BasisSet { n_atoms: n, configs, constraint, graph: graph.clone() })
}

/// Element type accepted by the sparse matvec.
pub trait Amplitude: Copy + Send + Sync + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl Amplitude for f64 {}
impl Amplitude for C64 {}

/// Rydberg Hamiltonian with Δ- and Ω-independent structure precomputed, so it
/// can be re-evaluated at new control values without rebuilding.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator {
    basis: Arc<BasisSet>,
    occupation: Vec<f64>,
    interaction: Vec<f64>,
    // CSR rows holding (Rabi scale)/2 for every in-basis single-bit flip. Both
    // directions are stored so the matvec is a pure gather.
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
}

const PAR_THRESHOLD: usize = 4096;

impl HamiltonianOperator {
    pub fn build(array: &AtomArray, basis: Arc<BasisSet>, interactions: &InteractionMatrix) -> Result<Self> {
        let n = array.len();
        ensure!(basis.n_atoms() == n, InvalidArgument, "basis has {} atoms, array has {n}", basis.n_atoms());
        ensure!(interactions.len() == n, InvalidArgument, "interaction matrix is {}x{0}, array has {n} atoms", interactions.len());
        ensure!(basis.len() < u32::MAX as usize, Budget, "basis too large for 32-bit column indices");
        let scales = array.rabi_scales();
        let pairs: Vec<(usize, usize, f64)> = interactions.pairs().collect();

        let occupation: Vec<f64> = basis.configs().iter().map(|c| c.count_ones() as f64).collect();
        let interaction: Vec<f64> = basis
            .configs()
            .par_iter()
            .map(|&c| pairs.iter().filter(|&&(i, j, _)| (c >> i) & 1 == 1 && (c >> j) & 1 == 1).map(|p| p.2).sum())
            .collect();

        let rows: Vec<Vec<(u32, f64)>> = basis
            .configs()
            .par_iter()
            .map(|&c| {
                (0..n)
                    .filter_map(|i| basis.index_of(c ^ (1 << i)).map(|b| (b as u32, 0.5 * scales[i])))
                    .collect()
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(basis.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for row in rows {
            for (b, w) in row {
                cols.push(b);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        Ok(HamiltonianOperator { basis, occupation, interaction, row_ptr, cols, weights })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn n_offdiagonal(&self) -> usize {
        self.cols.len()
    }

    /// Diagonal element of config index `a`.
    pub fn diagonal(&self, a: usize, delta: f64) -> f64 {
        self.interaction[a] - delta * self.occupation[a]
    }

    pub fn occupation(&self) -> &[f64] {
        &self.occupation
    }

    pub fn interaction_energy(&self) -> &[f64] {
        &self.interaction
    }

    /// `y = H(Ω, Δ) x`.
    pub fn apply<T: Amplitude>(&self, omega: f64, delta: f64, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |a: usize| {
            let mut acc = x[a] * self.diagonal(a, delta);
            for k in self.row_ptr[a]..self.row_ptr[a + 1] {
                acc = acc + x[self.cols[k] as usize] * (omega * self.weights[k]);
            }
            acc
        };
        if self.dim() >= PAR_THRESHOLD {
            y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(a, out)| *out = row(a));
        } else {
            for (a, out) in y.iter_mut().enumerate() {
                *out = row(a);
            }
        }
    }

    pub fn at(&self, omega: f64, delta: f64) -> BoundHamiltonian<'_> {
        BoundHamiltonian { op: self, omega, delta }
    }

    pub fn to_dense(&self, omega: f64, delta: f64) -> Array2<f64> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for a in 0..d {
            m[[a, a]] = self.diagonal(a, delta);
            for k in self.row_ptr[a]..self.row_ptr[a + 1] {
                m[[a, self.cols[k] as usize]] += omega * self.weights[k];
            }
        }
        m
    }

    /// Bound on the spectral radius via the Gershgorin discs.
    pub fn norm_bound(&self, omega: f64, delta: f64) -> f64 {
        (0..self.dim())
            .map(|a| {
                let off: f64 = self.weights[self.row_ptr[a]..self.row_ptr[a + 1]].iter().sum();
                self.diagonal(a, delta).abs() + omega.abs() * off
            })
            .fold(0.0, f64::max)
    }

    pub fn expectation(&self, omega: f64, delta: f64, psi: &[C64]) -> f64 {
        let mut hpsi = vec![C64::default(); self.dim()];
        self.apply(omega, delta, psi, &mut hpsi);
        psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Hamiltonian evaluated at fixed control values.
#[derive(Clone, Copy, Debug)]
pub struct BoundHamiltonian<'a> {
    pub op: &'a HamiltonianOperator,
    pub omega: f64,
    pub delta: f64,
}

impl BoundHamiltonian<'_> {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply<T: Amplitude>(&self, x: &[T], y: &mut [T]) {
        self.op.apply(self.omega, self.delta, x, y)
    }
}

pub fn classical_energy(config: Config, interactions: &InteractionMatrix, delta: f64) -> f64 {
    let pair_sum: f64 = interactions
        .pairs()
        .filter(|&(i, j, _)| (config >> i) & 1 == 1 && (config >> j) & 1 == 1)
        .map(|p| p.2)
        .sum();
    pair_sum - delta * config.count_ones() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedKind {
    Mis,
    S,
    Z,
    Zbar,
    ZigzagMix,
}

/// Reference state given as real amplitudes on a few configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedState {
    pub kind: NamedKind,
    pub components: Vec<(Config, f64)>,
}

impl NamedState {
    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        self.components.iter().map(|c| c.0)
    }

    /// Dense amplitude vector over `basis`.
    pub fn amplitudes(&self, basis: &BasisSet) -> Result<Vec<C64>> {
        let mut psi = vec![C64::default(); basis.len()];
        for &(c, a) in &self.components {
            let idx = basis
                .index_of(c)
                .ok_or_else(|| Error::InvalidArgument(format!("{:?} component lies outside the basis", self.kind)))?;
            psi[idx] += C64::new(a, 0.0);
        }
        Ok(psi)
    }

    /// For `ZigzagMix` the individual pattern probabilities are summed;
    /// otherwise this is the overlap squared with the state itself.
    pub fn probability(&self, basis: &BasisSet, psi: &[C64]) -> Result<f64> {
        if self.kind == NamedKind::ZigzagMix {
            return self
                .configs()
                .map(|c| {
                    basis
                        .index_of(c)
                        .map(|i| psi[i].norm_sqr())
                        .ok_or_else(|| Error::InvalidArgument("zigzag pattern lies outside the basis".into()))
                })
                .sum();
        }
        let target = self.amplitudes(basis)?;
        let overlap: C64 = target.iter().zip(psi).map(|(t, p)| t.conj() * p).sum();
        Ok(overlap.norm_sqr())
    }
}

fn doublet_atoms(array: &AtomArray, site: usize) -> Result<(usize, usize)> {
    let atoms = array.atoms_at_site(site);
    match atoms.as_slice() {
        &[top, bottom]
            if array.atom(top).kind == AtomKind::DoubletTop && array.atom(bottom).kind == AtomKind::DoubletBottom =>
        {
            Ok((top, bottom))
        }
        _ => Err(Error::Geometry(format!("site {site} is not a doublet"))),
    }
}

/// Configuration of the maximum independent set the geometry is designed
/// around: odd chain sites, or the grid singles.
pub fn mis_config(array: &AtomArray) -> Result<Config> {
    match array.layout() {
        Layout::DoubletChain { .. } | Layout::Chain { .. } => array.odd_site_config(),
        Layout::Grid { .. } => Ok(array
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == AtomKind::GridSingle)
            .fold(0, |m, (i, _)| m | (1 << i))),
        Layout::Free => Err(Error::Geometry("free layout has no designated MIS; use exact_mis".into())),
    }
}

/// Zigzag pattern: boundary singles excited and bulk doublets 4, 6, … taking
/// alternately top/bottom (`start_top`) or bottom/top.
fn zigzag_config(array: &AtomArray, sites: usize, start_top: bool) -> Result<Config> {
    let single = |s: usize| array.atoms_at_site(s)[0];
    let mut c: Config = (1 << single(1)) | (1 << single(sites));
    for (k, site) in (4..=sites - 3).step_by(2).enumerate() {
        let (top, bottom) = doublet_atoms(array, site)?;
        let use_top = (k % 2 == 0) == start_top;
        c |= 1 << if use_top { top } else { bottom };
    }
    Ok(c)
}

pub fn named_state(kind: NamedKind, array: &AtomArray) -> Result<NamedState> {
    if kind == NamedKind::Mis {
        return Ok(NamedState { kind, components: vec![(mis_config(array)?, 1.0)] });
    }
    let sites = match array.layout() {
        Layout::DoubletChain { sites } => sites,
        _ => return Err(Error::Geometry(format!("{kind:?} is defined for doublet chains only"))),
    };
    ensure!(sites >= 7, Geometry, "{kind:?} needs at least one bulk doublet (L >= 7), got L = {sites}");
    let components = match kind {
        NamedKind::Z => vec![(zigzag_config(array, sites, true)?, 1.0)],
        NamedKind::Zbar => vec![(zigzag_config(array, sites, false)?, 1.0)],
        NamedKind::ZigzagMix => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            vec![(zigzag_config(array, sites, true)?, a), (zigzag_config(array, sites, false)?, a)]
        }
        NamedKind::S => {
            let single = |s: usize| array.atoms_at_site(s)[0];
            let base: Config = (1 << single(1)) | (1 << single(sites));
            let doublets: Vec<(usize, usize)> =
                (4..=sites - 3).step_by(2).map(|s| doublet_atoms(array, s)).collect::<Result<_>>()?;
            let amp = (0.5f64).powf(doublets.len() as f64 / 2.0);
            (0..1usize << doublets.len())
                .map(|choice| {
                    let c = doublets.iter().enumerate().fold(base, |c, (k, &(top, bottom))| {
                        c | (1 << if (choice >> k) & 1 == 0 { top } else { bottom })
                    });
                    (c, amp)
                })
                .collect()
        }
        NamedKind::Mis => unreachable!(),
    };
    Ok(NamedState { kind, components })
}

/// Result of an exact maximum-independent-set search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisSolution {
    pub size: usize,
    /// Every maximum independent set, sorted ascending.
    pub maximizers: Vec<Config>,
    pub nodes: u64,
}

pub const DEFAULT_MIS_NODE_BUDGET: u64 = 200_000_000;

pub fn exact_mis(graph: &BlockadeGraph) -> Result<MisSolution> {
    exact_mis_with_budget(graph, DEFAULT_MIS_NODE_BUDGET)
}

/// Branch and bound with a greedy clique-cover upper bound. All maximizers
/// are kept, so only branches whose bound is strictly below the incumbent are cut.
pub fn exact_mis_with_budget(graph: &BlockadeGraph, node_budget: u64) -> Result<MisSolution> {
    let n = graph.n_vertices();
    let adj: Vec<Config> = (0..n).map(|v| graph.neighbors(v)).collect();
    let all: Config = if n == 128 { Config::MAX } else { (1u128 << n) - 1 };
    let mut state = MisSearch { adj, best: 0, maximizers: Vec::new(), nodes: 0, budget: node_budget };
    state.search(all, 0)?;
    state.maximizers.sort_unstable();
    Ok(MisSolution { size: state.best, maximizers: state.maximizers, nodes: state.nodes })
}

struct MisSearch {
    adj: Vec<Config>,
    best: usize,
    maximizers: Vec<Config>,
    nodes: u64,
    budget: u64,
}

impl MisSearch {
    fn clique_cover(&self, mut rest: Config) -> usize {
        let mut count = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let mut cand = rest & self.adj[v];
            rest &= !(1 << v);
            while cand != 0 {
                let u = cand.trailing_zeros() as usize;
                rest &= !(1 << u);
                cand &= self.adj[u] & !(1 << u);
            }
            count += 1;
        }
        count
    }

    fn search(&mut self, mut cand: Config, mut chosen: Config) -> Result<()> {
        self.nodes += 1;
        ensure!(self.nodes <= self.budget, Budget, "MIS search exceeded {} nodes", self.budget);
        // vertices with no remaining neighbour belong to every maximum extension
        loop {
            let mut isolated = 0;
            let mut bits = cand;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if self.adj[v] & cand == 0 {
                    isolated |= 1 << v;
                }
            }
            if isolated == 0 {
                break;
            }
            chosen |= isolated;
            cand &= !isolated;
        }
        let size = chosen.count_ones() as usize;
        if cand == 0 {
            if size > self.best {
                self.best = size;
                self.maximizers.clear();
            }
            if size == self.best {
                self.maximizers.push(chosen);
            }
            return Ok(());
        }
        if size + self.clique_cover(cand) < self.best {
            return Ok(());
        }
        let mut bits = cand;
        let mut pivot = 0;
        let mut pivot_deg = 0;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let d = (self.adj[v] & cand).count_ones();
            if d > pivot_deg {
                pivot = v;
                pivot_deg = d;
            }
        }
        self.search(cand & !(1 << pivot) & !self.adj[pivot], chosen | (1 << pivot))?;
        self.search(cand & !(1 << pivot), chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;

    fn chain(l: usize) -> (AtomArray, BlockadeGraph, InteractionMatrix) {
        let a = build_equilateral_doublet_chain(l, 5.5).unwrap();
        let c = VdwCoupling::default();
        let g = blockade_graph(&a, &c, 1.0).unwrap();
        let v = interaction_matrix(&a, &c, Truncation::Nnn).unwrap();
        (a, g, v)
    }

    fn brute_force_independent(g: &BlockadeGraph) -> Vec<Config> {
        (0..1u128 << g.n_vertices()).filter(|&c| g.is_independent(c)).collect()
    }

    fn transfer_matrix_count(l: usize) -> u64 {
        // (a, b): counts ending with an unexcited / excited odd site
        let (mut a, mut b) = (1u64, 1u64);
        for _ in 0..(l - 1) / 2 {
            let na = 3 * a + b;
            let nb = a + b;
            a = na;
            b = nb;
        }
        a + b
    }

    #[test]
    fn blockade_basis_sizes() {
        let (_, g, _) = chain(3);
        assert_eq!(brute_force_independent(&g).len(), 6);
        let basis = enumerate_basis(&g, Constraint::Blockade).unwrap();
        assert_eq!(basis.configs(), brute_force_independent(&g).as_slice());
        for l in [3, 5, 7, 9, 11, 13, 15] {
            let (_, g, _) = chain(l);
            let basis = enumerate_basis(&g, Constraint::Blockade).unwrap();
            assert_eq!(basis.len() as u64, transfer_matrix_count(l), "L = {l}");
        }
        assert_eq!(transfer_matrix_count(15), 9232);
    }

    #[test]
    fn full_basis_and_budget() {
        let (_, g, _) = chain(5);
        let full = enumerate_basis(&g, Constraint::Full).unwrap();
        assert_eq!(full.len(), 1 << 7);
        assert!(enumerate_basis_with_budget(&g, Constraint::Full, 100).is_err());
        assert!(enumerate_basis_with_budget(&g, Constraint::Blockade, 5).is_err());
    }

    fn single_atom() -> AtomArray {
        let atoms = vec![Atom { x: 0.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single }];
        AtomArray::new(atoms, Layout::Free).unwrap()
    }

    #[test]
    fn single_atom_spectrum() {
        let a = single_atom();
        let g = BlockadeGraph::empty(1).unwrap();
        let basis = Arc::new(enumerate_basis(&g, Constraint::Full).unwrap());
        let h = HamiltonianOperator::build(&a, basis, &InteractionMatrix::zeros(1)).unwrap();
        let (e, _) = crate::linalg::eigh_real(&h.to_dense(1.0, 0.0).view()).unwrap();
        assert!((e[0] + 0.5).abs() < 1e-14 && (e[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_blockaded_atoms_match_dense_four_by_four() {
        let atoms = vec![
            Atom { x: 0.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
            Atom { x: 5.5, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
        ];
        let a = AtomArray::new(atoms, Layout::Free).unwrap();
        let c = VdwCoupling::default();
        let g = blockade_graph(&a, &c, 1.0).unwrap();
        let v = interaction_matrix(&a, &c, Truncation::Full).unwrap();
        let basis = Arc::new(enumerate_basis(&g, Constraint::Full).unwrap());
        let h = HamiltonianOperator::build(&a, basis, &v).unwrap();
        // oracle: 4x4 written out by hand in the |gg>, |rg>, |gr>, |rr> order
        let vv = 12.5;
        let mut m = Array2::<f64>::zeros((4, 4));
        m[[3, 3]] = vv;
        for (p, q) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            m[[p, q]] = 0.5;
            m[[q, p]] = 0.5;
        }
        let (e_ref, _) = crate::linalg::eigh_real(&m.view()).unwrap();
        let (e, _) = crate::linalg::eigh_real(&h.to_dense(1.0, 0.0).view()).unwrap();
        assert!((h.to_dense(1.0, 0.0)[[3, 3]] - vv).abs() < 1e-9);
        assert!((e[0] - e_ref[0]).abs() < 1e-9);
    }

    #[test]
    fn mis_diagonal_on_l9() {
        let (a, g, v) = chain(9);
        let basis = Arc::new(enumerate_basis(&g, Constraint::Blockade).unwrap());
        let h = HamiltonianOperator::build(&a, basis.clone(), &v).unwrap();
        let mis = mis_config(&a).unwrap();
        let idx = basis.index_of(mis).unwrap();
        let delta = 2.0;
        // oracle: four horizontal single-single pairs at s√3
        let v_h = 12.5 * (1.0 / 3f64.sqrt()).powi(6);
        let expected = -5.0 * delta + 4.0 * v_h;
        assert!((h.diagonal(idx, delta) - expected).abs() < 1e-12);
        assert!((classical_energy(mis, &v, delta) - (-10.0 + 4.0 * 12.5 / 27.0)).abs() < 1e-12);
    }

    #[test]
    fn classical_energy_cases() {
        let (a, _, v) = chain(9);
        assert_eq!(classical_energy(0, &v, 3.0), 0.0);
        let pair = (1 << 0) | (1 << 1);
        assert!((a.distance(0, 1) - 5.5).abs() < 1e-12);
        assert!((classical_energy(pair, &v, 0.7) - (12.5 - 1.4)).abs() < 1e-9);
    }

    #[test]
    fn named_states() {
        let (a15, _, _) = chain(15);
        assert_eq!(mis_config(&a15).unwrap().count_ones(), 8);

        let (a, g, _) = chain(9);
        let z = named_state(NamedKind::Z, &a).unwrap();
        let zc = z.components[0].0;
        assert_eq!(zc.count_ones() as usize, 9_usize.div_ceil(2) - 1);
        let site = |i: usize| a.atom(i).site.unwrap();
        let mut ex: Vec<(usize, AtomKind)> =
            (0..a.len()).filter(|&i| (zc >> i) & 1 == 1).map(|i| (site(i), a.atom(i).kind)).collect();
        ex.sort_by_key(|e| e.0);
        assert_eq!(
            ex,
            vec![(1, AtomKind::Single), (4, AtomKind::DoubletTop), (6, AtomKind::DoubletBottom), (9, AtomKind::Single)]
        );
        assert!(g.is_independent(zc));

        let zbar = named_state(NamedKind::Zbar, &a).unwrap().components[0].0;
        assert_ne!(zbar, zc);
        assert_eq!(zbar.count_ones(), 4);

        let s = named_state(NamedKind::S, &a).unwrap();
        assert_eq!(s.components.len(), 4);
        for &(_, amp) in &s.components {
            assert!((amp * amp - 0.25).abs() < 1e-15);
        }
        let basis = enumerate_basis(&g, Constraint::Blockade).unwrap();
        for kind in [NamedKind::Mis, NamedKind::S, NamedKind::Z, NamedKind::Zbar, NamedKind::ZigzagMix] {
            let psi = named_state(kind, &a).unwrap().amplitudes(&basis).unwrap();
            let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12, "{kind:?}");
        }
        let (a5, _, _) = chain(5);
        assert!(named_state(NamedKind::Z, &a5).is_err());
    }

    #[test]
    fn exact_mis_cases() {
        let (a, g, _) = chain(9);
        let sol = exact_mis(&g).unwrap();
        assert_eq!(sol.size, 5);
        assert_eq!(sol.maximizers, vec![mis_config(&a).unwrap()]);
        let brute = brute_force_independent(&g).into_iter().map(|c| c.count_ones()).max().unwrap();
        assert_eq!(brute, 5);

        let tri = BlockadeGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let sol = exact_mis(&tri).unwrap();
        assert_eq!(sol.size, 1);
        assert_eq!(sol.maximizers.len(), 3);
    }

    #[test]
    fn exact_mis_7x7_grid() {
        let a = build_2d_doublet_grid(7, 7, 6.5, 3.0).unwrap();
        let g = blockade_graph(&a, &VdwCoupling::default(), 1.0).unwrap();
        let singles = mis_config(&a).unwrap();
        assert!(g.is_independent(singles));
        let sol = exact_mis(&g).unwrap();
        assert_eq!(sol.size, 25);
        assert!(sol.maximizers.contains(&singles));
    }

    #[test]
    fn basis_closure_under_h() {
        let (a, g, v) = chain(7);
        let basis = Arc::new(enumerate_basis(&g, Constraint::Blockade).unwrap());
        let h = HamiltonianOperator::build(&a, basis.clone(), &v).unwrap();
        for k in 0..h.dim() {
            for p in h.row_ptr[k]..h.row_ptr[k + 1] {
                assert!(g.is_independent(basis.config(h.cols[p] as usize)));
            }
        }
    }
}
