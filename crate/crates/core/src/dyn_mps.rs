//! Matrix-product-state evolution for chain geometries.
//!
//! MPS sites are chain cells: a single atom has local dimension 2, a doublet
//! has dimension 3 under the blockade constraint (both atoms excited is
//! forbidden) or 4 without it. Atoms are ordered site by site, top before
//! bottom, so the doublet chain is traversed in a snake. Interactions reach at
//! most two cells, so every Hamiltonian term fits a three-cell gate; gates are
//! exact exponentials of the triple Hamiltonian on the allowed subspace and are
//! applied in a symmetric second-order splitting over three layers.

use std::sync::Arc;

use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::dyn_dense::{entropy_of_weights, DenseState, ObservableSpec, Record, Trajectory};
use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, BlockadeGraph, InteractionMatrix};
use crate::linalg;
use crate::measure::{shot_rng, Provenance, ShotSet};
use crate::model::{BasisSet, Constraint};
use crate::schedule::{step_grid, Control};
use crate::{Config, C64};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const STREAM_MPS: u64 = 4;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Grouping of atoms into chain cells and the allowed local states of each.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCells {
    n_atoms: usize,
    cells: Vec<Vec<usize>>,
    /// Allowed local configurations as global bit masks.
    local: Vec<Vec<Config>>,
    cell_of: Vec<usize>,
}

impl ChainCells {
    pub fn new(array: &AtomArray, graph: &BlockadeGraph, constraint: Constraint) -> Result<Self> {
        ensure!(graph.n_vertices() == array.len(), InvalidArgument, "graph and array sizes differ");
        let cells = array.site_groups()?;
        ensure!(cells.len() >= 3, InvalidArgument, "MPS evolution needs at least 3 chain sites");
        let mut cell_of = vec![0; array.len()];
        for (c, atoms) in cells.iter().enumerate() {
            for &a in atoms {
                cell_of[a] = c;
            }
        }
        for &(a, b) in graph.edges() {
            ensure!(
                cell_of[a].abs_diff(cell_of[b]) <= 1,
                InvalidArgument,
                "blockade edge ({a}, {b}) spans more than neighbouring cells"
            );
        }
        let local = cells
            .iter()
            .map(|atoms| {
                (0..1usize << atoms.len())
                    .map(|m| atoms.iter().enumerate().filter(|(k, _)| (m >> k) & 1 == 1).fold(0, |c, (_, &a)| c | (1u128 << a)))
                    .filter(|&c| constraint == Constraint::Full || graph.is_independent(c))
                    .collect()
            })
            .collect();
        Ok(ChainCells { n_atoms: array.len(), cells, local, cell_of })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn local_dim(&self, cell: usize) -> usize {
        self.local[cell].len()
    }

    pub fn cell_of(&self, atom: usize) -> usize {
        self.cell_of[atom]
    }

    /// MPS ordering: position of each atom when cells are flattened in order.
    pub fn atom_order(&self) -> Vec<usize> {
        let mut pos = vec![0; self.n_atoms];
        for (p, &a) in self.cells.iter().flatten().enumerate() {
            pos[a] = p;
        }
        pos
    }

    fn cell_mask(&self, cell: usize) -> Config {
        self.cells[cell].iter().fold(0, |m, &a| m | (1u128 << a))
    }

    /// Local indices of `config`, or `None` if some cell state is not allowed.
    pub fn local_indices(&self, config: Config) -> Option<Vec<usize>> {
        (0..self.len()).map(|c| self.local[c].iter().position(|&l| l == config & self.cell_mask(c))).collect()
    }
}

/// Hamiltonian pieces owned by the three-cell block centred at `centre`.
#[derive(Clone, Debug)]
struct TripleTerms {
    centre: usize,
    dim: usize,
    allowed: Vec<usize>,
    interaction: Vec<f64>,
    occupation: Vec<f64>,
    rabi: Array2<f64>,
}

impl TripleTerms {
    fn hamiltonian(&self, omega: f64, delta: f64) -> Array2<f64> {
        let mut h = self.rabi.mapv(|x| x * omega);
        for i in 0..self.allowed.len() {
            h[[i, i]] += self.interaction[i] - delta * self.occupation[i];
        }
        h
    }

    /// `exp(factor · 2π · h)` on the allowed block, identity elsewhere.
    fn gate(&self, omega: f64, delta: f64, factor: C64) -> Result<Array2<C64>> {
        let sub = linalg::expm_symmetric(&self.hamiltonian(omega, delta).view(), factor * TWO_PI)?;
        let mut g = Array2::from_diag_elem(self.dim, ONE);
        for (a, &i) in self.allowed.iter().enumerate() {
            for (b, &j) in self.allowed.iter().enumerate() {
                g[[i, j]] = sub[[a, b]];
            }
        }
        Ok(g)
    }

    fn full_hamiltonian(&self, omega: f64, delta: f64) -> Array2<f64> {
        let sub = self.hamiltonian(omega, delta);
        let mut h = Array2::zeros((self.dim, self.dim));
        for (a, &i) in self.allowed.iter().enumerate() {
            for (b, &j) in self.allowed.iter().enumerate() {
                h[[i, j]] = sub[[a, b]];
            }
        }
        h
    }
}

/// Hamiltonian of a chain split into three-cell terms.
#[derive(Clone, Debug)]
pub struct MpsModel {
    cells: Arc<ChainCells>,
    triples: Vec<TripleTerms>,
}

impl MpsModel {
    /// Terms are assigned so every one appears once: single-cell terms go to the
    /// block centred on that cell (end cells to the end blocks), neighbouring
    /// pairs to the block centred on the left cell (first pair to block 1) and
    /// next-neighbour pairs to the block centred between them.
    pub fn new(array: &AtomArray, graph: &BlockadeGraph, interactions: &InteractionMatrix, constraint: Constraint) -> Result<Self> {
        ensure!(interactions.len() == array.len(), InvalidArgument, "interaction matrix and array sizes differ");
        let cells = Arc::new(ChainCells::new(array, graph, constraint)?);
        let n_cells = cells.len();
        let owner_of_cell = |c: usize| c.clamp(1, n_cells - 2);
        let mut pairs: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_cells];
        for (i, j, v) in interactions.pairs() {
            if constraint == Constraint::Blockade && graph.has_edge(i, j) {
                continue;
            }
            let (ci, cj) = (cells.cell_of(i).min(cells.cell_of(j)), cells.cell_of(i).max(cells.cell_of(j)));
            let owner = match cj - ci {
                0 => owner_of_cell(ci),
                1 => ci.max(1),
                2 => ci + 1,
                r => return Err(Error::InvalidArgument(format!("interaction ({i}, {j}) spans {r} cells; at most 2 supported"))),
            };
            pairs[owner].push((i, j, v));
        }
        let scales = array.rabi_scales();
        let mut triples = Vec::with_capacity(n_cells - 2);
        for centre in 1..n_cells - 1 {
            let span = [centre - 1, centre, centre + 1];
            let dims = span.map(|c| cells.local_dim(c));
            let dim = dims.iter().product();
            let owned: Vec<usize> = span.iter().copied().filter(|&c| owner_of_cell(c) == centre).collect();
            let owned_atoms: Vec<usize> = owned.iter().flat_map(|&c| cells.cells[c].iter().copied()).collect();
            let owned_mask = owned_atoms.iter().fold(0u128, |m, &a| m | (1 << a));
            let config_at = |idx: usize| -> Config {
                let k = [idx / (dims[1] * dims[2]), (idx / dims[2]) % dims[1], idx % dims[2]];
                (0..3).fold(0, |c, s| c | cells.local[span[s]][k[s]])
            };
            let index_of = |config: Config| -> Option<usize> {
                let mut idx = 0;
                for s in 0..3 {
                    let part = config & cells.cell_mask(span[s]);
                    idx = idx * dims[s] + cells.local[span[s]].iter().position(|&l| l == part)?;
                }
                Some(idx)
            };
            let allowed: Vec<usize> = (0..dim)
                .filter(|&i| constraint == Constraint::Full || graph.is_independent(config_at(i)))
                .collect();
            let mut slot = vec![usize::MAX; dim];
            for (a, &i) in allowed.iter().enumerate() {
                slot[i] = a;
            }
            let mut interaction = Vec::with_capacity(allowed.len());
            let mut occupation = Vec::with_capacity(allowed.len());
            let mut rabi = Array2::zeros((allowed.len(), allowed.len()));
            for (a, &i) in allowed.iter().enumerate() {
                let c = config_at(i);
                interaction.push(pairs[centre].iter().filter(|&&(x, y, _)| (c >> x) & 1 == 1 && (c >> y) & 1 == 1).map(|p| p.2).sum());
                occupation.push((c & owned_mask).count_ones() as f64);
                for &atom in &owned_atoms {
                    if let Some(j) = index_of(c ^ (1u128 << atom)) {
                        if slot[j] != usize::MAX {
                            rabi[[a, slot[j]]] = 0.5 * scales[atom];
                        }
                    }
                }
            }
            triples.push(TripleTerms { centre, dim, allowed, interaction, occupation, rabi });
        }
        Ok(MpsModel { cells, triples })
    }

    pub fn cells(&self) -> &Arc<ChainCells> {
        &self.cells
    }

    fn layer(&self, k: usize) -> impl DoubleEndedIterator<Item = &TripleTerms> + '_ {
        self.triples.iter().filter(move |t| t.centre % 3 == k)
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&self, mps: &mut MpsState, omega: f64, delta: f64) -> Result<f64> {
        ensure!(Arc::ptr_eq(&mps.cells, &self.cells) || *mps.cells == *self.cells, InvalidArgument, "state belongs to another chain");
        mps.move_centre(0)?;
        let norm2 = mps.tensors[0].iter().map(|x| x.norm_sqr()).sum::<f64>();
        let mut e = 0.0;
        for t in &self.triples {
            mps.move_centre(t.centre - 1)?;
            let theta = mps.theta(t.centre);
            let h = t.full_hamiltonian(omega, delta).mapv(|x| C64::new(x, 0.0));
            for l in 0..theta.dim().0 {
                let blk = theta.index_axis(Axis(0), l);
                let hb = h.dot(&blk);
                e += blk.iter().zip(hb.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            }
        }
        Ok(e / norm2)
    }
}

/// SVD truncation settings: discarded weight per cut at most `cutoff` relative
/// to the total, and at most `chi_max` singular values (`0` means no cap).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationParams {
    pub chi_max: usize,
    pub cutoff: f64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams { chi_max: 50, cutoff: 1e-8 }
    }
}

impl TruncationParams {
    pub fn uncapped(cutoff: f64) -> Self {
        TruncationParams { chi_max: 0, cutoff }
    }

    pub fn capped(chi_max: usize, cutoff: f64) -> Self {
        TruncationParams { chi_max, cutoff }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sweep {
    Right,
    Left,
}

/// MPS over chain cells in mixed canonical form with a tracked orthogonality centre.
#[derive(Clone, Debug)]
pub struct MpsState {
    cells: Arc<ChainCells>,
    /// `(left bond, local, right bond)` per cell.
    tensors: Vec<Array3<C64>>,
    centre: usize,
    kept_norm: f64,
    discarded_weight: f64,
}

pub fn mps_from_product(cells: &Arc<ChainCells>, config: Config) -> Result<MpsState> {
    let idx = cells
        .local_indices(config)
        .ok_or_else(|| Error::InvalidArgument("configuration violates an intra-cell constraint".into()))?;
    ensure!(config >> cells.n_atoms == 0 || cells.n_atoms == 128, InvalidArgument, "configuration has bits beyond the array");
    let tensors = idx
        .iter()
        .enumerate()
        .map(|(c, &k)| {
            let mut t = Array3::zeros((1, cells.local_dim(c), 1));
            t[[0, k, 0]] = ONE;
            t
        })
        .collect();
    Ok(MpsState { cells: cells.clone(), tensors, centre: 0, kept_norm: 1.0, discarded_weight: 0.0 })
}

/// Exact MPS of a dense state by successive SVDs.
pub fn mps_from_dense(cells: &Arc<ChainCells>, state: &DenseState, trunc: &TruncationParams) -> Result<MpsState> {
    let basis = state.basis();
    ensure!(basis.n_atoms() == cells.n_atoms, InvalidArgument, "state and chain have different atom counts");
    let dims: Vec<usize> = (0..cells.len()).map(|c| cells.local_dim(c)).collect();
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).filter(|&n| n <= 1 << 24);
    let total = total.ok_or_else(|| Error::Budget("product space too large for dense conversion".into()))?;
    let mut psi = vec![ZERO; total];
    for (a, &c) in basis.configs().iter().enumerate() {
        let idx = cells.local_indices(c).ok_or_else(|| Error::InvalidArgument("basis state outside the local spaces".into()))?;
        let flat = idx.iter().zip(&dims).fold(0, |f, (&k, &d)| f * d + k);
        psi[flat] = state.amplitudes()[a];
    }
    let mut mps = MpsState { cells: cells.clone(), tensors: Vec::with_capacity(dims.len()), centre: 0, kept_norm: 1.0, discarded_weight: 0.0 };
    let mut rest = Array2::from_shape_vec((1, total), psi).map_err(|e| Error::Numeric(e.to_string()))?;
    for &d in &dims[..dims.len() - 1] {
        let (rows, cols) = rest.dim();
        let m = rest.into_shape((rows * d, cols / d)).map_err(|e| Error::Numeric(e.to_string()))?;
        let (u, sv, vh) = linalg::svd(&m.view())?;
        let (k, sv) = mps.truncate(&sv, trunc)?;
        mps.tensors.push(u.slice(s![.., ..k]).to_owned().into_shape((rows, d, k)).unwrap());
        rest = scale_rows(&vh.slice(s![..k, ..]), &sv);
    }
    let (rows, cols) = rest.dim();
    mps.tensors.push(rest.into_shape((rows, cols, 1)).unwrap());
    mps.centre = dims.len() - 1;
    Ok(mps)
}

fn scale_rows(m: &ArrayView2<C64>, s: &[f64]) -> Array2<C64> {
    let mut out = m.to_owned();
    for (mut row, &x) in out.axis_iter_mut(Axis(0)).zip(s) {
        row.mapv_inplace(|v| v * x);
    }
    out
}

fn scale_cols(m: &ArrayView2<C64>, s: &[f64]) -> Array2<C64> {
    let mut out = m.to_owned();
    for (mut col, &x) in out.axis_iter_mut(Axis(1)).zip(s) {
        col.mapv_inplace(|v| v * x);
    }
    out
}

fn reshape2(t: Array3<C64>, rows: usize, cols: usize) -> Array2<C64> {
    t.as_standard_layout().to_owned().into_shape((rows, cols)).expect("contiguous reshape")
}

fn reshape3(m: Array2<C64>, a: usize, b: usize, c: usize) -> Array3<C64> {
    m.as_standard_layout().to_owned().into_shape((a, b, c)).expect("contiguous reshape")
}

fn conj_t(m: &ArrayView2<C64>) -> Array2<C64> {
    m.t().mapv(|x| x.conj())
}

impl MpsState {
    pub fn cells(&self) -> &Arc<ChainCells> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn centre(&self) -> usize {
        self.centre
    }

    /// Bond dimension between cells `b − 1` and `b` for `b = 1..len`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.dim().2).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Product of retained weight fractions over all truncations forced by the
    /// bond-dimension cap.
    pub fn cumulative_kept_norm(&self) -> f64 {
        self.kept_norm
    }

    /// Summed relative weight dropped by the singular-value cutoff.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    pub fn norm(&self) -> f64 {
        self.tensors[self.centre].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Number of singular values to keep; updates the truncation bookkeeping
    /// and returns the kept values rescaled to unit total weight.
    fn truncate(&mut self, sv: &[f64], p: &TruncationParams) -> Result<(usize, Vec<f64>)> {
        let total: f64 = sv.iter().map(|x| x * x).sum();
        ensure!(total > 0.0 && total.is_finite(), Numeric, "state norm vanished during truncation");
        let mut tail = 0.0;
        let mut k_eps = sv.len();
        while k_eps > 1 {
            let w = sv[k_eps - 1] * sv[k_eps - 1];
            if tail + w > p.cutoff * total {
                break;
            }
            tail += w;
            k_eps -= 1;
        }
        let k = if p.chi_max > 0 { k_eps.min(p.chi_max) } else { k_eps };
        let kept_eps: f64 = sv[..k_eps].iter().map(|x| x * x).sum();
        let kept: f64 = sv[..k].iter().map(|x| x * x).sum();
        self.discarded_weight += tail / total;
        self.kept_norm *= kept / kept_eps;
        let scale = 1.0 / kept.sqrt();
        Ok((k, sv[..k].iter().map(|x| x * scale).collect()))
    }

    fn move_centre(&mut self, to: usize) -> Result<()> {
        ensure!(to < self.len(), InvalidArgument, "cell {to} out of range");
        while self.centre < to {
            let c = self.centre;
            let (dl, d, dr) = self.tensors[c].dim();
            let (q, r) = linalg::qr(&reshape2(self.tensors[c].clone(), dl * d, dr).view())?;
            let k = q.dim().1;
            self.tensors[c] = reshape3(q, dl, d, k);
            let (_, d1, dr1) = self.tensors[c + 1].dim();
            let next = r.dot(&reshape2(self.tensors[c + 1].clone(), dr, d1 * dr1));
            self.tensors[c + 1] = reshape3(next, k, d1, dr1);
            self.centre += 1;
        }
        while self.centre > to {
            let c = self.centre;
            let (dl, d, dr) = self.tensors[c].dim();
            let m = reshape2(self.tensors[c].clone(), dl, d * dr);
            let (q, r) = linalg::qr(&conj_t(&m.view()).view())?;
            let k = q.dim().1;
            self.tensors[c] = reshape3(conj_t(&q.view()), k, d, dr);
            let (dl0, d0, _) = self.tensors[c - 1].dim();
            let prev = reshape2(self.tensors[c - 1].clone(), dl0 * d0, dl).dot(&conj_t(&r.view()));
            self.tensors[c - 1] = reshape3(prev, dl0, d0, k);
            self.centre -= 1;
        }
        Ok(())
    }

    /// Moves the centre one cell right through an SVD and returns the Schmidt
    /// weights of the bond crossed.
    fn step_right_svd(&mut self) -> Result<Vec<f64>> {
        let c = self.centre;
        ensure!(c + 1 < self.len(), InvalidArgument, "centre already at the last cell");
        let (dl, d, dr) = self.tensors[c].dim();
        let (u, sv, vh) = linalg::svd(&reshape2(self.tensors[c].clone(), dl * d, dr).view())?;
        let k = sv.len();
        self.tensors[c] = reshape3(u, dl, d, k);
        let (_, d1, dr1) = self.tensors[c + 1].dim();
        let next = scale_rows(&vh.view(), &sv).dot(&reshape2(self.tensors[c + 1].clone(), dr, d1 * dr1));
        self.tensors[c + 1] = reshape3(next, k, d1, dr1);
        self.centre += 1;
        let total: f64 = sv.iter().map(|x| x * x).sum();
        Ok(sv.iter().map(|x| x * x / total).collect())
    }

    /// Contraction of the three tensors around `centre` as `(left, local, right)`.
    fn theta(&self, centre: usize) -> Array3<C64> {
        let (dl, d0, d1b) = self.tensors[centre - 1].dim();
        let (_, d1, d2b) = self.tensors[centre].dim();
        let (_, d2, dr) = self.tensors[centre + 1].dim();
        let a0 = reshape2(self.tensors[centre - 1].clone(), dl * d0, d1b);
        let a1 = reshape2(self.tensors[centre].clone(), d1b, d1 * d2b);
        let t = a0.dot(&a1).into_shape((dl * d0 * d1, d2b)).expect("contiguous");
        let a2 = reshape2(self.tensors[centre + 1].clone(), d2b, d2 * dr);
        reshape3(t.dot(&a2), dl, d0 * d1 * d2, dr)
    }

    fn apply_triple(&mut self, centre: usize, gate: &Array2<C64>, sweep: Sweep, p: &TruncationParams) -> Result<()> {
        match sweep {
            Sweep::Right => self.move_centre(centre - 1)?,
            Sweep::Left => self.move_centre(centre + 1)?,
        }
        let theta = self.theta(centre);
        let (dl, dk, dr) = theta.dim();
        let mut out = Array3::zeros((dl, dk, dr));
        for l in 0..dl {
            out.index_axis_mut(Axis(0), l).assign(&gate.dot(&theta.index_axis(Axis(0), l)));
        }
        let d0 = self.cells.local_dim(centre - 1);
        let d1 = self.cells.local_dim(centre);
        let d2 = self.cells.local_dim(centre + 1);
        match sweep {
            Sweep::Right => {
                let (u, sv, vh) = linalg::svd(&reshape2(out, dl * d0, d1 * d2 * dr).view())?;
                let (k0, sv) = self.truncate(&sv, p)?;
                self.tensors[centre - 1] = reshape3(u.slice(s![.., ..k0]).to_owned(), dl, d0, k0);
                let rest = scale_rows(&vh.slice(s![..k0, ..]), &sv).into_shape((k0 * d1, d2 * dr)).expect("contiguous");
                let (u, sv, vh) = linalg::svd(&rest.view())?;
                let (k1, sv) = self.truncate(&sv, p)?;
                self.tensors[centre] = reshape3(u.slice(s![.., ..k1]).to_owned(), k0, d1, k1);
                self.tensors[centre + 1] = reshape3(scale_rows(&vh.slice(s![..k1, ..]), &sv), k1, d2, dr);
                self.centre = centre + 1;
            }
            Sweep::Left => {
                let (u, sv, vh) = linalg::svd(&reshape2(out, dl * d0 * d1, d2 * dr).view())?;
                let (k1, sv) = self.truncate(&sv, p)?;
                self.tensors[centre + 1] = reshape3(vh.slice(s![..k1, ..]).to_owned(), k1, d2, dr);
                let rest = scale_cols(&u.slice(s![.., ..k1]), &sv).into_shape((dl * d0, d1 * k1)).expect("contiguous");
                let (u, sv, vh) = linalg::svd(&rest.view())?;
                let (k0, sv) = self.truncate(&sv, p)?;
                self.tensors[centre] = reshape3(vh.slice(s![..k0, ..]).to_owned(), k0, d1, k1);
                self.tensors[centre - 1] = reshape3(scale_cols(&u.slice(s![.., ..k0]), &sv), dl, d0, k0);
                self.centre = centre - 1;
            }
        }
        Ok(())
    }

    /// `⟨config|ψ⟩`.
    pub fn amplitude(&self, config: Config) -> C64 {
        let Some(idx) = self.cells.local_indices(config) else { return ZERO };
        let mut v = Array2::from_elem((1, 1), ONE);
        for (t, &k) in self.tensors.iter().zip(&idx) {
            v = v.dot(&t.index_axis(Axis(1), k));
        }
        v[[0, 0]]
    }

    /// Amplitudes over a basis (for comparison with dense states).
    pub fn to_dense(&self, basis: &BasisSet) -> Vec<C64> {
        basis.configs().iter().map(|&c| self.amplitude(c)).collect()
    }

    /// Von Neumann entropy (nats) across chain cut `cut` (cells `1..=cut` on the left).
    pub fn entropy(&mut self, cut: usize) -> Result<f64> {
        ensure!(cut >= 1 && cut < self.len(), InvalidArgument, "cut {cut} outside 1..{}", self.len() - 1);
        self.move_centre(cut - 1)?;
        let w = self.step_right_svd()?;
        Ok(entropy_of_weights(&w))
    }

    /// One canonical sweep collecting the observables of `spec`.
    fn record(&mut self, spec: &ObservableSpec, t: f64, omega: f64, delta: f64) -> Result<Record> {
        let cells = self.cells.clone();
        let n_cells = self.len();
        self.move_centre(0)?;
        let norm2: f64 = self.tensors[0].iter().map(|x| x.norm_sqr()).sum();
        let mut n = vec![0.0; cells.n_atoms];
        let mut nn = vec![0.0; spec.order_pairs.len()];
        let mut entropies = vec![0.0; spec.cuts.len()];
        for c in 0..n_cells {
            let t = &self.tensors[c];
            let probs: Vec<f64> = (0..t.dim().1).map(|k| t.index_axis(Axis(1), k).iter().map(|x| x.norm_sqr()).sum::<f64>() / norm2).collect();
            for &a in &cells.cells[c] {
                n[a] = probs.iter().zip(&cells.local[c]).filter(|(_, &l)| (l >> a) & 1 == 1).map(|(p, _)| p).sum();
            }
            for (slot, &(a, b)) in spec.order_pairs.iter().enumerate() {
                let (ca, cb) = (cells.cell_of[a], cells.cell_of[b]);
                if ca.min(cb) == c {
                    nn[slot] = self.correlator(a, b)? / norm2;
                }
            }
            if c + 1 < n_cells {
                if let Some(slot) = spec.cuts.iter().position(|&(cut, _)| cut == c + 1) {
                    entropies[slot] = entropy_of_weights(&self.step_right_svd()?);
                } else {
                    self.move_centre(c + 1)?;
                }
            }
        }
        let amp2 = |c: Config| self.amplitude(c).norm_sqr() / norm2;
        let order_parameter = (!spec.order_pairs.is_empty()).then(|| {
            let sum: f64 = spec.order_pairs.iter().zip(&nn).map(|(&(a, b), &ab)| ab - n[a] * n[b]).sum();
            4.0 / spec.order_pairs.len() as f64 * sum
        });
        Ok(Record {
            t,
            omega,
            delta,
            norm: norm2.sqrt(),
            p_mis: spec.mis.map(amp2),
            p_zigzag: (!spec.zigzag.is_empty()).then(|| spec.zigzag.iter().map(|&c| amp2(c)).sum()),
            order_parameter,
            entropies,
            n,
            bond_dim_max: Some(self.max_bond_dim()),
            kept_norm: Some(self.kept_norm),
        })
    }

    /// Unnormalised `⟨n_a n_b⟩` with the centre on the leftmost of the two cells.
    fn correlator(&self, a: usize, b: usize) -> Result<f64> {
        let cells = &self.cells;
        let (a, b) = if cells.cell_of[a] <= cells.cell_of[b] { (a, b) } else { (b, a) };
        let (ca, cb) = (cells.cell_of[a], cells.cell_of[b]);
        ensure!(self.centre == ca, InvalidArgument, "centre must sit on the left cell");
        let has = |c: usize, k: usize, atom: usize| (cells.local[c][k] >> atom) & 1 == 1;
        let t = &self.tensors[ca];
        if ca == cb {
            return Ok((0..t.dim().1)
                .filter(|&k| has(ca, k, a) && has(ca, k, b))
                .map(|k| t.index_axis(Axis(1), k).iter().map(|x| x.norm_sqr()).sum::<f64>())
                .sum());
        }
        let dr = t.dim().2;
        let mut env: Array2<C64> = Array2::zeros((dr, dr));
        for k in (0..t.dim().1).filter(|&k| has(ca, k, a)) {
            let m = t.index_axis(Axis(1), k);
            env = env + m.t().dot(&m.mapv(|x| x.conj()));
        }
        for m in ca + 1..=cb {
            let tm = &self.tensors[m];
            let d2 = tm.dim().2;
            let mut next: Array2<C64> = Array2::zeros((d2, d2));
            for k in 0..tm.dim().1 {
                if m == cb && !has(cb, k, b) {
                    continue;
                }
                let mk = tm.index_axis(Axis(1), k);
                next = next + mk.t().dot(&env).dot(&mk.mapv(|x| x.conj()));
            }
            env = next;
        }
        Ok(env.diag().iter().map(|x| x.re).sum())
    }
}

/// Entanglement entropy across chain cut `cut`.
pub fn mps_entropy(mps: &mut MpsState, cut: usize) -> Result<f64> {
    mps.entropy(cut)
}

fn strang_step(mps: &mut MpsState, model: &MpsModel, omega: f64, delta: f64, factor: C64, p: &TruncationParams) -> Result<()> {
    let half = factor * 0.5;
    for (layer, f, sweep) in [(0, half, Sweep::Right), (1, half, Sweep::Left), (2, factor, Sweep::Right), (1, half, Sweep::Left), (0, half, Sweep::Right)] {
        let triples: Vec<&TripleTerms> = match sweep {
            Sweep::Right => model.layer(layer).collect(),
            Sweep::Left => model.layer(layer).rev().collect(),
        };
        for t in triples {
            let g = t.gate(omega, delta, f)?;
            mps.apply_triple(t.centre, &g, sweep, p)?;
        }
    }
    Ok(())
}

/// Real-time evolution on the same step grid as the dense engine (H frozen at
/// step midpoints), one symmetric splitting per step.
pub fn tebd_evolve(
    mps: &mut MpsState,
    model: &MpsModel,
    control: &dyn Control,
    n_steps: usize,
    trunc: &TruncationParams,
    spec: &ObservableSpec,
) -> Result<Trajectory> {
    ensure!(*mps.cells == *model.cells, InvalidArgument, "state and model describe different chains");
    ensure!(trunc.cutoff >= 0.0 && trunc.cutoff < 1.0, InvalidArgument, "cutoff must lie in [0, 1)");
    let grid = step_grid(control, n_steps)?;
    let steps = grid.len() - 1;
    let stride = spec.stride.max(1);
    let mut traj = Trajectory { cuts: spec.cuts.iter().map(|c| c.0).collect(), ..Default::default() };
    let (o0, d0) = control.value(0.0);
    traj.records.push(mps.record(spec, 0.0, o0, d0)?);
    for k in 0..steps {
        let (t0, t1) = (grid[k], grid[k + 1]);
        let (omega, delta) = control.value(0.5 * (t0 + t1));
        strang_step(mps, model, omega, delta, C64::new(0.0, -(t1 - t0)), trunc)?;
        if (k + 1) % stride == 0 || k + 1 == steps {
            let (o, d) = control.value(t1);
            traj.records.push(mps.record(spec, t1, o, d)?);
        }
    }
    Ok(traj)
}

/// Imaginary-time settings: step sizes (units of 2π/Ω) used in order, energy
/// tolerance per check and a step budget per size.
#[derive(Clone, Debug, PartialEq)]
pub struct ImaginaryTimeParams {
    pub steps: Vec<f64>,
    pub tol: f64,
    pub check_every: usize,
    pub max_steps: usize,
}

impl Default for ImaginaryTimeParams {
    fn default() -> Self {
        ImaginaryTimeParams { steps: vec![0.05, 0.02, 0.01, 0.005, 0.002], tol: 1e-10, check_every: 10, max_steps: 20_000 }
    }
}

/// Ground state by imaginary-time evolution from `start` with decreasing step
/// sizes. Returns the state and its energy.
pub fn imaginary_time_ground(
    model: &MpsModel,
    start: Config,
    omega: f64,
    delta: f64,
    trunc: &TruncationParams,
    params: &ImaginaryTimeParams,
) -> Result<(MpsState, f64)> {
    ensure!(!params.steps.is_empty(), InvalidArgument, "no imaginary-time step sizes");
    let mut mps = mps_from_product(&model.cells, start)?;
    let mut energy = model.energy(&mut mps, omega, delta)?;
    for &tau in &params.steps {
        let mut done = 0;
        loop {
            for _ in 0..params.check_every {
                strang_step(&mut mps, model, omega, delta, C64::new(-tau, 0.0), trunc)?;
            }
            done += params.check_every;
            let e = model.energy(&mut mps, omega, delta)?;
            let change = (e - energy).abs();
            energy = e;
            if change < params.tol {
                break;
            }
            if done >= params.max_steps {
                return Err(Error::Budget(format!("imaginary-time evolution at step {tau} did not converge (last change {change:.3e})")));
            }
        }
    }
    // the kept-norm bookkeeping is meaningless for a non-unitary evolution
    mps.kept_norm = 1.0;
    Ok((mps, energy))
}

/// Exact sequential sampling of the represented state.
pub fn mps_sample(mps: &mut MpsState, shots: usize, seed: u64) -> Result<ShotSet> {
    mps.move_centre(0)?;
    let cells = mps.cells.clone();
    let tensors = &mps.tensors;
    let draws: Vec<Config> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = shot_rng(seed, STREAM_MPS, i);
            let mut v = Array2::from_elem((1, 1), ONE);
            let mut config: Config = 0;
            for (c, t) in tensors.iter().enumerate() {
                let cand: Vec<Array2<C64>> = (0..t.dim().1).map(|k| v.dot(&t.index_axis(Axis(1), k))).collect();
                let w: Vec<f64> = cand.iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum()).collect();
                let total: f64 = w.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                let mut k = w.len() - 1;
                for (j, &x) in w.iter().enumerate() {
                    if u < x {
                        k = j;
                        break;
                    }
                    u -= x;
                }
                while w[k] == 0.0 && k > 0 {
                    k -= 1;
                }
                config |= cells.local[c][k];
                v = cand[k].mapv(|z| z / w[k].sqrt());
            }
            config
        })
        .collect();
    ShotSet::new(cells.n_atoms, draws, Some(seed), Provenance::Raw)
}
