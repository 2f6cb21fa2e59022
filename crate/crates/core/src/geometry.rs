//! Atom-array construction: quasi-1D doublet chains, 2D doublet grids and the
//! two reduced 1D chains, plus van der Waals couplings and blockade graphs.
//!
//! Positions are in µm. Energies are in units of the Rabi frequency Ω, so a
//! coupling is fully described by its `c6` coefficient in Ω·µm⁶.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ensure, Error, Result};
use crate::{Config, MAX_ATOMS};

/// Reference nearest-neighbour interaction used for the default calibration.
pub const DEFAULT_V_NN: f64 = 12.5;
/// Reference distance (µm) of the default calibration.
pub const DEFAULT_R_NN: f64 = 5.5;

/// Relative slack applied when comparing an interaction energy against the
/// blockade threshold, so that atoms placed at exactly `R_b` stay blockaded.
const BLOCKADE_TIE_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomKind {
    Single,
    DoubletTop,
    DoubletBottom,
    GridSingle,
    GridDoubletLower,
    GridDoubletUpper,
}

impl AtomKind {
    pub fn is_doublet(self) -> bool {
        !matches!(self, AtomKind::Single | AtomKind::GridSingle)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
    #[serde(default = "unit_scale")]
    pub rabi_scale: f64,
    /// 1-based chain site (chains) or row-major cell index (grids).
    #[serde(default)]
    pub site: Option<usize>,
    pub kind: AtomKind,
}

fn unit_scale() -> f64 {
    1.0
}

/// How the atoms were laid out. Chain layouts carry meaningful site labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Layout {
    DoubletChain { sites: usize },
    Chain { sites: usize },
    Grid { rows: usize, cols: usize },
    Free,
}

impl Layout {
    pub fn chain_sites(&self) -> Option<usize> {
        match *self {
            Layout::DoubletChain { sites } | Layout::Chain { sites } => Some(sites),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomArray {
    atoms: Vec<Atom>,
    layout: Layout,
}

#[derive(Serialize, Deserialize)]
struct GeometryFile {
    atoms: Vec<Atom>,
    units: String,
    #[serde(default = "free_layout")]
    layout: Layout,
}

fn free_layout() -> Layout {
    Layout::Free
}

impl AtomArray {
    pub fn new(atoms: Vec<Atom>, layout: Layout) -> Result<Self> {
        ensure!(!atoms.is_empty(), Geometry, "atom array is empty");
        ensure!(atoms.len() <= MAX_ATOMS, Geometry, "at most {MAX_ATOMS} atoms are supported, got {}", atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            ensure!(a.x.is_finite() && a.y.is_finite(), Geometry, "atom {i} has a non-finite coordinate");
            ensure!(a.rabi_scale.is_finite() && a.rabi_scale > 0.0, Geometry, "atom {i} has rabi_scale {}", a.rabi_scale);
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let d = ((atoms[i].x - atoms[j].x).powi(2) + (atoms[i].y - atoms[j].y).powi(2)).sqrt();
                ensure!(d > 0.0, Geometry, "atoms {i} and {j} coincide");
            }
        }
        if let Some(sites) = layout.chain_sites() {
            for (i, a) in atoms.iter().enumerate() {
                match a.site {
                    Some(s) if s >= 1 && s <= sites => {}
                    _ => return Err(Error::Geometry(format!("atom {i} lacks a valid site label for a {sites}-site chain"))),
                }
            }
        }
        Ok(AtomArray { atoms, layout })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.atoms[i], &self.atoms[j]);
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
    }

    pub fn rabi_scales(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.rabi_scale).collect()
    }

    /// Number of chain sites, for chain layouts.
    pub fn chain_sites(&self) -> Option<usize> {
        self.layout.chain_sites()
    }

    fn require_chain(&self) -> Result<usize> {
        self.chain_sites()
            .ok_or_else(|| Error::Geometry("operation needs a chain layout with site labels".into()))
    }

    /// Atom indices sitting on chain site `site` (1-based), in bit order.
    pub fn atoms_at_site(&self, site: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.atoms[i].site == Some(site)).collect()
    }

    /// Chain sites grouped in ascending order, each with its atoms.
    pub fn site_groups(&self) -> Result<Vec<Vec<usize>>> {
        let sites = self.require_chain()?;
        Ok((1..=sites).map(|s| self.atoms_at_site(s)).collect())
    }

    /// Bit mask of the atoms on sites `1..=cut` (left side of a bipartition
    /// between chain sites `cut` and `cut + 1`).
    pub fn cut_mask(&self, cut: usize) -> Result<Config> {
        let sites = self.require_chain()?;
        ensure!(cut >= 1 && cut < sites, InvalidArgument, "cut {cut} outside 1..{}", sites - 1);
        Ok(self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.site.is_some_and(|s| s <= cut))
            .fold(0, |m, (i, _)| m | (1 << i)))
    }

    /// The central bipartition, between sites ⌈L/2⌉ and ⌈L/2⌉ + 1.
    pub fn central_cut(&self) -> Result<usize> {
        let sites = self.require_chain()?;
        ensure!(sites >= 2, Geometry, "a single-site chain has no cut");
        Ok(sites.div_ceil(2))
    }

    /// Configuration with every odd chain site excited (the doublet-chain MIS).
    pub fn odd_site_config(&self) -> Result<Config> {
        self.require_chain()?;
        Ok(self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.site.is_some_and(|s| s % 2 == 1))
            .fold(0, |m, (i, _)| m | (1 << i)))
    }

    /// Returns a copy with all coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        ensure!(factor > 0.0 && factor.is_finite(), InvalidArgument, "scale factor must be positive");
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { x: a.x * factor, y: a.y * factor, ..a.clone() })
            .collect();
        AtomArray::new(atoms, self.layout)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GeometryFile { atoms: self.atoms.clone(), units: "um".into(), layout: self.layout };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeometryFile = serde_json::from_str(text)?;
        ensure!(file.units == "um", Parse, "unsupported length unit {:?}", file.units);
        AtomArray::new(file.atoms, file.layout)
    }

    /// SHA-256 of the canonical JSON rendering, hex encoded.
    pub fn content_hash(&self) -> String {
        let file = GeometryFile { atoms: self.atoms.clone(), units: "um".into(), layout: self.layout };
        let text = serde_json::to_string(&file).expect("geometry serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Quasi-1D doublet chain with `sites` (odd) chain sites. Consecutive sites are
/// `sx / 2` apart horizontally; doublet atoms sit at `±sy / 2`.
pub fn build_doublet_chain(sites: usize, sx: f64, sy: f64) -> Result<AtomArray> {
    ensure!(sites >= 3 && sites % 2 == 1, Geometry, "doublet chain needs an odd site count >= 3, got {sites}");
    ensure!(sx > 0.0 && sy > 0.0 && sx.is_finite() && sy.is_finite(), Geometry, "spacings must be positive");
    let half_step = sx / 2.0;
    let half_height = sy / 2.0;
    let mut atoms = Vec::with_capacity((3 * sites - 1) / 2);
    for j in 1..=sites {
        let x = (j - 1) as f64 * half_step;
        if j % 2 == 1 {
            atoms.push(Atom { x, y: 0.0, rabi_scale: 1.0, site: Some(j), kind: AtomKind::Single });
        } else {
            atoms.push(Atom { x, y: half_height, rabi_scale: 1.0, site: Some(j), kind: AtomKind::DoubletTop });
            atoms.push(Atom { x, y: -half_height, rabi_scale: 1.0, site: Some(j), kind: AtomKind::DoubletBottom });
        }
    }
    AtomArray::new(atoms, Layout::DoubletChain { sites })
}

/// Doublet chain built from equilateral triangles of side `side`.
pub fn build_equilateral_doublet_chain(sites: usize, side: f64) -> Result<AtomArray> {
    build_doublet_chain(sites, side * 3f64.sqrt(), side)
}

/// Square grid of pitch `a` in which every cell with odd `row + col` holds a
/// diagonally oriented doublet of separation `d`.
pub fn build_2d_doublet_grid(rows: usize, cols: usize, a: f64, d: f64) -> Result<AtomArray> {
    ensure!(rows >= 2 && cols >= 2, Geometry, "grid needs at least 2x2 cells, got {rows}x{cols}");
    ensure!(d > 0.0 && a > d, Geometry, "need a > d > 0, got a = {a}, d = {d}");
    let offset = d / (2.0 * 2f64.sqrt());
    let mut atoms = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (cx, cy) = (c as f64 * a, r as f64 * a);
            let site = Some(r * cols + c + 1);
            if (r + c) % 2 == 0 {
                atoms.push(Atom { x: cx, y: cy, rabi_scale: 1.0, site, kind: AtomKind::GridSingle });
            } else {
                atoms.push(Atom { x: cx - offset, y: cy - offset, rabi_scale: 1.0, site, kind: AtomKind::GridDoubletLower });
                atoms.push(Atom { x: cx + offset, y: cy + offset, rabi_scale: 1.0, site, kind: AtomKind::GridDoubletUpper });
            }
        }
    }
    AtomArray::new(atoms, Layout::Grid { rows, cols })
}

/// Reduced 1D chain with consecutive distance `s`: odd sites on the axis,
/// even sites alternating between `+offset/2` and `-offset/2`.
pub fn build_zigzag_chain(sites: usize, s: f64, offset: f64) -> Result<AtomArray> {
    ensure!(sites >= 2, Geometry, "zigzag chain needs at least 2 sites");
    ensure!(s > 0.0, Geometry, "spacing must be positive");
    ensure!(offset >= 0.0 && offset < 2.0 * s, Geometry, "offset {offset} must lie in [0, 2s)");
    let dy = offset / 2.0;
    let dx = (s * s - dy * dy).sqrt();
    let atoms = (1..=sites)
        .map(|j| {
            let y = if j % 2 == 1 {
                0.0
            } else if (j / 2) % 2 == 1 {
                dy
            } else {
                -dy
            };
            Atom { x: (j - 1) as f64 * dx, y, rabi_scale: 1.0, site: Some(j), kind: AtomKind::Single }
        })
        .collect();
    AtomArray::new(atoms, Layout::Chain { sites })
}

/// Straight chain of spacing `s` whose even sites carry Rabi scale `k`.
pub fn build_enhanced_rabi_chain(sites: usize, s: f64, k: f64) -> Result<AtomArray> {
    ensure!(sites >= 2, Geometry, "chain needs at least 2 sites");
    ensure!(s > 0.0, Geometry, "spacing must be positive");
    ensure!(k > 0.0 && k.is_finite(), Geometry, "enhancement factor must be positive, got {k}");
    let atoms = (1..=sites)
        .map(|j| Atom {
            x: (j - 1) as f64 * s,
            y: 0.0,
            rabi_scale: if j % 2 == 0 { k } else { 1.0 },
            site: Some(j),
            kind: AtomKind::Single,
        })
        .collect();
    AtomArray::new(atoms, Layout::Chain { sites })
}

/// Van der Waals coupling `V(r) = c6 / r⁶`, in units of Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VdwCoupling {
    pub c6: f64,
}

impl VdwCoupling {
    pub fn from_c6(c6: f64) -> Result<Self> {
        ensure!(c6 > 0.0 && c6.is_finite(), InvalidArgument, "c6 must be positive, got {c6}");
        Ok(VdwCoupling { c6 })
    }

    /// Chooses `c6` so that `V(r_ref) = v_ref`.
    pub fn calibrated(v_ref: f64, r_ref: f64) -> Result<Self> {
        ensure!(v_ref > 0.0 && r_ref > 0.0, InvalidArgument, "calibration pair must be positive");
        Self::from_c6(v_ref * r_ref.powi(6))
    }

    pub fn energy(&self, r: f64) -> f64 {
        self.c6 / r.powi(6)
    }

    /// Distance at which `V(r) = omega`.
    pub fn blockade_radius(&self, omega: f64) -> f64 {
        (self.c6 / omega).powf(1.0 / 6.0)
    }

    pub fn is_blockaded(&self, r: f64, omega: f64) -> bool {
        self.energy(r) >= omega * (1.0 - BLOCKADE_TIE_RTOL)
    }
}

impl Default for VdwCoupling {
    fn default() -> Self {
        VdwCoupling::calibrated(DEFAULT_V_NN, DEFAULT_R_NN).expect("default calibration is valid")
    }
}

/// Simple undirected graph over atom indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockadeGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Config>,
}

impl BlockadeGraph {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        ensure!(n_vertices <= MAX_ATOMS, InvalidArgument, "at most {MAX_ATOMS} vertices supported");
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            ensure!(a < n_vertices && b < n_vertices, InvalidArgument, "edge ({a}, {b}) out of range");
            ensure!(a != b, InvalidArgument, "self-loop on vertex {a}");
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adjacency = vec![0; n_vertices];
        for &(a, b) in &norm {
            adjacency[a] |= 1 << b;
            adjacency[b] |= 1 << a;
        }
        Ok(BlockadeGraph { n_vertices, edges: norm, adjacency })
    }

    pub fn empty(n_vertices: usize) -> Result<Self> {
        Self::new(n_vertices, std::iter::empty())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> Config {
        self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && (self.adjacency[a] >> b) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones() as usize
    }

    pub fn is_independent(&self, config: Config) -> bool {
        (0..self.n_vertices).all(|v| (config >> v) & 1 == 0 || config & self.adjacency[v] == 0)
    }

    /// Independent and no vertex can be added.
    pub fn is_maximal_independent(&self, config: Config) -> bool {
        self.is_independent(config)
            && (0..self.n_vertices).all(|v| (config >> v) & 1 == 1 || config & self.adjacency[v] != 0)
    }

    /// Number of blockaded pairs that are simultaneously excited.
    pub fn violations(&self, config: Config) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| (config >> a) & 1 == 1 && (config >> b) & 1 == 1)
            .count()
    }

    /// Induced subgraph on the vertices in `mask`, relabelled in ascending order.
    pub fn induced(&self, mask: Config) -> BlockadeGraph {
        let keep: Vec<usize> = (0..self.n_vertices).filter(|&v| (mask >> v) & 1 == 1).collect();
        let mut relabel = vec![usize::MAX; self.n_vertices];
        for (k, &v) in keep.iter().enumerate() {
            relabel[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| relabel[a] != usize::MAX && relabel[b] != usize::MAX)
            .map(|&(a, b)| (relabel[a], relabel[b]));
        BlockadeGraph::new(keep.len(), edges).expect("induced subgraph is valid")
    }
}

/// Blockade graph: an edge joins atoms whose interaction reaches `omega`
/// (r ≤ R_b, ties included).
pub fn blockade_graph(array: &AtomArray, coupling: &VdwCoupling, omega: f64) -> Result<BlockadeGraph> {
    ensure!(omega > 0.0 && omega.is_finite(), InvalidArgument, "omega must be positive");
    let n = array.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if coupling.is_blockaded(array.distance(i, j), omega) {
                edges.push((i, j));
            }
        }
    }
    BlockadeGraph::new(n, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    /// Blockade-graph edges only (at Ω = 1).
    Nn,
    /// Pairs of chain sites at most two apart.
    Nnn,
    Full,
}

/// Dense symmetric table of pair energies in units of Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        InteractionMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut m = Self::zeros(n);
        for (i, j, v) in pairs {
            ensure!(i < n && j < n && i != j, InvalidArgument, "bad pair ({i}, {j})");
            m.data[i * n + j] = v;
            m.data[j * n + i] = v;
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Non-zero pairs `(i, j, V)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let v = self.data[i * self.n + j];
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.data[i * self.n + j] == self.data[j * self.n + i]))
    }
}

/// Pair-energy table `V[i][j] = c6 / r⁶` restricted by `truncation`.
pub fn interaction_matrix(array: &AtomArray, coupling: &VdwCoupling, truncation: Truncation) -> Result<InteractionMatrix> {
    let n = array.len();
    let keep: Box<dyn Fn(usize, usize) -> bool> = match truncation {
        Truncation::Full => Box::new(|_, _| true),
        Truncation::Nn => Box::new(|i, j| coupling.is_blockaded(array.distance(i, j), 1.0)),
        Truncation::Nnn => {
            ensure!(
                matches!(array.layout(), Layout::DoubletChain { .. } | Layout::Chain { .. }),
                InvalidArgument,
                "nnn truncation needs chain site labels; use nn or full for this array"
            );
            Box::new(|i, j| {
                let (a, b) = (array.atom(i).site.unwrap_or(0), array.atom(j).site.unwrap_or(0));
                a.abs_diff(b) <= 2
            })
        }
    };
    let mut m = InteractionMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            if keep(i, j) {
                let v = coupling.energy(array.distance(i, j));
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
    }
    Ok(m)
}

impl Serialize for InteractionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = self.data.chunks(self.n.max(1)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockadeGraphRepr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n_vertices: usize,
            edges: Vec<(usize, usize)>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(BlockadeGraphRepr(raw.n_vertices, raw.edges))
    }
}

/// Helper for loading a graph from JSON with validation.
pub struct BlockadeGraphRepr(pub usize, pub Vec<(usize, usize)>);

impl BlockadeGraphRepr {
    pub fn into_graph(self) -> Result<BlockadeGraph> {
        BlockadeGraph::new(self.0, self.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = 5.5;

    fn pair_distances(a: &AtomArray) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                out.push((i, j, a.distance(i, j)));
            }
        }
        out
    }

    #[test]
    fn l3_equilateral_has_four_atoms_all_nn_at_side() {
        let a = build_equilateral_doublet_chain(3, S).unwrap();
        assert_eq!(a.len(), 4);
        // nearest-neighbour pairs: everything except the two singles
        for (i, j, d) in pair_distances(&a) {
            if (i, j) == (0, 3) {
                assert!((d - S * 3f64.sqrt()).abs() < 1e-12);
            } else {
                assert!((d - S).abs() <= 1e-12 * S, "pair ({i},{j}) at {d}");
            }
        }
    }

    #[test]
    fn atom_counts_follow_three_l_minus_one_over_two() {
        for l in (3..=25).step_by(2) {
            let a = build_equilateral_doublet_chain(l, S).unwrap();
            assert_eq!(a.len(), (3 * l - 1) / 2);
        }
        assert_eq!(build_equilateral_doublet_chain(9, S).unwrap().len(), 13);
    }

    #[test]
    fn nnn_distances_of_l15() {
        let a = build_equilateral_doublet_chain(15, S).unwrap();
        let mut horizontal = Vec::new();
        let mut diagonal = Vec::new();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                let (si, sj) = (a.atom(i).site.unwrap(), a.atom(j).site.unwrap());
                if sj - si != 2 {
                    continue;
                }
                let d = a.distance(i, j);
                if (a.atom(i).y - a.atom(j).y).abs() < 1e-12 {
                    horizontal.push(d);
                } else {
                    diagonal.push(d);
                }
            }
        }
        // oracle: direct coordinate geometry of the strip
        let h = (2.0 * S * 3f64.sqrt() / 2.0).hypot(0.0);
        let dg = (2.0 * S * 3f64.sqrt() / 2.0).hypot(S);
        assert!((h - 9.526279441628825).abs() < 1e-9);
        assert!((dg - 11.0).abs() < 1e-12);
        assert!(horizontal.iter().all(|&d| (d - h).abs() < 1e-12));
        assert!(diagonal.iter().all(|&d| (d - dg).abs() < 1e-12));
        assert_eq!(horizontal.len(), 7 + 2 * 6);
        assert_eq!(diagonal.len(), 2 * 6);
        assert!((dg / h - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn doublet_chain_rejects_bad_input() {
        assert!(build_doublet_chain(4, 1.0, 1.0).is_err());
        assert!(build_doublet_chain(1, 1.0, 1.0).is_err());
        assert!(build_doublet_chain(5, 0.0, 1.0).is_err());
        assert!(build_doublet_chain(5, 1.0, -1.0).is_err());
    }

    fn grid_oracle(rows: usize, cols: usize) -> (usize, usize) {
        let mut singles = 0;
        let mut doublets = 0;
        for r in 0..rows {
            for c in 0..cols {
                if (r + c) % 2 == 0 {
                    singles += 1
                } else {
                    doublets += 1
                }
            }
        }
        (singles, doublets)
    }

    #[test]
    fn grid_counts() {
        for (n, expected) in [(7, 73), (3, 13), (2, 6)] {
            let (s, d) = grid_oracle(n, n);
            assert_eq!(s + 2 * d, expected);
            let a = build_2d_doublet_grid(n, n, 6.5, 3.0).unwrap();
            assert_eq!(a.len(), expected);
            let singles = a.atoms().iter().filter(|x| x.kind == AtomKind::GridSingle).count();
            assert_eq!(singles, s);
        }
        assert_eq!(grid_oracle(3, 3), (5, 4));
        assert_eq!(grid_oracle(2, 2), (2, 2));
    }

    #[test]
    fn grid_doublet_separation_and_errors() {
        let a = build_2d_doublet_grid(2, 2, 6.5, 3.0).unwrap();
        let pair: Vec<usize> = a.atoms_at_site(2);
        assert_eq!(pair.len(), 2);
        assert!((a.distance(pair[0], pair[1]) - 3.0).abs() < 1e-12);
        assert!(build_2d_doublet_grid(1, 3, 6.5, 3.0).is_err());
        assert!(build_2d_doublet_grid(3, 3, 3.0, 3.0).is_err());
        assert!(build_2d_doublet_grid(3, 3, 6.5, 0.0).is_err());
    }

    fn nnn_distances(a: &AtomArray) -> Vec<f64> {
        let n = a.len();
        (0..n.saturating_sub(2)).map(|i| a.distance(i, i + 2)).collect()
    }

    #[test]
    fn zigzag_chain_cases() {
        let straight = build_zigzag_chain(6, S, 0.0).unwrap();
        assert!(nnn_distances(&straight).iter().all(|&d| (d - 2.0 * S).abs() < 1e-12));

        let z = build_zigzag_chain(5, S, 2.0).unwrap();
        for i in 0..4 {
            assert!((z.distance(i, i + 1) - S).abs() < 1e-12);
        }
        let mut d = nnn_distances(&z);
        d.sort_by(f64::total_cmp);
        d.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(d.len(), 2);

        let three = build_zigzag_chain(3, S, 1.3).unwrap();
        assert_eq!(nnn_distances(&three).len(), 1);

        assert!(build_zigzag_chain(5, S, 2.0 * S).is_err());
    }

    #[test]
    fn enhanced_rabi_chain_scales() {
        let a = build_enhanced_rabi_chain(4, S, 2.0).unwrap();
        assert_eq!(a.rabi_scales(), vec![1.0, 2.0, 1.0, 2.0]);
        let u = build_enhanced_rabi_chain(5, S, 1.0).unwrap();
        assert!(u.rabi_scales().iter().all(|&k| k == 1.0));
        let p = build_enhanced_rabi_chain(5, S, 2f64.sqrt()).unwrap();
        assert!((p.rabi_scales()[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!(build_enhanced_rabi_chain(4, S, 0.0).is_err());
        assert!(build_enhanced_rabi_chain(4, S, -1.0).is_err());
    }

    #[test]
    fn blockade_graph_of_doublet_chain() {
        let a = build_equilateral_doublet_chain(5, S).unwrap();
        let c = VdwCoupling::default();
        // oracle: V(r) = V_nn (s / r)^6
        let v_nn = DEFAULT_V_NN;
        let v_h = v_nn * (S / (S * 3f64.sqrt())).powi(6);
        assert!((c.energy(S) - v_nn).abs() < 1e-9);
        assert!((v_h - 12.5 / 27.0).abs() < 1e-12);
        assert!((c.energy(S * 3f64.sqrt()) - v_h).abs() < 1e-12);
        let g = blockade_graph(&a, &c, 1.0).unwrap();
        for (i, j, d) in pair_distances(&a) {
            assert_eq!(g.has_edge(i, j), (d - S).abs() < 1e-9, "pair ({i},{j})");
        }
    }

    #[test]
    fn blockade_tie_is_inclusive() {
        let c = VdwCoupling::from_c6(7.0).unwrap();
        let rb = c.blockade_radius(1.0);
        let atoms = vec![
            Atom { x: 0.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
            Atom { x: rb, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
        ];
        let a = AtomArray::new(atoms, Layout::Free).unwrap();
        let g = blockade_graph(&a, &c, 1.0).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn single_atom_graph_is_empty() {
        let atoms = vec![Atom { x: 0.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single }];
        let a = AtomArray::new(atoms, Layout::Free).unwrap();
        let g = blockade_graph(&a, &VdwCoupling::default(), 1.0).unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn interaction_ratio_is_64_over_27() {
        let a = build_equilateral_doublet_chain(5, S).unwrap();
        let v = interaction_matrix(&a, &VdwCoupling::default(), Truncation::Nnn).unwrap();
        // singles 0 and 3 are horizontal; top of site 2 and bottom of site 4 are diagonal
        let top2 = a.atoms_at_site(2)[0];
        let bottom4 = a.atoms_at_site(4)[1];
        let ratio = v.get(0, 3) / v.get(top2, bottom4);
        assert!((ratio - 64.0 / 27.0).abs() < 1e-12);
        assert!((ratio - 2.37).abs() < 0.005);
    }

    #[test]
    fn nn_truncation_beyond_blockade_is_zero() {
        let atoms = vec![
            Atom { x: 0.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
            Atom { x: 20.0, y: 0.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
        ];
        let a = AtomArray::new(atoms, Layout::Free).unwrap();
        let v = interaction_matrix(&a, &VdwCoupling::default(), Truncation::Nn).unwrap();
        assert_eq!(v.pairs().count(), 0);
        assert!(interaction_matrix(&a, &VdwCoupling::default(), Truncation::Nnn).is_err());
    }

    #[test]
    fn full_and_nnn_differ_only_beyond_two_sites() {
        let a = build_equilateral_doublet_chain(9, S).unwrap();
        let c = VdwCoupling::default();
        let full = interaction_matrix(&a, &c, Truncation::Full).unwrap();
        let nnn = interaction_matrix(&a, &c, Truncation::Nnn).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                let sep = a.atom(i).site.unwrap().abs_diff(a.atom(j).site.unwrap());
                if full.get(i, j) != nnn.get(i, j) {
                    assert!(sep >= 3);
                } else if i != j {
                    assert!(sep <= 2, "pair ({i},{j}) should have been truncated");
                }
            }
        }
    }

    #[test]
    fn grid_rejects_nnn() {
        let a = build_2d_doublet_grid(3, 3, 6.5, 3.0).unwrap();
        assert!(interaction_matrix(&a, &VdwCoupling::default(), Truncation::Nnn).is_err());
        assert!(interaction_matrix(&a, &VdwCoupling::default(), Truncation::Full).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let a = build_enhanced_rabi_chain(5, S, 1.5).unwrap();
        let text = a.to_json().unwrap();
        assert!(text.contains("\"units\": \"um\""));
        let b = AtomArray::from_json(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn cut_masks_and_central_cut() {
        let a = build_equilateral_doublet_chain(5, S).unwrap();
        assert_eq!(a.central_cut().unwrap(), 3);
        assert_eq!(a.cut_mask(1).unwrap(), 0b1);
        assert_eq!(a.cut_mask(2).unwrap(), 0b111);
        assert!(a.cut_mask(0).is_err());
        assert!(a.cut_mask(5).is_err());
        assert_eq!(a.odd_site_config().unwrap(), 0b1001001);
    }

    #[test]
    fn coincident_atoms_are_rejected() {
        let atoms = vec![
            Atom { x: 1.0, y: 1.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
            Atom { x: 1.0, y: 1.0, rabi_scale: 1.0, site: None, kind: AtomKind::Single },
        ];
        assert!(AtomArray::new(atoms, Layout::Free).is_err());
    }
}
