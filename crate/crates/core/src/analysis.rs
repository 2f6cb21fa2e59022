//! Derived quantities: the zigzag order parameter, entanglement bounds from
//! independent-set counting, exponential scaling fits and quench-scan summaries.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, AtomKind, BlockadeGraph, Layout};
use crate::spectra::count_independent_sets;
use crate::Config;

/// Diagonal next-nearest-neighbour doublet pairs `(i, α) – (i + 2, ᾱ)` for even
/// bulk sites `i = 4, 6, …, L − 5`; there are `L − 7` of them.
pub fn order_pairs(array: &AtomArray) -> Result<Vec<(usize, usize)>> {
    let sites = match array.layout() {
        Layout::DoubletChain { sites } => sites,
        _ => return Err(Error::Geometry("order parameter needs a doublet chain".into())),
    };
    ensure!(sites >= 9, Geometry, "order parameter needs L >= 9, got {sites}");
    let doublet = |site: usize| -> Result<(usize, usize)> {
        let atoms = array.atoms_at_site(site);
        let find = |k: AtomKind| atoms.iter().copied().find(|&i| array.atom(i).kind == k);
        match (find(AtomKind::DoubletTop), find(AtomKind::DoubletBottom)) {
            (Some(t), Some(b)) => Ok((t, b)),
            _ => Err(Error::Geometry(format!("site {site} is not a doublet"))),
        }
    };
    let mut pairs = Vec::with_capacity(sites - 7);
    for i in (4..=sites - 5).step_by(2) {
        let (t0, b0) = doublet(i)?;
        let (t2, b2) = doublet(i + 2)?;
        pairs.push((t0, b2));
        pairs.push((b0, t2));
    }
    Ok(pairs)
}

/// `4 / #pairs · Σ (⟨nₐ n_b⟩ − ⟨nₐ⟩⟨n_b⟩)` over a weighted set of configurations.
pub fn order_parameter_from_distribution(dist: impl IntoIterator<Item = (Config, f64)>, pairs: &[(usize, usize)]) -> f64 {
    let mut total = 0.0;
    let mut na = vec![0.0; pairs.len()];
    let mut nb = vec![0.0; pairs.len()];
    let mut nab = vec![0.0; pairs.len()];
    for (c, p) in dist {
        total += p;
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let (xa, xb) = ((c >> a) & 1 == 1, (c >> b) & 1 == 1);
            if xa {
                na[k] += p;
            }
            if xb {
                nb[k] += p;
            }
            if xa && xb {
                nab[k] += p;
            }
        }
    }
    if total <= 0.0 || pairs.is_empty() {
        return 0.0;
    }
    let sum: f64 = (0..pairs.len()).map(|k| nab[k] / total - (na[k] / total) * (nb[k] / total)).sum();
    4.0 / pairs.len() as f64 * sum
}

/// Order parameter of a probability distribution (state or shots) on a doublet chain.
pub fn order_parameter(dist: impl IntoIterator<Item = (Config, f64)>, array: &AtomArray) -> Result<f64> {
    Ok(order_parameter_from_distribution(dist, &order_pairs(array)?))
}

/// `ln min(D_left, D_right)` with `D` the number of independent sets of each
/// half of the (hard-core) blockade graph.
pub fn entropy_upper_bound(array: &AtomArray, graph: &BlockadeGraph, cut: usize) -> Result<f64> {
    ensure!(graph.n_vertices() == array.len(), InvalidArgument, "graph and array sizes differ");
    let left = array.cut_mask(cut)?;
    let all: Config = if array.len() == 128 { Config::MAX } else { (1u128 << array.len()) - 1 };
    let dl = count_independent_sets(graph, left)?;
    let dr = count_independent_sets(graph, all & !left)?;
    Ok((dl.min(dr) as f64).ln())
}

/// Weighted least-squares fit of `ln P = ln p + (N − N₀) ln b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub sizes: Vec<f64>,
    pub probs: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    /// Indices of input points left out because their probability is zero.
    pub excluded: Vec<usize>,
    pub n0: f64,
    /// `P = p · b^(N − N₀)`.
    pub p: f64,
    pub b: f64,
    /// Same fit written as `P = p_abs · b^N`.
    pub p_abs: f64,
    /// `ln P − fit` at each included point.
    pub residuals: Vec<f64>,
    /// Finite-difference slopes of `ln P` between consecutive included points.
    pub local_slopes: Vec<f64>,
}

pub fn scaling_fit(sizes: &[f64], probs: &[f64], errors: Option<&[f64]>, n0: f64) -> Result<ScalingFit> {
    ensure!(sizes.len() == probs.len(), InvalidArgument, "sizes and probabilities differ in length");
    if let Some(e) = errors {
        ensure!(e.len() == probs.len(), InvalidArgument, "errors and probabilities differ in length");
    }
    ensure!(sizes.windows(2).all(|w| w[1] > w[0]), InvalidArgument, "sizes must be strictly increasing");
    ensure!(probs.iter().all(|&p| p >= 0.0 && p.is_finite()), InvalidArgument, "probabilities must be non-negative");
    let keep: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    let excluded: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] == 0.0).collect();
    ensure!(keep.len() >= 2, InvalidArgument, "need at least two points with P > 0");

    let use_errors = errors.is_some_and(|e| keep.iter().all(|&i| e[i] > 0.0));
    let weight = |i: usize| {
        if use_errors {
            let rel = errors.unwrap()[i] / probs[i];
            1.0 / (rel * rel)
        } else {
            1.0
        }
    };
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in &keep {
        let (w, x, y) = (weight(i), sizes[i] - n0, probs[i].ln());
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    ensure!(det.abs() > 0.0, Numeric, "degenerate fit");
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let (p, b) = (intercept.exp(), slope.exp());
    let residuals = keep.iter().map(|&i| probs[i].ln() - (intercept + slope * (sizes[i] - n0))).collect();
    let local_slopes = keep
        .windows(2)
        .map(|w| (probs[w[1]].ln() - probs[w[0]].ln()) / (sizes[w[1]] - sizes[w[0]]))
        .collect();
    Ok(ScalingFit {
        sizes: sizes.to_vec(),
        probs: probs.to_vec(),
        errors: errors.map(|e| e.to_vec()),
        excluded,
        n0,
        p,
        b,
        p_abs: (intercept - slope * n0).exp(),
        residuals,
        local_slopes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuenchScan {
    pub t_q: Vec<f64>,
    pub p_mis: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    pub first_revival_index: usize,
    pub first_revival: f64,
    pub argmax_index: usize,
    pub argmax: f64,
}

/// First revival: the first interior grid point that is a strict rise over its
/// left neighbour, not below its right neighbour and above the `T_q = 0`
/// baseline. No smoothing is applied.
pub fn quench_scan_summary(t_q: &[f64], p_mis: &[f64], errors: Option<&[f64]>) -> Result<QuenchScan> {
    ensure!(t_q.len() == p_mis.len(), InvalidArgument, "grid and values differ in length");
    ensure!(t_q.len() >= 3, InvalidArgument, "need at least three scan points");
    ensure!(t_q.windows(2).all(|w| w[1] > w[0]), InvalidArgument, "T_q grid must be strictly increasing");
    let base = p_mis[0];
    let first = (1..p_mis.len() - 1)
        .find(|&i| p_mis[i] > p_mis[i - 1] && p_mis[i] >= p_mis[i + 1] && p_mis[i] > base)
        .ok_or_else(|| Error::Numeric("no revival: P_MIS(T_q) has no interior local maximum above the baseline".into()))?;
    let argmax = (0..p_mis.len()).fold(0, |best, i| if p_mis[i] > p_mis[best] { i } else { best });
    Ok(QuenchScan {
        t_q: t_q.to_vec(),
        p_mis: p_mis.to_vec(),
        errors: errors.map(|e| e.to_vec()),
        first_revival_index: first,
        first_revival: t_q[first],
        argmax_index: argmax,
        argmax: t_q[argmax],
    })
}
