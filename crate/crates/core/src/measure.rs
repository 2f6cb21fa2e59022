//! Projective readout: shot sampling, the detection-error channel, blockade
//! repair of raw shots and probability estimates with standard errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyn_dense::DenseState;
use crate::error::{ensure, Error, Result};
use crate::geometry::{AtomArray, BlockadeGraph};
use crate::model::{named_state, NamedKind};
use crate::{config_from_str, config_to_string, Config, MAX_ATOMS};

/// Stage of a shot record. Transitions only move forward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    Noisy,
    Postprocessed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotSet {
    n_atoms: usize,
    shots: Vec<Config>,
    seed: Option<u64>,
    provenance: Provenance,
    array_hash: Option<String>,
    /// Set for ingested data that was postselected on a fully loaded array.
    postselected: bool,
}

impl ShotSet {
    pub fn new(n_atoms: usize, shots: Vec<Config>, seed: Option<u64>, provenance: Provenance) -> Result<Self> {
        ensure!(n_atoms <= MAX_ATOMS, InvalidArgument, "at most {MAX_ATOMS} atoms per shot");
        let mask = full_mask(n_atoms);
        ensure!(shots.iter().all(|&c| c & !mask == 0), InvalidArgument, "shot has bits beyond atom {n_atoms}");
        Ok(ShotSet { n_atoms, shots, seed, provenance, array_hash: None, postselected: false })
    }

    pub fn with_array(mut self, array: &AtomArray) -> Result<Self> {
        ensure!(array.len() == self.n_atoms, InvalidArgument, "array has {} atoms, shots have {}", array.len(), self.n_atoms);
        self.array_hash = Some(array.content_hash());
        Ok(self)
    }

    pub fn with_postselection(mut self, flag: bool) -> Self {
        self.postselected = flag;
        self
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn shots(&self) -> &[Config] {
        &self.shots
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn array_hash(&self) -> Option<&str> {
        self.array_hash.as_deref()
    }

    pub fn postselected(&self) -> bool {
        self.postselected
    }

    /// Occurrence count of every distinct configuration.
    pub fn counts(&self) -> BTreeMap<Config, usize> {
        let mut m = BTreeMap::new();
        for &c in &self.shots {
            *m.entry(c).or_insert(0) += 1;
        }
        m
    }

    /// Empirical distribution.
    pub fn distribution(&self) -> Vec<(Config, f64)> {
        let n = self.shots.len() as f64;
        self.counts().into_iter().map(|(c, k)| (c, k as f64 / n)).collect()
    }

    /// Per-atom Rydberg fraction.
    pub fn mean_occupation(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.n_atoms];
        for &c in &self.shots {
            for (i, x) in n.iter_mut().enumerate() {
                if (c >> i) & 1 == 1 {
                    *x += 1.0;
                }
            }
        }
        let total = self.shots.len().max(1) as f64;
        n.iter().map(|x| x / total).collect()
    }

    fn advance(&self, shots: Vec<Config>, seed: u64, to: Provenance) -> Result<ShotSet> {
        ensure!(to > self.provenance, InvalidArgument, "cannot go from {:?} to {:?}", self.provenance, to);
        Ok(ShotSet { shots, seed: Some(seed), provenance: to, ..self.clone() })
    }
}

fn full_mask(n: usize) -> Config {
    if n == MAX_ATOMS {
        Config::MAX
    } else {
        (1u128 << n) - 1
    }
}

const STREAM_SAMPLE: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_REPAIR: u64 = 3;

/// Independent generator for shot `index` of a stage, so results do not depend
/// on evaluation order.
pub(crate) fn shot_rng(seed: u64, stage: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stage << 56) | index as u64);
    rng
}

/// Draw shots by cumulative-probability inversion over a weighted configuration list.
pub fn sample_distribution(n_atoms: usize, configs: &[Config], probs: &[f64], shots: usize, seed: u64) -> Result<ShotSet> {
    ensure!(configs.len() == probs.len(), InvalidArgument, "configs and probabilities differ in length");
    ensure!(probs.iter().all(|&p| p >= 0.0 && p.is_finite()), InvalidArgument, "probabilities must be finite and non-negative");
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    ensure!(acc > 0.0, InvalidArgument, "distribution has zero total weight");
    let draws: Vec<Config> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let u = shot_rng(seed, STREAM_SAMPLE, i).gen::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(configs.len() - 1);
            // skip zero-weight entries that share the boundary
            let k = (k..configs.len()).find(|&j| probs[j] > 0.0).unwrap_or(k);
            configs[k]
        })
        .collect();
    ShotSet::new(n_atoms, draws, Some(seed), Provenance::Raw)
}

pub fn sample_dense(state: &DenseState, shots: usize, seed: u64) -> Result<ShotSet> {
    let basis = state.basis();
    sample_distribution(basis.n_atoms(), basis.configs(), &state.probabilities(), shots, seed)
}

/// Independent per-atom readout errors: Rydberg read as ground with
/// probability `p_r_to_g`, ground read as Rydberg with `p_g_to_r`.
pub fn detection_channel(shots: &ShotSet, p_r_to_g: f64, p_g_to_r: f64, seed: u64) -> Result<ShotSet> {
    ensure!((0.0..=1.0).contains(&p_r_to_g), InvalidArgument, "p_r_to_g = {p_r_to_g} outside [0, 1]");
    ensure!((0.0..=1.0).contains(&p_g_to_r), InvalidArgument, "p_g_to_r = {p_g_to_r} outside [0, 1]");
    let n = shots.n_atoms;
    let out: Vec<Config> = shots
        .shots
        .par_iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut rng = shot_rng(seed, STREAM_NOISE, i);
            let mut read = c;
            for a in 0..n {
                let u: f64 = rng.gen();
                let bit = 1u128 << a;
                if c & bit != 0 {
                    if u < p_r_to_g {
                        read &= !bit;
                    }
                } else if u < p_g_to_r {
                    read |= bit;
                }
            }
            read
        })
        .collect();
    shots.advance(out, seed, Provenance::Noisy)
}

/// Probability that a configuration with `n_rydberg` excited and `n_ground`
/// unexcited atoms is read out without error.
pub fn readout_fidelity(n_rydberg: usize, n_ground: usize, p_r_to_g: f64, p_g_to_r: f64) -> f64 {
    (1.0 - p_r_to_g).powi(n_rydberg as i32) * (1.0 - p_g_to_r).powi(n_ground as i32)
}

/// Efficiency factor `(1 − p_r_to_g)^n_rydberg` that ignores ground-state errors.
pub fn rydberg_detection_factor(n_rydberg: usize, p_r_to_g: f64) -> f64 {
    (1.0 - p_r_to_g).powi(n_rydberg as i32)
}

fn pick<R: Rng>(rng: &mut R, items: &[usize]) -> usize {
    items[rng.gen_range(0..items.len())]
}

/// Blockade repair of one shot. While violations remain, the Rydberg atom with
/// the most blockaded Rydberg neighbours is lowered (uniform tie-break); then
/// unblockaded ground atoms are raised one at a time in uniformly random order
/// until the set is maximal.
pub fn repair_config<R: Rng>(config: Config, graph: &BlockadeGraph, rng: &mut R) -> Config {
    let n = graph.n_vertices();
    let mut c = config & full_mask(n);
    loop {
        let mut worst = 0;
        let mut ties = Vec::new();
        for v in (0..n).filter(|&v| (c >> v) & 1 == 1) {
            let k = (graph.neighbors(v) & c).count_ones();
            if k > worst {
                worst = k;
                ties.clear();
            }
            if k == worst && k > 0 {
                ties.push(v);
            }
        }
        if worst == 0 {
            break;
        }
        c &= !(1u128 << pick(rng, &ties));
    }
    loop {
        let free: Vec<usize> = (0..n).filter(|&v| (c >> v) & 1 == 0 && graph.neighbors(v) & c == 0).collect();
        if free.is_empty() {
            break;
        }
        c |= 1u128 << pick(rng, &free);
    }
    c
}

pub fn postprocess_algorithm1(config: Config, graph: &BlockadeGraph, seed: u64) -> Config {
    repair_config(config, graph, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Repair every shot; each shot draws from its own sub-stream of `seed`.
pub fn postprocess_shots(shots: &ShotSet, graph: &BlockadeGraph, seed: u64) -> Result<ShotSet> {
    ensure!(graph.n_vertices() == shots.n_atoms, InvalidArgument, "graph and shots have different atom counts");
    let out: Vec<Config> = shots
        .shots
        .par_iter()
        .enumerate()
        .map(|(i, &c)| repair_config(c, graph, &mut shot_rng(seed, STREAM_REPAIR, i)))
        .collect();
    shots.advance(out, seed, Provenance::Postprocessed)
}

/// Which shots count as hits.
#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    Configs(Vec<Config>),
}

impl Predicate {
    pub fn mis(array: &AtomArray) -> Result<Self> {
        Ok(Predicate::Configs(named_state(NamedKind::Mis, array)?.configs().collect()))
    }

    /// Either zigzag ordering.
    pub fn zigzag(array: &AtomArray) -> Result<Self> {
        Ok(Predicate::Configs(named_state(NamedKind::ZigzagMix, array)?.configs().collect()))
    }

    pub fn matches(&self, c: Config) -> bool {
        match self {
            Predicate::Configs(set) => set.contains(&c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub probability: f64,
    /// `sqrt(p̂ (1 − p̂) / shots)`.
    pub standard_error: f64,
    pub hits: usize,
    pub shots: usize,
    /// True when `p̂` is 0 or 1, where the binomial error formula gives zero.
    pub degenerate_error: bool,
}

pub fn estimate(shots: &ShotSet, predicate: &Predicate) -> Result<Estimate> {
    ensure!(!shots.is_empty(), InvalidArgument, "empty shot set");
    let hits = shots.shots.iter().filter(|&&c| predicate.matches(c)).count();
    let n = shots.len();
    let p = hits as f64 / n as f64;
    Ok(Estimate {
        probability: p,
        standard_error: (p * (1.0 - p) / n as f64).sqrt(),
        hits,
        shots: n,
        degenerate_error: hits == 0 || hits == n,
    })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n_atoms: usize,
    shots: usize,
    seed: Option<u64>,
    provenance: Provenance,
    array_hash: Option<String>,
    postselected: bool,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// One line of `0`/`1` per shot, atom 0 first, plus a JSON sidecar.
pub fn write_shots(path: &Path, shots: &ShotSet) -> Result<()> {
    let mut text = String::with_capacity(shots.len() * (shots.n_atoms + 1));
    for &c in &shots.shots {
        text.push_str(&config_to_string(c, shots.n_atoms));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    let side = Sidecar {
        n_atoms: shots.n_atoms,
        shots: shots.len(),
        seed: shots.seed,
        provenance: shots.provenance,
        array_hash: shots.array_hash.clone(),
        postselected: shots.postselected,
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Reads a shot file. Without a sidecar the data is treated as raw external
/// data of unknown seed.
pub fn read_shots(path: &Path) -> Result<ShotSet> {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let side_path = sidecar_path(path);
    let side: Option<Sidecar> =
        if side_path.exists() { Some(serde_json::from_str(&std::fs::read_to_string(side_path)?)?) } else { None };
    let n_atoms = match (&side, lines.first()) {
        (Some(s), _) => s.n_atoms,
        (None, Some(l)) => l.len(),
        (None, None) => return Err(Error::Parse("empty shot file without sidecar".into())),
    };
    let mut configs = Vec::with_capacity(lines.len());
    for (k, l) in lines.iter().enumerate() {
        ensure!(l.len() == n_atoms, Parse, "line {}: expected {n_atoms} characters, got {}", k + 1, l.len());
        configs.push(config_from_str(l)?);
    }
    let mut set = ShotSet::new(n_atoms, configs, None, Provenance::Raw)?;
    if let Some(s) = side {
        ensure!(s.shots == set.len(), Parse, "sidecar lists {} shots, file has {}", s.shots, set.len());
        set.seed = s.seed;
        set.provenance = s.provenance;
        set.array_hash = s.array_hash;
        set.postselected = s.postselected;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::model::*;
    use crate::C64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn chain_basis(l: usize) -> (AtomArray, Arc<BasisSet>) {
        let a = build_equilateral_doublet_chain(l, 5.5).unwrap();
        let g = blockade_graph(&a, &VdwCoupling::default(), 1.0).unwrap();
        (a, Arc::new(enumerate_basis(&g, Constraint::Blockade).unwrap()))
    }

    #[test]
    fn basis_state_samples_one_config() {
        let (a, b) = chain_basis(5);
        let mis = mis_config(&a).unwrap();
        let s = DenseState::basis_state(b, mis).unwrap();
        let shots = sample_dense(&s, 500, 3).unwrap();
        assert!(shots.shots().iter().all(|&c| c == mis));
        assert_eq!(shots.provenance(), Provenance::Raw);
    }

    #[test]
    fn two_config_state_is_balanced_and_reproducible() {
        let (a, b) = chain_basis(9);
        let z = named_state(NamedKind::Z, &a).unwrap().components[0].0;
        let zb = named_state(NamedKind::Zbar, &a).unwrap().components[0].0;
        let mut amps = vec![C64::new(0.0, 0.0); b.len()];
        amps[b.index_of(z).unwrap()] = C64::new(0.5f64.sqrt(), 0.0);
        amps[b.index_of(zb).unwrap()] = C64::new(0.0, 0.5f64.sqrt());
        let s = DenseState::new(b, amps).unwrap();
        let n = 10_000;
        let shots = sample_dense(&s, n, 11).unwrap();
        let k = shots.shots().iter().filter(|&&c| c == z).count();
        assert_eq!(k + shots.shots().iter().filter(|&&c| c == zb).count(), n);
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((k as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
        assert_eq!(shots, sample_dense(&s, n, 11).unwrap());
        assert_ne!(shots, sample_dense(&s, n, 12).unwrap());
    }

    #[test]
    fn channel_limits() {
        let shots = ShotSet::new(4, vec![0b1010, 0b0101, 0b1111], Some(0), Provenance::Raw).unwrap();
        assert_eq!(detection_channel(&shots, 0.0, 0.0, 1).unwrap().shots(), shots.shots());
        assert!(detection_channel(&shots, 1.0, 0.0, 1).unwrap().shots().iter().all(|&c| c == 0));
        let flipped = detection_channel(&shots, 1.0, 1.0, 1).unwrap();
        assert!(flipped.shots().iter().zip(shots.shots()).all(|(&o, &i)| o == !i & 0b1111));
        assert!(detection_channel(&shots, 1.1, 0.0, 1).is_err());
        assert!(detection_channel(&shots, 0.1, -0.1, 1).is_err());
        let noisy = detection_channel(&shots, 0.1, 0.1, 1).unwrap();
        assert_eq!(noisy.provenance(), Provenance::Noisy);
        assert!(detection_channel(&noisy, 0.1, 0.1, 1).is_err());
    }

    #[test]
    fn mis_readout_probability_matches_closed_form() {
        let (a, _) = chain_basis(15);
        let mis = mis_config(&a).unwrap();
        let n = 40_000;
        let shots = ShotSet::new(a.len(), vec![mis; n], Some(0), Provenance::Raw).unwrap();
        let noisy = detection_channel(&shots, 0.08, 0.01, 5).unwrap();
        let e = estimate(&noisy, &Predicate::mis(&a).unwrap()).unwrap();
        let exact = readout_fidelity(8, 14, 0.08, 0.01);
        assert!((exact - 0.92f64.powi(8) * 0.99f64.powi(14)).abs() < 1e-15);
        assert!((exact - 0.446).abs() < 1e-3);
        assert!((e.probability - exact).abs() < 5.0 * (exact * (1.0 - exact) / n as f64).sqrt());
        assert!((rydberg_detection_factor(8, 0.08) - 0.5132).abs() < 1e-4);
    }

    #[test]
    fn channel_is_exchangeable() {
        // flipping the order of the inputs leaves the output histogram statistically unchanged
        let base: Vec<Config> = (0..2000).map(|i| if i % 2 == 0 { 0b1111 } else { 0 }).collect();
        let fwd = ShotSet::new(4, base.clone(), None, Provenance::Raw).unwrap();
        let mut rev_in = base;
        rev_in.sort();
        let rev = ShotSet::new(4, rev_in, None, Provenance::Raw).unwrap();
        let ones = |s: &ShotSet| s.shots().iter().map(|c| c.count_ones() as f64).sum::<f64>();
        let (a, b) = (ones(&detection_channel(&fwd, 0.2, 0.1, 9).unwrap()), ones(&detection_channel(&rev, 0.2, 0.1, 9).unwrap()));
        // per atom variance ≤ 0.25, 8000 atoms per set
        let sigma = (2.0 * 8000.0 * 0.25f64).sqrt();
        assert!((a - b).abs() < 5.0 * sigma);
        assert!((a / 8000.0 - (0.5 * 0.8 + 0.5 * 0.1)).abs() < 0.03);
    }

    #[test]
    fn repair_examples() {
        let tri = BlockadeGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut seen = [0; 3];
        for seed in 0..200 {
            let c = postprocess_algorithm1(0b111, &tri, seed);
            assert_eq!(c.count_ones(), 1);
            seen[c.trailing_zeros() as usize] += 1;
        }
        assert!(seen.iter().all(|&k| k > 0));

        let (a, _) = chain_basis(3);
        let g = blockade_graph(&a, &VdwCoupling::default(), 1.0).unwrap();
        let mis = mis_config(&a).unwrap();
        assert_eq!(postprocess_algorithm1(mis, &g, 1), mis);
        let outs: Vec<Config> = (0..200).map(|s| postprocess_algorithm1(0, &g, s)).collect();
        assert!(outs.iter().all(|&c| g.is_maximal_independent(c)));
        assert!(outs.contains(&mis));
    }

    #[test]
    fn estimate_examples() {
        let p = Predicate::Configs(vec![1]);
        let all = ShotSet::new(2, vec![1; 10], None, Provenance::Raw).unwrap();
        let e = estimate(&all, &p).unwrap();
        assert_eq!((e.probability, e.standard_error, e.degenerate_error), (1.0, 0.0, true));
        let none = ShotSet::new(2, vec![0; 100], None, Provenance::Raw).unwrap();
        let e = estimate(&none, &p).unwrap();
        assert_eq!((e.probability, e.standard_error, e.degenerate_error), (0.0, 0.0, true));
        let half = ShotSet::new(2, (0..100).map(|i| (i % 2) as Config).collect(), None, Provenance::Raw).unwrap();
        let e = estimate(&half, &p).unwrap();
        assert_eq!(e.probability, 0.5);
        assert!((e.standard_error - 0.05).abs() < 1e-15);
        assert!(!e.degenerate_error);
        assert!(estimate(&ShotSet::new(2, vec![], None, Provenance::Raw).unwrap(), &p).is_err());
    }

    #[test]
    fn shot_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("sqs-shots-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let (a, b) = chain_basis(5);
        let s = DenseState::from_named(b, &named_state(NamedKind::Mis, &a).unwrap()).unwrap();
        let shots = sample_dense(&s, 20, 4).unwrap().with_array(&a).unwrap();
        let path = dir.join("shots.txt");
        write_shots(&path, &shots).unwrap();
        assert_eq!(read_shots(&path).unwrap(), shots);
        std::fs::remove_file(sidecar_path(&path)).unwrap();
        let ext = read_shots(&path).unwrap();
        assert_eq!(ext.shots(), shots.shots());
        assert_eq!(ext.seed(), None);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn shot_order_parameter_matches_state() {
        let (a, b) = chain_basis(9);
        let z = named_state(NamedKind::Z, &a).unwrap().components[0].0;
        let zb = named_state(NamedKind::Zbar, &a).unwrap().components[0].0;
        let mut amps = vec![C64::new(0.0, 0.0); b.len()];
        amps[b.index_of(z).unwrap()] = C64::new(0.8, 0.0);
        amps[b.index_of(zb).unwrap()] = C64::new(0.6, 0.0);
        let s = DenseState::new(b, amps).unwrap();
        let exact = crate::analysis::order_parameter(s.distribution(), &a).unwrap();
        let n = 100_000;
        let shots = sample_dense(&s, n, 2).unwrap();
        let est = crate::analysis::order_parameter(shots.distribution(), &a).unwrap();
        // O = 4 p (1 − p) for a two-state mixture; delta method gives |dO/dp| sqrt(p(1−p)/n)
        let p = 0.64;
        let se = 4.0 * (1.0 - 2.0 * p) * (p * (1.0 - p) / n as f64).sqrt();
        assert!((exact - 4.0 * p * (1.0 - p)).abs() < 1e-12);
        assert!((est - exact).abs() < 5.0 * se.abs());
    }

    fn brute_force_mis(g: &BlockadeGraph) -> u32 {
        let n = g.n_vertices();
        (0..1u128 << n).filter(|&c| g.is_independent(c)).map(|c| c.count_ones()).max().unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn repair_gives_maximal_independent_sets(
            n in 1usize..=14,
            edges in proptest::collection::vec((0usize..14, 0usize..14), 0..40),
            config in any::<u128>(),
            seed in any::<u64>(),
        ) {
            let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| a < n && b < n && a != b).collect();
            let g = BlockadeGraph::new(n, edges).unwrap();
            let c = postprocess_algorithm1(config & full_mask(n), &g, seed);
            prop_assert!(g.is_independent(c));
            // maximality against the definition: no vertex can be added
            for v in 0..n {
                if (c >> v) & 1 == 0 {
                    prop_assert!(!g.is_independent(c | (1u128 << v)));
                }
            }
            prop_assert!(c.count_ones() <= brute_force_mis(&g));
            prop_assert_eq!(c, postprocess_algorithm1(config & full_mask(n), &g, seed));
        }

        #[test]
        fn repair_fixes_maximal_sets(n in 1usize..=12, edges in proptest::collection::vec((0usize..12, 0usize..12), 0..30), seed in any::<u64>()) {
            let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| a < n && b < n && a != b).collect();
            let g = BlockadeGraph::new(n, edges).unwrap();
            let m = postprocess_algorithm1(0, &g, seed);
            prop_assert_eq!(postprocess_algorithm1(m, &g, seed.wrapping_add(1)), m);
        }
    }
}
