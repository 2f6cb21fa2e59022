//! Turns a resolved config into arrays, Hamiltonians and trajectories.

use std::sync::Arc;

use anyhow::Result;
use sqs_core::dyn_dense::{self, DenseState, InitialMode, Method, ObservableSpec, Tolerances, Trajectory};
use sqs_core::dyn_mps::{self, ImaginaryTimeParams, MpsModel, MpsState, TruncationParams};
use sqs_core::measure::{self, ShotSet};
use sqs_core::model::{enumerate_basis, Constraint, HamiltonianOperator};
use sqs_core::schedule::{self, Control, Resume, SqsParams};
use sqs_core::{
    blockade_graph, build_2d_doublet_grid, build_doublet_chain, build_enhanced_rabi_chain, build_equilateral_doublet_chain,
    build_zigzag_chain, interaction_matrix, AtomArray, BlockadeGraph, InteractionMatrix, Layout, Truncation, VdwCoupling,
};

use crate::config::*;

/// Largest blockade-space dimension for which an MPS run seeds its initial
/// state from an exact dense ground state instead of imaginary time.
const DENSE_SEED_LIMIT: usize = 50_000;

pub fn build_array(g: &GeometryConfig) -> Result<AtomArray> {
    let array = match g.builder {
        Builder::DoubletChain => match (g.spacing_x, g.spacing_y) {
            (None, None) => build_equilateral_doublet_chain(g.sites, g.spacing)?,
            (sx, sy) => build_doublet_chain(g.sites, sx.unwrap_or(g.spacing * 3f64.sqrt()), sy.unwrap_or(g.spacing))?,
        },
        Builder::Grid => build_2d_doublet_grid(g.rows, g.cols, g.grid_spacing, g.doublet_separation)?,
        Builder::Zigzag => build_zigzag_chain(g.sites, g.spacing, g.offset)?,
        Builder::EnhancedRabi => build_enhanced_rabi_chain(g.sites, g.spacing, g.rabi_factor)?,
        Builder::File => {
            let path = g.path.as_deref().expect("validated");
            AtomArray::from_json(&std::fs::read_to_string(path)?)?
        }
    };
    Ok(array)
}

fn is_chain(array: &AtomArray) -> bool {
    matches!(array.layout(), Layout::DoubletChain { .. } | Layout::Chain { .. })
}

/// Array, blockade graph and interactions for one geometry.
pub struct System {
    pub array: AtomArray,
    pub graph: BlockadeGraph,
    pub interactions: InteractionMatrix,
    pub constraint: Constraint,
}

impl System {
    pub fn new(cfg: &ExperimentConfig, array: AtomArray) -> Result<Self> {
        let ic = &cfg.interaction;
        let coupling = match (ic.c6, ic.calibration) {
            (Some(c6), _) => VdwCoupling::from_c6(c6)?,
            (None, Some(c)) => VdwCoupling::calibrated(c.energy, c.distance)?,
            (None, None) => VdwCoupling::default(),
        };
        let chain = is_chain(&array);
        let truncation = match ic.truncation {
            TruncationChoice::Auto if chain => Truncation::Nnn,
            TruncationChoice::Auto | TruncationChoice::Full => Truncation::Full,
            TruncationChoice::Nn => Truncation::Nn,
            TruncationChoice::Nnn => Truncation::Nnn,
        };
        let constraint = match ic.constraint {
            ConstraintChoice::Auto if chain => Constraint::Blockade,
            ConstraintChoice::Auto | ConstraintChoice::Full => Constraint::Full,
            ConstraintChoice::Blockade => Constraint::Blockade,
        };
        let graph = blockade_graph(&array, &coupling, 1.0)?;
        let interactions = interaction_matrix(&array, &coupling, truncation)?;
        Ok(System { array, graph, interactions, constraint })
    }

    /// Graph used to build the basis: the blockade graph when constrained,
    /// otherwise an edgeless graph so every configuration is kept.
    fn basis_graph(&self) -> Result<BlockadeGraph> {
        Ok(match self.constraint {
            Constraint::Blockade => self.graph.clone(),
            Constraint::Full => BlockadeGraph::empty(self.array.len())?,
        })
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianOperator> {
        let basis = Arc::new(enumerate_basis(&self.basis_graph()?, self.constraint)?);
        Ok(HamiltonianOperator::build(&self.array, basis, &self.interactions)?)
    }

    pub fn mps_model(&self) -> Result<MpsModel> {
        Ok(MpsModel::new(&self.array, &self.graph, &self.interactions, self.constraint)?)
    }
}

pub fn waveform(cfg: &ExperimentConfig, t_q: Option<f64>) -> Result<Box<dyn Control>> {
    let s = &cfg.schedule;
    let w = match s.kind {
        ScheduleKind::Sqs => SqsParams {
            delta_start: s.delta_start,
            delta_end: s.delta_end,
            rate: s.rate,
            delta_i: s.delta_i,
            delta_q: s.delta_q,
            t_q: t_q.unwrap_or(s.t_q),
            resume: match s.resume {
                ResumeChoice::Initial => Resume::AtInitial,
                ResumeChoice::Quench => Resume::AtQuench,
            },
        }
        .build()?,
        ScheduleKind::Linear => schedule::linear_sweep(s.delta_start, s.delta_end, s.rate)?,
    };
    let (tau, shift) = cfg.response();
    if tau > 0.0 || shift > 0.0 {
        Ok(Box::new(schedule::response_filter(&w, tau, shift)?))
    } else {
        Ok(Box::new(w))
    }
}

pub fn observables(cfg: &ExperimentConfig, array: &AtomArray, stride: usize) -> Result<ObservableSpec> {
    let spec = ObservableSpec::for_array(array, stride)?;
    Ok(if cfg.engine.cuts.is_empty() { spec } else { spec.with_cuts(array, &cfg.engine.cuts)? })
}

pub enum FinalState {
    Dense(DenseState),
    Mps(MpsState),
}

impl FinalState {
    pub fn sample(&mut self, shots: usize, seed: u64) -> Result<ShotSet> {
        Ok(match self {
            FinalState::Dense(s) => measure::sample_dense(s, shots, seed)?,
            FinalState::Mps(m) => dyn_mps::mps_sample(m, shots, seed)?,
        })
    }
}

pub fn truncation(cfg: &ExperimentConfig) -> TruncationParams {
    TruncationParams { chi_max: cfg.engine.chi_max, cutoff: cfg.engine.cutoff }
}

/// Runs one trajectory with the configured engine. The dense engine reuses
/// `h` when given.
pub fn run(
    cfg: &ExperimentConfig,
    sys: &System,
    h: Option<&HamiltonianOperator>,
    control: &dyn Control,
    spec: &ObservableSpec,
) -> Result<(Trajectory, FinalState)> {
    let e = &cfg.engine;
    let initial = match e.initial {
        InitialChoice::ExactGround => InitialMode::ExactGround,
        InitialChoice::AllGround => InitialMode::AllGround,
    };
    match e.kind {
        EngineKind::Dense => {
            let owned;
            let h = match h {
                Some(h) => h,
                None => {
                    owned = sys.hamiltonian()?;
                    &owned
                }
            };
            let method = match e.method {
                MethodChoice::Krylov => Method::Krylov,
                MethodChoice::Rk4 => Method::Rk4,
            };
            let tol = Tolerances { krylov_tol: e.krylov_tol, ..Tolerances::default() };
            let mut psi = dyn_dense::initial_state(h, control, initial)?;
            let traj = dyn_dense::evolve_with(&mut psi, h, control, e.n_steps, method, spec, &tol)?;
            Ok((traj, FinalState::Dense(psi)))
        }
        EngineKind::Mps => {
            let model = sys.mps_model()?;
            let trunc = truncation(cfg);
            let mut mps = match initial {
                InitialMode::AllGround => dyn_mps::mps_from_product(model.cells(), 0)?,
                InitialMode::ExactGround => {
                    let (omega, delta) = control.value(0.0);
                    let small = sys.constraint == Constraint::Blockade
                        && sqs_core::spectra::count_independent_sets(&sys.graph, full_mask(sys.array.len()))
                            .is_ok_and(|n| n <= DENSE_SEED_LIMIT as u128);
                    if small {
                        let h = sys.hamiltonian()?;
                        let psi = dyn_dense::ground_state(&h, omega, delta)?;
                        dyn_mps::mps_from_dense(model.cells(), &psi, &TruncationParams::uncapped(trunc.cutoff))?
                    } else {
                        dyn_mps::imaginary_time_ground(&model, 0, omega, delta, &trunc, &ImaginaryTimeParams::default())?.0
                    }
                }
            };
            let traj = dyn_mps::tebd_evolve(&mut mps, &model, control, e.n_steps, &trunc, spec)?;
            Ok((traj, FinalState::Mps(mps)))
        }
    }
}

pub fn full_mask(n: usize) -> sqs_core::Config {
    if n >= 128 {
        sqs_core::Config::MAX
    } else {
        (1 << n) - 1
    }
}
