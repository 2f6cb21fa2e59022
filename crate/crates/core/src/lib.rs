//! Simulation toolkit for preparing maximum-independent-set states in Rydberg
//! atom arrays with sweep-quench-sweep detuning schedules.
//!
//! Units: lengths in µm, energies in units of Ω, times in units of 2π/Ω.
//! A sweep rate of `r` (in units of Ω²/2π) is therefore a slope `dΔ/dt = r`.

pub mod analysis;
pub mod dyn_dense;
pub mod dyn_mps;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod schedule;
pub mod spectra;

/// Occupation bitstring: bit `i` set means atom `i` is in the Rydberg state.
pub type Config = u128;
pub const MAX_ATOMS: usize = 128;

pub use num_complex::Complex64 as C64;

pub use error::{Error, ErrorKind, Result};
pub use geometry::{
    blockade_graph, build_2d_doublet_grid, build_doublet_chain, build_enhanced_rabi_chain,
    build_equilateral_doublet_chain, build_zigzag_chain, interaction_matrix, Atom, AtomArray, AtomKind,
    BlockadeGraph, InteractionMatrix, Layout, Truncation, VdwCoupling,
};

/// Renders `config` as `n` characters of 0/1 in atom order (atom 0 first).
pub fn config_to_string(config: Config, n: usize) -> String {
    (0..n).map(|i| if (config >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn config_from_str(text: &str) -> Result<Config> {
    let text = text.trim();
    if text.len() > MAX_ATOMS {
        return Err(Error::Parse(format!("bitstring longer than {MAX_ATOMS}")));
    }
    text.chars().enumerate().try_fold(0, |acc, (i, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        other => Err(Error::Parse(format!("unexpected character {other:?} in bitstring"))),
    })
}
