use goldenrate_core::params::{ModelKind, ModelParams};
use goldenrate_core::stochastic::{
    aggregate, build_channels, sample_trajectory, EnsembleStats, JumpMicrostate, StochasticError,
};
use rayon::prelude::*;

/// Per-trajectory samples, produced in parallel but returned in trajectory order.
pub fn parallel_samples(
    kind: ModelKind,
    p: &ModelParams,
    s0: JumpMicrostate,
    times: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<Vec<Vec<JumpMicrostate>>, StochasticError> {
    if n_traj == 0 {
        return Err(StochasticError::EmptyEnsemble);
    }
    let channels = build_channels(kind, p);
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| sample_trajectory(kind, p, &channels, s0, times, seed, i))
        .collect()
}

/// Same result as [`goldenrate_core::stochastic::ensemble_mean`], bit for bit.
pub fn parallel_ensemble(
    kind: ModelKind,
    p: &ModelParams,
    s0: JumpMicrostate,
    times: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<EnsembleStats, StochasticError> {
    aggregate(kind, p, times, &parallel_samples(kind, p, s0, times, n_traj, seed)?)
}
