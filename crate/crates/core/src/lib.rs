//! Quantum-inspired discrete optimization over binary vectors.
//!
//! The crate covers the whole path from property data to optimized bit
//! patterns:
//!
//! - [`problem`]: Ising and QUBO models, energies, QUBO→Ising compilation,
//!   the exhaustive oracle and the MAX-CUT mapping.
//! - [`bsb`]: ballistic simulated bifurcation.
//! - [`baseline`]: simulated annealing and random search.
//! - [`fm`]: the factorization surrogate and its compilation to a QUBO.
//! - [`relax`]: the spike-and-exponential relaxation of binary variables.
//! - [`rbm`]: restricted Boltzmann machines.
//! - [`pipeline`]: fit, compile, solve and rank.

pub mod baseline;
pub mod bsb;
pub mod error;
pub mod fm;
pub mod format;
pub mod pipeline;
pub mod problem;
pub mod rbm;
pub mod relax;
pub mod rng;

pub use baseline::{random_search, sa_solve, SaParams};
pub use bsb::{bsb_solve, bsb_step, linear_schedule, BsbParams, BsbState, CouplingScale};
pub use error::{Error, ErrorKind, Result};
pub use fm::{fm_fit, fm_predict, fm_to_qubo, FactorModel, FitParams, PropertyDataset, TargetTransform};
pub use pipeline::{
    fit_surrogate, optimize_property, scalarize, synthetic_oracle, Candidate, OracleKind, PipelineConfig,
    RankedCandidates, RbmFilter,
};
pub use problem::{
    bits_to_spins, brute_force_ground_state, ising_energy, maxcut_to_ising, qubo_to_ising,
    qubo_value, spins_to_bits, BinaryVector, Config, Direction, IsingProblem, Problem,
    QuboProblem, Solution, SpinConfig,
};
pub use rbm::{cd_update, exact_distribution, gibbs_step, rbm_energy, rbm_sample, RbmModel};
pub use relax::{
    binarize, inverse_cdf_sample, reparam_grad, reparam_sample, spike_exp_cdf, RelaxationParams,
};
