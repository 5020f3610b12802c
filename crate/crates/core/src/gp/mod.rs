//! Finite-particle checks of the Gross-Pitaevskii hierarchies: density
//! kernels, contractions, trace functionals and the symmetric rank-one
//! decomposition of symmetric tensors.

mod energy;
mod kernel;
mod residual;
mod tensor;

pub use energy::{factorized_energy, mixed_energy, w3_spot_check, w4_spot_check, SpotCheck, ENERGY_TOL};
pub use kernel::{factorized_kernel, kernel_grid, Axis, DensityKernel, MAX_PARTICLES, SUBGRID_POINTS};
pub use residual::{gp3_residual, gp3_residual_kernel, gp4_residual, gp4_residual_kernel, xhn_factorized_residual};
pub use tensor::{
    reconstruct, sym_rank1_decompose, sym_rank1_decompose_seeded, symmetrize, Rank1Term, SymTensor,
    CONDITION_LIMIT, MAX_ENTRIES, RESEEDS,
};
