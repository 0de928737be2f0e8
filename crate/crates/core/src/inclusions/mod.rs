//! Finite-dimensional inclusions `N ⊆ M`, their GNS spaces and basic constructions.

mod algebra;
mod blocks;
mod dye;
pub mod groups;
mod inclusion;
mod pimsner_popa;
mod quadrilateral;
mod tower;

use thiserror::Error;

use crate::scalars::{QuadraticNumber, ScalarError};

pub use algebra::StarAlgebra;
pub use blocks::{split_projections, BlockStructure, Block};
pub use dye::{dye_unitary, DyeResult};
pub use groups::{Perm, PermGroup};
pub use inclusion::{build_group_inclusion, build_matrix_inclusion, build_tensor_inclusion, Inclusion, MarkovData};
pub use pimsner_popa::{pimsner_popa_basis, PimsnerPopaBasis};
pub use quadrilateral::{
    comultiply_model, fourier_phi, landau_check, subspace_projection, tl_overlap, vanishing_check, FourierModel,
    LandauCheck, OverlapEntry, Quadrilateral,
};
pub use tower::{
    basic_construction, lambda_index, relative_commutant, tower_step, BasicConstruction, Gns, TowerStep,
};
pub use inclusion::{GroupData, TraceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InclusionError {
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("embedding is not unital")]
    NotUnital,
    #[error("generators are not closed under *: {0}")]
    NotStarClosed(String),
    #[error("disconnected inclusion without an explicit trace")]
    Disconnected,
    #[error("Markov condition fails: {0}")]
    NotMarkov(String),
    #[error("element is not in the algebra: {0}")]
    NotInAlgebra(String),
    #[error("not an intermediate subalgebra: {0}")]
    NotIntermediate(String),
    #[error("rank obstruction: {0}")]
    RankObstruction(String),
    #[error("exact arithmetic unavailable: {0}")]
    ExactUnavailable(String),
    #[error("square root of {0} is outside the current field")]
    NeedsSqrt(QuadraticNumber),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

impl InclusionError {
    /// Infeasibility in the sense of the CLI exit codes.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            InclusionError::RankObstruction(_) | InclusionError::NotMarkov(_) | InclusionError::Disconnected
        )
    }
}
