//! Commutative case: finite metric spaces, colored covers, partitions of
//! unity, the cover triple for C(X) and its contractive correction.

pub mod approx;
pub mod cover;
pub mod space;

pub use approx::{
    build_commutative_triple, build_pou, contractify, function_matrix, oscillation, oscillation_bound, Contractified,
    PartitionOfUnity,
};
pub use cover::{
    arc_sets, brick_sets, cube_family_sets, greedy_color, interval_sets, stride_for_mesh, ColoredCover, CoverSpec,
};
pub use space::{DistSpec, FinSpace, SpaceSpec};

use serde::{Deserialize, Serialize};

/// Space plus cover, the JSON input of the commutative experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceCoverSpec {
    pub space: SpaceSpec,
    pub cover: CoverSpec,
}

impl SpaceCoverSpec {
    pub fn build(&self) -> crate::Result<(FinSpace, ColoredCover)> {
        let space = self.space.build()?;
        let cover = self.cover.build(&space)?;
        Ok((space, cover))
    }
}
