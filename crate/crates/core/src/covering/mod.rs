//! Covering-space constructions: circle-valued path lifting, the universal
//! cover of `SL(2, ℝ)` realized through the phase of the orthogonal polar
//! factor, and exact integer linear algebra for splitting abelian groups.

mod lift;
mod sl2;
mod snf;

pub use lift::{angle_step, chi, lift_path, pullback_member, CirclePath, PREIMAGE_SEPARATION};
pub use sl2::{
    canonical_path, conjugated_rotation_loop, contractible_loop, cover_multiply, psi_angle,
    rotation_loop, winding_number, CoverElement, COVER_TOL,
};
pub use snf::{
    extend_lattice_basis, integer_determinant, smith_normal_form, split_abelian, AbelianSplit,
    IntMatrix, SnfResult,
};
