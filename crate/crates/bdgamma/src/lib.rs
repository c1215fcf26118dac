//! Exact-arithmetic workbench for finite stages of the Bourgain-Delbaen
//! construction behind the Argyros-Haydon space, the special index
//! subset Γ′ spanning its distinguished subspace, and the symbolic
//! algebra of operators on the associated direct sum.
//!
//! Everything is computed over arbitrary-precision rationals: dual
//! bases, projection and extension operators, net certificates, block
//! sequences and their certificates, ideal lattices, and the exact
//! simplex kernel backing every sup-norm and distance on a subspace.
//!
//! Each major capability has a runnable demonstration under
//! `examples/`; the thin `bdgamma` binary drives builds, verification
//! suites, exports and statistics from a config file.

pub mod scalar;
pub mod sparse;
pub mod matrix;
pub mod lp;
pub mod norms;
pub mod params;
pub mod space;
pub mod builder;
pub mod fdd;

pub use params::{Beta0Choice, Mode, NetPolicy, Params};
pub use scalar::Scalar;
pub use space::Space;
pub use sparse::{ElemId, SparseFunctional, SparsePoint, SparseVec};
