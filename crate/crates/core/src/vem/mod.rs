//! Local enhanced virtual element space on a single polygon.

pub mod dofs;
pub mod element;
pub mod local;

pub use dofs::{Dof, DofLayout};
pub use element::{EdgeGeometry, LocalElement, ProjectorSet};
pub use local::{local_matrices, local_matrices_with, stab_s0, stab_s1, LocalMatrices, S0Kind, S1Kind, StabChoice};
