//! p- and hp-version virtual element discretization of elliptic eigenvalue
//! problems `-div(K ∇u) + V u = λ u` on polygonal meshes.

pub mod assembly;
pub mod bench;
pub mod eigen;
pub mod error;
pub mod hp;
pub mod mesh;
pub mod polyspace;
pub mod vem;

pub use error::{Error, Result};
