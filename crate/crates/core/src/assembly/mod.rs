//! Global DOF numbering and sparse assembly.

pub mod assemble;
pub mod coefficients;
pub mod dofmap;
pub mod sparse;

pub use assemble::{assemble, assemble_with, build_element, AssemblyOptions, SystemMatrices, DEFAULT_QUAD_EXTRA};
pub use coefficients::{CoefficientField, SampledCoefficients};
pub use dofmap::{build_dof_map, BoundaryCondition, GlobalDofMap};
pub use sparse::CsrMatrix;
