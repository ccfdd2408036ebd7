//! Polynomial spaces and quadrature on polygonal cells.

pub mod basis;
pub mod quadrature;

pub use basis::{
    dim, dim_signed, exponents, gram_deviation, normalized_condition, orthonormalize, weighted_gram, MonomialBasis,
    OrthoBasis, CONDITION_LIMIT,
};
pub use quadrature::{
    gauss_legendre, gauss_lobatto, legendre, polygon_quadrature, triangle_rule, EdgeNodes, QuadratureRule,
};
