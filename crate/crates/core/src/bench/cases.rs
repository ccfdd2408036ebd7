use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;

use crate::assembly::{BoundaryCondition, CoefficientField};
use crate::error::{Error, Result};
use crate::mesh::{DomainTag, GradedDomain, Point, Rectangle};

/// The four benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestCase {
    /// Laplace on `(0,1)²`, Dirichlet.
    SquareLaplace,
    /// `K = I/2`, `V = |x|²/2` on `(−10,10)²`, Dirichlet.
    Oscillator,
    /// Laplace on the L-shape, Neumann.
    LShape,
    /// `K = ρ I` on `(−1,1)²` with `ρ = eps` on the first and third quadrants, Neumann.
    Checkerboard { eps: f64 },
}

impl TestCase {
    pub fn id(&self) -> &'static str {
        match self {
            TestCase::SquareLaplace => "tc1_square_laplace",
            TestCase::Oscillator => "tc2_oscillator",
            TestCase::LShape => "tc3_lshape",
            TestCase::Checkerboard { .. } => "tc4_checkerboard",
        }
    }

    pub fn domain(&self) -> DomainTag {
        match self {
            TestCase::SquareLaplace => DomainTag::UnitSquare,
            TestCase::Oscillator => DomainTag::OscillatorSquare,
            TestCase::LShape => DomainTag::LShape,
            TestCase::Checkerboard { .. } => DomainTag::Checkerboard,
        }
    }

    /// Bounding rectangle; the whole domain except for the L-shape.
    pub fn rectangle(&self) -> Rectangle {
        match self {
            TestCase::SquareLaplace => Rectangle::unit(),
            TestCase::Oscillator => Rectangle::square(10.0),
            TestCase::LShape | TestCase::Checkerboard { .. } => Rectangle::square(1.0),
        }
    }

    pub fn graded_domain(&self) -> Option<GradedDomain> {
        match self {
            TestCase::LShape => Some(GradedDomain::LShape),
            TestCase::Checkerboard { .. } => Some(GradedDomain::Checkerboard),
            _ => None,
        }
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        match self {
            TestCase::SquareLaplace | TestCase::Oscillator => BoundaryCondition::DirichletZero,
            TestCase::LShape | TestCase::Checkerboard { .. } => BoundaryCondition::Neumann,
        }
    }

    pub fn coefficients(&self) -> Result<CoefficientField> {
        match *self {
            TestCase::SquareLaplace | TestCase::LShape => Ok(CoefficientField::laplace()),
            TestCase::Oscillator => {
                // V = r²/2 peaks at the corners of the square
                CoefficientField::isotropic(0.5)?
                    .with_potential(|p: &Point| 0.5 * (p.x * p.x + p.y * p.y), (0.0, 100.0))
            }
            TestCase::Checkerboard { eps } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::argument(format!(
                        "checkerboard parameter {eps} must be positive"
                    )));
                }
                let rho = move |p: &Point| if p.x * p.y > 0.0 { eps } else { 1.0 };
                let field = CoefficientField::new(move |p| Matrix2::identity() * rho(p), (eps.min(1.0), eps.max(1.0)))?;
                Ok(field.with_regions(|p: &Point| usize::from(p.x > 0.0) + 2 * usize::from(p.y > 0.0)))
            }
        }
    }

    /// Name of the shipped reference file, for cases without a formula.
    pub fn reference_file_name(&self) -> Option<String> {
        match self {
            TestCase::LShape => Some("tc3_lshape.txt".into()),
            TestCase::Checkerboard { eps } => Some(format!("tc4_checkerboard_eps{eps:e}.txt")),
            _ => None,
        }
    }

    /// Parses an id with the checkerboard parameter given separately.
    pub fn parse_with_eps(s: &str, eps: Option<f64>) -> Result<Self> {
        let case: TestCase = s.parse()?;
        Ok(match (case, eps) {
            (TestCase::Checkerboard { .. }, Some(eps)) => TestCase::Checkerboard { eps },
            (TestCase::Checkerboard { .. }, None) => case,
            (_, Some(_)) => return Err(Error::argument("--eps only applies to the checkerboard case")),
            (c, None) => c,
        })
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestCase::Checkerboard { eps } => write!(f, "{}(eps={eps:e})", self.id()),
            _ => f.write_str(self.id()),
        }
    }
}

impl FromStr for TestCase {
    type Err = Error;

    /// Accepts the full id or its `tcN` prefix; the checkerboard defaults to `eps = 2`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tc1" | "tc1_square_laplace" => Ok(TestCase::SquareLaplace),
            "tc2" | "tc2_oscillator" => Ok(TestCase::Oscillator),
            "tc3" | "tc3_lshape" => Ok(TestCase::LShape),
            "tc4" | "tc4_checkerboard" => Ok(TestCase::Checkerboard { eps: 2.0 }),
            _ => Err(Error::argument(format!("unknown test case '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_names() {
        assert_eq!("tc3".parse::<TestCase>().unwrap(), TestCase::LShape);
        assert_eq!(
            TestCase::parse_with_eps("tc4", Some(1e8)).unwrap(),
            TestCase::Checkerboard { eps: 1e8 }
        );
        assert!(TestCase::parse_with_eps("tc1", Some(2.0)).is_err());
        assert!("tc9".parse::<TestCase>().is_err());
        assert_eq!(
            TestCase::Checkerboard { eps: 1e8 }.reference_file_name().unwrap(),
            "tc4_checkerboard_eps1e8.txt"
        );
    }

    #[test]
    fn checkerboard_coefficient() {
        let c = TestCase::Checkerboard { eps: 5.0 }.coefficients().unwrap();
        assert_eq!(c.diffusion_at(&Point::new(0.5, 0.5))[(0, 0)], 5.0);
        assert_eq!(c.diffusion_at(&Point::new(-0.5, -0.5))[(1, 1)], 5.0);
        assert_eq!(c.diffusion_at(&Point::new(-0.5, 0.5))[(0, 0)], 1.0);
        assert!(TestCase::Checkerboard { eps: -1.0 }.coefficients().is_err());
    }
}
