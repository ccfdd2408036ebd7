use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::mesh::Point;

pub type TensorFn = Arc<dyn Fn(&Point) -> Matrix2<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type RegionFn = Arc<dyn Fn(&Point) -> usize + Send + Sync>;

/// Diffusion tensor `K` and potential `V` with the bounds they must respect.
///
/// `region`, when present, labels the subdomains on which the data are
/// analytic; every cell must lie inside a single region.
#[derive(Clone)]
pub struct CoefficientField {
    diffusion: TensorFn,
    potential: Option<ScalarFn>,
    region: Option<RegionFn>,
    /// Bounds on the eigenvalues of `K`.
    pub k_bounds: (f64, f64),
    /// Bounds on `V`.
    pub v_bounds: (f64, f64),
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("k_bounds", &self.k_bounds)
            .field("v_bounds", &self.v_bounds)
            .field("potential", &self.potential.is_some())
            .field("regions", &self.region.is_some())
            .finish()
    }
}

/// Coefficient values at the quadrature points of one cell.
#[derive(Debug, Clone)]
pub struct SampledCoefficients {
    pub diffusion: Vec<Matrix2<f64>>,
    pub potential: Option<Vec<f64>>,
}

impl CoefficientField {
    pub fn new(
        diffusion: impl Fn(&Point) -> Matrix2<f64> + Send + Sync + 'static,
        k_bounds: (f64, f64),
    ) -> Result<Self> {
        if !(k_bounds.0 > 0.0 && k_bounds.0 <= k_bounds.1) {
            return Err(Error::argument("diffusion bounds must satisfy 0 < k_min <= k_max"));
        }
        Ok(CoefficientField {
            diffusion: Arc::new(diffusion),
            potential: None,
            region: None,
            k_bounds,
            v_bounds: (0.0, 0.0),
        })
    }

    /// `K = k I`, no potential.
    pub fn isotropic(k: f64) -> Result<Self> {
        Self::new(move |_| Matrix2::identity() * k, (k, k))
    }

    pub fn laplace() -> Self {
        Self::isotropic(1.0).expect("unit diffusion is valid")
    }

    pub fn with_potential(
        mut self,
        potential: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        v_bounds: (f64, f64),
    ) -> Result<Self> {
        if !(v_bounds.0 >= 0.0 && v_bounds.0 <= v_bounds.1) {
            return Err(Error::argument("potential bounds must satisfy 0 <= v_min <= v_max"));
        }
        self.potential = Some(Arc::new(potential));
        self.v_bounds = v_bounds;
        Ok(self)
    }

    pub fn with_regions(mut self, region: impl Fn(&Point) -> usize + Send + Sync + 'static) -> Self {
        self.region = Some(Arc::new(region));
        self
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    pub fn diffusion_at(&self, p: &Point) -> Matrix2<f64> {
        (self.diffusion)(p)
    }

    pub fn potential_at(&self, p: &Point) -> f64 {
        self.potential.as_ref().map_or(0.0, |v| v(p))
    }

    /// Evaluates and bound-checks both coefficients at `points` of `cell`.
    pub fn sample(&self, cell: usize, points: &[Point]) -> Result<SampledCoefficients> {
        let fail = |reason: String| Error::Coefficient { cell, reason };
        if let Some(region) = &self.region {
            if let Some(first) = points.first() {
                let r0 = region(first);
                if points.iter().any(|p| region(p) != r0) {
                    return Err(fail("cell straddles a coefficient discontinuity".into()));
                }
            }
        }
        let (kl, ku) = self.k_bounds;
        let tol = 1e-12;
        let mut diffusion = Vec::with_capacity(points.len());
        for p in points {
            let k = (self.diffusion)(p);
            if k.iter().any(|v| !v.is_finite()) {
                return Err(fail(format!("non-finite diffusion at ({}, {})", p.x, p.y)));
            }
            let scale = k.amax().max(f64::MIN_POSITIVE);
            if (k[(0, 1)] - k[(1, 0)]).abs() > tol * scale {
                return Err(fail("diffusion tensor is not symmetric".into()));
            }
            let ev = k.symmetric_eigenvalues();
            if ev.min() < kl * (1.0 - tol) || ev.max() > ku * (1.0 + tol) {
                return Err(fail(format!(
                    "diffusion eigenvalues [{:e}, {:e}] outside [{kl:e}, {ku:e}]",
                    ev.min(),
                    ev.max()
                )));
            }
            diffusion.push(k);
        }
        let potential = match &self.potential {
            None => None,
            Some(v) => {
                let (vl, vu) = self.v_bounds;
                let mut out = Vec::with_capacity(points.len());
                for p in points {
                    let x = v(p);
                    if !x.is_finite() || x < vl - tol * vu.abs() || x > vu + tol * vu.abs() {
                        return Err(fail(format!("potential {x:e} outside [{vl:e}, {vu:e}]")));
                    }
                    out.push(x);
                }
                Some(out)
            }
        };
        Ok(SampledCoefficients { diffusion, potential })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_samples_identity() {
        let s = CoefficientField::laplace().sample(0, &[Point::new(0.2, 0.3)]).unwrap();
        assert_eq!(s.diffusion[0], Matrix2::identity());
        assert!(s.potential.is_none());
    }

    #[test]
    fn bounds_are_enforced() {
        let c = CoefficientField::new(|p| Matrix2::identity() * (1.0 + p.x), (1.0, 2.0)).unwrap();
        assert!(c.sample(3, &[Point::new(0.5, 0.0)]).is_ok());
        let err = c.sample(3, &[Point::new(1.5, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Coefficient { cell: 3, .. }));

        let v = CoefficientField::laplace().with_potential(|p| p.x, (0.0, 1.0)).unwrap();
        assert!(v.sample(0, &[Point::new(-0.1, 0.0)]).is_err());
    }

    #[test]
    fn straddling_cells_are_rejected() {
        let c = CoefficientField::laplace().with_regions(|p| (p.x > 0.0) as usize);
        assert!(c.sample(0, &[Point::new(0.1, 0.0), Point::new(0.2, 0.0)]).is_ok());
        assert!(c.sample(0, &[Point::new(-0.1, 0.0), Point::new(0.2, 0.0)]).is_err());
    }

    #[test]
    fn nonsymmetric_tensor_is_rejected() {
        let c = CoefficientField::new(|_| Matrix2::new(1.0, 0.1, 0.0, 1.0), (0.5, 2.0)).unwrap();
        assert!(c.sample(0, &[Point::origin()]).is_err());
    }
}
