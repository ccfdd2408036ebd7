use std::fmt;

use super::study::{Abscissa, ConvergenceRecord};
use crate::error::{Error, Result};

/// Errors below this are dominated by solver tolerance and round-off.
pub const ERROR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `err ≈ C x^rate`
    Algebraic,
    /// `err ≈ C exp(−rate x)`
    Exponential,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Algebraic => "algebraic",
            FitModel::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub eig_index: usize,
    pub model: FitModel,
    /// Least-squares slope of `ln err` against `ln x` or `x`.
    pub slope: f64,
    pub intercept: f64,
    /// Algebraic: the slope; exponential: `b = −slope`.
    pub rate: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares fit of one error series; points under [`ERROR_FLOOR`] are dropped.
pub fn fit_series(x: &[f64], err: &[f64], model: FitModel) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(err)
        .filter(|(_, &e)| e >= ERROR_FLOOR && e.is_finite())
        .map(|(&x, &e)| {
            let u = match model {
                FitModel::Algebraic => x.ln(),
                FitModel::Exponential => x,
            };
            (u, e.ln())
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::argument("rate fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // a constant series is fitted exactly
    let r_squared = if syy <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    let slope = if syy == 0.0 { 0.0 } else { slope };
    Ok(Fit {
        eig_index: 0,
        model,
        slope,
        intercept,
        rate: match model {
            FitModel::Algebraic => slope,
            FitModel::Exponential => -slope,
        },
        r_squared,
        n_points: pts.len(),
    })
}

/// One fit per tracked eigenvalue.
pub fn fit_rates(records: &[ConvergenceRecord], abscissa: Abscissa, model: FitModel) -> Result<Vec<Fit>> {
    let Some(first) = records.first() else {
        return Err(Error::Fit(0));
    };
    let x: Vec<f64> = records.iter().map(|r| abscissa.value(r.dofs, r.h)).collect();
    first
        .errors
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let err: Vec<f64> = records
                .iter()
                .map(|r| r.errors.get(k).map_or(f64::NAN, |e| e.rel_error))
                .collect();
            let mut fit = fit_series(&x, &err, model)?;
            fit.eig_index = e.index;
            Ok(fit)
        })
        .collect()
}
