use crate::error::{Error, Result};

/// A maximal run of computed eigenvalues with small relative gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Index of the first member in the computed list.
    pub start: usize,
    pub values: Vec<f64>,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.values.len()
    }
}

/// Distinct reference values paired in order with clusters of computed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub references: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// `min |λ − λ_ref| / |λ_ref|` over each cluster.
    pub errors: Vec<f64>,
}

impl Pairing {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::multiplicity).collect()
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (b - a).abs() / scale
    }
}

/// Splits an ascending list into maximal runs whose consecutive relative
/// gaps are at most `tol`.
pub fn clusters(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if rel_gap(*c.values.last().unwrap(), v) <= tol => c.values.push(v),
            _ => out.push(Cluster {
                start: i,
                values: vec![v],
            }),
        }
    }
    out
}

/// Pairs the distinct values of `reference` with the clusters of `computed`
/// in order. Both lists must be ascending.
pub fn match_eigenvalues(computed: &[f64], reference: &[f64], cluster_rel_tol: f64) -> Result<Pairing> {
    let ascending = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
    if !ascending(computed) || !ascending(reference) {
        return Err(Error::argument("eigenvalue lists must be ascending"));
    }
    if !(cluster_rel_tol >= 0.0) {
        return Err(Error::argument("cluster tolerance must be non-negative"));
    }
    let references: Vec<f64> = clusters(reference, cluster_rel_tol)
        .into_iter()
        .map(|c| c.values[0])
        .collect();
    let found = clusters(computed, cluster_rel_tol);
    if computed.len() < reference.len() || found.len() < references.len() {
        return Err(Error::Coverage {
            computed: computed.len().min(found.len()),
            required: references.len(),
        });
    }
    let clusters: Vec<Cluster> = found.into_iter().take(references.len()).collect();
    let errors = references
        .iter()
        .zip(&clusters)
        .map(|(&r, c)| {
            c.values
                .iter()
                .map(|&v| if r == 0.0 { v.abs() } else { (v - r).abs() / r.abs() })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(Pairing {
        references,
        clusters,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_multiplicities() {
        let pi2 = PI * PI;
        let p = match_eigenvalues(&[19.74, 49.35, 49.36, 79.0], &[2.0 * pi2, 5.0 * pi2, 8.0 * pi2], 1e-2).unwrap();
        assert_eq!(p.multiplicities(), vec![1, 2, 1]);
        assert!((p.errors[1] - (49.35 - 5.0 * pi2).abs() / (5.0 * pi2)).abs() < 1e-15);
    }

    #[test]
    fn identical_lists() {
        let v = [1.0, 2.5, 7.0];
        let p = match_eigenvalues(&v, &v, 1e-6).unwrap();
        assert!(p.errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn oscillator_clusters() {
        let c = [1.0 + 1e-9, 2.0, 2.0 + 2e-9, 3.0 - 1e-9, 3.0, 3.0 + 1e-9];
        let p = match_eigenvalues(&c, &[1.0, 2.0, 3.0], 1e-6).unwrap();
        assert_eq!(p.multiplicities(), vec![1, 2, 3]);
    }

    #[test]
    fn coverage() {
        assert!(matches!(
            match_eigenvalues(&[1.0], &[1.0, 2.0], 1e-6),
            Err(Error::Coverage { .. })
        ));
    }
}
