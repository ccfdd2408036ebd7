use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use super::cases::TestCase;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    AnalyticFormula,
    OscillatorFormula,
    ExternalDataFile,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::AnalyticFormula => "analytic_formula",
            Provenance::OscillatorFormula => "oscillator_formula",
            Provenance::ExternalDataFile => "external_data_file",
        })
    }
}

/// Distinct exact eigenvalues, ascending, with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpectrum {
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub provenance: Provenance,
    /// Header comments of a data file.
    pub header: Vec<String>,
}

impl ReferenceSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of eigenvalues, counted with multiplicity, in the first `k` distinct ones.
    pub fn total_multiplicity(&self, k: usize) -> usize {
        self.multiplicities[..k.min(self.len())].iter().sum()
    }

    /// Each value repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect()
    }

    fn truncate(mut self, k: usize) -> Self {
        self.values.truncate(k);
        self.multiplicities.truncate(k);
        self
    }
}

/// Directory holding the shipped reference files.
pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// First `k` distinct values of `(k1² + k2²)π²`, `k1, k2 ≥ 1`.
fn square_dirichlet(k: usize) -> ReferenceSpectrum {
    let mut bound = 2;
    loop {
        // every pair with k1² + k2² ≤ bound² + 1 has both indices ≤ bound
        let limit = bound * bound + 1;
        let mut counts = std::collections::BTreeMap::new();
        for a in 1..=bound {
            for b in 1..=bound {
                let s = a * a + b * b;
                if s <= limit {
                    *counts.entry(s).or_insert(0usize) += 1;
                }
            }
        }
        if counts.len() >= k {
            let (values, multiplicities) = counts
                .into_iter()
                .take(k)
                .map(|(s, m)| (s as f64 * (PI * PI), m))
                .unzip();
            return ReferenceSpectrum {
                values,
                multiplicities,
                provenance: Provenance::AnalyticFormula,
                header: Vec::new(),
            };
        }
        bound *= 2;
    }
}

/// Parses `value multiplicity` lines; `#` starts a header comment.
pub fn parse_reference(text: &str) -> Result<ReferenceSpectrum> {
    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut header = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if c != "value multiplicity" {
                header.push(c.to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fail = |reason: &str| Error::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut it = line.split_whitespace();
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fail("expected an eigenvalue"))?;
        let m: usize = match it.next() {
            Some(t) => t.parse().map_err(|_| fail("bad multiplicity"))?,
            None => 1,
        };
        if m == 0 || !v.is_finite() {
            return Err(fail("multiplicity must be >= 1 and value finite"));
        }
        if values.last().is_some_and(|&last| v <= last) {
            return Err(fail("values must be strictly ascending"));
        }
        values.push(v);
        multiplicities.push(m);
    }
    Ok(ReferenceSpectrum {
        values,
        multiplicities,
        provenance: Provenance::ExternalDataFile,
        header,
    })
}

pub fn format_reference(spec: &ReferenceSpectrum) -> String {
    let mut out = String::new();
    for h in &spec.header {
        out.push_str(&format!("# {h}\n"));
    }
    out.push_str("# value multiplicity\n");
    for (v, m) in spec.values.iter().zip(&spec.multiplicities) {
        out.push_str(&format!("{v:.15e} {m}\n"));
    }
    out
}

pub fn read_reference(path: &Path) -> Result<ReferenceSpectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_reference(&text).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// The first `k_max` distinct exact eigenvalues of `case`. Cases without a
/// formula read `ref_file`, or the shipped file in [`data_dir`].
pub fn reference_spectrum(case: &TestCase, k_max: usize, ref_file: Option<&Path>) -> Result<ReferenceSpectrum> {
    if k_max == 0 {
        return Err(Error::argument("at least one reference eigenvalue is needed"));
    }
    let spec = match case {
        TestCase::SquareLaplace => square_dirichlet(k_max),
        TestCase::Oscillator => ReferenceSpectrum {
            values: (1..=k_max).map(|n| n as f64).collect(),
            multiplicities: (1..=k_max).collect(),
            provenance: Provenance::OscillatorFormula,
            header: Vec::new(),
        },
        _ => {
            let path = match ref_file {
                Some(p) => p.to_path_buf(),
                None => data_dir().join(case.reference_file_name().expect("file-based case")),
            };
            let spec = read_reference(&path)?;
            if spec.len() < k_max {
                return Err(Error::Ingestion {
                    path,
                    reason: format!("holds {} values, {k_max} requested", spec.len()),
                });
            }
            spec
        }
    };
    Ok(spec.truncate(k_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_values() {
        let s = reference_spectrum(&TestCase::SquareLaplace, 4, None).unwrap();
        let pi2 = PI * PI;
        assert_eq!(s.values, vec![2.0 * pi2, 5.0 * pi2, 8.0 * pi2, 10.0 * pi2]);
        assert_eq!(s.multiplicities, vec![1, 2, 1, 2]);
        // 25 = 3²+4² = 4²+3², 50 = 1²+7² = 5²+5² = 7²+1²
        let big = reference_spectrum(&TestCase::SquareLaplace, 30, None).unwrap();
        let idx = big.values.iter().position(|&v| (v / pi2 - 50.0).abs() < 1e-9).unwrap();
        assert_eq!(big.multiplicities[idx], 3);
    }

    #[test]
    fn oscillator_values() {
        let s = reference_spectrum(&TestCase::Oscillator, 3, None).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.multiplicities, vec![1, 2, 3]);
        assert_eq!(s.expanded(), vec![1.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn missing_file_names_path() {
        let err = reference_spectrum(&TestCase::LShape, 2, Some(Path::new("/nonexistent/ref.txt"))).unwrap_err();
        match err {
            Error::Ingestion { path, .. } => assert_eq!(path, Path::new("/nonexistent/ref.txt")),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let s = ReferenceSpectrum {
            values: vec![1.5, 3.25],
            multiplicities: vec![1, 2],
            provenance: Provenance::ExternalDataFile,
            header: vec!["case: test".into()],
        };
        let back = parse_reference(&format_reference(&s)).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.multiplicities, s.multiplicities);
        assert_eq!(back.header, s.header);
        assert!(parse_reference("2.0 1\n1.0 1\n").is_err());
    }
}
