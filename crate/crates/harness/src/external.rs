//! Ingestion of estimates produced outside this crate.
//!
//! ```text
//! # snap_tolerance=1e-8
//! replicate,b1,b2,…,bp
//! 0,0.93,0,…
//! ```
//!
//! Rows are keyed by the 0-based replicate index. With a snap tolerance,
//! entries of magnitude at most the tolerance are read as exact zeros.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEstimates {
    pub snap_tolerance: Option<f64>,
    pub rows: HashMap<usize, Vec<f64>>,
}

impl ExternalEstimates {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut snap_tolerance = None;
        for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
            if let Some((k, v)) = line[1..].split_once('=') {
                if k.trim() == "snap_tolerance" {
                    let tol: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| HarnessError::Config(format!("bad snap_tolerance `{}`", v.trim())))?;
                    if tol.is_nan() || tol < 0.0 {
                        return Err(HarnessError::Config("snap_tolerance must be nonnegative".into()));
                    }
                    snap_tolerance = Some(tol);
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = HashMap::new();
        for record in reader.records() {
            let record = record?;
            let mut fields = record.iter();
            let replicate: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| HarnessError::Config("external row without replicate index".into()))?;
            let mut beta = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| HarnessError::Config(format!("bad coefficient `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(tol) = snap_tolerance {
                for v in &mut beta {
                    if v.abs() <= tol {
                        *v = 0.0;
                    }
                }
            }
            if rows.insert(replicate, beta).is_some() {
                return Err(HarnessError::Config(format!("replicate {replicate} listed twice")));
            }
        }
        Ok(Self { snap_tolerance, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_snapping() {
        let text = "# snap_tolerance=1e-6\nreplicate,b1,b2,b3\n1,0.5,1e-9,-2\n0,0,0,1\n";
        let ext = ExternalEstimates::parse(text).unwrap();
        assert_eq!(ext.snap_tolerance, Some(1e-6));
        assert_eq!(ext.rows[&1], vec![0.5, 0.0, -2.0]);
        assert_eq!(ext.rows[&0], vec![0.0, 0.0, 1.0]);
        let raw = ExternalEstimates::parse("replicate,b1\n0,1e-9\n").unwrap();
        assert_eq!(raw.rows[&0], vec![1e-9]);
        assert!(ExternalEstimates::parse("replicate,b1\n0,1\n0,2\n").is_err());
    }
}
