//! Aggregates summary CSVs and fits round counts to `α·Δ + β·r + γ`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linial::interval_table;
use crate::runner::{read_summary_csv, SummaryRow};

/// Least-squares coefficients for one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub algorithm: String,
    pub rows: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Largest `measured − fitted`.
    pub max_residual: f64,
}

impl fmt::Display for Fit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: rounds ≈ {:.3}·Δ + {:.3}·r + {:.3} over {} rows (max residual {:.2})",
            self.algorithm, self.alpha, self.beta, self.gamma, self.rows, self.max_residual
        )
    }
}

/// Number of descent intervals for `n` vertices of degree at most `delta`.
pub fn interval_count(n: usize, delta: u32) -> usize {
    interval_table(n.max(1) as u64, delta as u64).r()
}

/// Fits `rounds` per algorithm. The minimum-norm solution is used when the
/// sweep does not vary `Δ` or `r`.
pub fn fit_rounds(rows: &[SummaryRow]) -> Result<Vec<Fit>> {
    let mut groups: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(&r.algorithm).or_default().push(r);
    }
    let mut fits = Vec::new();
    for (algorithm, group) in groups {
        let m = group.len();
        let a = DMatrix::from_fn(m, 3, |i, j| match j {
            0 => group[i].delta as f64,
            1 => interval_count(group[i].n, group[i].delta) as f64,
            _ => 1.0,
        });
        let y = DVector::from_iterator(m, group.iter().map(|r| r.rounds as f64));
        let coef = a
            .clone()
            .svd(true, true)
            .solve(&y, 1e-9)
            .map_err(|e| Error::Params(format!("fit failed: {e}")))?;
        let residual = &y - &a * &coef;
        fits.push(Fit {
            algorithm: algorithm.to_string(),
            rows: m,
            alpha: coef[0],
            beta: coef[1],
            gamma: coef[2],
            max_residual: residual.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(fits)
}

/// Reads every `.csv` file in `dir` (sorted by name).
pub fn load_dir(dir: &Path) -> Result<Vec<SummaryRow>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(read_summary_csv(std::fs::File::open(p)?)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(delta: u32, n: usize, rounds: usize) -> SummaryRow {
        SummaryRow {
            scenario: format!("d{delta}"),
            algorithm: "ag".into(),
            n,
            delta,
            rounds,
            bit_rounds: rounds,
            stab_rounds: Some(rounds),
            palette: 1,
            adj_radius: None,
            max_bits_per_edge: 0,
        }
    }

    #[test]
    fn recovers_exact_linear_data() {
        let rows: Vec<SummaryRow> = [(2, 64), (4, 64), (8, 64), (16, 64), (4, 500), (8, 20)]
            .iter()
            .map(|&(d, n)| row(d, n, (3 * d as usize) + 2 * interval_count(n, d) + 5))
            .collect();
        let fit = &fit_rounds(&rows).unwrap()[0];
        assert!((fit.alpha - 3.0).abs() < 1e-6);
        assert!(fit.max_residual.abs() < 1e-6);
    }
}
