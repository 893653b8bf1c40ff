//! Manufactured-solution convergence studies and their result tables.

mod norms;
mod poisson;
mod stokes;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

pub use norms::{divergence_norm, error_integrals, ErrorIntegrals, Exact};
pub use poisson::{run_poisson_lm, PoissonLm};
pub use stokes::{run_stokes_brinkman, StokesBrinkman};

use crate::assembly::AssemblyOptions;
use crate::error::{Error, Result};
use crate::linalg::{solve_direct, solve_krylov, CsrMatrix, KrylovMethod};
use crate::space::Function;

/// Tolerance of the geometric marker predicates; structured vertex
/// coordinates are exact dyadic rationals at the resolutions used.
pub const MARKER_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Cg,
    Minres,
    Gmres,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverKind::Direct),
            "cg" => Ok(SolverKind::Cg),
            "minres" => Ok(SolverKind::Minres),
            "gmres" => Ok(SolverKind::Gmres),
            other => Err(Error::Parse(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Direct,
            tol: 1e-10,
            maxit: 10_000,
        }
    }
}

/// Solves a monolithic system with the configured method.
pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    let method = match opts.kind {
        SolverKind::Direct => return solve_direct(a, b),
        SolverKind::Cg => KrylovMethod::Cg,
        SolverKind::Minres => KrylovMethod::Minres,
        SolverKind::Gmres => KrylovMethod::Gmres { restart: 200 },
    };
    let r = solve_krylov(a, b, method, opts.tol, opts.maxit)?;
    if !r.converged {
        return Err(Error::NotConverged {
            iterations: r.iterations,
            residual: r.relative_residual,
        });
    }
    Ok(r.x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub dim: usize,
    pub resolutions: Vec<usize>,
    pub degree: usize,
    pub solver: SolverOptions,
    pub assembly: AssemblyOptions,
    /// Keep the monolithic system and fields of the finest resolution.
    pub keep_finest: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            dim: 2,
            resolutions: vec![4, 8, 16, 32],
            degree: 1,
            solver: SolverOptions::default(),
            assembly: AssemblyOptions::default(),
            keep_finest: false,
        }
    }
}

/// One error measurement at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub var: String,
    pub norm: String,
    pub error: f64,
    /// log(e_prev / e) / log(h_prev / h) against the previous row of the
    /// same (var, norm); absent on the first.
    pub rate: Option<f64>,
}

/// The assembled system and discrete fields of one resolution.
#[derive(Clone, Debug)]
pub struct SolvedSystem {
    pub n: usize,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub fields: Vec<(String, Function)>,
}

#[derive(Clone, Debug)]
pub struct StudyResult {
    pub rows: Vec<ConvergenceRow>,
    pub finest: Option<SolvedSystem>,
}

impl StudyResult {
    /// Rows of one (var, norm) series, by increasing n.
    pub fn series(&self, var: &str, norm: &str) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.var == var && r.norm == norm).collect()
    }

    /// Least-squares slope of log(error) against log(h) for one series.
    pub fn fitted_rate(&self, var: &str, norm: &str) -> Option<f64> {
        let s = self.series(var, norm);
        let h: Vec<f64> = s.iter().map(|r| r.h).collect();
        let e: Vec<f64> = s.iter().map(|r| r.error).collect();
        least_squares_rate(&h, &e)
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }
}

/// Slope of the least-squares line through (log h, log e); `None` with
/// fewer than two usable points.
pub fn least_squares_rate(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Builds rows for the measurements `(n, var, norm, error)` (in order of
/// increasing n) and fills in pairwise rates per series.
pub(crate) fn rows_with_rates(measurements: Vec<(usize, String, String, f64)>) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(measurements.len());
    for (n, var, norm, error) in measurements {
        let h = 1.0 / n as f64;
        let prev = rows.iter().rev().find(|r| r.var == var && r.norm == norm);
        let rate = prev.and_then(|p| {
            (p.error > 0.0 && error > 0.0 && p.h != h).then(|| (p.error / error).ln() / (p.h / h).ln())
        });
        rows.push(ConvergenceRow {
            n,
            h,
            var,
            norm,
            error,
            rate,
        });
    }
    rows.sort_by_key(|r| r.n);
    rows
}

pub fn rows_to_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,h,var,norm,error,rate\n");
    for r in rows {
        let rate = r.rate.map(|x| format!("{x:.4}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{:.10e},{}", r.n, r.h, r.var, r.norm, r.error, rate);
    }
    s
}

pub(crate) fn check_resolutions(resolutions: &[usize]) -> Result<()> {
    if resolutions.is_empty() {
        return Err(Error::InvalidArgument("no resolutions given".into()));
    }
    if resolutions.windows(2).any(|w| w[0] >= w[1]) || resolutions[0] == 0 {
        return Err(Error::InvalidArgument(
            "resolutions must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

pub(crate) fn at_resolution<T>(n: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Resolution { n, source: Box::new(e) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_slope_of_exact_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((least_squares_rate(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(least_squares_rate(&h[..1], &e[..1]).is_none());
    }

    #[test]
    fn pairwise_rates_are_per_series() {
        let rows = rows_with_rates(vec![
            (4, "u".into(), "L2".into(), 1.0),
            (4, "u".into(), "H1".into(), 1.0),
            (8, "u".into(), "L2".into(), 0.25),
            (8, "u".into(), "H1".into(), 0.5),
        ]);
        assert_eq!(rows[0].rate, None);
        assert_eq!(rows[1].rate, None);
        assert!((rows[2].rate.unwrap() - 2.0).abs() < 1e-14);
        assert!((rows[3].rate.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let rows = rows_with_rates(vec![(2, "u".into(), "L2".into(), 0.5)]);
        let csv = rows_to_csv(&rows);
        assert_eq!(csv, "n,h,var,norm,error,rate\n2,0.5,u,L2,5.0000000000e-1,\n");
    }

    #[test]
    fn resolution_checks() {
        assert!(check_resolutions(&[2, 4]).is_ok());
        assert!(check_resolutions(&[4, 2]).is_err());
        assert!(check_resolutions(&[]).is_err());
        assert!("minres".parse::<SolverKind>().is_ok());
        assert!("lu".parse::<SolverKind>().is_err());
    }
}
