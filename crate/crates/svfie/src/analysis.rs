//! Error norms, convergence-rate estimation, Monte Carlo ensembles, and the
//! a-priori Gronwall error bound.
//!
//! The mean-square norm of the error analysis specializes to the plain
//! `L^2[0, 1)` norm for deterministic reductions; for stochastic runs the
//! ensemble standard deviation and standard error stand in for the
//! expectation.

use rayon::prelude::*;

use crate::basis::{Quadrature, Resolution};
use crate::error::{Error, Result};
use crate::problems::{RegularityConstants, SvfieProblem};
use crate::solver::{solve, Discretization, Method, SolveResult};
use crate::stochastic::{BrownianPath, SeedPlan};

/// Probe points mirroring the tabulated experiment layout.
pub const DEFAULT_PROBES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Error of one approximate solution against a reference function.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub res: Resolution,
    /// Discrete `L^2` norm over a uniform fine grid.
    pub l2_error: f64,
    /// Largest pointwise error on that grid.
    pub max_error: f64,
    /// `(t, |x_m(t) - exact(t)|)` at the default probes.
    pub probe_errors: Vec<(f64, f64)>,
}

/// Discrete `L^2` and max error of `approx` against `exact`, sampled at the
/// midpoints of a uniform grid with `n_quad` points (midpoints keep the
/// samples away from the staircase jumps).
pub fn l2_error<F>(approx: &SolveResult, exact: F, n_quad: usize) -> ErrorReport
where
    F: Fn(f64) -> f64,
{
    assert!(n_quad > 0, "need at least one sample point");
    let mut sum_sq = 0.0;
    let mut max_error = 0.0f64;
    for i in 0..n_quad {
        let t = (i as f64 + 0.5) / n_quad as f64;
        let err = (approx.evaluate(t).expect("grid point is in [0,1)") - exact(t)).abs();
        sum_sq += err * err;
        max_error = max_error.max(err);
    }
    let probe_errors = DEFAULT_PROBES
        .iter()
        .map(|&t| {
            let err = (approx.evaluate(t).expect("probe is in [0,1)") - exact(t)).abs();
            (t, err)
        })
        .collect();
    ErrorReport {
        res: approx.res(),
        l2_error: (sum_sq / n_quad as f64).sqrt(),
        max_error,
        probe_errors,
    }
}

/// Least-squares slope of `log2(error)` against `log2(m)`, negated so that
/// an `O(h)` method reports a rate near 1.
///
/// Requires at least three entries on a strictly doubling sequence of
/// resolutions, and strictly positive errors (a zero error saturates the
/// fit).
pub fn convergence_rate(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::TooFewResolutions(errors.len()));
    }
    for pair in errors.windows(2) {
        if pair[1].0 != 2 * pair[0].0 {
            return Err(Error::NonDoublingResolutions {
                previous: pair[0].0,
                next: pair[1].0,
            });
        }
    }
    for &(m, e) in errors {
        if e <= 0.0 {
            return Err(Error::RateSaturated(e, m));
        }
    }

    let n = errors.len() as f64;
    let points: Vec<(f64, f64)> = errors
        .iter()
        .map(|&(m, e)| ((m as f64).log2(), e.log2()))
        .collect();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Ok(-(sxy / sxx))
}

/// Ensemble statistics of the approximate solution at a set of probe points.
#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    pub n_paths: u64,
    pub master_seed: u64,
    pub probes: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Solves the equation once per derived path seed and aggregates the probe
/// values.
///
/// Paths fan out in parallel but per-path results are stored by path index
/// and reduced in index order, so the whole summary is a pure function of
/// `(master_seed, m, n_paths, problem)`.
pub fn monte_carlo(
    problem: &SvfieProblem,
    res: Resolution,
    n_paths: u64,
    plan: &SeedPlan,
    probes: &[f64],
) -> Result<McSummary> {
    if n_paths == 0 {
        return Err(Error::NoPaths);
    }
    for &t in probes {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::OutsideUnitInterval(t));
        }
    }

    let discretization = Discretization::new(problem, res, Quadrature::default(), Method::Walsh)?;
    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|index| {
            let path = BrownianPath::generate(plan.seed_for(index), res);
            let wrap = |source: Error| Error::PathSolveFailed {
                index,
                source: Box::new(source),
            };
            let result = solve(&discretization.assemble(&path).map_err(wrap)?).map_err(wrap)?;
            probes
                .iter()
                .map(|&t| result.evaluate(t).map_err(wrap))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    // Assumed-mean accumulation: shifting by the first path's value keeps
    // the sums small and makes the spread of a deterministic ensemble
    // exactly zero.
    let n = n_paths as f64;
    let mut mean = vec![0.0; probes.len()];
    let mut std = vec![0.0; probes.len()];
    for (p, (mu, sd)) in mean.iter_mut().zip(std.iter_mut()).enumerate() {
        let center = per_path[0][p];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for row in &per_path {
            let d = row[p] - center;
            sum += d;
            sum_sq += d * d;
        }
        *mu = center + sum / n;
        if n_paths > 1 {
            *sd = ((sum_sq - sum * sum / n).max(0.0) / (n - 1.0)).sqrt();
        }
    }
    let stderr = std.iter().map(|s| s / n.sqrt()).collect();

    Ok(McSummary {
        n_paths,
        master_seed: plan.master_seed(),
        probes: probes.to_vec(),
        mean,
        std,
        stderr,
    })
}

/// The two constants of the Gronwall step and the resulting bound
/// `R1 * exp(R2)` on the mean-square error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GronwallBound {
    pub r1: f64,
    pub r2: f64,
    pub bound: f64,
}

/// Evaluates the a-priori mean-square error bound:
///
/// ```text
/// R1 = 7 (C^2 h^2 + 2 (beta - alpha)(sqrt(2) L h sigma)^2
///         + 2 (sqrt(2) L1 h sigma)^2 + 2 (sqrt(2) L2 h sigma)^2)
/// R2 = 7 (2 (rho + sqrt(2) L h)^2 + 2 (rho1 + sqrt(2) L1 h)^2
///         + 2 (rho2 + sqrt(2) L2 h)^2)
/// bound = R1 * e^{R2}
/// ```
///
/// `R1` carries the full `h^2` factor, so the bound certifies a mean-square
/// error of order `h^2`.
pub fn gronwall_bound(
    constants: &RegularityConstants,
    alpha: f64,
    beta: f64,
    h: f64,
) -> Result<GronwallBound> {
    constants.validate()?;
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidStepWidth(h));
    }
    if alpha < 0.0 {
        return Err(Error::NegativeConstant {
            name: "alpha",
            value: alpha,
        });
    }
    if beta < alpha {
        return Err(Error::InvalidFredholmLimits { alpha, beta });
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let spread = |l: f64| (sqrt2 * l * h * constants.sigma).powi(2);
    let r1 = 7.0
        * ((constants.c * h).powi(2)
            + 2.0 * (beta - alpha) * spread(constants.l)
            + 2.0 * spread(constants.l1)
            + 2.0 * spread(constants.l2));
    let growth = |rho: f64, l: f64| (rho + sqrt2 * l * h).powi(2);
    let r2 = 7.0
        * (2.0 * growth(constants.rho, constants.l)
            + 2.0 * growth(constants.rho1, constants.l1)
            + 2.0 * growth(constants.rho2, constants.l2));
    Ok(GronwallBound {
        r1,
        r2,
        bound: r1 * r2.exp(),
    })
}
