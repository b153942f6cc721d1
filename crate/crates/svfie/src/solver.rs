//! Assembly and solution of the m-dimensional linear system equivalent to
//! one equation instance.
//!
//! Expanding every function of the equation in the first `m` Walsh functions
//! and applying the operational matrices turns the equation into
//! `A X = F` with
//!
//! ```text
//! A = I - m K^T - m^2 (K1 .* P)^T - m^2 (K2 .* P_S)^T
//! ```
//!
//! where `.*` is the entrywise product and `K`, `K1`, `K2` are the cell
//! double-integral coefficients of the kernels. The entrywise form is an
//! algebraic collapse of the diagonal-extraction operator: the `i`-th
//! diagonal entry of `m K1^T diag(X) P` is `m * sum_j K1[j,i] X_j P[j,i]`,
//! which is exactly row `i` of `m^2 (K1 .* P)^T` applied to `X`. The test
//! suite checks this identity against a literal diagonal-extraction
//! evaluation.
//!
//! A comparator assembled directly in the block-pulse basis (cell-mean
//! coefficients, `A_b = I - h K_b^T - (K1_b .* P)^T - (K2_b .* P_S)^T`)
//! produces the same staircase up to roundoff and is used as a cross-check
//! throughout.

use nalgebra::{DMatrix, DVector};

use crate::basis::{cell_integrals_1d, cell_integrals_2d, Quadrature, Resolution};
use crate::error::{Error, Result};
use crate::operational::{integration_matrix, stochastic_matrix};
use crate::problems::{NoiseFn, SvfieProblem};
use crate::stochastic::BrownianPath;

/// Basis the system is assembled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Walsh-function method: coefficients are cell integrals, the staircase
    /// value on cell `j` is `m * X[j]`.
    Walsh,
    /// Block-pulse comparator: coefficients are cell means, the staircase
    /// value on cell `j` is `X[j]`.
    BlockPulse,
}

/// Path-independent part of the discretization: kernel coefficients, the
/// forcing vector, and the integration matrix. Reused across Monte Carlo
/// paths; only the stochastic matrix and the noise contribution are
/// per-path.
#[derive(Clone)]
pub struct Discretization {
    res: Resolution,
    method: Method,
    forcing: DVector<f64>,
    fredholm: DMatrix<f64>,
    volterra: DMatrix<f64>,
    stochastic: DMatrix<f64>,
    integration: DMatrix<f64>,
    noise: Option<NoiseFn>,
}

impl Discretization {
    pub fn new(
        problem: &SvfieProblem,
        res: Resolution,
        quad: Quadrature,
        method: Method,
    ) -> Result<Self> {
        let (first_cell, end_cell) = fredholm_cell_range(problem, res)?;

        let forcing_integrals = cell_integrals_1d(|t| problem.f(t), res, quad);
        let mut fredholm = cell_integrals_2d(|s, t| problem.fredholm_kernel(s, t), res, quad);
        let volterra = cell_integrals_2d(|s, t| problem.volterra_kernel(s, t), res, quad);
        let stochastic = cell_integrals_2d(|s, t| problem.stochastic_kernel(s, t), res, quad);

        // The s-integration of the Fredholm term only covers cells inside
        // [alpha, beta]; zero the rows (s-cells) outside it.
        for i in (0..first_cell).chain(end_cell..res.m()) {
            fredholm.values_mut().row_mut(i).fill(0.0);
        }

        // Convert to the coefficient convention of the method. Cell means
        // are m (1D) and m^2 (2D) times the cell integrals; the scale
        // factors are powers of two, so the conversion is exact.
        let m = res.m() as f64;
        let (forcing, fredholm, volterra, stochastic) = match method {
            Method::Walsh => (
                forcing_integrals.values().clone(),
                fredholm.values().clone(),
                volterra.values().clone(),
                stochastic.values().clone(),
            ),
            Method::BlockPulse => (
                forcing_integrals.values() * m,
                fredholm.values() * (m * m),
                volterra.values() * (m * m),
                stochastic.values() * (m * m),
            ),
        };

        Ok(Self {
            res,
            method,
            forcing,
            fredholm,
            volterra,
            stochastic,
            integration: integration_matrix(res).as_matrix().clone(),
            noise: problem_noise(problem),
        })
    }

    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Builds the system for one Brownian path.
    pub fn assemble(&self, path: &BrownianPath) -> Result<AssembledSystem> {
        if path.res() != self.res {
            return Err(Error::ResolutionMismatch {
                path_m: path.res().m(),
                expected_m: self.res.m(),
            });
        }
        let m = self.res.m();
        let m_f = m as f64;
        let ps = stochastic_matrix(path);
        let ps = ps.as_matrix();

        // Walsh: A = I - m K^T - m^2 (K1 .* P)^T - m^2 (K2 .* P_S)^T.
        // Block pulse: same layout with (h, 1, 1) on the mean-convention
        // coefficients.
        let (k_scale, ode_scale) = match self.method {
            Method::Walsh => (m_f, m_f * m_f),
            Method::BlockPulse => (self.res.h(), 1.0),
        };
        let matrix = DMatrix::from_fn(m, m, |r, c| {
            let delta = if r == c { 1.0 } else { 0.0 };
            delta
                - k_scale * self.fredholm[(c, r)]
                - ode_scale * self.volterra[(c, r)] * self.integration[(c, r)]
                - ode_scale * self.stochastic[(c, r)] * ps[(c, r)]
        });

        // The per-path noise perturbs the forcing term, sampled at the cell
        // midpoints, consistent with the piecewise-constant resolution.
        let mut rhs = self.forcing.clone();
        if let Some(noise) = &self.noise {
            let noise_scale = match self.method {
                Method::Walsh => self.res.h(),
                Method::BlockPulse => 1.0,
            };
            for j in 0..m {
                rhs[j] += noise_scale * noise(self.res.cell_midpoint(j), path.at_cell_mid(j));
            }
        }

        Ok(AssembledSystem {
            res: self.res,
            method: self.method,
            path_seed: path.seed(),
            matrix,
            rhs,
        })
    }
}

fn problem_noise(problem: &SvfieProblem) -> Option<NoiseFn> {
    if problem.has_noise() {
        let p = problem.clone();
        Some(std::sync::Arc::new(move |t, b| p.noise(t, b)))
    } else {
        None
    }
}

/// Cell range `[first, end)` covered by the Fredholm limits, which must be
/// multiples of the cell width.
fn fredholm_cell_range(problem: &SvfieProblem, res: Resolution) -> Result<(usize, usize)> {
    let (alpha, beta) = problem.fredholm_limits();
    let scaled_a = alpha * res.m() as f64;
    let scaled_b = beta * res.m() as f64;
    if scaled_a.fract() != 0.0 || scaled_b.fract() != 0.0 {
        return Err(Error::UnalignedFredholmLimits {
            alpha,
            beta,
            h: res.h(),
        });
    }
    Ok((scaled_a as usize, scaled_b as usize))
}

/// System matrix and right-hand side for one `(problem, m, path)` triple.
#[derive(Clone, Debug, PartialEq)]
pub struct AssembledSystem {
    res: Resolution,
    method: Method,
    path_seed: Option<u64>,
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl AssembledSystem {
    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn path_seed(&self) -> Option<u64> {
        self.path_seed
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }
}

/// Solve diagnostics: relative residual, 1-norm condition estimate, and a
/// flag raised when the estimate exceeds `1e12`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
}

/// Coefficient vector of the approximate solution plus the reconstruction
/// rule of its method.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    res: Resolution,
    method: Method,
    path_seed: Option<u64>,
    coefficients: DVector<f64>,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn path_seed(&self) -> Option<u64> {
        self.path_seed
    }

    /// Raw coefficients in the method's own convention.
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    /// Value of the staircase on cell `j`.
    pub fn cell_value(&self, j: usize) -> f64 {
        match self.method {
            Method::Walsh => self.res.m() as f64 * self.coefficients[j],
            Method::BlockPulse => self.coefficients[j],
        }
    }

    /// All staircase cell values.
    pub fn cell_values(&self) -> DVector<f64> {
        DVector::from_fn(self.res.m(), |j, _| self.cell_value(j))
    }

    /// The approximate solution `x_m(t)`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        Ok(self.cell_value(self.res.cell_of(t)?))
    }
}

/// Dense LU with partial pivoting, a residual check, and a condition
/// estimate. Fails when the factorization breaks down or the residual shows
/// the solution is unusable.
pub fn solve(system: &AssembledSystem) -> Result<SolveResult> {
    let m = system.res.m();
    let lu = system.matrix.clone().lu();
    let coefficients = lu
        .solve(&system.rhs)
        .ok_or(Error::SingularSystem { m })?;

    let residual = (&system.matrix * &coefficients - &system.rhs).norm();
    let rhs_norm = system.rhs.norm();
    let residual_norm = if rhs_norm > 0.0 {
        residual / rhs_norm
    } else {
        residual
    };
    if !residual_norm.is_finite() || residual_norm > 1e-6 {
        return Err(Error::SingularSystem { m });
    }

    let condition_estimate = match system.matrix.clone().try_inverse() {
        Some(inverse) => one_norm(&system.matrix) * one_norm(&inverse),
        None => f64::INFINITY,
    };

    Ok(SolveResult {
        res: system.res,
        method: system.method,
        path_seed: system.path_seed,
        coefficients,
        diagnostics: Diagnostics {
            residual_norm,
            condition_estimate,
            ill_conditioned: condition_estimate > 1e12,
        },
    })
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Assembles the Walsh-method system with the default quadrature.
pub fn assemble(
    problem: &SvfieProblem,
    res: Resolution,
    path: &BrownianPath,
) -> Result<AssembledSystem> {
    Discretization::new(problem, res, Quadrature::default(), Method::Walsh)?.assemble(path)
}

/// Assembles the block-pulse comparator system with the default quadrature.
pub fn assemble_bpf(
    problem: &SvfieProblem,
    res: Resolution,
    path: &BrownianPath,
) -> Result<AssembledSystem> {
    Discretization::new(problem, res, Quadrature::default(), Method::BlockPulse)?.assemble(path)
}

/// Assemble-and-solve in the Walsh basis.
pub fn solve_walsh(
    problem: &SvfieProblem,
    res: Resolution,
    path: &BrownianPath,
) -> Result<SolveResult> {
    solve(&assemble(problem, res, path)?)
}

/// Assemble-and-solve in the block-pulse basis.
pub fn solve_bpf(
    problem: &SvfieProblem,
    res: Resolution,
    path: &BrownianPath,
) -> Result<SolveResult> {
    solve(&assemble_bpf(problem, res, path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::registry_get;
    use approx::assert_abs_diff_eq;

    fn zero_kernel_problem() -> SvfieProblem {
        SvfieProblem::new(
            "zero_kernels",
            |t| 1.0 + t,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
    }

    #[test]
    fn zero_kernels_degenerate_to_projection() {
        let res = Resolution::new(8).unwrap();
        let problem = zero_kernel_problem();
        let path = BrownianPath::generate(5, res);
        let system = assemble(&problem, res, &path).unwrap();
        assert_eq!(system.matrix(), &DMatrix::<f64>::identity(8, 8));

        let result = solve(&system).unwrap();
        assert_eq!(result.coefficients(), system.rhs());

        // The reconstruction must equal the plain coefficient staircase.
        let coeffs = cell_integrals_1d(|t| 1.0 + t, res, Quadrature::default());
        for &t in &[0.05, 0.41, 0.93] {
            assert_abs_diff_eq!(
                result.evaluate(t).unwrap(),
                coeffs.reconstruct(t).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn const_fredholm_hand_system() {
        let res = Resolution::new(2).unwrap();
        let problem = registry_get("const_fredholm").unwrap();
        let system = assemble(&problem, res, &BrownianPath::zero(res)).unwrap();

        let expected = [[0.75, -0.25], [-0.25, 0.75]];
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(system.matrix()[(r, c)], expected[r][c], epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(system.rhs()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(system.rhs()[1], 0.5, epsilon = 1e-15);

        let result = solve(&system).unwrap();
        assert_abs_diff_eq!(result.coefficients()[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(result.coefficients()[1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(result.evaluate(0.1).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(result.evaluate(0.9).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn const_fredholm_is_exact_at_all_resolutions() {
        let problem = registry_get("const_fredholm").unwrap();
        for &m in &[2usize, 16, 64] {
            let res = Resolution::new(m).unwrap();
            let result = solve_walsh(&problem, res, &BrownianPath::generate(1, res)).unwrap();
            for j in 0..m {
                assert_abs_diff_eq!(result.cell_value(j), 2.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bpf_comparator_matches_hand_cases() {
        let res = Resolution::new(2).unwrap();
        let problem = zero_kernel_problem();
        let result = solve_bpf(&problem, res, &BrownianPath::zero(res)).unwrap();
        // With no kernels the BPF coefficients are the cell means of f.
        assert_abs_diff_eq!(result.coefficients()[0], 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(result.coefficients()[1], 1.75, epsilon = 1e-14);

        let constant = registry_get("const_fredholm").unwrap();
        let result = solve_bpf(&constant, res, &BrownianPath::zero(res)).unwrap();
        assert_abs_diff_eq!(result.evaluate(0.2).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn walsh_and_bpf_agree_for_a_seeded_path() {
        let res = Resolution::new(16).unwrap();
        let problem = registry_get("example1").unwrap();
        let path = BrownianPath::generate(77, res);
        let walsh = solve_walsh(&problem, res, &path).unwrap();
        let bpf = solve_bpf(&problem, res, &path).unwrap();
        for j in 0..16 {
            assert_abs_diff_eq!(walsh.cell_value(j), bpf.cell_value(j), epsilon = 1e-9);
        }
    }

    #[test]
    fn example2_det_reconstruction_tracks_cosine() {
        let res = Resolution::new(64).unwrap();
        let problem = registry_get("example2_det").unwrap();
        let result = solve_walsh(&problem, res, &BrownianPath::zero(res)).unwrap();
        for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!((result.evaluate(t).unwrap() - t.cos()).abs() < 0.05);
        }
    }

    #[test]
    fn assembly_is_bit_reproducible() {
        let res = Resolution::new(32).unwrap();
        let problem = registry_get("example2").unwrap();
        let path = BrownianPath::generate(9, res);
        let first = assemble(&problem, res, &path).unwrap();
        let second = assemble(&problem, res, &path).unwrap();
        assert_eq!(first.matrix(), second.matrix());
        assert_eq!(first.rhs(), second.rhs());
    }

    #[test]
    fn singular_system_is_reported() {
        // f = 1, k = 1 on [0,1] makes I - m K^T exactly rank deficient.
        let res = Resolution::new(8).unwrap();
        let problem = SvfieProblem::new("singular", |_| 1.0, |_, _| 1.0, |_, _| 0.0, |_, _| 0.0);
        let system = assemble(&problem, res, &BrownianPath::zero(res)).unwrap();
        assert!(matches!(
            solve(&system),
            Err(Error::SingularSystem { m: 8 })
        ));
    }

    #[test]
    fn ill_conditioning_is_flagged() {
        let res = Resolution::new(4).unwrap();
        let eps = 1e-13;
        let problem = SvfieProblem::new(
            "nearly_singular",
            |_| 1.0,
            move |_, _| 1.0 - eps,
            |_, _| 0.0,
            |_, _| 0.0,
        );
        let system = assemble(&problem, res, &BrownianPath::zero(res)).unwrap();
        match solve(&system) {
            Ok(result) => assert!(result.diagnostics.ill_conditioned),
            // An exactly zero pivot after rounding is also acceptable here.
            Err(Error::SingularSystem { .. }) => {}
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn misaligned_fredholm_limits_are_rejected() {
        let res = Resolution::new(8).unwrap();
        let problem = SvfieProblem::new("odd_limits", |_| 1.0, |_, _| 0.1, |_, _| 0.0, |_, _| 0.0)
            .with_fredholm_limits(0.3, 0.9)
            .unwrap();
        assert!(matches!(
            assemble(&problem, res, &BrownianPath::zero(res)),
            Err(Error::UnalignedFredholmLimits { .. })
        ));
    }

    #[test]
    fn cell_aligned_fredholm_limits_restrict_the_kernel() {
        // Same constant problem, but the Fredholm term only sees [0, 1/2]:
        // x = 1 + (1/2) \int_0^{1/2} x ds, constant x = c solves
        // c = 1 + c/4, c = 4/3.
        let res = Resolution::new(8).unwrap();
        let problem = SvfieProblem::new("half_range", |_| 1.0, |_, _| 0.5, |_, _| 0.0, |_, _| 0.0)
            .with_fredholm_limits(0.0, 0.5)
            .unwrap();
        let result = solve_walsh(&problem, res, &BrownianPath::zero(res)).unwrap();
        for j in 0..8 {
            assert_abs_diff_eq!(result.cell_value(j), 4.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn path_resolution_mismatch_is_rejected() {
        let problem = registry_get("example1").unwrap();
        let res = Resolution::new(8).unwrap();
        let wrong_path = BrownianPath::generate(1, Resolution::new(16).unwrap());
        assert!(matches!(
            assemble(&problem, res, &wrong_path),
            Err(Error::ResolutionMismatch { .. })
        ));
    }
}
