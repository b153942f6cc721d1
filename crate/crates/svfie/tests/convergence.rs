//! Empirical convergence-rate studies: the staircase approximations and the
//! solved equations must lose error at first order in the cell width.

use svfie::analysis::{convergence_rate, l2_error};
use svfie::basis::{cell_integrals_1d, walsh_matrix, Quadrature, Resolution};
use svfie::operational::integration_matrix;
use svfie::problems::registry_get;
use svfie::solver::solve_walsh;
use svfie::stochastic::BrownianPath;

#[test]
fn deterministic_problems_converge_at_first_order() {
    for name in ["example1_det", "example2_det"] {
        let problem = registry_get(name).unwrap();
        let exact = problem.exact_deterministic().cloned().unwrap();
        let mut errors = Vec::new();
        for &m in &[8usize, 16, 32, 64, 128] {
            let res = Resolution::new(m).unwrap();
            let result = solve_walsh(&problem, res, &BrownianPath::zero(res)).unwrap();
            let report = l2_error(&result, |t| exact(t), 2048);
            errors.push((m, report.l2_error));
        }
        let rate = convergence_rate(&errors).unwrap();
        assert!(
            (0.7..=1.3).contains(&rate),
            "{name}: empirical rate {rate}, errors {errors:?}"
        );
    }
}

#[test]
fn lipschitz_function_approximates_at_first_order() {
    // |t - 1/3| is Lipschitz but not smooth; the m-term reconstruction must
    // still lose L2 error at first order.
    let f = |t: f64| (t - 1.0 / 3.0).abs();
    let n_grid = 4096;
    let mut errors = Vec::new();
    for k in 3..=8 {
        let res = Resolution::from_exponent(k);
        let coeffs = cell_integrals_1d(f, res, Quadrature::default());
        let mut sum_sq = 0.0;
        for i in 0..n_grid {
            let t = (i as f64 + 0.5) / n_grid as f64;
            let err = coeffs.reconstruct(t).unwrap() - f(t);
            sum_sq += err * err;
        }
        errors.push((res.m(), (sum_sq / n_grid as f64).sqrt()));
    }
    let rate = convergence_rate(&errors).unwrap();
    assert!((0.7..=1.3).contains(&rate), "rate {rate}, errors {errors:?}");
}

/// Staircase of the running integral of `f` through the full Walsh route:
/// since `W(t)` on cell `j` is column `j` of `T_W`, the whole staircase is
/// the row vector `F^T T_W Lambda T_W`.
fn walsh_running_integral_staircase(f: impl Fn(f64) -> f64, res: Resolution) -> Vec<f64> {
    let tw = walsh_matrix(res);
    let lambda = integration_matrix(res).walsh_form(&tw).unwrap();
    let coeffs = cell_integrals_1d(f, res, Quadrature::default());
    let row = coeffs.values().transpose() * tw.to_f64() * lambda * tw.to_f64();
    row.iter().copied().collect()
}

#[test]
fn walsh_integration_error_is_first_order_away_from_midpoints() {
    // The staircase of \int_0^t sin(s) ds carries an O(h) error at generic
    // points of a cell; at the cell midpoints the last half-cell correction
    // cancels the leading term and the error drops to O(h^2). Both rates are
    // pinned here.
    let f = f64::sin;
    let exact = |t: f64| 1.0 - t.cos();

    let mut generic_errors = Vec::new();
    let mut midpoint_errors = Vec::new();
    for k in 3..=8 {
        let res = Resolution::from_exponent(k);
        let staircase = walsh_running_integral_staircase(f, res);

        let mut worst_generic = 0.0f64;
        for i in 0..101 {
            let t = (i as f64 + 0.5) / 101.0;
            let err = (staircase[res.cell_of(t).unwrap()] - exact(t)).abs();
            worst_generic = worst_generic.max(err);
        }
        generic_errors.push((res.m(), worst_generic));

        let mut worst_mid = 0.0f64;
        for j in 0..res.m() {
            let t = res.cell_midpoint(j);
            let err = (staircase[j] - exact(t)).abs();
            worst_mid = worst_mid.max(err);
        }
        midpoint_errors.push((res.m(), worst_mid));
    }

    let generic_rate = convergence_rate(&generic_errors).unwrap();
    assert!(
        (0.7..=1.3).contains(&generic_rate),
        "generic-point rate {generic_rate}, errors {generic_errors:?}"
    );
    let midpoint_rate = convergence_rate(&midpoint_errors).unwrap();
    assert!(
        (1.7..=2.3).contains(&midpoint_rate),
        "midpoint rate {midpoint_rate}, errors {midpoint_errors:?}"
    );
}
