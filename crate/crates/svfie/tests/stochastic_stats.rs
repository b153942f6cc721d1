//! Distributional sanity of the Brownian generator and the stochastic
//! operational matrix, under fixed seeds so every run is reproducible.

use svfie::basis::{cell_integrals_1d, walsh_matrix, Quadrature, Resolution};
use svfie::operational::stochastic_matrix;
use svfie::stochastic::{ito_oracle, BrownianPath, SeedPlan};

#[test]
fn squared_brownian_value_grows_linearly_in_time() {
    let res = Resolution::new(4).unwrap();
    let n = 10_000u64;
    let plan = SeedPlan::new(7);
    for &t in &[0.25, 0.5, 1.0] {
        let squares: Vec<f64> = (0..n)
            .map(|i| {
                let b = BrownianPath::generate(plan.seed_for(i), res)
                    .at_time(t)
                    .unwrap();
                b * b
            })
            .collect();
        let mean = squares.iter().sum::<f64>() / n as f64;
        let var = squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let stderr = (var / n as f64).sqrt();
        assert!(
            (mean - t).abs() <= 5.0 * stderr,
            "E[B({t})^2] = {mean}, expected {t} +- {}",
            5.0 * stderr
        );
    }
}

#[test]
fn increments_are_serially_uncorrelated() {
    let res = Resolution::new(2048).unwrap();
    let path = BrownianPath::generate(99, res);
    let increments: Vec<f64> = path.values().windows(2).map(|w| w[1] - w[0]).collect();
    let n = increments.len();
    let mean = increments.iter().sum::<f64>() / n as f64;
    let var: f64 = increments.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let lag1: f64 = increments
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum::<f64>()
        / ((n - 1) as f64 * var);
    let bound = 5.0 / (n as f64).sqrt();
    assert!(lag1.abs() <= bound, "lag-1 autocorrelation {lag1} > {bound}");
}

#[test]
fn stochastic_matrix_entries_average_to_zero() {
    // Every entry of P_S is a centered Gaussian; over many paths its sample
    // mean must sit within five standard errors of zero.
    let res = Resolution::new(4).unwrap();
    let m = res.m();
    let n = 10_000u64;
    let plan = SeedPlan::new(11);
    let mut sums = vec![0.0; m * m];
    let mut sums_sq = vec![0.0; m * m];
    for i in 0..n {
        let ps = stochastic_matrix(&BrownianPath::generate(plan.seed_for(i), res));
        for (acc, (acc_sq, &v)) in sums
            .iter_mut()
            .zip(sums_sq.iter_mut().zip(ps.as_matrix().iter()))
        {
            *acc += v;
            *acc_sq += v * v;
        }
    }
    for idx in 0..m * m {
        let mean = sums[idx] / n as f64;
        let var = (sums_sq[idx] / n as f64 - mean * mean).max(0.0);
        let stderr = (var / n as f64).sqrt();
        assert!(
            mean.abs() <= 5.0 * stderr,
            "entry {idx}: mean {mean}, stderr {stderr}"
        );
    }
}

#[test]
fn walsh_route_matches_the_ito_oracle_for_cell_constant_integrands() {
    // For a cell-constant integrand, the stochastic operational matrix must
    // reproduce the left/midpoint hybrid Ito sums on the same grid to
    // roundoff, at every cell midpoint.
    let res = Resolution::new(16).unwrap();
    let m = res.m();
    let tw = walsh_matrix(res);
    for seed in [3u64, 17, 92] {
        let path = BrownianPath::generate(seed, res);
        let lambda_s = stochastic_matrix(&path).walsh_form(&tw).unwrap();

        // A fixed cell-constant integrand.
        let levels: Vec<f64> = (0..m).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
        let per_cell = levels.clone();
        let coeffs = cell_integrals_1d(
            move |t| per_cell[(t * m as f64) as usize],
            res,
            Quadrature::default(),
        );

        let mut half_step_values = vec![0.0; 2 * m];
        for (i, &v) in levels.iter().enumerate() {
            half_step_values[2 * i] = v;
            half_step_values[2 * i + 1] = v;
        }

        for j in 0..m {
            let t = res.cell_midpoint(j);
            let w_t = nalgebra::DVector::from_fn(m, |i, _| {
                f64::from(svfie::basis::walsh_eval(i, t).unwrap())
            });
            let via_matrix = (coeffs.values().transpose() * tw.to_f64() * &lambda_s * w_t)[0];
            let via_oracle = ito_oracle(&half_step_values, &path, t).unwrap();
            assert!(
                (via_matrix - via_oracle).abs() <= 1e-11,
                "seed={seed} cell={j}: {via_matrix} vs {via_oracle}"
            );
        }
    }
}
