//! Seeded Brownian paths on the half-step grid and an independent
//! Ito-integral oracle.
//!
//! Paths are sampled at step `h/2` (not `h`): the stochastic operational
//! matrix needs Brownian values at both the cell boundaries and the cell
//! midpoints, and sampling the finer grid gives exact entries without
//! interpolation. Every path is a pure function of `(seed, m)`, so whole
//! Monte Carlo runs replay bit-identically from one master seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::basis::Resolution;
use crate::error::{Error, Result};

/// A Brownian motion sample `B(j * h/2)` for `j = 0..=2m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    res: Resolution,
    seed: Option<u64>,
    values: Vec<f64>,
}

impl BrownianPath {
    /// Draws a path from a dedicated ChaCha12 stream. Increments are
    /// `Normal(0, h/2)`; the same `(seed, m)` always reproduces the same
    /// values bit for bit.
    pub fn generate(seed: u64, res: Resolution) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let step_sd = (res.h() / 2.0).sqrt();
        let steps = 2 * res.m();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(0.0);
        let mut current = 0.0;
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            current += step_sd * z;
            values.push(current);
        }
        Self {
            res,
            seed: Some(seed),
            values,
        }
    }

    /// The identically-zero path. Useful for deterministic reductions.
    pub fn zero(res: Resolution) -> Self {
        Self {
            res,
            seed: None,
            values: vec![0.0; 2 * res.m() + 1],
        }
    }

    /// Wraps raw grid values (length `2m + 1`, starting at 0).
    pub fn from_values(res: Resolution, values: Vec<f64>) -> Result<Self> {
        let expected = 2 * res.m() + 1;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::NonzeroOrigin(values[0]));
        }
        Ok(Self {
            res,
            seed: None,
            values,
        })
    }

    pub fn res(&self) -> Resolution {
        self.res
    }

    /// Seed the path was generated from, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// All grid values `B(j * h/2)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `B(i * h)`, the start of cell `i`.
    pub fn at_cell_start(&self, i: usize) -> f64 {
        self.values[2 * i]
    }

    /// `B((2i + 1) * h / 2)`, the midpoint of cell `i`.
    pub fn at_cell_mid(&self, i: usize) -> f64 {
        self.values[2 * i + 1]
    }

    /// `B(1)`.
    pub fn terminal(&self) -> f64 {
        self.values[2 * self.res.m()]
    }

    /// `B(t)` for `t` on the half-step grid.
    pub fn at_time(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid_index(t)?])
    }

    /// Index of `t` on the half-step grid; `t` must be an exact multiple of
    /// `h/2` in `[0, 1]`.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let steps = (2 * self.res.m()) as f64;
        let g = t * steps;
        if !(0.0..=steps).contains(&g) || g.fract() != 0.0 {
            return Err(Error::OffGrid(t));
        }
        Ok(g as usize)
    }
}

/// Left-point Ito sum over the half-step grid:
/// `sum_j f(s_j) * (B(s_{j+1}) - B(s_j))` for `s_j < t`.
///
/// `step_values` holds the integrand value on each of the `2m` half-cells.
/// This is the validation oracle every operational-matrix entry is checked
/// against; it never goes through the matrix machinery.
pub fn ito_oracle(step_values: &[f64], path: &BrownianPath, t: f64) -> Result<f64> {
    let steps = 2 * path.res().m();
    if step_values.len() != steps {
        return Err(Error::DimensionMismatch {
            expected: steps,
            found: step_values.len(),
        });
    }
    let end = path.grid_index(t)?;
    let values = path.values();
    let mut sum = 0.0;
    for j in 0..end {
        sum += step_values[j] * (values[j + 1] - values[j]);
    }
    Ok(sum)
}

/// Derives one seed per path index from a master seed.
///
/// The derivation is the SplitMix64 output function applied to
/// `master + (index + 1) * GOLDEN`; both stages are bijections on `u64`, so
/// distinct indices always receive distinct seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedPlan {
    master_seed: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl SeedPlan {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Seed for path `path_index`.
    pub fn seed_for(&self, path_index: u64) -> u64 {
        splitmix64_mix(
            self.master_seed
                .wrapping_add(path_index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }
}

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
