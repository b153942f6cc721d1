//! Rademacher, Walsh, and block-pulse bases on the unit interval.
//!
//! The unit interval is split into `m = 2^k` cells of width `h = 1/m`. Block
//! pulse functions (BPFs) are the indicators of those cells; the first `m`
//! Walsh functions are products of Rademacher square waves and are constant
//! on every cell. Both systems are connected by the Walsh matrix `T_W` with
//! entries `w_i(eta_j)` at the cell midpoints `eta_j`, which satisfies
//! `T_W = T_W^T` and `T_W * T_W = m * I` exactly in integer arithmetic.
//!
//! Functions are represented by their vector of *cell integrals* (and kernels
//! by cell double-integrals), so the piecewise-constant reconstruction of a
//! coefficient vector multiplies by `m` to recover the cell mean.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dyadic resolution of the unit interval: `m = 2^k` cells of width `h = 1/m`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Resolution {
    m: usize,
    exponent: u32,
}

impl Resolution {
    /// Builds a resolution with `m` cells. Rejects `m` that is not a power of
    /// two: Walsh functions are not cell-constant on non-dyadic grids.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        Ok(Self {
            m,
            exponent: m.trailing_zeros(),
        })
    }

    /// The resolution with `2^k` cells.
    pub fn from_exponent(k: u32) -> Self {
        Self {
            m: 1usize << k,
            exponent: k,
        }
    }

    /// Number of cells.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cell width `h = 1/m`, exact as a dyadic rational.
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `log2(m)`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Index of the cell containing `t`, i.e. `floor(m * t)`.
    pub fn cell_of(&self, t: f64) -> Result<usize> {
        check_unit(t)?;
        Ok(((t * self.m as f64) as usize).min(self.m - 1))
    }

    /// Midpoint of cell `j`.
    pub fn cell_midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }
}

fn check_unit(t: f64) -> Result<()> {
    if t >= 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideUnitInterval(t))
    }
}

/// The `i`-th Rademacher square wave at `t`.
///
/// `r_0` is identically 1; for `i >= 1` the value is `(-1)^floor(2^i * t)`,
/// which agrees with the sign of `sin(2^i * pi * t)` everywhere except the
/// dyadic breakpoints, where it resolves by right-continuity and never
/// returns 0.
pub fn rademacher(i: u32, t: f64) -> Result<i32> {
    check_unit(t)?;
    if i == 0 {
        return Ok(1);
    }
    // 2^i * t is exact in f64 (exponent shift), so the floor parity is exact.
    let x = (t * 2f64.powi(i as i32)).floor();
    Ok(if x % 2.0 == 0.0 { 1 } else { -1 })
}

/// The `n`-th Walsh function at `t`, in Paley (dyadic) ordering.
///
/// Writing `n = b_q 2^{q-1} + ... + b_1 2^0`, the value is the product of
/// `rademacher(j, t)` over the set digits `b_j`. `n = 0` is the empty
/// product, identically 1.
pub fn walsh_eval(n: usize, t: f64) -> Result<i32> {
    check_unit(t)?;
    let mut sign = 1i32;
    let mut bits = n;
    let mut digit = 1u32; // bit 2^0 of n selects r_1
    while bits != 0 {
        if bits & 1 == 1 {
            sign *= rademacher(digit, t)?;
        }
        bits >>= 1;
        digit += 1;
    }
    Ok(sign)
}

/// The `m x m` matrix `T_W` with `entries[i][j] = w_i(eta_j)`, `eta_j` the
/// midpoint of cell `j`. Maps between BPF and Walsh representations:
/// `W(t) = T_W * Phi(t)` and `Phi(t) = (1/m) * T_W * W(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalshMatrix {
    res: Resolution,
    entries: DMatrix<i32>,
}

impl WalshMatrix {
    /// Evaluates the first `m` Walsh functions at the `m` cell midpoints.
    pub fn new(res: Resolution) -> Self {
        let m = res.m();
        let entries = DMatrix::from_fn(m, m, |i, j| {
            walsh_eval(i, res.cell_midpoint(j)).expect("cell midpoints lie in [0, 1)")
        });
        Self { res, entries }
    }

    pub fn res(&self) -> Resolution {
        self.res
    }

    /// Entry `w_i(eta_j)`, always +1 or -1.
    pub fn entry(&self, i: usize, j: usize) -> i32 {
        self.entries[(i, j)]
    }

    /// Exact integer entries.
    pub fn as_integer_matrix(&self) -> &DMatrix<i32> {
        &self.entries
    }

    /// Entries converted to `f64` for use in floating-point products.
    pub fn to_f64(&self) -> DMatrix<f64> {
        self.entries.map(f64::from)
    }
}

/// See [`WalshMatrix::new`].
pub fn walsh_matrix(res: Resolution) -> WalshMatrix {
    WalshMatrix::new(res)
}

/// Fixed-order Gauss-Legendre quadrature, applied per cell.
///
/// Order `n` integrates polynomials up to degree `2n - 1` exactly, so the
/// default order 5 is exact for the polynomial kernels used in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadrature {
    order: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { order: 5 }
    }
}

impl Quadrature {
    /// Gauss-Legendre rule with `order` nodes per cell.
    pub fn gauss_legendre(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes and weights on `[-1, 1]`.
    pub(crate) fn nodes_weights(&self) -> (Vec<f64>, Vec<f64>) {
        legendre_nodes_weights(self.order)
    }

    /// `\int_a^b f` by a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let (nodes, weights) = self.nodes_weights();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// Gauss-Legendre nodes/weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence. Converges to machine precision in a handful of steps.
fn legendre_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-like initial guess for the (k+1)-th root.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Cell-integral coefficients of a scalar function:
/// `values[i] = \int_{ih}^{(i+1)h} f(s) ds`. The BPF mean on cell `i` is
/// `m * values[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector {
    res: Resolution,
    values: DVector<f64>,
}

impl CoeffVector {
    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Mean of the represented function over cell `j`.
    pub fn cell_mean(&self, j: usize) -> f64 {
        self.values[j] * self.res.m() as f64
    }

    /// Piecewise-constant reconstruction `m * values[floor(m t)]`.
    ///
    /// This equals the matrix form coefficients-through-`T_W` evaluation
    /// because `T_W * T_W = m I` collapses the Walsh expansion back to the
    /// BPF staircase.
    pub fn reconstruct(&self, t: f64) -> Result<f64> {
        let j = self.res.cell_of(t)?;
        Ok(self.cell_mean(j))
    }

    /// Walsh-side coefficients `c = T_W * values`, i.e.
    /// `c_i = \int_0^1 f(s) w_i(s) ds` for a cell-constant integrand.
    pub fn walsh_coefficients(&self, walsh: &WalshMatrix) -> DVector<f64> {
        walsh.to_f64() * &self.values
    }
}

/// Integrates `f` over every cell with the given quadrature rule.
pub fn cell_integrals_1d<F>(f: F, res: Resolution, quad: Quadrature) -> CoeffVector
where
    F: Fn(f64) -> f64,
{
    let (nodes, weights) = quad.nodes_weights();
    let h = res.h();
    let half = 0.5 * h;
    let values = DVector::from_fn(res.m(), |i, _| {
        let mid = (i as f64 + 0.5) * h;
        let mut sum = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    });
    CoeffVector { res, values }
}

/// Cell double-integral coefficients of a kernel:
/// `values[(i, j)] = \int_{ih}^{(i+1)h} \int_{jh}^{(j+1)h} k(s, t) dt ds`
/// (`s` ranges over cell `i`, `t` over cell `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    res: Resolution,
    values: DMatrix<f64>,
}

impl CoeffMatrix {
    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }
}

/// Integrates `k(s, t)` over every cell pair with a tensor Gauss-Legendre
/// rule.
pub fn cell_integrals_2d<K>(k: K, res: Resolution, quad: Quadrature) -> CoeffMatrix
where
    K: Fn(f64, f64) -> f64,
{
    let (nodes, weights) = quad.nodes_weights();
    let h = res.h();
    let half = 0.5 * h;
    let values = DMatrix::from_fn(res.m(), res.m(), |i, j| {
        let s_mid = (i as f64 + 0.5) * h;
        let t_mid = (j as f64 + 0.5) * h;
        let mut sum = 0.0;
        for (xs, ws) in nodes.iter().zip(&weights) {
            let s = s_mid + half * xs;
            let mut inner = 0.0;
            for (xt, wt) in nodes.iter().zip(&weights) {
                inner += wt * k(s, t_mid + half * xt);
            }
            sum += ws * inner;
        }
        sum * half * half
    });
    CoeffMatrix { res, values }
}
