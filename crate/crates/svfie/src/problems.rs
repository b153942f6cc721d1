//! Problem instances: the data of one linear stochastic Volterra-Fredholm
//! integral equation
//!
//! ```text
//! x(t) = f(t) + \int_a^b k(s,t) x(s) ds + \int_0^t k1(s,t) x(s) ds
//!             + \int_0^t k2(s,t) x(s) dB(s)
//! ```
//!
//! plus a registry of built-in instances used throughout the test and
//! benchmark suites. Instances with a known deterministic solution carry it
//! along and are self-checked by substitution.

use std::fmt;
use std::sync::Arc;

use crate::basis::Quadrature;
use crate::error::{Error, Result};

/// Scalar function of time.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Kernel of two variables `(s, t)`.
pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Additive per-path forcing perturbation `(t, B(t)) -> value`.
pub type NoiseFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// One equation instance. Immutable; clones share the underlying closures.
#[derive(Clone)]
pub struct SvfieProblem {
    name: String,
    f: ScalarFn,
    fredholm_kernel: KernelFn,
    volterra_kernel: KernelFn,
    stochastic_kernel: KernelFn,
    alpha: f64,
    beta: f64,
    noise_term: Option<NoiseFn>,
    exact_deterministic: Option<ScalarFn>,
}

impl SvfieProblem {
    /// A problem with Fredholm limits `[0, 1]`, no noise, and no known
    /// solution. Use the `with_*` methods to fill those in.
    pub fn new<F, K, K1, K2>(name: &str, f: F, k: K, k1: K1, k2: K2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        K: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        K1: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        K2: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_owned(),
            f: Arc::new(f),
            fredholm_kernel: Arc::new(k),
            volterra_kernel: Arc::new(k1),
            stochastic_kernel: Arc::new(k2),
            alpha: 0.0,
            beta: 1.0,
            noise_term: None,
            exact_deterministic: None,
        }
    }

    /// Restricts the Fredholm integral to `[alpha, beta]`.
    pub fn with_fredholm_limits(mut self, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || !(alpha..=1.0).contains(&beta) || alpha >= beta {
            return Err(Error::InvalidFredholmLimits { alpha, beta });
        }
        self.alpha = alpha;
        self.beta = beta;
        Ok(self)
    }

    /// Adds a per-path additive perturbation of the forcing term.
    pub fn with_noise<N>(mut self, noise: N) -> Self
    where
        N: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.noise_term = Some(Arc::new(noise));
        self
    }

    /// Records the exact solution of the deterministic reduction
    /// (stochastic kernel and noise ignored).
    pub fn with_exact_deterministic<X>(mut self, exact: X) -> Self
    where
        X: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.exact_deterministic = Some(Arc::new(exact));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn fredholm_kernel(&self, s: f64, t: f64) -> f64 {
        (self.fredholm_kernel)(s, t)
    }

    pub fn volterra_kernel(&self, s: f64, t: f64) -> f64 {
        (self.volterra_kernel)(s, t)
    }

    pub fn stochastic_kernel(&self, s: f64, t: f64) -> f64 {
        (self.stochastic_kernel)(s, t)
    }

    /// Fredholm limits `(alpha, beta)`.
    pub fn fredholm_limits(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    pub fn has_noise(&self) -> bool {
        self.noise_term.is_some()
    }

    /// Noise contribution at `(t, B(t))`; zero when the problem has none.
    pub fn noise(&self, t: f64, brownian_value: f64) -> f64 {
        match &self.noise_term {
            Some(noise) => noise(t, brownian_value),
            None => 0.0,
        }
    }

    /// Exact solution of the deterministic reduction, when known.
    pub fn exact_deterministic(&self) -> Option<&ScalarFn> {
        self.exact_deterministic.as_ref()
    }
}

impl fmt::Debug for SvfieProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SvfieProblem")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("has_noise", &self.noise_term.is_some())
            .field("has_exact", &self.exact_deterministic.is_some())
            .finish()
    }
}

/// Lipschitz constants and uniform bounds feeding the a-priori error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityConstants {
    /// Lipschitz constant of the forcing term.
    pub c: f64,
    /// Lipschitz constants of the Fredholm, Volterra, and stochastic kernels.
    pub l: f64,
    pub l1: f64,
    pub l2: f64,
    /// Uniform bounds of the three kernels.
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Uniform bound of the solution.
    pub sigma: f64,
}

impl RegularityConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("C", self.c),
            ("L", self.l),
            ("L1", self.l1),
            ("L2", self.l2),
            ("rho", self.rho),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("sigma", self.sigma),
        ] {
            if !(value >= 0.0) {
                return Err(Error::NegativeConstant { name, value });
            }
        }
        Ok(())
    }
}

/// Names of all built-in problems, in registry order.
pub const REGISTRY_NAMES: [&str; 5] = [
    "const_fredholm",
    "example1",
    "example1_det",
    "example2",
    "example2_det",
];

/// Looks up a built-in problem by name.
///
/// * `const_fredholm` - pure Fredholm equation with constant data and exact
///   solution `x = 2`; solved exactly at any resolution.
/// * `example1` - kernels `cos(s+t)`, `s+t`, `e^{-3(s+t)}` with forcing
///   `t^2 + sin(1+t) - 2cos(1+t) - 2sin(t) - 7t^4/12` and noise `B(t)/40`.
/// * `example1_det` - deterministic reduction of `example1`; exact solution
///   `t^2` (verified by substitution in the test suite).
/// * `example2` - kernels `s+t`, `s-t`, `sin(s+t)/125` with forcing
///   `2 - cos(1) - (1+t) sin(1)` and noise `sin(B(t))/250`.
/// * `example2_det` - deterministic reduction of `example2`; exact solution
///   `cos(t)`.
pub fn registry_get(name: &str) -> Result<SvfieProblem> {
    match name {
        "const_fredholm" => Ok(SvfieProblem::new(
            "const_fredholm",
            |_| 1.0,
            |_, _| 0.5,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .with_exact_deterministic(|_| 2.0)),
        "example1" => Ok(example1_base().with_noise(|_, b| b / 40.0)),
        "example1_det" => {
            let base = example1_base();
            Ok(SvfieProblem::new(
                "example1_det",
                move |t| base.f(t),
                |s, t| (s + t).cos(),
                |s, t| s + t,
                |_, _| 0.0,
            )
            .with_exact_deterministic(|t| t * t))
        }
        "example2" => Ok(example2_base().with_noise(|_, b| b.sin() / 250.0)),
        "example2_det" => {
            let base = example2_base();
            Ok(SvfieProblem::new(
                "example2_det",
                move |t| base.f(t),
                |s, t| s + t,
                |s, t| s - t,
                |_, _| 0.0,
            )
            .with_exact_deterministic(f64::cos))
        }
        other => Err(Error::UnknownProblem(other.to_owned())),
    }
}

fn example1_base() -> SvfieProblem {
    SvfieProblem::new(
        "example1",
        // The t^4 and trigonometric terms cancel the Volterra and Fredholm
        // contributions of x(t) = t^2 exactly.
        |t| {
            t * t + (1.0 + t).sin() - 2.0 * (1.0 + t).cos() - 2.0 * t.sin()
                - 7.0 * t.powi(4) / 12.0
        },
        |s, t| (s + t).cos(),
        |s, t| s + t,
        |s, t| (-3.0 * (s + t)).exp(),
    )
}

fn example2_base() -> SvfieProblem {
    SvfieProblem::new(
        "example2",
        |t| 2.0 - 1f64.cos() - (1.0 + t) * 1f64.sin(),
        |s, t| s + t,
        |s, t| s - t,
        |s, t| (s + t).sin() / 125.0,
    )
}

/// Maximum defect of `candidate` as a solution of the deterministic
/// reduction (stochastic terms ignored), probed at `n_check` points:
///
/// `max_t |candidate(t) - f(t) - \int_a^b k candidate - \int_0^t k1 candidate|`
///
/// Integrals use composite Gauss-Legendre of order 20, accurate far beyond
/// the solver's own tolerance, so this doubles as an independent check of
/// every registered exact solution.
pub fn deterministic_residual<C>(problem: &SvfieProblem, candidate: C, n_check: usize) -> f64
where
    C: Fn(f64) -> f64,
{
    let quad = Quadrature::gauss_legendre(20);
    let (alpha, beta) = problem.fredholm_limits();
    let mut worst = 0.0f64;
    for i in 0..n_check {
        let t = (i as f64 + 0.5) / n_check as f64;
        let fredholm = composite_integral(
            |s| problem.fredholm_kernel(s, t) * candidate(s),
            alpha,
            beta,
            quad,
        );
        let volterra = composite_integral(
            |s| problem.volterra_kernel(s, t) * candidate(s),
            0.0,
            t,
            quad,
        );
        let defect = candidate(t) - problem.f(t) - fredholm - volterra;
        worst = worst.max(defect.abs());
    }
    worst
}

/// Composite quadrature over `[a, b]`, at least one panel, roughly 32 panels
/// on the unit interval.
fn composite_integral<F>(f: F, a: f64, b: f64, quad: Quadrature) -> f64
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) * 32.0).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let left = a + p as f64 * width;
            quad.integrate(&f, left, left + width)
        })
        .sum()
}
