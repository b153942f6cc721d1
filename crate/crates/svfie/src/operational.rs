//! Operational matrices: deterministic integration, per-path stochastic
//! integration, and their Walsh conjugates.
//!
//! In the BPF basis, running integration of the basis vector is the
//! upper-triangular matrix `P` (diagonal `h/2`, strict upper triangle `h`),
//! and Ito integration against a fixed Brownian path is the upper-triangular
//! `P_S` built from path increments. Conjugating either by the Walsh matrix,
//! `(1/m) T_W M T_W`, transports it to the Walsh basis.

use nalgebra::DMatrix;

use crate::basis::{Resolution, WalshMatrix};
use crate::error::{Error, Result};
use crate::stochastic::BrownianPath;

/// BPF integration matrix `P`: `\int_0^t Phi(s) ds = P Phi(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationMatrix {
    res: Resolution,
    values: DMatrix<f64>,
}

impl IntegrationMatrix {
    pub fn res(&self) -> Resolution {
        self.res
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Walsh-basis integration operator `(1/m) T_W P T_W`.
    pub fn walsh_form(&self, walsh: &WalshMatrix) -> Result<DMatrix<f64>> {
        walsh_conjugate(walsh, &self.values)
    }
}

/// Builds `P` for the given resolution. The running integral of the cell-`i`
/// indicator, evaluated at the midpoint of cell `j`, is `h/2` for `j = i`,
/// `h` for `j > i` and `0` before the cell, which is exactly the matrix
/// layout.
pub fn integration_matrix(res: Resolution) -> IntegrationMatrix {
    let h = res.h();
    let values = DMatrix::from_fn(res.m(), res.m(), |i, j| {
        if j > i {
            h
        } else if j == i {
            h / 2.0
        } else {
            0.0
        }
    });
    IntegrationMatrix { res, values }
}

/// Per-path stochastic integration matrix `P_S`:
/// `\int_0^t Phi(s) dB(s) = P_S Phi(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    res: Resolution,
    path_seed: Option<u64>,
    values: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn res(&self) -> Resolution {
        self.res
    }

    /// Seed of the path this matrix was built from, if the path had one.
    pub fn path_seed(&self) -> Option<u64> {
        self.path_seed
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Walsh-basis stochastic operator `(1/m) T_W P_S T_W`.
    pub fn walsh_form(&self, walsh: &WalshMatrix) -> Result<DMatrix<f64>> {
        walsh_conjugate(walsh, &self.values)
    }
}

/// Builds `P_S` from a Brownian path sampled on the half-step grid.
///
/// Row `i` holds the Ito integrals of the cell-`i` indicator: the diagonal
/// entry is `B((2i+1)h/2) - B(ih)` (the increment up to the midpoint of the
/// active cell), entries right of the diagonal are the full-cell increment
/// `B((i+1)h) - B(ih)`, and everything below the diagonal is zero.
pub fn stochastic_matrix(path: &BrownianPath) -> StochasticMatrix {
    let res = path.res();
    let values = DMatrix::from_fn(res.m(), res.m(), |i, j| {
        if j > i {
            path.at_cell_start(i + 1) - path.at_cell_start(i)
        } else if j == i {
            path.at_cell_mid(i) - path.at_cell_start(i)
        } else {
            0.0
        }
    });
    StochasticMatrix {
        res,
        path_seed: path.seed(),
        values,
    }
}

/// Conjugation `(1/m) T_W M T_W` that moves a BPF-basis operator to the
/// Walsh basis (and back: the map is an involution because `T_W T_W = mI`).
pub fn walsh_conjugate(walsh: &WalshMatrix, matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = walsh.res().m();
    if matrix.nrows() != m || matrix.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if matrix.nrows() != m {
                matrix.nrows()
            } else {
                matrix.ncols()
            },
        });
    }
    let tw = walsh.to_f64();
    Ok((&tw * matrix * &tw) / m as f64)
}
