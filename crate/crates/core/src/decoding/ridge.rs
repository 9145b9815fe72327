use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, Par, Side};
use serde::{Deserialize, Serialize};

use super::lagged::LaggedDesignMatrix;
use super::Decoder;
use crate::error::{Error, Result};
use crate::signal::Envelope;

/// Quality of a ridge fit at the returned weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `(|s - R d|^2 + lambda |d|^2) / T`.
    pub regularized_mse: f64,
    /// Euclidean norm of the gradient of `regularized_mse` at `d`.
    pub residual_gradient_norm: f64,
}

/// Accumulated normal equations `G = R^T R`, `b = R^T s` of one or more
/// trials. Solving for several regularization values reuses `G`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    gram: Mat<f64>,
    rhs: Mat<f64>,
    samples: usize,
}

impl NormalEquations {
    pub fn from_design(design: &LaggedDesignMatrix, s: &Envelope) -> Result<Self> {
        let r = design.values();
        if s.len() != r.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "envelope has {} samples, design matrix {} rows",
                s.len(),
                r.nrows()
            )));
        }
        let p = r.ncols();
        let mut gram = Mat::<f64>::zeros(p, p);
        triangular::matmul(
            gram.as_mut(),
            BlockStructure::TriangularLower,
            Accum::Replace,
            r.transpose(),
            BlockStructure::Rectangular,
            r,
            BlockStructure::Rectangular,
            1.0,
            Par::Seq,
        );
        for j in 0..p {
            for i in 0..j {
                gram[(i, j)] = gram[(j, i)];
            }
        }
        let s_col = Mat::<f64>::from_fn(s.len(), 1, |i, _| s.samples()[i]);
        let rhs = r.transpose() * &s_col;
        Ok(Self {
            gram,
            rhs,
            samples: r.nrows(),
        })
    }

    /// Adds another trial's equations, as if its rows were appended.
    pub fn accumulate(&mut self, other: &NormalEquations) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}-column system to {}-column system",
                other.dim(),
                self.dim()
            )));
        }
        self.gram += &other.gram;
        self.rhs += &other.rhs;
        self.samples += other.samples;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn gram(&self) -> &Mat<f64> {
        &self.gram
    }

    /// `R^T s` as a plain vector.
    pub fn rhs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rhs[(i, 0)]).collect()
    }

    /// Solves `(G + lambda I) d = b` by Cholesky factorization.
    pub fn solve(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let p = self.dim();
        let mut a = self.gram.clone();
        for i in 0..p {
            a[(i, i)] += lambda;
        }
        let llt = a.llt(Side::Lower).map_err(|e| match e {
            faer::linalg::solvers::LltError::NonPositivePivot { index } => Error::SingularSystem { index, pivot: 0.0 },
        })?;
        if lambda == 0.0 {
            let l = llt.L();
            let (index, pivot) = (0..p)
                .map(|i| (i, l[(i, i)] * l[(i, i)]))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("non-empty system");
            let scale = (0..p).map(|i| self.gram[(i, i)]).fold(0.0, f64::max);
            if pivot <= p as f64 * f64::EPSILON * scale {
                return Err(Error::SingularSystem { index, pivot });
            }
        }
        let d = llt.solve(&self.rhs);
        Ok((0..p).map(|i| d[(i, 0)]).collect())
    }

    /// `(G + lambda I) d - b`.
    pub fn residual(&self, d: &[f64], lambda: f64) -> Vec<f64> {
        let p = self.dim();
        (0..p)
            .map(|i| {
                let gd: f64 = (0..p).map(|j| self.gram[(i, j)] * d[j]).sum();
                gd + lambda * d[i] - self.rhs[(i, 0)]
            })
            .collect()
    }
}

/// Tikhonov-regularized least-squares decoder for one design matrix.
pub fn fit_decoder(design: &LaggedDesignMatrix, s: &Envelope, lambda: f64) -> Result<(Decoder, FitDiagnostics)> {
    let eq = NormalEquations::from_design(design, s)?;
    let d = eq.solve(lambda)?;
    let diagnostics = diagnostics(design, s, &eq, &d, lambda)?;
    let decoder = Decoder::from_column_vector(&d, design.lags(), design.channels(), lambda)?;
    Ok((decoder, diagnostics))
}

fn diagnostics(
    design: &LaggedDesignMatrix,
    s: &Envelope,
    eq: &NormalEquations,
    d: &[f64],
    lambda: f64,
) -> Result<FitDiagnostics> {
    let fitted = design.multiply(d)?;
    let t = s.len() as f64;
    let sse: f64 = s.samples().iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let penalty: f64 = lambda * d.iter().map(|w| w * w).sum::<f64>();
    let grad_norm = eq
        .residual(d, lambda)
        .iter()
        .map(|g| (2.0 * g / t).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitDiagnostics {
        regularized_mse: (sse + penalty) / t,
        residual_gradient_norm: grad_norm,
    })
}
