//! Regression sample: response vector and design matrix.

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, Mat};

/// A fixed regression sample `(X, y)` with `n` observations and `p`
/// covariates. Columns are stored contiguously because the coordinate
/// descent inner loop walks one column at a time.
///
/// Construction validates the invariants the solver relies on: at least two
/// observations, finite entries throughout, and a strictly positive sum of
/// squares in every column.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    p: usize,
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
    col_sq: Vec<f64>,
}

impl Dataset {
    /// Build from column vectors of the design matrix.
    pub fn from_cols(cols: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let p = cols.len();
        if p == 0 {
            return Err(invalid("design matrix needs at least one column"));
        }
        let n = y.len();
        if n < 2 {
            return Err(invalid("need at least two observations"));
        }
        for (j, c) in cols.iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                    what: "design column length",
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("design matrix"));
            }
            let sq = dot(c, c);
            if !(sq.is_finite() && sq > 0.0) {
                return Err(invalid(format!(
                    "column {j} has zero or non-finite sum of squares"
                )));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response vector"));
        }
        let col_sq = cols.iter().map(|c| dot(c, c)).collect();
        Ok(Dataset {
            n,
            p,
            cols,
            y,
            col_sq,
        })
    }

    /// Build from observation rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("need at least two observations"));
        }
        let p = rows[0].len();
        let mut cols = vec![Vec::with_capacity(rows.len()); p];
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: r.len(),
                    what: "design row length",
                });
            }
            for (j, &v) in r.iter().enumerate() {
                cols[j].push(v);
            }
        }
        Dataset::from_cols(cols, y)
    }

    /// Same design, different response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
                what: "response length",
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response vector"));
        }
        Ok(Dataset {
            n: self.n,
            p: self.p,
            cols: self.cols.clone(),
            y,
            col_sq: self.col_sq.clone(),
        })
    }

    /// Row and response subset, in the order given (indices may repeat).
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let cols = self
            .cols
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect();
        let y = idx.iter().map(|&i| self.y[i]).collect();
        Dataset::from_cols(cols, y)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    #[inline]
    pub fn col_sq(&self, j: usize) -> f64 {
        self.col_sq[j]
    }

    pub fn x_row(&self, i: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[i]).collect()
    }

    /// `X_i' beta` for observation `i`.
    #[inline]
    pub fn row_dot(&self, i: usize, beta: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.p {
            s += self.cols[j][i] * beta[j];
        }
        s
    }

    /// Fitted values `X beta`.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.p);
        let mut out = vec![0.0; self.n];
        for j in 0..self.p {
            let b = beta[j];
            if b == 0.0 {
                continue;
            }
            let c = &self.cols[j];
            for i in 0..self.n {
                out[i] += c[i] * b;
            }
        }
        out
    }

    /// Residuals `y - X beta`.
    pub fn residuals(&self, beta: &[f64]) -> Vec<f64> {
        let fit = self.predict(beta);
        self.y.iter().zip(fit).map(|(yi, fi)| yi - fi).collect()
    }

    /// `n^{-1} X'X`.
    pub fn normalized_gram(&self) -> Mat {
        let mut g = Mat::zeros(self.p, self.p);
        for a in 0..self.p {
            for b in a..self.p {
                let v = dot(&self.cols[a], &self.cols[b]) / self.n as f64;
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        g
    }
}
