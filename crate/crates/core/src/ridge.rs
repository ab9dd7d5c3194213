//! Ridge-regularized linear least squares with an unpenalized intercept.
//!
//! The description-based prioritizers fit every label scheme on the same design
//! matrix, so the factorization is computed once per feature set and reused
//! for every label vector. The solver picks the primal (d × d) or dual (n × n)
//! normal equations, whichever is smaller.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::features::FeatureVector;

pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone)]
enum Factor {
    /// (XcᵀXc + λI) w = Xcᵀ yc
    Primal {
        chol: Cholesky<f64, Dyn>,
        mean: Vec<f64>,
    },
    /// (XcXcᵀ + λI) a = yc, predictions Xc Xcᵀ a
    Dual {
        chol: Cholesky<f64, Dyn>,
        gram: DMatrix<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct RidgeSolver {
    rows: Vec<FeatureVector>,
    factor: Factor,
}

impl RidgeSolver {
    pub fn new(rows: &[FeatureVector], lambda: f64) -> Self {
        assert!(lambda > 0.0, "ridge strength must be positive");
        let n = rows.len();
        let d = rows.first().map_or(0, FeatureVector::dim);
        let mut mean = vec![0.0; d];
        for r in rows {
            for &(j, v) in r.entries() {
                mean[j] += v;
            }
        }
        if n > 0 {
            mean.iter_mut().for_each(|m| *m /= n as f64);
        }

        let factor = if d <= n {
            // XᵀX − n μμᵀ + λI
            let mut a = DMatrix::<f64>::zeros(d, d);
            for r in rows {
                let e = r.entries();
                for &(i, vi) in e {
                    for &(j, vj) in e {
                        a[(i, j)] += vi * vj;
                    }
                }
            }
            for i in 0..d {
                for j in 0..d {
                    a[(i, j)] -= n as f64 * mean[i] * mean[j];
                }
                a[(i, i)] += lambda;
            }
            Factor::Primal {
                chol: Cholesky::new(a).expect("λI makes the system positive definite"),
                mean,
            }
        } else {
            // centered Gram matrix: K − row means − column means + grand mean
            let mut k = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rows[i].dot(&rows[j]);
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
            }
            let row_mean: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
            let grand = row_mean.iter().sum::<f64>() / n as f64;
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] += grand - row_mean[i] - row_mean[j];
                }
            }
            let mut a = k.clone();
            for i in 0..n {
                a[(i, i)] += lambda;
            }
            Factor::Dual {
                chol: Cholesky::new(a).expect("λI makes the system positive definite"),
                gram: k,
            }
        };
        Self {
            rows: rows.to_vec(),
            factor,
        }
    }

    /// In-sample predictions for `labels` (one per row).
    pub fn predict(&self, labels: &[f64]) -> Vec<f64> {
        let n = self.rows.len();
        assert_eq!(labels.len(), n);
        if n == 0 {
            return Vec::new();
        }
        let y_mean = labels.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_iterator(n, labels.iter().map(|y| y - y_mean));
        match &self.factor {
            Factor::Primal { chol, mean } => {
                let d = mean.len();
                // Xcᵀ yc = Xᵀ yc since Σ yc = 0
                let mut rhs = DVector::<f64>::zeros(d);
                for (r, &y) in self.rows.iter().zip(yc.iter()) {
                    for &(j, v) in r.entries() {
                        rhs[j] += v * y;
                    }
                }
                let w = chol.solve(&rhs);
                let offset: f64 = mean.iter().zip(w.iter()).map(|(m, w)| m * w).sum();
                self.rows
                    .iter()
                    .map(|r| y_mean + r.dot_dense(w.as_slice()) - offset)
                    .collect()
            }
            Factor::Dual { chol, gram } => {
                let a = chol.solve(&yc);
                let fitted = gram * a;
                fitted.iter().map(|f| y_mean + f).collect()
            }
        }
    }
}
