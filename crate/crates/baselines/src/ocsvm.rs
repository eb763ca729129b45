//! One-class SVM trained on encoder features with a pairwise coordinate
//! (SMO-style) solver for the standard dual:
//!
//!   min 1/2 sum_ij alpha_i alpha_j K_ij
//!   s.t. 0 <= alpha_i <= 1/(nu n), sum_i alpha_i = 1
//!
//! Decision value f(x) = sum_i alpha_i k(x_i, x) - rho; negative values
//! are outliers, so the abnormality score is -f(x).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NU_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.5];

const ALPHA_EPS: f64 = 1e-12;
const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// gamma = 1 / (dim * pooled feature variance).
pub fn default_gamma(features: &[Vec<f64>]) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::Validation("no features".into()));
    }
    let dim = features[0].len();
    let n = (features.len() * dim) as f64;
    let mean: f64 = features.iter().flatten().sum::<f64>() / n;
    let var: f64 = features
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::DegenerateKernel(format!("feature variance {var}")));
    }
    Ok(1.0 / (dim as f64 * var))
}

#[derive(Debug, Clone)]
pub struct OcSvmModel {
    pub nu: f64,
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub rho: f64,
}

impl OcSvmModel {
    pub fn decision(&self, feat: &[f64]) -> f64 {
        let k: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, feat))
            .sum();
        k - self.rho
    }
}

/// Trains one model for a fixed nu.
pub fn train_ocsvm(features: &[Vec<f64>], nu: f64, kernel: Kernel) -> Result<OcSvmModel> {
    let n = features.len();
    if n == 0 {
        return Err(Error::Validation("no training features".into()));
    }
    if !(0.0 < nu && nu <= 1.0) {
        return Err(Error::Validation(format!("nu {nu} outside (0, 1]")));
    }

    // Kernel matrix.
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&features[i], &features[j]);
            if !v.is_finite() {
                return Err(Error::DegenerateKernel(format!("K[{i}][{j}] = {v}")));
            }
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    // libsvm-style feasible start: the first floor(nu n) points get the
    // box bound, the next takes the remainder.
    let c = 1.0 / (nu * n as f64);
    let mut alpha = vec![0.0; n];
    let full = (nu * n as f64).floor() as usize;
    let mut remaining = 1.0;
    for a in alpha.iter_mut().take(full.min(n)) {
        *a = c.min(remaining);
        remaining -= *a;
    }
    if remaining > 1e-12 {
        if full < n {
            alpha[full] = remaining;
        } else {
            return Err(Error::Validation("infeasible box constraints".into()));
        }
    } else if remaining > 0.0 {
        // Floating-point residue when nu*n is integral; fold it into the
        // last filled coordinate.
        alpha[full.min(n) - 1] += remaining;
    }

    // Gradient of the objective: g = K alpha.
    let mut g = vec![0.0; n];
    for i in 0..n {
        g[i] = (0..n).map(|j| k[i * n + j] * alpha[j]).sum();
    }

    let max_iter = 200 * n.max(100);
    let mut converged = false;
    for _ in 0..max_iter {
        // Most-violating pair: raise alpha where the gradient is lowest,
        // lower it where the gradient is highest.
        let mut up: Option<usize> = None;
        let mut down: Option<usize> = None;
        for i in 0..n {
            if alpha[i] < c - ALPHA_EPS && up.map(|u| g[i] < g[u]).unwrap_or(true) {
                up = Some(i);
            }
            if alpha[i] > ALPHA_EPS && down.map(|d| g[i] > g[d]).unwrap_or(true) {
                down = Some(i);
            }
        }
        let (i, j) = match (up, down) {
            (Some(i), Some(j)) if i != j => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        if g[j] - g[i] < VIOLATION_TOL {
            converged = true;
            break;
        }
        let eta = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
        let max_step = (c - alpha[i]).min(alpha[j]);
        let step = if eta > 1e-15 {
            ((g[j] - g[i]) / eta).min(max_step)
        } else {
            max_step
        };
        if step <= 0.0 {
            converged = true;
            break;
        }
        alpha[i] += step;
        alpha[j] -= step;
        for t in 0..n {
            g[t] += step * (k[t * n + i] - k[t * n + j]);
        }
    }
    if !converged {
        return Err(Error::NoConvergence(max_iter));
    }

    // rho from the free support vectors, or the midpoint of the feasible
    // interval when none are strictly inside the box.
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > ALPHA_EPS && alpha[i] < c - ALPHA_EPS)
        .collect();
    let rho = if !free.is_empty() {
        free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64
    } else {
        let lower = (0..n)
            .filter(|&i| alpha[i] >= c - ALPHA_EPS)
            .map(|i| g[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = (0..n)
            .filter(|&i| alpha[i] <= ALPHA_EPS)
            .map(|i| g[i])
            .fold(f64::INFINITY, f64::min);
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => (lower + upper) / 2.0,
            (true, false) => lower,
            (false, true) => upper,
            _ => 0.0,
        }
    };

    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for i in 0..n {
        if alpha[i] > ALPHA_EPS {
            support_vectors.push(features[i].clone());
            alphas.push(alpha[i]);
        }
    }
    Ok(OcSvmModel { nu, kernel, support_vectors, alphas, rho })
}

/// Trains one model per nu in the grid; the evaluation harness picks the
/// best by test AUC, mirroring the best-parameter reporting protocol.
pub fn train_ocsvm_grid(
    features: &[Vec<f64>],
    nus: &[f64],
    kernel: Kernel,
) -> Result<Vec<OcSvmModel>> {
    nus.iter().map(|&nu| train_ocsvm(features, nu, kernel)).collect()
}

/// Dual objective value, used by the brute-force oracle tests.
pub fn dual_objective(features: &[Vec<f64>], kernel: Kernel, alpha: &[f64]) -> f64 {
    let n = features.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += alpha[i] * alpha[j] * kernel.eval(&features[i], &features[j]);
        }
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_give_a_constant_decision() {
        let p = vec![0.3, -0.7, 1.1];
        let feats = vec![p.clone(), p.clone()];
        for nu in [0.1, 0.5, 1.0] {
            let model = train_ocsvm(&feats, nu, Kernel::Rbf { gamma: 0.5 }).unwrap();
            let d0 = model.decision(&feats[0]);
            let d1 = model.decision(&feats[1]);
            assert!((d0 - d1).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_toy_set_keeps_training_points_inside() {
        // A tight 2D cluster; with small nu every training point should
        // sit on the non-negative side of the boundary.
        let feats = vec![
            vec![1.0, 0.0],
            vec![0.9, 0.1],
            vec![1.1, -0.1],
            vec![1.0, 0.12],
            vec![0.95, -0.05],
        ];
        let model = train_ocsvm(&feats, 0.05, Kernel::Rbf { gamma: 1.0 }).unwrap();
        let violations = feats
            .iter()
            .filter(|f| model.decision(f) < -1e-9)
            .count();
        // nu bounds the fraction of margin violations.
        assert!(violations as f64 <= 0.05 * feats.len() as f64 + 1e-9);
        // A far-away point lands outside.
        assert!(model.decision(&[5.0, 5.0]) < 0.0);
    }

    #[test]
    fn solver_matches_brute_force_grid_on_tiny_qp() {
        // Three points, simplex grid search over the dual at step 0.01.
        let feats = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]];
        let kernel = Kernel::Rbf { gamma: 0.7 };
        for nu in [0.5, 0.8, 1.0] {
            let c = 1.0 / (nu * 3.0);
            let mut best = f64::INFINITY;
            let steps = 100;
            for a0 in 0..=steps {
                for a1 in 0..=(steps - a0) {
                    let a2 = steps - a0 - a1;
                    let alpha = [
                        a0 as f64 / steps as f64,
                        a1 as f64 / steps as f64,
                        a2 as f64 / steps as f64,
                    ];
                    if alpha.iter().any(|&a| a > c + 1e-12) {
                        continue;
                    }
                    best = best.min(dual_objective(&feats, kernel, &alpha));
                }
            }
            let model = train_ocsvm(&feats, nu, kernel).unwrap();
            // Reconstruct the full alpha vector from the support set.
            let mut alpha = vec![0.0; 3];
            for (sv, a) in model.support_vectors.iter().zip(&model.alphas) {
                let idx = feats.iter().position(|f| f == sv).unwrap();
                alpha[idx] = *a;
            }
            let solver_obj = dual_objective(&feats, kernel, &alpha);
            assert!(
                solver_obj <= best + 1e-4,
                "nu {nu}: solver {solver_obj} vs grid best {best}"
            );
        }
    }

    #[test]
    fn degenerate_variance_is_an_error() {
        let feats = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(
            default_gamma(&feats),
            Err(Error::DegenerateKernel(_))
        ));
    }

    #[test]
    fn nu_bounds_are_validated() {
        let feats = vec![vec![0.0], vec![1.0]];
        assert!(train_ocsvm(&feats, 0.0, Kernel::Linear).is_err());
        assert!(train_ocsvm(&feats, 1.5, Kernel::Linear).is_err());
    }
}
