//! Exhaustive reference solver for the soft-margin dual on small instances.
//!
//! Enumerates every active-set pattern (each multiplier at its lower bound,
//! upper bound, or free), solves the equality-constrained KKT system on the
//! free set, and keeps the best box-feasible candidate. For a strictly
//! positive-definite kernel the optimum's own pattern is enumerated, so the
//! returned objective is the global maximum. Independent of the SMO path by
//! construction; used by the self-test command and the acceptance suite.

use super::kernel::{rbf_kernel, KernelParams};
use super::{Feature, SvmError};

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub alphas: Vec<f64>,
    pub objective: f64,
}

/// Maximize `sum a - 1/2 a'Qa` s.t. `sum a y = 0`, `0 <= a <= c`
/// by active-set enumeration. Instances above 12 points are refused.
pub fn solve_dual_exact(
    features: &[Feature],
    labels: &[f64],
    params: &KernelParams,
) -> Result<OracleSolution, SvmError> {
    let n = features.len();
    if n < 2 {
        return Err(SvmError::TooFewExamples(n));
    }
    if n > 12 {
        return Err(SvmError::TooFewExamples(n)); // oracle is for small instances
    }
    if labels.len() != n {
        return Err(SvmError::LengthMismatch(n, labels.len()));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(SvmError::BadLabel);
    }
    let c = params.regularization;

    // Q with a tiny ridge so degenerate patterns stay solvable
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = rbf_kernel(&features[i], &features[j], params)?;
            q[i * n + j] = labels[i] * labels[j] * k + if i == j { 1e-12 } else { 0.0 };
        }
    }

    let objective = |a: &[f64]| -> f64 {
        let mut s: f64 = a.iter().sum();
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                s -= 0.5 * a[i] * q[i * n + j] * a[j];
            }
        }
        s
    };

    let feas_tol = 1e-7 * c.max(1.0);
    let mut best: Option<OracleSolution> = None;
    let patterns = 3usize.pow(n as u32);
    let mut alpha = vec![0.0f64; n];
    for pat in 0..patterns {
        let mut code = pat;
        let mut free: Vec<usize> = Vec::with_capacity(n);
        for a in alpha.iter_mut().take(n) {
            *a = 0.0;
        }
        for (i, a) in alpha.iter_mut().enumerate() {
            match code % 3 {
                0 => {}
                1 => *a = c,
                _ => free.push(i), // solved via the KKT system below
            }
            code /= 3;
        }

        if free.is_empty() {
            let bal: f64 = alpha.iter().zip(labels).map(|(a, y)| a * y).sum();
            if bal.abs() > feas_tol {
                continue;
            }
        } else {
            // KKT system on the free set:
            // [Q_FF  y_F] [a_F]     [1 - Q_FB a_B]
            // [y_F'   0 ] [lam]  =  [ -y_B' a_B  ]
            let m = free.len();
            let mut mat = vec![0.0f64; (m + 1) * (m + 1)];
            let mut rhs = vec![0.0f64; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    mat[r * (m + 1) + s] = q[i * n + j];
                }
                mat[r * (m + 1) + m] = labels[i];
                mat[m * (m + 1) + r] = labels[i];
                let mut b = 1.0;
                for j in 0..n {
                    if alpha[j] != 0.0 && !free.contains(&j) {
                        b -= q[i * n + j] * alpha[j];
                    }
                }
                rhs[r] = b;
            }
            let mut bal = 0.0;
            for j in 0..n {
                if alpha[j] != 0.0 && !free.contains(&j) {
                    bal += labels[j] * alpha[j];
                }
            }
            rhs[m] = -bal;
            let Some(sol) = solve_linear(&mut mat, &mut rhs, m + 1) else {
                continue;
            };
            let mut ok = true;
            for (r, &i) in free.iter().enumerate() {
                if sol[r] < -feas_tol || sol[r] > c + feas_tol {
                    ok = false;
                    break;
                }
                alpha[i] = sol[r].clamp(0.0, c);
            }
            if !ok {
                continue;
            }
        }

        let obj = objective(&alpha);
        if best.as_ref().map_or(true, |b| obj > b.objective) {
            best = Some(OracleSolution {
                alphas: alpha.clone(),
                objective: obj,
            });
        }
    }

    best.ok_or(SvmError::SingleClass)
}

/// Gaussian elimination with partial pivoting; returns None when singular.
fn solve_linear(mat: &mut [f64], rhs: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        let mut best = mat[col * n + col].abs();
        for r in (col + 1)..n {
            let v = mat[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-13 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                mat.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * n + col];
        for r in (col + 1)..n {
            let f = mat[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                mat[r * n + k] -= f * mat[col * n + k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut v = rhs[col];
        for k in (col + 1)..n {
            v -= mat[col * n + k] * x[k];
        }
        x[col] = v / mat[col * n + col];
    }
    Some(x)
}
