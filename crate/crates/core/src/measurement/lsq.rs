//! Damped least squares (Levenberg-Marquardt) with a central-difference
//! Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsqOptions {
    pub max_iter: usize,
    /// Stop when an accepted step lowers the cost by less than this
    /// fraction, or moves the parameters by less than this relative amount.
    pub rel_tol: f64,
    /// Condition number of `JᵀJ` above which the problem counts as
    /// rank deficient.
    pub max_condition: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions {
            max_iter: 500,
            rel_tol: 1e-10,
            max_condition: 1e14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LsqSolution {
    pub params: Vec<f64>,
    /// `(JᵀJ)⁻¹` at the solution (pseudo-inverse when rank deficient).
    pub covariance: DMatrix<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub rank_deficient: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub history: Vec<f64>,
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(f: &F, x: &[f64], m: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let mut f0 = None;
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1e-3);
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        // Near the edge of the feasible region fall back to one side.
        let (hi, lo, span) = match (fp, fm) {
            (Ok(p), Ok(q)) => (p, q, 2.0 * h),
            (Ok(p), Err(_)) => (p, f0.get_or_insert(f(x)?).clone(), h),
            (Err(_), Ok(q)) => (f0.get_or_insert(f(x)?).clone(), q, h),
            (Err(e), Err(_)) => return Err(e),
        };
        for i in 0..m {
            jac[(i, j)] = (hi[i] - lo[i]) / span;
        }
    }
    Ok(jac)
}

/// Minimise `Σ f(x)_i²`. A residual function returning an error marks that
/// trial point as infeasible; the step is rejected and damping increases.
pub fn levenberg_marquardt<F>(f: F, x0: &[f64], opts: &LsqOptions) -> Result<LsqSolution>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    let m = r.len();
    if m < n {
        return Err(Error::Validation(format!(
            "{m} residuals cannot determine {n} parameters"
        )));
    }
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut lambda = -1.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let jac = jacobian(&f, &x, m)?;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        if lambda < 0.0 {
            lambda = 1e-3 * jtj.diagonal().max().max(1e-12);
        }
        if grad.amax() <= 1e-15 * (1.0 + cost) {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match f(&trial) {
                Ok(rt) if cost_of(&rt).is_finite() && cost_of(&rt) < cost => {
                    let new_cost = cost_of(&rt);
                    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let small_step = step.norm() <= opts.rel_tol * (xnorm + opts.rel_tol);
                    let small_gain = cost - new_cost <= opts.rel_tol * cost;
                    x = trial;
                    r = rt;
                    cost = new_cost;
                    history.push(cost);
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    if small_step || small_gain {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        // No downhill step at any damping: x is a minimum to working precision.
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "no convergence after {} iterations (cost {cost:.6e})",
            opts.max_iter
        )));
    }

    let jac = jacobian(&f, &x, m)?;
    let jtj = jac.transpose() * &jac;
    let svd = jtj.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rank_deficient = !(smax > 0.0) || smax / smin.max(f64::MIN_POSITIVE) > opts.max_condition;
    let covariance = svd
        .pseudo_inverse(smax * 1.0 / opts.max_condition)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(LsqSolution {
        params: x,
        covariance,
        cost,
        iterations,
        rank_deficient,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-1.3 * t).exp() + 0.2).collect();
        let sol = levenberg_marquardt(
            |p| {
                Ok(t.iter()
                    .zip(&y)
                    .map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y)
                    .collect())
            },
            &[1.0, 0.5, 0.0],
            &LsqOptions::default(),
        )
        .unwrap();
        assert!((sol.params[0] - 2.5).abs() < 1e-8);
        assert!((sol.params[1] - 1.3).abs() < 1e-8);
        assert!((sol.params[2] - 0.2).abs() < 1e-8);
        assert!(!sol.rank_deficient);
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn flags_redundant_parameters() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let sol = levenberg_marquardt(
            |p| Ok(t.iter().map(|t| (p[0] + p[1]) * t - 2.0 * t).collect()),
            &[0.3, 0.1],
            &LsqOptions::default(),
        )
        .unwrap();
        assert!(sol.rank_deficient);
    }

    #[test]
    fn underdetermined_rejected() {
        assert!(levenberg_marquardt(|p| Ok(vec![p[0] + p[1]]), &[0.0, 0.0], &LsqOptions::default()).is_err());
    }
}
