//! Levenberg-Marquardt least squares.
//!
//! Each iteration solves `(J^T J + lambda diag(J^T J)) delta = -J^T r` by
//! Cholesky. A step that lowers the cost is accepted and `lambda` divided by
//! `lambda_down`; otherwise `lambda` is multiplied by `lambda_up` and the
//! step retried.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// A least-squares problem `min (1/2) |r(theta)|^2`.
pub trait Objective<T: Real> {
    fn n_params(&self) -> usize;

    fn n_residuals(&self) -> usize;

    /// Residual vector `model(s_i; theta) - target_i`.
    fn residuals(&self, theta: &[T]) -> Result<Vec<T>>;

    /// `J_ij = d r_i / d theta_j`; central differences unless overridden.
    fn jacobian(&self, theta: &[T]) -> Result<Matrix<T>> {
        finite_difference_jacobian(self, theta)
    }
}

/// Central-difference Jacobian with steps `eps^(1/3) max(|theta_j|, 1)`.
pub fn finite_difference_jacobian<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    theta: &[T],
) -> Result<Matrix<T>> {
    let m = obj.n_residuals();
    let mut jac = Matrix::zeros(m, theta.len());
    let base = T::epsilon().cbrt();
    let mut probe = theta.to_vec();
    for j in 0..theta.len() {
        let h = base * theta[j].abs().max(T::one());
        probe[j] = theta[j] + h;
        let up = obj.residuals(&probe)?;
        probe[j] = theta[j] - h;
        let down = obj.residuals(&probe)?;
        probe[j] = theta[j];
        // the step actually represented in floating point
        let width = (theta[j] + h) - (theta[j] - h);
        for i in 0..m {
            jac.set(i, j, (up[i] - down[i]) / width);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmOptions<T> {
    pub max_iter: usize,
    pub lambda0: T,
    pub lambda_up: T,
    pub lambda_down: T,
    /// Stop when `max |J^T r|` falls below this.
    pub gtol: T,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub ftol: T,
    /// Damping beyond which the search gives up.
    pub lambda_max: T,
    /// Parameters allowed to move; all when absent.
    pub free: Option<Vec<bool>>,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 100,
            lambda0: T::lit(1e-3),
            lambda_up: T::lit(10.0),
            lambda_down: T::lit(10.0),
            gtol: T::lit(1e-10),
            ftol: T::lit(1e-12),
            lambda_max: T::lit(1e16),
            free: None,
        }
    }
}

impl<T: Real> LmOptions<T> {
    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Self {
        self.free = Some(free);
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.lambda0 > T::zero() && self.lambda_up > T::one() && self.lambda_down > T::one()) {
            return Err(Error::param(
                "lambda",
                "need lambda0 > 0 and up/down factors > 1",
            ));
        }
        if !(self.gtol >= T::zero() && self.ftol >= T::zero()) {
            return Err(Error::param("tolerance", "must be non-negative"));
        }
        if let Some(f) = &self.free {
            if f.len() != n {
                return Err(Error::Shape(format!(
                    "free mask has {} entries for {n} parameters",
                    f.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The residual vanished.
    ZeroResidual,
    Gradient,
    CostChange,
    /// No damping up to `lambda_max` produced a lower cost.
    NoImprovement,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub theta: Vec<T>,
    pub rmse: T,
    /// `(1/2) |r|^2`
    pub cost: T,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Cost at the start and after every accepted step.
    pub residual_history: Vec<T>,
    /// Damping used for each accepted step.
    pub lambda_history: Vec<T>,
    pub evaluations: usize,
}

fn half_sq_norm<T: Real>(r: &[T]) -> T {
    T::lit(0.5) * r.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

fn all_finite<T: Real>(r: &[T]) -> bool {
    r.iter().all(|x| x.is_finite())
}

/// Root-mean-square of a residual vector.
pub fn rmse<T: Real>(r: &[T]) -> T {
    if r.is_empty() {
        return T::zero();
    }
    (T::lit(2.0) * half_sq_norm(r) / T::count(r.len())).sqrt()
}

/// In-place Cholesky solve of the symmetric system `a x = b`; `None` if `a`
/// is not numerically positive definite.
pub(crate) fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(sum > T::zero()) || !sum.is_finite() {
                    return None;
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Minimises `(1/2) |r(theta)|^2` from `theta0`.
pub fn levenberg_marquardt<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    theta0: &[T],
    opts: &LmOptions<T>,
) -> Result<FitResult<T>> {
    let n = obj.n_params();
    if theta0.len() != n {
        return Err(Error::Shape(format!(
            "{} start values for {n} parameters",
            theta0.len()
        )));
    }
    if obj.n_residuals() < n {
        return Err(Error::Shape(format!(
            "{} residuals cannot determine {n} parameters",
            obj.n_residuals()
        )));
    }
    if !all_finite(theta0) {
        return Err(Error::NonFinite("start parameters".into()));
    }
    opts.validate(n)?;
    let free: Vec<bool> = opts.free.clone().unwrap_or_else(|| vec![true; n]);

    let mut theta = theta0.to_vec();
    let mut r = obj.residuals(&theta)?;
    if r.len() != obj.n_residuals() {
        return Err(Error::Shape(
            "residual length disagrees with the objective".into(),
        ));
    }
    if !all_finite(&r) {
        return Err(Error::NonFinite("residuals at the start parameters".into()));
    }
    let mut evaluations = 1;
    let mut cost = half_sq_norm(&r);
    let mut lambda = opts.lambda0;
    let mut residual_history = vec![cost];
    let mut lambda_history = Vec::new();
    let mut iterations = 0;

    let finish =
        |theta: Vec<T>, r: &[T], cost, iterations, termination, rh, lh, evaluations| FitResult {
            theta,
            rmse: rmse(r),
            cost,
            iterations,
            converged: !matches!(termination, Termination::MaxIterations),
            termination,
            residual_history: rh,
            lambda_history: lh,
            evaluations,
        };

    if cost == T::zero() {
        return Ok(finish(
            theta,
            &r,
            cost,
            0,
            Termination::ZeroResidual,
            residual_history,
            lambda_history,
            evaluations,
        ));
    }

    let mut termination = Termination::MaxIterations;
    while iterations < opts.max_iter {
        let jac = obj.jacobian(&theta)?;
        if !all_finite(&jac.data) {
            return Err(Error::NonFinite(format!(
                "Jacobian at iteration {iterations}"
            )));
        }
        let mut jtj = Matrix::zeros(n, n);
        let mut grad = vec![T::zero(); n];
        for i in 0..jac.rows() {
            let row = jac.row(i);
            for a in (0..n).filter(|&a| free[a]) {
                grad[a] += row[a] * r[i];
                for b in (0..=a).filter(|&b| free[b]) {
                    let v = jtj.get(a, b) + row[a] * row[b];
                    jtj.set(a, b, v);
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                let v = jtj.get(a, b);
                jtj.set(b, a, v);
            }
        }
        if grad.iter().fold(T::zero(), |acc, g| acc.max(g.abs())) < opts.gtol {
            termination = Termination::Gradient;
            break;
        }
        // Parameters the residuals do not respond to sit out this step.
        let diag_max = (0..n).fold(T::zero(), |acc, a| acc.max(jtj.get(a, a)));
        let floor = diag_max * T::epsilon();
        let moving: Vec<bool> = (0..n).map(|a| free[a] && jtj.get(a, a) > floor).collect();

        let mut accepted = None;
        while lambda <= opts.lambda_max {
            let mut damped = jtj.clone();
            for a in 0..n {
                if moving[a] {
                    damped.set(a, a, jtj.get(a, a) * (T::one() + lambda));
                } else {
                    for b in 0..n {
                        damped.set(a, b, T::zero());
                        damped.set(b, a, T::zero());
                    }
                    damped.set(a, a, T::one());
                }
            }
            let rhs: Vec<T> = (0..n)
                .map(|a| if moving[a] { -grad[a] } else { T::zero() })
                .collect();
            let Some(delta) = cholesky_solve(&damped, &rhs) else {
                lambda *= opts.lambda_up;
                if lambda > opts.lambda_max {
                    return Err(Error::SingularSystem {
                        lambda: lambda.to_f64().unwrap_or(f64::INFINITY),
                    });
                }
                continue;
            };
            let trial: Vec<T> = theta
                .iter()
                .zip(&delta)
                .zip(&moving)
                .map(|((t, d), &f)| if f { *t + *d } else { *t })
                .collect();
            evaluations += 1;
            match obj.residuals(&trial) {
                Ok(rt) if all_finite(&rt) && half_sq_norm(&rt) < cost => {
                    accepted = Some((trial, rt));
                    break;
                }
                Ok(_) => {}
                Err(e) if e.is_numerical() || matches!(e, Error::InvalidParameter { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= opts.lambda_up;
        }

        let Some((trial, rt)) = accepted else {
            termination = Termination::NoImprovement;
            break;
        };
        let new_cost = half_sq_norm(&rt);
        let relative = (cost - new_cost) / cost;
        lambda_history.push(lambda);
        theta = trial;
        r = rt;
        cost = new_cost;
        residual_history.push(cost);
        iterations += 1;
        lambda = (lambda / opts.lambda_down).max(T::min_positive_value());
        if cost == T::zero() {
            termination = Termination::ZeroResidual;
            break;
        }
        if relative < opts.ftol {
            termination = Termination::CostChange;
            break;
        }
    }
    Ok(finish(
        theta,
        &r,
        cost,
        iterations,
        termination,
        residual_history,
        lambda_history,
        evaluations,
    ))
}
