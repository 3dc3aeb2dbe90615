//! BFGS quasi-Newton minimization with a strong-Wolfe line search.
//!
//! Dense inverse-Hessian updates; intended for the few hundred parameters the
//! unitary fits need.

use log::trace;

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop once `max_i |g_i| <= grad_tol`.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Trial steps allowed per line search.
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            grad_tol: 1e-10,
            max_iter: 2000,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective value at each accepted iterate, starting with `x0`.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

#[derive(Clone)]
struct Point {
    alpha: f64,
    value: f64,
    slope: f64,
    grad: Vec<f64>,
}

/// Minimizes `objective`, which returns the value and gradient at a point.
///
/// Accepted iterates never increase the objective. A line search that cannot
/// satisfy the strong Wolfe conditions ends the run with `converged = false`
/// at the best point seen.
pub fn bfgs_minimize<F>(mut objective: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    let mut evaluations = 1;
    let mut history = vec![f];
    let mut hinv = identity(n);
    let mut first_update = true;
    let mut iterations = 0;
    let mut converged = max_abs(&g) <= opts.grad_tol;

    while !converged && iterations < opts.max_iter {
        let mut p = matvec_neg(&hinv, &g);
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            hinv = identity(n);
            first_update = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        let alpha0 = if iterations == 0 {
            (1.0 / max_abs(&g)).min(1.0)
        } else {
            1.0
        };
        let step = line_search(&mut objective, &x, f, slope, &p, alpha0, opts, &mut evaluations);
        let Some(step) = step else {
            trace!("bfgs: line search failed at iteration {iterations}, f = {f:e}");
            break;
        };
        iterations += 1;

        let s: Vec<f64> = p.iter().map(|v| step.alpha * v).collect();
        let y: Vec<f64> = step.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = axpy(&x, 1.0, &s);
        f = step.value;
        g = step.grad;
        history.push(f);

        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if first_update {
                let scale = sy / dot(&y, &y);
                for (i, row) in hinv.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    row[i] = scale;
                }
                first_update = false;
            }
            update_inverse_hessian(&mut hinv, &s, &y, sy);
        }
        converged = max_abs(&g) <= opts.grad_tol;
    }

    BfgsResult {
        x,
        value: f,
        gradient: g,
        iterations,
        evaluations,
        converged,
        history,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect()
}

fn matvec_neg(h: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    h.iter().map(|row| -dot(row, g)).collect()
}

/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T` with `r = 1 / (y^T s)`.
fn update_inverse_hessian(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let r = 1.0 / sy;
    let hy: Vec<f64> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    let coeff = r * r * yhy + r;
    for (i, row) in h.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += coeff * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    objective: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    p: &[f64],
    alpha0: f64,
    opts: &BfgsOptions,
    evaluations: &mut usize,
) -> Option<Point>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut eval = |alpha: f64, evaluations: &mut usize| {
        let (value, grad) = objective(&axpy(x, alpha, p));
        *evaluations += 1;
        let slope = dot(&grad, p);
        Point {
            alpha,
            value,
            slope,
            grad,
        }
    };
    let sufficient = |pt: &Point| pt.value <= f0 + opts.c1 * pt.alpha * slope0;
    let curvature = |pt: &Point| pt.slope.abs() <= -opts.c2 * slope0;

    let mut trials = 0;
    let mut prev = Point {
        alpha: 0.0,
        value: f0,
        slope: slope0,
        grad: Vec::new(),
    };
    let mut alpha = alpha0;
    // Best point that satisfies sufficient decrease, used if the search runs out.
    let mut fallback: Option<Point> = None;

    while trials < opts.max_line_search {
        let cur = eval(alpha, evaluations);
        trials += 1;
        if !cur.value.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if !sufficient(&cur) || (trials > 1 && cur.value >= prev.value) {
            return zoom(&mut eval, prev, cur, f0, slope0, opts, trials, evaluations, fallback);
        }
        if curvature(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            return zoom(&mut eval, cur, prev, f0, slope0, opts, trials, evaluations, fallback);
        }
        alpha = 2.0 * cur.alpha;
        fallback = Some(cur.clone());
        prev = cur;
    }
    fallback
}

#[allow(clippy::too_many_arguments)]
fn zoom<E>(
    eval: &mut E,
    mut lo: Point,
    mut hi: Point,
    f0: f64,
    slope0: f64,
    opts: &BfgsOptions,
    mut trials: usize,
    evaluations: &mut usize,
    fallback: Option<Point>,
) -> Option<Point>
where
    E: FnMut(f64, &mut usize) -> Point,
{
    // `lo` always satisfies sufficient decrease (or is the start point).
    while trials < opts.max_line_search {
        let (a, b) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let width = b - a;
        if width <= f64::EPSILON * b.max(1e-300) {
            break;
        }
        let guard = 0.1 * width;
        let alpha = match cubic_min(&lo, &hi) {
            Some(c) if c > a + guard && c < b - guard => c,
            _ => 0.5 * (a + b),
        };
        let cur = eval(alpha, evaluations);
        trials += 1;
        if !cur.value.is_finite() || cur.value > f0 + opts.c1 * cur.alpha * slope0 || cur.value >= lo.value {
            hi = cur;
        } else {
            if cur.slope.abs() <= -opts.c2 * slope0 {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // Out of trials: settle for the best decrease found, if any.
    let best = if lo.alpha > 0.0 && lo.value < f0 { Some(lo) } else { None };
    match (best, fallback) {
        (Some(a), Some(b)) => Some(if a.value <= b.value { a } else { b }),
        (a, b) => a.or(b),
    }
}

/// Minimizer of the cubic interpolating value and slope at two points.
fn cubic_min(a: &Point, b: &Point) -> Option<f64> {
    let (x0, f0, g0) = (a.alpha, a.value, a.slope);
    let (x1, f1, g1) = (b.alpha, b.value, b.slope);
    let h = x1 - x0;
    if h == 0.0 {
        return None;
    }
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (x0 - x1);
    let disc = d1 * d1 - g0 * g1;
    if disc < 0.0 {
        return None;
    }
    let d2 = h.signum() * disc.sqrt();
    let denom = g1 - g0 + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let x = x1 - h * (g1 + d2 - d1) / denom;
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        (f, g)
    }

    #[test]
    fn quadratic_converges_quickly() {
        let target = [1.5, -2.0, 0.25, 3.0, -0.75];
        let f = |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a - b).collect();
            (dot(&d, &d), d.iter().map(|v| 2.0 * v).collect())
        };
        let res = bfgs_minimize(f, &[0.0; 5], &BfgsOptions::default());
        assert!(res.converged);
        assert!(res.iterations <= target.len() + 2, "{} iterations", res.iterations);
        for (a, b) in res.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let res = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &BfgsOptions::default());
        assert!(res.converged, "{res:?}");
        assert!((res.x[0] - 1.0).abs() < 1e-6 && (res.x[1] - 1.0).abs() < 1e-6);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_objective_stops_immediately() {
        let res = bfgs_minimize(|x: &[f64]| (3.0, vec![0.0; x.len()]), &[0.3, -0.2], &BfgsOptions::default());
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.x, vec![0.3, -0.2]);
    }

    #[test]
    fn unbounded_objective_reports_failure() {
        // Linear objective: no minimizer, the line search keeps extending.
        let res = bfgs_minimize(
            |x: &[f64]| (-x[0], vec![-1.0]),
            &[0.0],
            &BfgsOptions { max_iter: 5, ..BfgsOptions::default() },
        );
        assert!(!res.converged);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn cubic_interpolation_exact_for_cubic() {
        // f(x) = (x - 1)^3 - 3(x - 1) has a local minimum at x = 2.
        let f = |x: f64| (x - 1.0).powi(3) - 3.0 * (x - 1.0);
        let g = |x: f64| 3.0 * (x - 1.0).powi(2) - 3.0;
        let a = Point { alpha: 1.5, value: f(1.5), slope: g(1.5), grad: vec![] };
        let b = Point { alpha: 3.0, value: f(3.0), slope: g(3.0), grad: vec![] };
        assert!((cubic_min(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }
}
