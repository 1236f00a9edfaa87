//! Box-projected Nelder-Mead minimization.
//!
//! Objective failures are treated as `+inf`, so the simplex retreats from
//! regions where the objective cannot be evaluated.

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexOptions {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    pub max_iters: usize,
    pub xtol: f64,
    pub ftol: f64,
    pub restarts: usize,
    /// Iterations per run before the simplex is rebuilt around its best
    /// vertex; a fresh simplex escapes the slow creep of a degenerate one.
    pub chunk: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    pub evaluations: usize,
}

/// Dimension-adaptive coefficients (Gao and Han); they keep the simplex from
/// collapsing prematurely in higher dimensions.
fn coefficients(n: usize) -> (f64, f64, f64, f64) {
    let n = n as f64;
    (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n)
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> Option<f64>> Counted<F> {
    fn eval<const N: usize>(&mut self, x: &[f64; N]) -> f64 {
        self.evaluations += 1;
        match (self.f)(x) {
            Some(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }
}

/// Minimizes `f` from `x0`; returns `None` if `f(x0)` cannot be evaluated.
pub(crate) fn minimize<const N: usize>(
    f: impl FnMut(&[f64]) -> Option<f64>,
    x0: [f64; N],
    opts: &SimplexOptions,
) -> Option<SimplexResult<N>> {
    let mut obj = Counted { f, evaluations: 0 };
    let project = |x: [f64; N]| x.map(|v| v.clamp(opts.lower, opts.upper));
    let x0 = project(x0);
    let f0 = obj.eval(&x0);
    if !f0.is_finite() {
        return None;
    }
    let (mut best_x, mut best_f) = (x0, f0);
    let mut iters_left = opts.max_iters;
    let mut step = opts.step;
    let mut restarts = 0;
    loop {
        let (x, fx, used, diameter, converged) =
            run(&mut obj, best_x, best_f, opts, step, iters_left.min(opts.chunk.max(1)), &project);
        iters_left = iters_left.saturating_sub(used);
        let improved = best_f - fx > opts.ftol;
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
        if iters_left == 0 {
            break;
        }
        if converged {
            if !improved || restarts >= opts.restarts {
                break;
            }
            restarts += 1;
            step = opts.step;
        } else {
            step = (2.0 * diameter).clamp(opts.xtol * 10.0, opts.step);
        }
    }
    Some(SimplexResult { x: best_x, f: best_f, evaluations: obj.evaluations })
}

fn run<const N: usize, F: FnMut(&[f64]) -> Option<f64>>(
    obj: &mut Counted<F>,
    x0: [f64; N],
    f0: f64,
    opts: &SimplexOptions,
    step: f64,
    max_iters: usize,
    project: &impl Fn([f64; N]) -> [f64; N],
) -> ([f64; N], f64, usize, f64, bool) {
    // initial simplex: step along each axis, away from the nearer wall
    let mut pts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    pts.push((x0, f0));
    for i in 0..N {
        let mut x = x0;
        let up = x[i] + step <= opts.upper;
        x[i] += if up { step } else { -step };
        let x = project(x);
        let fx = obj.eval(&x);
        pts.push((x, fx));
    }

    let (reflect, expand, contract, shrink) = coefficients(N);
    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        // stable sort keeps ties in insertion order
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (pts[0].1, pts[N].1);
        let spread = (worst - best).abs();
        let diameter = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.ftol && diameter <= opts.xtol {
            converged = true;
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &pts[..N] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            let w = &pts[N].0;
            project(std::array::from_fn(|i| centroid[i] + t * (w[i] - centroid[i])))
        };

        let xr = along(-reflect);
        let fr = obj.eval(&xr);
        if fr < pts[0].1 {
            let xe = along(-expand);
            let fe = obj.eval(&xe);
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[N - 1].1 {
            pts[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < pts[N].1 {
                let xc = along(-contract);
                (xc, obj.eval(&xc))
            } else {
                let xc = along(contract);
                (xc, obj.eval(&xc))
            };
            if fc < pts[N].1.min(fr) {
                pts[N] = (xc, fc);
            } else {
                let x_best = pts[0].0;
                for p in pts.iter_mut().skip(1) {
                    let x = project(std::array::from_fn(|i| x_best[i] + shrink * (p.0[i] - x_best[i])));
                    *p = (x, obj.eval(&x));
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let diameter = pts[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    (pts[0].0, pts[0].1, iters, diameter, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimplexOptions {
        SimplexOptions {
            lower: -5.0,
            upper: 5.0,
            step: 0.5,
            max_iters: 5000,
            xtol: 1e-10,
            ftol: 1e-14,
            restarts: 2,
            chunk: 400,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let r = minimize(
            |x| Some((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + x[2].powi(2)),
            [3.0, 3.0, 3.0],
            &opts(),
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 0.5).abs() < 1e-5 && r.x[2].abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| Some(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)),
            [-1.2, 1.0],
            &opts(),
        )
        .unwrap();
        assert!(r.f < 1e-10, "{r:?}");
    }

    #[test]
    fn respects_box() {
        let r = minimize(|x| Some(-x[0] - x[1]), [0.0, 0.0], &opts()).unwrap();
        assert!(r.x.iter().all(|&v| (v - 5.0).abs() < 1e-9), "{r:?}");
    }

    #[test]
    fn avoids_infeasible_region() {
        let r = minimize(
            |x| if x[0] > 1.0 { None } else { Some(-x[0] + x[1] * x[1]) },
            [0.0, 1.0],
            &opts(),
        )
        .unwrap();
        assert!(r.x[0] <= 1.0 && r.x[0] > 0.999, "{r:?}");
        assert!(minimize(|_: &[f64]| None, [0.0; 2], &opts()).is_none());
    }
}
