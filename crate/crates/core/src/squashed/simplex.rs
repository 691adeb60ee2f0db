//! Nelder-Mead simplex descent with dimension-adaptive coefficients.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Minimum improvement of the best value that resets the patience counter.
    pub tol: f64,
    /// Iterations without such an improvement before stopping.
    pub patience: usize,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { step: 0.4, tol: 1e-7, patience: 50, max_evals: 1500 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// True when stopped by the patience rule rather than the evaluation cap.
    pub converged: bool,
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return SimplexResult { x: x0.to_vec(), value: v, evals, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let mut best_seen = f64::INFINITY;
    let mut stale = 0usize;
    let mut converged = false;
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if vals[0] < best_seen - opts.tol {
            best_seen = vals[0];
            stale = 0;
        } else {
            stale += 1;
            if stale >= opts.patience {
                converged = true;
                break;
            }
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (w - c)).collect() };

        let xr = along(-alpha);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-alpha * gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-alpha * rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + sigma * (x - b)).collect();
                    vals[i] = eval(&shrunk, &mut evals);
                    pts[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult { x: pts[best].clone(), value: vals[best], evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum::<f64>();
        let r = minimize(f, &[5.0, -3.0, 2.0], &SimplexOptions { max_evals: 5000, tol: 1e-12, ..Default::default() });
        assert!(r.value < 1e-8, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &SimplexOptions { max_evals: 10_000, tol: 1e-14, patience: 200, step: 0.5 });
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + x[1].cos();
        let x0 = [0.3, 0.1];
        let r = minimize(f, &x0, &SimplexOptions { max_evals: 40, ..Default::default() });
        assert!(r.value <= f(&x0));
        assert!(r.evals <= 40 + 3);
    }
}
