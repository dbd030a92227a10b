//! Small dense optimizers: Nelder–Mead simplex descent and a
//! Levenberg–Marquardt least-squares polish with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

/// Termination tolerance on the simplex diameter.
pub const X_TOL: f64 = 1e-10;
/// Termination tolerance on the spread of objective values.
pub const F_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with initial simplex edge `step`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let eval = |f: &mut F, x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(&mut f, p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let diam = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diam < X_TOL && (vals[n] - vals[0]).abs() <= F_TOL * (1.0 + vals[0].abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (pts[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = eval(&mut f, &xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&mut f, &xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let x = along(-0.5);
            let v = eval(&mut f, &x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&mut f, &x);
            (x, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|j| pts[0][j] + 0.5 * (pts[i][j] - pts[0][j])).collect();
            vals[i] = eval(&mut f, &p);
            pts[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        converged,
    }
}

/// Central-difference Jacobian of `r` at `x`; rows are residuals.
pub fn jacobian<R: FnMut(&[f64]) -> Vec<f64>>(r: &mut R, x: &[f64]) -> DMatrix<f64> {
    let r0 = r(x);
    let mut j = DMatrix::zeros(r0.len(), x.len());
    for k in 0..x.len() {
        let h = 1e-6 * (1.0 + x[k].abs());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let (rp, rm) = (r(&xp), r(&xm));
        for i in 0..r0.len() {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    j
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes `Σ r_i(x)²` from `x0`; `value` is the final sum of squares.
pub fn levenberg_marquardt<R: FnMut(&[f64]) -> Vec<f64>>(mut r: R, x0: &[f64], max_iter: usize) -> Minimum {
    let mut x = x0.to_vec();
    let mut res = r(&x);
    let mut cost = sum_sq(&res);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter && cost.is_finite() {
        iterations += 1;
        let j = jacobian(&mut r, &x);
        let rv = DVector::from_column_slice(&res);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &rv;
        if g.amax() < 1e-14 * (1.0 + cost) {
            converged = true;
            break;
        }
        let mut stepped = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * (jtj[(d, d)].max(1e-300));
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let tr = r(&trial);
            let tc = sum_sq(&tr);
            if tc.is_finite() && tc <= cost {
                let small = delta.iter().zip(&x).all(|(d, xi)| d.abs() <= X_TOL * (1.0 + xi.abs()));
                let flat = cost - tc <= F_TOL * F_TOL.max(cost);
                x = trial;
                res = tr;
                cost = tc;
                lambda = (lambda / 3.0).max(1e-15);
                stepped = true;
                if small || flat {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !stepped {
            // no descent direction left at machine precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    Minimum {
        x,
        value: cost,
        iterations,
        converged,
    }
}
