use crate::error::{Error, Result};

const GRID_POINTS: usize = 129;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[lo, hi]`: a 129-point scan picks the bracket around the
/// best grid value, then golden-section search refines it to `tol`.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Domain(format!("minimize_scalar needs lo < hi and tol > 0 (lo={lo}, hi={hi})")));
    }
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best = (lo, f64::INFINITY);
    let mut best_idx = 0;
    for i in 0..GRID_POINTS {
        let x = if i + 1 == GRID_POINTS { hi } else { lo + step * i as f64 };
        let v = f(x);
        if v.is_nan() {
            return Err(Error::Numeric(format!("objective is NaN at {x}")));
        }
        if v < best.1 {
            best = (x, v);
            best_idx = i;
        }
    }
    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc.is_nan() || fd.is_nan() {
            return Err(Error::Numeric("objective became NaN during golden-section search".into()));
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, v) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(if v <= best.1 { (x, v) } else { best })
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder-Mead simplex minimization with standard coefficients.
///
/// Infinite objective values are allowed and act as rejections. The search
/// stops after `max_evals` objective calls or when the simplex values spread
/// less than `ftol`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    max_evals: usize,
    ftol: f64,
) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f0 = eval(x0, &mut evals);
    if max_evals <= 1 || n == 0 {
        return NelderMeadResult { x: x0.to_vec(), value: f0, evaluations: evals };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() <= ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let towards = |coef: f64, worst: &[f64]| -> Vec<f64> {
            centroid.iter().zip(worst).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let worst = simplex[n].0.clone();
        let xr = towards(alpha, &worst);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = towards(gamma, &worst);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = towards(-rho, &worst);
            let fc = eval(&xc, &mut evals);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult { x, value, evaluations: evals }
}
