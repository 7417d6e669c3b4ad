//! Reaction terms `f(u)` on `[0, 1]` and the media exponents `(m, p)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Grid used to validate positivity and concavity at construction.
pub const VALIDATION_GRID: usize = 4097;

/// Tolerance on `|γ|` under which a medium counts as critical (`γ = 0`).
pub const CRITICAL_GAMMA_TOL: f64 = 1e-12;

/// Exponent pair of the doubly nonlinear diffusion term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediaParams {
    m: f64,
    p: f64,
    gamma: f64,
}

impl MediaParams {
    pub fn new(m: f64, p: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!("m must be positive, got {m}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must exceed 1, got {p}")));
        }
        let gamma = m * (p - 1.0) - 1.0;
        if gamma < -CRITICAL_GAMMA_TOL {
            return Err(Error::InvalidParams(format!(
                "gamma < 0 unsupported (m = {m}, p = {p}, gamma = {gamma})"
            )));
        }
        Ok(Self { m, p, gamma })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `γ = m (p - 1) - 1`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_critical(&self) -> bool {
        self.gamma.abs() <= CRITICAL_GAMMA_TOL
    }

    /// `m^{p-1}`, the factor between `c` and the phase-plane drift.
    pub fn m_pow(&self) -> f64 {
        self.m.powf(self.p - 1.0)
    }
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    u: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
    given_left_slope: Option<f64>,
}

impl Table {
    pub fn new(u: Vec<f64>, f: Vec<f64>, left_slope: Option<f64>) -> Result<Self> {
        if u.len() != f.len() || u.len() < 4 {
            return Err(Error::Reaction("a table needs at least 4 (u, f) rows".into()));
        }
        if u[0] != 0.0 || u[u.len() - 1] != 1.0 {
            return Err(Error::Reaction("table u must run from 0 to 1".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Reaction("table u must be strictly increasing".into()));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Reaction("table f values must be finite".into()));
        }
        let n = u.len();
        let h: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slope[0] = match left_slope {
            Some(s) => s,
            None => edge_slope(h[0], h[1], delta[0], delta[1]),
        };
        slope[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Self { u, f, slope, given_left_slope: left_slope })
    }

    fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = match self.u.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(self.u.len() - 2),
        };
        let h = self.u[i + 1] - self.u[i];
        let s = (x - self.u[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.f[i]
            + (s3 - 2.0 * s2 + s) * h * self.slope[i]
            + (-2.0 * s3 + 3.0 * s2) * self.f[i + 1]
            + (s3 - s2) * h * self.slope[i + 1]
    }

    fn right_slope(&self) -> f64 {
        self.slope[self.slope.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

// three-point end slope, limited to keep the interpolant shape-preserving
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactionFamily {
    /// `u (1 - u)`
    Kpp,
    /// `λ u (1 - u)`
    ScaledKpp { lambda: f64 },
    /// `λ sin(π u)`
    Sine { lambda: f64 },
    /// `u (1 - u^s) / s`, `s ≥ 1`
    PowerKpp { s: f64 },
    Tabulated(Table),
}

/// A validated reaction term with its linearization data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTerm {
    family: ReactionFamily,
    fprime0: f64,
    fprime1: f64,
    d: f64,
    k: f64,
    sup_f_over_u: f64,
}

impl ReactionTerm {
    pub fn kpp() -> Self {
        Self::build(ReactionFamily::Kpp).expect("kpp is valid")
    }

    pub fn scaled_kpp(lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        Self::build(ReactionFamily::ScaledKpp { lambda })
    }

    pub fn sine(lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        Self::build(ReactionFamily::Sine { lambda })
    }

    pub fn power_kpp(s: f64) -> Result<Self> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::Reaction(format!("power-kpp needs s >= 1, got {s}")));
        }
        Self::build(ReactionFamily::PowerKpp { s })
    }

    /// Tabulated reaction from `(u, f)` samples. Without `fprime0`, `f'(0)` is
    /// estimated with a one-sided 4-point stencil on the interpolant.
    pub fn tabulated(u: Vec<f64>, f: Vec<f64>, fprime0: Option<f64>) -> Result<Self> {
        if let Some(d) = fprime0 {
            positive("fprime0", d)?;
        }
        if f[0].abs() > 1e-12 || f[f.len() - 1].abs() > 1e-12 {
            return Err(Error::Reaction("tabulated f must vanish at u = 0 and u = 1".into()));
        }
        let mut f = f;
        let last = f.len() - 1;
        f[0] = 0.0;
        f[last] = 0.0;
        Self::build(ReactionFamily::Tabulated(Table::new(u, f, fprime0)?))
    }

    /// Reads a CSV of `u,f` rows (an optional non-numeric header is skipped).
    pub fn from_csv(path: &Path, fprime0: Option<f64>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let (mut us, mut fs) = (Vec::new(), Vec::new());
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if rec.len() != 2 {
                return Err(Error::Config(format!("{}:{}: expected 2 columns", path.display(), line + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(u), Ok(f)) => {
                    us.push(u);
                    fs.push(f);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Config(format!("{}:{}: non-numeric row", path.display(), line + 1)))
                }
            }
        }
        Self::tabulated(us, fs, fprime0)
    }

    fn build(family: ReactionFamily) -> Result<Self> {
        let (fprime0, fprime1, growth) = match &family {
            ReactionFamily::Kpp => (1.0, -1.0, Some((1.0, 1.0))),
            ReactionFamily::ScaledKpp { lambda } => (*lambda, -*lambda, Some((*lambda, 1.0))),
            ReactionFamily::Sine { lambda } => (lambda * PI, -lambda * PI, Some((lambda * PI.powi(3) / 6.0, 2.0))),
            ReactionFamily::PowerKpp { s } => (1.0 / s, -1.0, Some((1.0 / s, *s))),
            ReactionFamily::Tabulated(t) => (t.given_left_slope.unwrap_or(0.0), t.right_slope(), None),
        };
        let mut term = Self {
            family,
            fprime0,
            fprime1,
            d: 0.0,
            k: 0.0,
            sup_f_over_u: fprime0,
        };
        if let ReactionFamily::Tabulated(t) = &term.family {
            if t.given_left_slope.is_none() {
                let h = t.u[1];
                let f = |x: f64| t.eval(x);
                term.fprime0 = (-11.0 * f(0.0) + 18.0 * f(h) - 9.0 * f(2.0 * h) + 2.0 * f(3.0 * h)) / (6.0 * h);
            }
        }
        if !(term.fprime0 > 0.0) {
            return Err(Error::Reaction(format!("f'(0) must be positive, got {}", term.fprime0)));
        }
        term.validate_shape()?;
        let (d, k) = match growth {
            Some(dk) => dk,
            None => fit_growth_constants(|u| term.f(u), term.fprime0)?,
        };
        term.d = d;
        term.k = k;
        let grid_sup = (1..VALIDATION_GRID)
            .map(|i| {
                let u = i as f64 / (VALIDATION_GRID - 1) as f64;
                term.f(u) / u
            })
            .fold(0.0, f64::max);
        term.sup_f_over_u = term.fprime0.max(grid_sup);
        Ok(term)
    }

    fn validate_shape(&self) -> Result<()> {
        let n = VALIDATION_GRID;
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| self.f(i as f64 * h)).collect();
        if vals[0].abs() > 1e-12 || vals[n - 1].abs() > 1e-12 {
            return Err(Error::Reaction("f must vanish at both ends".into()));
        }
        if let Some(i) = (1..n - 1).find(|&i| !(vals[i] > 0.0)) {
            return Err(Error::Reaction(format!("f is not positive at u = {}", i as f64 * h)));
        }
        let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b));
        let tol = 1e-10 * scale.max(1e-300);
        if let Some(i) = (1..n - 1).find(|&i| vals[i - 1] - 2.0 * vals[i] + vals[i + 1] > tol) {
            return Err(Error::Reaction(format!("f is not concave near u = {}", i as f64 * h)));
        }
        Ok(())
    }

    pub fn family(&self) -> &ReactionFamily {
        &self.family
    }

    /// Short family name used in reports.
    pub fn tag(&self) -> &'static str {
        match self.family {
            ReactionFamily::Kpp => "kpp",
            ReactionFamily::ScaledKpp { .. } => "scaled-kpp",
            ReactionFamily::Sine { .. } => "sine",
            ReactionFamily::PowerKpp { .. } => "power-kpp",
            ReactionFamily::Tabulated(_) => "tabulated",
        }
    }

    pub fn describe(&self) -> String {
        match &self.family {
            ReactionFamily::Kpp => "kpp".into(),
            ReactionFamily::ScaledKpp { lambda } => format!("scaled-kpp(lambda={lambda})"),
            ReactionFamily::Sine { lambda } => format!("sine(lambda={lambda})"),
            ReactionFamily::PowerKpp { s } => format!("power-kpp(s={s})"),
            ReactionFamily::Tabulated(t) => format!("tabulated({} rows)", t.len()),
        }
    }

    /// Tabulated data is only piecewise smooth and sits outside the
    /// `C^1`, concave setting the characterization is proven for.
    pub fn within_hypotheses(&self) -> bool {
        !matches!(self.family, ReactionFamily::Tabulated(_))
    }

    /// `f(u)` for `u` in `[0, 1]`; unchecked.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match &self.family {
            ReactionFamily::Kpp => u * (1.0 - u),
            ReactionFamily::ScaledKpp { lambda } => lambda * u * (1.0 - u),
            // reflect so the argument stays accurate near u = 1
            ReactionFamily::Sine { lambda } if u > 0.5 => lambda * (PI * (1.0 - u)).sin(),
            ReactionFamily::Sine { lambda } => lambda * (PI * u).sin(),
            ReactionFamily::PowerKpp { s } => u * (1.0 - u.powf(*s)) / s,
            ReactionFamily::Tabulated(t) => t.eval(u),
        }
    }

    /// `f(u) / u`, extended by `f'(0)` at the origin.
    #[inline]
    pub fn f_over_u(&self, u: f64) -> f64 {
        match &self.family {
            ReactionFamily::Kpp => 1.0 - u,
            ReactionFamily::ScaledKpp { lambda } => lambda * (1.0 - u),
            ReactionFamily::Sine { lambda } => {
                let x = PI * u;
                if x < 1e-4 {
                    lambda * PI * (1.0 - x * x / 6.0)
                } else {
                    self.f(u) / u
                }
            }
            ReactionFamily::PowerKpp { s } => (1.0 - u.powf(*s)) / s,
            ReactionFamily::Tabulated(_) => {
                if u < 1e-200 {
                    self.fprime0
                } else {
                    self.f(u) / u
                }
            }
        }
    }

    /// `ln f(u)` for `u` in `(0, 1)`, accurate for arbitrarily small `u`.
    #[inline]
    pub fn ln_f(&self, u: f64) -> f64 {
        u.ln() + self.f_over_u(u).ln()
    }

    pub fn eval_f(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("f is defined on [0, 1], got u = {u}")));
        }
        if u == 0.0 || u == 1.0 {
            return Ok(0.0);
        }
        Ok(self.f(u))
    }

    /// `F(u) = u^{m-1} f(u) / m^{p-1}`, continuously extended by `F(0) = 0`.
    pub fn eval_big_f(&self, mp: &MediaParams, u: f64) -> Result<f64> {
        let fu = self.eval_f(u)?;
        if u == 0.0 {
            return Ok(0.0);
        }
        Ok(u.powf(mp.m() - 1.0) * fu / mp.m_pow())
    }

    /// `ln F(u)` for `u` in `(0, 1)`.
    #[inline]
    pub fn ln_big_f(&self, mp: &MediaParams, u: f64) -> f64 {
        mp.m() * u.ln() + self.f_over_u(u).ln() - (mp.p() - 1.0) * mp.m().ln()
    }

    pub fn fprime0(&self) -> f64 {
        self.fprime0
    }

    pub fn fprime1(&self) -> f64 {
        self.fprime1
    }

    /// Constants `(d, k)` with `|f(u) - u f'(0)| <= d u^{k+1}` on `[0, 1]`.
    pub fn growth_constants(&self) -> (f64, f64) {
        (self.d, self.k)
    }

    /// `sup f(u)/u`; equals `f'(0)` for concave `f`.
    pub fn sup_f_over_u(&self) -> f64 {
        self.sup_f_over_u
    }

    /// Same family with `f` replaced by `λ f`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        match &self.family {
            ReactionFamily::Kpp => Self::scaled_kpp(lambda),
            ReactionFamily::ScaledKpp { lambda: l } => Self::scaled_kpp(l * lambda),
            ReactionFamily::Sine { lambda: l } => Self::sine(l * lambda),
            _ => Err(Error::Reaction(format!("{} does not support scaling", self.tag()))),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Reaction(format!("{name} must be positive, got {v}")))
    }
}

/// Fits `(d, k)` with `|f(u) - u f'(0)| <= d u^{k+1}` on a dense grid: `k` is
/// the log-log slope of the remainder near the origin, `d` the smallest
/// constant making the inequality hold everywhere on the grid.
pub fn fit_growth_constants<F: Fn(f64) -> f64>(f: F, fprime0: f64) -> Result<(f64, f64)> {
    let remainder = |u: f64| (f(u) - u * fprime0).abs() / u;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..=200 {
        let u = 10f64.powf(-4.0 + 2.0 * i as f64 / 200.0);
        let r = remainder(u);
        if r > 0.0 {
            let (x, y) = (u.ln(), r.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    if n < 10.0 {
        // f is linear near the origin; any k works with a tiny d
        return Ok((f64::EPSILON, 1.0));
    }
    let k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if !(k > 1e-2) || !k.is_finite() {
        return Err(Error::Inconsistent(format!(
            "|f(u) - u f'(0)|/u does not vanish at the origin (slope {k:.3}); check f'(0) = {fprime0}"
        )));
    }
    let grid = (1..=10_000)
        .map(|i| i as f64 / 10_000.0)
        .chain((0..=400).map(|i| 10f64.powf(-8.0 + 8.0 * i as f64 / 400.0)));
    // skip points where the remainder is lost in cancellation
    let d = grid
        .filter(|&u| remainder(u) > 1e-7 * fprime0.abs())
        .map(|u| remainder(u) / u.powf(k))
        .fold(0.0, f64::max)
        * (1.0 + 1e-9);
    Ok((d, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn builtins() -> Vec<ReactionTerm> {
        vec![
            ReactionTerm::kpp(),
            ReactionTerm::scaled_kpp(2.5).unwrap(),
            ReactionTerm::sine(1.0).unwrap(),
            ReactionTerm::sine(0.3).unwrap(),
            ReactionTerm::power_kpp(1.0).unwrap(),
            ReactionTerm::power_kpp(3.0).unwrap(),
        ]
    }

    #[test]
    fn media_params_gamma() {
        let mp = MediaParams::new(2.0, 2.0).unwrap();
        assert_eq!(mp.gamma(), 1.0);
        assert!(MediaParams::new(2.0, 1.5).unwrap().is_critical());
        // 3 (4/3 - 1) - 1 rounds to about -1e-16
        assert!(MediaParams::new(3.0, 4.0 / 3.0).unwrap().is_critical());
    }

    #[test]
    fn media_params_rejections() {
        let err = MediaParams::new(0.5, 2.0).unwrap_err();
        assert!(err.to_string().contains("gamma < 0 unsupported"));
        assert!(MediaParams::new(0.0, 2.0).is_err());
        assert!(MediaParams::new(1.0, 1.0).is_err());
        assert!(MediaParams::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn eval_f_examples() {
        let kpp = ReactionTerm::kpp();
        assert_eq!(kpp.eval_f(0.5).unwrap(), 0.25);
        assert_eq!(kpp.eval_f(1.0).unwrap(), 0.0);
        assert_eq!(kpp.eval_f(0.0).unwrap(), 0.0);
        assert!((ReactionTerm::sine(1.0).unwrap().eval_f(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ReactionTerm::sine(1.0).unwrap().eval_f(1.0).unwrap(), 0.0);
        assert!(matches!(kpp.eval_f(1.5), Err(Error::Domain(_))));
        assert!(kpp.eval_f(-1e-9).is_err());
    }

    #[test]
    fn eval_big_f_examples() {
        let kpp = ReactionTerm::kpp();
        let mp = MediaParams::new(1.0, 2.0).unwrap();
        assert_eq!(kpp.eval_big_f(&mp, 0.5).unwrap(), 0.25);
        let mp2 = MediaParams::new(2.0, 2.0).unwrap();
        assert!((kpp.eval_big_f(&mp2, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(kpp.eval_big_f(&mp2, 0.0).unwrap(), 0.0);
        let sub = MediaParams::new(0.5, 3.0).unwrap();
        assert_eq!(kpp.eval_big_f(&sub, 0.0).unwrap(), 0.0);
        assert!(kpp.eval_big_f(&sub, 1e-12).unwrap() < 1e-5);
    }

    #[test]
    fn ln_forms_agree_with_direct_evaluation() {
        let mp = MediaParams::new(1.5, 2.5).unwrap();
        for r in builtins() {
            for &u in &[1e-6, 0.1, 0.5, 0.9] {
                let direct = r.eval_big_f(&mp, u).unwrap().ln();
                assert!((r.ln_big_f(&mp, u) - direct).abs() < 1e-12, "{} at {u}", r.describe());
                assert!((r.ln_f(u) - r.f(u).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn growth_constants_analytic() {
        assert_eq!(ReactionTerm::kpp().growth_constants(), (1.0, 1.0));
        let (d, k) = ReactionTerm::sine(1.0).unwrap().growth_constants();
        assert!((d - 5.167_712_780_049_97).abs() < 1e-12);
        assert_eq!(k, 2.0);
        assert_eq!(ReactionTerm::scaled_kpp(3.0).unwrap().growth_constants(), (3.0, 1.0));
    }

    #[test]
    fn grid_fit_reproduces_analytic_constants() {
        let sine = ReactionTerm::sine(1.0).unwrap();
        let (d, k) = fit_growth_constants(|u| sine.f(u), sine.fprime0()).unwrap();
        assert!((k - 2.0).abs() < 1e-3, "k = {k}");
        assert!((d / (PI.powi(3) / 6.0) - 1.0).abs() < 1e-2, "d = {d}");
        let (d, k) = fit_growth_constants(|u| u * (1.0 - u), 1.0).unwrap();
        assert!((k - 1.0).abs() < 1e-9 && (d - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_fit_flags_wrong_slope() {
        let err = fit_growth_constants(|u| u * (1.0 - u), 2.0).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)));
    }

    #[test]
    fn growth_inequality_holds_on_fine_grid() {
        for r in builtins() {
            let (d, k) = r.growth_constants();
            for i in 1..=10_000 {
                let u = i as f64 / 10_000.0;
                let lhs = (r.f(u) - u * r.fprime0()).abs();
                let roundoff = 4.0 * f64::EPSILON * u * r.fprime0();
                assert!(lhs <= d * u.powf(k + 1.0) * (1.0 + 1e-12) + roundoff, "{} at {u}", r.describe());
            }
        }
    }

    #[test]
    fn shape_invariants_for_builtins() {
        let n = 2001;
        for r in builtins() {
            assert_eq!(r.f(0.0), 0.0);
            assert!(r.f(1.0).abs() < 1e-15);
            for i in 1..n - 1 {
                let u = i as f64 / (n - 1) as f64;
                assert!(r.f(u) > 0.0);
            }
            assert!((r.sup_f_over_u() - r.fprime0()).abs() < 1e-12);
        }
    }

    #[test]
    fn non_concave_table_is_rejected() {
        let n = 101;
        let u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        // ignition-like profile: convex near the origin
        let f: Vec<f64> = u.iter().map(|&x| x * x * (1.0 - x)).collect();
        let err = ReactionTerm::tabulated(u, f, Some(0.01)).unwrap_err();
        assert!(matches!(err, Error::Reaction(_)), "{err}");
    }

    #[test]
    fn tabulated_kpp_matches_analytic() {
        let n = 401;
        let u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let f: Vec<f64> = u.iter().map(|&x| x * (1.0 - x)).collect();
        let with = ReactionTerm::tabulated(u.clone(), f.clone(), Some(1.0)).unwrap();
        assert!(!with.within_hypotheses());
        assert_eq!(with.fprime0(), 1.0);
        for &x in &[0.013, 0.25, 0.5, 0.77, 0.999] {
            assert!((with.f(x) - x * (1.0 - x)).abs() < 1e-6);
        }
        let without = ReactionTerm::tabulated(u, f, None).unwrap();
        assert!((without.fprime0() - 1.0).abs() < 1e-4, "{}", without.fprime0());
        assert!((without.fprime1() + 1.0).abs() < 1e-3);
        let (d, k) = without.growth_constants();
        assert!(d > 0.0 && k > 0.0);
    }

    #[test]
    fn csv_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut body = String::from("u,f\n");
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            body.push_str(&format!("{x},{}\n", 2.0 * x * (1.0 - x)));
        }
        std::fs::write(&path, body).unwrap();
        let r = ReactionTerm::from_csv(&path, Some(2.0)).unwrap();
        assert!((r.f(0.5) - 0.5).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn big_f_is_linear_in_f(lambda in 0.1f64..10.0, u in 1e-6f64..1.0, m in 0.5f64..3.0) {
            let mp = MediaParams::new(m, 1.0 + 1.0 / m + 0.25).unwrap();
            let base = ReactionTerm::sine(1.0).unwrap();
            let scaled = base.scaled(lambda).unwrap();
            let a = base.eval_big_f(&mp, u).unwrap();
            let b = scaled.eval_big_f(&mp, u).unwrap();
            prop_assert!((b - lambda * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        #[test]
        fn midpoint_concavity(u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
            for r in builtins() {
                let mid = r.f(0.5 * (u1 + u2));
                prop_assert!(mid >= 0.5 * (r.f(u1) + r.f(u2)) - 1e-12);
            }
        }
    }
}
