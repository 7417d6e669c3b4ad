//! Closed-form speed bounds: the exact critical-medium speed, the ZFK-type
//! integral lower bound and the Jensen (Aronson-Weinberger type) upper bound.
//! [`sandwich`] checks every route against them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate, minimize_scalar, QuadratureSpec};
use crate::phaseplane::{self, ShootingOptions};
use crate::reaction::{MediaParams, ReactionTerm};
use crate::variational::{self, OptimizeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    Exact,
    Lower,
    Upper,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    C0Formula,
    ZfkIntegral,
    JensenSup,
    Shooting,
    Variational,
    PdeFit,
}

/// A speed value tagged with what it certifies and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub method: Method,
    pub tolerance: f64,
    pub m: f64,
    pub p: f64,
    pub reaction: String,
}

impl SpeedEstimate {
    pub fn new(
        value: f64,
        kind: EstimateKind,
        method: Method,
        tolerance: f64,
        mp: &MediaParams,
        reaction: &ReactionTerm,
    ) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Numeric(format!("{method:?} produced a non-positive speed {value}")));
        }
        if kind == EstimateKind::Exact && !(method == Method::C0Formula && mp.is_critical()) {
            return Err(Error::Precondition("only the gamma = 0 formula yields an exact speed".into()));
        }
        Ok(Self {
            value,
            kind,
            method,
            tolerance,
            m: mp.m(),
            p: mp.p(),
            reaction: reaction.describe(),
        })
    }
}

impl fmt::Display for SpeedEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.10} ({:?}, {:?}, ±{:e})", self.value, self.kind, self.method, self.tolerance)
    }
}

fn bound_quadrature() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-13, 1e-15)
}

/// `c0 = (m² p^{m+1} f'(0))^{1/(m+1)}`, the exact minimal speed when `γ = 0`.
pub fn c0_exact(mp: &MediaParams, fprime0: f64) -> Result<f64> {
    if !mp.is_critical() {
        return Err(Error::Precondition(format!(
            "the exact speed formula needs gamma = 0, got {}",
            mp.gamma()
        )));
    }
    if !(fprime0 > 0.0) {
        return Err(Error::Precondition(format!("f'(0) must be positive, got {fprime0}")));
    }
    let m = mp.m();
    Ok(((2.0 * m.ln() + (m + 1.0) * mp.p().ln() + fprime0.ln()) / (m + 1.0)).exp())
}

pub fn c0_estimate(mp: &MediaParams, r: &ReactionTerm) -> Result<SpeedEstimate> {
    let v = c0_exact(mp, r.fprime0())?;
    SpeedEstimate::new(v, EstimateKind::Exact, Method::C0Formula, 0.0, mp, r)
}

/// `∫₀¹ u^{m-1} f(u) du`.
pub fn reaction_moment(mp: &MediaParams, r: &ReactionTerm) -> Result<f64> {
    let m = mp.m();
    let mut spec = bound_quadrature();
    if m < 1.0 {
        spec = spec.left_singular(m);
    }
    let q = integrate(|u| if u <= 0.0 { 0.0 } else { (m * u.ln()).exp() * r.f_over_u(u) }, 0.0, 1.0, &spec)?;
    Ok(q.value)
}

/// Lower bound `(m p/(p-1))^{(p-1)/p} [∫ u^{m-1} f]^{(p-1)/p}`.
pub fn zfk_lower(mp: &MediaParams, r: &ReactionTerm) -> Result<SpeedEstimate> {
    let (m, p) = (mp.m(), mp.p());
    let moment = reaction_moment(mp, r)?;
    let e = (p - 1.0) / p;
    let v = (e * ((m * p / (p - 1.0)).ln() + moment.ln())).exp();
    SpeedEstimate::new(v, EstimateKind::Lower, Method::ZfkIntegral, 1e-12 * v, mp, r)
}

/// `sup_u u^γ (f/u)^{p-1}` together with the maximizing `u`.
///
/// The scan covers `[1e-9, 1]`; the `u → 0` limit (`f'(0)^{p-1}` when
/// `γ = 0`, zero otherwise) is added as a candidate.
pub fn upper_supremum(mp: &MediaParams, r: &ReactionTerm) -> Result<(f64, f64)> {
    let (gamma, p) = (mp.gamma(), mp.p());
    let ln_s = |u: f64| gamma * u.ln() + (p - 1.0) * r.f_over_u(u).ln();
    let (u_star, neg) = minimize_scalar(|u| -ln_s(u).exp(), 1e-9, 1.0, 1e-12)?;
    let interior = -neg;
    let at_zero = if mp.is_critical() { r.fprime0().powf(p - 1.0) } else { 0.0 };
    if !interior.is_finite() {
        return Err(Error::Numeric("supremum in the upper bound is not finite".into()));
    }
    Ok(if at_zero >= interior { (at_zero, 0.0) } else { (interior, u_star) })
}

/// Upper bound `p (m/(p-1))^{(p-1)/p} sup[u^γ (f/u)^{p-1}]^{1/p}`.
pub fn upper_bound(mp: &MediaParams, r: &ReactionTerm) -> Result<SpeedEstimate> {
    let (m, p) = (mp.m(), mp.p());
    let (sup, _) = upper_supremum(mp, r)?;
    let v = (p.ln() + (p - 1.0) / p * (m / (p - 1.0)).ln() + sup.ln() / p).exp();
    SpeedEstimate::new(v, EstimateKind::Upper, Method::JensenSup, 1e-12 * v, mp, r)
}

/// Every route for one `(m, p, f)` case, ordered lower to upper.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub m: f64,
    pub p: f64,
    pub gamma: f64,
    pub reaction: String,
    pub zfk_lower: SpeedEstimate,
    pub variational_lower: SpeedEstimate,
    pub variational_params: Vec<f64>,
    pub shooting: SpeedEstimate,
    pub upper: SpeedEstimate,
    pub c0: Option<SpeedEstimate>,
    pub tol: f64,
}

impl SandwichReport {
    pub fn best_lower(&self) -> f64 {
        self.zfk_lower.value.max(self.variational_lower.value)
    }

    /// Smallest signed gap of the chain `lower ≤ numeric ≤ upper`.
    pub fn slack(&self) -> f64 {
        (self.shooting.value - self.best_lower()).min(self.upper.value - self.shooting.value)
    }

    fn check(&self) -> Result<()> {
        let lower = self.best_lower();
        let c = self.shooting.value;
        let tol = self.tol + self.shooting.tolerance + self.variational_lower.tolerance;
        if lower - tol > c || c > self.upper.value + tol {
            return Err(Error::Sandwich(format!(
                "m={} p={} {}: zfk={:.10} variational={:.10} shooting={:.10} upper={:.10} (tol {:e})",
                self.m,
                self.p,
                self.reaction,
                self.zfk_lower.value,
                self.variational_lower.value,
                c,
                self.upper.value,
                self.tol
            )));
        }
        Ok(())
    }
}

/// Computes the lower bounds, the shooting speed and the upper bound, and
/// fails hard if they are out of order by more than `tol`.
pub fn sandwich(mp: &MediaParams, r: &ReactionTerm, tol: f64, budget: usize) -> Result<SandwichReport> {
    let zfk = zfk_lower(mp, r)?;
    let upper = upper_bound(mp, r)?;
    let opts = ShootingOptions { tol, ..ShootingOptions::default() };
    let shooting = phaseplane::minimal_speed(mp, r, &opts)?;
    let best = variational::optimize_family(mp, r, &OptimizeOptions { budget, ..OptimizeOptions::default() })?;
    let variational_lower = SpeedEstimate::new(best.value, EstimateKind::Lower, Method::Variational, best.tolerance, mp, r)?;
    let c0 = if mp.is_critical() { Some(c0_estimate(mp, r)?) } else { None };
    let report = SandwichReport {
        m: mp.m(),
        p: mp.p(),
        gamma: mp.gamma(),
        reaction: r.describe(),
        zfk_lower: zfk,
        variational_lower,
        variational_params: best.params,
        shooting,
        upper,
        c0,
        tol,
    };
    report.check()?;
    Ok(report)
}
