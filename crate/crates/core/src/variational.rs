//! The variational functional
//!
//! ```text
//! 𝒥[g] = p m^{p-1} / (p-1)^{(p-1)/p} · ∫ h^{1/p} F^{(p-1)/p} g^{(p-1)/p} du / ∫ g du,   h = -g'
//! ```
//!
//! whose supremum over admissible `g` (non-negative, strictly decreasing,
//! integrable) is the minimal speed. Every trial therefore certifies a lower
//! bound. Trial shapes are evaluated in log form so that the strongly
//! singular members of the `g_α` family stay representable near `u = 0`.

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate, log_beta, nelder_mead, QuadratureSpec};
use crate::reaction::{MediaParams, ReactionTerm};

/// Interior grid on which class membership is checked.
pub const CLASS_GRID: usize = 1025;

/// Smallest `α` accepted by [`j_limit_galpha`].
pub const MIN_ALPHA: f64 = 1e-3;

/// Power-law behaviour of a trial near an endpoint: `g ~ x^{g}`, `h ~ x^{h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointExponents {
    pub g: f64,
    pub h: f64,
}

/// Shape of a trial function, up to normalization.
pub trait TrialShape: Debug + Send + Sync {
    fn ln_g(&self, u: f64) -> f64;
    /// `ln(-g'(u))`.
    fn ln_h(&self, u: f64) -> f64;
    fn left(&self) -> EndpointExponents;
    fn right(&self) -> EndpointExponents {
        EndpointExponents { g: 1.0, h: 0.0 }
    }
    /// `∫₀¹ g` when known in closed form.
    fn integral(&self) -> Option<f64> {
        None
    }
    fn family(&self) -> &'static str;
    fn params(&self) -> Vec<f64>;
}

fn quad_hint(spec: QuadratureSpec, left: f64, right: f64) -> QuadratureSpec {
    let mut s = spec;
    if left < 1.0 {
        s = s.left_singular(left);
    }
    if right < 0.0 {
        s = s.right_singular(right);
    }
    s
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A trial function `g` (scaled shape) with its cached integral.
#[derive(Debug, Clone)]
pub struct TrialFunction {
    shape: Arc<dyn TrialShape>,
    ln_scale: f64,
    integral: f64,
}

impl TrialFunction {
    /// Wraps a shape, checks class membership and caches `∫ g`.
    pub fn from_shape(shape: Arc<dyn TrialShape>) -> Result<Self> {
        let integral = match shape.integral() {
            Some(v) => v,
            None => {
                let (l, r) = (shape.left(), shape.right());
                let spec = quad_hint(QuadratureSpec::with_tolerances(1e-12, 1e-300), l.g, r.g);
                integrate(|u| shape.ln_g(u).exp(), 0.0, 1.0, &spec)?.value
            }
        };
        if !(integral > 0.0 && integral.is_finite()) {
            return Err(Error::ClassViolation(format!("∫ g = {integral} is not finite and positive")));
        }
        let trial = Self { shape, ln_scale: 0.0, integral };
        trial.check_class()?;
        Ok(trial)
    }

    /// Same shape rescaled so that `∫ g = 1`.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.integral)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            ln_scale: self.ln_scale + lambda.ln(),
            integral: self.integral * lambda,
        }
    }

    fn check_class(&self) -> Result<()> {
        let (l, r) = (self.shape.left(), self.shape.right());
        if !(l.g > -1.0) || !(l.h > -2.0) {
            return Err(Error::ClassViolation(format!(
                "left exponents g ~ u^{}, h ~ u^{} are not admissible",
                l.g, l.h
            )));
        }
        if !(r.g >= 0.0) {
            return Err(Error::ClassViolation("g must stay bounded at u = 1".into()));
        }
        for i in 1..=CLASS_GRID {
            let u = i as f64 / (CLASS_GRID + 1) as f64;
            let (lg, lh) = (self.ln_g(u), self.ln_h(u));
            if lg.is_nan() || lg == f64::INFINITY {
                return Err(Error::ClassViolation(format!("g({u}) is not finite")));
            }
            if !lh.is_finite() {
                return Err(Error::ClassViolation(format!("h({u}) = -g'({u}) is not positive")));
            }
        }
        // u g(u) must vanish at the origin
        let near = |u: f64| (u.ln() + self.ln_g(u)).exp();
        if near(1e-8) > near(1e-6) * (1.0 + 1e-12) && near(1e-8) > 1e-12 {
            return Err(Error::ClassViolation("u g(u) does not vanish as u → 0".into()));
        }
        Ok(())
    }

    pub fn ln_g(&self, u: f64) -> f64 {
        self.shape.ln_g(u) + self.ln_scale
    }

    pub fn ln_h(&self, u: f64) -> f64 {
        self.shape.ln_h(u) + self.ln_scale
    }

    pub fn g(&self, u: f64) -> f64 {
        self.ln_g(u).exp()
    }

    pub fn h(&self, u: f64) -> f64 {
        self.ln_h(u).exp()
    }

    /// `∫₀¹ g du`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn family(&self) -> &'static str {
        self.shape.family()
    }

    pub fn params(&self) -> Vec<f64> {
        self.shape.params()
    }

    pub fn left_exponents(&self) -> EndpointExponents {
        self.shape.left()
    }

    pub fn right_exponents(&self) -> EndpointExponents {
        self.shape.right()
    }

    /// Convex combination `w g₁ + (1 - w) g₂`.
    pub fn mix(w: f64, first: &TrialFunction, second: &TrialFunction) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!("mixing weight {w} outside [0, 1]")));
        }
        let shape = Mixture {
            parts: vec![(w, first.clone()), (1.0 - w, second.clone())],
        };
        Self::from_shape(Arc::new(shape))
    }
}

/// `g_α = α/(1-α) (u^{α-1} - 1)`, normalized, with `h_α = α u^{α-2}`.
#[derive(Debug, Clone, Copy)]
pub struct GAlpha {
    alpha: f64,
}

impl TrialShape for GAlpha {
    fn ln_g(&self, u: f64) -> f64 {
        let a = self.alpha;
        (a / (1.0 - a)).ln() + (a - 1.0) * u.ln() + (-(u.powf(1.0 - a))).ln_1p()
    }
    fn ln_h(&self, u: f64) -> f64 {
        self.alpha.ln() + (self.alpha - 2.0) * u.ln()
    }
    fn left(&self) -> EndpointExponents {
        EndpointExponents { g: self.alpha - 1.0, h: self.alpha - 2.0 }
    }
    fn integral(&self) -> Option<f64> {
        Some(1.0)
    }
    fn family(&self) -> &'static str {
        "galpha"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.alpha]
    }
}

pub fn trial_galpha(alpha: f64) -> Result<TrialFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    TrialFunction::from_shape(Arc::new(GAlpha { alpha }))
}

/// `g(u) = (∫_u^1 F)^{1/p}`, the trial behind the integral lower bound.
#[derive(Debug, Clone)]
pub struct ZfkShape {
    mp: MediaParams,
    reaction: ReactionTerm,
}

impl ZfkShape {
    fn tail_integral(&self, u: f64) -> f64 {
        let (mp, r) = (&self.mp, &self.reaction);
        let mut spec = QuadratureSpec::with_tolerances(1e-13, 1e-300);
        if u == 0.0 && mp.m() < 1.0 {
            spec = spec.left_singular(mp.m());
        }
        match integrate(|x| if x <= 0.0 { 0.0 } else { r.ln_big_f(mp, x).exp() }, u, 1.0, &spec) {
            Ok(q) => q.value,
            // only reachable within roundoff of u = 1, where F itself is noisy
            Err(Error::Quadrature { estimate, .. }) => estimate,
            Err(_) => f64::NAN,
        }
    }

    fn ln_big_f(&self, u: f64) -> f64 {
        self.reaction.ln_big_f(&self.mp, u)
    }
}

impl TrialShape for ZfkShape {
    fn ln_g(&self, u: f64) -> f64 {
        self.tail_integral(u).ln() / self.mp.p()
    }
    fn ln_h(&self, u: f64) -> f64 {
        let p = self.mp.p();
        self.ln_big_f(u) - p.ln() + (1.0 / p - 1.0) * self.tail_integral(u).ln()
    }
    fn left(&self) -> EndpointExponents {
        EndpointExponents { g: 0.0, h: self.mp.m() }
    }
    fn right(&self) -> EndpointExponents {
        let p = self.mp.p();
        EndpointExponents { g: 2.0 / p, h: 2.0 / p - 1.0 }
    }
    fn family(&self) -> &'static str {
        "zfk"
    }
    fn params(&self) -> Vec<f64> {
        vec![]
    }
}

pub fn trial_zfk(mp: &MediaParams, r: &ReactionTerm) -> Result<TrialFunction> {
    TrialFunction::from_shape(Arc::new(ZfkShape { mp: *mp, reaction: r.clone() }))
}

/// Two-parameter family `g_{a,b}(u) = (1-u)^a (u^{b-1} - u)`.
#[derive(Debug, Clone, Copy)]
pub struct ParamShape {
    a: f64,
    b: f64,
}

/// Box searched by [`optimize_family`].
pub const PARAM_A_RANGE: (f64, f64) = (0.1, 4.0);
pub const PARAM_B_RANGE: (f64, f64) = (1e-3, 1.0);

impl TrialShape for ParamShape {
    fn ln_g(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (self.a, self.b);
        a * (-u).ln_1p() + (b - 1.0) * u.ln() + (-(u.powf(2.0 - b))).ln_1p()
    }
    fn ln_h(&self, u: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let ln1mu = (-u).ln_1p();
        let ln_u = u.ln();
        let decay = if a > 0.0 { a * ln1mu } else { 0.0 };
        let first = if a > 0.0 && u < 1.0 {
            a.ln() + (a - 1.0) * ln1mu + (b - 1.0) * ln_u + (-(u.powf(2.0 - b))).ln_1p()
        } else {
            f64::NEG_INFINITY
        };
        let inner = if b < 1.0 {
            ln_add_exp((1.0 - b).ln() + (b - 2.0) * ln_u, 0.0)
        } else {
            0.0
        };
        ln_add_exp(first, decay + inner)
    }
    fn left(&self) -> EndpointExponents {
        if self.b < 1.0 {
            EndpointExponents { g: self.b - 1.0, h: self.b - 2.0 }
        } else {
            EndpointExponents { g: 0.0, h: 0.0 }
        }
    }
    fn right(&self) -> EndpointExponents {
        EndpointExponents { g: self.a + 1.0, h: self.a }
    }
    fn integral(&self) -> Option<f64> {
        let (a, b) = (self.a, self.b);
        let first = log_beta(b, a + 1.0).ok()?.exp();
        let second = log_beta(2.0, a + 1.0).ok()?.exp();
        Some(first - second)
    }
    fn family(&self) -> &'static str {
        "param"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }
}

/// Member `(a, b)` of the parametric family, normalized. `a ≥ 0`, `0 < b ≤ 1`.
pub fn trial_param(a: f64, b: f64) -> Result<TrialFunction> {
    if !(a >= 0.0 && a.is_finite()) || !(b > 0.0 && b <= 1.0) {
        return Err(Error::ClassViolation(format!("parameters (a={a}, b={b}) leave the admissible class")));
    }
    Ok(TrialFunction::from_shape(Arc::new(ParamShape { a, b }))?.normalized())
}

#[derive(Debug, Clone)]
struct Mixture {
    parts: Vec<(f64, TrialFunction)>,
}

impl Mixture {
    fn combine(&self, f: impl Fn(&TrialFunction) -> f64) -> f64 {
        self.parts
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .fold(f64::NEG_INFINITY, |acc, (w, t)| ln_add_exp(acc, w.ln() + f(t)))
    }
}

impl TrialShape for Mixture {
    fn ln_g(&self, u: f64) -> f64 {
        self.combine(|t| t.ln_g(u))
    }
    fn ln_h(&self, u: f64) -> f64 {
        self.combine(|t| t.ln_h(u))
    }
    fn left(&self) -> EndpointExponents {
        let active = self.parts.iter().filter(|(w, _)| *w > 0.0);
        active.fold(EndpointExponents { g: f64::INFINITY, h: f64::INFINITY }, |acc, (_, t)| {
            let e = t.left_exponents();
            EndpointExponents { g: acc.g.min(e.g), h: acc.h.min(e.h) }
        })
    }
    fn right(&self) -> EndpointExponents {
        let active = self.parts.iter().filter(|(w, _)| *w > 0.0);
        active.fold(EndpointExponents { g: f64::INFINITY, h: f64::INFINITY }, |acc, (_, t)| {
            let e = t.right_exponents();
            EndpointExponents { g: acc.g.min(e.g), h: acc.h.min(e.h) }
        })
    }
    fn integral(&self) -> Option<f64> {
        Some(self.parts.iter().map(|(w, t)| w * t.integral()).sum())
    }
    fn family(&self) -> &'static str {
        "mixture"
    }
    fn params(&self) -> Vec<f64> {
        self.parts.iter().map(|(w, _)| *w).collect()
    }
}

fn functional_prefactor_ln(mp: &MediaParams) -> f64 {
    let p = mp.p();
    p.ln() + (p - 1.0) * mp.m().ln() - (p - 1.0) / p * (p - 1.0).ln()
}

/// Quadrature settings used for `𝒥` and `J_g`.
pub fn functional_quadrature() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-11, 1e-300)
}

/// `∫₀¹ h^{1/p} F^{(p-1)/p} g^{(p-1)/p} du`.
pub fn numerator(g: &TrialFunction, mp: &MediaParams, r: &ReactionTerm) -> Result<f64> {
    let p = mp.p();
    let e = (p - 1.0) / p;
    let (l, rt) = (g.left_exponents(), g.right_exponents());
    let left = l.h / p + e * (mp.m() + l.g);
    let right = rt.h / p + e * (1.0 + rt.g);
    let spec = quad_hint(functional_quadrature(), left, right);
    let integrand = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let lh = g.ln_h(u);
        let lg = g.ln_g(u);
        if lg == f64::NEG_INFINITY || lh == f64::NEG_INFINITY {
            return 0.0;
        }
        (lh / p + e * (r.ln_big_f(mp, u) + lg)).exp()
    };
    Ok(integrate(integrand, 0.0, 1.0, &spec)?.value)
}

/// `𝒥[g]`.
pub fn j_functional(g: &TrialFunction, mp: &MediaParams, r: &ReactionTerm) -> Result<f64> {
    let num = numerator(g, mp, r)?;
    let value = (functional_prefactor_ln(mp) + num.ln() - g.integral().ln()).exp();
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::Numeric(format!("𝒥[g] evaluated to {value}")));
    }
    Ok(value)
}

/// `J_g[f] = ∫₀¹ [u^{m-1} h^m f g]^{1/(m+1)} du`, with `f` either the
/// reaction (`linear = false`) or its linearization `u f'(0)`.
pub fn j_g(g: &TrialFunction, m: f64, r: &ReactionTerm, linear: bool) -> Result<f64> {
    let inv = 1.0 / (m + 1.0);
    let (l, rt) = (g.left_exponents(), g.right_exponents());
    let left = ((m - 1.0) + m * l.h + 1.0 + l.g) * inv;
    let right = (m * rt.h + if linear { 0.0 } else { 1.0 } + rt.g) * inv;
    let spec = quad_hint(functional_quadrature(), left, right);
    let fp0 = r.fprime0().ln();
    let integrand = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let ln_u = u.ln();
        let ln_f = if linear { ln_u + fp0 } else { ln_u + r.f_over_u(u).ln() };
        (((m - 1.0) * ln_u + m * g.ln_h(u) + ln_f + g.ln_g(u)) * inv).exp()
    };
    Ok(integrate(integrand, 0.0, 1.0, &spec)?.value)
}

/// `𝒥[g_α]` along a decreasing `α` sequence; critical media only.
pub fn j_limit_galpha(mp: &MediaParams, r: &ReactionTerm, alphas: &[f64]) -> Result<Vec<f64>> {
    if !mp.is_critical() {
        return Err(Error::Precondition(format!(
            "the g_α sequence is a maximizing sequence only for gamma = 0, got {}",
            mp.gamma()
        )));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("alphas must be strictly decreasing".into()));
    }
    alphas
        .iter()
        .map(|&a| {
            if a < MIN_ALPHA {
                return Err(Error::Domain(format!("alpha {a} is below the floor {MIN_ALPHA}")));
            }
            j_functional(&trial_galpha(a)?, mp, r)
        })
        .collect()
}

/// Two-point Richardson extrapolation to `α = 0` using the last two values,
/// modelling the error as linear in `α`.
pub fn extrapolate_to_zero(alphas: &[f64], values: &[f64]) -> Result<f64> {
    let n = alphas.len();
    if n < 2 || values.len() != n {
        return Err(Error::Domain("extrapolation needs two or more (α, value) pairs".into()));
    }
    let (a1, a2) = (alphas[n - 2], alphas[n - 1]);
    let (v1, v2) = (values[n - 2], values[n - 1]);
    Ok((a1 * v2 - a2 * v1) / (a1 - a2))
}

/// `J_{g_α}[u f'(0)] = f'(0)^{1/(m+1)} α (1-α)^{-(m+2)/(m+1)} B((m+2)/(m+1), α/(1-α))`.
///
/// The first Beta argument is `(m+2)/(m+1)`: substituting `w = u^{1-α}` in
/// `∫ u^{α-1} (1 - u^{1-α})^{1/(m+1)} du` gives
/// `B(α/(1-α), 1 + 1/(m+1)) / (1-α)`. The variant with `(m+2)/m` disagrees
/// with direct quadrature (e.g. `m = 1, α = 1/2`: `B(3/2, 1) = 2/3` against
/// `B(3, 1) = 1/3`).
pub fn closed_form_j_linear(alpha: f64, m: f64, fprime0: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(m > 0.0) || !(fprime0 > 0.0) {
        return Err(Error::Domain(format!(
            "closed form needs 0 < α < 1, m > 0, f'(0) > 0 (α={alpha}, m={m}, f'(0)={fprime0})"
        )));
    }
    let inv = 1.0 / (m + 1.0);
    let lb = log_beta((m + 2.0) * inv, alpha / (1.0 - alpha))?;
    Ok((inv * fprime0.ln() + alpha.ln() - (m + 2.0) * inv * (1.0 - alpha).ln() + lb).exp())
}

/// Measured `|J_{g_α}[f] - J_{g_α}[u f'(0)]|` and the bound
/// `(m+1)/(α(m+1)+k) · α d^{1/(m+1)} / (1-α)^{1/(m+1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBound {
    pub measured_gap: f64,
    pub bound: f64,
}

pub fn linearization_gap_bound(alpha: f64, m: f64, r: &ReactionTerm) -> Result<GapBound> {
    if !(alpha > 0.0 && alpha < 1.0) || !(m > 0.0) {
        return Err(Error::Domain(format!("need 0 < α < 1 and m > 0 (α={alpha}, m={m})")));
    }
    let g = trial_galpha(alpha)?;
    let inv = 1.0 / (m + 1.0);
    let (d, k) = r.growth_constants();
    let fp0 = r.fprime0();
    // exponent N(α) = α - 1 + k/(m+1) of the difference integrand
    let n_alpha = alpha - 1.0 + k * inv;
    let spec = quad_hint(functional_quadrature(), n_alpha, 0.0);
    let integrand = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let ln_u = u.ln();
        let base = (((m - 1.0) * ln_u + m * g.ln_h(u) + ln_u + fp0.ln() + g.ln_g(u)) * inv).exp();
        let ratio = (r.f_over_u(u) / fp0).ln() * inv;
        base * ratio.exp_m1()
    };
    let measured_gap = integrate(integrand, 0.0, 1.0, &spec)?.value.abs();
    let bound = (m + 1.0) / (alpha * (m + 1.0) + k) * alpha * d.powf(inv) / (1.0 - alpha).powf(inv);
    Ok(GapBound { measured_gap, bound })
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Maximum number of `𝒥` evaluations; zero evaluates the default member.
    pub budget: usize,
    pub start: (f64, f64),
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { budget: 80, start: (1.0, 0.5) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyOptimum {
    pub params: Vec<f64>,
    pub value: f64,
    pub tolerance: f64,
    pub evaluations: usize,
}

/// Nelder-Mead search for the best lower bound within the `(a, b)` family.
pub fn optimize_family(mp: &MediaParams, r: &ReactionTerm, opts: &OptimizeOptions) -> Result<FamilyOptimum> {
    let objective = |x: &[f64]| -> f64 {
        let (a, b) = (x[0], x[1]);
        if !(PARAM_A_RANGE.0..=PARAM_A_RANGE.1).contains(&a) || !(PARAM_B_RANGE.0..=PARAM_B_RANGE.1).contains(&b) {
            return f64::INFINITY;
        }
        match trial_param(a, b).and_then(|g| j_functional(&g, mp, r)) {
            Ok(v) => -v,
            Err(e) => {
                log::debug!("rejected (a={a}, b={b}): {e}");
                f64::INFINITY
            }
        }
    };
    let (a0, b0) = opts.start;
    if opts.budget == 0 {
        let v = j_functional(&trial_param(a0, b0)?, mp, r)?;
        return Ok(FamilyOptimum { params: vec![a0, b0], value: v, tolerance: 1e-9 * v, evaluations: 1 });
    }
    let res = nelder_mead(objective, &[a0, b0], &[0.5, -0.25], opts.budget, 1e-10);
    if !res.value.is_finite() {
        return Err(Error::Numeric("no admissible member of the parametric family could be evaluated".into()));
    }
    let value = -res.value;
    Ok(FamilyOptimum { params: res.x, value, tolerance: 1e-9 * value, evaluations: res.evaluations })
}

/// Minimizer `q̂ = (g F / ((p-1) h))^{1/p}` of
/// `Φ(q) = h q^{p-1} + g F / q` and the minimum value `Φ(q̂)`.
pub fn pointwise_min(g: f64, h: f64, big_f: f64, p: f64) -> (f64, f64) {
    let q_hat = (g * big_f / ((p - 1.0) * h)).powf(1.0 / p);
    let e = (p - 1.0) / p;
    let phi = p * (g * big_f).powf(e) * h.powf(1.0 / p) / (p - 1.0).powf(e);
    (q_hat, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(m: f64, p: f64) -> MediaParams {
        MediaParams::new(m, p).unwrap()
    }

    #[test]
    fn galpha_examples() {
        let g = trial_galpha(0.5).unwrap();
        assert!((g.g(0.25) - 1.0).abs() < 1e-14);
        for a in [0.9, 0.5, 0.1, 0.01] {
            let g = trial_galpha(a).unwrap();
            assert_eq!(g.g(1.0), 0.0);
            let q = integrate(|u| g.g(u), 0.0, 1.0, &QuadratureSpec::default().left_singular(a - 1.0)).unwrap();
            assert!((q.value - 1.0).abs() < 1e-9, "α={a}: {}", q.value);
            assert!((g.h(0.3) - a * 0.3f64.powf(a - 2.0)).abs() < 1e-12 * g.h(0.3));
        }
        assert!(trial_galpha(0.0).is_err());
        assert!(trial_galpha(1.0).is_err());
    }

    #[test]
    fn h_is_minus_g_prime() {
        let trials = vec![
            trial_galpha(0.3).unwrap(),
            trial_param(1.5, 0.4).unwrap(),
            trial_param(0.0, 1.0).unwrap(),
            trial_param(2.0, 1.0).unwrap(),
            trial_zfk(&mp(1.5, 2.5), &ReactionTerm::sine(1.0).unwrap()).unwrap(),
        ];
        for g in trials {
            for &u in &[0.05, 0.3, 0.6, 0.9] {
                let d = 1e-6;
                let fd = -(g.g(u + d) - g.g(u - d)) / (2.0 * d);
                assert!((fd - g.h(u)).abs() < 1e-6 * g.h(u).max(1.0), "{} at {u}: {fd} vs {}", g.family(), g.h(u));
            }
        }
    }

    #[test]
    fn j_of_one_minus_u() {
        let g = trial_param(0.0, 1.0).unwrap();
        assert!((g.g(0.3) - 2.0 * 0.7).abs() < 1e-14);
        let v = j_functional(&g, &mp(1.0, 2.0), &ReactionTerm::kpp()).unwrap();
        assert!((v - 16.0 / 15.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn j_is_scale_invariant() {
        let (m, r) = (mp(2.0, 2.0), ReactionTerm::kpp());
        let g = trial_param(1.2, 0.7).unwrap();
        let base = j_functional(&g, &m, &r).unwrap();
        for lambda in [1e-3, 1.0, 1e3] {
            let v = j_functional(&g.scaled(lambda), &m, &r).unwrap();
            assert!((v - base).abs() < 1e-10 * base);
        }
    }

    #[test]
    fn zfk_trial_examples() {
        let (m, r) = (mp(1.0, 2.0), ReactionTerm::kpp());
        let g = trial_zfk(&m, &r).unwrap();
        assert_eq!(g.g(1.0), 0.0);
        assert!((g.g(1e-300) - (1.0f64 / 6.0).sqrt()).abs() < 1e-10);
        for m2 in [mp(1.0, 2.0), mp(2.0, 2.5), mp(0.5, 3.0)] {
            let g = trial_zfk(&m2, &r).unwrap();
            for i in 1..40 {
                let u = i as f64 / 40.0;
                let lhs = g.h(u) * g.g(u).powf(m2.p() - 1.0);
                let rhs = r.eval_big_f(&m2, u).unwrap() / m2.p();
                assert!((lhs - rhs).abs() < 1e-10, "u={u}: {lhs} vs {rhs}");
            }
        }
        let v = j_functional(&g, &m, &r).unwrap();
        assert!(v > (1.0f64 / 3.0).sqrt() && v < 2.0, "{v}");
        // frozen regression value (quadrature, m = 1, p = 2, kpp)
        assert!((v - ZFK_TRIAL_KPP_M1P2).abs() < 1e-8, "{v}");
    }

    // 𝒥 of the ZFK trial for m = 1, p = 2, kpp; computed independently with
    // scipy.integrate.quad and frozen.
    const ZFK_TRIAL_KPP_M1P2: f64 = 0.903_195_769_212_880_8;

    #[test]
    fn critical_identity_between_functionals() {
        for (m, p) in [(1.0, 2.0), (2.0, 1.5), (0.5, 3.0)] {
            let media = mp(m, p);
            for r in [ReactionTerm::kpp(), ReactionTerm::sine(1.0).unwrap()] {
                let g = trial_param(1.0, 0.6).unwrap();
                let lhs = j_functional(&g, &media, &r).unwrap();
                let rhs = p * m.powf(2.0 / (m + 1.0)) * j_g(&g, m, &r, false).unwrap();
                assert!((lhs - rhs).abs() < 1e-9 * lhs, "({m},{p}): {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let v = closed_form_j_linear(0.5, 1.0, 1.0).unwrap();
        assert!((v - 2.0 / 3.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((v - 0.942_81).abs() < 1e-5);
        for m in [0.5, 1.0, 3.0] {
            let v = closed_form_j_linear(1e-7, m, 2.0).unwrap();
            assert!((v - 2f64.powf(1.0 / (m + 1.0))).abs() < 1e-5);
            let scaled = closed_form_j_linear(0.3, m, 6.0).unwrap() / closed_form_j_linear(0.3, m, 2.0).unwrap();
            assert!((scaled - 3f64.powf(1.0 / (m + 1.0))).abs() < 1e-13);
        }
        assert!(closed_form_j_linear(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let r = ReactionTerm::kpp();
        for alpha in [0.5, 0.25, 0.1, 0.02] {
            for m in [0.5, 1.0, 2.0, 3.0] {
                let quad = j_g(&trial_galpha(alpha).unwrap(), m, &r, true).unwrap();
                let closed = closed_form_j_linear(alpha, m, 1.0).unwrap();
                assert!(((quad - closed) / closed).abs() < 1e-8, "α={alpha} m={m}: {quad} vs {closed}");
            }
        }
    }

    #[test]
    fn linearization_gap_example() {
        let gb = linearization_gap_bound(0.25, 1.0, &ReactionTerm::kpp()).unwrap();
        let want = 2.0 / 1.5 * 0.25 / 0.75f64.sqrt();
        assert!((gb.bound - want).abs() < 1e-14);
        assert!((gb.bound - 0.3849).abs() < 1e-4);
        assert!(gb.measured_gap <= gb.bound);
        let direct = (j_g(&trial_galpha(0.25).unwrap(), 1.0, &ReactionTerm::kpp(), false).unwrap()
            - j_g(&trial_galpha(0.25).unwrap(), 1.0, &ReactionTerm::kpp(), true).unwrap())
        .abs();
        assert!((direct - gb.measured_gap).abs() < 1e-9);
    }

    #[test]
    fn gap_bound_vanishes_with_alpha() {
        let r = ReactionTerm::sine(1.0).unwrap();
        let mut last = f64::INFINITY;
        for a in [0.5, 0.1, 0.01, 1e-4] {
            let b = linearization_gap_bound(a, 2.0, &r).unwrap().bound;
            assert!(b < last);
            last = b;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn galpha_limit_requires_critical_medium() {
        assert!(matches!(
            j_limit_galpha(&mp(2.0, 2.0), &ReactionTerm::kpp(), &[0.1, 0.05]),
            Err(Error::Precondition(_))
        ));
        assert!(j_limit_galpha(&mp(1.0, 2.0), &ReactionTerm::kpp(), &[0.05, 0.1]).is_err());
    }

    #[test]
    fn mixtures_and_class_checks() {
        let g1 = trial_param(2.0, 1.0).unwrap();
        let g2 = trial_galpha(0.4).unwrap();
        let mix = TrialFunction::mix(0.3, &g1, &g2).unwrap();
        assert!((mix.integral() - 1.0).abs() < 1e-9);
        let u = 0.37;
        assert!((mix.g(u) - (0.3 * g1.g(u) + 0.7 * g2.g(u))).abs() < 1e-12);
        assert!(trial_param(1.0, 1.5).is_err());
        assert!(trial_param(-0.5, 0.5).is_err());
    }

    #[test]
    fn concave_along_segments() {
        let pairs = [
            (trial_param(2.0, 1.0).unwrap(), trial_galpha(0.4).unwrap()),
            (trial_param(0.5, 0.3).unwrap(), trial_param(3.0, 0.9).unwrap()),
        ];
        for media in [mp(1.0, 2.0), mp(2.0, 2.0), mp(1.5, 3.0)] {
            let r = ReactionTerm::kpp();
            for (g1, g2) in &pairs {
                let (j1, j2) = (j_functional(g1, &media, &r).unwrap(), j_functional(g2, &media, &r).unwrap());
                for w in [0.25, 0.5, 0.75] {
                    let jm = j_functional(&TrialFunction::mix(w, g1, g2).unwrap(), &media, &r).unwrap();
                    assert!(jm >= w * j1 + (1.0 - w) * j2 - 1e-9, "{jm} < mix of {j1}, {j2}");
                }
            }
        }
    }

    #[test]
    fn zero_budget_returns_default_member() {
        let (m, r) = (mp(1.0, 2.0), ReactionTerm::kpp());
        let opt = optimize_family(&m, &r, &OptimizeOptions { budget: 0, ..Default::default() }).unwrap();
        assert_eq!(opt.params, vec![1.0, 0.5]);
        let direct = j_functional(&trial_param(1.0, 0.5).unwrap(), &m, &r).unwrap();
        assert_eq!(opt.value, direct);
    }
}
