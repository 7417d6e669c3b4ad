//! Phase-plane shooting for travelling fronts.
//!
//! With `q = u^{m-1} u'` and `w = q^{p-1}` the front ODE becomes
//! `dw/du = K - F(u) w^{-1/(p-1)}` with `K = c/m^{p-1}`. Trajectories leave
//! `(u, w) = (1, 0)` along the unstable direction and are followed toward
//! `u = 0`. Below the minimal speed `w` stays bounded away from zero
//! (overshoot); at or above it, `w → 0`.
//!
//! Integration is carried out in `t = -ln u`, `z = ln(w/u)`:
//!
//! ```text
//! z' = 1 - K e^{-z} + G(t) e^{-z p/(p-1)},   G = u^{γ/(p-1)} (f/u) m^{1-p}
//! ```
//!
//! which keeps every quantity O(1) down to `u = e^{-700}`. Along the same
//! pass `I' = K e^{-z}` accumulates `∫ K/w du`, needed for the maximizer.

use std::io::Write;
use std::sync::Arc;

use crate::bounds::{upper_bound, zfk_lower, EstimateKind, Method, SpeedEstimate};
use crate::error::{Error, Result};
use crate::numerics::{hermite, Dopri5, OdeOutcome, Sample, StepControl};
use crate::reaction::{MediaParams, ReactionTerm};
use crate::variational::{EndpointExponents, TrialFunction, TrialShape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `w → 0` as `u → 0`: a front exists at this speed.
    Connected,
    /// `w/u` passed `K` at `u_exit`, after which `w` cannot return to zero.
    Overshoot { u_exit: f64 },
    /// The stepper gave up at `u`.
    StepFailure { u: f64 },
}

impl Termination {
    pub fn is_connected(&self) -> bool {
        matches!(self, Termination::Connected)
    }
}

/// Launch data near `u = 1`: `w ≈ a (1-u)^β` for `1 - u ≤ s0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub a: f64,
    pub beta: f64,
    pub s0: f64,
}

impl Seed {
    fn ln_w(&self, s: f64) -> f64 {
        self.a.ln() + self.beta * s.ln()
    }

    /// `∫_s^{s0} K/w`, the seed-region contribution to `I`.
    fn inner_integral(&self, k: f64, s: f64) -> f64 {
        let scale = k / self.a;
        if (self.beta - 1.0).abs() < 1e-12 {
            scale * (self.s0 / s).ln()
        } else {
            let e = 1.0 - self.beta;
            scale * (self.s0.powf(e) - s.powf(e)) / e
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Absolute tolerance on the returned speed.
    pub tol: f64,
    /// Launch offset from `u = 1` (used as is unless `p > 2`).
    pub epsilon: f64,
    /// Integration ends at `u = e^{-t_max}`.
    pub t_max: f64,
    /// Number of speeds in the monotonicity scan.
    pub scan_points: usize,
    /// Target stiffness ratio at the launch point when `p > 2`.
    pub stiffness_ratio: f64,
    /// The connected certificate is tried only for `u` below this.
    pub certificate_u: f64,
    pub ode: Dopri5,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            epsilon: 1e-6,
            t_max: 700.0,
            scan_points: 16,
            stiffness_ratio: 50.0,
            certificate_u: 1e-2,
            ode: Dopri5::default(),
        }
    }
}

/// Sampled solution of the phase-plane ODE at one speed.
#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    speed: f64,
    mp: MediaParams,
    reaction: ReactionTerm,
    seed: Seed,
    /// `t`, `[z, I]`, derivatives.
    samples: Vec<Sample<2>>,
    termination: Termination,
}

impl PhaseTrajectory {
    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn media(&self) -> &MediaParams {
        &self.mp
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `K = c/m^{p-1}`.
    pub fn drift(&self) -> f64 {
        self.speed / self.mp.m_pow()
    }

    /// Sample abscissae, strictly decreasing.
    pub fn u(&self) -> Vec<f64> {
        self.samples.iter().map(|s| (-s.t).exp()).collect()
    }

    pub fn w(&self) -> Vec<f64> {
        self.samples.iter().map(|s| (s.y[0] - s.t).exp()).collect()
    }

    pub fn q(&self) -> Vec<f64> {
        let e = 1.0 / (self.mp.p() - 1.0);
        self.samples.iter().map(|s| ((s.y[0] - s.t) * e).exp()).collect()
    }

    /// `ln(w/u)` at the samples.
    pub fn z(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y[0]).collect()
    }

    /// Least-squares slope of `w` against `u` over samples with `u < u_hi`.
    pub fn slope_near_zero(&self, u_hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.u().into_iter().zip(self.w()).filter(|(u, _)| *u < u_hi).collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let (su, sw) = pts.iter().fold((0.0, 0.0), |a, (u, w)| (a.0 + u, a.1 + w));
        let (mu, mw) = (su / n, sw / n);
        let (num, den) = pts.iter().fold((0.0, 0.0), |a, (u, w)| (a.0 + (u - mu) * (w - mw), a.1 + (u - mu).powi(2)));
        Some(num / den)
    }

    /// Writes `u,w,q` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "u,w,q")?;
        for ((u, w), q) in self.u().into_iter().zip(self.w()).zip(self.q()) {
            writeln!(out, "{u:.10e},{w:.10e},{q:.10e}")?;
        }
        Ok(())
    }
}

fn launch_seed(mp: &MediaParams, r: &ReactionTerm, k: f64, opts: &ShootingOptions) -> Seed {
    let p = mp.p();
    let k1 = r.fprime1().abs() / mp.m_pow();
    let eps = opts.epsilon;
    if k1 <= 0.0 {
        return Seed { a: 1.0, beta: 2.0, s0: eps };
    }
    if (p - 2.0).abs() < 1e-12 {
        let a = 0.5 * (-k + (k * k + 4.0 * k1).sqrt());
        return Seed { a, beta: 1.0, s0: eps };
    }
    if p < 2.0 {
        let beta = 2.0 * (p - 1.0) / p;
        let a = (k1 / beta).powf((p - 1.0) / p);
        return Seed { a, beta, s0: eps };
    }
    // Slow manifold w ≈ (K1 s/K)^{p-1}; start where its attraction rate
    // exceeds the local scale by the requested ratio.
    let stiff = k.powf(p) / ((p - 1.0) * k1.powf(p - 1.0));
    let s0 = (stiff / opts.stiffness_ratio).powf(1.0 / (p - 2.0)).clamp(eps, 0.02);
    Seed { a: (k1 / k).powf(p - 1.0), beta: p - 1.0, s0 }
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Integrates the trajectory launched from `u = 1` at speed `c`.
pub fn integrate_trajectory(mp: &MediaParams, r: &ReactionTerm, c: f64, opts: &ShootingOptions) -> Result<PhaseTrajectory> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("speed must be positive, got {c}")));
    }
    let p = mp.p();
    let k = c / mp.m_pow();
    let ln_k = k.ln();
    let seed = launch_seed(mp, r, k, opts);
    let ratio = p / (p - 1.0);
    let decay = mp.gamma() / (p - 1.0);
    let ln_mpow = mp.m_pow().ln();
    let ln_g = move |t: f64| -t * decay + r.f_over_u((-t).exp()).ln() - ln_mpow;

    let t0 = -(-seed.s0).ln_1p();
    let z0 = seed.ln_w(seed.s0) + t0;
    let rhs = |t: f64, y: &[f64; 2]| {
        let drift = (ln_k - y[0]).exp();
        [1.0 - drift + (ln_g(t) - y[0] * ratio).exp(), drift]
    };

    // Barrier for γ > 0: with G bounded by its supremum, z stays below the
    // upper root of 1 - K x + G x^r once it gets there.
    let certify = !mp.is_critical();
    let t_cert = -opts.certificate_u.ln();
    let ln_gmax0 = r.sup_f_over_u().ln() - ln_mpow;
    let ln_ratio = ratio.ln();
    let ln_p = p.ln();
    let connected_certificate = |t: f64, z: f64| {
        let ln_gmax = ln_gmax0 - t * decay;
        let ln_xmin = (p - 1.0) * (ln_k - ln_gmax - ln_ratio);
        if ln_k + ln_xmin - ln_p < 0.0 {
            return false;
        }
        let ln_x = -z;
        ln_x >= ln_xmin || ln_add_exp(0.0, ln_gmax + ratio * ln_x) <= ln_k + ln_x
    };

    let mut verdict = Termination::Connected;
    let mut samples = Vec::new();
    let outcome = opts.ode.integrate(rhs, t0, [z0, 0.0], opts.t_max, &mut samples, |s: &Sample<2>| {
        let (t, z) = (s.t, s.y[0]);
        if z >= ln_k {
            verdict = Termination::Overshoot { u_exit: (-t).exp() };
            return StepControl::Stop;
        }
        if certify && t >= t_cert && z < ln_k && connected_certificate(t, z) {
            return StepControl::Stop;
        }
        StepControl::Continue
    });
    if let OdeOutcome::StepFailure { t } = outcome {
        verdict = Termination::StepFailure { u: (-t).exp() };
    }
    Ok(PhaseTrajectory { speed: c, mp: *mp, reaction: r.clone(), seed, samples, termination: verdict })
}

/// `true` if the trajectory at speed `c` connects to the origin.
pub fn is_connected(mp: &MediaParams, r: &ReactionTerm, c: f64, opts: &ShootingOptions) -> Result<bool> {
    let traj = integrate_trajectory(mp, r, c, opts)?;
    match traj.termination {
        Termination::Connected => Ok(true),
        Termination::Overshoot { .. } => Ok(false),
        Termination::StepFailure { u } => Err(Error::Numeric(format!("trajectory at c = {c} failed at u = {u:e}"))),
    }
}

/// Result of the shooting search: the speed and the connected trajectory at
/// the upper end of the final bracket.
#[derive(Debug, Clone)]
pub struct Shot {
    pub estimate: SpeedEstimate,
    pub trajectory: PhaseTrajectory,
    pub bracket: (f64, f64),
}

fn scan_bracket(mp: &MediaParams, r: &ReactionTerm, lo: f64, hi: f64, opts: &ShootingOptions) -> Result<()> {
    let n = opts.scan_points.max(2);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        rows.push((c, is_connected(mp, r, c, opts)?));
    }
    if rows.windows(2).any(|w| w[0].1 && !w[1].1) {
        let table = rows
            .iter()
            .map(|(c, ok)| format!("  c = {c:.10}  {}", if *ok { "connected" } else { "overshoot" }))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(Error::NonMonotone { table });
    }
    Ok(())
}

fn shoot_with(mp: &MediaParams, r: &ReactionTerm, opts: &ShootingOptions) -> Result<Shot> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut lo = 0.9 * zfk_lower(mp, r)?.value;
    let mut hi = match upper_bound(mp, r) {
        Ok(u) => 1.1 * u.value,
        Err(e) => {
            log::warn!("upper bound unavailable ({e}); doubling from the lower bound");
            2.0 * lo
        }
    };
    for _ in 0..60 {
        if !is_connected(mp, r, lo, opts)? {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..60 {
        if is_connected(mp, r, hi, opts)? {
            break;
        }
        hi *= 2.0;
    }
    if is_connected(mp, r, lo, opts)? || !is_connected(mp, r, hi, opts)? {
        return Err(Error::Bracketing { lo, hi });
    }
    scan_bracket(mp, r, lo, hi, opts)?;
    let mut upper_traj = integrate_trajectory(mp, r, hi, opts)?;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let traj = integrate_trajectory(mp, r, mid, opts)?;
        match traj.termination {
            Termination::Connected => {
                hi = mid;
                upper_traj = traj;
            }
            Termination::Overshoot { .. } => lo = mid,
            Termination::StepFailure { u } => {
                return Err(Error::Numeric(format!("trajectory at c = {mid} failed at u = {u:e}")))
            }
        }
    }
    let c = 0.5 * (lo + hi);
    // Pulled fronts only reveal an overshoot after t ~ π/√(c0 - c), so the
    // finite depth t_max leaves a bias of order c (π/t_max)^2.
    let tolerance = if mp.is_critical() {
        opts.tol.max(c * (std::f64::consts::PI / opts.t_max).powi(2))
    } else {
        opts.tol
    };
    let estimate = SpeedEstimate::new(c, EstimateKind::Numeric, Method::Shooting, tolerance, mp, r)?;
    Ok(Shot { estimate, trajectory: upper_traj, bracket: (lo, hi) })
}

/// Minimal speed by bisection on the connected/overshoot classification,
/// returning the connected trajectory at the upper bracket as well.
pub fn shoot(mp: &MediaParams, r: &ReactionTerm, opts: &ShootingOptions) -> Result<Shot> {
    let shot = shoot_with(mp, r, opts)?;
    if r.fprime1() == 0.0 {
        // launch point is a guess here; confirm it does not matter
        let wider = ShootingOptions { epsilon: 2.0 * opts.epsilon, ..*opts };
        let other = shoot_with(mp, r, &wider)?;
        let shift = (other.estimate.value - shot.estimate.value).abs();
        if shift > opts.tol / 10.0 {
            log::warn!("minimal speed moved by {shift:e} when the launch offset was doubled");
        }
    }
    Ok(shot)
}

pub fn minimal_speed(mp: &MediaParams, r: &ReactionTerm, opts: &ShootingOptions) -> Result<SpeedEstimate> {
    Ok(shoot(mp, r, opts)?.estimate)
}

/// Maximizer of the functional rebuilt from the trajectory at `c*`:
///
/// ```text
/// g̃(u) = m q(u) c^{-1/(p-1)} exp( (1/(p-1)) ∫_u^{u0} K/w ),   h̃ = g̃ F / ((p-1) q^p)
/// ```
///
/// Below the point where the numerical trajectory peels off the separatrix,
/// `w = K u` is used, which makes `g̃` constant there.
#[derive(Debug, Clone)]
struct MaximizerShape {
    mp: MediaParams,
    reaction: ReactionTerm,
    k: f64,
    seed: Seed,
    t_start: f64,
    samples: Vec<Sample<2>>,
    t_cut: f64,
    i_cut: f64,
    ln_pref: f64,
    i_ref: f64,
    u0: f64,
}

impl MaximizerShape {
    /// `(ln w, I)` at `t = -ln u`.
    fn state(&self, u: f64) -> (f64, f64) {
        let t = -u.ln();
        if t <= self.t_start {
            let s = -(-t).exp_m1();
            return (self.seed.ln_w(s), -self.seed.inner_integral(self.k, s));
        }
        if t >= self.t_cut {
            return (self.k.ln() - t, self.i_cut + (t - self.t_cut));
        }
        let j = self.samples.partition_point(|s| s.t <= t).clamp(1, self.samples.len() - 1);
        let y = hermite(&self.samples[j - 1], &self.samples[j], t);
        (y[0] - t, y[1])
    }

    fn ln_g_with(&self, ln_w: f64, i: f64) -> f64 {
        self.ln_pref + (ln_w + i - self.i_ref) / (self.mp.p() - 1.0)
    }
}

impl TrialShape for MaximizerShape {
    fn ln_g(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let (ln_w, i) = self.state(u);
        self.ln_g_with(ln_w, i)
    }
    fn ln_h(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let p = self.mp.p();
        let (ln_w, i) = self.state(u);
        self.ln_g_with(ln_w, i) + self.reaction.ln_big_f(&self.mp, u) - (p - 1.0).ln() - p / (p - 1.0) * ln_w
    }
    fn left(&self) -> EndpointExponents {
        let p = self.mp.p();
        EndpointExponents { g: 0.0, h: (self.mp.gamma() + 1.0 - p) / (p - 1.0) }
    }
    fn family(&self) -> &'static str {
        "maximizer"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.k * self.mp.m_pow(), self.u0]
    }
}

/// Rebuilds the maximizing trial function (normalized) from a connected
/// trajectory at the minimal speed.
pub fn reconstruct_maximizer(traj: &PhaseTrajectory, u0: f64) -> Result<TrialFunction> {
    let mp = traj.mp;
    if mp.is_critical() {
        return Err(Error::Precondition(
            "gamma = 0 has no attained maximizer; use the g_alpha sequence instead".into(),
        ));
    }
    if !traj.termination.is_connected() {
        return Err(Error::Precondition(format!(
            "maximizer needs a connected trajectory, got {:?}",
            traj.termination
        )));
    }
    if !(u0 > 0.0 && u0 < 1.0) {
        return Err(Error::Domain(format!("reference point u0 must lie in (0, 1), got {u0}")));
    }
    if traj.samples.len() < 4 {
        return Err(Error::Numeric("trajectory too short to rebuild the maximizer".into()));
    }
    // cut where z = ln(w/u) peaks, before the trajectory peels away
    let cut = traj
        .samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.y[0].total_cmp(&b.1.y[0]))
        .map(|(i, _)| i)
        .unwrap_or(traj.samples.len() - 1)
        .max(1);
    let samples = traj.samples[..=cut].to_vec();
    let c = traj.speed;
    let p = mp.p();
    let mut shape = MaximizerShape {
        mp,
        reaction: traj.reaction.clone(),
        k: traj.drift(),
        seed: traj.seed,
        t_start: samples[0].t,
        t_cut: samples[cut].t,
        i_cut: samples[cut].y[1],
        samples,
        ln_pref: mp.m().ln() - c.ln() / (p - 1.0),
        i_ref: 0.0,
        u0,
    };
    shape.i_ref = shape.state(u0).1;
    Ok(TrialFunction::from_shape(Arc::new(shape))?.normalized())
}
