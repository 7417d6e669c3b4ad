//! Explicit finite-volume simulation of
//! `u_t = (|(u^m)_x|^{p-2} (u^m)_x)_x + f(u)`.
//!
//! Fronts run to the right: `u = 1` is held at the rear boundary and
//! `u = 0` at the far end, so front positions increase with time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reaction::{MediaParams, ReactionTerm};

/// Values outside `[0, 1]` by more than this count as a scheme failure in
/// [`step_raw`] diagnostics.
pub const CLIP_TOL: f64 = 1e-12;

/// Level tracked as the front position.
pub const FRONT_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub cells: usize,
    pub length: f64,
    pub t_max: f64,
    /// Fraction of the explicit stability limit used for `dt`.
    pub cfl: f64,
    /// Number of front samples over the run.
    pub samples: usize,
    /// Steps between time-step updates.
    pub dt_refresh: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { cells: 4096, length: 400.0, t_max: 150.0, cfl: 0.4, samples: 300, dt_refresh: 100 }
    }
}

impl SimConfig {
    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    fn validate(&self) -> Result<()> {
        if self.cells < 16 || !(self.length > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need at least 16 cells and positive length/time (cells={}, length={}, t_max={})",
                self.cells, self.length, self.t_max
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) || self.samples < 4 || self.dt_refresh == 0 {
            return Err(Error::InvalidParams("cfl must lie in (0, 1], samples >= 4, dt_refresh >= 1".into()));
        }
        Ok(())
    }
}

/// Pointwise pieces of the flux, with cheap paths for common exponents.
#[derive(Debug, Clone, Copy)]
struct Flux {
    m: f64,
    p: f64,
}

impl Flux {
    #[inline]
    fn potential(&self, u: f64) -> f64 {
        if self.m == 1.0 {
            u
        } else if self.m == 2.0 {
            u * u
        } else {
            u.powf(self.m)
        }
    }

    #[inline]
    fn of_slope(&self, s: f64) -> f64 {
        if self.p == 2.0 || s == 0.0 {
            s
        } else if self.p == 1.5 {
            s / s.abs().sqrt()
        } else if self.p == 3.0 {
            s * s.abs()
        } else {
            s * s.abs().powf(self.p - 2.0)
        }
    }
}

/// Slope floor used in the stability estimate when `p < 2`, where the
/// effective diffusivity `(p-1)|s|^{p-2}` blows up on flat stretches.
const SLOPE_FLOOR: f64 = 0.1;

/// Largest stable explicit step for the current state.
pub fn stable_dt(u: &[f64], mp: &MediaParams, r: &ReactionTerm, dx: f64, cfl: f64) -> f64 {
    let flux = Flux { m: mp.m(), p: mp.p() };
    let (m, p) = (mp.m(), mp.p());
    let mut d_max: f64 = 0.0;
    let mut prev = flux.potential(1.0);
    let mut prev_u: f64 = 1.0;
    for &ui in u.iter().chain(std::iter::once(&0.0)) {
        let v = flux.potential(ui);
        let s = ((v - prev) / dx).abs();
        let s = if p < 2.0 { s.max(SLOPE_FLOOR) } else { s };
        let ubar = prev_u.max(ui);
        let mobility = if m == 1.0 { 1.0 } else { m * ubar.powf(m - 1.0) };
        let slope_factor = if p == 2.0 { 1.0 } else { (p - 1.0) * s.powf(p - 2.0) };
        d_max = d_max.max(slope_factor * mobility);
        prev = v;
        prev_u = ui;
    }
    let d_max = d_max.max(1e-12);
    let lipschitz = r.fprime0().max(r.fprime1().abs());
    (cfl * dx * dx / (2.0 * d_max)).min(cfl / lipschitz)
}

/// One explicit Euler step without clipping.
pub fn step_raw(u: &[f64], mp: &MediaParams, r: &ReactionTerm, dx: f64, dt: f64) -> Vec<f64> {
    let flux = Flux { m: mp.m(), p: mp.p() };
    let n = u.len();
    let mut out = Vec::with_capacity(n);
    let inv_dx = 1.0 / dx;
    let mut v_left = flux.potential(1.0);
    let mut v_here = flux.potential(u[0]);
    let mut phi_left = flux.of_slope((v_here - v_left) * inv_dx);
    for i in 0..n {
        let v_right = if i + 1 < n { flux.potential(u[i + 1]) } else { 0.0 };
        let phi_right = flux.of_slope((v_right - v_here) * inv_dx);
        out.push(u[i] + dt * ((phi_right - phi_left) * inv_dx + r.f(u[i])));
        v_left = v_here;
        v_here = v_right;
        phi_left = phi_right;
    }
    let _ = v_left;
    out
}

/// One explicit step, clipped to `[0, 1]`.
pub fn step(u: &[f64], mp: &MediaParams, r: &ReactionTerm, dx: f64, dt: f64) -> Result<Vec<f64>> {
    let mut next = step_raw(u, mp, r, dx, dt);
    for (i, x) in next.iter_mut().enumerate() {
        if !x.is_finite() {
            return Err(Error::BlowUp { cell: i, time: f64::NAN });
        }
        *x = x.clamp(0.0, 1.0);
    }
    Ok(next)
}

/// Step-like start: `u = 1` left of `L/10`, `0` beyond, linear over 4 cells.
pub fn initial_state(cfg: &SimConfig) -> Vec<f64> {
    let dx = cfg.dx();
    let x0 = cfg.length / 10.0;
    let ramp = 4.0 * dx;
    (0..cfg.cells)
        .map(|i| {
            let x = (i as f64 + 0.5) * dx;
            (0.5 - (x - x0) / ramp).clamp(0.0, 1.0)
        })
        .collect()
}

/// Rightmost crossing of [`FRONT_LEVEL`], linearly interpolated.
pub fn front_position(u: &[f64], dx: f64) -> Option<f64> {
    let i = (0..u.len().saturating_sub(1)).rev().find(|&i| u[i] >= FRONT_LEVEL && u[i + 1] < FRONT_LEVEL)?;
    let frac = (u[i] - FRONT_LEVEL) / (u[i] - u[i + 1]);
    Some((i as f64 + 0.5 + frac) * dx)
}

/// Index of the last cell above `level`.
pub fn leading_edge(u: &[f64], level: f64) -> Option<usize> {
    u.iter().rposition(|&x| x > level)
}

/// `true` if every cell beyond the last one above 1e-6 (plus two) is below 1e-12.
pub fn edge_is_compact(u: &[f64]) -> bool {
    match leading_edge(u, 1e-6) {
        Some(j) => u.iter().skip(j + 3).all(|&x| x < 1e-12),
        None => true,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontHistory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub speed: f64,
    /// RMS deviation from the fitted line over the fit window.
    pub residual: f64,
    pub displacement: f64,
    /// Leading edge stayed compact over the whole fit window.
    pub compact_edge: bool,
    pub cells: usize,
    pub length: f64,
    pub dx: f64,
    /// Smallest step used.
    pub dt: f64,
}

impl FrontHistory {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,front_position")?;
        for (t, x) in self.times.iter().zip(&self.positions) {
            writeln!(out, "{t:.10e},{x:.10e}")?;
        }
        Ok(())
    }
}

fn linear_fit(t: &[f64], x: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let (mt, mx) = (t.iter().sum::<f64>() / n, x.iter().sum::<f64>() / n);
    let stt: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    let stx: f64 = t.iter().zip(x).map(|(a, b)| (a - mt) * (b - mx)).sum();
    let slope = stx / stt;
    let intercept = mx - slope * mt;
    let rms = (t.iter().zip(x).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Runs the simulation, calling `observer(t, state)` at every sample.
pub fn measure_speed_with<O: FnMut(f64, &[f64])>(
    mp: &MediaParams,
    r: &ReactionTerm,
    cfg: &SimConfig,
    mut observer: O,
) -> Result<FrontHistory> {
    cfg.validate()?;
    let dx = cfg.dx();
    let mut u = initial_state(cfg);
    let boundary_guard = cfg.cells - (cfg.cells / 50).max(3);
    let sample_dt = cfg.t_max / cfg.samples as f64;
    let (mut times, mut positions, mut compact) = (Vec::new(), Vec::new(), Vec::new());
    let mut t = 0.0;
    let mut dt = stable_dt(&u, mp, r, dx, cfg.cfl);
    let mut dt_min = dt;
    let mut steps = 0usize;
    let mut next_sample = 0.0;
    loop {
        if t >= next_sample - 1e-12 {
            observer(t, &u);
            if leading_edge(&u, 1e-6).is_some_and(|j| j >= boundary_guard) {
                return Err(Error::FrontAtBoundary { time: t });
            }
            let x = front_position(&u, dx)
                .ok_or_else(|| Error::Inconclusive(format!("no level-{FRONT_LEVEL} crossing at t = {t}")))?;
            times.push(t);
            positions.push(x);
            compact.push(edge_is_compact(&u));
            next_sample += sample_dt;
        }
        if t >= cfg.t_max - 1e-12 {
            break;
        }
        if steps % cfg.dt_refresh == 0 {
            dt = stable_dt(&u, mp, r, dx, cfg.cfl);
            dt_min = dt_min.min(dt);
        }
        let h = dt.min(next_sample - t).max(1e-300);
        let next = step_raw(&u, mp, r, dx, h);
        for (i, (dst, x)) in u.iter_mut().zip(next).enumerate() {
            if !x.is_finite() {
                return Err(Error::BlowUp { cell: i, time: t });
            }
            *dst = x.clamp(0.0, 1.0);
        }
        t += h;
        steps += 1;
    }
    let half = times.len() / 2;
    let (speed, _, residual) = linear_fit(&times[half..], &positions[half..]);
    let displacement = positions[positions.len() - 1] - positions[half];
    if !(speed > 0.0) {
        return Err(Error::Inconclusive(format!("front did not advance (fitted speed {speed})")));
    }
    if residual > 0.01 * displacement.abs() {
        return Err(Error::Inconclusive(format!(
            "front motion is not linear over the fit window (residual {residual:.3e}, displacement {displacement:.3e})"
        )));
    }
    Ok(FrontHistory {
        compact_edge: compact[half..].iter().all(|&c| c),
        times,
        positions,
        speed,
        residual,
        displacement,
        cells: cfg.cells,
        length: cfg.length,
        dx,
        dt: dt_min,
    })
}

pub fn measure_speed(mp: &MediaParams, r: &ReactionTerm, cfg: &SimConfig) -> Result<FrontHistory> {
    measure_speed_with(mp, r, cfg, |_, _| {})
}

/// Writes an `x,u` snapshot.
pub fn write_snapshot<W: std::io::Write>(mut out: W, u: &[f64], dx: f64) -> Result<()> {
    writeln!(out, "x,u")?;
    for (i, v) in u.iter().enumerate() {
        writeln!(out, "{:.10e},{v:.10e}", (i as f64 + 0.5) * dx)?;
    }
    Ok(())
}
