//! Dormand-Prince 5(4) integrator for small fixed-size systems.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeOutcome {
    /// Reached the requested end point.
    Completed,
    /// The observer asked to stop after the last accepted step.
    Stopped,
    /// Step size fell below the floor at `t`.
    StepFailure { t: f64 },
}

/// Accepted step endpoint with the derivative there, enough for cubic
/// Hermite interpolation between consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-6,
            h_min: 1e-14,
            h_max: 10.0,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Dopri5 {
    /// Integrates `dy/dt = rhs(t, y)` from `t0` to `t_end` (forward only),
    /// pushing every accepted step onto `samples` and handing it to
    /// `observer`.
    pub fn integrate<const N: usize, R, O>(
        &self,
        mut rhs: R,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        samples: &mut Vec<Sample<N>>,
        mut observer: O,
    ) -> OdeOutcome
    where
        R: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(&Sample<N>) -> StepControl,
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        if !finite(&k1) {
            return OdeOutcome::StepFailure { t };
        }
        let first = Sample { t, y, dy: k1 };
        samples.push(first);
        if observer(&first) == StepControl::Stop {
            return OdeOutcome::Stopped;
        }
        let mut h = self.h_init.min(self.h_max).min(t_end - t);
        let mut steps = 0;
        while t < t_end {
            if steps >= self.max_steps {
                return OdeOutcome::StepFailure { t };
            }
            steps += 1;
            h = h.min(t_end - t);
            let k2 = rhs(t + C2 * h, &combo(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                t + C5 * h,
                &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combo(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y_new);
            let usable = finite(&y_new) && finite(&k7) && finite(&k2) && finite(&k5);
            let err = if usable {
                let mut acc = 0.0;
                for i in 0..N {
                    let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    acc += (e / scale).powi(2);
                }
                (acc / N as f64).sqrt()
            } else {
                f64::INFINITY
            };
            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = k7;
                let sample = Sample { t, y, dy: k1 };
                samples.push(sample);
                if observer(&sample) == StepControl::Stop {
                    return OdeOutcome::Stopped;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * factor).min(self.h_max);
            } else {
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h *= factor;
                if h < self.h_min {
                    return OdeOutcome::StepFailure { t };
                }
            }
        }
        OdeOutcome::Completed
    }
}

/// Cubic Hermite interpolation between two samples.
pub(crate) fn hermite<const N: usize>(a: &Sample<N>, b: &Sample<N>, t: f64) -> [f64; N] {
    let h = b.t - a.t;
    if h <= 0.0 {
        return a.y;
    }
    let s = ((t - a.t) / h).clamp(0.0, 1.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i];
    }
    out
}
