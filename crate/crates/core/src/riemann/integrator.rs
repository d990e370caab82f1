//! Dormand–Prince 5(4) with elementary step-size control and an escape
//! stop for solutions that run off to infinity in finite time.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Stop as soon as the monitored magnitude reaches this value.
    pub escape_threshold: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            escape_threshold: 1e8,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Reached,
    Escaped,
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stop: Stop,
    pub rejected: usize,
}

// Autonomous systems only, so the node coefficients c_i are not needed.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded 4th-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrator state that can be advanced repeatedly, carrying its step size
/// between calls.
pub struct Dopri5<F, M, const N: usize>
where
    F: Fn(&[f64; N]) -> [f64; N],
    M: Fn(&[f64; N]) -> f64,
{
    rhs: F,
    magnitude: M,
    ctl: StepControl,
    pub t: f64,
    pub y: [f64; N],
    h: Option<f64>,
    steps: usize,
}

impl<F, M, const N: usize> Dopri5<F, M, N>
where
    F: Fn(&[f64; N]) -> [f64; N],
    M: Fn(&[f64; N]) -> f64,
{
    pub fn new(rhs: F, magnitude: M, y0: [f64; N], ctl: StepControl) -> Self {
        Self {
            rhs,
            magnitude,
            ctl,
            t: 0.0,
            y: y0,
            h: None,
            steps: 0,
        }
    }

    fn error_norm(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.ctl.atol + self.ctl.rtol * y0[i].abs().max(y1[i].abs());
            let r = err[i] / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step(&self, f0: &[f64; N]) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.ctl.atol + self.ctl.rtol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (f0[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0.min(1e-2)
    }

    /// Advances to `t_end`, appending accepted steps (excluding the
    /// starting point) to `times`/`states`.
    pub fn advance(
        &mut self,
        t_end: f64,
        times: &mut Vec<f64>,
        states: &mut Vec<[f64; N]>,
        rejected: &mut usize,
    ) -> Stop {
        let f = &self.rhs;
        let mut k1 = f(&self.y);
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(&k1),
        };
        while self.t < t_end {
            if self.steps >= self.ctl.max_steps {
                return Stop::MaxSteps;
            }
            let remaining = t_end - self.t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            if hs <= 1e-15 * self.t.abs().max(1.0) && !last {
                return Stop::StepUnderflow;
            }
            let y = &self.y;
            let k2 = f(&axpy(y, hs, &[(A21, &k1)]));
            let k3 = f(&axpy(y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&axpy(y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&axpy(y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(&axpy(
                y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y_new = axpy(
                y,
                hs,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = f(&y_new);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let finite = y_new.iter().chain(k7.iter()).all(|v| v.is_finite());
            let en = if finite {
                self.error_norm(y, &y_new, &err)
            } else {
                f64::INFINITY
            };
            if en <= 1.0 {
                self.t = if last { t_end } else { self.t + hs };
                self.y = y_new;
                self.steps += 1;
                k1 = k7;
                times.push(self.t);
                states.push(self.y);
                let factor = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                // Keep the pre-clamp step when the last step was shortened to hit t_end.
                h = if last { h.max(hs * factor) } else { hs * factor };
                self.h = Some(h);
                if (self.magnitude)(&self.y) >= self.ctl.escape_threshold {
                    return Stop::Escaped;
                }
            } else {
                *rejected += 1;
                let factor = if en.is_finite() {
                    (0.9 * en.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = hs * factor;
                self.h = Some(h);
            }
        }
        Stop::Reached
    }
}

/// Integrates `dy/dt = rhs(y)` from `t = 0` to `t_end`, recording every
/// accepted step (the initial point included).
pub fn solve<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    magnitude: impl Fn(&[f64; N]) -> f64,
    y0: [f64; N],
    t_end: f64,
    ctl: StepControl,
) -> Solution<N> {
    let mut times = vec![0.0];
    let mut states = vec![y0];
    let mut rejected = 0;
    let stop = if magnitude(&y0) >= ctl.escape_threshold {
        Stop::Escaped
    } else {
        let mut d = Dopri5::new(rhs, magnitude, y0, ctl);
        d.advance(t_end, &mut times, &mut states, &mut rejected)
    };
    Solution {
        times,
        states,
        stop,
        rejected,
    }
}

/// State at each of the increasing `checkpoints` (all `>= 0`). Returns
/// fewer entries than requested when integration stops early.
pub fn solve_at<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    y0: [f64; N],
    checkpoints: &[f64],
    ctl: StepControl,
) -> (Vec<[f64; N]>, Stop) {
    let mut d = Dopri5::new(rhs, |_: &[f64; N]| 0.0, y0, ctl);
    let mut out = Vec::with_capacity(checkpoints.len());
    let (mut times, mut states, mut rejected) = (Vec::new(), Vec::new(), 0);
    for &tc in checkpoints {
        let stop = d.advance(tc, &mut times, &mut states, &mut rejected);
        times.clear();
        states.clear();
        if stop != Stop::Reached {
            return (out, stop);
        }
        out.push(d.y);
    }
    (out, Stop::Reached)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let sol = solve(
            |y: &[f64; 2]| [y[1], -y[0]],
            |y| y[0].abs().max(y[1].abs()),
            [1.0, 0.0],
            10.0,
            StepControl::default(),
        );
        assert_eq!(sol.stop, Stop::Reached);
        let y = sol.states.last().unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
        assert_eq!(*sol.times.last().unwrap(), 10.0);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn riccati_escapes_near_singularity() {
        let sol = solve(
            |y: &[f64; 1]| [-y[0] * y[0]],
            |y| y[0].abs(),
            [-1.0],
            5.0,
            StepControl::default(),
        );
        assert_eq!(sol.stop, Stop::Escaped);
        let t = *sol.times.last().unwrap();
        assert!(t < 1.0 && t > 1.0 - 1e-6, "{t}");
    }

    #[test]
    fn checkpoints_hit_exact_times() {
        let ts: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let (ys, stop) = solve_at(|y: &[f64; 1]| [y[0]], [1.0], &ts, StepControl::default());
        assert_eq!(stop, Stop::Reached);
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() < 1e-9 * t.exp());
        }
    }
}
