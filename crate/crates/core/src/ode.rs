//! Adaptive Dormand–Prince 5(4) integrator with event location.
//!
//! Events and sample points are resolved by re-taking a single step of the
//! embedded pair from the last accepted node, so they carry the same local
//! accuracy as an accepted step rather than that of an interpolant.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Tolerances and limits for [`Ode`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Absolute tolerance on the event function at a located crossing.
    pub event_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_init: None, h_max: f64::INFINITY, max_steps: 5_000_000, event_tol: 1e-14 }
    }
}

/// Accepted nodes of an integration run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn last(&self) -> (f64, &[f64]) {
        let n = self.xs.len() - 1;
        (self.xs[n], &self.ys[n])
    }

    /// Component `i` along the trajectory.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.ys.iter().map(|y| y[i]).collect()
    }
}

/// Why an integration run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    /// `x_end` was reached.
    Reached,
    /// The event function changed sign; the crossing was located.
    Event { x: f64, y: Vec<f64> },
    /// The guard rejected the state at an accepted node.
    Halted { x: f64, y: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub stop: Stop,
    pub trajectory: Trajectory,
    /// Values at the requested sample points that were passed before stopping.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub steps: usize,
    pub rejected: usize,
}

impl Outcome {
    pub fn final_state(&self) -> (f64, &[f64]) {
        match &self.stop {
            Stop::Event { x, y } | Stop::Halted { x, y } => (*x, y),
            Stop::Reached => self.trajectory.last(),
        }
    }
}

type EventFn<'a> = Box<dyn FnMut(f64, &[f64]) -> f64 + 'a>;
type GuardFn<'a> = Box<dyn FnMut(f64, &[f64]) -> bool + 'a>;

/// Optional hooks for a run.
#[derive(Default)]
pub struct RunControl<'a> {
    pub event: Option<EventFn<'a>>,
    pub guard: Option<GuardFn<'a>>,
    /// Points (ordered in the direction of integration) at which to report the state.
    pub samples: &'a [f64],
    /// Record every accepted node in the trajectory.
    pub keep_steps: bool,
}

impl<'a> RunControl<'a> {
    pub fn with_event(mut self, f: impl FnMut(f64, &[f64]) -> f64 + 'a) -> Self {
        self.event = Some(Box::new(f));
        self
    }

    pub fn with_guard(mut self, f: impl FnMut(f64, &[f64]) -> bool + 'a) -> Self {
        self.guard = Some(Box::new(f));
        self
    }

    pub fn with_samples(mut self, xs: &'a [f64]) -> Self {
        self.samples = xs;
        self
    }

    pub fn keep_steps(mut self) -> Self {
        self.keep_steps = true;
        self
    }
}

/// An initial-value problem `y' = f(x, y)`.
pub struct Ode<F> {
    rhs: F,
    pub opts: OdeOptions,
    dim: usize,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<F> Ode<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, rhs: F) -> Self {
        Self::with_options(dim, rhs, OdeOptions::default())
    }

    pub fn with_options(dim: usize, rhs: F, opts: OdeOptions) -> Self {
        Self { rhs, opts, dim, k: vec![vec![0.0; dim]; 7], tmp: vec![0.0; dim] }
    }

    /// One Dormand–Prince step of size `h` from `(x, y)` with `k1 = f(x, y)`.
    /// Returns the error norm (scaled by the tolerances); `k[6]` holds `f(x+h, y_new)`.
    fn attempt(&mut self, x: f64, y: &[f64], k1: &[f64], h: f64, y_new: &mut [f64]) -> f64 {
        let n = self.dim;
        self.k[0].copy_from_slice(k1);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().take(s).enumerate() {
                    acc += A[s][j] * kj[i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            (self.rhs)(x + C[s] * h, &self.tmp, &mut self.k[s]);
            if s == 6 {
                y_new.copy_from_slice(&self.tmp);
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (s, ks) in self.k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        err
    }

    fn initial_step(&mut self, x0: f64, y0: &[f64], k1: &[f64], dir: f64) -> f64 {
        if let Some(h) = self.opts.h_init {
            return h.abs() * dir;
        }
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..self.dim {
            let sc = self.opts.atol + self.opts.rtol * y0[i].abs();
            d0 = d0.max((y0[i] / sc).abs());
            d1 = d1.max((k1[i] / sc).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let mut y1 = vec![0.0; self.dim];
        let mut f1 = vec![0.0; self.dim];
        for i in 0..self.dim {
            y1[i] = y0[i] + dir * h0 * k1[i];
        }
        (self.rhs)(x0 + dir * h0, &y1, &mut f1);
        let mut d2: f64 = 0.0;
        for i in 0..self.dim {
            let sc = self.opts.atol + self.opts.rtol * y0[i].abs();
            d2 = d2.max(((f1[i] - k1[i]) / sc).abs() / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        dir * (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// State at `x_n + s` by a single step from the accepted node `(x_n, y_n)`.
    fn single_step(&mut self, x: f64, y: &[f64], k1: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if s == 0.0 {
            out.copy_from_slice(y);
        } else {
            self.attempt(x, y, k1, s, &mut out);
        }
        out
    }

    /// Integrate from `x0` to `x_end` (either direction).
    pub fn run(&mut self, x0: f64, y0: &[f64], x_end: f64, mut ctl: RunControl<'_>) -> Result<Outcome> {
        assert_eq!(y0.len(), self.dim, "state dimension mismatch");
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        let mut x = x0;
        let mut y = y0.to_vec();
        let mut k1 = vec![0.0; self.dim];
        (self.rhs)(x, &y, &mut k1);
        let mut traj = Trajectory::default();
        if ctl.keep_steps {
            traj.xs.push(x);
            traj.ys.push(y.clone());
        }
        let mut samples = Vec::new();
        let mut next_sample = 0;
        while next_sample < ctl.samples.len() && (ctl.samples[next_sample] - x0) * dir <= 0.0 {
            if ctl.samples[next_sample] == x0 {
                samples.push((x0, y.clone()));
            }
            next_sample += 1;
        }
        let mut g_prev = ctl.event.as_mut().map(|g| g(x, &y));
        if x == x_end {
            if !ctl.keep_steps {
                traj.xs.push(x);
                traj.ys.push(y.clone());
            }
            return Ok(Outcome { stop: Stop::Reached, trajectory: traj, samples, steps: 0, rejected: 0 });
        }
        let mut h = self.initial_step(x, &y, &k1, dir);
        let mut y_new = vec![0.0; self.dim];
        let mut steps = 0;
        let mut rejected = 0;
        loop {
            if steps >= self.opts.max_steps {
                return Err(Error::StepSizeUnderflow(x));
            }
            let remaining = x_end - x;
            let mut last = false;
            if (h.abs()) >= remaining.abs() {
                h = remaining;
                last = true;
            }
            h = dir * h.abs().min(self.opts.h_max);
            if h.abs() <= 1e-14 * x.abs().max(1e-300) && !last {
                return Err(Error::StepSizeUnderflow(x));
            }
            let err = self.attempt(x, &y, &k1, h, &mut y_new);
            if !err.is_finite() || err > 1.0 {
                rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.1 };
                h *= fac;
                continue;
            }
            steps += 1;
            let x_new = if last { x_end } else { x + h };
            let k_last = self.k[6].clone();

            // samples strictly inside (x, x_new]
            while next_sample < ctl.samples.len() && (ctl.samples[next_sample] - x_new) * dir <= 0.0 {
                let xs = ctl.samples[next_sample];
                let ys = if xs == x_new {
                    y_new.clone()
                } else {
                    let k1c = k1.clone();
                    let yc = y.clone();
                    self.single_step(x, &yc, &k1c, xs - x)
                };
                samples.push((xs, ys));
                next_sample += 1;
            }

            if let Some(g) = ctl.event.as_mut() {
                let g0 = g_prev.unwrap();
                let g1 = g(x_new, &y_new);
                if g0 == 0.0 && steps == 1 {
                    // started on the event surface; ignore the initial root
                } else if g1 == 0.0 || g0.signum() != g1.signum() {
                    let (xe, ye) = self.locate_event(x, &y, &k1, x_new - x, g0, g1, g)?;
                    // drop samples past the event
                    samples.retain(|(xs, _)| (xs - xe) * dir <= 0.0);
                    if ctl.keep_steps {
                        traj.xs.push(xe);
                        traj.ys.push(ye.clone());
                    }
                    return Ok(Outcome {
                        stop: Stop::Event { x: xe, y: ye },
                        trajectory: traj,
                        samples,
                        steps,
                        rejected,
                    });
                }
                g_prev = Some(g1);
            }

            x = x_new;
            y.copy_from_slice(&y_new);
            k1.copy_from_slice(&k_last);
            if ctl.keep_steps {
                traj.xs.push(x);
                traj.ys.push(y.clone());
            }
            if let Some(guard) = ctl.guard.as_mut() {
                if !guard(x, &y) {
                    return Ok(Outcome { stop: Stop::Halted { x, y }, trajectory: traj, samples, steps, rejected });
                }
            }
            if last {
                if !ctl.keep_steps {
                    traj.xs.push(x);
                    traj.ys.push(y.clone());
                }
                return Ok(Outcome { stop: Stop::Reached, trajectory: traj, samples, steps, rejected });
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        }
    }

    /// Illinois-modified regula falsi on the step length, each trial a fresh single step.
    #[allow(clippy::too_many_arguments)]
    fn locate_event(
        &mut self,
        x: f64,
        y: &[f64],
        k1: &[f64],
        h: f64,
        g0: f64,
        g1: f64,
        g: &mut EventFn<'_>,
    ) -> Result<(f64, Vec<f64>)> {
        let (mut a, mut ga) = (0.0, g0);
        let (mut b, mut gb) = (h, g1);
        if g1 == 0.0 {
            let yb = self.single_step(x, y, k1, h);
            return Ok((x + h, yb));
        }
        let mut side = 0i8;
        let mut best = (b, gb);
        for _ in 0..200 {
            let s = (a * gb - b * ga) / (gb - ga);
            let s = if s.is_finite() && (s - a) * (s - b) < 0.0 { s } else { 0.5 * (a + b) };
            let ys = self.single_step(x, y, k1, s);
            let gs = g(x + s, &ys);
            if gs.abs() < best.1.abs() {
                best = (s, gs);
            }
            if gs.abs() <= self.opts.event_tol || (b - a).abs() <= 4.0 * f64::EPSILON * (x + s).abs().max(1.0) {
                return Ok((x + s, ys));
            }
            if gs.signum() == gb.signum() {
                b = s;
                gb = gs;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            } else {
                a = s;
                ga = gs;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            }
        }
        let ys = self.single_step(x, y, k1, best.0);
        Ok((x + best.0, ys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut ode = Ode::new(1, |_x, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]);
        let out = ode.run(0.0, &[1.0], 5.0, RunControl::default()).unwrap();
        let (x, y) = out.final_state();
        assert_eq!(x, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn backward_integration() {
        let mut ode = Ode::new(1, |_x, y: &[f64], dy: &mut [f64]| dy[0] = y[0]);
        let out = ode.run(0.0, &[1.0], -3.0, RunControl::default()).unwrap();
        let (_, y) = out.final_state();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn harmonic_oscillator_event_at_quarter_period() {
        let mut ode = Ode::new(2, |_x, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        });
        // y0 = cos x crosses zero at pi/2
        let ctl = RunControl::default().with_event(|_x, y: &[f64]| y[0]);
        let out = ode.run(0.0, &[1.0, 0.0], 10.0, ctl).unwrap();
        match out.stop {
            Stop::Event { x, ref y } => {
                assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
                assert!(y[0].abs() < 1e-13);
            }
            ref s => panic!("unexpected stop {s:?}"),
        }
    }

    #[test]
    fn samples_are_reported_in_order() {
        let xs = [0.5, 1.0, 1.5];
        let mut ode = Ode::new(1, |_x, y: &[f64], dy: &mut [f64]| dy[0] = y[0]);
        let out = ode.run(0.0, &[1.0], 2.0, RunControl::default().with_samples(&xs)).unwrap();
        assert_eq!(out.samples.len(), 3);
        for (x, y) in &out.samples {
            assert!((y[0] - x.exp()).abs() < 1e-12 * x.exp());
        }
    }

    #[test]
    fn guard_halts_run() {
        let mut ode = Ode::new(1, |_x, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        // blows up at x = 1
        let ctl = RunControl::default().with_guard(|_x, y: &[f64]| y[0] < 10.0);
        let out = ode.run(0.0, &[1.0], 2.0, ctl).unwrap();
        assert!(matches!(out.stop, Stop::Halted { .. }));
    }
}
