//! Multiple chordal Loewner chain driven by the SLE(0) partition function.
//!
//! The flow map obeys `∂_t g_t(z) = Σ_j 2ν_j(t)/(g_t(z) − x_j(t))` and the
//! driving points move by
//! `ẋ_j = ν_j ∂_{x_j} log 𝒵 + Σ_{k≠j} 2ν_k/(x_j − x_k)`.
//! Marked points and observer points are transported by the flow map itself;
//! observers also carry `log g'_t` so the integral of motion
//! `N_t(z) = g'_t(z)² ∏(g_t − x_k)² ∏(g_t − q_j)^{2σ_j}` can be evaluated.
//!
//! Every integration is classical RK4. Steps are capped by
//! `gap²/(8 Σν)` near approaching singular points of the vector field.

use num_complex::Complex64;

use crate::divisor::{dlog_z_raw, Charge, Domain, SymmetricDivisor};
use crate::error::{Error, Result};

/// Driving points closer than this have collided.
pub const COLLISION_TOL: f64 = 1e-8;
/// Substeps below this length are treated as a collision.
const MIN_STEP: f64 = 1e-14;
/// Relative step bound for observer points and reverse-flow points.
const RHO: f64 = 0.01;

/// Largest step keeping the relative change of `g − x_j` below `RHO` for a
/// point at `g`: `RHO / Σ_j 2ν_j/|g − x_j|²`.
fn relative_step(g: Complex64, x: &[f64], nu: &[f64]) -> f64 {
    let rate: f64 = x
        .iter()
        .zip(nu)
        .map(|(&xj, &v)| 2.0 * v / (g - xj).norm_sqr())
        .sum();
    if rate > 0.0 {
        RHO / rate
    } else {
        f64::INFINITY
    }
}

/// Piecewise-constant capacity rate of one curve: `(start, rate)` pieces,
/// each rate holding until the next start.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub pieces: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn constant(rate: f64) -> Self {
        Schedule {
            pieces: vec![(0.0, rate)],
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .take_while(|(start, _)| *start <= t)
            .last()
            .map_or(0.0, |&(_, r)| r)
    }

    fn validate(&self) -> Result<()> {
        if self.pieces.first().map(|p| p.0) != Some(0.0) {
            return Err(Error::InvalidParameter("a rate schedule must start at t = 0".into()));
        }
        for w in self.pieces.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter("rate schedule breakpoints must increase".into()));
            }
        }
        if self.pieces.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::InvalidParameter("capacity rates must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Capacity parametrization `ν = (ν_1, …, ν_n)`. An empty list means
/// `ν_j ≡ 1` for every curve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parametrization {
    pub schedules: Vec<Schedule>,
}

impl Parametrization {
    pub fn uniform() -> Self {
        Parametrization::default()
    }

    pub fn rate(&self, j: usize, t: f64) -> f64 {
        self.schedules.get(j).map_or(1.0, |s| s.rate(t))
    }

    /// First breakpoint strictly after `t`.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        self.schedules
            .iter()
            .flat_map(|s| s.pieces.iter().map(|p| p.0))
            .filter(|&b| b > t)
            .min_by(f64::total_cmp)
    }

    pub fn validate(&self, curves: usize) -> Result<()> {
        if !self.schedules.is_empty() && self.schedules.len() != curves {
            return Err(Error::InvalidParameter(format!(
                "{} rate schedules for {curves} curves",
                self.schedules.len()
            )));
        }
        self.schedules.iter().try_for_each(Schedule::validate)
    }
}

/// An observer point `z₀` with `g_t(z₀)` and `log g'_t(z₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedPoint {
    pub z0: Complex64,
    pub g: Complex64,
    pub log_dg: Complex64,
    pub alive: bool,
    /// Time at which the point was swallowed.
    pub swallowed_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerState {
    pub t: f64,
    /// Driving points `x_j(t)`.
    pub x: Vec<f64>,
    /// Driving velocities `ẋ_j(t)`.
    pub dx: Vec<f64>,
    /// Finite marked points `q_l(t)` with their charges.
    pub q: Vec<(Complex64, Charge)>,
    pub tracked: Vec<TrackedPoint>,
}

/// A half-plane divisor together with its capacity parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerProblem {
    pub divisor: SymmetricDivisor,
    pub nu: Parametrization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    /// States on the requested time grid, starting at `t = 0`.
    pub states: Vec<LoewnerState>,
    /// Collision bracket `(t_lo, t_hi)` if the run stopped early.
    pub collision: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub times: Vec<f64>,
    /// `curves[j][i] = γ_j(times[i])`.
    pub curves: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionIntegralReport {
    pub z: Complex64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `max |N_t| / |N_0| − 1` over the sampled times.
    pub max_relative_drift: f64,
    /// Largest excursion of the continuously tracked `arg N_t` from `arg N_0`.
    pub max_arg_drift: f64,
    /// Time at which `z` was swallowed, if that happened.
    pub death_time: Option<f64>,
    /// False when `z` was swallowed before the last requested time.
    pub complete: bool,
}

#[derive(Debug, Clone)]
struct Deriv {
    x: Vec<f64>,
    q: Vec<Complex64>,
    g: Vec<Complex64>,
    log_dg: Vec<Complex64>,
}

impl LoewnerProblem {
    pub fn new(divisor: SymmetricDivisor, nu: Parametrization) -> Result<Self> {
        if divisor.domain != Domain::HalfPlane {
            return Err(Error::InvalidParameter(
                "the Loewner chain runs in the half-plane".into(),
            ));
        }
        let report = divisor.validate();
        if !report.is_admissible() {
            return Err(Error::InvalidDivisor(report.to_string()));
        }
        if divisor.growth.iter().any(|g| g.is_infinite()) {
            return Err(Error::Degenerate("growth point at infinity".into()));
        }
        nu.validate(divisor.growth.len())?;
        Ok(LoewnerProblem { divisor, nu })
    }

    pub fn curves(&self) -> usize {
        self.divisor.growth.len()
    }

    pub fn initial_state(&self, tracked: &[Complex64]) -> LoewnerState {
        let x: Vec<f64> = self
            .divisor
            .growth
            .iter()
            .map(|g| g.finite().map_or(f64::NAN, |z| z.re))
            .collect();
        let q: Vec<(Complex64, Charge)> = self
            .divisor
            .marked
            .iter()
            .filter_map(|&(p, c)| p.finite().map(|z| (z, c)))
            .collect();
        let tracked = tracked
            .iter()
            .map(|&z0| TrackedPoint {
                z0,
                g: z0,
                log_dg: Complex64::new(0.0, 0.0),
                alive: true,
                swallowed_at: None,
            })
            .collect();
        let mut state = LoewnerState {
            t: 0.0,
            x,
            dx: Vec::new(),
            q,
            tracked,
        };
        state.dx = self.deriv(&state, &self.rates(0.0)).x;
        state
    }

    fn rates(&self, t: f64) -> Vec<f64> {
        (0..self.curves()).map(|j| self.nu.rate(j, t)).collect()
    }

    fn deriv(&self, s: &LoewnerState, nu: &[f64]) -> Deriv {
        let n = s.x.len();
        let marked = || s.q.iter().map(|&(z, c)| (z, c.value()));
        let x = (0..n)
            .map(|j| {
                let interaction: f64 = (0..n)
                    .filter(|&k| k != j)
                    .map(|k| 2.0 * nu[k] / (s.x[j] - s.x[k]))
                    .sum();
                nu[j] * dlog_z_raw(&s.x, marked(), j).re + interaction
            })
            .collect();
        let field = |z: Complex64| -> Complex64 {
            s.x.iter()
                .zip(nu)
                .map(|(&xj, &v)| 2.0 * v / (z - xj))
                .sum()
        };
        let q = s.q.iter().map(|&(z, _)| field(z)).collect();
        let mut g = Vec::with_capacity(s.tracked.len());
        let mut log_dg = Vec::with_capacity(s.tracked.len());
        for p in &s.tracked {
            if p.alive {
                g.push(field(p.g));
                log_dg.push(
                    -s.x.iter()
                        .zip(nu)
                        .map(|(&xj, &v)| {
                            let d = p.g - xj;
                            2.0 * v / (d * d)
                        })
                        .sum::<Complex64>(),
                );
            } else {
                g.push(Complex64::new(0.0, 0.0));
                log_dg.push(Complex64::new(0.0, 0.0));
            }
        }
        Deriv { x, q, g, log_dg }
    }

    fn advance(s: &LoewnerState, h: f64, d: &Deriv) -> LoewnerState {
        LoewnerState {
            t: s.t + h,
            x: s.x.iter().zip(&d.x).map(|(a, b)| a + h * b).collect(),
            dx: Vec::new(),
            q: s.q.iter().zip(&d.q).map(|(&(z, c), dz)| (z + h * dz, c)).collect(),
            tracked: s
                .tracked
                .iter()
                .zip(d.g.iter().zip(&d.log_dg))
                .map(|(p, (dg, dl))| TrackedPoint {
                    g: p.g + h * dg,
                    log_dg: p.log_dg + h * dl,
                    ..*p
                })
                .collect(),
        }
    }

    /// Largest safe substep from `s` given the current rates.
    fn step_cap(&self, s: &LoewnerState, nu: &[f64]) -> f64 {
        let total: f64 = nu.iter().sum();
        if total <= 0.0 {
            return f64::INFINITY;
        }
        let mut gap = f64::INFINITY;
        for (j, &xj) in s.x.iter().enumerate() {
            for &xk in &s.x[j + 1..] {
                gap = gap.min((xj - xk).abs());
            }
            for &(q, _) in &s.q {
                gap = gap.min((q - xj).norm());
            }
        }
        let mut cap = gap * gap / (8.0 * total);
        for p in s.tracked.iter().filter(|p| p.alive) {
            cap = cap.min(relative_step(p.g, &s.x, nu));
        }
        cap
    }

    fn min_driving_gap(s: &LoewnerState) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for j in 0..s.x.len() {
            for k in j + 1..s.x.len() {
                let d = (s.x[j] - s.x[k]).abs();
                if best.is_none_or(|b| d < b.2) {
                    best = Some((j, k, d));
                }
            }
        }
        best
    }

    fn check_collision(&self, before: &LoewnerState, after: &LoewnerState) -> Result<()> {
        if let Some((j, k, d)) = Self::min_driving_gap(after) {
            let crossed = (before.x[j] - before.x[k]).signum() != (after.x[j] - after.x[k]).signum();
            if d < COLLISION_TOL || crossed || !d.is_finite() {
                return Err(Error::Collision {
                    first: j,
                    second: k,
                    t_lo: before.t,
                    t_hi: after.t,
                });
            }
        }
        for (l, &(q, _)) in after.q.iter().enumerate() {
            for (j, &xj) in after.x.iter().enumerate() {
                if (q - xj).norm() < COLLISION_TOL {
                    return Err(Error::Degenerate(format!(
                        "driving point {j} reached marked point {l} at t = {}",
                        after.t
                    )));
                }
            }
        }
        Ok(())
    }

    fn rk4(&self, s: &LoewnerState, h: f64, nu: &[f64]) -> LoewnerState {
        let k1 = self.deriv(s, nu);
        let k2 = self.deriv(&Self::advance(s, 0.5 * h, &k1), nu);
        let k3 = self.deriv(&Self::advance(s, 0.5 * h, &k2), nu);
        let k4 = self.deriv(&Self::advance(s, h, &k3), nu);
        let combined = Deriv {
            x: (0..k1.x.len())
                .map(|i| (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]) / 6.0)
                .collect(),
            q: (0..k1.q.len())
                .map(|i| (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i]) / 6.0)
                .collect(),
            g: (0..k1.g.len())
                .map(|i| (k1.g[i] + 2.0 * k2.g[i] + 2.0 * k3.g[i] + k4.g[i]) / 6.0)
                .collect(),
            log_dg: (0..k1.log_dg.len())
                .map(|i| (k1.log_dg[i] + 2.0 * k2.log_dg[i] + 2.0 * k3.log_dg[i] + k4.log_dg[i]) / 6.0)
                .collect(),
        };
        let mut next = Self::advance(s, h, &combined);
        next.t = s.t + h;
        next
    }

    /// Advances `state` by `dt`, subdividing as needed. Observer points that
    /// reach a driving point are marked dead and frozen.
    pub fn step(&self, state: &LoewnerState, dt: f64) -> Result<LoewnerState> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        let target = state.t + dt;
        let mut s = state.clone();
        while s.t < target {
            let remaining = target - s.t;
            let mut h = remaining;
            if let Some(b) = self.nu.next_breakpoint(s.t) {
                if b < target {
                    h = h.min(b - s.t);
                }
            }
            let nu = self.rates(s.t + 0.5 * h.min(remaining));
            // An observer pinned against a driving point has been swallowed.
            let (x, t_now) = (s.x.clone(), s.t);
            for p in s.tracked.iter_mut().filter(|p| p.alive) {
                if relative_step(p.g, &x, &nu) < MIN_STEP {
                    p.alive = false;
                    p.swallowed_at = Some(t_now);
                }
            }
            let cap = self.step_cap(&s, &nu);
            if cap < MIN_STEP {
                let (j, k, _) = Self::min_driving_gap(&s).unwrap_or((0, 0, 0.0));
                return Err(Error::Collision {
                    first: j,
                    second: k,
                    t_lo: s.t,
                    t_hi: s.t + MIN_STEP,
                });
            }
            h = h.min(cap);
            // Land exactly on the target when the remainder is tiny.
            let last = h >= remaining || remaining - h <= 1e-12 * target.abs().max(1.0);
            if last {
                h = remaining;
            }
            let mut next = self.rk4(&s, h, &nu);
            if last {
                next.t = target;
            }
            self.check_collision(&s, &next)?;
            for p in next.tracked.iter_mut().filter(|p| p.alive) {
                if next.x.iter().any(|&xj| (p.g - xj).norm() < COLLISION_TOL) || p.g.im < 0.0 {
                    p.alive = false;
                    p.swallowed_at = Some(s.t);
                }
            }
            s = next;
        }
        s.dx = self.deriv(&s, &self.rates(s.t)).x;
        Ok(s)
    }

    /// Runs the chain on the grid `0, dt, 2dt, …, T` (last step shortened).
    /// A collision ends the run early and is reported, not raised.
    pub fn evolve(&self, t_end: f64, dt: f64, tracked: &[Complex64]) -> Result<Evolution> {
        if !(t_end > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParameter("T and dt must be positive".into()));
        }
        let first = self.initial_state(tracked);
        if let Some((j, k, d)) = Self::min_driving_gap(&first) {
            if d < COLLISION_TOL {
                return Err(Error::Degenerate(format!("driving points {j} and {k} start together")));
            }
        }
        let steps = (t_end / dt).round().max(1.0) as usize;
        let mut states = Vec::with_capacity(steps + 1);
        states.push(first);
        let mut collision = None;
        for i in 1..=steps {
            let t_next = if i == steps { t_end } else { i as f64 * dt };
            let current = states.last().unwrap();
            match self.step(current, t_next - current.t) {
                Ok(s) => states.push(s),
                Err(Error::Collision { t_lo, t_hi, .. }) => {
                    collision = Some((t_lo, t_hi));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Evolution { states, collision })
    }

    /// `γ_j(t) = g_t⁻¹(x_j(t) + i·lift)` at `samples + 1` evenly spaced grid
    /// times in `[0, T]`, by integrating the Loewner equation backwards.
    pub fn trace_hull(&self, t_end: f64, dt: f64, lift: f64, samples: usize) -> Result<Hull> {
        let evo = self.evolve(t_end, dt, &[])?;
        if let Some((t_lo, _)) = evo.collision {
            return Err(Error::Degenerate(format!(
                "driving points collide near t = {t_lo} before T = {t_end}"
            )));
        }
        let states = &evo.states;
        let last = states.len() - 1;
        let samples = samples.max(1).min(last);
        let mut idx: Vec<usize> = (0..=samples).map(|k| (k * last + samples / 2) / samples).collect();
        idx.dedup();
        let mut hull = Hull {
            times: Vec::with_capacity(idx.len()),
            curves: vec![Vec::with_capacity(idx.len()); self.curves()],
        };
        for &i in &idx {
            let s = &states[i];
            hull.times.push(s.t);
            for j in 0..self.curves() {
                let tip = Complex64::new(s.x[j], lift);
                hull.curves[j].push(self.invert(states, i, tip)?);
            }
        }
        Ok(hull)
    }

    /// Driving points at time `t` by cubic Hermite interpolation of the grid.
    fn driving_at(states: &[LoewnerState], t: f64, out: &mut [f64]) {
        let i = match states.binary_search_by(|s| s.t.total_cmp(&t)) {
            Ok(i) => {
                out.copy_from_slice(&states[i].x);
                return;
            }
            Err(0) => 0,
            Err(i) if i >= states.len() => states.len() - 2,
            Err(i) => i - 1,
        };
        let (a, b) = (&states[i], &states[i + 1]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        for j in 0..out.len() {
            out[j] = h00 * a.x[j] + h10 * h * a.dx[j] + h01 * b.x[j] + h11 * h * b.dx[j];
        }
    }

    /// `g_t⁻¹(w)` for `t = states[i].t`.
    fn invert(&self, states: &[LoewnerState], i: usize, w: Complex64) -> Result<Complex64> {
        let t_start = states[i].t;
        let mut s = t_start;
        let mut h_val = w;
        let n = self.curves();
        let mut xs = vec![0.0; n];
        let field = |z: Complex64, time: f64, nu: &[f64], xs: &mut [f64]| -> Complex64 {
            Self::driving_at(states, time, xs);
            xs.iter().zip(nu).map(|(&x, &v)| 2.0 * v / (z - x)).sum()
        };
        while s > 0.0 {
            let nu_mid = self.rates((s - 1e-15).max(0.0));
            Self::driving_at(states, s, &mut xs);
            let mut step = s.min(relative_step(h_val, &xs, &nu_mid));
            // Stay within one rate piece.
            let piece_start = self
                .nu
                .schedules
                .iter()
                .flat_map(|sc| sc.pieces.iter().map(|p| p.0))
                .filter(|&b| b < s)
                .fold(0.0, f64::max);
            step = step.min(s - piece_start);
            if step < MIN_STEP * t_start.max(1.0) {
                step = (MIN_STEP * t_start.max(1.0)).min(s);
            }
            let k1 = field(h_val, s, &nu_mid, &mut xs);
            let k2 = field(h_val - 0.5 * step * k1, s - 0.5 * step, &nu_mid, &mut xs);
            let k3 = field(h_val - 0.5 * step * k2, s - 0.5 * step, &nu_mid, &mut xs);
            let k4 = field(h_val - step * k3, s - step, &nu_mid, &mut xs);
            h_val -= step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s -= step;
            if !(h_val.im >= 0.0) {
                return Err(Error::InversionFailure(t_start));
            }
        }
        Ok(h_val)
    }

    /// Samples `N_t(z)` at the given increasing times, integrating with steps
    /// of at most `dt`.
    pub fn motion_integral(&self, z: Complex64, times: &[f64], dt: f64) -> Result<MotionIntegralReport> {
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::InvalidParameter("sample times must be increasing and non-negative".into()));
        }
        let mut state = self.initial_state(&[z]);
        let mut report = MotionIntegralReport {
            z,
            times: Vec::new(),
            values: Vec::new(),
            max_relative_drift: 0.0,
            max_arg_drift: 0.0,
            death_time: None,
            complete: true,
        };
        let mut unwrap = ArgUnwrapper::default();
        let mut base: Option<(f64, f64)> = None;
        for &t in times {
            while state.t < t && state.tracked[0].alive {
                state = self.step(&state, dt.min(t - state.t))?;
                report.death_time = state.tracked[0].swallowed_at;
            }
            if !state.tracked[0].alive {
                let died = report.death_time.unwrap_or(state.t);
                if t > died + 1e-9 * t.max(1.0) {
                    report.complete = false;
                }
                break;
            }
            let log_n = unwrap.log_motion_integral(&state);
            let value = log_n.exp();
            let (log_abs0, arg0) = *base.get_or_insert((log_n.re, log_n.im));
            report.max_relative_drift = report.max_relative_drift.max((log_n.re - log_abs0).exp_m1().abs());
            report.max_arg_drift = report.max_arg_drift.max((log_n.im - arg0).abs());
            report.times.push(t);
            report.values.push(value);
        }
        Ok(report)
    }
}

/// Continuous-branch evaluation of `log N_t` for the first observer point.
#[derive(Debug, Default)]
struct ArgUnwrapper {
    previous: Vec<f64>,
}

impl ArgUnwrapper {
    fn log_motion_integral(&mut self, s: &LoewnerState) -> Complex64 {
        let p = &s.tracked[0];
        let mut terms: Vec<(Complex64, f64)> = s.x.iter().map(|&x| (p.g - x, 2.0)).collect();
        terms.extend(s.q.iter().map(|&(q, c)| (p.g - q, 2.0 * c.value())));
        let mut acc = 2.0 * p.log_dg;
        for (k, (d, exponent)) in terms.into_iter().enumerate() {
            let mut arg = d.arg();
            if let Some(&prev) = self.previous.get(k) {
                arg += std::f64::consts::TAU * ((prev - arg) / std::f64::consts::TAU).round();
                self.previous[k] = arg;
            } else {
                self.previous.push(arg);
            }
            acc += exponent * Complex64::new(d.norm().ln(), arg);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::SpherePoint;

    fn single() -> LoewnerProblem {
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(0.0)],
            vec![(SpherePoint::Infinity, Charge::integer(-3))],
        )
        .unwrap();
        LoewnerProblem::new(d, Parametrization::uniform()).unwrap()
    }

    fn pair(a: f64) -> LoewnerProblem {
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(-a), SpherePoint::real(a)],
            vec![(SpherePoint::Infinity, Charge::integer(-4))],
        )
        .unwrap();
        LoewnerProblem::new(d, Parametrization::uniform()).unwrap()
    }

    #[test]
    fn single_curve_driving_point_stays_put() {
        let evo = single().evolve(1.0, 1e-3, &[]).unwrap();
        assert_eq!(evo.states.len(), 1001);
        assert!(evo.states.iter().all(|s| s.x[0] == 0.0));
        assert!(evo.collision.is_none());
    }

    #[test]
    fn single_slit_matches_closed_form() {
        let p = single();
        let z = Complex64::new(0.7, 1.3);
        let evo = p.evolve(0.25, 1e-4, &[z]).unwrap();
        let g = evo.states.last().unwrap().tracked[0].g;
        let exact = (z * z + 4.0 * 0.25).sqrt();
        assert!((g - exact).norm() < 1e-8, "{g} vs {exact}");
    }

    #[test]
    fn pair_repels_with_closed_form_gap() {
        // gap' = 8/gap, so gap(t)² = gap(0)² + 16t.
        let evo = pair(1.0).evolve(0.5, 1e-3, &[]).unwrap();
        let mut prev = 2.0;
        for s in &evo.states[1..] {
            let gap = s.x[1] - s.x[0];
            assert!(gap > prev);
            assert!(s.dx[0] < 0.0 && s.dx[1] > 0.0);
            prev = gap;
        }
        let last = evo.states.last().unwrap();
        let exact = (4.0f64 + 16.0 * 0.5).sqrt();
        assert!((last.x[1] - last.x[0] - exact).abs() < 1e-10);
        assert!((last.x[0] + last.x[1]).abs() < 1e-12);
    }

    #[test]
    fn single_curve_hull_is_vertical_slit() {
        let hull = single().trace_hull(1.0, 1e-3, 1e-6, 20).unwrap();
        assert_eq!(hull.times.len(), 21);
        for (t, g) in hull.times.iter().zip(&hull.curves[0]) {
            let exact = Complex64::new(0.0, 2.0 * t.sqrt());
            assert!((g - exact).norm() < 1e-5, "t={t}: {g}");
        }
    }

    #[test]
    fn motion_integral_single_curve_is_z_squared() {
        let z = Complex64::new(0.4, 1.1);
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.025).collect();
        let report = single().motion_integral(z, &times, 1e-3).unwrap();
        assert!(report.complete);
        assert!(report.max_relative_drift < 1e-9, "{}", report.max_relative_drift);
        for v in &report.values {
            assert!((v - z * z).norm() < 1e-8);
        }
    }

    #[test]
    fn swallowed_point_yields_partial_report() {
        // 0.5i is hit by the slit at t = 1/16.
        let z = Complex64::new(0.0, 0.5);
        let report = single().motion_integral(z, &[0.0, 0.05, 0.1], 1e-3).unwrap();
        assert!(!report.complete);
        let died = report.death_time.unwrap();
        assert!((died - 0.0625).abs() < 1e-6, "{died}");
        assert_eq!(report.times, vec![0.0, 0.05]);
    }

    #[test]
    fn schedule_rates_and_breakpoints() {
        let nu = Parametrization {
            schedules: vec![
                Schedule { pieces: vec![(0.0, 1.0), (0.5, 0.0)] },
                Schedule::constant(2.0),
            ],
        };
        assert!(nu.validate(2).is_ok());
        assert!(nu.validate(3).is_err());
        assert_eq!(nu.rate(0, 0.49), 1.0);
        assert_eq!(nu.rate(0, 0.5), 0.0);
        assert_eq!(nu.rate(1, 10.0), 2.0);
        assert_eq!(nu.next_breakpoint(0.1), Some(0.5));
        assert_eq!(nu.next_breakpoint(0.5), None);
        let bad = Parametrization { schedules: vec![Schedule { pieces: vec![(0.1, 1.0)] }] };
        assert!(bad.validate(1).is_err());
    }

    #[test]
    fn frozen_curve_does_not_grow() {
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(-1.0), SpherePoint::real(1.0)],
            vec![(SpherePoint::Infinity, Charge::integer(-4))],
        )
        .unwrap();
        let nu = Parametrization {
            schedules: vec![Schedule::constant(1.0), Schedule::constant(0.0)],
        };
        let p = LoewnerProblem::new(d, nu).unwrap();
        let hull = p.trace_hull(0.2, 1e-3, 1e-6, 4).unwrap();
        // Curve 1 has no capacity: its "tip" stays on the real line.
        for g in &hull.curves[1] {
            assert!(g.im < 1e-5, "{g}");
        }
        assert!(hull.curves[0].last().unwrap().im > 0.5);
    }

    #[test]
    fn rejects_disk_and_bad_steps() {
        let d = SymmetricDivisor::new(
            Domain::Disk,
            vec![SpherePoint::real(1.0)],
            vec![(SpherePoint::Finite(Complex64::new(-1.0, 0.0)), Charge::integer(-3))],
        )
        .unwrap();
        assert!(LoewnerProblem::new(d, Parametrization::uniform()).is_err());
        let p = single();
        let s = p.initial_state(&[]);
        assert!(p.step(&s, 0.0).is_err());
        assert!(p.evolve(-1.0, 0.1, &[]).is_err());
    }

    #[test]
    fn attracting_points_report_collision() {
        // Negative charge between the two growth points pulls them together.
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(-0.1), SpherePoint::real(0.1)],
            vec![
                (SpherePoint::Finite(Complex64::new(0.0, 0.05)), Charge::integer(-3)),
                (SpherePoint::Finite(Complex64::new(0.0, -0.05)), Charge::integer(-3)),
                (SpherePoint::Infinity, Charge::integer(2)),
            ],
        )
        .unwrap();
        let p = LoewnerProblem::new(d, Parametrization::uniform()).unwrap();
        match p.evolve(1.0, 1e-3, &[]) {
            Ok(evo) => {
                let (lo, hi) = evo.collision.expect("expected a collision");
                assert!(lo <= hi);
                let last = evo.states.last().unwrap();
                assert!(last.t <= lo + 1e-12);
            }
            Err(Error::Degenerate(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}
