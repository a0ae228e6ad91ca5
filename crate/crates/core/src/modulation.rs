//! Reduced modulation dynamics of the bubble parameters.
//!
//! The state is integrated in `s` with an adaptive Dormand–Prince 5(4) pair.
//! Exit from the bootstrap region is located where the exit norm reaches 1,
//! and [`ModulationSystem::shoot`] searches the unstable initial
//! coordinates `(xi, zeta)` for a trajectory that stays inside until `S_0`.

use alloc::vec::Vec;

use crate::ansatz::{classify, derive, theta, BubbleConfig, Classification, DeltaLadder, DerivedParams, ParamState};
use crate::{fm, Error, Result};

/// Tolerances and sampling of the trajectory integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Log-spaced output samples per decade of `|s|`.
    pub samples_per_decade: usize,
    pub max_steps: usize,
    /// Smallest step relative to `|s|` before giving up.
    pub min_rel_step: f64,
    /// Stop where the exit norm first exceeds 1.
    pub stop_at_exit: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-15, samples_per_decade: 40, max_steps: 2_000_000, min_rel_step: 1e-14, stop_at_exit: true }
    }
}

/// Starting time, end time and unstable coordinates of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootInput {
    pub s_n: f64,
    pub s_0: f64,
    /// One entry per unstable bubble, in increasing bubble order.
    pub xi: Vec<f64>,
    /// One entry per bubble.
    pub zeta: Vec<f64>,
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitReason {
    /// Reached `S_0` with the exit norm at most 1.
    Completed,
    /// The exit norm reached 1 at the recorded time.
    NormExceeded,
    /// Parameters left their admissible range (collision or `tau >= 0`).
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub state: ParamState,
    pub derived: DerivedParams,
    /// `g_k = mu_bar_k + y_bar_k` for every bubble.
    pub g: Vec<f64>,
    pub norm: f64,
}

impl TrajectoryPoint {
    pub fn s(&self) -> f64 {
        self.state.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub exit: ExitReason,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectories hold at least the initial point")
    }

    pub fn exit_s(&self) -> f64 {
        self.last().s()
    }

    pub fn completed(&self) -> bool {
        self.exit == ExitReason::Completed
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(TrajectoryPoint::s).collect()
    }
}

/// One candidate evaluated by the shooting search.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootStep {
    pub iteration: usize,
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub exit_s: f64,
    pub exit_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub trajectory: Trajectory,
    pub iterations: usize,
    pub final_norm: f64,
    pub history: Vec<ShootStep>,
}

/// Search parameters for [`ModulationSystem::shoot`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub max_iter: usize,
    /// Relaxation of the fixed-point update.
    pub damping: f64,
    /// Largest update per iteration.
    pub trust_radius: f64,
    pub integrator: IntegratorOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { max_iter: 60, damping: 0.8, trust_radius: 0.25, integrator: IntegratorOptions::default() }
    }
}

/// Physical-frame parameters along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSeries {
    pub t: Vec<f64>,
    /// `lambda[i][k] = t mu~_k(s)`.
    pub lambda: Vec<Vec<f64>>,
    /// `x[i][k] = t y_k(s)`.
    pub x: Vec<Vec<f64>>,
    /// `rho[i][k] = 1 / sqrt(-2 tau_k(s))`.
    pub rho: Vec<Vec<f64>>,
    /// `max_i |lambda_k - l_k t| / t^{23/22}` per bubble.
    pub lambda_envelope_ratio: Vec<f64>,
    /// `max_i |x_k + l_k^{-2} / t| / t^{-21/22}` per bubble.
    pub x_envelope_ratio: Vec<f64>,
}

/// The reduced system for one configuration.
#[derive(Debug, Clone)]
pub struct ModulationSystem {
    config: BubbleConfig,
    class: Classification,
    theta: Vec<f64>,
    l1: f64,
}

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl ModulationSystem {
    /// `l1` is `||Q||_{L^1}`.
    pub fn new(config: BubbleConfig, l1: f64) -> Result<Self> {
        let class = classify(&config)?;
        let theta = theta(&config);
        Ok(Self { config, class, theta, l1 })
    }

    pub fn config(&self) -> &BubbleConfig {
        &self.config
    }

    pub fn classification(&self) -> &Classification {
        &self.class
    }

    pub fn ladder(&self) -> &DeltaLadder {
        &self.class.ladder
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// Number of unstable coordinates plus number of bubbles.
    pub fn dimension(&self) -> usize {
        self.class.kplus.len() + self.config.k()
    }

    /// Well-prepared data at `s_n`: perturbed `mu` on unstable bubbles,
    /// perturbed `tau`, self-similar `y`, and `a` fixed by the local energies.
    pub fn init_params(&self, s_n: f64, xi: &[f64], zeta: &[f64]) -> Result<ParamState> {
        let k_count = self.config.k();
        if !(s_n <= -100.0) {
            return Err(Error::InvalidConfig("initial time must satisfy S_n <= -100"));
        }
        if xi.len() != self.class.kplus.len() || zeta.len() != k_count {
            return Err(Error::InvalidConfig("xi must cover the unstable bubbles and zeta every bubble"));
        }
        let lad = &self.class.ladder;
        let abs = s_n.abs();
        let l = self.config.ells();
        let mut st = ParamState::self_similar(&self.config, s_n);
        for (i, &k) in self.class.kplus.iter().enumerate() {
            st.mu[k] = l[k] * (1.0 + fm::powf(abs, -lad.plus[k]) * xi[i]);
        }
        for k in 0..k_count {
            st.tau[k] = s_n / (l[k] * l[k] * l[k]) * (1.0 + fm::powf(abs, -lad.mid[k]) * zeta[k]);
        }
        let d = derive(&self.config, &st, self.l1)?;
        for k in 0..k_count {
            let mu = st.mu[k];
            let a = l[k] * mu * mu * (0.5 + self.theta[k]) / s_n - 0.5 / st.tau[k] - 4.0 * d.r[k] / self.l1;
            let bound = fm::powf(abs, -1.0 - lad.minus[k]);
            if a.abs() > bound {
                return Err(Error::InitOutOfBand { k: k + 1, a, bound });
            }
            st.a[k] = a;
        }
        Ok(st)
    }

    /// Derivative of the flat state `[tau.., mu.., y.., a..]` at time `s`.
    pub fn rhs(&self, s: f64, v: &[f64]) -> Result<Vec<f64>> {
        let k_count = self.config.k();
        let st = ParamState::from_slice(s, v);
        let d = derive(&self.config, &st, self.l1)?;
        let (c0, c1, l1) = (self.config.c0, self.config.c1, self.l1);
        let mut out = alloc::vec![0.0; 4 * k_count];
        for k in 0..k_count {
            let (tau, mu, y, a) = (st.tau[k], st.mu[k], st.y[k], st.a[k]);
            let mu2 = mu * mu;
            let mu3 = mu2 * mu;
            let dtau = 1.0 / mu3;
            let log_dmu = -0.5 / (mu3 * tau) + 0.5 / s - a / mu3;
            let dy = 0.5 * y / s + 1.0 / mu2 + c0 / (2.0 * mu2 * tau) - 3.0 * c1 / (4.0 * mu2 * tau * tau);
            let r = d.r[k];
            let dr = d.d[k] / mu3 - r / (4.0 * mu3 * tau) - a * r / (2.0 * mu3);
            let b = a + 0.5 / tau + 4.0 * r / l1;
            let da = (2.0 * log_dmu - 1.0 / s) * b + dtau / (2.0 * tau * tau) - 4.0 * dr / l1;
            out[k] = dtau;
            out[k_count + k] = mu * log_dmu;
            out[2 * k_count + k] = dy;
            out[3 * k_count + k] = da;
        }
        Ok(out)
    }

    /// `g_k = mu_bar_k + y_bar_k` for every bubble.
    pub fn g(&self, state: &ParamState) -> Vec<f64> {
        let b = state.bars(&self.config);
        (0..self.config.k()).map(|k| b.mu_bar[k] + b.y_bar[k]).collect()
    }

    /// Renormalized coordinates `|s|^{delta_k^+} g_k` (unstable `k`) then `|s|^{delta_k} tau_bar_k` (all `k`).
    pub fn exit_coordinates(&self, state: &ParamState) -> Vec<f64> {
        let abs = state.s.abs();
        let lad = &self.class.ladder;
        let g = self.g(state);
        let b = state.bars(&self.config);
        let mut c: Vec<f64> = self.class.kplus.iter().map(|&k| fm::powf(abs, lad.plus[k]) * g[k]).collect();
        c.extend((0..self.config.k()).map(|k| fm::powf(abs, lad.mid[k]) * b.tau_bar[k]));
        c
    }

    /// `sum_{k in K+} (|s|^{delta_k^+} g_k)^2 + sum_k (|s|^{delta_k} tau_bar_k)^2`.
    pub fn exit_norm(&self, state: &ParamState) -> f64 {
        self.exit_coordinates(state).iter().map(|c| c * c).sum()
    }

    fn point(&self, state: ParamState) -> Result<TrajectoryPoint> {
        let derived = derive(&self.config, &state, self.l1)?;
        let g = self.g(&state);
        let norm = self.exit_norm(&state);
        Ok(TrajectoryPoint { state, derived, g, norm })
    }

    /// One Dormand–Prince step; returns the new state and the scaled error.
    fn dp_step(&self, s: f64, v: &[f64], h: f64, opts: &IntegratorOptions) -> Result<(Vec<f64>, f64)> {
        let n = v.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        let mut tmp = alloc::vec![0.0; n];
        for stage in 0..7 {
            for i in 0..n {
                let mut acc = v[i];
                for (j, kj) in k.iter().enumerate() {
                    acc += h * DP_A[stage][j] * kj[i];
                }
                tmp[i] = acc;
            }
            k.push(self.rhs(s + DP_C[stage] * h, &tmp)?);
        }
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|j| DP_E[j] * k[j][i]).sum::<f64>() * h;
            let sc = opts.atol + opts.rtol * v[i].abs().max(tmp[i].abs());
            err += (e / sc) * (e / sc);
        }
        Ok((tmp, fm::sqrt(err / n as f64)))
    }

    /// Integrate from `state` to `s_end` in either direction without exit checks.
    pub fn advance(&self, state: &ParamState, s_end: f64, opts: &IntegratorOptions) -> Result<ParamState> {
        let mut s = state.s;
        let mut v = state.to_vec();
        let dir = if s_end >= s { 1.0 } else { -1.0 };
        let mut h = dir * (1e-3 * s.abs()).min((s_end - s).abs()).max(1e-300);
        let mut steps = 0;
        while (s_end - s) * dir > 0.0 {
            if (s + h - s_end) * dir > 0.0 {
                h = s_end - s;
            }
            match self.dp_step(s, &v, h, opts) {
                Ok((next, err)) if err <= 1.0 => {
                    s = if (s + h - s_end).abs() <= 1e-15 * s_end.abs() { s_end } else { s + h };
                    v = next;
                    h *= (0.9 * fm::powf(err.max(1e-10), -0.2)).min(5.0);
                }
                Ok((_, err)) => h *= (0.9 * fm::powf(err, -0.2)).max(0.2),
                Err(_) => h *= 0.5,
            }
            steps += 1;
            if h.abs() < opts.min_rel_step * s.abs() || steps > opts.max_steps {
                return Err(Error::StepFailure { s, step: h });
            }
        }
        Ok(ParamState::from_slice(s_end, &v))
    }

    /// Integrate from `init` towards `s_0`, stopping where the exit norm reaches 1.
    pub fn integrate(&self, init: &ParamState, s_0: f64, opts: &IntegratorOptions) -> Result<Trajectory> {
        if !(init.s < s_0 && s_0 < 0.0) {
            return Err(Error::InvalidConfig("need S_n < S_0 < 0"));
        }
        let first = self.point(init.clone())?;
        let mut points = alloc::vec![first];
        if opts.stop_at_exit && points[0].norm > 1.0 {
            return Ok(Trajectory { points, exit: ExitReason::NormExceeded });
        }
        let decades = fm::ln(init.s / s_0) / core::f64::consts::LN_10;
        let m = (fm::ceil(decades * opts.samples_per_decade as f64) as usize).max(1);
        let samples: Vec<f64> = (1..=m)
            .map(|j| if j == m { s_0 } else { init.s * fm::powf(s_0 / init.s, j as f64 / m as f64) })
            .collect();
        let mut s = init.s;
        let mut v = init.to_vec();
        let mut h = 1e-4 * s.abs();
        let mut steps = 0;
        for &target in &samples {
            while s < target {
                let h_try = h.min(target - s);
                steps += 1;
                if steps > opts.max_steps || h_try < opts.min_rel_step * s.abs() {
                    return Err(Error::StepFailure { s, step: h_try });
                }
                let (next, err) = match self.dp_step(s, &v, h_try, opts) {
                    Ok(r) => r,
                    Err(_) => {
                        h = 0.5 * h_try;
                        continue;
                    }
                };
                if err > 1.0 {
                    h = h_try * (0.9 * fm::powf(err, -0.2)).max(0.2);
                    continue;
                }
                let s_next = if h_try == target - s { target } else { s + h_try };
                let state = ParamState::from_slice(s_next, &next);
                let point = match self.point(state) {
                    Ok(p) => p,
                    Err(_) => return Ok(Trajectory { points, exit: ExitReason::Degenerate }),
                };
                if opts.stop_at_exit && point.norm > 1.0 {
                    let crossing = self.locate_crossing(s, &v, h_try, opts)?;
                    points.push(crossing);
                    return Ok(Trajectory { points, exit: ExitReason::NormExceeded });
                }
                s = s_next;
                v = next;
                h = h_try * (0.9 * fm::powf(err.max(1e-10), -0.2)).min(5.0);
                if s == target {
                    points.push(point);
                }
            }
        }
        let exit = if points.last().is_some_and(|p| p.norm > 1.0) { ExitReason::NormExceeded } else { ExitReason::Completed };
        Ok(Trajectory { points, exit })
    }

    /// Bisect the step length until the exit norm is 1 to about `1e-12`.
    fn locate_crossing(&self, s: f64, v: &[f64], h: f64, opts: &IntegratorOptions) -> Result<TrajectoryPoint> {
        let (mut lo, mut hi) = (0.0, h);
        let mut best = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (next, _) = self.dp_step(s, v, mid, opts)?;
            let p = self.point(ParamState::from_slice(s + mid, &next))?;
            if p.norm > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            let done = (p.norm - 1.0).abs() < 1e-12 || hi - lo <= 1e-15 * s.abs();
            best = Some(p);
            if done {
                break;
            }
        }
        best.ok_or(Error::StepFailure { s, step: h })
    }

    /// Trajectory from the well-prepared data of `input`.
    pub fn run(&self, input: &ShootInput, opts: &IntegratorOptions) -> Result<Trajectory> {
        let init = self.init_params(input.s_n, &input.xi, &input.zeta)?;
        self.integrate(&init, input.s_0, opts)
    }

    /// Centered difference `dN/ds` at `state`.
    pub fn exit_norm_slope(&self, state: &ParamState, ds: f64, opts: &IntegratorOptions) -> Result<f64> {
        let fwd = self.advance(state, state.s + ds, opts)?;
        let back = self.advance(state, state.s - ds, opts)?;
        Ok((self.exit_norm(&fwd) - self.exit_norm(&back)) / (2.0 * ds))
    }

    /// Growth exponents of the renormalized exit coordinates as `|s|` decreases.
    fn growth_exponents(&self) -> Vec<f64> {
        let lad = &self.class.ladder;
        let mut e: Vec<f64> =
            self.class.kplus.iter().map(|&k| 0.5 * (1.0 + 3.0 * self.theta[k]) - lad.plus[k]).collect();
        e.extend((0..self.config.k()).map(|k| 1.0 - lad.mid[k]));
        e
    }

    /// Search the unit ball for unstable coordinates whose trajectory reaches `s_0`.
    pub fn shoot(&self, s_n: f64, s_0: f64, opts: &ShootOptions) -> Result<ShootResult> {
        let np = self.class.kplus.len();
        let dim = self.dimension();
        let split = |p: &[f64]| (p[..np].to_vec(), p[np..].to_vec());
        let rates = self.growth_exponents();
        let mut history = Vec::new();
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        let mut evaluate = |p: &[f64], iteration: usize, history: &mut Vec<ShootStep>| -> Result<Option<Trajectory>> {
            let (xi, zeta) = split(p);
            let input = ShootInput { s_n, s_0, xi: xi.clone(), zeta: zeta.clone() };
            let traj = match self.run(&input, &opts.integrator) {
                Ok(t) => t,
                Err(Error::InitOutOfBand { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let last = traj.last();
            history.push(ShootStep { iteration, xi, zeta, exit_s: last.s(), exit_norm: last.norm });
            // Later exits score lower.
            let score = if traj.completed() { -1.0 } else { traj.exit_s() / s_n };
            if best.as_ref().map_or(true, |b| score < b.1) {
                best = Some((p.to_vec(), score, last.s()));
            }
            Ok(Some(traj))
        };
        let finish = |p: &[f64], traj: Trajectory, iterations: usize, history: Vec<ShootStep>| {
            let (xi, zeta) = split(p);
            let final_norm = traj.last().norm;
            ShootResult { xi, zeta, trajectory: traj, iterations, final_norm, history }
        };

        let mut p = alloc::vec![0.0; dim];
        let mut iteration = 0;
        while iteration < opts.max_iter {
            let traj = match evaluate(&p, iteration, &mut history)? {
                Some(t) => t,
                None => {
                    p.iter_mut().for_each(|x| *x *= 0.5);
                    iteration += 1;
                    continue;
                }
            };
            if traj.completed() {
                return Ok(finish(&p, traj, iteration, history));
            }
            // Undo the linear growth of each coordinate between S_n and the exit.
            let last = traj.last();
            let c = self.exit_coordinates(&last.state);
            let ratio = s_n / last.s();
            let mut step: Vec<f64> =
                (0..dim).map(|i| -opts.damping * c[i] / fm::powf(ratio, rates[i].max(0.0))).collect();
            let len = fm::sqrt(step.iter().map(|x| x * x).sum::<f64>());
            if len > opts.trust_radius {
                step.iter_mut().for_each(|x| *x *= opts.trust_radius / len);
            }
            for i in 0..dim {
                p[i] += step[i];
            }
            let r = fm::sqrt(p.iter().map(|x| x * x).sum::<f64>());
            if r > 1.0 {
                p.iter_mut().for_each(|x| *x /= r);
            }
            iteration += 1;
        }

        // Coordinate bisection driven by the sign of the exit coordinate.
        let mut lo = alloc::vec![-1.0; dim];
        let mut hi = alloc::vec![1.0; dim];
        while iteration < 4 * opts.max_iter {
            for i in 0..dim {
                p[i] = 0.5 * (lo[i] + hi[i]);
            }
            let Some(traj) = evaluate(&p, iteration, &mut history)? else {
                for i in 0..dim {
                    lo[i] *= 0.5;
                    hi[i] *= 0.5;
                }
                iteration += 1;
                continue;
            };
            if traj.completed() {
                return Ok(finish(&p, traj, iteration, history));
            }
            let c = self.exit_coordinates(&traj.last().state);
            let i = (0..dim).max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs())).unwrap_or(0);
            if c[i] > 0.0 {
                hi[i] = p[i];
            } else {
                lo[i] = p[i];
            }
            iteration += 1;
        }
        let (best_p, _, best_exit) = best.unwrap_or((p, f64::INFINITY, f64::INFINITY));
        Err(Error::NoConvergence { iterations: iteration, best_exit, best: best_p })
    }

    /// Physical `lambda_k(t)`, `x_k(t)`, `rho_k(t)` with `t = 1/sqrt(-2s)`.
    pub fn to_physical(&self, trajectory: &Trajectory) -> PhysicalSeries {
        let l = self.config.ells();
        let k_count = l.len();
        let mut out = PhysicalSeries {
            t: Vec::new(),
            lambda: Vec::new(),
            x: Vec::new(),
            rho: Vec::new(),
            lambda_envelope_ratio: alloc::vec![0.0; k_count],
            x_envelope_ratio: alloc::vec![0.0; k_count],
        };
        for p in &trajectory.points {
            let t = 1.0 / fm::sqrt(-2.0 * p.s());
            let lam: Vec<f64> = p.derived.mu_tilde.iter().map(|m| t * m).collect();
            let x: Vec<f64> = p.state.y.iter().map(|y| t * y).collect();
            for k in 0..k_count {
                let dl = (lam[k] - l[k] * t).abs() / fm::powf(t, 23.0 / 22.0);
                let dx = (x[k] + 1.0 / (l[k] * l[k] * t)).abs() / fm::powf(t, -21.0 / 22.0);
                out.lambda_envelope_ratio[k] = out.lambda_envelope_ratio[k].max(dl);
                out.x_envelope_ratio[k] = out.x_envelope_ratio[k].max(dx);
            }
            out.rho.push(p.state.tau.iter().map(|tau| 1.0 / fm::sqrt(-2.0 * tau)).collect());
            out.t.push(t);
            out.lambda.push(lam);
            out.x.push(x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;
    use std::vec::Vec;

    const L1: f64 = 3.450821807669628;

    fn system(ells: &[f64], signs: &[f64]) -> ModulationSystem {
        ModulationSystem::new(BubbleConfig::new(ells.to_vec(), signs.to_vec()).unwrap(), L1).unwrap()
    }

    fn two() -> ModulationSystem {
        system(&[2.0, 1.0], &[1.0, 1.0])
    }

    fn opts() -> IntegratorOptions {
        IntegratorOptions::default()
    }

    #[test]
    fn initial_data_examples() {
        let m = two();
        let st = m.init_params(-1e4, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let b = st.bars(m.config());
        assert!(b.mu_bar.iter().chain(&b.tau_bar).chain(&b.y_bar).all(|v| v.abs() < 1e-15));
        let d = derive(m.config(), &st, L1).unwrap();
        let th = theta(m.config());
        for k in 0..2 {
            let l = m.config().ells()[k];
            assert!((d.e[k] - l * (0.5 + th[k])).abs() < 1e-12);
        }
        let one = system(&[1.0], &[1.0]);
        assert_eq!(one.init_params(-1e4, &[0.0], &[0.0]).unwrap().a[0], 0.0);
        let wide = system(&[1.5], &[1.0]);
        assert!(wide.init_params(-1e4, &[0.0], &[0.0]).unwrap().a[0].abs() < 1e-15);
        assert!(one.init_params(-50.0, &[0.0], &[0.0]).is_err());
        assert!(matches!(m.init_params(-1e4, &[0.9, 0.0], &[0.0, 0.0]), Err(Error::InitOutOfBand { k: 1, .. })));
    }

    #[test]
    fn self_similar_point_is_an_equilibrium() {
        let m = two();
        let st = ParamState::self_similar(m.config(), -300.0);
        let d = m.rhs(st.s, &st.to_vec()).unwrap();
        for k in 0..2 {
            let l: f64 = m.config().ells()[k];
            assert!((d[k] - l.powi(-3)).abs() < 1e-15);
            assert!(d[2 + k].abs() < 1e-15);
            let dy_ss = 2.0 / (l * l);
            assert!((d[4 + k] - dy_ss).abs() < 1e-14);
            assert!(d[6 + k].abs() < 1e-18);
        }
    }

    #[test]
    fn single_bubble_stays_at_equilibrium() {
        let m = system(&[1.0], &[1.0]);
        let tr = m.run(&ShootInput { s_n: -1e4, s_0: -1e2, xi: vec![0.0], zeta: vec![0.0] }, &opts()).unwrap();
        assert!(tr.completed());
        for p in &tr.points {
            let b = p.state.bars(m.config());
            assert!(b.mu_bar[0].abs() <= 1e-3 && b.tau_bar[0].abs() <= 1e-3 && b.y_bar[0].abs() <= 1e-3);
        }
        let ph = m.to_physical(&tr);
        for (i, t) in ph.t.iter().enumerate() {
            assert!((ph.lambda[i][0] - t).abs() <= 1e-9 * t);
            assert!((ph.x[i][0] + 1.0 / t).abs() <= 1e-9 / t);
        }
    }

    #[test]
    fn tau_bar_grows_like_inverse_s() {
        let m = two();
        let through = IntegratorOptions { stop_at_exit: false, ..opts() };
        let tr = m.run(&ShootInput { s_n: -1e4, s_0: -1e2, xi: vec![0.0, 0.0], zeta: vec![0.0, 0.5] }, &through).unwrap();
        assert_eq!(tr.last().s(), -1e2);
        let first = tr.points[0].state.bars(m.config()).tau_bar[1];
        let last = tr.last().state.bars(m.config()).tau_bar[1];
        assert!((last / first / 100.0 - 1.0).abs() < 0.1, "{}", last / first);
    }

    fn fitted_exponent(points: &[TrajectoryPoint], k: usize, s_lo: f64) -> f64 {
        let sel: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.s() >= s_lo)
            .map(|p| (p.s().abs().ln(), p.g[k].abs().ln()))
            .collect();
        let n = sel.len() as f64;
        let mx = sel.iter().map(|v| v.0).sum::<f64>() / n;
        let my = sel.iter().map(|v| v.1).sum::<f64>() / n;
        let num: f64 = sel.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
        let den: f64 = sel.iter().map(|v| (v.0 - mx).powi(2)).sum();
        -num / den
    }

    #[test]
    fn unstable_growth_exponents() {
        let m = two();
        let th = theta(m.config());
        for k in 0..2 {
            let mut xi = vec![0.0, 0.0];
            xi[k] = 1e-6;
            let tr = m.run(&ShootInput { s_n: -1e4, s_0: -1e2, xi, zeta: vec![0.0, 0.0] }, &opts()).unwrap();
            assert!(tr.completed());
            let p = fitted_exponent(&tr.points, k, -1e3);
            let target = 0.5 * (1.0 + 3.0 * th[k]);
            assert!((p / target - 1.0).abs() < 0.05, "k {k}: {p} vs {target}");
        }
    }

    #[test]
    fn linearized_f_equation() {
        let m = two();
        let th = theta(m.config());
        for k in 0..2 {
            let mut xi = vec![0.0, 0.0];
            xi[k] = 1e-3;
            let st = m.init_params(-1e4, &xi, &[0.0, 0.0]).unwrap();
            let ds = 1e-4 * st.s.abs();
            let f = |x: &ParamState| derive(m.config(), x, L1).unwrap().f[k];
            let fwd = m.advance(&st, st.s + ds, &opts()).unwrap();
            let back = m.advance(&st, st.s - ds, &opts()).unwrap();
            let df = (f(&fwd) - f(&back)) / (2.0 * ds);
            let c = -st.s * df / f(&st);
            let target = 0.5 * (1.0 + 3.0 * th[k]);
            assert!((c / target - 1.0).abs() < 0.05, "k {k}: {c} vs {target}");
        }
    }

    #[test]
    fn exit_norm_examples() {
        let m = system(&[1.0], &[1.0]);
        let st = m.init_params(-1e4, &[0.0], &[0.0]).unwrap();
        assert_eq!(m.exit_norm(&st), 0.0);
        let st = m.init_params(-1e4, &[0.0], &[1.0]).unwrap();
        assert!((m.exit_norm(&st) - 1.0).abs() < 1e-12);
        let st = m.init_params(-1e4, &[0.6], &[0.8]).unwrap();
        assert!((m.exit_norm(&st) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transversal_crossings() {
        let m = two();
        for (xi, zeta) in [([0.05, 0.0], [0.0, 0.0]), ([0.0, -0.08], [0.0, 0.0]), ([0.0, 0.0], [0.0, 0.2])] {
            let tr = m.run(&ShootInput { s_n: -1e4, s_0: -1e2, xi: xi.to_vec(), zeta: zeta.to_vec() }, &opts()).unwrap();
            assert_eq!(tr.exit, ExitReason::NormExceeded);
            let st = &tr.last().state;
            assert!((tr.last().norm - 1.0).abs() < 1e-9);
            let slope = m.exit_norm_slope(st, 1e-6 * st.s.abs(), &opts()).unwrap();
            assert!(slope > 0.0);
        }
    }

    #[test]
    fn shooting_finds_equilibrium_immediately() {
        let m = system(&[1.0], &[1.0]);
        let r = m.shoot(-1e4, -1e2, &ShootOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!((r.xi.clone(), r.zeta.clone()), (vec![0.0], vec![0.0]));
        let r = two().shoot(-1e4, -1e2, &ShootOptions::default()).unwrap();
        assert!(r.final_norm <= 1.0 && r.trajectory.completed());
    }

    #[test]
    fn shooting_compensates_structural_forcing() {
        let c = BubbleConfig::new(vec![2.0, 1.0], vec![1.0, 1.0]).unwrap().with_constants(5.0, 0.0, 0.0);
        let m = ModulationSystem::new(c, L1).unwrap();
        let zero = m.run(&ShootInput { s_n: -1e4, s_0: -1e2, xi: vec![0.0; 2], zeta: vec![0.0; 2] }, &opts()).unwrap();
        assert!(!zero.completed());
        let r = m.shoot(-1e4, -1e2, &ShootOptions::default());
        let r = match r { Ok(r) => r, Err(e) => panic!("{e}") };
        assert!(r.trajectory.completed() && r.final_norm <= 1.0);
        assert!(r.iterations > 0);
    }

    #[test]
    fn exit_norm_at_s0_does_not_grow_with_s_n() {
        let m = two();
        let norm = |s_n: f64| m.shoot(s_n, -1e2, &ShootOptions::default()).unwrap().final_norm;
        let (near, far) = (norm(-1e3), norm(-1e4));
        assert!(far <= near.max(1e-20), "{far} vs {near}");
    }

    #[test]
    fn stable_direction_decays() {
        let m = system(&[4.0, 1.0], &[1.0, -1.0]);
        assert_eq!(m.classification().kminus, vec![1]);
        let lad = m.ladder().clone();
        let (s_n, s_0) = (-1e4f64, -1e2f64);
        let mut st = m.init_params(s_n, &[0.0], &[0.0, 0.0]).unwrap();
        st.mu[1] *= 1.0 + s_n.abs().powf(-lad.mid[0]);
        let tr = m.integrate(&st, s_0, &opts()).unwrap();
        let g = tr.last().g[1].abs();
        let bound = 2.0 * s_0.abs().powf(-0.5 * (lad.minus[0] + lad.plus[1]));
        assert!(g <= bound, "{g} vs {bound}");
    }

    #[test]
    fn trajectories_are_deterministic_and_monotone() {
        let m = two();
        let input = ShootInput { s_n: -1e4, s_0: -1e2, xi: vec![0.01, -0.02], zeta: vec![0.03, 0.0] };
        let a = m.run(&input, &opts()).unwrap();
        let b = m.run(&input, &opts()).unwrap();
        assert_eq!(a, b);
        for w in a.points.windows(2) {
            assert!(w[1].s() > w[0].s());
            for k in 0..2 {
                assert!(w[1].state.tau[k] > w[0].state.tau[k]);
            }
        }
    }

    #[test]
    fn y_bar_is_slaved() {
        let m = two();
        let lad = m.ladder().clone();
        let input = ShootInput { s_n: -1e4, s_0: -1e2, xi: vec![0.0, 0.05], zeta: vec![0.05, -0.05] };
        let tr = m.run(&input, &opts()).unwrap();
        for p in &tr.points {
            let yb = p.state.bars(m.config()).y_bar;
            for k in 0..2 {
                assert!(yb[k].abs() <= 10.0 * p.s().abs().powf(-lad.plus[k]));
            }
        }
    }

    #[test]
    fn advance_round_trip() {
        let m = two();
        let st = m.init_params(-1e4, &[0.01, 0.0], &[0.0, 0.01]).unwrap();
        let fwd = m.advance(&st, -5e3, &opts()).unwrap();
        let back = m.advance(&fwd, -1e4, &opts()).unwrap();
        for (x, y) in st.to_vec().iter().zip(back.to_vec()) {
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-12), "{x} {y}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn equilibrium_for_any_configuration(
            k in 1usize..5,
            seed in any::<u64>(),
            s in -1e6f64..-100.0,
        ) {
            let mut ells = vec![];
            let mut l = 1.0 + (seed % 13) as f64 / 4.0;
            for i in 0..k {
                ells.push(l);
                l /= 1.3 + ((seed >> (8 * i)) % 7) as f64 / 5.0;
            }
            let signs: Vec<f64> = (0..k).map(|i| if (seed >> (48 + i)) & 1 == 0 { 1.0 } else { -1.0 }).collect();
            let c = BubbleConfig::new(ells.clone(), signs).unwrap();
            let Ok(m) = ModulationSystem::new(c, L1) else { return Ok(()) };
            let st = ParamState::self_similar(m.config(), s);
            let d = m.rhs(s, &st.to_vec()).unwrap();
            for i in 0..k {
                let l = ells[i];
                prop_assert!(d[k + i].abs() <= 1e-14 * l);
                prop_assert!((d[2 * k + i] - 2.0 / (l * l)).abs() <= 1e-12 / (l * l));
                prop_assert!(d[3 * k + i].abs() <= 1e-13 * (l * l * l / (s * s)).max(1e-300) * 1e3);
            }
        }
    }
}
