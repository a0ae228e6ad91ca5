//! K-bubble configurations, interaction angles, derived modulation
//! quantities and the sampled ansatz field in the rescaled frame.
//!
//! Each bubble `k` is carried by a near-field profile
//! `eps_k mu~_k^{-1/2} [Q + P / (2 tau_k)]((y - y_k) / mu~_k)` that is blended
//! into a `|y - z_k|^{-3/2}` tail on its left; the corrections `r_k R_k` and
//! `a_k P_k` are added on top.

use alloc::vec::Vec;

use crate::grid::{self, Grid1D};
use crate::profiles::{eval_q, Norms, ProfileTable};
use crate::{fm, Error, Result};

/// Threshold separating unstable from stable bubbles, and the bottom of the ladder.
pub const DELTA_FLOOR: f64 = 1.0 / 43.0;
/// Top of the exponent ladder.
pub const DELTA_CEIL: f64 = 1.0 / 42.0;

/// Scales, signs and structural constants of a multi-bubble configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleConfig {
    ells: Vec<f64>,
    signs: Vec<f64>,
    pub c0: f64,
    pub c1: f64,
    pub lambda0: f64,
}

impl BubbleConfig {
    /// Scales must be positive and strictly decreasing, signs `+1` or `-1`.
    pub fn new(ells: Vec<f64>, signs: Vec<f64>) -> Result<Self> {
        if ells.is_empty() {
            return Err(Error::InvalidConfig("need at least one bubble"));
        }
        if ells.len() != signs.len() {
            return Err(Error::InvalidConfig("ells and signs differ in length"));
        }
        if ells.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidConfig("scales must be positive and finite"));
        }
        if ells.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig("scales must be strictly decreasing"));
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidConfig("signs must be +1 or -1"));
        }
        Ok(Self { ells, signs, c0: 0.0, c1: 0.0, lambda0: 0.0 })
    }

    pub fn with_constants(mut self, c0: f64, c1: f64, lambda0: f64) -> Self {
        self.c0 = c0;
        self.c1 = c1;
        self.lambda0 = lambda0;
        self
    }

    pub fn k(&self) -> usize {
        self.ells.len()
    }

    pub fn ells(&self) -> &[f64] {
        &self.ells
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Same configuration with every sign flipped.
    pub fn flipped(&self) -> Self {
        Self { signs: self.signs.iter().map(|s| -s).collect(), ..self.clone() }
    }

    /// Same configuration with every scale multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::new(self.ells.iter().map(|l| c * l).collect(), self.signs.clone())?;
        out.c0 = self.c0;
        out.c1 = self.c1;
        out.lambda0 = self.lambda0;
        Ok(out)
    }
}

/// Interaction angles `theta_k = sum_{j<k} eps_k eps_j sqrt(l_k / l_j)`.
pub fn theta(config: &BubbleConfig) -> Vec<f64> {
    let (l, e) = (config.ells(), config.signs());
    (0..config.k())
        .map(|k| (0..k).map(|j| e[k] * e[j] * fm::sqrt(l[k] / l[j])).sum())
        .collect()
}

/// Localization width `gamma = min_k (l_{k+1}^{-2} - l_k^{-2}) / (4 l_k)`.
///
/// A single bubble has no neighbour; it uses `1 / (4 l_1^3)`, the value of
/// the same expression with a virtual neighbour at `l^{-2} = 2 l_1^{-2}`.
pub fn gamma(config: &BubbleConfig) -> f64 {
    let l = config.ells();
    if l.len() == 1 {
        return 0.25 / (l[0] * l[0] * l[0]);
    }
    l.windows(2)
        .map(|w| (1.0 / (w[1] * w[1]) - 1.0 / (w[0] * w[0])) / (4.0 * w[0]))
        .fold(f64::INFINITY, f64::min)
}

/// Strictly ordered exponents used by the exit norm and the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaLadder {
    /// Bottom rung, `1/43`.
    pub delta_kp1: f64,
    pub delta_kp1_plus: f64,
    /// Per bubble (index `k - 1`): lower, middle and upper rung.
    pub minus: Vec<f64>,
    pub mid: Vec<f64>,
    pub plus: Vec<f64>,
    pub delta0_minus: f64,
    pub delta0: f64,
}

impl DeltaLadder {
    /// The chain from the bottom rung up to `delta0`, in increasing order.
    pub fn chain(&self) -> Vec<f64> {
        let k = self.mid.len();
        let mut c = alloc::vec![self.delta_kp1, self.delta_kp1_plus];
        for i in (0..k).rev() {
            c.extend([self.minus[i], self.mid[i], self.plus[i]]);
        }
        c.extend([self.delta0_minus, self.delta0]);
        c
    }

    /// Smallest gap between consecutive rungs.
    pub fn min_margin(&self) -> f64 {
        self.chain().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Unstable and stable index sets (zero based) with the exponent ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kplus: Vec<usize>,
    pub kminus: Vec<usize>,
    /// `min_{k in K+} (1 + 3 theta_k) / 2`.
    pub delta_plus: f64,
    pub ladder: DeltaLadder,
}

impl Classification {
    pub fn is_unstable(&self, k: usize) -> bool {
        self.kplus.contains(&k)
    }
}

/// Growth rate `(1 + 3 theta_k) / 2` of the `f_k` mode.
pub fn growth_rates(config: &BubbleConfig) -> Vec<f64> {
    theta(config).iter().map(|t| 0.5 * (1.0 + 3.0 * t)).collect()
}

/// Split bubbles by the sign of `(1 + 3 theta_k)/2 - 1/43` and build the ladder
/// on the uniform grid `1/43 + i (delta0 - 1/43) / (3K + 3)`.
pub fn classify(config: &BubbleConfig) -> Result<Classification> {
    let rates = growth_rates(config);
    let (kplus, kminus): (Vec<usize>, Vec<usize>) =
        (0..config.k()).partition(|&k| rates[k] > DELTA_FLOOR);
    let delta_plus = kplus.iter().map(|&k| rates[k]).fold(f64::INFINITY, f64::min);
    let delta0 = DELTA_CEIL.min(delta_plus);
    if !(delta0 > DELTA_FLOOR) {
        return Err(Error::DegenerateLadder { delta0 });
    }
    let k = config.k();
    let steps = (3 * k + 3) as f64;
    let rung = |i: usize| DELTA_FLOOR + i as f64 * (delta0 - DELTA_FLOOR) / steps;
    let mut minus = alloc::vec![0.0; k];
    let mut mid = alloc::vec![0.0; k];
    let mut plus = alloc::vec![0.0; k];
    for b in 0..k {
        let i = 2 + 3 * (k - 1 - b);
        minus[b] = rung(i);
        mid[b] = rung(i + 1);
        plus[b] = rung(i + 2);
    }
    let ladder = DeltaLadder {
        delta_kp1: DELTA_FLOOR,
        delta_kp1_plus: rung(1),
        minus,
        mid,
        plus,
        delta0_minus: rung(3 * k + 2),
        delta0,
    };
    Ok(Classification { kplus, kminus, delta_plus, ladder })
}

/// Modulation parameters of every bubble at rescaled time `s < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    pub s: f64,
    pub tau: Vec<f64>,
    pub mu: Vec<f64>,
    pub y: Vec<f64>,
    pub a: Vec<f64>,
}

/// Normalized deviations from the self-similar values.
#[derive(Debug, Clone, PartialEq)]
pub struct Bars {
    pub mu_bar: Vec<f64>,
    pub tau_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
}

impl ParamState {
    /// `mu = l`, `tau = s l^{-3}`, `y = 2 s l^{-2}`, `a = 0`.
    pub fn self_similar(config: &BubbleConfig, s: f64) -> Self {
        let l = config.ells();
        Self {
            s,
            tau: l.iter().map(|l| s / (l * l * l)).collect(),
            mu: l.to_vec(),
            y: l.iter().map(|l| 2.0 * s / (l * l)).collect(),
            a: alloc::vec![0.0; l.len()],
        }
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if [self.tau.len(), self.mu.len(), self.y.len(), self.a.len()].iter().any(|&n| n != k) {
            return Err(Error::InvalidState("parameter vectors do not match bubble count"));
        }
        if !(self.s < 0.0) {
            return Err(Error::InvalidState("rescaled time must be negative"));
        }
        if self.tau.iter().any(|t| !(*t < 0.0)) {
            return Err(Error::InvalidState("tau must be negative"));
        }
        if self.mu.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::InvalidState("mu must be positive"));
        }
        if self.y.iter().chain(&self.a).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite position or energy correction"));
        }
        Ok(())
    }

    pub fn bars(&self, config: &BubbleConfig) -> Bars {
        let l = config.ells();
        let s = self.s;
        Bars {
            mu_bar: (0..l.len()).map(|k| self.mu[k] / l[k] - 1.0).collect(),
            tau_bar: (0..l.len()).map(|k| self.tau[k] * l[k] * l[k] * l[k] / s - 1.0).collect(),
            y_bar: (0..l.len()).map(|k| self.y[k] * l[k] * l[k] / (2.0 * s) - 1.0).collect(),
        }
    }

    /// Flat layout `[tau.., mu.., y.., a..]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.k());
        v.extend_from_slice(&self.tau);
        v.extend_from_slice(&self.mu);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.a);
        v
    }

    pub fn from_slice(s: f64, v: &[f64]) -> Self {
        let k = v.len() / 4;
        Self {
            s,
            tau: v[..k].to_vec(),
            mu: v[k..2 * k].to_vec(),
            y: v[2 * k..3 * k].to_vec(),
            a: v[3 * k..].to_vec(),
        }
    }
}

/// Quantities computed from a configuration and a parameter state.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub mu_tilde: Vec<f64>,
    /// Tail centers `z_k = y_k + mu_k (-2 tau_k + c0 - c1 / (2 tau_k))`.
    pub z: Vec<f64>,
    /// Interaction coefficient from the tail sum.
    pub r: Vec<f64>,
    /// Interaction coefficient from its closed-form asymptotics.
    pub r_closed: Vec<f64>,
    pub d: Vec<f64>,
    /// Local energies.
    pub e: Vec<f64>,
    pub theta: Vec<f64>,
    /// `f_k = mu_bar_k + y_bar_k`.
    pub f: Vec<f64>,
}

/// Amplitude of the left tail of bubble `j`: `-eps_j ||Q||_1 mu_j sqrt(-2 tau_j) / 2`.
fn tail_amplitude(config: &BubbleConfig, state: &ParamState, j: usize, l1: f64) -> f64 {
    -0.5 * config.signs()[j] * l1 * state.mu[j] * fm::sqrt(-2.0 * state.tau[j])
}

fn tail_centers(config: &BubbleConfig, state: &ParamState) -> Vec<f64> {
    (0..state.k())
        .map(|k| {
            let t = state.tau[k];
            state.y[k] + state.mu[k] * (-2.0 * t + config.c0 - config.c1 / (2.0 * t))
        })
        .collect()
}

fn mu_tilde(config: &BubbleConfig, state: &ParamState) -> Vec<f64> {
    (0..state.k())
        .map(|k| state.mu[k] / (1.0 + config.lambda0 / (2.0 * state.tau[k])))
        .collect()
}

/// Fill [`DerivedParams`]; `l1` is `||Q||_{L^1}`.
pub fn derive(config: &BubbleConfig, state: &ParamState, l1: f64) -> Result<DerivedParams> {
    let k_count = config.k();
    state.validate(k_count)?;
    if state.s.abs() < 10.0 {
        return Err(Error::InvalidState("derived parameters need |s| >= 10"));
    }
    let th = theta(config);
    let bars = state.bars(config);
    let mt = mu_tilde(config, state);
    let z = tail_centers(config, state);
    let eps = config.signs();
    let l = config.ells();
    let s = state.s;
    let mut r = alloc::vec![0.0; k_count];
    let mut d = alloc::vec![0.0; k_count];
    for k in 0..k_count {
        let (mut sum_w, mut sum_dw) = (0.0, 0.0);
        for j in 0..k {
            let dist = z[j] - state.y[k];
            if !(dist >= 1.0) {
                return Err(Error::BubbleCollision { k: k + 1, j: j + 1, distance: dist });
            }
            let amp = tail_amplitude(config, state, j, l1);
            sum_w += amp * fm::powf(dist, -1.5);
            sum_dw += amp * 1.5 * fm::powf(dist, -2.5);
        }
        r[k] = eps[k] * fm::sqrt(mt[k]) * sum_w;
        d[k] = eps[k] * mt[k] * fm::sqrt(mt[k]) * sum_dw;
    }
    let r_closed = (0..k_count)
        .map(|k| {
            l1 / (4.0 * s) * l[k] * l[k] * l[k] * th[k]
                * (1.0 + 0.5 * bars.mu_bar[k] - 1.5 * bars.y_bar[k])
        })
        .collect();
    let e = (0..k_count)
        .map(|k| {
            let mu = state.mu[k];
            s / (mu * mu) * (state.a[k] + 0.5 / state.tau[k] + 4.0 * r[k] / l1)
        })
        .collect();
    let f = (0..k_count).map(|k| bars.mu_bar[k] + bars.y_bar[k]).collect();
    Ok(DerivedParams { mu_tilde: mt, z, r, r_closed, d, e, theta: th, f })
}

/// `Omega_k = ||Q||_1^2 / (8 mu^3) (a/tau + a^2) + ||Q||_1 d / mu^3`.
pub fn omega(state: &ParamState, derived: &DerivedParams, l1: f64) -> Vec<f64> {
    (0..state.k())
        .map(|k| {
            let (mu, a, tau) = (state.mu[k], state.a[k], state.tau[k]);
            let mu3 = mu * mu * mu;
            l1 * l1 / (8.0 * mu3) * (a / tau + a * a) + l1 / mu3 * derived.d[k]
        })
        .collect()
}

/// Predicted conserved quantities of the multi-bubble solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEnergy {
    pub mass: f64,
    /// `||Q||_1^2 / 16 * sum l_k (1 + 2 theta_k)`.
    pub energy: f64,
    /// Same value from the summation-by-parts form, a sum of squares.
    pub energy_abel: f64,
}

pub fn predict_mass_energy(config: &BubbleConfig, norms: &Norms) -> MassEnergy {
    let l = config.ells();
    let e = config.signs();
    let k = config.k();
    let th = theta(config);
    let c = norms.l1_q * norms.l1_q / 16.0;
    let energy = c * (0..k).map(|i| l[i] * (1.0 + 2.0 * th[i])).sum::<f64>();
    let mut partial = 0.0;
    let mut abel = 0.0;
    for i in 0..k {
        partial += e[i] / fm::sqrt(l[i]);
        let next = if i + 1 < k { l[i + 1] * l[i + 1] } else { 0.0 };
        abel += (l[i] * l[i] - next) * partial * partial;
    }
    MassEnergy { mass: k as f64 * norms.l2sq_q, energy, energy_abel: c * abel }
}

/// Energy of the rescaled ansatz at time `s`: `-||Q||_1^2 / (32 s) sum l_k (1 + 2 theta_k)`.
pub fn rescaled_energy(config: &BubbleConfig, norms: &Norms, s: f64) -> f64 {
    -predict_mass_energy(config, norms).energy / (2.0 * s)
}

/// Cubic smoothstep clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Cutoff equal to 0 on `(-inf, -2 gamma]` and 1 on `[-gamma, inf)`.
pub fn chi(x: f64, gamma: f64) -> f64 {
    smoothstep((x + 2.0 * gamma) / gamma)
}

/// Options for sampling the ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Fraction of the grid at each end covered by a half-cosine taper.
    pub window_fraction: f64,
    /// Include the `P / (2 tau)` term of the near field.
    pub p_correction: bool,
    /// Fail with `ProfileDomainExceeded` if more than 1% of nodes needed
    /// profile values outside the table.
    pub strict_lookup: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { window_fraction: 0.1, p_correction: true, strict_lookup: false }
    }
}

#[derive(Debug, Clone, Copy)]
struct Bubble {
    eps: f64,
    mu_tilde: f64,
    scale: f64,
    inv_two_tau: f64,
    y: f64,
    z: f64,
    tail_amp: f64,
    band: f64,
    r: f64,
    a: f64,
}

/// Pointwise evaluator of the ansatz `V = sum_k W_k + r_k R_k + a_k P_k`.
#[derive(Debug, Clone)]
pub struct Ansatz<'a> {
    profiles: &'a ProfileTable,
    bubbles: Vec<Bubble>,
    s_abs: f64,
    gamma: f64,
    p_correction: bool,
}

/// Value of the ansatz at one point and whether any lookup left the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub extrapolated: bool,
}

impl<'a> Ansatz<'a> {
    pub fn new(
        config: &BubbleConfig,
        state: &ParamState,
        profiles: &'a ProfileTable,
        opts: &FieldOptions,
    ) -> Result<Self> {
        let l1 = profiles.norms.l1_q;
        let derived = derive(config, state, l1)?;
        let g = gamma(config);
        let s_abs = state.s.abs();
        let bubbles = (0..config.k())
            .map(|k| Bubble {
                eps: config.signs()[k],
                mu_tilde: derived.mu_tilde[k],
                scale: config.signs()[k] / fm::sqrt(derived.mu_tilde[k]),
                inv_two_tau: 0.5 / state.tau[k],
                y: state.y[k],
                z: derived.z[k],
                tail_amp: tail_amplitude(config, state, k, l1),
                band: g * config.ells()[k] * s_abs,
                r: derived.r[k],
                a: state.a[k],
            })
            .collect();
        Ok(Self { profiles, bubbles, s_abs, gamma: g, p_correction: opts.p_correction })
    }

    pub fn bubble_count(&self) -> usize {
        self.bubbles.len()
    }

    /// Left tail of bubble `k` at `y` (zero right of its center `z_k`).
    pub fn tail(&self, k: usize, y: f64) -> f64 {
        let b = &self.bubbles[k];
        if y >= b.z {
            0.0
        } else {
            b.tail_amp * fm::powf(b.z - y, -1.5)
        }
    }

    /// Three-zone profile `W_k(y)`.
    pub fn w(&self, k: usize, y: f64) -> PointValue {
        let b = &self.bubbles[k];
        let far = b.y - b.band;
        if y <= far {
            return PointValue { value: self.tail(k, y), extrapolated: false };
        }
        let zeta = (y - b.y) / b.mu_tilde;
        let mut near = eval_q(zeta);
        let mut extrapolated = false;
        if self.p_correction {
            let p = self.profiles.lookup_p(zeta);
            near += b.inv_two_tau * p.value;
            extrapolated = p.extrapolated;
        }
        near *= b.scale;
        let weight = smoothstep((y - far) / (0.5 * b.band));
        let value = if weight >= 1.0 { near } else { weight * near + (1.0 - weight) * self.tail(k, y) };
        PointValue { value, extrapolated }
    }

    /// Localized `P_k(y) = eps_k mu~^{-1/2} P(zeta) chi(zeta / |s|)`.
    pub fn p_k(&self, k: usize, y: f64) -> PointValue {
        let b = &self.bubbles[k];
        let zeta = (y - b.y) / b.mu_tilde;
        let c = chi(zeta / self.s_abs, self.gamma);
        if c == 0.0 {
            return PointValue { value: 0.0, extrapolated: false };
        }
        let p = self.profiles.lookup_p(zeta);
        PointValue { value: b.scale * p.value * c, extrapolated: p.extrapolated }
    }

    /// `R_k(y) = eps_k mu~^{-1/2} R(zeta)`.
    pub fn r_k(&self, k: usize, y: f64) -> PointValue {
        let b = &self.bubbles[k];
        let r = self.profiles.lookup_r((y - b.y) / b.mu_tilde);
        PointValue { value: b.scale * r.value, extrapolated: false }
    }

    /// Full ansatz at `y`.
    pub fn value(&self, y: f64) -> PointValue {
        let mut total = 0.0;
        let mut extrapolated = false;
        for k in 0..self.bubbles.len() {
            let b = self.bubbles[k];
            let w = self.w(k, y);
            total += w.value;
            extrapolated |= w.extrapolated;
            if b.r != 0.0 {
                total += b.r * self.r_k(k, y).value;
            }
            if b.a != 0.0 {
                let p = self.p_k(k, y);
                total += b.a * p.value;
                extrapolated |= p.extrapolated;
            }
        }
        PointValue { value: total, extrapolated }
    }

    /// Interval `[min_k y_k - 20 mu~_k, max_k y_k + 20 mu~_k]` holding every core.
    pub fn core_span(&self) -> (f64, f64) {
        let lo = self.bubbles.iter().map(|b| b.y - 20.0 * b.mu_tilde).fold(f64::INFINITY, f64::min);
        let hi = self.bubbles.iter().map(|b| b.y + 20.0 * b.mu_tilde).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Signs of the bubbles, in order.
    pub fn signs(&self) -> Vec<f64> {
        self.bubbles.iter().map(|b| b.eps).collect()
    }
}

/// Half-cosine taper over the outer `fraction` of `n` samples at each end.
pub fn taper_window(n: usize, fraction: f64) -> Vec<f64> {
    let m = fm::floor(fraction * n as f64) as usize;
    let mut w = alloc::vec![1.0; n];
    for i in 0..m.min(n / 2) {
        let v = 0.5 - 0.5 * fm::cos(core::f64::consts::PI * i as f64 / m as f64);
        w[i] = v;
        w[n - 1 - i] = v;
    }
    w
}

/// The ansatz sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    /// Nodes whose value used profile data outside the table.
    pub extrapolated: usize,
    /// Index range `[lo, hi)` not touched by the taper.
    pub untapered: (usize, usize),
}

impl SampledField {
    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// `int V^2` by composite Simpson.
    pub fn mass(&self) -> f64 {
        let w = self.grid.simpson_weights();
        grid::inner(&w, &self.values, &self.values)
    }

    /// `1/2 int V_y^2 - 1/6 int V^6`, derivative by central differences.
    pub fn energy(&self) -> f64 {
        let w = self.grid.simpson_weights();
        let dv = grid::derivative(&self.values, self.grid.h(), 1);
        let v6: Vec<f64> = self.values.iter().map(|v| v * v * v * v * v * v).collect();
        0.5 * grid::inner(&w, &dv, &dv) - grid::quad(&w, &v6) / 6.0
    }
}

/// Sample the ansatz on `grid`, tapering both ends by `opts.window_fraction`.
pub fn build_field(
    config: &BubbleConfig,
    state: &ParamState,
    grid: &Grid1D,
    profiles: &ProfileTable,
    opts: &FieldOptions,
) -> Result<SampledField> {
    let ansatz = Ansatz::new(config, state, profiles, opts)?;
    let n = grid.len();
    let window = taper_window(n, opts.window_fraction);
    let m = fm::floor(opts.window_fraction * n as f64) as usize;
    let untapered = (m.min(n / 2), n - m.min(n / 2));
    let (lo, hi) = ansatz.core_span();
    if lo < grid.x(untapered.0) || hi > grid.x(untapered.1 - 1) {
        return Err(Error::GridTooNarrow { needed_min: lo, needed_max: hi });
    }
    let mut extrapolated = 0;
    let values = (0..n)
        .map(|i| {
            let pv = ansatz.value(grid.x(i));
            if pv.extrapolated {
                extrapolated += 1;
            }
            window[i] * pv.value
        })
        .collect();
    if opts.strict_lookup && extrapolated as f64 > 0.01 * n as f64 {
        return Err(Error::ProfileDomainExceeded { fraction: extrapolated as f64 / n as f64 });
    }
    Ok(SampledField { grid: *grid, values, extrapolated, untapered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::build_profiles;
    use proptest::prelude::*;
    use std::vec;

    const L1: f64 = 3.450821807669628;

    fn two_bubble() -> BubbleConfig {
        BubbleConfig::new(vec![2.0, 1.0], vec![1.0, 1.0]).unwrap()
    }

    fn table() -> ProfileTable {
        build_profiles(Grid1D::symmetric(30.0, 6001).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BubbleConfig::new(vec![], vec![]).is_err());
        assert!(BubbleConfig::new(vec![1.0, 2.0], vec![1.0, 1.0]).is_err());
        assert!(BubbleConfig::new(vec![2.0, 1.0], vec![1.0, 0.5]).is_err());
        assert!(BubbleConfig::new(vec![2.0], vec![1.0, 1.0]).is_err());
        assert!(BubbleConfig::new(vec![-1.0], vec![1.0]).is_err());
    }

    #[test]
    fn two_bubble_classification() {
        let c = two_bubble();
        let th = theta(&c);
        assert_eq!(th[0], 0.0);
        assert!((th[1] - 0.5f64.sqrt()).abs() < 1e-15);
        let cl = classify(&c).unwrap();
        assert_eq!(cl.kplus, vec![0, 1]);
        assert!(cl.kminus.is_empty());
        assert_eq!(cl.ladder.delta0, DELTA_CEIL);
        let margin = (DELTA_CEIL - DELTA_FLOOR) / 9.0;
        assert!((cl.ladder.min_margin() - margin).abs() < 1e-15);
        assert!((cl.ladder.min_margin() - 6.15e-5).abs() < 1e-7);
        assert!((gamma(&c) - 0.09375).abs() < 1e-15);
    }

    #[test]
    fn stable_bubble_and_degenerate_ladder() {
        let c = BubbleConfig::new(vec![4.0, 1.0], vec![1.0, -1.0]).unwrap();
        let cl = classify(&c).unwrap();
        assert_eq!(cl.kplus, vec![0]);
        assert_eq!(cl.kminus, vec![1]);
        let c = BubbleConfig::new(vec![1.0, 0.999], vec![1.0, -1.0]).unwrap();
        let th = theta(&c);
        assert!(th[1] < -0.99);
        // Only the first bubble is unstable; its rate 1/2 keeps the ladder valid.
        assert!(classify(&c).is_ok());
    }

    #[test]
    fn self_similar_point_closes_interaction_exactly() {
        let c = BubbleConfig::new(vec![3.0, 2.0, 1.0], vec![1.0, -1.0, 1.0]).unwrap();
        let s = -500.0;
        let st = ParamState::self_similar(&c, s);
        let d = derive(&c, &st, L1).unwrap();
        let th = theta(&c);
        for k in 0..3 {
            let l: f64 = c.ells()[k];
            assert!((d.r[k] - d.r_closed[k]).abs() <= 1e-13 * (1.0 + d.r[k].abs()));
            let d_ref = -3.0 / 16.0 * L1 * l.powi(6) * th[k] / (s * s);
            assert!((d.d[k] - d_ref).abs() <= 1e-13 * d_ref.abs().max(1e-300));
            assert!((d.e[k] - l * (0.5 + th[k])).abs() < 1e-12);
            assert!(d.f[k].abs() < 1e-15);
            assert_eq!(d.z[k], 0.0);
        }
    }

    #[test]
    fn derive_rejects_small_s_and_collisions() {
        let c = two_bubble();
        let st = ParamState::self_similar(&c, -5.0);
        assert!(derive(&c, &st, L1).is_err());
        let mut st = ParamState::self_similar(&c, -100.0);
        st.y[1] = st.y[0] + 1.0;
        st.tau[0] = -1e-3;
        assert!(matches!(derive(&c, &st, L1), Err(Error::BubbleCollision { .. })));
    }

    #[test]
    fn predicted_energy_forms_agree() {
        let t = table();
        let me = predict_mass_energy(&two_bubble(), &t.norms);
        let expect = L1 * L1 / 16.0 * (3.0 + 2.0f64.sqrt());
        assert!((me.energy - expect).abs() < 1e-12);
        assert!((me.energy_abel - expect).abs() < 1e-12);
        assert!((me.mass - 2.0 * t.norms.l2sq_q).abs() < 1e-15);
    }

    #[test]
    fn state_round_trip() {
        let st = ParamState::self_similar(&two_bubble(), -50.0);
        let v = st.to_vec();
        assert_eq!(ParamState::from_slice(-50.0, &v), st);
        let b = st.bars(&two_bubble());
        assert!(b.mu_bar.iter().chain(&b.tau_bar).chain(&b.y_bar).all(|v| v.abs() < 1e-15));
    }

    fn field_setup(s: f64) -> (BubbleConfig, ParamState, Grid1D) {
        let c = two_bubble();
        let st = ParamState::self_similar(&c, s);
        let grid = Grid1D::new(2.6 * s, 0.3 * s.abs(), 40001).unwrap();
        (c, st, grid)
    }

    #[test]
    fn sign_flip_negates_field() {
        let t = table();
        let (c, mut st, grid) = field_setup(-400.0);
        st.a = vec![1e-3, -2e-3];
        st.mu[1] *= 1.01;
        let opts = FieldOptions::default();
        let f = build_field(&c, &st, &grid, &t, &opts).unwrap();
        let g = build_field(&c.flipped(), &st, &grid, &t, &opts).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn field_is_linear_in_energy_corrections() {
        let t = table();
        let (c, st, grid) = field_setup(-400.0);
        let opts = FieldOptions::default();
        let base = build_field(&c, &st, &grid, &t, &opts).unwrap();
        let mut one = st.clone();
        one.a[1] = 1e-3;
        let mut two = st.clone();
        two.a[1] = 2e-3;
        let f1 = build_field(&c, &one, &grid, &t, &opts).unwrap();
        let f2 = build_field(&c, &two, &grid, &t, &opts).unwrap();
        for i in 0..grid.len() {
            let lhs = f2.values[i] - base.values[i];
            let rhs = 2.0 * (f1.values[i] - base.values[i]);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn far_left_field_is_the_tail_sum() {
        let t = table();
        let (c, st, _) = field_setup(-400.0);
        let ans = Ansatz::new(&c, &st, &t, &FieldOptions::default()).unwrap();
        let y: f64 = -1500.0;
        let sum_tail: f64 = (0..2)
            .map(|k| -0.5 * L1 * c.ells()[k] * (-2.0 * st.tau[k]).sqrt() * (-y).powf(-1.5))
            .sum();
        let v = ans.value(y).value;
        assert!((v - sum_tail).abs() < 1e-6 * sum_tail.abs(), "{v} vs {sum_tail}");
    }

    #[test]
    fn field_mass_and_energy_track_prediction() {
        let t = table();
        let s = -2000.0;
        let (c, st, _) = field_setup(s);
        let grid = Grid1D::new(2.6 * s, 0.3 * s.abs(), 600001).unwrap();
        let f = build_field(&c, &st, &grid, &t, &FieldOptions::default()).unwrap();
        let me = predict_mass_energy(&c, &t.norms);
        assert!((f.mass() / me.mass - 1.0).abs() < 2e-4, "mass {}", f.mass());
        let e = rescaled_energy(&c, &t.norms, s);
        assert!((f.energy() / e - 1.0).abs() < 2e-3, "energy {} vs {e}", f.energy());
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let t = table();
        let (c, st, _) = field_setup(-400.0);
        let grid = Grid1D::new(-900.0, 100.0, 20001).unwrap();
        let err = build_field(&c, &st, &grid, &t, &FieldOptions::default()).unwrap_err();
        assert!(matches!(err, Error::GridTooNarrow { .. }));
    }

    #[test]
    fn taper_shape() {
        let w = taper_window(100, 0.1);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[99], 0.0);
        assert!(w[10..90].iter().all(|v| *v == 1.0));
        assert!(w[..10].windows(2).all(|p| p[0] < p[1]));
    }

    fn config_strategy() -> impl Strategy<Value = BubbleConfig> {
        (1usize..5, any::<u64>()).prop_map(|(k, bits)| {
            let mut ells = vec![];
            let mut l = 1.0 + (bits % 97) as f64 / 20.0;
            for i in 0..k {
                ells.push(l);
                l /= 1.2 + ((bits >> (8 * i)) % 50) as f64 / 25.0;
            }
            let signs = (0..k).map(|i| if (bits >> (40 + i)) & 1 == 0 { 1.0 } else { -1.0 }).collect();
            BubbleConfig::new(ells, signs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn energy_forms_agree_for_any_configuration(c in config_strategy()) {
            let norms = Norms { l2sq_q: 2.72, l1_q: L1 };
            let me = predict_mass_energy(&c, &norms);
            prop_assert!((me.energy - me.energy_abel).abs() <= 1e-12 * (1.0 + me.energy.abs()));
        }

        #[test]
        fn ladder_is_strictly_increasing(c in config_strategy()) {
            if let Ok(cl) = classify(&c) {
                let chain = cl.ladder.chain();
                prop_assert_eq!(chain.len(), 3 * c.k() + 4);
                prop_assert!(chain.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(cl.ladder.delta0 <= cl.delta_plus);
            }
        }

        #[test]
        fn theta_is_scale_invariant(c in config_strategy(), lam in 0.1f64..10.0) {
            let a = theta(&c);
            let b = theta(&c.scaled(lam).unwrap());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn self_similar_interaction_is_exact(c in config_strategy(), s in -5000.0f64..-50.0) {
            let st = ParamState::self_similar(&c, s);
            let d = derive(&c, &st, L1).unwrap();
            for k in 0..c.k() {
                prop_assert!((d.r[k] - d.r_closed[k]).abs() <= 1e-12 * (1.0 + d.r[k].abs()));
            }
        }

        #[test]
        fn smoothstep_is_monotone_and_bounded(a in -1.0f64..2.0, b in -1.0f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(smoothstep(lo) <= smoothstep(hi));
            prop_assert!((0.0..=1.0).contains(&smoothstep(a)));
        }
    }
}
