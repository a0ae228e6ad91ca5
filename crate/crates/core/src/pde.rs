//! Pseudo-spectral gKdV solver `u_t + (u_xx + u^5)_x = 0` on a periodic grid,
//! conservation diagnostics, the rescaled-frame residual of the ansatz, and
//! peak fitting.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ansatz::{build_field, BubbleConfig, FieldOptions, ParamState};
use crate::fft::Fft;
use crate::grid::Grid1D;
use crate::profiles::{ProfileTable, Q_PEAK};
use crate::{fm, Error, Result};

/// Samples of `u(t, .)` at `x_j = -L/2 + j L / n`, `j = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub t: f64,
    length: f64,
    values: Vec<f64>,
}

impl Field {
    pub fn new(t: f64, length: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid("periodic grid needs a power of two >= 16 nodes"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid("domain length must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidState("non-finite field"));
        }
        Ok(Self { t, length, values })
    }

    pub fn from_fn(t: f64, length: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / n as f64;
        Self::new(t, length, (0..n).map(|j| f(-0.5 * length + j as f64 * h)).collect())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^2` distance to `g` sampled on the same nodes.
    pub fn l2_distance(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.h();
        let s: f64 = (0..self.len())
            .map(|j| {
                let d = self.values[j] - g(self.x(j));
                d * d
            })
            .sum();
        fm::sqrt(h * s)
    }

    /// `x -> -x` about the grid center, used with `t -> -t` for backward runs.
    pub fn mirrored(&self) -> Self {
        let n = self.len();
        let values = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Self { t: -self.t, length: self.length, values }
    }

    /// Circular shift by `m` nodes to the right.
    pub fn rolled(&self, m: usize) -> Self {
        let n = self.len();
        let values = (0..n).map(|j| self.values[(j + n - m % n) % n]).collect();
        Self { values, ..self.clone() }
    }
}

/// Spectral derivative of order `m` of periodic samples over a domain of length `length`.
pub fn spectral_derivative(values: &[f64], length: f64, m: u32) -> Vec<f64> {
    let n = values.len();
    let fft = Fft::new(n);
    let k = fft.wavenumbers(length);
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft.forward(&mut buf);
    let im = Complex64::new(0.0, 1.0);
    for (j, b) in buf.iter_mut().enumerate() {
        if m % 2 == 1 && j == n / 2 {
            *b = Complex64::new(0.0, 0.0);
            continue;
        }
        *b *= (im * k[j]).powu(m);
    }
    fft.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Mass `int u^2` and energy `1/2 int u_x^2 - 1/6 int u^6` by the periodic trapezoid rule.
pub fn conserved(field: &Field) -> (f64, f64) {
    let h = field.h();
    let u = field.values();
    let ux = spectral_derivative(u, field.length(), 1);
    let mass = h * u.iter().map(|v| v * v).sum::<f64>();
    let grad = h * ux.iter().map(|v| v * v).sum::<f64>();
    let pot = h * u.iter().map(|v| (v * v) * (v * v) * (v * v)).sum::<f64>();
    (mass, 0.5 * grad - pot / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    IntegratingFactorRk4,
    #[default]
    EtdRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest time step; steps are shortened to land on output times.
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    /// Abort once `sup |u|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Reject steps above `cfl * 2.8 / (5 sup|u|^4 k_max)`; zero disables the check.
    pub cfl: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dt: 1e-4, scheme: Scheme::default(), dealias: true, blowup_factor: 1e3, cfl: 1.0 }
    }
}

impl SolverOptions {
    /// Options whose step is `fraction` of the stability limit for `field`.
    pub fn stable_for(field: &Field, fraction: f64) -> Self {
        let opts = Self::default();
        Self { dt: fraction * stability_limit(field, opts.dealias), ..opts }
    }
}

fn k_max(field: &Field, dealias: bool) -> f64 {
    let n = field.len();
    let m = if dealias { n / 3 } else { n / 2 };
    2.0 * core::f64::consts::PI * m as f64 / field.length()
}

/// Explicit stability bound on the step from the linearized nonlinear flux.
pub fn stability_limit(field: &Field, dealias: bool) -> f64 {
    let u = field.sup().max(1e-12);
    2.8 / (5.0 * u * u * u * u * k_max(field, dealias))
}

struct Stepper {
    fft: Fft,
    ik: Vec<Complex64>,
    mask: Vec<f64>,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
    etd: Option<EtdCoefficients>,
    scratch: Vec<Complex64>,
    sup: f64,
}

struct EtdCoefficients {
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

fn cexp(z: Complex64) -> Complex64 {
    let m = fm::exp(z.re);
    Complex64::new(m * fm::cos(z.im), m * fm::sin(z.im))
}

fn phase(theta: f64) -> Complex64 {
    Complex64::new(fm::cos(theta), fm::sin(theta))
}

impl EtdCoefficients {
    /// Contour-averaged phi functions for the diagonal operator `i k^3`.
    fn new(k: &[f64], dt: f64) -> Self {
        const M: usize = 32;
        let roots: Vec<Complex64> = (0..M)
            .map(|j| phase(core::f64::consts::PI * (j as f64 + 0.5) * 2.0 / M as f64))
            .collect();
        let n = k.len();
        let (mut q, mut f1, mut f2, mut f3) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &kj in k {
            let hl = Complex64::new(0.0, dt * kj * kj * kj);
            let (mut sq, mut s1, mut s2, mut s3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for &w in &roots {
                let r = hl + w;
                let er = cexp(r);
                let r3 = r * r * r;
                sq += (cexp(r * 0.5) - 1.0) / r;
                s1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
                s2 += (2.0 + r + er * (r - 2.0)) / r3;
                s3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
            }
            let c = dt / M as f64;
            q.push(sq * c);
            f1.push(s1 * c);
            f2.push(s2 * c);
            f3.push(s3 * c);
        }
        Self { q, f1, f2, f3 }
    }
}

impl Stepper {
    fn new(field: &Field, dt: f64, opts: &SolverOptions) -> Self {
        let n = field.len();
        let fft = Fft::new(n);
        let k = fft.wavenumbers(field.length());
        let cut = if opts.dealias { n / 3 } else { n / 2 };
        let mask = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { n - j };
                if j == n / 2 || m > cut { 0.0 } else { 1.0 }
            })
            .collect();
        let ik = k.iter().map(|kj| Complex64::new(0.0, *kj)).collect();
        let e_half = k.iter().map(|kj| phase(0.5 * dt * kj * kj * kj)).collect();
        let e_full = k.iter().map(|kj| phase(dt * kj * kj * kj)).collect();
        let etd = match opts.scheme {
            Scheme::EtdRk4 => Some(EtdCoefficients::new(&k, dt)),
            Scheme::IntegratingFactorRk4 => None,
        };
        Self { fft, ik, mask, e_half, e_full, etd, scratch: alloc::vec![Complex64::default(); n], sup: 0.0 }
    }

    /// `-i k mask FFT(u^5)` for `u = IFFT(v)`; records `sup |u|`.
    fn nonlinear(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        self.scratch.copy_from_slice(v);
        self.fft.inverse(&mut self.scratch);
        let mut sup: f64 = 0.0;
        for c in self.scratch.iter_mut() {
            let u = c.re;
            sup = sup.max(u.abs());
            let u2 = u * u;
            *c = Complex64::new(u2 * u2 * u, 0.0);
        }
        self.sup = sup;
        self.fft.forward(&mut self.scratch);
        for j in 0..v.len() {
            out[j] = -self.ik[j] * self.scratch[j] * self.mask[j];
        }
    }

    fn step(&mut self, v: &mut [Complex64], dt: f64) {
        let n = v.len();
        let zero = Complex64::default();
        let (mut na, mut nb, mut nc, mut nd) =
            (alloc::vec![zero; n], alloc::vec![zero; n], alloc::vec![zero; n], alloc::vec![zero; n]);
        let mut w = alloc::vec![zero; n];
        if let Some(etd) = self.etd.take() {
            self.nonlinear(v, &mut na);
            for j in 0..n {
                w[j] = self.e_half[j] * v[j] + etd.q[j] * na[j];
            }
            self.nonlinear(&w, &mut nb);
            let a = w.clone();
            for j in 0..n {
                w[j] = self.e_half[j] * v[j] + etd.q[j] * nb[j];
            }
            self.nonlinear(&w, &mut nc);
            for j in 0..n {
                w[j] = self.e_half[j] * a[j] + etd.q[j] * (2.0 * nc[j] - na[j]);
            }
            self.nonlinear(&w, &mut nd);
            for j in 0..n {
                v[j] = self.e_full[j] * v[j]
                    + na[j] * etd.f1[j]
                    + 2.0 * (nb[j] + nc[j]) * etd.f2[j]
                    + nd[j] * etd.f3[j];
            }
            self.etd = Some(etd);
            return;
        }
        self.nonlinear(v, &mut na);
        for j in 0..n {
            w[j] = self.e_half[j] * (v[j] + 0.5 * dt * na[j]);
        }
        self.nonlinear(&w, &mut nb);
        for j in 0..n {
            w[j] = self.e_half[j] * v[j] + 0.5 * dt * nb[j];
        }
        self.nonlinear(&w, &mut nc);
        for j in 0..n {
            w[j] = self.e_full[j] * v[j] + dt * self.e_half[j] * nc[j];
        }
        self.nonlinear(&w, &mut nd);
        for j in 0..n {
            v[j] = self.e_full[j] * v[j]
                + dt / 6.0 * (self.e_full[j] * na[j] + 2.0 * self.e_half[j] * (nb[j] + nc[j]) + nd[j]);
        }
    }
}

/// Evolve forward through the increasing `times` (all later than `field.t`)
/// and return the field at each of them.
pub fn evolve(field: &Field, times: &[f64], opts: &SolverOptions) -> Result<Vec<Field>> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidConfig("time step must be positive"));
    }
    let mut last = field.t;
    for &t in times {
        if !(t > last) {
            return Err(Error::InvalidConfig("output times must increase past the initial time"));
        }
        last = t;
    }
    if opts.cfl > 0.0 {
        let limit = opts.cfl * stability_limit(field, opts.dealias);
        if opts.dt > limit {
            return Err(Error::CflViolation { dt: opts.dt, limit });
        }
    }
    let n = field.len();
    let fft = Fft::new(n);
    let mut v: Vec<Complex64> = field.values().iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fft.forward(&mut v);
    let sup0 = field.sup().max(1e-300);
    let mut t = field.t;
    let mut out = Vec::with_capacity(times.len());
    let mut stepper: Option<(f64, Stepper)> = None;
    for &target in times {
        let span = target - t;
        let steps = fm::ceil(span / opts.dt - 1e-9).max(1.0) as usize;
        let dt = span / steps as f64;
        let rebuild = match &stepper {
            Some((h, _)) => (h - dt).abs() > 1e-15 * dt,
            None => true,
        };
        if rebuild {
            stepper = Some((dt, Stepper::new(field, dt, opts)));
        }
        let st = &mut stepper.as_mut().expect("stepper built above").1;
        for i in 0..steps {
            let saved = v.clone();
            st.step(&mut v, dt);
            let t_now = t + (i + 1) as f64 * dt;
            if !st.sup.is_finite() || st.sup > opts.blowup_factor * sup0 {
                let mut u = saved;
                fft.inverse(&mut u);
                let sup = u.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
                return Err(Error::BlowupDetected { t: t_now, sup: sup.max(st.sup) });
            }
        }
        t = target;
        let mut u = v.clone();
        fft.inverse(&mut u);
        out.push(Field::new(t, field.length(), u.iter().map(|c| c.re).collect())?);
    }
    Ok(out)
}

/// Physical time and position from rescaled ones: `t = 1/sqrt(-2s)`, `x = y t`.
pub fn to_physical(s: f64, y: f64) -> (f64, f64) {
    let t = 1.0 / fm::sqrt(-2.0 * s);
    (t, y * t)
}

/// Rescaled time and position: `s = -1/(2 t^2)`, `y = x / t`.
pub fn to_rescaled(t: f64, x: f64) -> (f64, f64) {
    (-0.5 / (t * t), x / t)
}

/// `u(t, x) = (-2s)^{1/4} u~(s, y)`.
pub fn amplitude_to_physical(s: f64, rescaled: f64) -> f64 {
    fm::powf(-2.0 * s, 0.25) * rescaled
}

pub fn amplitude_to_rescaled(s: f64, physical: f64) -> f64 {
    fm::powf(-2.0 * s, -0.25) * physical
}

/// Rescaled grid whose nodes are the periodic nodes `x_j` of a physical domain mapped to time `s`.
fn rescaled_grid(s: f64, length: f64, n: usize) -> Result<Grid1D> {
    let sigma = fm::sqrt(-2.0 * s);
    let h = length / n as f64;
    Grid1D::new(-0.5 * length * sigma, (-0.5 * length + (n - 1) as f64 * h) * sigma, n)
}

/// The ansatz at rescaled time `state.s` as a physical field on a periodic domain.
pub fn physical_ansatz(
    config: &BubbleConfig,
    state: &ParamState,
    profiles: &ProfileTable,
    length: f64,
    n: usize,
    opts: &FieldOptions,
) -> Result<Field> {
    let s = state.s;
    let grid = rescaled_grid(s, length, n)?;
    let sampled = build_field(config, state, &grid, profiles, opts)?;
    let scale = fm::powf(-2.0 * s, 0.25);
    Field::new(to_physical(s, 0.0).0, length, sampled.values.iter().map(|v| scale * v).collect())
}

/// Rescaled-frame window for [`residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualGrid {
    pub y_min: f64,
    pub y_max: f64,
    /// Power of two.
    pub n: usize,
}

/// Parts of the flow error of the ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `L^2` norm over the untapered region.
    pub norm: f64,
    pub values: Vec<f64>,
    pub nodes: Vec<f64>,
    pub untapered: (usize, usize),
}

/// `E = d_s V + (1/2s) Lambda V + d_y (V_yy + V^5)` at the middle of five
/// equally spaced states; `d_s` by the five-point stencil, `d_y` spectrally.
pub fn residual(
    config: &BubbleConfig,
    states: &[ParamState; 5],
    window: &ResidualGrid,
    profiles: &ProfileTable,
    opts: &FieldOptions,
) -> Result<Residual> {
    let n = window.n;
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid("residual grid needs a power of two >= 16 nodes"));
    }
    let s = states[2].s;
    let ds = states[3].s - s;
    for i in 0..4 {
        let step = states[i + 1].s - states[i].s;
        if !(step > 0.0) || (step - ds).abs() > 1e-9 * ds + 8.0 * f64::EPSILON * s.abs() {
            return Err(Error::InvalidState("residual states must be equally spaced in s"));
        }
    }
    let rel_step = ds / s.abs();
    if rel_step > 1e-3 {
        return Err(Error::TrajectoryTooSparse { rel_step });
    }
    let length = window.y_max - window.y_min;
    let h = length / n as f64;
    let grid = Grid1D::new(window.y_min, window.y_min + (n - 1) as f64 * h, n)?;
    let fields: Vec<_> = states
        .iter()
        .map(|st| build_field(config, st, &grid, profiles, opts))
        .collect::<Result<_>>()?;
    let v = &fields[2].values;
    let ds_v: Vec<f64> = (0..n)
        .map(|j| {
            let f = |i: usize| fields[i].values[j];
            (f(0) - 8.0 * f(1) + 8.0 * f(3) - f(4)) / (12.0 * ds)
        })
        .collect();
    let vy = spectral_derivative(v, length, 1);
    let vyy = spectral_derivative(v, length, 2);
    let flux: Vec<f64> = (0..n).map(|j| vyy[j] + v[j] * (v[j] * v[j]) * (v[j] * v[j])).collect();
    let dflux = spectral_derivative(&flux, length, 1);
    let nodes = grid.nodes();
    let values: Vec<f64> = (0..n)
        .map(|j| ds_v[j] + (0.5 * v[j] + nodes[j] * vy[j]) / (2.0 * s) + dflux[j])
        .collect();
    let (lo, hi) = fields[2].untapered;
    let norm = fm::sqrt(h * values[lo..hi].iter().map(|e| e * e).sum::<f64>());
    Ok(Residual { norm, values, nodes, untapered: (lo, hi) })
}

/// Signed height and refined position of one bubble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub height: f64,
    pub position: f64,
}

impl Peak {
    /// Width estimate `(Q(0) / height)^2`.
    pub fn lambda_hat(&self) -> f64 {
        let r = Q_PEAK / self.height;
        r * r
    }
}

/// The `k` tallest maxima of `|u|` at least three widths apart, ordered from right to left.
pub fn fit_bubbles(field: &Field, k: usize) -> Result<Vec<Peak>> {
    let u = field.values();
    let n = u.len();
    let h = field.h();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&j| {
            let (a, b, c) = (u[(j + n - 1) % n].abs(), u[j].abs(), u[(j + 1) % n].abs());
            b > 0.0 && b >= a && b > c
        })
        .collect();
    candidates.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()));
    let mut chosen: Vec<Peak> = Vec::new();
    for j in candidates {
        if chosen.len() == k {
            break;
        }
        let (fm1, f0, fp1) = (u[(j + n - 1) % n].abs(), u[j].abs(), u[(j + 1) % n].abs());
        let denom = fm1 - 2.0 * f0 + fp1;
        let delta = if denom < 0.0 { 0.5 * (fm1 - fp1) / denom } else { 0.0 };
        let height = (f0 - 0.25 * (fm1 - fp1) * delta) * u[j].signum();
        let peak = Peak { height, position: field.x(j) + delta * h };
        let width = peak.lambda_hat();
        let separated = chosen.iter().all(|c| {
            let d = (c.position - peak.position).abs();
            let d = d.min(field.length() - d);
            d >= 3.0 * width.max(c.lambda_hat())
        });
        if separated {
            chosen.push(peak);
        }
    }
    if chosen.len() < k {
        return Err(Error::BubbleCountMismatch { expected: k, found: chosen.len() });
    }
    chosen.sort_by(|a, b| b.position.total_cmp(&a.position));
    Ok(chosen)
}
