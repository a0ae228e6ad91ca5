//! Ground state `Q`, the linearized operator `L f = -f'' + f - 5 Q^4 f`, and
//! the profiles `P` and `R`.
//!
//! `P` solves `(L P)' = Lambda Q` with `P(+inf) = 0`, `<P, Q'> = 0`; `R` is
//! the even solution of `L R = 5 Q^4`. Both are computed with second-order
//! central differences. The default [`Scheme::Extrapolated`] repeats the solve
//! on the grid with half the spacing and combines the two (Richardson), which
//! removes the leading `h^2` error while keeping the same banded solver.

use alloc::vec::Vec;

use crate::grid::{self, Grid1D};
use crate::linalg::{self, SymTridiagonal, TriLu};
use crate::{fm, Error, Result};

/// `3^{1/4}`, the peak value of `Q`.
pub const Q_PEAK: f64 = 1.316_074_012_952_492_5;

/// Eigenvalues with modulus at most this are treated as the discrete kernel.
pub const KERNEL_TOL: f64 = 1e-4;

/// `Q(x) = (3 / cosh^2(2x))^{1/4}`, written to avoid overflow for large `|x|`.
pub fn eval_q(x: f64) -> f64 {
    let e = fm::exp(-x.abs());
    let e4 = e * e * e * e;
    Q_PEAK * core::f64::consts::SQRT_2 * e / fm::sqrt(1.0 + e4)
}

/// `Q'(x) = -Q(x) tanh(2x)`.
pub fn eval_q_prime(x: f64) -> f64 {
    -eval_q(x) * fm::tanh(2.0 * x)
}

/// `Lambda Q = Q/2 + x Q'`.
pub fn eval_lambda_q(x: f64) -> f64 {
    0.5 * eval_q(x) + x * eval_q_prime(x)
}

/// Quadrature norms of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `||Q||_{L^2}^2`
    pub l2sq_q: f64,
    /// `||Q||_{L^1}`
    pub l1_q: f64,
}

/// Discretization used for `P`, `R` and the spectrum of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Plain second-order central differences on the given grid.
    SecondOrder,
    /// Second-order solves on `h` and `h/2`, combined as `(4 u_{h/2} - u_h) / 3`.
    #[default]
    Extrapolated,
}

/// Sampled profiles on a symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub grid: Grid1D,
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
    pub lambda_q: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub norms: Norms,
}

/// Result of an interpolated profile lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub value: f64,
    /// `true` when `z` fell outside the tabulated interval.
    pub extrapolated: bool,
}

fn check_profile_grid(grid: &Grid1D) -> Result<()> {
    if !grid.is_symmetric() {
        return Err(Error::InvalidGrid("profiles need a symmetric grid"));
    }
    if grid.h() > 0.02 * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid("profiles need h <= 0.02"));
    }
    Ok(())
}

/// `D(x) = -int_x^{x_max} Lambda Q`, cellwise Simpson with exact midpoints.
fn p_source(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let h = grid.h();
    let mut d = alloc::vec![0.0; n];
    for i in (0..n - 1).rev() {
        let a = grid.x(i);
        let b = grid.x(i + 1);
        let cell = h / 6.0 * (eval_lambda_q(a) + 4.0 * eval_lambda_q(0.5 * (a + b)) + eval_lambda_q(b));
        d[i] = d[i + 1] - cell;
    }
    d
}

struct RawP {
    p: Vec<f64>,
    residual: f64,
    rhs_norm: f64,
}

fn solve_p_raw(grid: &Grid1D) -> Result<RawP> {
    let n = grid.len();
    let h = grid.h();
    let ih2 = 1.0 / (h * h);
    let x = grid.nodes();
    let mut lower = alloc::vec![-ih2; n - 1];
    let mut upper = alloc::vec![-ih2; n - 1];
    let mut diag: Vec<f64> = x
        .iter()
        .map(|&t| {
            let q = eval_q(t);
            2.0 * ih2 + 1.0 - 5.0 * q * q * q * q
        })
        .collect();
    // Neumann at x_min through a mirrored ghost node.
    upper[0] = -2.0 * ih2;
    // Dirichlet at x_max.
    diag[n - 1] = 1.0;
    lower[n - 2] = 0.0;
    let mut b = p_source(grid);
    b[n - 1] = 0.0;
    let mut c: Vec<f64> = x.iter().map(|&t| h * eval_q_prime(t)).collect();
    c[n - 1] = 0.0;
    let sol = linalg::solve_bordered(&lower, &diag, &upper, &c, &b)?;
    let rhs_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(RawP { p: sol.x, residual: sol.residual, rhs_norm })
}

fn solve_r_raw(grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.len();
    let h = grid.h();
    let ih2 = 1.0 / (h * h);
    let x = grid.nodes();
    let mut lower = alloc::vec![-ih2; n - 1];
    let mut upper = alloc::vec![-ih2; n - 1];
    let mut diag = alloc::vec![0.0; n];
    let mut b = alloc::vec![0.0; n];
    for i in 0..n {
        let q = eval_q(x[i]);
        let q4 = q * q * q * q;
        diag[i] = 2.0 * ih2 + 1.0 - 5.0 * q4;
        b[i] = 5.0 * q4;
    }
    diag[0] = 1.0;
    upper[0] = 0.0;
    b[0] = 0.0;
    diag[n - 1] = 1.0;
    lower[n - 2] = 0.0;
    b[n - 1] = 0.0;
    let lu = TriLu::factor(&lower, &diag, &upper)?;
    let mut r = lu.solve(&b);
    symmetrize(&mut r);
    Ok(r)
}

fn symmetrize(v: &mut [f64]) {
    let n = v.len();
    for i in 0..n / 2 {
        let m = 0.5 * (v[i] + v[n - 1 - i]);
        v[i] = m;
        v[n - 1 - i] = m;
    }
}

fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (4.0 * fine[2 * i] - c) / 3.0)
        .collect()
}

/// Build the profile table with the default [`Scheme::Extrapolated`].
pub fn build_profiles(grid: Grid1D) -> Result<ProfileTable> {
    build_profiles_with(grid, Scheme::default())
}

/// Build the profile table with an explicit discretization scheme.
pub fn build_profiles_with(grid: Grid1D, scheme: Scheme) -> Result<ProfileTable> {
    check_profile_grid(&grid)?;
    let x = grid.nodes();
    let q: Vec<f64> = x.iter().map(|&t| eval_q(t)).collect();
    let q_prime: Vec<f64> = x.iter().map(|&t| eval_q_prime(t)).collect();
    let lambda_q: Vec<f64> = x.iter().map(|&t| eval_lambda_q(t)).collect();
    let w = grid.simpson_weights();
    let norms = Norms {
        l2sq_q: grid::inner(&w, &q, &q),
        l1_q: grid::quad(&w, &q),
    };

    let coarse = solve_p_raw(&grid)?;
    if !(coarse.residual <= 1e-6 * coarse.rhs_norm) {
        return Err(Error::SingularSystem { residual: coarse.residual, rhs_norm: coarse.rhs_norm });
    }
    let (mut p, r) = match scheme {
        Scheme::SecondOrder => (coarse.p, solve_r_raw(&grid)?),
        Scheme::Extrapolated => {
            let fine_grid = grid.refined();
            let fine = solve_p_raw(&fine_grid)?;
            if !(fine.residual <= 1e-6 * fine.rhs_norm) {
                return Err(Error::SingularSystem { residual: fine.residual, rhs_norm: fine.rhs_norm });
            }
            let mut r = richardson(&solve_r_raw(&grid)?, &solve_r_raw(&fine_grid)?);
            symmetrize(&mut r);
            (richardson(&coarse.p, &fine.p), r)
        }
    };
    // Remove the residual kernel component under the table's own quadrature.
    let coef = grid::inner(&w, &p, &q_prime) / grid::inner(&w, &q_prime, &q_prime);
    for (pi, qp) in p.iter_mut().zip(&q_prime) {
        *pi -= coef * qp;
    }

    let plateau_error = (p[0] - 0.5 * norms.l1_q).abs();
    if !(plateau_error <= 1e-3) {
        return Err(Error::DomainTooSmall { plateau_error });
    }
    Ok(ProfileTable { grid, q, q_prime, lambda_q, p, r, norms })
}

impl ProfileTable {
    /// Assemble a table from stored arrays (cache loading).
    pub fn from_parts(
        grid: Grid1D,
        q: Vec<f64>,
        q_prime: Vec<f64>,
        lambda_q: Vec<f64>,
        p: Vec<f64>,
        r: Vec<f64>,
        norms: Norms,
    ) -> Result<Self> {
        let n = grid.len();
        if [q.len(), q_prime.len(), lambda_q.len(), p.len(), r.len()].iter().any(|&l| l != n) {
            return Err(Error::InvalidGrid("profile array length differs from grid"));
        }
        Ok(Self { grid, q, q_prime, lambda_q, p, r, norms })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.grid.simpson_weights()
    }

    /// Simpson inner product of two sampled functions.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        grid::inner(&self.weights(), f, g)
    }

    /// Interpolated `P(z)`; left of the table it returns the plateau value
    /// `p[0]`, right of it zero.
    pub fn lookup_p(&self, z: f64) -> Lookup {
        if z < self.grid.x_min() {
            Lookup { value: self.p[0], extrapolated: true }
        } else if z > self.grid.x_max() {
            Lookup { value: 0.0, extrapolated: true }
        } else {
            Lookup { value: self.interp(&self.p, z), extrapolated: false }
        }
    }

    /// Interpolated `R(z)`, zero outside the table.
    pub fn lookup_r(&self, z: f64) -> Lookup {
        if z < self.grid.x_min() || z > self.grid.x_max() {
            Lookup { value: 0.0, extrapolated: true }
        } else {
            Lookup { value: self.interp(&self.r, z), extrapolated: false }
        }
    }

    /// Six-point Lagrange interpolation of sampled values at `z`.
    pub fn interp(&self, values: &[f64], z: f64) -> f64 {
        let n = self.grid.len();
        let h = self.grid.h();
        let t = (z - self.grid.x_min()) / h;
        let base = (fm::floor(t) as isize - 2).clamp(0, n as isize - 6) as usize;
        let u = t - base as f64;
        let mut acc = 0.0;
        for j in 0..6 {
            let mut l = 1.0;
            for m in 0..6 {
                if m != j {
                    l *= (u - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += l * values[base + j];
        }
        acc
    }

    /// `max |Q'' + Q^5 - Q|` over interior nodes, `Q''` by finite differences.
    pub fn ground_state_residual(&self) -> f64 {
        let d2 = grid::derivative(&self.q, self.grid.h(), 2);
        interior_max(&self.q, 4, |i| {
            let q = self.q[i];
            d2[i] + q * q * q * q * q - q
        })
    }

    /// `max |L(Lambda Q) + 2 Q|` over interior nodes.
    pub fn scaling_residual(&self) -> f64 {
        let lq = &self.lambda_q;
        let d2 = grid::derivative(lq, self.grid.h(), 2);
        interior_max(lq, 4, |i| {
            let q = self.q[i];
            -d2[i] + lq[i] - 5.0 * q * q * q * q * lq[i] + 2.0 * q
        })
    }

    /// `max |(L P)' - Lambda Q|` over interior nodes.
    pub fn p_equation_residual(&self) -> f64 {
        let h = self.grid.h();
        let d2 = grid::derivative(&self.p, h, 2);
        let lp: Vec<f64> = (0..self.p.len())
            .map(|i| {
                let q = self.q[i];
                -d2[i] + self.p[i] - 5.0 * q * q * q * q * self.p[i]
            })
            .collect();
        let dlp = grid::derivative(&lp, h, 1);
        interior_max(&lp, 8, |i| dlp[i] - self.lambda_q[i])
    }

    /// `max |L R - 5 Q^4|` over interior nodes.
    pub fn r_equation_residual(&self) -> f64 {
        let d2 = grid::derivative(&self.r, self.grid.h(), 2);
        interior_max(&self.r, 4, |i| {
            let q4 = self.q[i] * self.q[i] * self.q[i] * self.q[i];
            -d2[i] + self.r[i] - 5.0 * q4 * self.r[i] - 5.0 * q4
        })
    }

    /// `E(Q) = 1/2 int Q'^2 - 1/6 int Q^6`.
    pub fn ground_state_energy(&self) -> f64 {
        let w = self.weights();
        let q6: Vec<f64> = self.q.iter().map(|q| q * q * q * q * q * q).collect();
        0.5 * grid::inner(&w, &self.q_prime, &self.q_prime) - grid::quad(&w, &q6) / 6.0
    }

    /// `|<P, Q'>| / (||P|| ||Q'||)`.
    pub fn kernel_defect(&self) -> f64 {
        let w = self.weights();
        let pq = grid::inner(&w, &self.p, &self.q_prime);
        let pp = grid::inner(&w, &self.p, &self.p);
        let qq = grid::inner(&w, &self.q_prime, &self.q_prime);
        pq.abs() / fm::sqrt(pp * qq)
    }

    /// `(|P(x_max)|, |P(x_min) - ||Q||_{L^1} / 2|)`.
    pub fn plateau_errors(&self) -> (f64, f64) {
        let n = self.p.len();
        (self.p[n - 1].abs(), (self.p[0] - 0.5 * self.norms.l1_q).abs())
    }

    /// `max_i |v_i - v_{n-1-i}|`.
    pub fn mirror_defect(values: &[f64]) -> f64 {
        let n = values.len();
        (0..n / 2).fold(0.0f64, |m, i| m.max((values[i] - values[n - 1 - i]).abs()))
    }
}

fn interior_max<F: Fn(usize) -> f64>(v: &[f64], margin: usize, f: F) -> f64 {
    (margin..v.len() - margin).fold(0.0f64, |m, i| m.max(f(i).abs()))
}

/// One identity of the profile report.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub measured: f64,
    pub target: f64,
    /// `|measured - target|` divided by the normalization of the identity.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Exact identities satisfied by `Q`, `P` and `R`, as measured on a table.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, measured: f64, target: f64, scale: f64, tolerance: f64) -> IdentityCheck {
    let error = (measured - target).abs() / scale;
    IdentityCheck { name, measured, target, error, tolerance, pass: error <= tolerance }
}

/// Evaluate the profile identities on a table.
///
/// * `p_q`: `<P,Q> / ||Q||_1^2 = 1/16`, relative tolerance `1e-5`.
/// * `q_r`: `<Q,R> / ||Q||_1 = -3/4`, relative tolerance `1e-5`.
/// * `lambda_p`: `8 (<Lambda P, Q> - 10 <Q^3 P^2, Q'>) / ||Q||_1^2 = 1`, tolerance `1e-4`.
/// * `lambda_r`: `<Lambda R, Q> - 20 <Q^3 P R, Q'> - 20 <P Q^3, Q'> = 0`, absolute
///   tolerance `1e-4 ||Q||_1^2`.
/// * `parity`: `<Q^3 R^2, Q'> = 0` to quadrature round-off.
pub fn check_identities(table: &ProfileTable) -> IdentityReport {
    let h = table.grid.h();
    let x = table.grid.nodes();
    let w = table.weights();
    let l1 = table.norms.l1_q;
    let l1sq = l1 * l1;
    let dp = grid::derivative(&table.p, h, 1);
    let dr = grid::derivative(&table.r, h, 1);
    let n = x.len();
    let mut lam_p = alloc::vec![0.0; n];
    let mut lam_r = alloc::vec![0.0; n];
    let mut q3p2 = alloc::vec![0.0; n];
    let mut q3pr = alloc::vec![0.0; n];
    let mut pq3 = alloc::vec![0.0; n];
    let mut q3r2 = alloc::vec![0.0; n];
    for i in 0..n {
        let q = table.q[i];
        let q3 = q * q * q;
        let (p, r) = (table.p[i], table.r[i]);
        lam_p[i] = 0.5 * p + x[i] * dp[i];
        lam_r[i] = 0.5 * r + x[i] * dr[i];
        q3p2[i] = q3 * p * p;
        q3pr[i] = q3 * p * r;
        pq3[i] = p * q3;
        q3r2[i] = q3 * r * r;
    }
    let qp = &table.q_prime;
    let id_p = grid::inner(&w, &lam_p, &table.q) - 10.0 * grid::inner(&w, &q3p2, qp);
    let id_r = grid::inner(&w, &lam_r, &table.q)
        - 20.0 * grid::inner(&w, &q3pr, qp)
        - 20.0 * grid::inner(&w, &pq3, qp);
    let parity = grid::inner(&w, &q3r2, qp);
    IdentityReport {
        checks: alloc::vec![
            check("p_q", grid::inner(&w, &table.p, &table.q) / l1sq, 0.0625, 0.0625, 1e-5),
            check("q_r", grid::inner(&w, &table.q, &table.r) / l1, -0.75, 0.75, 1e-5),
            check("lambda_p", 8.0 * id_p / l1sq, 1.0, 1.0, 1e-4),
            check("lambda_r", id_r, 0.0, l1sq, 1e-4),
            check("parity", parity, 0.0, l1sq, 1e-12),
        ],
    }
}

/// Eigenvalue of the discretized `L` with its grid eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Samples on every grid node (zero at the Dirichlet ends), normalized so
    /// that `h * sum v_i^2 = 1`.
    pub vector: Vec<f64>,
}

fn l_matrix(grid: &Grid1D) -> SymTridiagonal {
    let n = grid.len();
    let h = grid.h();
    let ih2 = 1.0 / (h * h);
    let diag = (1..n - 1)
        .map(|i| {
            let q = eval_q(grid.x(i));
            2.0 * ih2 + 1.0 - 5.0 * q * q * q * q
        })
        .collect();
    SymTridiagonal::new(diag, alloc::vec![-ih2; n - 3])
}

/// The `n_eigs` smallest eigenpairs of `L` with Dirichlet ends, default scheme.
pub fn spectrum_l(grid: Grid1D, n_eigs: usize) -> Result<Vec<Eigenpair>> {
    spectrum_l_with(grid, n_eigs, Scheme::default())
}

/// The `n_eigs` smallest eigenpairs of `L` on the symmetric tridiagonal
/// discretization; with [`Scheme::Extrapolated`] the eigenvalues are
/// extrapolated from `h` and `h/2`, eigenvectors come from the given grid.
pub fn spectrum_l_with(grid: Grid1D, n_eigs: usize, scheme: Scheme) -> Result<Vec<Eigenpair>> {
    check_profile_grid(&grid)?;
    let t = l_matrix(&grid);
    if n_eigs == 0 || n_eigs > t.len() {
        return Err(Error::ConvergenceFailure("requested eigenpair count out of range"));
    }
    let fine = match scheme {
        Scheme::SecondOrder => None,
        Scheme::Extrapolated => Some(l_matrix(&grid.refined())),
    };
    let h = grid.h();
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(n_eigs);
    let mut out = Vec::with_capacity(n_eigs);
    for k in 0..n_eigs {
        let lam = t.eigenvalue(k)?;
        let v = t.eigenvector(lam, &found)?;
        let value = match &fine {
            None => lam,
            Some(f) => (4.0 * f.eigenvalue(k)? - lam) / 3.0,
        };
        found.push(v.clone());
        let peak = v.iter().fold(0.0f64, |m, a| if a.abs() > m.abs() { *a } else { m });
        let sign = if peak < 0.0 { -1.0 } else { 1.0 };
        let scale = sign / fm::sqrt(h);
        let mut vector = Vec::with_capacity(grid.len());
        vector.push(0.0);
        vector.extend(v.iter().map(|a| a * scale));
        vector.push(0.0);
        out.push(Eigenpair { value, vector });
    }
    Ok(out)
}

/// Structural reading of a computed low spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    /// Eigenvalues below `-KERNEL_TOL`.
    pub negative_count: usize,
    /// Index of the eigenpair identified as the kernel, if any.
    pub kernel_index: Option<usize>,
    pub kernel_value: f64,
    /// `|<v, Q'>| / (||v|| ||Q'||)` for the kernel candidate.
    pub kernel_overlap: f64,
    /// Smallest eigenvalue above `KERNEL_TOL`.
    pub first_positive: f64,
}

/// Classify eigenpairs into negative, kernel and positive parts.
pub fn summarize_spectrum(grid: &Grid1D, pairs: &[Eigenpair]) -> SpectrumSummary {
    let x = grid.nodes();
    let qp: Vec<f64> = x.iter().map(|&t| eval_q_prime(t)).collect();
    let qq: f64 = qp.iter().map(|a| a * a).sum();
    let mut summary = SpectrumSummary {
        negative_count: 0,
        kernel_index: None,
        kernel_value: f64::NAN,
        kernel_overlap: 0.0,
        first_positive: f64::INFINITY,
    };
    for (i, e) in pairs.iter().enumerate() {
        if e.value < -KERNEL_TOL {
            summary.negative_count += 1;
        } else if e.value > KERNEL_TOL {
            summary.first_positive = summary.first_positive.min(e.value);
        } else {
            let vv: f64 = e.vector.iter().map(|a| a * a).sum();
            let vq: f64 = e.vector.iter().zip(&qp).map(|(a, b)| a * b).sum();
            let overlap = vq.abs() / fm::sqrt(vv * qq);
            if overlap > summary.kernel_overlap {
                summary.kernel_index = Some(i);
                summary.kernel_value = e.value;
                summary.kernel_overlap = overlap;
            }
        }
    }
    summary
}
