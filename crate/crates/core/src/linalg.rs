//! Tridiagonal factorization with partial pivoting and symmetric tridiagonal
//! eigenpairs (Sturm bisection plus inverse iteration).

use alloc::vec::Vec;

use crate::{fm, Error, Result};

/// LU factors of a general tridiagonal matrix, row-interchange pivoting.
#[derive(Debug, Clone)]
pub struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    /// Factor the matrix with sub-diagonal `lower`, diagonal `diag`, super-diagonal `upper`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n < 2 || lower.len() != n - 1 || upper.len() != n - 1 {
            return Err(Error::InvalidGrid("tridiagonal band lengths mismatch"));
        }
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = alloc::vec![0.0; n.saturating_sub(2)];
        let mut swapped = alloc::vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::SingularSystem { residual: f64::INFINITY, rhs_norm: 0.0 });
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::SingularSystem { residual: f64::INFINITY, rhs_norm: 0.0 });
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Solve in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// `y = T x` for a tridiagonal `T`.
pub fn tri_matvec(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += upper[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Solution of the bordered system `[T c; c^T 0] [x; m] = [b; 0]`.
#[derive(Debug, Clone)]
pub struct BorderedSolution {
    pub x: Vec<f64>,
    pub multiplier: f64,
    /// Max-norm residual of the full bordered system.
    pub residual: f64,
}

/// Solve `T x + m c = b` subject to `c . x = 0`.
pub fn solve_bordered(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    c: &[f64],
    b: &[f64],
) -> Result<BorderedSolution> {
    let lu = TriLu::factor(lower, diag, upper)?;
    let u = lu.solve(b);
    let v = lu.solve(c);
    let cu: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
    let cv: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
    if cv == 0.0 || !cv.is_finite() {
        return Err(Error::SingularSystem { residual: f64::INFINITY, rhs_norm: 0.0 });
    }
    let m = cu / cv;
    let x: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - m * b).collect();
    let tx = tri_matvec(lower, diag, upper, &x);
    let mut residual = 0.0f64;
    for i in 0..x.len() {
        residual = residual.max((tx[i] + m * c[i] - b[i]).abs());
    }
    let cx: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    residual = residual.max(cx.abs());
    Ok(BorderedSolution { x, multiplier: m, residual })
}

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (zero based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::ConvergenceFailure("eigenvalue index out of range"));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::ConvergenceFailure("bisection did not close"))
    }

    /// Eigenvector for the (approximate) eigenvalue `lambda`, orthogonalized
    /// against `against`; returned with unit Euclidean norm.
    pub fn eigenvector(&self, lambda: f64, against: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        let shift = lambda + 64.0 * f64::EPSILON * scale;
        let diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let lu = TriLu::factor(&self.off, &diag, &self.off)?;
        // Deterministic, non-degenerate start vector.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * fm::sin(1.0 + 0.37 * i as f64))
            .collect();
        for _ in 0..8 {
            for w in against {
                project_out(&mut v, w);
            }
            normalize(&mut v);
            lu.solve_in_place(&mut v);
            for w in against {
                project_out(&mut v, w);
            }
            normalize(&mut v);
            let tv = tri_matvec(&self.off, &self.diag, &self.off, &v);
            let res: f64 = tv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                .sum();
            if fm::sqrt(res) <= 1e-9 * scale {
                return Ok(v);
            }
        }
        Err(Error::ConvergenceFailure("inverse iteration stalled"))
    }
}

fn project_out(v: &mut [f64], w: &[f64]) {
    let c: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    for (a, b) in v.iter_mut().zip(w) {
        *a -= c * b;
    }
}

fn normalize(v: &mut [f64]) {
    let n = fm::sqrt(v.iter().map(|a| a * a).sum());
    for a in v.iter_mut() {
        *a /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_matches_dense_solution() {
        // Indefinite matrix that needs pivoting: zero leading diagonal.
        let lower = [2.0, 1.0, -1.0, 0.5];
        let diag = [0.0, -3.0, 1.0, 4.0, -2.0];
        let upper = [1.0, 4.0, 2.0, -1.0];
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.5];
        let b = tri_matvec(&lower, &diag, &upper, &x_true);
        let lu = TriLu::factor(&lower, &diag, &upper).unwrap();
        let x = lu.solve(&b);
        for (a, e) in x.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn bordered_constraint_holds() {
        let n = 50;
        let lower = alloc::vec![-1.0; n - 1];
        let upper = alloc::vec![-1.0; n - 1];
        let diag = alloc::vec![2.5; n];
        let c: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.01).collect();
        let sol = solve_bordered(&lower, &diag, &upper, &c, &b).unwrap();
        let cx: f64 = c.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
        assert!(cx.abs() < 1e-12);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn laplacian_spectrum() {
        // Eigenvalues of tridiag(-1, 2, -1): 2 - 2 cos(k pi / (n + 1)).
        let n = 40;
        let t = SymTridiagonal::new(alloc::vec![2.0; n], alloc::vec![-1.0; n - 1]);
        let pi = core::f64::consts::PI;
        let mut found: Vec<Vec<f64>> = Vec::new();
        for k in 0..4 {
            let exact = 2.0 - 2.0 * libm::cos((k + 1) as f64 * pi / (n + 1) as f64);
            let lam = t.eigenvalue(k).unwrap();
            assert!((lam - exact).abs() < 1e-13);
            let v = t.eigenvector(lam, &found).unwrap();
            let norm: f64 = v.iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            found.push(v);
        }
    }
}
