//! Uniform grids, composite Simpson quadrature and central finite differences.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Uniform grid on `[x_min, x_max]` with `n` nodes, spacing `(x_max - x_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    symmetric: bool,
}

impl Grid1D {
    /// Smallest admissible node count.
    pub const MIN_NODES: usize = 16;

    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGrid("need at least 16 nodes"));
        }
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("non-finite endpoint"));
        }
        if !(x_min < x_max) {
            return Err(Error::InvalidGrid("need x_min < x_max"));
        }
        Ok(Self { x_min, x_max, n, symmetric: x_min == -x_max })
    }

    /// Grid on `[-x_max, x_max]`, flagged symmetric.
    pub fn symmetric(x_max: f64, n: usize) -> Result<Self> {
        Self::new(-x_max, x_max, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Node `i`. The last node is `x_max` exactly; on a symmetric grid node
    /// `n - 1 - i` is the exact negative of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        let m = self.n - 1 - i;
        if m == 0 {
            self.x_max
        } else if self.symmetric && m == i {
            0.0
        } else if self.symmetric && m < i {
            -(self.x_min + m as f64 * self.h())
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Same interval with the spacing halved (`2n - 1` nodes).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }

    /// Mirror index: node `n - 1 - i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    pub fn simpson_weights(&self) -> Vec<f64> {
        simpson_weights(self.n, self.h())
    }
}

/// Composite Simpson weights for `n >= 4` equally spaced samples.
///
/// Odd `n` gives the classical 1-4-2-...-4-1 pattern. Even `n` closes the
/// last three intervals with the three-eighths rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 4, "simpson needs at least four samples");
    let mut w = alloc::vec![0.0; n];
    let m = if n % 2 == 1 { n } else { n - 3 };
    for i in 0..m {
        w[i] = if i == 0 || i == m - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
    }
    for wi in w.iter_mut().take(m) {
        *wi *= h / 3.0;
    }
    if m < n {
        let c = 3.0 * h / 8.0;
        w[m - 1] += c;
        w[m] += 3.0 * c;
        w[m + 1] += 3.0 * c;
        w[m + 2] += c;
    }
    w
}

/// Weighted sum `sum_i w_i f_i`.
pub fn quad(w: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), f.len());
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Weighted inner product `sum_i w_i f_i g_i`.
pub fn inner(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), f.len());
    w.iter().zip(f).zip(g).map(|((a, b), c)| a * b * c).sum()
}

const D1: [&[f64]; 4] = [
    &[-0.5, 0.0, 0.5],
    &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
    &[-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0],
    &[
        1.0 / 280.0,
        -4.0 / 105.0,
        0.2,
        -0.8,
        0.0,
        0.8,
        -0.2,
        4.0 / 105.0,
        -1.0 / 280.0,
    ],
];

const D2: [&[f64]; 4] = [
    &[1.0, -2.0, 1.0],
    &[-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
    &[1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0],
    &[
        -1.0 / 560.0,
        8.0 / 315.0,
        -0.2,
        1.6,
        -205.0 / 72.0,
        1.6,
        -0.2,
        8.0 / 315.0,
        -1.0 / 560.0,
    ],
];

const D3: [&[f64]; 4] = [
    &[],
    &[-0.5, 1.0, 0.0, -1.0, 0.5],
    &[0.125, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -0.125],
    &[
        -7.0 / 240.0,
        0.3,
        -169.0 / 120.0,
        61.0 / 30.0,
        0.0,
        -61.0 / 30.0,
        169.0 / 120.0,
        -0.3,
        7.0 / 240.0,
    ],
];

/// Central finite-difference derivative of order `m` in `{1, 2, 3}`.
///
/// Interior nodes use a radius-4 stencil (eighth order for `m <= 2`, sixth
/// for `m = 3`); the radius shrinks toward the ends. Nodes where no central
/// stencil fits are copied from their neighbour, so callers should only
/// trust interior values.
pub fn derivative(f: &[f64], h: f64, m: usize) -> Vec<f64> {
    assert!((1..=3).contains(&m), "derivative order must be 1, 2 or 3");
    let n = f.len();
    let table = match m {
        1 => &D1,
        2 => &D2,
        _ => &D3,
    };
    let min_radius = if m == 3 { 2 } else { 1 };
    let scale = 1.0 / libm::pow(h, m as f64);
    let mut out = alloc::vec![0.0; n];
    for i in 0..n {
        let r = i.min(n - 1 - i).min(4);
        if r < min_radius {
            continue;
        }
        let c = table[r - 1];
        let mut acc = 0.0;
        for (j, cj) in c.iter().enumerate() {
            acc += cj * f[i + j - r];
        }
        out[i] = acc * scale;
    }
    // Fill the unreachable edge nodes from the nearest computed value.
    for i in 0..min_radius.min(n) {
        out[i] = out[min_radius.min(n - 1)];
        let k = n - 1 - i;
        out[k] = out[n - 1 - min_radius.min(n - 1)];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [17usize, 18, 33, 40] {
            let g = Grid1D::new(-1.0, 2.0, n).unwrap();
            let w = g.simpson_weights();
            let f: Vec<f64> = g.nodes().iter().map(|x| x * x * x - 2.0 * x + 1.0).collect();
            let exact = (16.0 - 1.0) / 4.0 - (4.0 - 1.0) + 3.0;
            assert!((quad(&w, &f) - exact).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn derivative_orders_on_sine() {
        let g = Grid1D::new(-3.0, 3.0, 601).unwrap();
        let x = g.nodes();
        let f: Vec<f64> = x.iter().map(|&t| libm::sin(t)).collect();
        let d1 = derivative(&f, g.h(), 1);
        let d2 = derivative(&f, g.h(), 2);
        let d3 = derivative(&f, g.h(), 3);
        for i in 4..x.len() - 4 {
            assert!((d1[i] - libm::cos(x[i])).abs() < 1e-12);
            assert!((d2[i] + libm::sin(x[i])).abs() < 1e-10);
            assert!((d3[i] + libm::cos(x[i])).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid1D::new(-1.0, 1.0, 15).is_err());
        assert!(Grid1D::new(1.0, 0.5, 100).is_err());
        let g = Grid1D::symmetric(30.0, 6001).unwrap();
        assert!(g.is_symmetric());
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert_eq!(g.x(6000), 30.0);
        assert_eq!(g.refined().len(), 12001);
        assert!(!Grid1D::new(-2.0, 1.0, 100).unwrap().is_symmetric());
    }
}
