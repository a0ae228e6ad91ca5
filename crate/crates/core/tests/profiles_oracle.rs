use approx::assert_relative_eq;
use gkdv_core::grid::Grid1D;
use gkdv_core::profiles::{build_profiles, eval_q, spectrum_l_with, ProfileTable, Scheme};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Dense second-order `L` on the interior nodes, Dirichlet ends.
fn dense_l(grid: &Grid1D) -> DMatrix<f64> {
    let n = grid.len() - 2;
    let h = grid.h();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let q = eval_q(grid.x(i + 1));
        m[(i, i)] = 2.0 / (h * h) + 1.0 - 5.0 * q.powi(4);
        if i + 1 < n {
            m[(i, i + 1)] = -1.0 / (h * h);
            m[(i + 1, i)] = -1.0 / (h * h);
        }
    }
    m
}

#[test]
fn tridiagonal_eigenvalues_match_dense_solver() {
    let grid = Grid1D::symmetric(20.0, 2001).unwrap();
    let mut dense: Vec<f64> = dense_l(&grid).symmetric_eigenvalues().iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    let pairs = spectrum_l_with(grid, 5, Scheme::SecondOrder).unwrap();
    for (p, d) in pairs.iter().zip(&dense) {
        assert_relative_eq!(p.value, *d, epsilon = 1e-9, max_relative = 1e-9);
    }
}

#[test]
fn dense_eigenvectors_agree_up_to_sign() {
    let grid = Grid1D::symmetric(12.0, 1201).unwrap();
    let eig = dense_l(&grid).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let pairs = spectrum_l_with(grid, 2, Scheme::SecondOrder).unwrap();
    for (k, p) in pairs.iter().enumerate() {
        let col = eig.eigenvectors.column(order[k]);
        let inner: f64 = p.vector[1..p.vector.len() - 1].iter().zip(col.iter()).map(|(a, b)| a * b).sum();
        let norm: f64 = p.vector.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert_relative_eq!(inner.abs() / norm, 1.0, epsilon = 1e-8);
    }
}

fn table(x_max: f64, n: usize) -> ProfileTable {
    build_profiles(Grid1D::symmetric(x_max, n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn profiles_respect_reflection(x_max in 24.0f64..32.0, half in 1500usize..3000) {
        let t = table(x_max, 2 * half + 1);
        prop_assert_eq!(ProfileTable::mirror_defect(&t.q), 0.0);
        prop_assert_eq!(ProfileTable::mirror_defect(&t.r), 0.0);
        let n = t.grid.len();
        for i in (0..n).step_by(97) {
            prop_assert_eq!(t.q[i], t.q[n - 1 - i]);
            prop_assert_eq!(t.r[i], t.r[n - 1 - i]);
        }
    }

    #[test]
    fn profile_build_is_deterministic(x_max in 24.0f64..32.0, half in 1500usize..3000) {
        let a = table(x_max, 2 * half + 1);
        let b = table(x_max, 2 * half + 1);
        prop_assert_eq!(a, b);
    }
}
