use mgstab::linalg::{
    char_poly, companion_roots, eig_qr, expm_scaled, hessenberg, max_matched_error,
    nullspace_basis, qr_decompose, solve_linear, CScalar, Mat,
};
use proptest::prelude::*;

fn frozen() -> Mat {
    Mat::from_rows(&[
        &[0.3, -0.7, 0.1, 0.9, -0.2],
        &[-0.9, 0.2, 0.5, 0.4, 0.6],
        &[0.4, 0.8, -0.6, -0.1, 0.3],
        &[0.05, -0.3, 0.9, 0.7, -0.8],
        &[0.6, 0.1, -0.4, 0.2, -0.5],
    ])
}

#[test]
fn frozen_matrix_matches_reference_eigenvalues() {
    // Reference values from LAPACK dgeev.
    let expected = [
        CScalar::new(0.8539270887841366, 0.09688216321136872),
        CScalar::new(0.8539270887841366, -0.09688216321136872),
        CScalar::new(-0.22518655928922435, 0.5102896303624626),
        CScalar::new(-0.22518655928922435, -0.5102896303624626),
        CScalar::new(-1.1574810589898235, 0.0),
    ];
    let got = eig_qr(&frozen()).unwrap();
    assert!(max_matched_error(&expected, &got) < 1e-13);
}

#[test]
fn frozen_matrix_characteristic_polynomial() {
    let expected = [1.0, -0.1, -1.175, 0.126, -0.0002, 0.26596];
    let (p, _) = char_poly(&frozen()).unwrap();
    for (a, b) in p.coeffs().iter().zip(expected) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}

#[test]
fn frozen_matrix_exponential_entries() {
    // Reference values from a scaling-and-squaring Padé(13) implementation.
    let e = expm_scaled(&frozen(), 1.0).unwrap();
    assert!((e[(0, 0)] - 1.716891724035717).abs() < 1e-13);
    assert!((e[(2, 4)] - 0.2920256295758048).abs() < 1e-13);
}

#[test]
fn scalar_exponential() {
    let e = expm_scaled(&Mat::from_rows(&[&[-1.0]]), 1.0).unwrap();
    assert!((e[(0, 0)] - 0.3678794411714423).abs() < 1e-12);
}

#[test]
fn double_integrator_admissible_subspace() {
    // B = [0, 1]ᵀ gives U₁ = ±e₁, so U₁ᵀ(A − λI) = ±[−λ, 1].
    let a = Mat::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let b = Mat::column(&[0.0, 1.0]);
    let (q, _) = qr_decompose(&b);
    let u1 = q.block(0, 1, 2, 1);
    let m = u1.transpose().matmul(&a.shifted(-1.0));
    let basis = nullspace_basis(&m, 1e-12);
    assert_eq!(basis.cols(), 1);
    assert!(m.matmul(&basis).max_abs() <= 1e-10);
}

fn square(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |d| Mat::new(n, n, d).unwrap())
}

fn sized_square(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max).prop_flat_map(square)
}

fn orth_err(q: &Mat) -> f64 {
    q.transpose().matmul(q).sub(&Mat::identity(q.cols())).norm_inf()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qr_reconstructs_and_is_orthogonal(
        (m, n) in (1usize..7).prop_flat_map(|n| (n..9, Just(n))),
        seed in prop::collection::vec(-1.0f64..1.0, 64),
    ) {
        let a = Mat::new(m, n, seed[..m * n].to_vec()).unwrap();
        let (q, r) = qr_decompose(&a);
        prop_assert!(q.matmul(&r).sub(&a).norm_inf() <= 1e-12 * a.norm_inf().max(1e-300));
        prop_assert!(orth_err(&q) <= 1e-12);
        for i in 0..m {
            for j in 0..i.min(n) {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn hessenberg_is_orthogonal_similarity(a in sized_square(9)) {
        let (h, q) = hessenberg(&a);
        let n = a.rows();
        prop_assert!(orth_err(&q) <= 1e-12);
        prop_assert!(q.transpose().matmul(&a).matmul(&q).sub(&h).norm_inf() <= 1e-12 * a.norm_inf());
        for i in 0..n {
            for j in 0..n {
                if i > j + 1 {
                    prop_assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
        let ea = eig_qr(&a).unwrap();
        let eh = eig_qr(&h).unwrap();
        prop_assert!(max_matched_error(&ea, &eh) <= 1e-8);
    }

    #[test]
    fn trace_and_determinant(a in sized_square(8)) {
        let n = a.rows();
        let e = eig_qr(&a).unwrap();
        let sum: CScalar = e.iter().sum();
        prop_assert!((sum.re - a.trace()).abs() <= 1e-8 * n as f64 * a.norm_inf());
        prop_assert!(sum.im.abs() <= 1e-12);
        let prod: CScalar = e.iter().product();
        let (p, _) = char_poly(&a).unwrap();
        let c = p.coeffs();
        let det = if n % 2 == 0 { c[n] / c[0] } else { -c[n] / c[0] };
        prop_assert!((prod.re - det).abs() <= 1e-6 * det.abs().max(1e-3), "{prod} vs {det}");
    }

    #[test]
    fn complex_eigenvalues_are_exact_conjugates(a in sized_square(8)) {
        let e = eig_qr(&a).unwrap();
        for z in e.iter().filter(|z| z.im != 0.0) {
            let partner = e.iter().any(|w| w.re.to_bits() == z.re.to_bits() && w.im.to_bits() == (-z.im).to_bits());
            prop_assert!(partner, "no conjugate for {z}");
        }
    }

    #[test]
    fn eig_agrees_with_companion_roots(a in sized_square(8)) {
        let e = eig_qr(&a).unwrap();
        let (p, _) = char_poly(&a).unwrap();
        let r = companion_roots(&p).unwrap();
        prop_assert!(max_matched_error(&e, &r) <= 1e-7);
    }

    #[test]
    fn char_poly_vanishes_at_eigenvalues(a in square(4)) {
        let (p, _) = char_poly(&a).unwrap();
        let scale = a.norm_inf().powi(4).max(1.0);
        for z in eig_qr(&a).unwrap() {
            prop_assert!(p.eval_complex(z).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn exponential_semigroup(a in sized_square(6), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let norm = a.norm_inf();
        prop_assume!(norm * (s + t) <= 10.0);
        let lhs = expm_scaled(&a, s + t).unwrap();
        let rhs = expm_scaled(&a, s).unwrap().matmul(&expm_scaled(&a, t).unwrap());
        prop_assert!(lhs.sub(&rhs).norm_inf() <= 1e-9 * lhs.norm_inf().max(1.0));
    }

    #[test]
    fn solve_residual_is_small(a in sized_square(8), b in prop::collection::vec(-1.0f64..1.0, 8)) {
        let n = a.rows();
        let rhs = Mat::column(&b[..n]);
        if let Ok(x) = solve_linear(&a, &rhs) {
            let res = a.matmul(&x).sub(&rhs).norm_inf();
            prop_assert!(res <= 1e-10 * a.norm_inf() * x.norm_inf().max(1.0));
        }
    }

    #[test]
    fn nullspace_is_orthonormal_and_annihilated(
        rows in 1usize..5, cols in 1usize..7,
        seed in prop::collection::vec(-1.0f64..1.0, 35),
    ) {
        let m = Mat::new(rows, cols, seed[..rows * cols].to_vec()).unwrap();
        let basis = nullspace_basis(&m, 1e-12);
        prop_assert!(basis.cols() >= cols.saturating_sub(rows));
        prop_assert!(orth_err(&basis) <= 1e-12);
        prop_assert!(m.matmul(&basis).max_abs() <= 1e-12);
    }
}

#[test]
fn isolated_rows_and_columns_give_exact_eigenvalues() {
    // Row 2 has no off-diagonal entries; column 0 only has its diagonal.
    let a = Mat::from_rows(&[
        &[-0.3, 2.0, 3.0, 1.0],
        &[0.0, 5.0, 6.0, -1.0],
        &[0.0, 0.0, 7.25, 0.0],
        &[0.0, 0.4, -2.0, 0.0],
    ]);
    let got = eig_qr(&a).unwrap();
    assert!(got.contains(&CScalar::new(7.25, 0.0)));
    assert!(got.contains(&CScalar::new(-0.3, 0.0)));
    // A structurally zero state stays exactly zero.
    let b = Mat::from_rows(&[&[0.0, 0.0, 0.0], &[1.0, -2.0, 0.5], &[0.3, 0.1, -1.0]]);
    assert!(eig_qr(&b).unwrap().contains(&CScalar::new(0.0, 0.0)));
    let oracle = companion_roots(&char_poly(&a).unwrap().0).unwrap();
    assert!(max_matched_error(&oracle, &got) < 1e-10);
}
