use mindiag::certify::{certify_minimality, CertifyParams, Verdict};
use mindiag::cli::{io, sdpa};
use mindiag::hermitian::{complex_to_real_embed, eigendecompose, phi, HermitianMatrix, RealDiagonal};
use mindiag::rank_one::{closed_polygon_angles, minimizing_diagonal, polygon_residual, UnitVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian_strategy(max_n: usize) -> impl Strategy<Value = HermitianMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(-3.0..3.0f64, n * n), prop::collection::vec(-3.0..3.0f64, n * n)).prop_map(move |(re, im)| {
            let g = DMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im[i * n + j]));
            HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).unwrap()
        })
    })
}

fn unit_strategy(max_n: usize) -> impl Strategy<Value = UnitVector> {
    (2..=max_n)
        .prop_flat_map(|n| prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n))
        .prop_filter_map("zero vector", |v| {
            let h: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            UnitVector::normalized(&h).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn embedding_doubles_the_spectrum(a in hermitian_strategy(6)) {
        let es = eigendecompose(&a).unwrap();
        let big = eigendecompose(&HermitianMatrix::from_real(&complex_to_real_embed(&a)).unwrap()).unwrap();
        for (k, v) in es.values.iter().enumerate() {
            prop_assert!((big.values[2 * k] - v).abs() <= 1e-9 * (1.0 + v.abs()));
            prop_assert!((big.values[2 * k + 1] - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn closed_form_norm_is_attained(h in unit_strategy(7)) {
        let sol = minimizing_diagonal(&h);
        let achieved = phi(&h.projector(), &sol.diagonal).unwrap();
        prop_assert!((achieved - sol.minimal_norm).abs() <= 1e-12);
        // ½ is always attainable with the diagonal −½·1
        prop_assert!(sol.minimal_norm <= 0.5 + 1e-15);
    }

    #[test]
    fn polygons_close(raw in prop::collection::vec(0.05..1.0f64, 3..40)) {
        let total: f64 = raw.iter().sum();
        let lengths: Vec<f64> = raw.iter().map(|v| v / total).collect();
        prop_assume!(lengths.iter().all(|&l| l <= 0.5));
        let theta = closed_polygon_angles(&lengths).unwrap();
        prop_assert!(polygon_residual(&lengths, &theta) <= 1e-10);
    }

    #[test]
    fn sdpa_round_trips(a in hermitian_strategy(5)) {
        let p = sdpa::problem_for(&a);
        let back = sdpa::parse(&sdpa::write(&p)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn descent_directions_descend(a in hermitian_strategy(4), seed in prop::collection::vec(-2.0..2.0f64, 4)) {
        let n = a.dim();
        let x = RealDiagonal::new(seed[..n].to_vec());
        let c = certify_minimality(&a, &x, &CertifyParams::default());
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        if c.verdict == Verdict::NotMinimal {
            let w = c.descent_direction.unwrap();
            let phi0 = phi(&a, &x).unwrap();
            let better = (0..40).any(|k| phi(&a, &x.axpy(0.5f64.powi(k), &w)).unwrap() < phi0);
            prop_assert!(better);
        }
    }

    #[test]
    fn problem_files_round_trip(a in hermitian_strategy(4)) {
        let n = a.dim();
        let rows = |m: DMatrix<f64>| (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>();
        let doc = serde_json::json!({"n": n, "real": rows(a.real_part()), "imag": rows(a.imag_part())});
        let p = io::parse_problem(doc.to_string().as_bytes()).unwrap();
        prop_assert_eq!(p.matrix.matrix(), a.matrix());
    }
}
