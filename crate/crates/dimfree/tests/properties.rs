//! Property tests for the functional conditions, the bound monotonicities
//! and the partition/curve invariants.

use dimfree::bounds::{gamma, phi_summary};
use dimfree::empirical::empirical_tail;
use dimfree::matfun::{eval_mu, singular_values, Matrix, MatrixFunctional};
use dimfree::partitions::IndexPartition;
use dimfree::tailbounds::{df_tail_azuma, df_tail_thm1, df_tail_thm2, mds_tail, MdsVariant};
use proptest::prelude::*;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(m, n)| {
        prop::collection::vec(-10.0..10.0f64, m * n)
            .prop_map(move |v| Matrix::from_row_slice(m, n, &v))
    })
}

fn symmetric_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec(-10.0..10.0f64, n * n).prop_map(move |v| {
            let a = Matrix::from_row_slice(n, n, &v);
            (&a + a.transpose()) * 0.5
        })
    })
}

fn rect_functionals(m: usize, n: usize) -> Vec<MatrixFunctional> {
    let mut fs = vec![
        MatrixFunctional::spectral_norm(),
        MatrixFunctional::frobenius(),
    ];
    for j in 1..=m.min(n) {
        fs.push(MatrixFunctional::ky_fan(j).unwrap());
    }
    fs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // (C1) non-negativity
    #[test]
    fn mu_is_non_negative(a in matrix_strategy(5)) {
        for f in rect_functionals(a.nrows(), a.ncols()) {
            prop_assert!(eval_mu(&f, &a).unwrap() >= 0.0);
        }
    }

    #[test]
    fn mu_is_non_negative_hermitian(a in symmetric_strategy(5), j in 1usize..=5) {
        let j = j.min(a.nrows());
        let f = MatrixFunctional::abs_top_eig_sum(j).unwrap();
        prop_assert!(eval_mu(&f, &a).unwrap() >= 0.0);
    }

    // (C2) positive homogeneity
    #[test]
    fn mu_is_positively_homogeneous(a in matrix_strategy(5), theta in 1e-3..10.0f64) {
        for f in rect_functionals(a.nrows(), a.ncols()) {
            let lhs = eval_mu(&f, &(&a * theta)).unwrap();
            let rhs = theta * eval_mu(&f, &a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0),
                "homogeneity violated: {lhs} vs {rhs}");
        }
    }

    // (C3) subadditivity
    #[test]
    fn mu_is_subadditive(
        pair in (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
            (prop::collection::vec(-10.0..10.0f64, m * n),
             prop::collection::vec(-10.0..10.0f64, m * n))
                .prop_map(move |(u, v)| {
                    (Matrix::from_row_slice(m, n, &u), Matrix::from_row_slice(m, n, &v))
                })
        })
    ) {
        let (a, b) = pair;
        for f in rect_functionals(a.nrows(), a.ncols()) {
            let sum = eval_mu(&f, &(&a + &b)).unwrap();
            let parts = eval_mu(&f, &a).unwrap() + eval_mu(&f, &b).unwrap();
            prop_assert!(sum <= parts + 1e-10 * parts.max(1.0));
        }
    }

    // For the eigenvalue-sum functional, subadditivity is guaranteed on the
    // PSD cone (indefinite pairs can break it through the absolute value;
    // see the boundary test in the matfun module).
    #[test]
    fn mu_is_subadditive_hermitian_psd(
        pair in (1usize..=5).prop_flat_map(|n| {
            (prop::collection::vec(-3.0..3.0f64, n * n),
             prop::collection::vec(-3.0..3.0f64, n * n),
             Just(n))
        }),
        j in 1usize..=5,
    ) {
        let (u, v, n) = pair;
        let psd = |flat: &[f64]| {
            let g = Matrix::from_row_slice(n, n, flat);
            let p = &g * g.transpose();
            (&p + p.transpose()) * 0.5
        };
        let (a, b) = (psd(&u), psd(&v));
        let f = MatrixFunctional::abs_top_eig_sum(j.min(n)).unwrap();
        let sum = eval_mu(&f, &(&a + &b)).unwrap();
        let parts = eval_mu(&f, &a).unwrap() + eval_mu(&f, &b).unwrap();
        prop_assert!(sum <= parts + 1e-10 * parts.max(1.0));
    }

    // spectral norm is Ky Fan order 1; the full Ky Fan sum is the trace norm
    #[test]
    fn ky_fan_special_cases(a in matrix_strategy(5)) {
        let spectral = eval_mu(&MatrixFunctional::spectral_norm(), &a).unwrap();
        let ky1 = eval_mu(&MatrixFunctional::ky_fan(1).unwrap(), &a).unwrap();
        prop_assert!((spectral - ky1).abs() <= 1e-12 * spectral.max(1.0));
        let full = a.nrows().min(a.ncols());
        let trace_norm: f64 = singular_values(&a).unwrap().iter().sum();
        let ky_full = eval_mu(&MatrixFunctional::ky_fan(full).unwrap(), &a).unwrap();
        prop_assert!((trace_norm - ky_full).abs() <= 1e-12 * trace_norm.max(1.0));
    }

    // singular values against the Gram-matrix route
    #[test]
    fn singular_values_match_gram_eigenvalues(a in matrix_strategy(6)) {
        let sv = singular_values(&a).unwrap();
        let gram = a.transpose() * &a;
        let mut eig = dimfree::matfun::eigenvalues_desc(&gram).unwrap();
        eig.truncate(sv.len());
        for (s, l) in sv.iter().zip(eig) {
            let root = l.max(0.0).sqrt();
            prop_assert!((s - root).abs() <= 1e-8 * root.max(1e-8),
                "sigma {s} vs sqrt-eig {root}");
        }
    }

    #[test]
    fn pairing_partition_shape(k in 1usize..=64) {
        let p = IndexPartition::pairing(k);
        prop_assert_eq!(p.block_count(), k.div_ceil(2));
        prop_assert!(p.tau() <= 2);
        prop_assert_eq!(p.index_count(), k);
    }

    // constructor rejects malformed covers instead of repairing them
    #[test]
    fn partition_validation_rejects_mutations(k in 2usize..=10, drop in 0usize..10, dup in 0usize..10) {
        let drop = drop % k;
        let dup = dup % k;
        // gap: drop one index
        let gapped: Vec<Vec<usize>> = (0..k).filter(|&i| i != drop).map(|i| vec![i]).collect();
        prop_assert!(IndexPartition::new(gapped, k).is_err());
        // overlap: duplicate one index
        let mut blocks: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        blocks.push(vec![dup]);
        prop_assert!(IndexPartition::new(blocks, k).is_err());
    }

    // every closed form decreases in t and increases in phi
    #[test]
    fn bounds_monotone(t in 0.1..30.0f64, dt in 0.01..5.0f64,
                       phi in 0.05..15.0f64, dphi in 0.01..5.0f64,
                       k in 1usize..=8) {
        let t2 = t + dt;
        let phi2 = phi + dphi;
        let b = df_tail_thm1(t, k, phi).unwrap();
        let bt = df_tail_thm1(t2, k, phi).unwrap();
        prop_assert!(bt.bennett <= b.bennett * (1.0 + 1e-12));
        prop_assert!(bt.bernstein <= b.bernstein * (1.0 + 1e-12));
        prop_assert!(bt.subgauss_subexp <= b.subgauss_subexp * (1.0 + 1e-12));
        let bp = df_tail_thm1(t, k, phi2).unwrap();
        prop_assert!(bp.bennett >= b.bennett * (1.0 - 1e-12));
        prop_assert!(df_tail_azuma(t2, phi).unwrap() <= df_tail_azuma(t, phi).unwrap());
        prop_assert!(df_tail_azuma(t, phi2).unwrap() >= df_tail_azuma(t, phi).unwrap());
        // the chained relaxations stay ordered
        prop_assert!(b.bennett <= b.bernstein + 1e-300);
        prop_assert!(b.bernstein <= b.subgauss_subexp + 1e-300);
    }

    // the trivial whole-set partition reproduces the whole-set bound
    #[test]
    fn thm2_whole_set_reduces_to_thm1(
        envelope in prop::collection::vec(0.01..3.0f64, 1..8),
        t in 0.1..20.0f64,
    ) {
        let k = envelope.len();
        let phi = phi_summary(&envelope, &IndexPartition::whole(k)).unwrap();
        let t1 = df_tail_thm1(t, k, phi.phi_full).unwrap();
        let t2 = df_tail_thm2(t, &phi).unwrap();
        prop_assert!((t1.bennett - t2.bennett).abs() <= 1e-12 * t1.bennett.max(1e-12));
        prop_assert!((t1.bernstein - t2.bernstein).abs() <= 1e-12 * t1.bernstein.max(1e-12));
    }

    // the martingale route pays exactly a factor two in t
    #[test]
    fn mds_bennett_is_thm2_at_half_t(
        envelope in prop::collection::vec(0.01..3.0f64, 2..9),
        t in 0.1..20.0f64,
    ) {
        let phi = phi_summary(&envelope, &IndexPartition::pairing(envelope.len())).unwrap();
        let mds = mds_tail(2.0 * t, &phi, MdsVariant::Bennett).unwrap();
        let ind = df_tail_thm2(t, &phi).unwrap().bennett;
        prop_assert!((mds - ind).abs() <= 1e-12 * ind.max(1e-12));
    }

    // equal envelopes over a multi-block partition can only shrink phi
    #[test]
    fn phi_omega_below_phi_full_for_equal_envelopes(
        value in 0.01..3.0f64, k in 2usize..=10,
    ) {
        let envelope = vec![value; k];
        let phi = phi_summary(&envelope, &IndexPartition::pairing(k)).unwrap();
        prop_assert!(phi.phi_omega <= phi.phi_full + 1e-12);
        prop_assert!(phi.phi_omega >= 0.0 && phi.phi_full >= 0.0);
    }

    // Bennett rate dominates its Bernstein relaxation
    #[test]
    fn gamma_dominates_bernstein_rate(t in 0.0..100.0f64) {
        let relaxed = t * t / (2.0 * (1.0 + t / 3.0));
        prop_assert!(gamma(t).unwrap() >= relaxed - 1e-12);
    }

    // empirical tails are probabilities and non-increasing
    #[test]
    fn empirical_tail_shape(
        samples in prop::collection::vec(-5.0..5.0f64, 1..40),
        center in -2.0..2.0f64,
    ) {
        let grid: Vec<f64> = (1..20).map(|i| 0.3 * i as f64).collect();
        let curve = empirical_tail(&samples, center, &grid).unwrap();
        for w in curve.bound_values.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(curve.bound_values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
