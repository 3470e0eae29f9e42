use nalgebra::DMatrix;
use num_rational::BigRational;
use proptest::prelude::*;
use toric_renyi::analysis::ratio_estimates;
use toric_renyi::lattice::{build_partition_at, PartitionCase, Star, Variant};
use toric_renyi::pcut::{
    cluster_ground_state, flow_expand, Channel, PowerSeries, Regime, SeriesPolynomial, Target,
};
use toric_renyi::pfaffian::pfaffian;

fn antisymmetric(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim * dim).prop_map(move |v| {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i + 1..dim {
                m[(i, j)] = v[i * dim + j];
                m[(j, i)] = -v[i * dim + j];
            }
        }
        m
    })
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=12).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn unit_series(order: usize) -> impl Strategy<Value = PowerSeries> {
    prop::collection::vec(small_rational(), order).prop_map(move |c| {
        let mut s = PowerSeries::one(order);
        for (k, v) in c.iter().enumerate() {
            s.add_at(k + 1, v);
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squared_is_determinant(m in (1usize..=10).prop_flat_map(|h| antisymmetric(2 * h))) {
        let pf = pfaffian(&m).unwrap();
        let det = m.clone().determinant();
        prop_assert!((pf * pf - det).abs() <= 1e-9 * det.abs().max(1e-300));
    }

    #[test]
    fn four_case_identities(big in 5usize..=10, d in 2usize..=4, row in 0usize..20, col in 0usize..20) {
        prop_assume!(big > 2 * d);
        let n = big + 4;
        let anchor = Star::new(row % n, col % n);
        let g: Vec<_> = PartitionCase::all(big, d)
            .unwrap()
            .iter()
            .map(|&c| build_partition_at(c, n, anchor).unwrap())
            .collect();
        let combo = |f: &dyn Fn(usize) -> usize| {
            -(f(0) as i64) + f(1) as i64 + f(2) as i64 - f(3) as i64
        };
        prop_assert_eq!(combo(&|i| g[i].length), 0);
        prop_assert_eq!(combo(&|i| g[i].corners), 0);
        prop_assert_eq!(combo(&|i| g[i].horizontal_length), 0);
        prop_assert_eq!(combo(&|i| g[i].horizontal_sections), 0);
        prop_assert_eq!(combo(&|i| g[i].loop_count), -2);
    }

    #[test]
    fn partition_counts_are_translation_invariant(m in 1u8..=4, row in 0usize..14, col in 0usize..14) {
        let case = PartitionCase::new(m, 7, 2).unwrap();
        let at = |r, c| {
            let g = build_partition_at(case, 14, Star::new(r, c)).unwrap();
            (g.length, g.corners, g.loop_count, g.horizontal_length, g.horizontal_sections)
        };
        prop_assert_eq!(at(row, col), at(0, 0));
    }

    #[test]
    fn log_of_product_is_sum_of_logs(a in unit_series(5), b in unit_series(5)) {
        let mut sum = a.ln();
        sum.add_assign(&b.ln());
        prop_assert_eq!(a.mul(&b).ln(), sum);
    }

    #[test]
    fn cluster_ground_state_is_normalized(bonds in prop::collection::vec((0u32..5, 0u32..5), 1..5)) {
        let terms: Vec<u64> = bonds
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| (1u64 << a) | (1u64 << b))
            .collect();
        prop_assume!(!terms.is_empty());
        let flow = flow_expand(&[-2, 0, 2], 4).unwrap();
        let gs = cluster_ground_state(&terms, &flow, 4);
        prop_assert_eq!(gs.norm(), PowerSeries::one(4));
    }

    #[test]
    fn ratio_test_recovers_geometric_radius(num in 1i64..20, den in 1i64..20) {
        // a_k = r^k with r = 1/λ_C²
        let r = BigRational::new(num.into(), den.into());
        let mut c = Vec::new();
        let mut p = r.clone();
        for _ in 0..4 {
            c.push(p.clone());
            p *= &r;
        }
        let series = SeriesPolynomial {
            regime: Regime::SmallField,
            variant: Variant::Quasi1d,
            target: Target::Renyi,
            channels: [(Channel::LPrime, c)].into_iter().collect(),
        };
        let expected = (den as f64 / num as f64).sqrt();
        for e in ratio_estimates(&series) {
            prop_assert!((e.value.unwrap() - expected).abs() < 1e-12 * expected);
        }
    }
}
