//! Randomized invariants of the model and optimizers.

use partrx::bounds::{helstrom_bound, sql_limit};
use partrx::numerics::{simplex_from_unconstrained, unconstrained_from_simplex};
use partrx::{
    cascade_error, operating_point_from_nbar, strategy_identical, strategy_nested, DeviceParams, Partition,
    Priors, StageKind,
};
use proptest::prelude::*;

fn device() -> impl Strategy<Value = DeviceParams> {
    (0.5..=1.0f64, 0.0..0.01f64, 0.8..=1.0f64, 0.8..=1.0f64)
        .prop_map(|(eta, nu, tau, xi)| DeviceParams::new(eta, nu, tau, xi).unwrap())
}

fn partition(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 1..=max_len).prop_filter_map("positive total", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-6).then(|| w.iter().map(|v| v / total).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn softmax_lands_on_the_simplex(z in prop::collection::vec(-400.0..400.0f64, 1..12)) {
        let f = simplex_from_unconstrained(&z);
        prop_assert_eq!(f.len(), z.len() + 1);
        prop_assert!(f.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_round_trips(z in prop::collection::vec(-20.0..20.0f64, 1..8)) {
        let back = unconstrained_from_simplex(&simplex_from_unconstrained(&z));
        for (a, b) in z.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn cascade_stays_between_helstrom_and_prior(
        nbar in 0.01..8.0f64,
        p0 in 0.05..0.95f64,
        fractions in partition(6),
        params in device(),
    ) {
        let op = operating_point_from_nbar(nbar).unwrap();
        let priors = Priors::from_p0(p0).unwrap();
        let result = cascade_error(&Partition::new(fractions.clone()).unwrap(), &op, &priors, &params).unwrap();
        prop_assert_eq!(result.stages.len(), fractions.len());
        let helstrom = helstrom_bound(nbar, &priors).unwrap();
        prop_assert!(result.p_error >= helstrom - 1e-12);
        prop_assert!(result.p_error <= 1.0);
        for w in result.stages.windows(2) {
            prop_assert_eq!(w[1].p1_i, w[0].pe_stage);
        }
        for s in &result.stages {
            match s.kind {
                // a displacement large enough to always click decides H1, error p0
                StageKind::Measured => prop_assert!(s.pe_stage <= s.p0_i + 1e-15),
                StageKind::NoOp => prop_assert_eq!(s.pe_stage, s.p1_i),
                StageKind::Certain => prop_assert_eq!(s.pe_stage, 0.0),
            }
        }
    }

    #[test]
    fn ideal_stages_never_exceed_either_prior(nbar in 0.01..8.0f64, p0 in 0.05..0.95f64, fractions in partition(6)) {
        let op = operating_point_from_nbar(nbar).unwrap();
        let priors = Priors::from_p0(p0).unwrap();
        let partition = Partition::new(fractions).unwrap();
        let result = cascade_error(&partition, &op, &priors, &DeviceParams::ideal()).unwrap();
        for s in result.stages.iter().filter(|s| s.kind == StageKind::Measured) {
            // perfect nulling of H0 errs only on H1 no-clicks
            prop_assert!(s.pe_stage <= s.p0_i.min(s.p1_i) + 1e-15);
        }
        prop_assert!(result.p_error <= p0.min(1.0 - p0) + 1e-15);
    }

    #[test]
    fn nested_never_loses_to_fewer_segments(nbar in 0.05..6.0f64, params in device(), n in 2usize..5) {
        let op = operating_point_from_nbar(nbar).unwrap();
        let eq = Priors::equal();
        let more = strategy_nested(n, &op, &eq, &params).unwrap().1.p_error;
        let fewer = strategy_nested(n - 1, &op, &eq, &params).unwrap().1.p_error;
        prop_assert!(more <= fewer + 1e-12);
    }

    #[test]
    fn ideal_single_segment_beats_sql(nbar in 0.01..10.0f64) {
        let op = operating_point_from_nbar(nbar).unwrap();
        let (_, odr) = strategy_identical(1, &op, &Priors::equal(), &DeviceParams::ideal()).unwrap();
        prop_assert!(odr.p_error <= sql_limit(nbar).unwrap());
    }
}
