use dpcc::bits::BitRow;
use dpcc::commsim::pair_errors;
use dpcc::concepts::ConceptClass;
use dpcc::distribution::{FiniteDistribution, PairDistribution};
use dpcc::infomath::{
    divergence_and_distance, entropy_suite, min_entropy_conditioning_tail, statistical_distance_by_events,
    Joint3, JointDistribution,
};
use dpcc::rational::{q, Q};
use dpcc::repdim::{
    check_rep_fixed_dist, max_packing_and_duality, min_cover, prob_rep_to_protocol_fixed, protocol_to_prob_rep,
    DetRepresentation, ProbRepresentation, Representation,
};
use num_traits::Zero;
use proptest::prelude::*;

fn class_and_dist() -> impl Strategy<Value = (ConceptClass, FiniteDistribution)> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..=7),
            prop::collection::vec(1u64..6, n),
        )
            .prop_map(move |(rows, w)| {
                let rows = rows.iter().map(|r| BitRow::from_bools(r)).collect();
                (ConceptClass::new(n, rows).unwrap(), FiniteDistribution::from_counts(w).unwrap())
            })
    })
}

fn normalize(w: &[u32]) -> Vec<f64> {
    let s: u32 = w.iter().sum();
    w.iter().map(|&x| x as f64 / s as f64).collect()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..10, n).prop_filter("some mass", |w| w.iter().any(|&x| x > 0))
}

fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).log2()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    /// Cover -> protocol -> representation recovers a valid representation,
    /// and the protocol's error on each concept's inputs stays within eps.
    #[test]
    fn representation_protocol_round_trip((c, d) in class_and_dist(), e in 0i64..4) {
        let eps = q(e, 8);
        let cover = min_cover(&c, &d, &eps, false, false).unwrap();
        prop_assert!(cover.optimal);
        let h = DetRepresentation::new(cover.hypotheses.clone()).unwrap();
        prop_assert!(check_rep_fixed_dist(Representation::Det(&h), &c, &d, &eps, &Q::zero()).unwrap().pass);
        let r = ProbRepresentation::point_mass(h);
        let p = prob_rep_to_protocol_fixed(&r, &c, &d, &eps).unwrap();
        let errs = pair_errors(&p, &dpcc::repdim::eval_table(&c)).unwrap();
        for f in 0..c.len() {
            let per_concept: Q = (0..c.domain_size()).map(|x| errs.error(f, x).unwrap() * d.prob(x)).sum();
            prop_assert!(per_concept <= eps);
        }
        let back = protocol_to_prob_rep(&p).unwrap();
        prop_assert!(check_rep_fixed_dist(Representation::Prob(&back), &c, &d, &eps, &Q::zero()).unwrap().pass);
    }

    #[test]
    fn cover_sizes_are_monotone_and_sandwiched((c, d) in class_and_dist(), e in 1i64..4) {
        let eps = q(e, 8);
        let half = q(e, 16);
        let improper = min_cover(&c, &d, &eps, false, false).unwrap().len();
        let proper = min_cover(&c, &d, &eps, true, false).unwrap().len();
        let improper_half = min_cover(&c, &d, &half, false, false).unwrap().len();
        let looser = min_cover(&c, &d, &q(e + 1, 8), false, false).unwrap().len();
        prop_assert!(looser <= improper);
        prop_assert!(improper <= proper);
        prop_assert!(proper <= improper_half);
    }

    #[test]
    fn maximal_packing_is_a_cover((c, d) in class_and_dist(), e in 0i64..4) {
        let eps = q(e, 8);
        let r = max_packing_and_duality(&c, &d, &eps, &q(1, 4), None).unwrap();
        prop_assert!(r.packing_is_cover);
        prop_assert!(r.packing.len() >= r.min_cover_size);
    }

    #[test]
    fn entropies_are_ordered(w in weights(6)) {
        let s = entropy_suite(&normalize(&w)).unwrap();
        prop_assert!(s.ordering_ok);
        prop_assert!(s.shannon + 1e-12 >= s.min_entropy);
    }

    #[test]
    fn mutual_information_is_kl_from_product(w in weights(12)) {
        let j = JointDistribution::new(3, 4, normalize(&w)).unwrap();
        let (px, py) = (j.marginal_x(), j.marginal_y());
        let prod: Vec<f64> = px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
        prop_assert!((j.mutual_information() - kl_bits(j.flat(), &prod)).abs() < 1e-9);
    }

    #[test]
    fn chain_rule_for_mutual_information(w in weights(12)) {
        let p = normalize(&w);
        let j = Joint3::new([2, 3, 2], p.clone()).unwrap();
        // I(x; yz) computed directly as a divergence.
        let px: Vec<f64> = (0..2).map(|x| p[x * 6..x * 6 + 6].iter().sum()).collect();
        let pyz: Vec<f64> = (0..6).map(|k| p[k] + p[6 + k]).collect();
        let prod: Vec<f64> = (0..12).map(|i| px[i / 6] * pyz[i % 6]).collect();
        let direct = kl_bits(&p, &prod);
        prop_assert!((j.mi_x_yz() - direct).abs() < 1e-9);
        prop_assert!((j.mi_x_y() + j.mi_x_z_given_y() - direct).abs() < 1e-9);
    }

    #[test]
    fn pinsker_and_event_distance(a in weights(5), b in prop::collection::vec(1u32..10, 5)) {
        let (p, qv) = (normalize(&a), normalize(&b));
        let dv = divergence_and_distance(&p, &qv).unwrap();
        prop_assert!(dv.pinsker_ok);
        prop_assert!(dv.statistical_distance <= (dv.kl_nats / 2.0).sqrt() + 1e-12);
        let by_events = statistical_distance_by_events(&p, &qv).unwrap();
        prop_assert!((by_events - dv.statistical_distance).abs() < 1e-12);
    }

    #[test]
    fn min_entropy_tail_bound(w in prop::collection::vec(0u64..8, 16), t in 0u32..4) {
        prop_assume!(w.iter().any(|&x| x > 0));
        let j = PairDistribution::from_counts(4, 4, w).unwrap();
        let r = min_entropy_conditioning_tail(&j, 2, t as f64).unwrap();
        prop_assert!(r.holds, "bad {:?} bound {}", r.bad_probability, r.bound);
    }
}
