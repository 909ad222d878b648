use dpcc::bits::BitRow;
use dpcc::commsim::{
    amplify, dist_cc, pair_errors, protocol_error, ceil_log2, ErrorMode, EvalTable, OneWayProtocol, SubsetDp,
};
use dpcc::concepts::{make_builtin, Builtin, ConceptClass};
use dpcc::distribution::{FiniteDistribution, PairDistribution};
use dpcc::mistaketree::{ldim, validate_tree};
use dpcc::rational::{q, q_int, q_u128, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Textbook recursion over the class as a set of rows.
fn brute_ldim(rows: &[Vec<bool>]) -> i64 {
    if rows.len() <= 1 {
        return rows.len() as i64 - 1;
    }
    let n = rows[0].len();
    let mut best = 0;
    for x in 0..n {
        let zero: Vec<Vec<bool>> = rows.iter().filter(|r| !r[x]).cloned().collect();
        let one: Vec<Vec<bool>> = rows.iter().filter(|r| r[x]).cloned().collect();
        if zero.is_empty() || one.is_empty() {
            continue;
        }
        best = best.max(1 + brute_ldim(&zero).min(brute_ldim(&one)));
    }
    best
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..=5).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..=10))
}

#[test]
fn ldim_witnesses_are_valid_complete_trees() {
    for kind in [
        Builtin::Point { b: 4 },
        Builtin::Threshold { b: 4 },
        Builtin::Line { p: 3 },
        Builtin::Box { b: 2, d: 2 },
        Builtin::Halfspace { b: 1, d: 2 },
    ] {
        let c = make_builtin(kind).unwrap();
        let (d, tree) = ldim(&c).unwrap();
        let v = validate_tree(&tree, &c).unwrap();
        assert!(v.valid && v.complete, "{kind:?}");
        assert_eq!(v.depth, d, "{kind:?}");
    }
}

/// Brute-force optimal error with at most `2^bits` messages: try every map
/// from Alice's inputs to messages, Bob answers the weighted majority.
fn brute_partition_error(t: &EvalTable, mu: &PairDistribution, bits: u32) -> u64 {
    let n = t.n_alice;
    let m = (1usize << bits).min(n.max(1));
    let mut best = u64::MAX;
    for code in 0..m.pow(n as u32) {
        let msg: Vec<usize> = (0..n).map(|f| code / m.pow(f as u32) % m).collect();
        let mut err = 0;
        for block in 0..m {
            for x in 0..t.n_bob {
                let (mut w1, mut w0) = (0u64, 0u64);
                for f in (0..n).filter(|&f| msg[f] == block) {
                    match t.get(f, x) {
                        Some(true) => w1 += mu.weight(f, x),
                        Some(false) => w0 += mu.weight(f, x),
                        None => {}
                    }
                }
                err += w1.min(w0);
            }
        }
        best = best.min(err);
    }
    best
}

fn table_strategy() -> impl Strategy<Value = (usize, usize, Vec<u8>, Vec<u64>)> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(na, nb)| {
        (
            Just(na),
            Just(nb),
            prop::collection::vec(0u8..3, na * nb),
            prop::collection::vec(0u64..6, na * nb),
        )
    })
}

fn build(na: usize, nb: usize, entries: &[u8], weights: &[u64]) -> Option<(EvalTable, PairDistribution)> {
    let e = entries.iter().map(|&v| [None, Some(false), Some(true)][v as usize]).collect();
    if weights.iter().all(|&w| w == 0) {
        return None;
    }
    let t = EvalTable::new(na, nb, e).ok()?;
    let mu = PairDistribution::from_counts(na, nb, weights.to_vec()).ok()?;
    Some((t, mu))
}

fn binomial_tail_above_half(k: u32, e: &Q) -> Q {
    let mut total = Q::zero();
    for j in (k / 2 + 1)..=k {
        let mut c = Q::one();
        for i in 0..j {
            c = c * q_int((k - i) as i64) / q_int((i + 1) as i64);
        }
        let mut term = c;
        for _ in 0..j {
            term *= e;
        }
        for _ in 0..(k - j) {
            term *= Q::one() - e;
        }
        total += term;
    }
    total
}

#[test]
fn amplification_matches_binomial_tail() {
    // Three shared coins; on each pair the protocol errs under one coin or none.
    let t = EvalTable::from_class(&make_builtin(Builtin::Point { b: 2 }).unwrap());
    let truth: Vec<BitRow> = (0..t.n_alice)
        .map(|f| BitRow::from_fn(t.n_bob, |x| t.get(f, x).unwrap()))
        .collect();
    let coins = FiniteDistribution::uniform(3).unwrap();
    let alice = vec![(0..t.n_alice).collect::<Vec<_>>(); 3];
    let bob: Vec<Vec<BitRow>> = (0..3)
        .map(|r| {
            truth
                .iter()
                .enumerate()
                .map(|(f, row)| {
                    let mut row = row.clone();
                    if f == r {
                        row.set(0, !row.get(0));
                    }
                    row
                })
                .collect()
        })
        .collect();
    let p = OneWayProtocol::public_coin(t.n_alice, t.n_bob, t.n_alice, coins, alice, bob).unwrap();
    let base = pair_errors(&p, &t).unwrap();
    for k in [1, 3, 5] {
        let amp = pair_errors(&amplify(&p, k).unwrap(), &t).unwrap();
        for f in 0..t.n_alice {
            for x in 0..t.n_bob {
                let e = base.error(f, x).unwrap();
                assert_eq!(amp.error(f, x).unwrap(), binomial_tail_above_half(k, &e), "k={k} f={f} x={x}");
            }
        }
    }
    assert_eq!(base.worst(), q(1, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn ldim_matches_recursive_definition(rows in rows_strategy()) {
        let n = rows[0].len();
        let mut uniq = rows.clone();
        uniq.sort();
        uniq.dedup();
        let c = ConceptClass::new(n, uniq.iter().map(|r| BitRow::from_bools(r)).collect()).unwrap();
        let (d, tree) = ldim(&c).unwrap();
        prop_assert_eq!(d as i64, brute_ldim(&uniq));
        let v = validate_tree(&tree, &c).unwrap();
        prop_assert!(v.valid && v.complete);
    }

    #[test]
    fn subset_dp_matches_partition_search((na, nb, entries, weights) in table_strategy()) {
        let Some((t, mu)) = build(na, nb, &entries, &weights) else { return Ok(()) };
        let mut dp = SubsetDp::new(&t, &mu).unwrap();
        for bits in 0..=ceil_log2(na as u128) {
            let w = brute_partition_error(&t, &mu, bits);
            prop_assert_eq!(dp.error_weight(bits), w);
            let (p, e) = dp.protocol(bits).unwrap();
            prop_assert!(p.n_messages <= 1 << bits);
            let r = protocol_error(&p, &t, ErrorMode::Distributional(&mu), None).unwrap();
            prop_assert_eq!(r.exact().unwrap(), &e);
            prop_assert_eq!(e, q_u128(w as u128, mu.denom() as u128));
        }
    }

    #[test]
    fn dist_cc_is_monotone_and_bounded((na, nb, entries, weights) in table_strategy(), a in 0i64..8, b in 0i64..8) {
        let Some((t, mu)) = build(na, nb, &entries, &weights) else { return Ok(()) };
        let (lo, hi) = (a.min(b), a.max(b));
        let c_lo = dist_cc(&t, &mu, &q(lo, 16)).unwrap();
        let c_hi = dist_cc(&t, &mu, &q(hi, 16)).unwrap();
        prop_assert!(c_hi <= c_lo);
        prop_assert!(c_lo <= ceil_log2(na as u128));
    }

    /// A randomized protocol is a mixture of deterministic ones, so its
    /// error under any input distribution is at least the deterministic optimum.
    #[test]
    fn randomized_error_dominates_deterministic_optimum(
        (na, nb, entries, weights) in table_strategy(),
        maps in prop::collection::vec(prop::collection::vec(0usize..2, 5), 3),
        outs in prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 6),
        coin_w in prop::collection::vec(1u64..5, 3),
    ) {
        let Some((t, mu)) = build(na, nb, &entries, &weights) else { return Ok(()) };
        let alice: Vec<Vec<usize>> = maps.iter().map(|m| m[..na].to_vec()).collect();
        let bob: Vec<Vec<BitRow>> = (0..3)
            .map(|r| (0..2).map(|s| BitRow::from_bools(&outs[2 * r + s][..nb])).collect())
            .collect();
        let coins = FiniteDistribution::from_counts(coin_w).unwrap();
        let p = OneWayProtocol::public_coin(na, nb, 2, coins, alice, bob).unwrap();
        let randomized = protocol_error(&p, &t, ErrorMode::Distributional(&mu), None).unwrap();
        let worst = protocol_error(&p, &t, ErrorMode::WorstCase, None).unwrap();
        let opt = SubsetDp::new(&t, &mu).unwrap().error(1);
        prop_assert!(randomized.exact().unwrap() >= &opt);
        prop_assert!(randomized.exact().unwrap() <= worst.exact().unwrap());
    }
}
