use std::collections::{HashMap, HashSet, VecDeque};

use dpcc::dplearn::{
    em_probabilities, exponential_mechanism, freq_and_instability, laplace_sample, laplace_tail, line_basic_learner,
    stability_probs, Hypothesis, LabeledSample,
};
use dpcc::stats::rng_stream;
use proptest::prelude::*;

const P: u64 = 5;

/// Hypotheses that may appear in a list, plus absent ones just below and
/// above them so every useful challenger is on offer.
fn alphabet() -> Vec<Hypothesis> {
    vec![
        Hypothesis::Zero,
        Hypothesis::point(0, 0, P),
        Hypothesis::point(1, 1, P),
        Hypothesis::point(2, 2, P),
        Hypothesis::line(1, 1, P),
        Hypothesis::line(4, 4, P),
    ]
}

fn winner(counts: &[usize], alpha: &[Hypothesis]) -> usize {
    let top = *counts.iter().max().unwrap();
    (0..counts.len())
        .filter(|&i| counts[i] == top)
        .min_by(|&a, &b| alpha[a].cmp(&alpha[b]))
        .unwrap()
}

/// Breadth-first search over vote vectors, one edited entry per step.
fn brute_instability(list: &[usize], alpha: &[Hypothesis]) -> usize {
    let mut start = vec![0usize; alpha.len()];
    for &i in list {
        start[i] += 1;
    }
    let w0 = winner(&start, alpha);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((c, d)) = queue.pop_front() {
        if winner(&c, alpha) != w0 {
            return d;
        }
        for from in 0..c.len() {
            if c[from] == 0 {
                continue;
            }
            for to in 0..c.len() {
                if to == from {
                    continue;
                }
                let mut n = c.clone();
                n[from] -= 1;
                n[to] += 1;
                if seen.insert(n.clone()) {
                    queue.push_back((n, d + 1));
                }
            }
        }
    }
    unreachable!("the winner can always be replaced")
}

fn list_strategy() -> impl Strategy<Value = Vec<usize>> {
    // Indices 0, 2, 3, 4 of the alphabet; at most three distinct values.
    (prop::sample::subsequence(vec![0usize, 2, 3, 4], 1..=3))
        .prop_flat_map(|vals| prop::collection::vec(prop::sample::select(vals), 1..=8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn instability_matches_edit_search(list in list_strategy()) {
        let alpha = alphabet();
        let hyps: Vec<Hypothesis> = list.iter().map(|&i| alpha[i].clone()).collect();
        let (w, c) = freq_and_instability(&hyps).unwrap();
        let mut counts = vec![0usize; alpha.len()];
        for &i in &list {
            counts[i] += 1;
        }
        prop_assert_eq!(&w, &alpha[winner(&counts, &alpha)]);
        prop_assert_eq!(c, brute_instability(&list, &alpha));
    }

    #[test]
    fn basic_learner_recovers_the_line(
        a in 0u64..P, b in 0u64..P,
        xs in prop::collection::vec((0u64..P, 0u64..P, any::<bool>()), 1..12),
    ) {
        // Labels come from the target line; off-line points are negatives.
        let s: Vec<LabeledSample> = xs
            .iter()
            .map(|&(x, y, on)| {
                let y = if on { (a * x + b) % P } else { y };
                LabeledSample::at(x, y, P, (a * x + b) % P == y)
            })
            .collect();
        let out = line_basic_learner(&s, P).unwrap();
        prop_assert_eq!(&out, &line_basic_learner(&s, P).unwrap());
        prop_assert!(out.realizable);
        let pos_x: HashSet<u64> = s.iter().filter(|e| e.label).map(|e| e.coords(P).0).collect();
        match pos_x.len() {
            0 => prop_assert_eq!(&out.hypothesis, &Hypothesis::Zero),
            1 => {
                let is_point = matches!(out.hypothesis, Hypothesis::Point { .. });
                prop_assert!(is_point)
            }
            _ => prop_assert_eq!(&out.hypothesis, &Hypothesis::line(a, b, P)),
        }
        let h = out.hypothesis;
        prop_assert!(s.iter().all(|e| h.eval(e.point) == e.label));
    }

    /// Exact enumeration of draw sequences over the atoms and the negative mass.
    #[test]
    fn stability_probabilities_match_enumeration(
        raw in prop::collection::vec(1u32..10, 1..=3),
        neg in 1u32..10,
        t in 1u64..=5,
    ) {
        let total: u32 = raw.iter().sum::<u32>() + neg;
        let atoms: Vec<f64> = raw.iter().map(|&w| w as f64 / total as f64).collect();
        let r: f64 = atoms.iter().sum();
        let k = atoms.len() + 1;
        let mass: Vec<f64> = atoms.iter().copied().chain([1.0 - r]).collect();
        let mut by_distinct: HashMap<usize, f64> = HashMap::new();
        for code in 0..k.pow(t as u32) {
            let mut pr = 1.0;
            let mut hit = HashSet::new();
            for j in 0..t as u32 {
                let i = code / k.pow(j) % k;
                pr *= mass[i];
                if i < atoms.len() {
                    hit.insert(i);
                }
            }
            *by_distinct.entry(hit.len().min(2)).or_default() += pr;
        }
        let s = stability_probs(r, &atoms, t).unwrap();
        let get = |n| by_distinct.get(&n).copied().unwrap_or(0.0);
        prop_assert!((s.none - get(0)).abs() < 1e-9);
        prop_assert!((s.one - get(1)).abs() < 1e-9);
        prop_assert!((s.two - get(2)).abs() < 1e-9);
        prop_assert!((s.none + s.one + s.two - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exponential_mechanism_frequencies_and_utility_tail() {
    let qualities: Vec<i64> = vec![40, 38, 35, 30, 30, 12, 0];
    let alpha = 0.5;
    let probs = em_probabilities(&qualities, alpha).unwrap();
    let trials = 200_000;
    let mut rng = rng_stream(7, 0);
    let mut hits = vec![0u64; qualities.len()];
    for _ in 0..trials {
        let out = exponential_mechanism(&qualities, &[], |&q, _| q, alpha, &mut rng).unwrap();
        hits[out.index] += 1;
    }
    for (i, &pr) in probs.iter().enumerate() {
        let f = hits[i] as f64 / trials as f64;
        let sd = (pr * (1.0 - pr) / trials as f64).sqrt();
        assert!((f - pr).abs() <= 5.0 * sd + 1e-9, "index {i}: {f} vs {pr}");
    }
    // Utility: Pr[q <= OPT - (2/alpha)(ln|H| + t)] <= e^-t.
    let n = qualities.len() as f64;
    for t in [0.5f64, 1.0, 2.0, 3.0] {
        let cut = 40.0 - 2.0 / alpha * (n.ln() + t);
        let exact: f64 = qualities.iter().zip(&probs).filter(|(&q, _)| q as f64 <= cut).map(|(_, p)| p).sum();
        assert!(exact <= (-t).exp(), "t={t}: {exact}");
    }
}

#[test]
fn laplace_tail_matches_sampling() {
    let b = 2.0;
    let trials = 200_000;
    let mut rng = rng_stream(11, 0);
    let draws: Vec<f64> = (0..trials).map(|_| laplace_sample(b, &mut rng).unwrap()).collect();
    for x in [0.5, 1.0, 3.0, 6.0] {
        let f = draws.iter().filter(|&&v| v > x).count() as f64 / trials as f64;
        let pr = laplace_tail(b, x);
        assert!((pr - 0.5 * (-x / b).exp()).abs() < 1e-12);
        let sd = (pr * (1.0 - pr) / trials as f64).sqrt();
        assert!((f - pr).abs() <= 5.0 * sd, "x={x}: {f} vs {pr}");
    }
}
