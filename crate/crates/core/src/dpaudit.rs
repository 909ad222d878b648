//! Checking `(alpha, beta)`-differential privacy on given neighboring inputs.
//!
//! A mechanism maps an input to a distribution over outputs, identified by a
//! canonical string (its bin). Exact audits read closed-form distributions;
//! statistical audits sample and compare Clopper-Pearson intervals.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::dplearn::{
    em_probabilities, freq_and_instability, laplace_sample, line_basic_learner, line_overall_learner,
    release_distribution, Hypothesis, LabeledSample, LineLearnerConfig, ReplayOracle,
};
use crate::error::{Error, Result};
use crate::stats::{clopper_pearson, rng_stream};

/// Slack for floating-point comparisons in exact audits.
pub const EXACT_TOL: f64 = 1e-9;
/// Family-wise confidence of a statistical audit.
pub const MC_CONFIDENCE: f64 = 0.99;

const MC_SHARD: u64 = 4096;

/// A randomized map from inputs to binned outputs.
pub trait Mechanism: Sync {
    type Input: Sync;

    /// Closed-form output distribution, if the mechanism exposes one.
    fn distribution(&self, _input: &Self::Input) -> Option<Result<BTreeMap<String, f64>>> {
        None
    }

    fn sample(&self, input: &Self::Input, rng: &mut dyn RngCore) -> Result<String>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// One output event `T` compared between the two inputs of a pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventAudit {
    /// Output bins making up the event.
    pub outputs: Vec<String>,
    /// `Pr[A(S) in T]` (point estimate in Monte-Carlo mode).
    pub p: f64,
    pub p_neighbor: f64,
    pub ratio: f64,
    /// `max(0, p - e^alpha * p_neighbor)`.
    pub slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 4]>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairAudit {
    pub pair: usize,
    /// Largest `Pr[A(S) = o] / Pr[A(S') = o]` over outputs and both orders.
    pub max_ratio: f64,
    /// Least `beta` for which the pair satisfies the guarantee at this `alpha`.
    pub delta_needed: f64,
    pub events: Vec<EventAudit>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub mode: &'static str,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub max_ratio: f64,
    pub delta_needed: f64,
    pub pairs: Vec<PairAudit>,
    pub verdict: Verdict,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Pass => {}
        }
    }
    out
}

/// Audits `mech` on every pair. Exact mode needs closed-form distributions.
pub fn audit<M: Mechanism>(
    mech: &M,
    neighbors: &[(M::Input, M::Input)],
    alpha: f64,
    beta: f64,
    mode: AuditMode,
) -> Result<AuditReport> {
    if !(alpha >= 0.0) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("need alpha >= 0 and beta in [0, 1], got ({alpha}, {beta})")));
    }
    if neighbors.is_empty() {
        return Err(Error::InvalidParameter("no neighbor pairs".into()));
    }
    let (pairs, trials, seed) = match mode {
        AuditMode::Exact => {
            let pairs = neighbors
                .iter()
                .enumerate()
                .map(|(i, (s, t))| {
                    let missing = || Error::Precondition("mechanism exposes no output distribution".into());
                    let p = mech.distribution(s).ok_or_else(missing)??;
                    let pn = mech.distribution(t).ok_or_else(missing)??;
                    Ok(exact_pair(i, &p, &pn, alpha, beta))
                })
                .collect::<Result<Vec<_>>>()?;
            (pairs, None, None)
        }
        AuditMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("zero trials".into()));
            }
            let mut pairs = Vec::with_capacity(neighbors.len());
            for (i, (s, t)) in neighbors.iter().enumerate() {
                let stream = 2 * i as u64;
                let p = sample_counts(mech, s, trials, seed, stream)?;
                let pn = sample_counts(mech, t, trials, seed, stream + 1)?;
                pairs.push((i, p, pn));
            }
            let tests: usize = pairs.iter().map(|(_, p, pn)| event_count(p, pn)).sum();
            let conf = 1.0 - (1.0 - MC_CONFIDENCE) / tests.max(1) as f64;
            let pairs = pairs
                .into_iter()
                .map(|(i, p, pn)| mc_pair(i, &p, &pn, trials, alpha, beta, conf))
                .collect();
            (pairs, Some(trials), Some(seed))
        }
    };
    Ok(AuditReport {
        mode: if trials.is_some() { "monte_carlo" } else { "exact" },
        alpha,
        beta,
        trials,
        seed,
        max_ratio: pairs.iter().map(|p| p.max_ratio).fold(1.0, f64::max),
        delta_needed: pairs.iter().map(|p| p.delta_needed).fold(0.0, f64::max),
        verdict: combine(pairs.iter().map(|p| p.verdict)),
        pairs,
    })
}

fn union_keys<V>(a: &BTreeMap<String, V>, b: &BTreeMap<String, V>) -> Vec<String> {
    let mut keys: Vec<String> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Worst event for one direction: all outputs where `p > e^alpha p'`.
fn worst_event(keys: &[String], p: &dyn Fn(&str) -> f64, pn: &dyn Fn(&str) -> f64, e: f64) -> Vec<String> {
    keys.iter().filter(|k| p(k) > e * pn(k)).cloned().collect()
}

fn exact_pair(
    pair: usize,
    p: &BTreeMap<String, f64>,
    pn: &BTreeMap<String, f64>,
    alpha: f64,
    beta: f64,
) -> PairAudit {
    let e = alpha.exp();
    let keys = union_keys(p, pn);
    let get = |m: &BTreeMap<String, f64>, k: &str| m.get(k).copied().unwrap_or(0.0);
    let fwd = |k: &str| get(p, k);
    let bwd = |k: &str| get(pn, k);
    let mut max_ratio: f64 = 1.0;
    for k in &keys {
        max_ratio = max_ratio.max(ratio(fwd(k), bwd(k))).max(ratio(bwd(k), fwd(k)));
    }
    let verdict_of = |slack: f64| if slack <= beta + EXACT_TOL { Verdict::Pass } else { Verdict::Fail };
    let mut events: Vec<EventAudit> = keys
        .iter()
        .map(|k| {
            let (pa, pb) = (fwd(k), bwd(k));
            let slack = (pa - e * pb).max(pb - e * pa).max(0.0);
            EventAudit {
                outputs: vec![k.clone()],
                p: pa,
                p_neighbor: pb,
                ratio: ratio(pa, pb).max(ratio(pb, pa)),
                slack,
                ci: None,
                verdict: verdict_of(slack),
            }
        })
        .collect();
    let mut delta_needed: f64 = 0.0;
    for (a, b) in [(&fwd as &dyn Fn(&str) -> f64, &bwd as &dyn Fn(&str) -> f64), (&bwd, &fwd)] {
        let t = worst_event(&keys, a, b, e);
        if t.is_empty() {
            continue;
        }
        let pa: f64 = t.iter().map(|k| a(k)).sum();
        let pb: f64 = t.iter().map(|k| b(k)).sum();
        let slack = (pa - e * pb).max(0.0);
        delta_needed = delta_needed.max(slack);
        events.push(EventAudit {
            outputs: t,
            p: pa,
            p_neighbor: pb,
            ratio: ratio(pa, pb),
            slack,
            ci: None,
            verdict: verdict_of(slack),
        });
    }
    PairAudit {
        pair,
        max_ratio,
        delta_needed,
        verdict: combine(events.iter().map(|ev| ev.verdict)),
        events,
    }
}

fn sample_counts<M: Mechanism>(
    mech: &M,
    input: &M::Input,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<BTreeMap<String, u64>> {
    let shards = trials.div_ceil(MC_SHARD);
    let parts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_stream(seed, stream << 32 | s);
            let n = MC_SHARD.min(trials - s * MC_SHARD);
            let mut counts = BTreeMap::new();
            for _ in 0..n {
                *counts.entry(mech.sample(input, &mut rng)?).or_insert(0u64) += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *total.entry(k).or_insert(0) += v;
        }
    }
    Ok(total)
}

fn event_count(p: &BTreeMap<String, u64>, pn: &BTreeMap<String, u64>) -> usize {
    union_keys(p, pn).len() + 2
}

/// Singleton events plus the empirically worst set in each direction. An event
/// fails when even the favorable ends of the intervals violate the guarantee,
/// and passes when the unfavorable ends satisfy it.
fn mc_pair(
    pair: usize,
    p: &BTreeMap<String, u64>,
    pn: &BTreeMap<String, u64>,
    trials: u64,
    alpha: f64,
    beta: f64,
    conf: f64,
) -> PairAudit {
    let e = alpha.exp();
    let keys = union_keys(p, pn);
    let n = trials as f64;
    let count = |m: &BTreeMap<String, u64>, set: &[String]| set.iter().map(|k| m.get(k).copied().unwrap_or(0)).sum::<u64>();
    let fwd = |k: &str| p.get(k).copied().unwrap_or(0) as f64 / n;
    let bwd = |k: &str| pn.get(k).copied().unwrap_or(0) as f64 / n;

    let mut candidates: Vec<(Vec<String>, bool)> = Vec::new();
    for k in &keys {
        candidates.push((vec![k.clone()], false));
        candidates.push((vec![k.clone()], true));
    }
    candidates.push((worst_event(&keys, &fwd, &bwd, e), false));
    candidates.push((worst_event(&keys, &bwd, &fwd, e), true));

    let mut events = Vec::new();
    let mut max_ratio: f64 = 1.0;
    let mut delta_needed: f64 = 0.0;
    for (set, reversed) in candidates {
        if set.is_empty() {
            continue;
        }
        let (a, b) = if reversed { (pn, p) } else { (p, pn) };
        let (ca, cb) = (count(a, &set), count(b, &set));
        let ia = clopper_pearson(ca, trials, conf);
        let ib = clopper_pearson(cb, trials, conf);
        let (pa, pb) = (ca as f64 / n, cb as f64 / n);
        let slack = (pa - e * pb).max(0.0);
        max_ratio = max_ratio.max(ratio(pa, pb));
        delta_needed = delta_needed.max(slack);
        let verdict = if ia.low > e * ib.high + beta {
            Verdict::Fail
        } else if ia.high <= e * ib.low + beta {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        events.push(EventAudit {
            outputs: set,
            p: pa,
            p_neighbor: pb,
            ratio: ratio(pa, pb),
            slack,
            ci: Some([ia.low, ia.high, ib.low, ib.high]),
            verdict,
        });
    }
    PairAudit {
        pair,
        max_ratio,
        delta_needed,
        verdict: combine(events.iter().map(|ev| ev.verdict)),
        events,
    }
}

fn sample_bin(dist: &BTreeMap<String, f64>, rng: &mut dyn RngCore) -> String {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (k, &pr) in dist {
        acc += pr;
        if pr > 0.0 {
            last = Some(k);
        }
        if u < acc {
            return k.clone();
        }
    }
    last.cloned().unwrap_or_default()
}

fn bin(h: &Hypothesis) -> String {
    serde_json::to_string(h).expect("hypotheses serialize")
}

/// Ignores its input.
pub struct ConstantMechanism;

impl Mechanism for ConstantMechanism {
    type Input = Vec<LabeledSample>;

    fn distribution(&self, _input: &Self::Input) -> Option<Result<BTreeMap<String, f64>>> {
        Some(Ok(BTreeMap::from([("const".to_string(), 1.0)])))
    }

    fn sample(&self, _input: &Self::Input, _rng: &mut dyn RngCore) -> Result<String> {
        Ok("const".into())
    }
}

/// Exponential mechanism on a quality vector; outputs the chosen index.
pub struct EmMechanism {
    pub alpha: f64,
}

impl Mechanism for EmMechanism {
    type Input = Vec<i64>;

    fn distribution(&self, q: &Vec<i64>) -> Option<Result<BTreeMap<String, f64>>> {
        Some(em_probabilities(q, self.alpha).map(|p| p.into_iter().enumerate().map(|(i, x)| (i.to_string(), x)).collect()))
    }

    fn sample(&self, q: &Vec<i64>, rng: &mut dyn RngCore) -> Result<String> {
        let dist = em_probabilities(q, self.alpha)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, pr) in dist.iter().enumerate() {
            acc += pr;
            if u < acc {
                return Ok(i.to_string());
            }
        }
        Ok((dist.len() - 1).to_string())
    }
}

/// Reports a bit, flipped with probability `flip`.
pub struct RandomizedResponse {
    pub flip: f64,
}

impl Mechanism for RandomizedResponse {
    type Input = bool;

    fn distribution(&self, bit: &bool) -> Option<Result<BTreeMap<String, f64>>> {
        let keep = 1.0 - self.flip;
        let (p1, p0) = if *bit { (keep, self.flip) } else { (self.flip, keep) };
        Some(Ok(BTreeMap::from([("0".to_string(), p0), ("1".to_string(), p1)])))
    }

    fn sample(&self, bit: &bool, rng: &mut dyn RngCore) -> Result<String> {
        let flipped = rng.gen::<f64>() < self.flip;
        Ok(if *bit != flipped { "1" } else { "0" }.into())
    }
}

/// Publishes its input bit. Not private at any finite `alpha`.
pub struct LeakyMechanism;

impl Mechanism for LeakyMechanism {
    type Input = bool;

    fn distribution(&self, bit: &bool) -> Option<Result<BTreeMap<String, f64>>> {
        Some(Ok(BTreeMap::from([(u8::from(*bit).to_string(), 1.0)])))
    }

    fn sample(&self, bit: &bool, _rng: &mut dyn RngCore) -> Result<String> {
        Ok(u8::from(*bit).to_string())
    }
}

/// The release step of the line learner on a given winner and instability `c`.
pub struct LineReleaseMechanism {
    pub cfg: LineLearnerConfig,
}

impl Mechanism for LineReleaseMechanism {
    type Input = (Hypothesis, usize);

    fn distribution(&self, (h, c): &(Hypothesis, usize)) -> Option<Result<BTreeMap<String, f64>>> {
        let mut out = BTreeMap::new();
        for (o, pr) in release_distribution(&self.cfg, h, *c) {
            *out.entry(bin(&o)).or_insert(0.0) += pr;
        }
        Some(Ok(out))
    }

    fn sample(&self, (h, c): &(Hypothesis, usize), rng: &mut dyn RngCore) -> Result<String> {
        let noise = laplace_sample(1.0 / self.cfg.alpha, rng)?;
        let out = if *c as f64 + noise > self.cfg.threshold() { h.clone() } else { Hypothesis::Zero };
        Ok(bin(&out))
    }
}

/// The full line learner run on a fixed dataset of `2^k_max * l` samples.
pub struct LineLearnerMechanism {
    pub cfg: LineLearnerConfig,
}

impl LineLearnerMechanism {
    pub fn dataset_len(&self) -> usize {
        (1usize << self.cfg.k_range().1) * self.cfg.ell()
    }
}

impl Mechanism for LineLearnerMechanism {
    type Input = Vec<LabeledSample>;

    /// Average over `k` of the release distribution; the basic learner is
    /// deterministic once `t` is fixed.
    fn distribution(&self, s: &Vec<LabeledSample>) -> Option<Result<BTreeMap<String, f64>>> {
        let run = || -> Result<BTreeMap<String, f64>> {
            self.cfg.validate()?;
            let (lo, hi) = self.cfg.k_range();
            if s.len() < self.dataset_len() {
                return Err(Error::OracleExhausted(s.len()));
            }
            let ell = self.cfg.ell();
            let w = 1.0 / (hi - lo + 1) as f64;
            let mut out = BTreeMap::new();
            for k in lo..=hi {
                let t = 1usize << k;
                let hyps = (0..ell)
                    .map(|j| line_basic_learner(&s[j * t..(j + 1) * t], self.cfg.p).map(|o| o.hypothesis))
                    .collect::<Result<Vec<_>>>()?;
                let (h_bar, c) = freq_and_instability(&hyps)?;
                for (o, pr) in release_distribution(&self.cfg, &h_bar, c) {
                    *out.entry(bin(&o)).or_insert(0.0) += w * pr;
                }
            }
            Ok(out)
        };
        Some(run())
    }

    fn sample(&self, s: &Vec<LabeledSample>, rng: &mut dyn RngCore) -> Result<String> {
        let mut oracle = ReplayOracle::new(s.clone());
        let out = line_overall_learner(&self.cfg, &mut oracle, rng)?;
        Ok(bin(&out.hypothesis))
    }
}

/// A mechanism whose exact distribution is known but is audited by sampling it.
pub struct Sampled<'a, M>(pub &'a M);

impl<M: Mechanism> Mechanism for Sampled<'_, M> {
    type Input = M::Input;

    fn sample(&self, input: &M::Input, rng: &mut dyn RngCore) -> Result<String> {
        match self.0.distribution(input) {
            Some(d) => Ok(sample_bin(&d?, rng)),
            None => self.0.sample(input, rng),
        }
    }
}
