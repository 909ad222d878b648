//! Private learners and the mechanisms they are built from.
//!
//! Samples are indices into a class's domain. For `Line_p` the point
//! `(x, y)` has index `x * p + y`, matching [`crate::concepts::make_builtin`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::concepts::{disagreement, is_prime, vc_dimension, xor_class, ConceptClass};
use crate::distribution::{FiniteDistribution, PairDistribution, Sampler};
use crate::error::{Error, Result};
use crate::rational::{q, to_f64, Q};
use crate::repdim::{min_cover, ProbRepresentation};
use crate::stats::{clopper_pearson, rng_stream, Interval};

/// Upper limit on `t * l` for one run of the line learner.
pub const LINE_SAMPLE_BUDGET: u64 = 1 << 32;

/// Output of a learner. Lines and points live on `Z_p^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    Zero,
    Point { x: u64, y: u64, p: u64 },
    Line { a: u64, b: u64, p: u64 },
    Table { bits: BitRow },
}

impl Hypothesis {
    pub fn point(x: u64, y: u64, p: u64) -> Self {
        Hypothesis::Point { x: x % p, y: y % p, p }
    }

    pub fn line(a: u64, b: u64, p: u64) -> Self {
        Hypothesis::Line { a: a % p, b: b % p, p }
    }

    pub fn eval(&self, i: usize) -> bool {
        match self {
            Hypothesis::Zero => false,
            Hypothesis::Point { x, y, p } => i as u64 == x * p + y,
            Hypothesis::Line { a, b, p } => {
                let (x, y) = (i as u64 / p, i as u64 % p);
                x < *p && (a * x + b) % p == y
            }
            Hypothesis::Table { bits } => bits.get(i),
        }
    }

    pub fn to_row(&self, n: usize) -> BitRow {
        BitRow::from_fn(n, |i| self.eval(i))
    }

    fn rank(&self) -> u8 {
        match self {
            Hypothesis::Zero => 0,
            Hypothesis::Point { .. } => 1,
            Hypothesis::Line { .. } => 2,
            Hypothesis::Table { .. } => 3,
        }
    }
}

/// zero < points < lines < tables; lexicographic within each kind.
impl Ord for Hypothesis {
    fn cmp(&self, other: &Self) -> Ordering {
        use Hypothesis::*;
        match (self, other) {
            (Point { x, y, p }, Point { x: x2, y: y2, p: p2 }) => (x, y, p).cmp(&(x2, y2, p2)),
            (Line { a, b, p }, Line { a: a2, b: b2, p: p2 }) => (a, b, p).cmp(&(a2, b2, p2)),
            (Table { bits }, Table { bits: other }) => bits.iter().cmp(other.iter()).then(bits.len().cmp(&other.len())),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Hypothesis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Zero => write!(f, "zero"),
            Hypothesis::Point { x, y, .. } => write!(f, "point({x},{y})"),
            Hypothesis::Line { a, b, .. } => write!(f, "line({a},{b})"),
            Hypothesis::Table { bits } => write!(f, "table({bits})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSample {
    pub point: usize,
    pub label: bool,
}

impl LabeledSample {
    pub fn new(point: usize, label: bool) -> Self {
        LabeledSample { point, label }
    }

    /// The sample at `(x, y)` on `Z_p^2`.
    pub fn at(x: u64, y: u64, p: u64, label: bool) -> Self {
        LabeledSample {
            point: ((x % p) * p + y % p) as usize,
            label,
        }
    }

    pub fn coords(&self, p: u64) -> (u64, u64) {
        (self.point as u64 / p, self.point as u64 % p)
    }
}

/// Two datasets are neighbors when they have equal length and differ in
/// exactly one labeled example.
pub fn are_neighbors(s: &[LabeledSample], t: &[LabeledSample]) -> bool {
    s.len() == t.len() && s.iter().zip(t).filter(|(a, b)| a != b).count() == 1
}

/// Source of i.i.d. labeled examples.
pub trait SampleOracle {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<LabeledSample>;

    fn draw_n(&mut self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<LabeledSample>> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

#[derive(Clone, Debug)]
enum LabelRule {
    Concept(BitRow),
    /// Sampler over `(point, label)` pairs flattened as `2 * point + label`.
    Joint,
}

/// Draws points from a distribution and labels them by a target concept or
/// jointly from a distribution over `(point, label)`.
#[derive(Clone, Debug)]
pub struct DistOracle {
    sampler: Sampler,
    rule: LabelRule,
    limit: Option<usize>,
    drawn: usize,
}

impl DistOracle {
    pub fn realizable(d: &FiniteDistribution, target: &BitRow) -> Result<Self> {
        if d.len() != target.len() {
            return Err(Error::LengthMismatch {
                expected: d.len(),
                actual: target.len(),
            });
        }
        Ok(DistOracle {
            sampler: d.sampler(),
            rule: LabelRule::Concept(target.clone()),
            limit: None,
            drawn: 0,
        })
    }

    /// `joint` has one row per point and two columns (label 0, label 1).
    pub fn agnostic(joint: &PairDistribution) -> Result<Self> {
        if joint.cols != 2 {
            return Err(Error::InvalidParameter("joint label distribution needs two columns".into()));
        }
        Ok(DistOracle {
            sampler: joint.flat().sampler(),
            rule: LabelRule::Joint,
            limit: None,
            drawn: 0,
        })
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn drawn(&self) -> usize {
        self.drawn
    }
}

impl SampleOracle for DistOracle {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<LabeledSample> {
        if self.limit.is_some_and(|l| self.drawn >= l) {
            return Err(Error::OracleExhausted(self.drawn));
        }
        self.drawn += 1;
        let k = self.sampler.sample(rng);
        Ok(match &self.rule {
            LabelRule::Concept(target) => LabeledSample::new(k, target.get(k)),
            LabelRule::Joint => LabeledSample::new(k / 2, k % 2 == 1),
        })
    }
}

/// Hands out a fixed sequence, then reports exhaustion.
#[derive(Clone, Debug)]
pub struct ReplayOracle {
    samples: Vec<LabeledSample>,
    pos: usize,
}

impl ReplayOracle {
    pub fn new(samples: Vec<LabeledSample>) -> Self {
        ReplayOracle { samples, pos: 0 }
    }
}

impl SampleOracle for ReplayOracle {
    fn draw(&mut self, _rng: &mut dyn RngCore) -> Result<LabeledSample> {
        let s = self.samples.get(self.pos).copied().ok_or(Error::OracleExhausted(self.pos))?;
        self.pos += 1;
        Ok(s)
    }
}

/// Laplace draw with scale `b` from a uniform `u` in `(-1/2, 1/2)`.
pub fn laplace_from_uniform(b: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Draw from the Laplace distribution with density `e^{-|x|/b} / (2b)`.
pub fn laplace_sample(b: f64, rng: &mut dyn RngCore) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("Laplace scale must be positive, got {b}")));
    }
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        if u > -0.5 {
            return Ok(laplace_from_uniform(b, u));
        }
    }
}

/// `Pr[Lap(b) > x]`.
pub fn laplace_tail(b: f64, x: f64) -> f64 {
    if x >= 0.0 {
        0.5 * (-x / b).exp()
    } else {
        1.0 - 0.5 * (x / b).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmOutcome {
    pub index: usize,
    pub qualities: Vec<i64>,
    pub probs: Vec<f64>,
}

/// Selection probabilities `∝ exp(alpha * q / 2)`, shifted by the max quality.
pub fn em_probabilities(qualities: &[i64], alpha: f64) -> Result<Vec<f64>> {
    if qualities.is_empty() {
        return Err(Error::InvalidParameter("exponential mechanism over an empty set".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("privacy parameter must be non-negative, got {alpha}")));
    }
    let top = *qualities.iter().max().expect("nonempty");
    let w: Vec<f64> = qualities
        .iter()
        .map(|&qv| (alpha * (qv - top) as f64 / 2.0).exp())
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pr) in probs.iter().enumerate() {
        acc += pr;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&pr| pr > 0.0).unwrap_or(0)
}

/// Samples an element of `h_set` by the exponential mechanism on quality `quality(h, s)`.
pub fn exponential_mechanism<H>(
    h_set: &[H],
    s: &[LabeledSample],
    quality: impl Fn(&H, &[LabeledSample]) -> i64,
    alpha: f64,
    rng: &mut dyn RngCore,
) -> Result<EmOutcome> {
    let qualities: Vec<i64> = h_set.iter().map(|h| quality(h, s)).collect();
    let probs = em_probabilities(&qualities, alpha)?;
    let index = sample_index(&probs, rng);
    Ok(EmOutcome { index, qualities, probs })
}

/// Number of samples a hypothesis labels correctly.
pub fn match_count(h: &Hypothesis, s: &[LabeledSample]) -> i64 {
    s.iter().filter(|e| h.eval(e.point) == e.label).count() as i64
}

pub fn row_match_count(h: &BitRow, s: &[LabeledSample]) -> i64 {
    s.iter().filter(|e| h.get(e.point) == e.label).count() as i64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrdimOutcome {
    /// Index of the sampled family in the representation's support.
    pub family: usize,
    pub hypothesis: BitRow,
    pub em: EmOutcome,
}

/// Samples `H` from `rep`, then picks from `H` with the exponential mechanism
/// on `n` fresh samples.
pub fn prdim_learner(
    rep: &ProbRepresentation,
    oracle: &mut dyn SampleOracle,
    n: usize,
    alpha: f64,
    rng: &mut dyn RngCore,
) -> Result<PrdimOutcome> {
    if rep.support.is_empty() {
        return Err(Error::InvalidParameter("representation has empty support".into()));
    }
    let family = rep.probs.sampler().sample(rng);
    let hyps = &rep.support[family].hypotheses;
    let s = oracle.draw_n(n, rng)?;
    let em = exponential_mechanism(hyps, &s, row_match_count, alpha, rng)?;
    Ok(PrdimOutcome {
        family,
        hypothesis: hyps[em.index].clone(),
        em,
    })
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = (base % p) as u128;
    let m = p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

fn inv_mod(x: u64, p: u64) -> u64 {
    pow_mod(x, p - 2, p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasicOutcome {
    pub hypothesis: Hypothesis,
    /// False when the positives cannot all lie on one non-vertical line.
    pub realizable: bool,
}

/// Line through two positives, a point function for one, zero otherwise.
pub fn line_basic_learner(s: &[LabeledSample], p: u64) -> Result<BasicOutcome> {
    check_prime(p)?;
    let n = (p * p) as usize;
    let mut positives: Vec<(u64, u64)> = Vec::new();
    for e in s.iter().filter(|e| e.label) {
        if e.point >= n {
            return Err(Error::InvalidParameter(format!("sample index {} outside Z_{p}^2", e.point)));
        }
        let xy = e.coords(p);
        if !positives.contains(&xy) {
            positives.push(xy);
        }
    }
    let Some(&(x1, y1)) = positives.first() else {
        return Ok(BasicOutcome {
            hypothesis: Hypothesis::Zero,
            realizable: true,
        });
    };
    if positives.len() == 1 {
        return Ok(BasicOutcome {
            hypothesis: Hypothesis::point(x1, y1, p),
            realizable: true,
        });
    }
    // Pair the first positive with the first later one at a different x.
    let Some(&(x2, y2)) = positives[1..].iter().find(|(x, _)| *x != x1) else {
        return Ok(BasicOutcome {
            hypothesis: Hypothesis::point(x1, y1, p),
            realizable: false,
        });
    };
    let a = (y2 + p - y1) % p * inv_mod((x2 + p - x1) % p, p) % p;
    let b = (y1 + p - a * x1 % p) % p;
    let h = Hypothesis::line(a, b, p);
    let realizable = positives.iter().all(|&(x, y)| (a * x + b) % p == y);
    Ok(BasicOutcome { hypothesis: h, realizable })
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p >= 1 << 31 {
        return Err(Error::cap("line modulus p", 1u64 << 31, p));
    }
    Ok(())
}

/// Most frequent hypothesis (ties to the smallest) and the least number of
/// entries that must change for the winner to change.
///
/// Moving one vote from the winner `w` to a challenger `g` closes the gap by
/// two, and `g` wins a tie exactly when `g < w`. Absent challengers count as
/// zero votes; one smaller than `w` exists unless `w` is `Zero`.
pub fn freq_and_instability(list: &[Hypothesis]) -> Result<(Hypothesis, usize)> {
    let mut counts: BTreeMap<&Hypothesis, i64> = BTreeMap::new();
    for h in list {
        *counts.entry(h).or_default() += 1;
    }
    let (winner, top) = counts
        .iter()
        .fold(None::<(&Hypothesis, i64)>, |best, (&h, &n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((h, n)),
        })
        .ok_or_else(|| Error::Precondition("empty hypothesis list".into()))?;
    let absent = if *winner == Hypothesis::Zero { -1 } else { 0 };
    let challenger = counts
        .iter()
        .filter(|(h, _)| **h != winner)
        .map(|(&h, &n)| if h < winner { n } else { n - 1 })
        .fold(absent, i64::max);
    let c = ((top - challenger + 1) / 2).max(1);
    Ok((winner.clone(), c as usize))
}

/// Parameters of the line learners. Overrides replace the `6/delta` range
/// width and the subsample count; outputs that use them are flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineLearnerConfig {
    pub p: u64,
    pub eps: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub range_width_override: Option<u32>,
    #[serde(default)]
    pub ell_override: Option<usize>,
}

impl LineLearnerConfig {
    pub fn new(p: u64, eps: f64, delta: f64, alpha: f64, beta: f64) -> Self {
        LineLearnerConfig {
            p,
            eps,
            delta,
            alpha,
            beta,
            range_width_override: None,
            ell_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_prime(self.p)?;
        for (name, v) in [("eps", self.eps), ("delta", self.delta), ("beta", self.beta)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1/2), got {v}")));
            }
        }
        // Privacy is meaningful for any positive alpha; the accuracy argument
        // does not need alpha < 1/2.
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.ell_override == Some(0) {
            return Err(Error::InvalidParameter("ell override must be positive".into()));
        }
        Ok(())
    }

    /// Inclusive range `ceil(L) ..= ceil(L) + ceil(R)` for `k = log2 t`.
    pub fn k_range(&self) -> (u32, u32) {
        let l = ((1.5f64).ln() / self.eps).log2().ceil().max(0.0) as u32;
        let w = match self.range_width_override {
            Some(w) => w,
            None => (6.0 / self.delta).ceil() as u32,
        };
        (l, l + w)
    }

    pub fn ell(&self) -> usize {
        if let Some(l) = self.ell_override {
            return l;
        }
        let a = 12.0 / self.alpha * (2.0 / (self.beta * self.delta)).ln() + 13.0;
        let b = 72.0 * (4.0 / self.delta).ln();
        a.max(b).ceil() as usize
    }

    /// Release threshold `(1/alpha) ln(1/(2 beta)) + 1`.
    pub fn threshold(&self) -> f64 {
        (1.0 / (2.0 * self.beta)).ln() / self.alpha + 1.0
    }

    pub fn deviation_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        if let Some(w) = self.range_width_override {
            flags.push(format!("non-paper-constants: range width {w} replaces 6/delta"));
        }
        if let Some(l) = self.ell_override {
            flags.push(format!("non-paper-constants: ell {l} replaces the subsample-count formula"));
        }
        flags
    }
}

/// `Pr[c + Lap(1/alpha) > threshold]`.
pub fn release_probability(cfg: &LineLearnerConfig, c: usize) -> f64 {
    laplace_tail(1.0 / cfg.alpha, cfg.threshold() - c as f64)
}

/// Output distribution of the release step given the winner and its instability.
pub fn release_distribution(cfg: &LineLearnerConfig, h_bar: &Hypothesis, c: usize) -> Vec<(Hypothesis, f64)> {
    let pr = release_probability(cfg, c);
    if *h_bar == Hypothesis::Zero {
        return vec![(Hypothesis::Zero, 1.0)];
    }
    vec![(h_bar.clone(), pr), (Hypothesis::Zero, 1.0 - pr)]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverallOutcome {
    pub hypothesis: Hypothesis,
    pub k: u32,
    pub t: u64,
    pub ell: usize,
    pub n: u64,
    pub h_bar: Hypothesis,
    pub c: usize,
    pub noise: f64,
    pub released: bool,
    pub release_probability: f64,
    pub non_realizable_runs: usize,
}

/// Learner with random subsample size and a noisy stability test on the
/// most frequent basic-learner output.
pub fn line_overall_learner(
    cfg: &LineLearnerConfig,
    oracle: &mut dyn SampleOracle,
    rng: &mut dyn RngCore,
) -> Result<OverallOutcome> {
    cfg.validate()?;
    let (lo, hi) = cfg.k_range();
    let ell = cfg.ell();
    if hi >= 63 || (1u128 << hi) * ell as u128 > LINE_SAMPLE_BUDGET as u128 {
        return Err(Error::cap(
            "samples per line-learner run",
            LINE_SAMPLE_BUDGET,
            (1u128 << hi.min(100)).saturating_mul(ell as u128),
        ));
    }
    let k = rng.gen_range(lo..=hi);
    let t = 1u64 << k;
    let mut hyps = Vec::with_capacity(ell);
    let mut non_realizable_runs = 0;
    for _ in 0..ell {
        let s = oracle.draw_n(t as usize, rng)?;
        let out = line_basic_learner(&s, cfg.p)?;
        non_realizable_runs += usize::from(!out.realizable);
        hyps.push(out.hypothesis);
    }
    let (h_bar, c) = freq_and_instability(&hyps)?;
    let noise = laplace_sample(1.0 / cfg.alpha, rng)?;
    let released = c as f64 + noise > cfg.threshold();
    Ok(OverallOutcome {
        hypothesis: if released { h_bar.clone() } else { Hypothesis::Zero },
        k,
        t,
        ell,
        n: t * ell as u64,
        release_probability: release_probability(cfg, c),
        h_bar,
        c,
        noise,
        released,
        non_realizable_runs,
    })
}

/// Number of independent low-confidence runs, `ceil(ln(2/delta) / ln(4/3))`.
pub fn boost_runs(delta: f64) -> usize {
    ((2.0 / delta).ln() / (4.0f64 / 3.0).ln()).ceil() as usize
}

/// Fresh samples for the final selection, `ceil(16/(eps alpha) ln(4k/delta))`.
pub fn boost_fresh_samples(eps: f64, alpha: f64, delta: f64, k: usize) -> usize {
    (16.0 / (eps * alpha) * (4.0 * k as f64 / delta).ln()).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoostedOutcome {
    pub hypothesis: Hypothesis,
    pub candidates: Vec<Hypothesis>,
    pub runs: usize,
    pub m: usize,
    pub em: EmOutcome,
    pub deviation_flags: Vec<String>,
}

/// Runs the overall learner at `(eps/4, 1/4)` on disjoint samples and picks
/// among the results with the exponential mechanism.
pub fn line_boosted_learner(
    cfg: &LineLearnerConfig,
    oracle: &mut dyn SampleOracle,
    rng: &mut dyn RngCore,
) -> Result<BoostedOutcome> {
    cfg.validate()?;
    let inner = LineLearnerConfig {
        eps: cfg.eps / 4.0,
        delta: 0.25,
        ..cfg.clone()
    };
    let runs = boost_runs(cfg.delta);
    let m = boost_fresh_samples(cfg.eps, cfg.alpha, cfg.delta, runs);
    let candidates = (0..runs)
        .map(|_| line_overall_learner(&inner, oracle, rng).map(|o| o.hypothesis))
        .collect::<Result<Vec<_>>>()?;
    let s = oracle.draw_n(m, rng)?;
    let em = exponential_mechanism(&candidates, &s, match_count, cfg.alpha, rng)?;
    Ok(BoostedOutcome {
        hypothesis: candidates[em.index].clone(),
        candidates,
        runs,
        m,
        em,
        deviation_flags: cfg.deviation_flags(),
    })
}

/// Probabilities that `t` samples contain no positive, exactly one distinct
/// positive point, or two distinct ones, with the three lower bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub r: f64,
    pub q: f64,
    pub t: u64,
    pub none: f64,
    pub one: f64,
    pub two: f64,
    pub none_bound: f64,
    pub one_bound: f64,
    pub two_bound: f64,
    pub none_ok: bool,
    pub one_ok: bool,
    pub two_ok: bool,
    pub bounds_ok: bool,
}

const STABILITY_TOL: f64 = 1e-12;

/// `atoms` are the masses of individual positive points; any positive mass
/// `r - sum(atoms)` not covered by atoms is treated as diffuse (no repeats).
pub fn stability_probs(r: f64, atoms: &[f64], t: u64) -> Result<StabilityReport> {
    if !(0.0..=1.0).contains(&r) || atoms.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::InvalidParameter("masses must lie in [0, 1]".into()));
    }
    let covered: f64 = atoms.iter().sum();
    if covered > r + STABILITY_TOL {
        return Err(Error::InvalidParameter(format!("atoms sum to {covered} > r = {r}")));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    let tf = t as f64;
    let base = (1.0 - r).powf(tf);
    let diffuse = (r - covered).max(0.0);
    let q = atoms.iter().copied().fold(0.0, f64::max);
    let none = base;
    let one = atoms.iter().map(|&a| (1.0 - r + a).powf(tf) - base).sum::<f64>()
        + tf * diffuse * (1.0 - r).powf(tf - 1.0);
    let two = 1.0 - none - one;

    let none_bound = 1.0 - r * tf;
    let top_atom = (1.0 - r + q).powf(tf) - base;
    let one_bound = 1.0 - (r - q) * tf - (-r * tf).exp();
    let two_bound = (1.0 - (-r * tf / 2.0).exp()) * (1.0 - (-(r - q) * tf / 2.0).exp());
    let none_ok = none >= none_bound - STABILITY_TOL;
    let one_ok = one >= top_atom - STABILITY_TOL && top_atom >= one_bound - STABILITY_TOL;
    let two_ok = two >= two_bound - STABILITY_TOL;
    Ok(StabilityReport {
        r,
        q,
        t,
        none,
        one,
        two,
        none_bound,
        one_bound,
        two_bound,
        none_ok,
        one_ok,
        two_ok,
        bounds_ok: none_ok && one_ok && two_ok,
    })
}

/// Values of `k = log2 t` in `ks` at which none of the three events reaches 2/3.
pub fn bad_log_t_values(r: f64, atoms: &[f64], ks: std::ops::RangeInclusive<u32>) -> Result<Vec<u32>> {
    let mut bad = Vec::new();
    for k in ks {
        if k >= 63 {
            return Err(Error::cap("log2 t", 62u32, k));
        }
        let s = stability_probs(r, atoms, 1u64 << k)?;
        if s.none.max(s.one).max(s.two) < 2.0 / 3.0 {
            bad.push(k);
        }
    }
    Ok(bad)
}

/// Input distributions on `Z_p^2` used to exercise the line learners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineInput {
    Uniform,
    /// Half the mass spread evenly over the target line.
    LineHeavy,
    /// The point `(0, b)` of the target line carries about half the mass.
    PointHeavy,
}

/// Target line `y = a x + b` and the chosen input distribution on `Z_p^2`.
pub fn line_setting(p: u64, a: u64, b: u64, input: LineInput) -> Result<(BitRow, FiniteDistribution)> {
    check_prime(p)?;
    let n = (p * p) as usize;
    if n as u64 > crate::concepts::MATERIALIZE_BIT_BUDGET as u64 {
        return Err(Error::cap("points of Z_p^2", crate::concepts::MATERIALIZE_BIT_BUDGET, n as u64));
    }
    let h = Hypothesis::line(a, b, p);
    let target = h.to_row(n);
    let weights: Vec<u64> = match input {
        LineInput::Uniform => vec![1; n],
        LineInput::LineHeavy => (0..n).map(|i| if target.get(i) { p - 1 } else { 1 }).collect(),
        LineInput::PointHeavy => {
            let heavy = (b % p) as usize;
            (0..n).map(|i| if i == heavy { (n - 1) as u64 } else { 1 }).collect()
        }
    };
    Ok((target, FiniteDistribution::from_counts(weights)?))
}

/// Default sample size for selecting from `h_len` hypotheses,
/// `ceil((64/alpha) ln(16 |H|))`.
pub fn default_selection_samples(h_len: usize, alpha: f64) -> usize {
    (64.0 / alpha * (16.0 * h_len as f64).ln()).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistOutcome {
    pub hypothesis: BitRow,
    pub cover: Vec<BitRow>,
    pub cover_optimal: bool,
    pub n: usize,
    pub em: EmOutcome,
}

fn select_from_cover(
    cover: Vec<BitRow>,
    cover_optimal: bool,
    oracle: &mut dyn SampleOracle,
    n: Option<usize>,
    alpha: f64,
    rng: &mut dyn RngCore,
) -> Result<DistOutcome> {
    let n = n.unwrap_or_else(|| default_selection_samples(cover.len(), alpha));
    let s = oracle.draw_n(n, rng)?;
    let em = exponential_mechanism(&cover, &s, row_match_count, alpha, rng)?;
    Ok(DistOutcome {
        hypothesis: cover[em.index].clone(),
        cover,
        cover_optimal,
        n,
        em,
    })
}

/// Learner for a known input distribution: a minimum proper 1/8-cover under
/// `d_known`, then the exponential mechanism on `n` samples.
pub fn dist_specific_learner(
    c: &ConceptClass,
    d_known: &FiniteDistribution,
    oracle: &mut dyn SampleOracle,
    n: Option<usize>,
    alpha: f64,
    rng: &mut dyn RngCore,
) -> Result<DistOutcome> {
    let cover = min_cover(c, d_known, &q(1, 8), true, true)?;
    select_from_cover(cover.hypotheses, cover.optimal, oracle, n, alpha, rng)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelPrivateConfig {
    /// Unlabeled phase size; defaults to [`phase_one_size`].
    pub t: Option<usize>,
    /// Labeled phase size; defaults to [`default_selection_samples`].
    pub n: Option<usize>,
}

/// `16 (VC(C xor C) + 1)`.
pub fn phase_one_size(c: &ConceptClass) -> Result<usize> {
    let v = vc_dimension(&xor_class(c, c)?)?.dimension;
    Ok(16 * (v + 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelOutcome {
    pub hypothesis: BitRow,
    pub t: usize,
    pub empirical: FiniteDistribution,
    pub selection: DistOutcome,
}

/// Builds the empirical distribution from the points of `t` samples (their
/// labels are discarded), then runs the known-distribution learner on it.
pub fn label_private_learner(
    c: &ConceptClass,
    oracle: &mut dyn SampleOracle,
    alpha: f64,
    cfg: &LabelPrivateConfig,
    rng: &mut dyn RngCore,
) -> Result<LabelOutcome> {
    let t = match cfg.t {
        Some(t) => t,
        None => phase_one_size(c)?,
    };
    if t == 0 {
        return Err(Error::InvalidParameter("phase-one size must be positive".into()));
    }
    let mut counts = vec![0u64; c.domain_size()];
    for _ in 0..t {
        let point = oracle.draw(rng)?.point;
        *counts
            .get_mut(point)
            .ok_or_else(|| Error::InvalidParameter(format!("sample index {point} outside the domain")))? += 1;
    }
    let empirical = FiniteDistribution::from_counts(counts)?;
    let cover = min_cover(c, &empirical, &q(1, 8), true, true)?;
    let selection = select_from_cover(cover.hypotheses, cover.optimal, oracle, cfg.n, alpha, rng)?;
    Ok(LabelOutcome {
        hypothesis: selection.hypothesis.clone(),
        t,
        empirical,
        selection,
    })
}

#[derive(Clone, Debug)]
enum Source {
    Realizable { d: FiniteDistribution, target: BitRow },
    Agnostic { joint: PairDistribution, baseline: Q },
}

/// Target setting for [`pac_evaluate`].
#[derive(Clone, Debug)]
pub struct PacTask {
    source: Source,
}

impl PacTask {
    pub fn realizable(d: &FiniteDistribution, target: &BitRow) -> Result<Self> {
        if d.len() != target.len() {
            return Err(Error::LengthMismatch {
                expected: d.len(),
                actual: target.len(),
            });
        }
        Ok(PacTask {
            source: Source::Realizable {
                d: d.clone(),
                target: target.clone(),
            },
        })
    }

    /// Arbitrary labels; success is measured against the best error in `class`.
    pub fn agnostic(joint: &PairDistribution, class: &ConceptClass) -> Result<Self> {
        if joint.cols != 2 || joint.rows != class.domain_size() {
            return Err(Error::LengthMismatch {
                expected: class.domain_size() * 2,
                actual: joint.rows * joint.cols,
            });
        }
        let baseline = class
            .rows()
            .iter()
            .map(|h| agnostic_error(joint, h))
            .min()
            .ok_or_else(|| Error::InvalidParameter("empty class".into()))?;
        Ok(PacTask {
            source: Source::Agnostic {
                joint: joint.clone(),
                baseline,
            },
        })
    }

    pub fn error(&self, h: &BitRow) -> Result<Q> {
        match &self.source {
            Source::Realizable { d, target } => disagreement(target, h, d),
            Source::Agnostic { joint, .. } => {
                if h.len() != joint.rows {
                    return Err(Error::LengthMismatch {
                        expected: joint.rows,
                        actual: h.len(),
                    });
                }
                Ok(agnostic_error(joint, h))
            }
        }
    }

    /// Largest error counted as a success at accuracy `eps`.
    pub fn success_threshold(&self, eps: &Q) -> Q {
        match &self.source {
            Source::Realizable { .. } => eps.clone(),
            Source::Agnostic { baseline, .. } => baseline + eps,
        }
    }

    pub fn oracle(&self) -> DistOracle {
        match &self.source {
            Source::Realizable { d, target } => DistOracle::realizable(d, target).expect("lengths checked"),
            Source::Agnostic { joint, .. } => DistOracle::agnostic(joint).expect("two columns checked"),
        }
    }
}

fn agnostic_error(joint: &PairDistribution, h: &BitRow) -> Q {
    let wrong: u128 = (0..joint.rows).map(|x| joint.weight(x, usize::from(!h.get(x))) as u128).sum();
    crate::rational::q_u128(wrong, joint.denom() as u128)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PacReport {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// 99% Clopper-Pearson interval for the success probability.
    pub ci: Interval,
    pub mean_error: f64,
}

/// Runs `learner` on fresh oracles for `trials` seeded trials and scores the
/// exact error of each output.
pub fn pac_evaluate<L>(learner: L, task: &PacTask, trials: u64, eps: &Q, seed: u64) -> Result<PacReport>
where
    L: Fn(&mut DistOracle, &mut ChaCha8Rng) -> Result<BitRow> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("zero trials".into()));
    }
    let threshold = task.success_threshold(eps);
    let errors = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i);
            let mut oracle = task.oracle();
            let h = learner(&mut oracle, &mut rng)?;
            task.error(&h)
        })
        .collect::<Result<Vec<Q>>>()?;
    let successes = errors.iter().filter(|e| **e <= threshold).count() as u64;
    let total = errors.iter().fold(Q::zero(), |acc, e| acc + e);
    Ok(PacReport {
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        ci: clopper_pearson(successes, trials, 0.99),
        mean_error: to_f64(&total) / trials as f64,
    })
}
