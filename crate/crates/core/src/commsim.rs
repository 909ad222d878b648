//! One-way two-party protocols: exact and sampled error, optimal
//! distributional protocols, amplification, Newman sparsification, and the
//! inner-product equality protocol.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::bits::BitRow;
use crate::concepts::ConceptClass;
use crate::distribution::{FiniteDistribution, PairDistribution};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q_u128, Q};
use crate::stats::{clopper_pearson, rng_stream, Interval};

/// Largest coin space evaluated exactly.
pub const EXACT_COIN_CAP: u128 = 1 << 24;
/// Largest protocol table, in bits.
pub const TABLE_BIT_BUDGET: u128 = 1 << 28;
/// Largest Alice input set for the subset dynamic program.
pub const SUBSET_DP_MAX_INPUTS: usize = 16;
pub const DEFAULT_MC_TRIALS: u64 = 100_000;

const MC_SHARD: u64 = 4096;

pub fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

/// Truth table of a two-party function; `None` marks inputs off the promise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTable {
    pub n_alice: usize,
    pub n_bob: usize,
    entries: Vec<Option<bool>>,
}

impl EvalTable {
    pub fn new(n_alice: usize, n_bob: usize, entries: Vec<Option<bool>>) -> Result<Self> {
        if entries.len() != n_alice * n_bob {
            return Err(Error::LengthMismatch {
                expected: n_alice * n_bob,
                actual: entries.len(),
            });
        }
        if n_alice == 0 || n_bob == 0 {
            return Err(Error::InvalidParameter("empty input set".into()));
        }
        Ok(EvalTable {
            n_alice,
            n_bob,
            entries,
        })
    }

    /// `g(f, x) = f(x)` with Alice holding the concept.
    pub fn from_class(c: &ConceptClass) -> Self {
        let entries = c
            .rows()
            .iter()
            .flat_map(|r| r.iter().map(Some).collect::<Vec<_>>())
            .collect();
        EvalTable {
            n_alice: c.len(),
            n_bob: c.domain_size(),
            entries,
        }
    }

    pub fn constant(n_alice: usize, n_bob: usize, value: bool) -> Result<Self> {
        Self::new(n_alice, n_bob, vec![Some(value); n_alice * n_bob])
    }

    /// Augmented index on `d` bits. Alice holds `x` (first bit most
    /// significant); Bob holds `(i, prefix)` laid out as `2^(i-1) - 1 + prefix`.
    pub fn augindex(d: u32) -> Result<Self> {
        if d == 0 || d > 16 {
            return Err(Error::InvalidParameter("augmented index needs 1 <= d <= 16".into()));
        }
        let d = d as usize;
        let n_alice = 1usize << d;
        let n_bob = n_alice - 1;
        let mut entries = vec![None; n_alice * n_bob];
        for x in 0..n_alice {
            for i in 1..=d {
                let prefix = x >> (d - i + 1);
                let bit = (x >> (d - i)) & 1 == 1;
                entries[x * n_bob + augindex_bob_input(i, prefix)] = Some(bit);
            }
        }
        Self::new(n_alice, n_bob, entries)
    }

    #[inline]
    pub fn get(&self, f: usize, x: usize) -> Option<bool> {
        self.entries[f * self.n_bob + x]
    }

    pub fn on_promise(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_bob).filter(move |&x| self.get(f, x).is_some())
    }

    /// Uniform Alice input, then a uniform Bob input on the promise.
    pub fn uniform_mu(&self) -> Result<PairDistribution> {
        let counts: Vec<u64> = (0..self.n_alice).map(|f| self.on_promise(f).count() as u64).collect();
        if counts.contains(&0) {
            return Err(Error::InvalidDistribution("an Alice input has no promised Bob input".into()));
        }
        let l = counts.iter().fold(1u64, |acc, &c| num_integer::lcm(acc, c));
        let weights = (0..self.n_alice)
            .flat_map(|f| {
                let w = l / counts[f];
                (0..self.n_bob).map(move |x| if self.get(f, x).is_some() { w } else { 0 })
            })
            .collect();
        PairDistribution::from_counts(self.n_alice, self.n_bob, weights)
    }
}

pub fn augindex_bob_input(i: usize, prefix: usize) -> usize {
    (1usize << (i - 1)) - 1 + prefix
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Deterministic,
    PrivateCoin,
    PublicCoin,
}

/// Explicit protocol tables. Bob's rows are indexed by his input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "snake_case")]
pub enum ProtocolBody {
    Deterministic {
        alice: Vec<usize>,
        bob: Vec<BitRow>,
    },
    /// `alice[f]` lists `(message, weight)` over `alice_denom`;
    /// `bob[r][message]` is Bob's output row under private coin `r`.
    PrivateCoin {
        alice_denom: u64,
        alice: Vec<Vec<(usize, u64)>>,
        bob_coins: FiniteDistribution,
        bob: Vec<Vec<BitRow>>,
    },
    /// `alice[r][f]` and `bob[r][message]` under shared coin `r`.
    PublicCoin {
        coins: FiniteDistribution,
        alice: Vec<Vec<usize>>,
        bob: Vec<Vec<BitRow>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneWayProtocol {
    pub n_alice: usize,
    pub n_bob: usize,
    pub n_messages: usize,
    pub body: ProtocolBody,
}

fn check_table_bits(bits: u128) -> Result<()> {
    if bits > TABLE_BIT_BUDGET {
        return Err(Error::cap("protocol table bits", TABLE_BIT_BUDGET, bits));
    }
    Ok(())
}

impl OneWayProtocol {
    pub fn deterministic(n_bob: usize, n_messages: usize, alice: Vec<usize>, bob: Vec<BitRow>) -> Result<Self> {
        let p = OneWayProtocol {
            n_alice: alice.len(),
            n_bob,
            n_messages,
            body: ProtocolBody::Deterministic { alice, bob },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn private_coin(
        n_bob: usize,
        n_messages: usize,
        alice_denom: u64,
        alice: Vec<Vec<(usize, u64)>>,
        bob_coins: FiniteDistribution,
        bob: Vec<Vec<BitRow>>,
    ) -> Result<Self> {
        let p = OneWayProtocol {
            n_alice: alice.len(),
            n_bob,
            n_messages,
            body: ProtocolBody::PrivateCoin {
                alice_denom,
                alice,
                bob_coins,
                bob,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn public_coin(
        n_alice: usize,
        n_bob: usize,
        n_messages: usize,
        coins: FiniteDistribution,
        alice: Vec<Vec<usize>>,
        bob: Vec<Vec<BitRow>>,
    ) -> Result<Self> {
        let p = OneWayProtocol {
            n_alice,
            n_bob,
            n_messages,
            body: ProtocolBody::PublicCoin { coins, alice, bob },
        };
        p.validate()?;
        Ok(p)
    }

    /// Trivial zero-error protocol: Alice sends her input's index.
    pub fn send_index(table: &EvalTable) -> Result<Self> {
        let bob = (0..table.n_alice)
            .map(|f| BitRow::from_fn(table.n_bob, |x| table.get(f, x).unwrap_or(false)))
            .collect();
        Self::deterministic(table.n_bob, table.n_alice, (0..table.n_alice).collect(), bob)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n_messages == 0 || self.n_alice == 0 || self.n_bob == 0 {
            return bad("protocol dimensions must be positive");
        }
        let rows_ok = |rows: &[BitRow]| rows.len() == self.n_messages && rows.iter().all(|r| r.len() == self.n_bob);
        match &self.body {
            ProtocolBody::Deterministic { alice, bob } => {
                if alice.iter().any(|&m| m >= self.n_messages) || !rows_ok(bob) {
                    return bad("deterministic protocol tables are inconsistent");
                }
            }
            ProtocolBody::PrivateCoin {
                alice_denom,
                alice,
                bob_coins,
                bob,
            } => {
                for mix in alice {
                    let total: u128 = mix.iter().map(|&(_, w)| w as u128).sum();
                    if total != *alice_denom as u128 || mix.iter().any(|&(m, _)| m >= self.n_messages) {
                        return bad("Alice's message distribution is invalid");
                    }
                }
                if bob.len() != bob_coins.len() || !bob.iter().all(|b| rows_ok(b)) {
                    return bad("Bob's tables do not match his coin space");
                }
            }
            ProtocolBody::PublicCoin { coins, alice, bob } => {
                if alice.len() != coins.len() || bob.len() != coins.len() {
                    return bad("tables do not match the shared coin space");
                }
                if alice
                    .iter()
                    .any(|a| a.len() != self.n_alice || a.iter().any(|&m| m >= self.n_messages))
                    || !bob.iter().all(|b| rows_ok(b))
                {
                    return bad("public-coin protocol tables are inconsistent");
                }
            }
        }
        Ok(())
    }

    pub fn flavor(&self) -> Flavor {
        match self.body {
            ProtocolBody::Deterministic { .. } => Flavor::Deterministic,
            ProtocolBody::PrivateCoin { .. } => Flavor::PrivateCoin,
            ProtocolBody::PublicCoin { .. } => Flavor::PublicCoin,
        }
    }

    pub fn cost_bits(&self) -> u32 {
        ceil_log2(self.n_messages as u128)
    }

    /// Number of joint coin outcomes an exact evaluation enumerates per input pair.
    pub fn coin_space(&self) -> u128 {
        match &self.body {
            ProtocolBody::Deterministic { .. } => 1,
            ProtocolBody::PrivateCoin { alice, bob_coins, .. } => {
                alice.iter().map(|m| m.len()).max().unwrap_or(1) as u128 * bob_coins.len() as u128
            }
            ProtocolBody::PublicCoin { coins, .. } => coins.len() as u128,
        }
    }

    /// Exact `Pr[Bob outputs 1]` for every input pair, over a common denominator.
    pub fn output_table(&self) -> (Vec<u128>, u128) {
        let (na, nb) = (self.n_alice, self.n_bob);
        match &self.body {
            ProtocolBody::Deterministic { alice, bob } => {
                let t = (0..na)
                    .flat_map(|f| bob[alice[f]].iter().map(|b| b as u128).collect::<Vec<_>>())
                    .collect();
                (t, 1)
            }
            ProtocolBody::PrivateCoin {
                alice_denom,
                alice,
                bob_coins,
                bob,
            } => {
                // ones[m][x] = sum over Bob coins of weight * output
                let mut ones = vec![vec![0u128; nb]; self.n_messages];
                for (r, &w) in bob_coins.weights().iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    for (m, row) in bob[r].iter().enumerate() {
                        for x in row.ones_indices() {
                            ones[m][x] += w as u128;
                        }
                    }
                }
                let mut t = vec![0u128; na * nb];
                for f in 0..na {
                    for &(m, a) in &alice[f] {
                        for x in 0..nb {
                            t[f * nb + x] += a as u128 * ones[m][x];
                        }
                    }
                }
                (t, *alice_denom as u128 * bob_coins.denom() as u128)
            }
            ProtocolBody::PublicCoin { coins, alice, bob } => {
                let mut t = vec![0u128; na * nb];
                for (r, &w) in coins.weights().iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    for f in 0..na {
                        for x in bob[r][alice[r][f]].ones_indices() {
                            t[f * nb + x] += w as u128;
                        }
                    }
                }
                (t, coins.denom() as u128)
            }
        }
    }

    /// One execution with fresh randomness.
    pub fn run<R: Rng + ?Sized>(&self, f: usize, x: usize, rng: &mut R) -> bool {
        match &self.body {
            ProtocolBody::Deterministic { alice, bob } => bob[alice[f]].get(x),
            ProtocolBody::PrivateCoin {
                alice_denom,
                alice,
                bob_coins,
                bob,
            } => {
                let mut u = rng.gen_range(0..*alice_denom);
                let mut msg = alice[f][0].0;
                for &(m, w) in &alice[f] {
                    if u < w {
                        msg = m;
                        break;
                    }
                    u -= w;
                }
                let r = sample_index(bob_coins, rng);
                bob[r][msg].get(x)
            }
            ProtocolBody::PublicCoin { coins, alice, bob } => {
                let r = sample_index(coins, rng);
                bob[r][alice[r][f]].get(x)
            }
        }
    }
}

fn sample_index<R: Rng + ?Sized>(d: &FiniteDistribution, rng: &mut R) -> usize {
    let mut u = rng.gen_range(0..d.denom());
    for (i, &w) in d.weights().iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    unreachable!("weights sum to the denominator")
}

/// Exact per-pair error probabilities over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairErrors {
    pub n_bob: usize,
    pub denom: u128,
    /// `None` off the promise.
    pub num: Vec<Option<u128>>,
}

impl PairErrors {
    pub fn error(&self, f: usize, x: usize) -> Option<Q> {
        self.num[f * self.n_bob + x].map(|n| q_u128(n, self.denom))
    }

    pub fn worst(&self) -> Q {
        let top = self.num.iter().flatten().copied().max().unwrap_or(0);
        q_u128(top, self.denom)
    }

    pub fn worst_pair(&self) -> Option<(usize, usize)> {
        let (i, _) = self
            .num
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|n| (i, n)))
            .max_by_key(|&(i, n)| (n, std::cmp::Reverse(i)))?;
        Some((i / self.n_bob, i % self.n_bob))
    }

    pub fn distributional(&self, mu: &PairDistribution) -> Q {
        let mut total = BigInt::zero();
        for (i, n) in self.num.iter().enumerate() {
            if let Some(n) = n {
                let w = mu.flat().weights()[i];
                if w > 0 && *n > 0 {
                    total += BigInt::from(w) * BigInt::from(*n);
                }
            }
        }
        Q::new(total, BigInt::from(mu.denom()) * BigInt::from(self.denom))
    }
}

fn check_mode(p: &OneWayProtocol, g: &EvalTable, mode: ErrorMode<'_>) -> Result<()> {
    check_shapes(p, g)?;
    if let ErrorMode::Distributional(mu) = mode {
        if mu.rows != g.n_alice || mu.cols != g.n_bob {
            return Err(Error::LengthMismatch {
                expected: g.n_alice * g.n_bob,
                actual: mu.rows * mu.cols,
            });
        }
    }
    Ok(())
}

fn check_shapes(p: &OneWayProtocol, g: &EvalTable) -> Result<()> {
    if p.n_alice != g.n_alice || p.n_bob != g.n_bob {
        return Err(Error::InvalidParameter(format!(
            "protocol is {}x{} but the problem is {}x{}",
            p.n_alice, p.n_bob, g.n_alice, g.n_bob
        )));
    }
    Ok(())
}

pub fn pair_errors(p: &OneWayProtocol, g: &EvalTable) -> Result<PairErrors> {
    check_shapes(p, g)?;
    if p.coin_space() > EXACT_COIN_CAP {
        return Err(Error::cap("coin space for exact evaluation", EXACT_COIN_CAP, p.coin_space()));
    }
    let (ones, denom) = p.output_table();
    let num = g
        .entries
        .iter()
        .zip(ones)
        .map(|(e, o)| e.map(|v| if v { denom - o } else { o }))
        .collect();
    Ok(PairErrors {
        n_bob: p.n_bob,
        denom,
        num,
    })
}

#[derive(Clone, Copy, Debug)]
pub enum ErrorMode<'a> {
    WorstCase,
    Distributional(&'a PairDistribution),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ErrorValue {
    Exact(Q),
    Estimate {
        estimate: f64,
        ci: Interval,
        trials: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub cost_bits: u32,
    pub value: ErrorValue,
}

impl ErrorReport {
    pub fn exact(&self) -> Option<&Q> {
        match &self.value {
            ErrorValue::Exact(q) => Some(q),
            ErrorValue::Estimate { .. } => None,
        }
    }
}

impl Serialize for ErrorReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("cost_bits", &self.cost_bits)?;
        match &self.value {
            ErrorValue::Exact(q) => {
                m.serialize_entry("error_num", &q.numer().to_string())?;
                m.serialize_entry("error_den", &q.denom().to_string())?;
                m.serialize_entry("error", &fmt_q(q))?;
            }
            ErrorValue::Estimate { estimate, ci, trials } => {
                m.serialize_entry("estimate", estimate)?;
                m.serialize_entry("ci_low", &ci.low)?;
                m.serialize_entry("ci_high", &ci.high)?;
                m.serialize_entry("trials", trials)?;
            }
        }
        m.end()
    }
}

/// Error of `p` on `g`: exact when the coin space is enumerable, otherwise
/// sampled (only if `mc` is given) with a 99% Clopper-Pearson interval.
pub fn protocol_error(
    p: &OneWayProtocol,
    g: &EvalTable,
    mode: ErrorMode<'_>,
    mc: Option<MonteCarlo>,
) -> Result<ErrorReport> {
    check_mode(p, g, mode)?;
    let cost_bits = p.cost_bits();
    if p.coin_space() <= EXACT_COIN_CAP {
        let errs = pair_errors(p, g)?;
        let e = match mode {
            ErrorMode::WorstCase => errs.worst(),
            ErrorMode::Distributional(mu) => errs.distributional(mu),
        };
        return Ok(ErrorReport {
            cost_bits,
            value: ErrorValue::Exact(e),
        });
    }
    let Some(mc) = mc else {
        return Err(Error::cap("coin space for exact evaluation", EXACT_COIN_CAP, p.coin_space()));
    };
    estimate_error(p, g, mode, mc)
}

/// Sampled error with a 99% Clopper-Pearson interval, whatever the coin space.
/// Worst-case mode samples every promised pair and reports the worst one,
/// with the confidence level split evenly across pairs.
pub fn estimate_error(p: &OneWayProtocol, g: &EvalTable, mode: ErrorMode<'_>, mc: MonteCarlo) -> Result<ErrorReport> {
    check_mode(p, g, mode)?;
    let cost_bits = p.cost_bits();
    if mc.trials == 0 {
        return Err(Error::InvalidParameter("Monte-Carlo needs at least one trial".into()));
    }
    let value = match mode {
        ErrorMode::Distributional(mu) => {
            let pairs = mu.flat();
            let errors = sharded_count(mc, |rng| {
                let i = sample_index(pairs, rng);
                let (f, x) = (i / g.n_bob, i % g.n_bob);
                matches!(g.get(f, x), Some(v) if p.run(f, x, rng) != v)
            });
            estimate(errors, mc.trials, 0.99)
        }
        ErrorMode::WorstCase => {
            let pairs: Vec<(usize, usize)> = (0..g.n_alice)
                .flat_map(|f| g.on_promise(f).map(move |x| (f, x)))
                .collect();
            let confidence = 1.0 - 0.01 / pairs.len() as f64;
            let mut worst: Option<(u64, usize)> = None;
            for (k, &(f, x)) in pairs.iter().enumerate() {
                let want = g.get(f, x).expect("on promise");
                let shard_mc = MonteCarlo {
                    trials: mc.trials,
                    seed: mc.seed.wrapping_add(k as u64),
                };
                let errors = sharded_count(shard_mc, |rng| p.run(f, x, rng) != want);
                if worst.is_none_or(|(e, _)| errors > e) {
                    worst = Some((errors, k));
                }
            }
            estimate(worst.map_or(0, |w| w.0), mc.trials, confidence)
        }
    };
    Ok(ErrorReport { cost_bits, value })
}

fn estimate(errors: u64, trials: u64, confidence: f64) -> ErrorValue {
    ErrorValue::Estimate {
        estimate: errors as f64 / trials as f64,
        ci: clopper_pearson(errors, trials, confidence),
        trials,
    }
}

/// Counts successes over `mc.trials` draws split into independently seeded shards.
pub(crate) fn sharded_count<F>(mc: MonteCarlo, event: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    let shards = mc.trials.div_ceil(MC_SHARD);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_stream(mc.seed, s);
            let n = MC_SHARD.min(mc.trials - s * MC_SHARD);
            (0..n).filter(|_| event(&mut rng)).count() as u64
        })
        .sum()
}

/// Subset dynamic program over partitions of Alice's inputs.
pub struct SubsetDp<'a> {
    table: &'a EvalTable,
    mu: &'a PairDistribution,
    /// `layers[l][S]`: least error weight partitioning `S` into at most `2^l` blocks.
    layers: Vec<Vec<u64>>,
    choice: Vec<Vec<u32>>,
}

impl<'a> SubsetDp<'a> {
    pub fn new(table: &'a EvalTable, mu: &'a PairDistribution) -> Result<Self> {
        let n = table.n_alice;
        if n > SUBSET_DP_MAX_INPUTS {
            return Err(Error::cap("Alice inputs for subset search", SUBSET_DP_MAX_INPUTS as u32, n as u64));
        }
        if mu.rows != n || mu.cols != table.n_bob {
            return Err(Error::LengthMismatch {
                expected: n * table.n_bob,
                actual: mu.rows * mu.cols,
            });
        }
        let size = 1usize << n;
        let mut cost = vec![0u64; size];
        let mut w1 = vec![0u64; size];
        let mut w0 = vec![0u64; size];
        for x in 0..table.n_bob {
            for s in 1..size {
                let f = s.trailing_zeros() as usize;
                let rest = s & (s - 1);
                let w = mu.weight(f, x);
                let (a, b) = match table.get(f, x) {
                    Some(true) => (w, 0),
                    Some(false) => (0, w),
                    None => (0, 0),
                };
                w1[s] = w1[rest] + a;
                w0[s] = w0[rest] + b;
                cost[s] += w1[s].min(w0[s]);
            }
        }
        Ok(SubsetDp {
            table,
            mu,
            layers: vec![cost],
            choice: vec![Vec::new()],
        })
    }

    fn full(&self) -> usize {
        (1usize << self.table.n_alice) - 1
    }

    /// Enough layers that singletons are always available.
    fn max_layer(&self) -> usize {
        ceil_log2(self.table.n_alice as u128) as usize
    }

    fn ensure(&mut self, layer: usize) {
        while self.layers.len() <= layer {
            let prev = self.layers.last().expect("base layer");
            let size = prev.len();
            let mut next = vec![0u64; size];
            let mut pick = vec![0u32; size];
            for s in 1..size {
                let low = s & s.wrapping_neg();
                let rest = s ^ low;
                let mut best = u64::MAX;
                let mut arg = s;
                let mut sub = rest;
                loop {
                    let a = sub | low;
                    let v = prev[a] + prev[rest ^ sub];
                    if v < best {
                        best = v;
                        arg = a;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
                next[s] = best;
                pick[s] = arg as u32;
            }
            self.layers.push(next);
            self.choice.push(pick);
        }
    }

    /// Optimal error at `budget` bits, as a weight over `mu.denom()`.
    pub fn error_weight(&mut self, budget: u32) -> u64 {
        let l = (budget as usize).min(self.max_layer());
        self.ensure(l);
        self.layers[l][self.full()]
    }

    pub fn error(&mut self, budget: u32) -> Q {
        q_u128(self.error_weight(budget) as u128, self.mu.denom() as u128)
    }

    fn blocks(&self, s: usize, layer: usize, out: &mut Vec<usize>) {
        if layer == 0 {
            out.push(s);
            return;
        }
        let a = self.choice[layer][s] as usize;
        self.blocks(a, layer - 1, out);
        if a != s {
            self.blocks(s ^ a, layer - 1, out);
        }
    }

    /// The optimal protocol at `budget` bits and its exact error.
    pub fn protocol(&mut self, budget: u32) -> Result<(OneWayProtocol, Q)> {
        let l = (budget as usize).min(self.max_layer());
        self.ensure(l);
        let mut blocks = Vec::new();
        self.blocks(self.full(), l, &mut blocks);
        let t = self.table;
        let mut alice = vec![0usize; t.n_alice];
        let mut bob = Vec::with_capacity(blocks.len());
        for (m, &s) in blocks.iter().enumerate() {
            let members: Vec<usize> = (0..t.n_alice).filter(|&f| s >> f & 1 == 1).collect();
            for &f in &members {
                alice[f] = m;
            }
            bob.push(BitRow::from_fn(t.n_bob, |x| {
                let (mut w1, mut w0) = (0u64, 0u64);
                for &f in &members {
                    match t.get(f, x) {
                        Some(true) => w1 += self.mu.weight(f, x),
                        Some(false) => w0 += self.mu.weight(f, x),
                        None => {}
                    }
                }
                w1 > w0
            }));
        }
        let n_messages = blocks.len();
        let p = OneWayProtocol::deterministic(t.n_bob, n_messages, alice, bob)?;
        let e = self.error(budget);
        Ok((p, e))
    }
}

/// Best deterministic protocol using at most `budget_bits` bits.
pub fn optimal_distributional_protocol(
    g: &EvalTable,
    mu: &PairDistribution,
    budget_bits: u32,
) -> Result<(OneWayProtocol, Q)> {
    SubsetDp::new(g, mu)?.protocol(budget_bits)
}

/// Least budget whose optimal distributional error is at most `eps`.
pub fn dist_cc(g: &EvalTable, mu: &PairDistribution, eps: &Q) -> Result<u32> {
    let mut dp = SubsetDp::new(g, mu)?;
    let top = dp.max_layer() as u32;
    for b in 0..=top {
        if &dp.error(b) <= eps {
            return Ok(b);
        }
    }
    Ok(top)
}

/// Mixed-radix encoding of a tuple, first entry least significant.
fn encode(parts: &[usize], radix: usize) -> usize {
    parts.iter().rev().fold(0, |acc, &p| acc * radix + p)
}

fn decode(mut code: usize, radix: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let d = code % radix;
            code /= radix;
            d
        })
        .collect()
}

fn checked_pow(base: usize, k: u32, what: &'static str) -> Result<usize> {
    base.checked_pow(k).ok_or(Error::Overflow(what))
}

fn product_distribution(d: &FiniteDistribution, k: u32) -> Result<FiniteDistribution> {
    let n = checked_pow(d.len(), k, "amplified coin space")?;
    let mut counts = Vec::with_capacity(n);
    for code in 0..n {
        let mut w = 1u64;
        for r in decode(code, d.len(), k as usize) {
            w = w.checked_mul(d.weights()[r]).ok_or(Error::Overflow("amplified coin weights"))?;
        }
        counts.push(w);
    }
    FiniteDistribution::from_counts(counts)
}

fn majority_rows(rows: &[&BitRow], n_bob: usize) -> BitRow {
    let k = rows.len();
    BitRow::from_fn(n_bob, |x| rows.iter().filter(|r| r.get(x)).count() * 2 > k)
}

fn majority_table(bob: &[BitRow], n_bob: usize, m: usize, k: u32) -> Vec<BitRow> {
    (0..m.pow(k))
        .map(|code| {
            let parts = decode(code, m, k as usize);
            let rows: Vec<&BitRow> = parts.iter().map(|&s| &bob[s]).collect();
            majority_rows(&rows, n_bob)
        })
        .collect()
}

/// `k` independent runs with concatenated messages; Bob takes the majority.
pub fn amplify(p: &OneWayProtocol, k: u32) -> Result<OneWayProtocol> {
    if k % 2 == 0 {
        return Err(Error::InvalidParameter(format!("amplification needs odd k, got {k}")));
    }
    if k == 1 {
        return Ok(p.clone());
    }
    let m = p.n_messages;
    let mk = checked_pow(m, k, "amplified message space")?;
    let nb = p.n_bob;
    let coin_tables = match &p.body {
        ProtocolBody::Deterministic { .. } => 1u128,
        ProtocolBody::PrivateCoin { bob_coins, .. } => (bob_coins.len() as u128).pow(k),
        ProtocolBody::PublicCoin { coins, .. } => (coins.len() as u128).pow(k),
    };
    check_table_bits(coin_tables * mk as u128 * nb as u128)?;
    match &p.body {
        ProtocolBody::Deterministic { alice, bob } => {
            let alice = alice.iter().map(|&s| encode(&vec![s; k as usize], m)).collect();
            OneWayProtocol::deterministic(nb, mk, alice, majority_table(bob, nb, m, k))
        }
        ProtocolBody::PrivateCoin {
            alice_denom,
            alice,
            bob_coins,
            bob,
        } => {
            let denom = alice_denom
                .checked_pow(k)
                .ok_or(Error::Overflow("amplified message weights"))?;
            let alice = alice
                .iter()
                .map(|mix| {
                    let n = mix.len().pow(k);
                    (0..n)
                        .map(|code| {
                            let parts = decode(code, mix.len(), k as usize);
                            let msg: Vec<usize> = parts.iter().map(|&j| mix[j].0).collect();
                            let w = parts.iter().map(|&j| mix[j].1).product();
                            (encode(&msg, m), w)
                        })
                        .collect()
                })
                .collect();
            let coins = product_distribution(bob_coins, k)?;
            let bob = (0..coins.len())
                .map(|rc| {
                    let rs = decode(rc, bob_coins.len(), k as usize);
                    (0..mk)
                        .map(|code| {
                            let parts = decode(code, m, k as usize);
                            let rows: Vec<&BitRow> = parts.iter().zip(&rs).map(|(&s, &r)| &bob[r][s]).collect();
                            majority_rows(&rows, nb)
                        })
                        .collect()
                })
                .collect();
            OneWayProtocol::private_coin(nb, mk, denom, alice, coins, bob)
        }
        ProtocolBody::PublicCoin { coins, alice, bob } => {
            let product = product_distribution(coins, k)?;
            let mut alice_t = Vec::with_capacity(product.len());
            let mut bob_t = Vec::with_capacity(product.len());
            for rc in 0..product.len() {
                let rs = decode(rc, coins.len(), k as usize);
                alice_t.push(
                    (0..p.n_alice)
                        .map(|f| encode(&rs.iter().map(|&r| alice[r][f]).collect::<Vec<_>>(), m))
                        .collect(),
                );
                bob_t.push(
                    (0..mk)
                        .map(|code| {
                            let parts = decode(code, m, k as usize);
                            let rows: Vec<&BitRow> = parts.iter().zip(&rs).map(|(&s, &r)| &bob[r][s]).collect();
                            majority_rows(&rows, nb)
                        })
                        .collect(),
                );
            }
            OneWayProtocol::public_coin(p.n_alice, nb, mk, product, alice_t, bob_t)
        }
    }
}

/// Replaces the shared coins by `m` sampled seeds. Alice draws a slot
/// privately and sends it along with her message, so Bob needs no coins.
/// When `m` reaches the size of the coin support the original coins are
/// kept with their exact probabilities.
pub fn newman_sparsify(p: &OneWayProtocol, m: usize, seed: u64) -> Result<OneWayProtocol> {
    let ProtocolBody::PublicCoin { coins, alice, bob } = &p.body else {
        return Err(Error::InvalidParameter("sparsification needs a public-coin protocol".into()));
    };
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sampled seed".into()));
    }
    let support: Vec<usize> = coins.support().collect();
    let (slots, weights, denom): (Vec<usize>, Vec<u64>, u64) = if m >= support.len() {
        let w = support.iter().map(|&r| coins.weights()[r]).collect();
        (support, w, coins.denom())
    } else {
        let mut rng = rng_stream(seed, 0);
        let sampler = coins.sampler();
        let s = (0..m).map(|_| sampler.sample(&mut rng)).collect();
        (s, vec![1; m], m as u64)
    };
    let msgs = p.n_messages;
    let n_messages = slots
        .len()
        .checked_mul(msgs)
        .ok_or(Error::Overflow("sparsified message space"))?;
    check_table_bits(n_messages as u128 * p.n_bob as u128)?;
    let alice_mix = (0..p.n_alice)
        .map(|f| {
            slots
                .iter()
                .zip(&weights)
                .enumerate()
                .map(|(i, (&r, &w))| (i * msgs + alice[r][f], w))
                .collect()
        })
        .collect();
    let bob_rows = slots.iter().flat_map(|&r| bob[r].iter().cloned()).collect();
    OneWayProtocol::private_coin(
        p.n_bob,
        n_messages,
        denom,
        alice_mix,
        FiniteDistribution::uniform(1)?,
        vec![bob_rows],
    )
}

/// Inner-product hashing for equality on `b`-bit strings with `k` shared
/// seeds. Alice holds the point function at `z`, Bob holds `x`.
pub fn equality_protocol(b: u32, k: u32) -> Result<OneWayProtocol> {
    if b == 0 || k == 0 {
        return Err(Error::InvalidParameter("b and k must be positive".into()));
    }
    if b * k > 24 {
        return Err(Error::cap("b*k for the equality protocol", 24u32, b * k));
    }
    let n = 1usize << b;
    let n_coins = 1usize << (b * k);
    let n_messages = 1usize << k;
    check_table_bits(n_coins as u128 * n_messages as u128 * n as u128)?;
    let mask = n - 1;
    let hash = |v: usize, r: usize| -> usize {
        (0..k as usize)
            .map(|j| (((v & (r >> (b as usize * j)) & mask).count_ones() & 1) as usize) << j)
            .sum()
    };
    let mut alice = Vec::with_capacity(n_coins);
    let mut bob = Vec::with_capacity(n_coins);
    for r in 0..n_coins {
        let hx: Vec<usize> = (0..n).map(|x| hash(x, r)).collect();
        alice.push(hx.clone());
        bob.push(
            (0..n_messages)
                .map(|sigma| BitRow::from_fn(n, |x| hx[x] == sigma))
                .collect(),
        );
    }
    OneWayProtocol::public_coin(n, n, n_messages, FiniteDistribution::uniform(n_coins)?, alice, bob)
}

/// Input distributions over (line, point) pairs for `Line_p`: independent
/// uniform pairs, and a uniform line with a uniform point on it.
/// Lines are indexed `a*p + b` and points `x*p + y` with `y = a x + b`.
pub fn line_hard_distributions(p: u64) -> Result<(PairDistribution, PairDistribution, PairDistribution)> {
    if !crate::concepts::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = (p * p) as usize;
    let on_line = |c: usize, pt: usize| {
        let (a, b) = ((c as u64) / p, (c as u64) % p);
        let (x, y) = ((pt as u64) / p, (pt as u64) % p);
        (a * x + b) % p == y
    };
    check_table_bits((n * n) as u128 * 64)?;
    let mu0 = PairDistribution::uniform(n, n)?;
    let ones: Vec<u64> = (0..n * n).map(|i| on_line(i / n, i % n) as u64).collect();
    let mu1 = PairDistribution::from_counts(n, n, ones.clone())?;
    let mix = PairDistribution::from_counts(n, n, ones.iter().map(|&o| 1 + o * p).collect())?;
    Ok((mu0, mu1, mix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{make_builtin, Builtin};
    use crate::rational::q;

    fn point_table(b: u32) -> EvalTable {
        EvalTable::from_class(&make_builtin(Builtin::Point { b }).unwrap())
    }

    #[test]
    fn send_index_is_exact() {
        let g = point_table(2);
        let p = OneWayProtocol::send_index(&g).unwrap();
        let r = protocol_error(&p, &g, ErrorMode::WorstCase, None).unwrap();
        assert_eq!(r.exact(), Some(&q(0, 1)));
        assert_eq!(r.cost_bits, 2);
    }

    #[test]
    fn equality_error_rates() {
        let g = point_table(2);
        let p = equality_protocol(2, 2).unwrap();
        let errs = pair_errors(&p, &g).unwrap();
        for z in 0..4 {
            for x in 0..4 {
                let want = if z == x { q(0, 1) } else { q(1, 4) };
                assert_eq!(errs.error(z, x).unwrap(), want);
            }
        }
        let e1 = pair_errors(&equality_protocol(3, 1).unwrap(), &point_table(3)).unwrap();
        assert_eq!(e1.error(1, 6).unwrap(), q(1, 2));
        assert_eq!(e1.worst(), q(1, 2));
    }

    #[test]
    fn constant_zero_bob_on_points() {
        let g = point_table(2);
        let bob = vec![BitRow::zeros(4)];
        let p = OneWayProtocol::deterministic(4, 1, vec![0; 4], bob).unwrap();
        let mu = g.uniform_mu().unwrap();
        let r = protocol_error(&p, &g, ErrorMode::Distributional(&mu), None).unwrap();
        assert_eq!(r.exact(), Some(&q(1, 4)));
        assert_eq!(r.cost_bits, 0);
    }

    #[test]
    fn augindex_table_layout() {
        let g = EvalTable::augindex(3).unwrap();
        assert_eq!((g.n_alice, g.n_bob), (8, 7));
        // x = 101: i=1 empty prefix -> 1, i=2 prefix 1 -> 0, i=3 prefix 10 -> 1
        assert_eq!(g.get(0b101, augindex_bob_input(1, 0)), Some(true));
        assert_eq!(g.get(0b101, augindex_bob_input(2, 1)), Some(false));
        assert_eq!(g.get(0b101, augindex_bob_input(3, 0b10)), Some(true));
        assert_eq!(g.get(0b101, augindex_bob_input(2, 0)), None);
        assert_eq!(g.on_promise(3).count(), 3);
    }

    #[test]
    fn dp_examples() {
        let g = point_table(2);
        let mu = g.uniform_mu().unwrap();
        let (_, e1) = optimal_distributional_protocol(&g, &mu, 1).unwrap();
        assert!(e1 > q(0, 1));
        let (p2, e2) = optimal_distributional_protocol(&g, &mu, 2).unwrap();
        assert_eq!(e2, q(0, 1));
        assert_eq!(p2.cost_bits(), 2);
        assert_eq!(dist_cc(&g, &mu, &q(0, 1)).unwrap(), 2);

        let a = EvalTable::augindex(3).unwrap();
        let mu = a.uniform_mu().unwrap();
        assert_eq!(dist_cc(&a, &mu, &q(0, 1)).unwrap(), 3);
        assert!(dist_cc(&a, &mu, &q(1, 8)).unwrap() >= 2);

        let c = EvalTable::constant(5, 3, true).unwrap();
        assert_eq!(dist_cc(&c, &c.uniform_mu().unwrap(), &q(0, 1)).unwrap(), 0);
    }

    #[test]
    fn dp_protocol_error_matches_reported_error() {
        let a = EvalTable::augindex(3).unwrap();
        let mu = a.uniform_mu().unwrap();
        for budget in 0..4 {
            let (p, e) = optimal_distributional_protocol(&a, &mu, budget).unwrap();
            assert!(p.cost_bits() <= budget);
            let r = protocol_error(&p, &a, ErrorMode::Distributional(&mu), None).unwrap();
            assert_eq!(r.exact(), Some(&e));
        }
    }

    #[test]
    fn amplify_examples() {
        // private coin: Bob flips the right answer with probability 1/3
        let g = point_table(1);
        let truth: Vec<BitRow> = (0..2).map(|z| BitRow::from_fn(2, |x| x == z)).collect();
        let bob = vec![truth.clone(), truth.clone(), truth.iter().map(|r| r.complement()).collect()];
        let p = OneWayProtocol::private_coin(2, 2, 1, vec![vec![(0, 1)], vec![(1, 1)]], FiniteDistribution::uniform(3).unwrap(), bob)
            .unwrap();
        assert_eq!(pair_errors(&p, &g).unwrap().worst(), q(1, 3));
        let a = amplify(&p, 5).unwrap();
        assert_eq!(a.cost_bits(), 5);
        let errs = pair_errors(&a, &g).unwrap();
        assert!(errs.num.iter().all(|e| q_u128(e.unwrap(), errs.denom) == q(51, 243)));

        assert_eq!(amplify(&p, 1).unwrap(), p);
        assert!(amplify(&p, 2).is_err());
        let exact = OneWayProtocol::send_index(&g).unwrap();
        assert_eq!(pair_errors(&amplify(&exact, 3).unwrap(), &g).unwrap().worst(), q(0, 1));
    }

    #[test]
    fn newman_examples() {
        let g = point_table(2);
        let p = equality_protocol(2, 1).unwrap();
        let full = newman_sparsify(&p, 1000, 1).unwrap();
        assert_eq!(pair_errors(&full, &g).unwrap().worst(), pair_errors(&p, &g).unwrap().worst());

        let exact = OneWayProtocol::public_coin(
            4,
            4,
            4,
            FiniteDistribution::uniform(2).unwrap(),
            vec![(0..4).collect(), (0..4).collect()],
            vec![(0..4).map(|z| BitRow::from_fn(4, |x| x == z)).collect(); 2],
        )
        .unwrap();
        assert_eq!(pair_errors(&newman_sparsify(&exact, 1, 9).unwrap(), &g).unwrap().worst(), q(0, 1));

        let g3 = point_table(3);
        let eq3 = equality_protocol(3, 3).unwrap();
        let s = newman_sparsify(&eq3, 64, 2024).unwrap();
        assert!(pair_errors(&s, &g3).unwrap().worst() <= q(1, 4));
        assert!(newman_sparsify(&eq3, 0, 1).is_err());
        assert!(newman_sparsify(&full, 4, 1).is_err());
    }

    #[test]
    fn monte_carlo_brackets_exact_value() {
        let g = point_table(2);
        let p = equality_protocol(2, 1).unwrap();
        let mu = g.uniform_mu().unwrap();
        let exact = protocol_error(&p, &g, ErrorMode::Distributional(&mu), None).unwrap();
        assert_eq!(exact.exact(), Some(&q(3, 8)));
        let mc = MonteCarlo { trials: 20_000, seed: 5 };
        let r = estimate_error(&p, &g, ErrorMode::Distributional(&mu), mc).unwrap();
        let ErrorValue::Estimate { ci, .. } = r.value else { panic!() };
        assert!(ci.low <= 0.375 && 0.375 <= ci.high);
        let w = estimate_error(&p, &g, ErrorMode::WorstCase, mc).unwrap();
        let ErrorValue::Estimate { ci, .. } = w.value else { panic!() };
        assert!(ci.low <= 0.5 && 0.5 <= ci.high);
        assert_eq!(estimate_error(&p, &g, ErrorMode::WorstCase, mc).unwrap(), w);
    }

    #[test]
    fn line_distributions() {
        let (mu0, mu1, mix) = line_hard_distributions(3).unwrap();
        let g = EvalTable::from_class(&make_builtin(Builtin::Line { p: 3 }).unwrap());
        let ones = |mu: &PairDistribution| {
            let mut total = Q::zero();
            for f in 0..9 {
                for x in 0..9 {
                    if g.get(f, x) == Some(true) {
                        total += mu.prob(f, x);
                    }
                }
            }
            total
        };
        assert_eq!(ones(&mu0), q(1, 3));
        assert_eq!(ones(&mu1), q(1, 1));
        assert_eq!(ones(&mix), q(2, 3));
    }
}
