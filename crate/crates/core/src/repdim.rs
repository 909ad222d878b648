//! Deterministic and probabilistic representations: exact checkers, the
//! conversions to and from one-way protocols, and covers and packings.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitRow, IndexSet};
use crate::commsim::{ceil_log2, EvalTable, OneWayProtocol, ProtocolBody};
use crate::concepts::{disagreement_unchecked, disagreement_weight, ConceptClass};
use crate::distribution::{FiniteDistribution, PairDistribution};
use crate::error::{Error, Result};
use crate::lp::{solve_game, GameSolution};
use crate::rational::{q_u128, serde_q, serde_q_vec, Q};

/// Largest hypothesis set or domain for game-based checks.
pub const LP_MAX_SIDE: usize = 64;
/// Largest support for the distribution-free probabilistic check.
pub const PROB_CHECK_MAX_SUPPORT: usize = 12;
/// Largest candidate pool for exact covers.
pub const COVER_POOL_CAP: usize = 1 << 16;
/// Largest domain for improper exact covers (all `2^|X|` rows as candidates).
pub const IMPROPER_EXACT_MAX_DOMAIN: usize = 4;
/// Branch-and-bound node budget for exact set cover.
pub const COVER_NODE_BUDGET: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetRepresentation {
    pub hypotheses: Vec<BitRow>,
}

impl DetRepresentation {
    pub fn new(hypotheses: Vec<BitRow>) -> Result<Self> {
        let Some(first) = hypotheses.first() else {
            return Err(Error::InvalidParameter("a representation needs a hypothesis".into()));
        };
        if hypotheses.iter().any(|h| h.len() != first.len()) {
            return Err(Error::InvalidParameter("hypotheses have different lengths".into()));
        }
        Ok(DetRepresentation { hypotheses })
    }

    pub fn from_class(c: &ConceptClass) -> Self {
        DetRepresentation {
            hypotheses: c.rows().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn log2_size(&self) -> f64 {
        (self.len() as f64).log2()
    }

    fn domain_size(&self) -> usize {
        self.hypotheses[0].len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbRepresentation {
    pub support: Vec<DetRepresentation>,
    pub probs: FiniteDistribution,
}

impl ProbRepresentation {
    pub fn new(support: Vec<DetRepresentation>, probs: FiniteDistribution) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                actual: probs.len(),
            });
        }
        let n = support[0].domain_size();
        if support.iter().any(|h| h.domain_size() != n) {
            return Err(Error::InvalidParameter("support sets disagree on the domain".into()));
        }
        Ok(ProbRepresentation { support, probs })
    }

    pub fn point_mass(h: DetRepresentation) -> Self {
        ProbRepresentation {
            support: vec![h],
            probs: FiniteDistribution::uniform(1).expect("one point"),
        }
    }

    /// `max log2 |H|` over the support.
    pub fn size(&self) -> f64 {
        self.support
            .iter()
            .map(|h| h.log2_size())
            .fold(0.0, f64::max)
    }

    /// `E |H|` under the mixing distribution.
    pub fn expected_len(&self) -> Q {
        self.support
            .iter()
            .enumerate()
            .map(|(i, h)| self.probs.prob(i) * Q::from_integer(h.len().into()))
            .sum()
    }
}

/// Either kind of representation, for the fixed-distribution checker.
#[derive(Clone, Copy, Debug)]
pub enum Representation<'a> {
    Det(&'a DetRepresentation),
    Prob(&'a ProbRepresentation),
}

fn check_domain(c: &ConceptClass, n: usize) -> Result<()> {
    if c.domain_size() != n {
        return Err(Error::LengthMismatch {
            expected: c.domain_size(),
            actual: n,
        });
    }
    Ok(())
}

/// `max_D min_{h in H} err_D(f, h)` as a game: the minimizer picks `h`, the
/// maximizer picks a point.
pub fn concept_game(f: &BitRow, hyps: &[&BitRow]) -> Result<GameSolution> {
    if hyps.len() > LP_MAX_SIDE || f.len() > LP_MAX_SIDE {
        return Err(Error::cap(
            "game size (|H| or |X|)",
            LP_MAX_SIDE as u32,
            hyps.len().max(f.len()) as u64,
        ));
    }
    if let Some(i) = hyps.iter().position(|h| *h == f) {
        let mut row = vec![Q::zero(); hyps.len()];
        row[i] = Q::one();
        let mut col = vec![Q::zero(); f.len()];
        col[0] = Q::one();
        return Ok(GameSolution {
            value: Q::zero(),
            row_strategy: row,
            col_strategy: col,
        });
    }
    let a: Vec<Vec<Q>> = hyps
        .iter()
        .map(|h| (0..f.len()).map(|x| Q::from_integer(((f.get(x) != h.get(x)) as i64).into())).collect())
        .collect();
    solve_game(&a)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistFreeWitness {
    pub concept: usize,
    /// The maximizing distribution over the domain.
    #[serde(with = "serde_q_vec")]
    pub distribution: Vec<Q>,
    #[serde(with = "serde_q")]
    pub value: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetCheck {
    pub pass: bool,
    pub worst: DistFreeWitness,
    #[serde(with = "serde_q_vec")]
    pub values: Vec<Q>,
}

/// Does `h` represent `c` to within `eps` under every input distribution?
pub fn check_det_rep_distfree(h: &DetRepresentation, c: &ConceptClass, eps: &Q) -> Result<DetCheck> {
    check_domain(c, h.domain_size())?;
    let hyps: Vec<&BitRow> = h.hypotheses.iter().collect();
    let games: Vec<GameSolution> = c
        .rows()
        .par_iter()
        .map(|f| concept_game(f, &hyps))
        .collect::<Result<_>>()?;
    let (worst_i, worst) = games
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.cmp(&b.1.value).then(b.0.cmp(&a.0)))
        .expect("class is nonempty");
    Ok(DetCheck {
        pass: &worst.value <= eps,
        worst: DistFreeWitness {
            concept: worst_i,
            distribution: worst.col_strategy.clone(),
            value: worst.value.clone(),
        },
        values: games.into_iter().map(|g| g.value).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedCheck {
    pub pass: bool,
    pub failing_concept: Option<usize>,
    /// Per concept: mass of support sets containing an `eps`-close hypothesis
    /// (0 or 1 for deterministic representations).
    #[serde(with = "serde_q_vec")]
    pub coverage: Vec<Q>,
}

fn covers(h: &DetRepresentation, f: &BitRow, d: &FiniteDistribution, eps: &Q) -> bool {
    h.hypotheses
        .iter()
        .any(|g| &q_u128(disagreement_weight(f, g, d) as u128, d.denom() as u128) <= eps)
}

/// Exact check against one fixed input distribution `d`.
pub fn check_rep_fixed_dist(
    rep: Representation<'_>,
    c: &ConceptClass,
    d: &FiniteDistribution,
    eps: &Q,
    delta: &Q,
) -> Result<FixedCheck> {
    check_domain(c, d.len())?;
    let coverage: Vec<Q> = match rep {
        Representation::Det(h) => {
            check_domain(c, h.domain_size())?;
            c.rows()
                .iter()
                .map(|f| if covers(h, f, d, eps) { Q::one() } else { Q::zero() })
                .collect()
        }
        Representation::Prob(r) => {
            check_domain(c, r.support[0].domain_size())?;
            c.rows()
                .iter()
                .map(|f| {
                    r.support
                        .iter()
                        .enumerate()
                        .filter(|(_, h)| covers(h, f, d, eps))
                        .map(|(i, _)| r.probs.prob(i))
                        .sum()
                })
                .collect()
        }
    };
    let need = match rep {
        Representation::Det(_) => Q::one(),
        Representation::Prob(_) => Q::one() - delta,
    };
    let failing_concept = coverage.iter().position(|cv| cv < &need);
    Ok(FixedCheck {
        pass: failing_concept.is_none(),
        failing_concept,
        coverage,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbFailure {
    pub concept: usize,
    pub subfamily: Vec<usize>,
    #[serde(with = "serde_q_vec")]
    pub distribution: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbCheck {
    pub pass: bool,
    pub worst: Option<ProbFailure>,
}

/// Fails iff some concept `f`, some distribution `D` and some set of support
/// elements of total mass above `delta` leave every hypothesis in that set
/// more than `eps` from `f` under `D`. Such a `D` exists for a set exactly
/// when the game of `f` against the set's hypotheses has value above `eps`;
/// only inclusion-minimal heavy sets need checking.
pub fn check_prob_rep_distfree(r: &ProbRepresentation, c: &ConceptClass, eps: &Q, delta: &Q) -> Result<ProbCheck> {
    let k = r.support.len();
    if k > PROB_CHECK_MAX_SUPPORT {
        return Err(Error::cap("representation support", PROB_CHECK_MAX_SUPPORT as u32, k as u64));
    }
    check_domain(c, r.support[0].domain_size())?;
    let mass = |s: usize| -> Q { (0..k).filter(|i| s >> i & 1 == 1).map(|i| r.probs.prob(i)).sum() };
    let minimal: Vec<usize> = (1usize..1 << k)
        .filter(|&s| {
            &mass(s) > delta && (0..k).filter(|i| s >> i & 1 == 1).all(|i| &mass(s & !(1 << i)) <= delta)
        })
        .collect();
    for (fi, f) in c.rows().iter().enumerate() {
        for &s in &minimal {
            let hyps: Vec<&BitRow> = (0..k)
                .filter(|i| s >> i & 1 == 1)
                .flat_map(|i| r.support[i].hypotheses.iter())
                .collect();
            let g = concept_game(f, &hyps)?;
            if &g.value > eps {
                return Ok(ProbCheck {
                    pass: false,
                    worst: Some(ProbFailure {
                        concept: fi,
                        subfamily: (0..k).filter(|i| s >> i & 1 == 1).collect(),
                        distribution: g.col_strategy,
                    }),
                });
            }
        }
    }
    Ok(ProbCheck {
        pass: true,
        worst: None,
    })
}

fn dedup_rows(rows: impl IntoIterator<Item = BitRow>) -> Vec<BitRow> {
    let mut out: Vec<BitRow> = Vec::new();
    for r in rows {
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// One hypothesis set per shared coin: Bob's output functions, one per message.
pub fn protocol_to_prob_rep(p: &OneWayProtocol) -> Result<ProbRepresentation> {
    match &p.body {
        ProtocolBody::Deterministic { bob, .. } => Ok(ProbRepresentation::point_mass(DetRepresentation {
            hypotheses: dedup_rows(bob.iter().cloned()),
        })),
        ProtocolBody::PublicCoin { coins, bob, .. } => {
            if coins.len() as u128 > crate::commsim::EXACT_COIN_CAP {
                return Err(Error::cap("coin space", crate::commsim::EXACT_COIN_CAP, coins.len() as u64));
            }
            let support = bob
                .iter()
                .map(|rows| DetRepresentation {
                    hypotheses: dedup_rows(rows.iter().cloned()),
                })
                .collect();
            ProbRepresentation::new(support, coins.clone())
        }
        ProtocolBody::PrivateCoin { .. } => Err(Error::Precondition(
            "a public-coin or deterministic protocol is required".into(),
        )),
    }
}

/// Shared coins pick `H`; Alice sends the first `h in H` within `eps` of her
/// concept under her conditional input distribution (index 0 if none);
/// Bob outputs `h(x)`.
pub fn prob_rep_to_protocol(
    r: &ProbRepresentation,
    c: &ConceptClass,
    mu: &PairDistribution,
    eps: &Q,
) -> Result<OneWayProtocol> {
    check_domain(c, r.support[0].domain_size())?;
    if mu.rows != c.len() || mu.cols != c.domain_size() {
        return Err(Error::LengthMismatch {
            expected: c.len() * c.domain_size(),
            actual: mu.rows * mu.cols,
        });
    }
    let conditionals: Vec<Option<FiniteDistribution>> = (0..c.len()).map(|f| mu.conditional_on_row(f)).collect();
    let n_messages = r.support.iter().map(|h| h.len()).max().expect("nonempty");
    let mut alice = Vec::with_capacity(r.support.len());
    let mut bob = Vec::with_capacity(r.support.len());
    for h in &r.support {
        alice.push(
            c.rows()
                .iter()
                .zip(&conditionals)
                .map(|(f, d)| {
                    d.as_ref()
                        .and_then(|d| {
                            h.hypotheses
                                .iter()
                                .position(|g| &disagreement_unchecked(f, g, d) <= eps)
                        })
                        .unwrap_or(0)
                })
                .collect(),
        );
        let mut rows = h.hypotheses.clone();
        rows.resize(n_messages, h.hypotheses[0].clone());
        bob.push(rows);
    }
    OneWayProtocol::public_coin(c.len(), c.domain_size(), n_messages, r.probs.clone(), alice, bob)
}

/// The same construction with every concept's input distribution equal to `d`.
pub fn prob_rep_to_protocol_fixed(
    r: &ProbRepresentation,
    c: &ConceptClass,
    d: &FiniteDistribution,
    eps: &Q,
) -> Result<OneWayProtocol> {
    let mu = PairDistribution::product(&FiniteDistribution::uniform(c.len())?, d)?;
    prob_rep_to_protocol(r, c, &mu, eps)
}

/// Alice samples `h` from her optimal mixed strategy in the game against all
/// input distributions and sends its index; Bob outputs `h(x)`.
pub fn det_rep_to_protocol(h: &DetRepresentation, c: &ConceptClass, eps: &Q) -> Result<OneWayProtocol> {
    check_domain(c, h.domain_size())?;
    let hyps: Vec<&BitRow> = h.hypotheses.iter().collect();
    let games: Vec<GameSolution> = c
        .rows()
        .par_iter()
        .map(|f| concept_game(f, &hyps))
        .collect::<Result<_>>()?;
    if let Some((fi, g)) = games.iter().enumerate().find(|(_, g)| &g.value > eps) {
        return Err(Error::Precondition(format!(
            "concept {fi} has game value {} > eps",
            crate::rational::fmt_q(&g.value)
        )));
    }
    let lcm = games
        .iter()
        .flat_map(|g| g.row_strategy.iter())
        .fold(BigInt::one(), |l, p| num_integer::Integer::lcm(&l, p.denom()));
    let denom = lcm.to_u64().ok_or(Error::Overflow("mixed-strategy denominators"))?;
    let alice = games
        .iter()
        .map(|g| {
            g.row_strategy
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(i, p)| {
                    let w = (p.numer() * (&lcm / p.denom())).to_u64().expect("bounded by denom");
                    (i, w)
                })
                .collect()
        })
        .collect();
    OneWayProtocol::private_coin(
        c.domain_size(),
        h.len(),
        denom,
        alice,
        FiniteDistribution::uniform(1)?,
        vec![h.hypotheses.clone()],
    )
}

/// `h_m(x)` = Bob's majority answer on message `m` (ties go to 0).
pub fn protocol_to_det_rep(p: &OneWayProtocol) -> Result<DetRepresentation> {
    let rows = match &p.body {
        ProtocolBody::Deterministic { bob, .. } => bob.clone(),
        ProtocolBody::PrivateCoin { bob_coins, bob, .. } => {
            if bob_coins.len() as u128 > crate::commsim::EXACT_COIN_CAP {
                return Err(Error::cap("Bob's coin space", crate::commsim::EXACT_COIN_CAP, bob_coins.len() as u64));
            }
            let denom = bob_coins.denom() as u128;
            (0..p.n_messages)
                .map(|m| {
                    let mut ones = vec![0u128; p.n_bob];
                    for (r, &w) in bob_coins.weights().iter().enumerate() {
                        for x in bob[r][m].ones_indices() {
                            ones[x] += w as u128;
                        }
                    }
                    BitRow::from_fn(p.n_bob, |x| 2 * ones[x] > denom)
                })
                .collect()
        }
        ProtocolBody::PublicCoin { .. } => {
            return Err(Error::Precondition("a private-coin or deterministic protocol is required".into()))
        }
    };
    DetRepresentation::new(dedup_rows(rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cover {
    pub hypotheses: Vec<BitRow>,
    /// Concept indices of the chosen hypotheses when the pool was the class.
    pub concept_indices: Option<Vec<usize>>,
    pub optimal: bool,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    /// `log2 |H|`, the fixed-distribution representation dimension.
    pub fn dimension(&self) -> f64 {
        (self.len() as f64).log2()
    }

    pub fn to_rep(&self) -> DetRepresentation {
        DetRepresentation {
            hypotheses: self.hypotheses.clone(),
        }
    }
}

/// Smallest `H` (from `C` when `proper`, otherwise from all rows) with every
/// concept within `eps` of some member under `d`. Falls back to the greedy
/// cover (flagged non-optimal) when `allow_greedy` and the exact search is
/// out of reach.
pub fn min_cover(
    c: &ConceptClass,
    d: &FiniteDistribution,
    eps: &Q,
    proper: bool,
    allow_greedy: bool,
) -> Result<Cover> {
    check_domain(c, d.len())?;
    let n = c.domain_size();
    let pool: Vec<BitRow> = if proper {
        c.rows().to_vec()
    } else {
        if n > 16 {
            return Err(Error::cap("domain for improper covers", 16u32, n as u64));
        }
        (0..1usize << n).map(|m| BitRow::from_fn(n, |x| m >> x & 1 == 1)).collect()
    };
    let exact_ok = pool.len() <= COVER_POOL_CAP && (proper || n <= IMPROPER_EXACT_MAX_DOMAIN);
    if !exact_ok && !allow_greedy {
        if pool.len() > COVER_POOL_CAP {
            return Err(Error::cap("exact cover candidate pool", COVER_POOL_CAP as u32, pool.len() as u64));
        }
        return Err(Error::cap("domain for exact improper covers", IMPROPER_EXACT_MAX_DOMAIN as u32, n as u64));
    }
    let thr = eps_weight(eps, d);
    let sets: Vec<IndexSet> = pool
        .iter()
        .map(|h| {
            let mut s = IndexSet::empty(c.len());
            for (i, f) in c.rows().iter().enumerate() {
                if disagreement_weight(f, h, d) as u128 <= thr {
                    s.insert(i);
                }
            }
            s
        })
        .collect();
    let greedy = greedy_cover(&sets, c.len());
    let (chosen, optimal) = if exact_ok {
        match exact_cover(&sets, c.len(), greedy.clone()) {
            Ok(best) => (best, true),
            Err(e) if allow_greedy && e.is_cap_violation() => (greedy, false),
            Err(e) => return Err(e),
        }
    } else {
        (greedy, false)
    };
    Ok(Cover {
        hypotheses: chosen.iter().map(|&i| pool[i].clone()).collect(),
        concept_indices: proper.then(|| chosen.clone()),
        optimal,
    })
}

/// Largest integer weight `w` with `w / denom <= eps`.
fn eps_weight(eps: &Q, d: &FiniteDistribution) -> u128 {
    if eps < &Q::zero() {
        return 0;
    }
    let scaled = eps * Q::from_integer(BigInt::from(d.denom()));
    scaled.floor().to_integer().to_u128().unwrap_or(u128::MAX)
}

fn greedy_cover(sets: &[IndexSet], universe: usize) -> Vec<usize> {
    let mut uncovered = IndexSet::full(universe);
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (i, _) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.and(&uncovered).len()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("pool is nonempty");
        chosen.push(i);
        uncovered = uncovered.and_not(&sets[i]);
    }
    chosen
}

fn exact_cover(sets: &[IndexSet], universe: usize, start: Vec<usize>) -> Result<Vec<usize>> {
    // Drop candidates whose coverage is contained in another's.
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(sets[i].len()));
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        if sets[i].is_empty() {
            continue;
        }
        if !kept.iter().any(|&j| sets[i].and_not(&sets[j]).is_empty()) {
            kept.push(i);
        }
    }
    let max_size = kept.iter().map(|&i| sets[i].len()).max().unwrap_or(1);
    let containing: Vec<Vec<usize>> = (0..universe)
        .map(|e| kept.iter().copied().filter(|&i| sets[i].contains(e)).collect())
        .collect();
    struct Search<'a> {
        sets: &'a [IndexSet],
        containing: Vec<Vec<usize>>,
        max_size: usize,
        best: Vec<usize>,
        nodes: u64,
    }
    impl Search<'_> {
        fn go(&mut self, uncovered: &IndexSet, chosen: &mut Vec<usize>) -> Result<()> {
            self.nodes += 1;
            if self.nodes > COVER_NODE_BUDGET {
                return Err(Error::BudgetExceeded("exact set cover search".into()));
            }
            let left = uncovered.len();
            if left == 0 {
                if chosen.len() < self.best.len() {
                    self.best = chosen.clone();
                }
                return Ok(());
            }
            if chosen.len() + left.div_ceil(self.max_size) >= self.best.len() {
                return Ok(());
            }
            let e = uncovered
                .iter()
                .min_by_key(|&e| self.containing[e].len())
                .expect("nonempty");
            let mut options = self.containing[e].clone();
            options.sort_by_key(|&i| std::cmp::Reverse(self.sets[i].and(uncovered).len()));
            for i in options {
                chosen.push(i);
                self.go(&uncovered.and_not(&self.sets[i]), chosen)?;
                chosen.pop();
            }
            Ok(())
        }
    }
    let mut s = Search {
        sets,
        containing,
        max_size,
        best: start,
        nodes: 0,
    };
    s.go(&IndexSet::full(universe), &mut Vec::new())?;
    let mut best = s.best;
    best.sort_unstable();
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityCheck {
    /// The supplied representation is an `(eps/2, delta)` representation under `d`.
    pub rep_valid: bool,
    #[serde(with = "serde_q")]
    pub expected_size: Q,
    /// `(1 - delta) |P|`.
    #[serde(with = "serde_q")]
    pub required: Q,
    /// `E |H| >= (1 - delta)|P|` whenever the representation is valid.
    pub holds: bool,
    /// `max log2|H| >= log2|min cover| - log2(1/(1-delta))`, when valid.
    pub dimension_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingReport {
    pub packing: Vec<usize>,
    pub packing_is_cover: bool,
    pub log2_packing: f64,
    pub min_cover_size: usize,
    pub min_cover_optimal: bool,
    pub log2_min_cover: f64,
    pub duality: Option<DualityCheck>,
}

/// Greedy maximal packing in index order: keep a concept when it is farther
/// than `eps` from every concept kept so far.
pub fn greedy_packing(c: &ConceptClass, d: &FiniteDistribution, eps: &Q) -> Vec<usize> {
    let thr = eps_weight(eps, d);
    let mut kept: Vec<usize> = Vec::new();
    for (i, f) in c.rows().iter().enumerate() {
        if kept
            .iter()
            .all(|&j| disagreement_weight(f, c.row(j), d) as u128 > thr)
        {
            kept.push(i);
        }
    }
    kept
}

pub fn max_packing_and_duality(
    c: &ConceptClass,
    d: &FiniteDistribution,
    eps: &Q,
    delta: &Q,
    rep: Option<&ProbRepresentation>,
) -> Result<PackingReport> {
    check_domain(c, d.len())?;
    let packing = greedy_packing(c, d, eps);
    let as_rep = DetRepresentation {
        hypotheses: packing.iter().map(|&i| c.row(i).clone()).collect(),
    };
    let packing_is_cover = check_rep_fixed_dist(Representation::Det(&as_rep), c, d, eps, &Q::zero())?.pass;
    let cover = min_cover(c, d, eps, true, true)?;
    let duality = match rep {
        None => None,
        Some(r) => {
            let half = eps / Q::from_integer(2.into());
            let rep_valid = check_rep_fixed_dist(Representation::Prob(r), c, d, &half, delta)?.pass;
            let expected_size = r.expected_len();
            let required = (Q::one() - delta) * Q::from_integer(packing.len().into());
            let keep = Q::one() - delta;
            let dimension_bound_holds = !rep_valid
                || keep.is_zero()
                || r.size() + 1e-12 >= cover.dimension() + crate::rational::to_f64(&keep).log2();
            Some(DualityCheck {
                rep_valid,
                holds: !rep_valid || expected_size >= required,
                expected_size,
                required,
                dimension_bound_holds,
            })
        }
    };
    Ok(PackingReport {
        log2_packing: (packing.len() as f64).log2(),
        packing,
        packing_is_cover,
        min_cover_size: cover.len(),
        min_cover_optimal: cover.optimal,
        log2_min_cover: cover.dimension(),
        duality,
    })
}

/// Cost in bits of a representation-derived protocol.
pub fn rep_cost_bits(r: &ProbRepresentation) -> u32 {
    ceil_log2(r.support.iter().map(|h| h.len()).max().unwrap_or(1) as u128)
}

/// Evaluation table of a class, re-exported for convenience.
pub fn eval_table(c: &ConceptClass) -> EvalTable {
    EvalTable::from_class(c)
}
