//! Finite concept classes, the built-in families, and VC dimension.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::rational::Q;

pub use crate::distribution::{FiniteDistribution, PairDistribution};

/// Upper bound on `|C| * |X|` bits for any materialized class.
pub const MATERIALIZE_BIT_BUDGET: u128 = 1 << 32;
/// Largest domain for exhaustive shattering search.
pub const VC_MAX_DOMAIN: usize = 24;
/// Largest `(2W+1)^d * |X|` work for the halfspace weight sweep.
pub const HALFSPACE_SWEEP_BUDGET: u128 = 1 << 30;

/// Which family a class was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Builtin {
    /// Point functions over `I_b = {0, ..., 2^b - 1}`.
    Point { b: u32 },
    /// `t_x(y) = 1` iff `y >= x` over `I_b`.
    Threshold { b: u32 },
    /// Indicators of `y = a x + b` over `Z_p^2`.
    Line { p: u64 },
    /// Axis-parallel boxes over `I_b^d`.
    Box { b: u32, d: u32 },
    /// Linear threshold functions over `I_b^d`.
    Halfspace { b: u32, d: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptClass {
    domain_size: usize,
    rows: Vec<BitRow>,
    names: Vec<String>,
    /// Canonical parameter tuple per concept, empty for custom classes.
    params: Vec<Vec<i64>>,
    /// Structured coordinates per domain point, empty for custom classes.
    points: Vec<Vec<i64>>,
    multiset: bool,
    builtin: Option<Builtin>,
}

impl ConceptClass {
    /// Builds a deduplicated class; the first occurrence of each row is kept.
    pub fn new(domain_size: usize, rows: Vec<BitRow>) -> Result<Self> {
        let names = (0..rows.len()).map(|i| format!("c{i}")).collect();
        Self::with_names(domain_size, rows, names)
    }

    pub fn with_names(domain_size: usize, rows: Vec<BitRow>, names: Vec<String>) -> Result<Self> {
        if names.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                actual: names.len(),
            });
        }
        let params = vec![Vec::new(); rows.len()];
        Self::assemble(domain_size, Vec::new(), rows, names, params, false, None)
    }

    /// Keeps duplicate rows (a multiset class).
    pub fn multiset(domain_size: usize, rows: Vec<BitRow>) -> Result<Self> {
        let names = (0..rows.len()).map(|i| format!("c{i}")).collect();
        let params = vec![Vec::new(); rows.len()];
        Self::assemble(domain_size, Vec::new(), rows, names, params, true, None)
    }

    fn assemble(
        domain_size: usize,
        points: Vec<Vec<i64>>,
        rows: Vec<BitRow>,
        names: Vec<String>,
        params: Vec<Vec<i64>>,
        multiset: bool,
        builtin: Option<Builtin>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("a concept class needs at least one concept".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != domain_size) {
            return Err(Error::LengthMismatch {
                expected: domain_size,
                actual: bad.len(),
            });
        }
        if !points.is_empty() && points.len() != domain_size {
            return Err(Error::LengthMismatch {
                expected: domain_size,
                actual: points.len(),
            });
        }
        let mut class = ConceptClass {
            domain_size,
            rows: Vec::new(),
            names: Vec::new(),
            params: Vec::new(),
            points,
            multiset,
            builtin,
        };
        let mut seen = HashSet::new();
        for ((row, name), param) in rows.into_iter().zip(names).zip(params) {
            if multiset || seen.insert(row.clone()) {
                class.rows.push(row);
                class.names.push(name);
                class.params.push(param);
            }
        }
        Ok(class)
    }

    /// Candidates sorted by parameter tuple, deduplicated by truth table, so
    /// each concept keeps its lexicographically smallest parameters.
    fn from_candidates(
        domain_size: usize,
        points: Vec<Vec<i64>>,
        mut candidates: Vec<(Vec<i64>, String, BitRow)>,
        builtin: Builtin,
    ) -> Result<Self> {
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        let mut rows = Vec::with_capacity(candidates.len());
        let mut names = Vec::with_capacity(candidates.len());
        let mut params = Vec::with_capacity(candidates.len());
        for (p, n, r) in candidates {
            params.push(p);
            names.push(n);
            rows.push(r);
        }
        Self::assemble(domain_size, points, rows, names, params, false, Some(builtin))
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitRow {
        &self.rows[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self, i: usize) -> &[i64] {
        &self.params[i]
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn is_multiset(&self) -> bool {
        self.multiset
    }

    pub fn builtin(&self) -> Option<Builtin> {
        self.builtin
    }

    #[inline]
    pub fn eval(&self, concept: usize, point: usize) -> bool {
        self.rows[concept].get(point)
    }

    /// Map from truth table to concept index.
    pub fn row_index(&self) -> HashMap<BitRow, usize> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect()
    }

    /// Index of the domain point with the given coordinates.
    pub fn point_index(&self, coords: &[i64]) -> Option<usize> {
        self.points.iter().position(|p| p == coords)
    }

    /// The subclass formed by the given concept indices (kept in order).
    pub fn subclass(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidParameter(format!("concept index {bad} out of range")));
        }
        Self::assemble(
            self.domain_size,
            self.points.clone(),
            indices.iter().map(|&i| self.rows[i].clone()).collect(),
            indices.iter().map(|&i| self.names[i].clone()).collect(),
            indices.iter().map(|&i| self.params[i].clone()).collect(),
            self.multiset,
            self.builtin,
        )
    }

    pub fn to_document(&self) -> ClassDocument {
        ClassDocument {
            domain_size: self.domain_size,
            points: self.points.clone(),
            concepts: self
                .rows
                .iter()
                .zip(&self.names)
                .map(|(r, n)| ConceptEntry {
                    name: n.clone(),
                    bits: r.clone(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: ClassDocument) -> Result<Self> {
        let n = doc.concepts.len();
        let (names, rows): (Vec<_>, Vec<_>) = doc.concepts.into_iter().map(|c| (c.name, c.bits)).unzip();
        Self::assemble(doc.domain_size, doc.points, rows, names, vec![Vec::new(); n], false, None)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("class documents always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }
}

/// On-disk form: `{domain_size, points, concepts: [{name, bits}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDocument {
    pub domain_size: usize,
    #[serde(default)]
    pub points: Vec<Vec<i64>>,
    pub concepts: Vec<ConceptEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub name: String,
    pub bits: BitRow,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn check_budget(concepts: u128, domain: u128) -> Result<()> {
    let bits = concepts.saturating_mul(domain);
    if bits > MATERIALIZE_BIT_BUDGET {
        return Err(Error::cap("materialized class bits", MATERIALIZE_BIT_BUDGET, bits));
    }
    Ok(())
}

/// Points of `I_b^d` in lexicographic order (first coordinate most significant).
pub fn grid_points(b: u32, d: u32) -> Vec<Vec<i64>> {
    let side = 1i64 << b;
    let total = (side as u128).pow(d) as usize;
    (0..total)
        .map(|mut idx| {
            let mut coords = vec![0i64; d as usize];
            for c in coords.iter_mut().rev() {
                *c = (idx as i64) % side;
                idx /= side as usize;
            }
            coords
        })
        .collect()
}

/// Builds one of the built-in classes.
pub fn make_builtin(kind: Builtin) -> Result<ConceptClass> {
    match kind {
        Builtin::Point { b } | Builtin::Threshold { b } => {
            if b > 16 {
                return Err(Error::cap("b for points/thresholds", 16u32, b));
            }
            let n = 1usize << b;
            check_budget(n as u128, n as u128)?;
            let points = (0..n as i64).map(|x| vec![x]).collect();
            let is_point = matches!(kind, Builtin::Point { .. });
            let candidates = (0..n)
                .map(|x| {
                    let row = if is_point {
                        BitRow::from_fn(n, |y| y == x)
                    } else {
                        BitRow::from_fn(n, |y| y >= x)
                    };
                    let name = if is_point { format!("point({x})") } else { format!("t_{x}") };
                    (vec![x as i64], name, row)
                })
                .collect();
            ConceptClass::from_candidates(n, points, candidates, kind)
        }
        Builtin::Line { p } => {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if p > 251 {
                return Err(Error::cap("line modulus p", 251u32, p));
            }
            let n = (p * p) as usize;
            check_budget(n as u128, n as u128)?;
            let pi = p as i64;
            let points = (0..pi).flat_map(|x| (0..pi).map(move |y| vec![x, y])).collect();
            let candidates = (0..pi)
                .flat_map(|a| (0..pi).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let mut row = BitRow::zeros(n);
                    for x in 0..pi {
                        let y = (a * x + b) % pi;
                        row.set((x * pi + y) as usize, true);
                    }
                    (vec![a, b], format!("line({a},{b})"), row)
                })
                .collect();
            ConceptClass::from_candidates(n, points, candidates, kind)
        }
        Builtin::Box { b, d } => make_boxes(b, d),
        Builtin::Halfspace { b, d } => make_halfspaces(b, d),
    }
}

fn check_grid_caps(b: u32, d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    if b * d > 12 {
        return Err(Error::cap("b*d for boxes/halfspaces", 12u32, b * d));
    }
    Ok(())
}

fn make_boxes(b: u32, d: u32) -> Result<ConceptClass> {
    check_grid_caps(b, d)?;
    let points = grid_points(b, d);
    let n = points.len();
    let side = 1i64 << b;
    let intervals: Vec<(i64, i64)> = (0..side)
        .flat_map(|s| (s..side).map(move |t| (s, t)))
        .collect();
    let count = (intervals.len() as u128).pow(d) + 1;
    check_budget(count, n as u128)?;

    let mut candidates = Vec::new();
    let mut choice = vec![0usize; d as usize];
    loop {
        let s: Vec<i64> = choice.iter().map(|&c| intervals[c].0).collect();
        let t: Vec<i64> = choice.iter().map(|&c| intervals[c].1).collect();
        let row = BitRow::from_fn(n, |i| {
            points[i]
                .iter()
                .enumerate()
                .all(|(k, &x)| s[k] <= x && x <= t[k])
        });
        let mut params = s.clone();
        params.extend(&t);
        candidates.push((params, format!("box({s:?},{t:?})"), row));
        // odometer over interval choices
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < intervals.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    // Smallest parameter tuple with an inverted side: s = (0,..,0,1), t = 0.
    if side > 1 {
        let mut params = vec![0i64; 2 * d as usize];
        params[d as usize - 1] = 1;
        candidates.push((params, "box(empty)".into(), BitRow::zeros(n)));
    }
    ConceptClass::from_candidates(n, points, candidates, Builtin::Box { b, d })
}

/// Weight bound for the halfspace sweep, `3 * 2^(b(d+1))`.
pub fn halfspace_weight_bound(b: u32, d: u32) -> i64 {
    3i64 << (b * (d + 1))
}

fn make_halfspaces(b: u32, d: u32) -> Result<ConceptClass> {
    check_grid_caps(b, d)?;
    let points = grid_points(b, d);
    let n = points.len();
    let w_max = halfspace_weight_bound(b, d);
    let theta_max = w_max * d as i64 * ((1i64 << b) - 1);
    let work = ((2 * w_max + 1) as u128).pow(d) * n as u128;
    if work > HALFSPACE_SWEEP_BUDGET {
        return Err(Error::cap("halfspace weight sweep", HALFSPACE_SWEEP_BUDGET, work));
    }

    // Weights are visited in lexicographic order and, for a fixed weight
    // vector, only the smallest threshold producing each truth table is
    // emitted, so first-seen is the canonical (smallest) parameter tuple.
    let mut found: HashMap<BitRow, Vec<i64>> = HashMap::new();
    let mut order: Vec<BitRow> = Vec::new();
    let mut w = vec![-w_max; d as usize];
    let mut dots: Vec<(i64, usize)> = Vec::with_capacity(n);
    loop {
        dots.clear();
        dots.extend(
            points
                .iter()
                .enumerate()
                .map(|(i, x)| (x.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>(), i)),
        );
        dots.sort_unstable();
        let mut thetas = vec![-theta_max];
        for j in 1..dots.len() {
            if dots[j].0 != dots[j - 1].0 {
                thetas.push(dots[j - 1].0 + 1);
            }
        }
        let top = dots.last().map(|d| d.0).unwrap_or(0);
        if top < theta_max {
            thetas.push(top + 1);
        }
        for theta in thetas {
            let row = BitRow::from_fn(n, |i| {
                points[i].iter().zip(&w).map(|(a, b)| a * b).sum::<i64>() >= theta
            });
            if !found.contains_key(&row) {
                let mut params = w.clone();
                params.push(theta);
                found.insert(row.clone(), params);
                order.push(row);
            }
        }
        let mut k = d as usize;
        loop {
            if k == 0 {
                let candidates = order
                    .into_iter()
                    .map(|row| {
                        let params = found.remove(&row).expect("recorded above");
                        let name = format!(
                            "hs(w={:?},theta={})",
                            &params[..d as usize],
                            params[d as usize]
                        );
                        (params, name, row)
                    })
                    .collect();
                return ConceptClass::from_candidates(
                    n,
                    points,
                    candidates,
                    Builtin::Halfspace { b, d },
                );
            }
            k -= 1;
            if w[k] < w_max {
                w[k] += 1;
                break;
            }
            w[k] = -w_max;
        }
    }
}

/// Largest shattered subset size plus one witness set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VcResult {
    pub dimension: usize,
    pub witness: Vec<usize>,
}

/// Exhaustive shattering search over subsets of the domain.
pub fn vc_dimension(class: &ConceptClass) -> Result<VcResult> {
    let n = class.domain_size();
    if n > VC_MAX_DOMAIN {
        return Err(Error::cap("domain size for VC search", VC_MAX_DOMAIN as u32, n as u64));
    }
    let masks: Vec<u32> = class
        .rows()
        .iter()
        .map(|r| r.ones_indices().fold(0u32, |m, i| m | (1 << i)))
        .collect();

    let mut stamp = vec![0u32; 1 << n.min(VC_MAX_DOMAIN)];
    let mut epoch = 0u32;
    let mut shatters = |set: &[usize]| -> bool {
        let need = 1usize << set.len();
        if masks.len() < need {
            return false;
        }
        epoch += 1;
        let mut distinct = 0;
        for &m in &masks {
            let mut proj = 0usize;
            for (j, &x) in set.iter().enumerate() {
                proj |= (((m >> x) & 1) as usize) << j;
            }
            if stamp[proj] != epoch {
                stamp[proj] = epoch;
                distinct += 1;
                if distinct == need {
                    return true;
                }
            }
        }
        false
    };

    // Shattered sets are closed under taking subsets, so every shattered
    // (k+1)-set extends its own shattered k-prefix.
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best = VcResult {
        dimension: 0,
        witness: Vec::new(),
    };
    if !shatters(&[]) {
        return Ok(best);
    }
    loop {
        let mut next = Vec::new();
        for set in &level {
            let start = set.last().map_or(0, |&m| m + 1);
            for x in start..n {
                let mut cand = set.clone();
                cand.push(x);
                if shatters(&cand) {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            return Ok(best);
        }
        best = VcResult {
            dimension: next[0].len(),
            witness: next[0].clone(),
        };
        level = next;
    }
}

/// `{f XOR g : f in a, g in b}`, deduplicated.
pub fn xor_class(a: &ConceptClass, b: &ConceptClass) -> Result<ConceptClass> {
    if a.domain_size() != b.domain_size() {
        return Err(Error::LengthMismatch {
            expected: a.domain_size(),
            actual: b.domain_size(),
        });
    }
    check_budget((a.len() * b.len()) as u128, a.domain_size() as u128)?;
    let mut rows = Vec::new();
    let mut names = Vec::new();
    let mut seen = HashSet::new();
    for (i, f) in a.rows().iter().enumerate() {
        for (j, g) in b.rows().iter().enumerate() {
            let x = f.xor(g);
            if seen.insert(x.clone()) {
                names.push(format!("{}^{}", a.name(i), b.name(j)));
                rows.push(x);
            }
        }
    }
    let params = vec![Vec::new(); rows.len()];
    ConceptClass::assemble(a.domain_size(), a.points().to_vec(), rows, names, params, false, None)
}

/// Exact `Pr_{x ~ d}[f(x) != h(x)]`.
pub fn disagreement(f: &BitRow, h: &BitRow, d: &FiniteDistribution) -> Result<Q> {
    if f.len() != d.len() || h.len() != d.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            actual: if f.len() != d.len() { f.len() } else { h.len() },
        });
    }
    Ok(disagreement_unchecked(f, h, d))
}

pub(crate) fn disagreement_weight(f: &BitRow, h: &BitRow, d: &FiniteDistribution) -> u64 {
    let w = d.weights();
    f.diff_indices(h).map(|i| w[i]).sum()
}

pub(crate) fn disagreement_unchecked(f: &BitRow, h: &BitRow, d: &FiniteDistribution) -> Q {
    crate::rational::q_u128(disagreement_weight(f, h, d) as u128, d.denom() as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn thr(b: u32) -> ConceptClass {
        make_builtin(Builtin::Threshold { b }).unwrap()
    }

    #[test]
    fn point_class_has_single_ones() {
        let c = make_builtin(Builtin::Point { b: 2 }).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.domain_size(), 4);
        assert!(c.rows().iter().all(|r| r.count_ones() == 1));
    }

    #[test]
    fn thresholds_use_non_strict_comparison() {
        let c = thr(2);
        assert_eq!(c.len(), 4);
        assert_eq!(c.row(0).to_string(), "1111");
        assert_eq!(c.row(3).to_string(), "0001");
        assert_eq!(c.name(1), "t_1");
    }

    #[test]
    fn lines_have_p_points_each() {
        let c = make_builtin(Builtin::Line { p: 3 }).unwrap();
        assert_eq!(c.len(), 9);
        assert!(c.rows().iter().all(|r| r.count_ones() == 3));
        // line(2,1): y = 2x + 1 passes through (1, 0) mod 3
        let idx = c.names().iter().position(|n| n == "line(2,1)").unwrap();
        assert!(c.eval(idx, c.point_index(&[1, 0]).unwrap()));
    }

    #[test]
    fn builtin_errors() {
        assert_eq!(make_builtin(Builtin::Line { p: 9 }), Err(Error::NotPrime(9)));
        assert!(make_builtin(Builtin::Line { p: 257 }).is_err());
        assert!(make_builtin(Builtin::Threshold { b: 17 }).unwrap_err().is_cap_violation());
        assert!(make_builtin(Builtin::Box { b: 4, d: 4 }).is_err());
    }

    #[test]
    fn boxes_include_the_empty_box_once() {
        let c = make_builtin(Builtin::Box { b: 1, d: 2 }).unwrap();
        // 3 intervals per axis, 9 nonempty boxes, plus the empty one
        assert_eq!(c.len(), 10);
        assert_eq!(c.rows().iter().filter(|r| r.count_ones() == 0).count(), 1);
    }

    #[test]
    fn halfspaces_in_the_plane() {
        // every dichotomy of {0,1}^2 except the two parities
        let c = make_builtin(Builtin::Halfspace { b: 1, d: 2 }).unwrap();
        assert_eq!(c.len(), 14);
        let one_d = make_builtin(Builtin::Halfspace { b: 2, d: 1 }).unwrap();
        // thresholds up, thresholds down, constants: 2 * 4 + 2 - 2 shared = 8
        assert_eq!(one_d.len(), 8);
    }

    #[test]
    fn vc_examples() {
        assert_eq!(vc_dimension(&thr(3)).unwrap().dimension, 1);
        let p2 = make_builtin(Builtin::Point { b: 2 }).unwrap();
        assert_eq!(vc_dimension(&p2).unwrap().dimension, 1);
        let l3 = make_builtin(Builtin::Line { p: 3 }).unwrap();
        let r = vc_dimension(&l3).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(r.witness.len(), 2);
        let hs = make_builtin(Builtin::Halfspace { b: 1, d: 2 }).unwrap();
        assert_eq!(vc_dimension(&hs).unwrap().dimension, 3);
    }

    #[test]
    fn vc_rejects_large_domains() {
        let l5 = make_builtin(Builtin::Line { p: 5 }).unwrap();
        assert!(vc_dimension(&l5).unwrap_err().is_cap_violation());
    }

    #[test]
    fn xor_examples() {
        let p1 = make_builtin(Builtin::Point { b: 1 }).unwrap();
        let x = xor_class(&p1, &p1).unwrap();
        let mut bits: Vec<String> = x.rows().iter().map(|r| r.to_string()).collect();
        bits.sort();
        assert_eq!(bits, vec!["00", "11"]);

        let c = thr(2);
        let zero = ConceptClass::new(4, vec![BitRow::zeros(4)]).unwrap();
        assert_eq!(xor_class(&c, &zero).unwrap().rows(), c.rows());

        let single = c.subclass(&[2]).unwrap();
        let z = xor_class(&single, &single).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.row(0).count_ones(), 0);

        assert!(xor_class(&c, &p1).is_err());
    }

    #[test]
    fn disagreement_examples() {
        let u = FiniteDistribution::uniform(4).unwrap();
        let f = BitRow::parse("1111").unwrap();
        let h = BitRow::parse("0001").unwrap();
        assert_eq!(disagreement(&f, &f, &u).unwrap(), q(0, 1));
        assert_eq!(disagreement(&f, &h, &u).unwrap(), q(3, 4));
        let pm = FiniteDistribution::point_mass(4, 0).unwrap();
        assert_eq!(disagreement(&f, &h, &pm).unwrap(), q(1, 1));
        let pm3 = FiniteDistribution::point_mass(4, 3).unwrap();
        assert_eq!(disagreement(&f, &h, &pm3).unwrap(), q(0, 1));
        assert!(disagreement(&f, &BitRow::zeros(3), &u).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = thr(2);
        let back = ConceptClass::from_json(&c.to_json()).unwrap();
        assert_eq!(back.rows(), c.rows());
        assert_eq!(back.names(), c.names());
        assert!(c.to_json().contains("\"bits\":\"1111\""));
    }

    #[test]
    fn dedup_unless_multiset() {
        let r = BitRow::parse("01").unwrap();
        assert_eq!(ConceptClass::new(2, vec![r.clone(), r.clone()]).unwrap().len(), 1);
        assert_eq!(ConceptClass::multiset(2, vec![r.clone(), r]).unwrap().len(), 2);
        assert!(ConceptClass::new(2, vec![]).is_err());
    }
}
