//! Mistake trees, Littlestone dimension, the inductive halfspace tree and the
//! augmented-index embedding.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::IndexSet;
use crate::concepts::{grid_points, make_builtin, Builtin, ConceptClass};
use crate::error::{Error, Result};

/// Reachable-state budget for the Littlestone recursion.
pub const LDIM_STATE_BUDGET: usize = 1 << 20;
/// Largest depth `build_halfspace_tree` will produce.
pub const HALFSPACE_TREE_MAX_DEPTH: u32 = 14;

/// Internal nodes query a domain point; the left child is label 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MistakeTree {
    Node {
        point: usize,
        left: Box<MistakeTree>,
        right: Box<MistakeTree>,
    },
    Leaf {
        leaf: usize,
    },
}

impl MistakeTree {
    pub fn leaf(concept: usize) -> Self {
        MistakeTree::Leaf { leaf: concept }
    }

    pub fn node(point: usize, left: MistakeTree, right: MistakeTree) -> Self {
        MistakeTree::Node {
            point,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            MistakeTree::Leaf { .. } => 0,
            MistakeTree::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn is_complete(&self) -> bool {
        fn go(t: &MistakeTree) -> Option<usize> {
            match t {
                MistakeTree::Leaf { .. } => Some(0),
                MistakeTree::Node { left, right, .. } => {
                    let l = go(left)?;
                    (go(right)? == l).then_some(l + 1)
                }
            }
        }
        go(self).is_some()
    }

    /// Leaf concepts from left to right.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            MistakeTree::Leaf { leaf } => out.push(*leaf),
            MistakeTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    /// Applies `f` to every internal point and `g` to every leaf.
    pub fn map(&self, f: &impl Fn(usize) -> usize, g: &impl Fn(usize) -> usize) -> MistakeTree {
        match self {
            MistakeTree::Leaf { leaf } => MistakeTree::leaf(g(*leaf)),
            MistakeTree::Node { point, left, right } => {
                MistakeTree::node(f(*point), left.map(f, g), right.map(f, g))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trees always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Path from the root to the offending node, `0` = left, `1` = right.
    pub node_path: String,
    pub point: usize,
    pub leaf: usize,
    pub leaf_in_right_subtree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeValidation {
    pub valid: bool,
    pub complete: bool,
    pub depth: usize,
    pub first_violation: Option<Violation>,
}

pub fn validate_tree(t: &MistakeTree, c: &ConceptClass) -> Result<TreeValidation> {
    fn walk(
        t: &MistakeTree,
        c: &ConceptClass,
        path: &mut String,
        violation: &mut Option<Violation>,
    ) -> Result<Vec<usize>> {
        match t {
            MistakeTree::Leaf { leaf } => {
                if *leaf >= c.len() {
                    return Err(Error::InvalidTree(format!("leaf concept {leaf} out of range")));
                }
                Ok(vec![*leaf])
            }
            MistakeTree::Node { point, left, right } => {
                if *point >= c.domain_size() {
                    return Err(Error::InvalidTree(format!("node point {point} out of range")));
                }
                path.push('0');
                let l = walk(left, c, path, violation)?;
                path.pop();
                path.push('1');
                let r = walk(right, c, path, violation)?;
                path.pop();
                if violation.is_none() {
                    let bad_left = l.iter().find(|&&f| c.eval(f, *point)).map(|&f| (f, false));
                    let bad_right = r.iter().find(|&&f| !c.eval(f, *point)).map(|&f| (f, true));
                    if let Some((leaf, side)) = bad_left.or(bad_right) {
                        *violation = Some(Violation {
                            node_path: path.clone(),
                            point: *point,
                            leaf,
                            leaf_in_right_subtree: side,
                        });
                    }
                }
                let mut all = l;
                all.extend(r);
                Ok(all)
            }
        }
    }
    let mut violation = None;
    walk(t, c, &mut String::new(), &mut violation)?;
    Ok(TreeValidation {
        valid: violation.is_none(),
        complete: t.is_complete(),
        depth: t.depth(),
        first_violation: violation,
    })
}

struct LdimSolver<'a> {
    columns: Vec<IndexSet>,
    memo: HashMap<IndexSet, (usize, Option<usize>)>,
    class: &'a ConceptClass,
}

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

impl LdimSolver<'_> {
    fn solve(&mut self, s: &IndexSet) -> Result<usize> {
        if let Some(&(v, _)) = self.memo.get(s) {
            return Ok(v);
        }
        let size = s.len();
        if size <= 1 {
            return Ok(0);
        }
        if self.memo.len() >= LDIM_STATE_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "Littlestone recursion exceeded {LDIM_STATE_BUDGET} states"
            )));
        }
        let cap = floor_log2(size);
        let mut best = 0;
        let mut best_point = None;
        for x in 0..self.class.domain_size() {
            let ones = s.and(&self.columns[x]);
            let n1 = ones.len();
            if n1 == 0 || n1 == size {
                continue;
            }
            let zeros = s.and_not(&self.columns[x]);
            let (small, large) = if n1 <= size - n1 { (ones, zeros) } else { (zeros, ones) };
            if 1 + floor_log2(small.len()) <= best {
                continue;
            }
            let a = self.solve(&small)?;
            if 1 + a <= best {
                continue;
            }
            let b = self.solve(&large)?;
            let v = 1 + a.min(b);
            if v > best {
                best = v;
                best_point = Some(x);
                if best == cap {
                    break;
                }
            }
        }
        self.memo.insert(s.clone(), (best, best_point));
        Ok(best)
    }

    /// A complete tree of exactly `depth` over `s`, assuming `ldim(s) >= depth`.
    fn witness(&mut self, s: &IndexSet, depth: usize) -> Result<MistakeTree> {
        if depth == 0 {
            return Ok(MistakeTree::leaf(s.first().expect("nonempty state")));
        }
        self.solve(s)?;
        let x = self.memo[s].1.expect("positive value has a split point");
        let ones = s.and(&self.columns[x]);
        let zeros = s.and_not(&self.columns[x]);
        Ok(MistakeTree::node(
            x,
            self.witness(&zeros, depth - 1)?,
            self.witness(&ones, depth - 1)?,
        ))
    }
}

/// Exact Littlestone dimension with a complete witness tree of that depth.
pub fn ldim(c: &ConceptClass) -> Result<(usize, MistakeTree)> {
    let n = c.len();
    let mut columns = vec![IndexSet::empty(n); c.domain_size()];
    for (i, row) in c.rows().iter().enumerate() {
        for x in row.ones_indices() {
            columns[x].insert(i);
        }
    }
    let mut solver = LdimSolver {
        columns,
        memo: HashMap::new(),
        class: c,
    };
    let all = IndexSet::full(n);
    let value = solver.solve(&all)?;
    let tree = solver.witness(&all, value)?;
    Ok((value, tree))
}

/// Rescales an integer halfspace so every grid point gets a distinct dot product.
pub fn collision_free_halfspace(w_prime: &[i64], theta_prime: i64, b: u32) -> Result<(Vec<i64>, i64)> {
    let d = w_prime.len();
    if d == 0 {
        return Err(Error::InvalidParameter("weight vector must be nonempty".into()));
    }
    if (b as usize) * d > 24 {
        return Err(Error::cap("b*d for collision-free check", 24u32, (b as usize * d) as u64));
    }
    let points = grid_points(b, d as u32);
    let literal = scaled(w_prime, theta_prime, d as u32 + 1, d as u32, |i| 1i128 << (i + 1));
    if let Ok((w, theta)) = &literal {
        if is_collision_free_rep(w_prime, theta_prime, w, *theta, &points) {
            return literal;
        }
    }
    // Base-2^b offsets keep grid points apart once the coordinates exceed 1.
    let bd = b * d as u32;
    let (w, theta) = scaled(w_prime, theta_prime, bd + 1, bd, |i| 1i128 << (b as usize * i))?;
    debug_assert!(is_collision_free_rep(w_prime, theta_prime, &w, theta, &points));
    Ok((w, theta))
}

fn scaled(
    w_prime: &[i64],
    theta_prime: i64,
    scale_exp: u32,
    margin_exp: u32,
    offset: impl Fn(usize) -> i128,
) -> Result<(Vec<i64>, i64)> {
    let overflow = || Error::Overflow("collision-free halfspace weights");
    let scale = 1i128.checked_shl(scale_exp).ok_or_else(overflow)?;
    let margin = 1i128.checked_shl(margin_exp).ok_or_else(overflow)?;
    let w = w_prime
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let v = (wi as i128).checked_mul(scale).and_then(|v| v.checked_add(offset(i)));
            v.and_then(|v| i64::try_from(v).ok()).ok_or_else(overflow)
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = (theta_prime as i128)
        .checked_mul(scale)
        .and_then(|v| v.checked_sub(margin))
        .and_then(|v| i64::try_from(v).ok())
        .ok_or_else(overflow)?;
    Ok((w, theta))
}

fn dot(w: &[i64], x: &[i64]) -> i128 {
    w.iter().zip(x).map(|(&a, &b)| a as i128 * b as i128).sum()
}

fn is_collision_free_rep(w0: &[i64], t0: i64, w: &[i64], t: i64, points: &[Vec<i64>]) -> bool {
    let same = points
        .iter()
        .all(|x| (dot(w0, x) >= t0 as i128) == (dot(w, x) >= t as i128));
    let mut dots: Vec<i128> = points.iter().map(|x| dot(w, x)).collect();
    dots.sort_unstable();
    same && dots.windows(2).all(|p| p[0] != p[1])
}

/// Balanced search tree over thresholds `t_lo..t_hi` (with `t_j(k) = [k >= j]`).
/// `point(k)` and `leaf(j)` rename positions and thresholds.
fn threshold_search_tree(
    lo: usize,
    hi: usize,
    point: &impl Fn(usize) -> usize,
    leaf: &impl Fn(usize) -> Result<usize>,
) -> Result<MistakeTree> {
    if hi - lo == 1 {
        return Ok(MistakeTree::leaf(leaf(lo)?));
    }
    let mid = (lo + hi) / 2;
    // t_j(mid - 1) = 1 exactly for j < mid
    Ok(MistakeTree::node(
        point(mid - 1),
        threshold_search_tree(mid, hi, point, leaf)?,
        threshold_search_tree(lo, mid, point, leaf)?,
    ))
}

pub fn halfspace_tree_depth(d: u32, b: u32) -> u32 {
    (d * (d.saturating_sub(1)) / 2 + 1) * b
}

/// Complete mistake tree over `HS_b^d`, built one dimension at a time.
/// Returns the tree together with the class its leaves index.
pub fn build_halfspace_tree(d: u32, b: u32) -> Result<(MistakeTree, ConceptClass)> {
    if d == 0 || b == 0 {
        return Err(Error::InvalidParameter("d and b must be at least 1".into()));
    }
    let depth = halfspace_tree_depth(d, b);
    if depth > HALFSPACE_TREE_MAX_DEPTH {
        return Err(Error::cap("halfspace tree depth", HALFSPACE_TREE_MAX_DEPTH, depth));
    }
    let base = make_builtin(Builtin::Halfspace { b, d: 1 })?;
    let index = base.row_index();
    let n = 1usize << b;
    let mut tree = threshold_search_tree(0, n, &|k| k, &|j| {
        let row = crate::bits::BitRow::from_fn(n, |k| k >= j);
        index
            .get(&row)
            .copied()
            .ok_or_else(|| Error::InvalidTree("threshold missing from HS class".into()))
    })?;
    let mut class = base;
    for dim in 2..=d {
        let next = make_builtin(Builtin::Halfspace { b, d: dim })?;
        tree = extend_dimension(&tree, &class, &next, b, dim)?;
        class = next;
    }
    Ok((tree, class))
}

fn extend_dimension(
    tree: &MistakeTree,
    lower: &ConceptClass,
    upper: &ConceptClass,
    b: u32,
    dim: u32,
) -> Result<MistakeTree> {
    let side = 1usize << b;
    let lower_points = lower.points();
    let index = upper.row_index();
    let upper_points = upper.points();
    match tree {
        MistakeTree::Node { point, left, right } => Ok(MistakeTree::node(
            point * side,
            extend_dimension(left, lower, upper, b, dim)?,
            extend_dimension(right, lower, upper, b, dim)?,
        )),
        MistakeTree::Leaf { leaf } => {
            let params = lower.params(*leaf);
            let (w_prime, theta) = collision_free_halfspace(&params[..dim as usize - 1], params[dim as usize - 1], b)?;
            let mut order: Vec<(i128, usize)> = lower_points
                .iter()
                .enumerate()
                .map(|(i, y)| (dot(&w_prime, y), i))
                .collect();
            order.sort_unstable();
            let point = |k: usize| order[k].1 * side + 1;
            let leaf = |j: usize| -> Result<usize> {
                let z = order[j].0;
                let w_d = (theta as i128 - z) as i64;
                let row = crate::bits::BitRow::from_fn(upper_points.len(), |i| {
                    let x = &upper_points[i];
                    dot(&w_prime, &x[..dim as usize - 1]) + w_d as i128 * x[dim as usize - 1] as i128
                        >= theta as i128
                });
                index
                    .get(&row)
                    .copied()
                    .ok_or_else(|| Error::InvalidTree("embedded halfspace missing from class".into()))
            };
            threshold_search_tree(0, order.len(), &point, &leaf)
        }
    }
}

/// Maps for embedding augmented index into evaluation of `c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AugIndexEmbedding {
    pub d: usize,
    /// `concept_map[x]`, `x` read with its first bit most significant.
    pub concept_map: Vec<usize>,
    /// `point_map[i][prefix]` for prefixes of length `i < d`.
    pub point_map: Vec<Vec<usize>>,
}

impl AugIndexEmbedding {
    /// Checks `c[m_C(x)](m_X(x_1..x_{i-1})) = x_i` for every `x` and `i`.
    pub fn verify(&self, c: &ConceptClass) -> bool {
        let d = self.d;
        (0..1usize << d).all(|x| {
            (0..d).all(|i| {
                let prefix = x >> (d - i);
                let bit = (x >> (d - 1 - i)) & 1 == 1;
                c.eval(self.concept_map[x], self.point_map[i][prefix]) == bit
            })
        })
    }
}

pub fn augindex_embedding(t: &MistakeTree, c: &ConceptClass) -> Result<AugIndexEmbedding> {
    let v = validate_tree(t, c)?;
    if !v.valid {
        return Err(Error::InvalidTree("tree violates the mistake-tree condition".into()));
    }
    if !v.complete {
        return Err(Error::InvalidTree("tree is not complete".into()));
    }
    let d = v.depth;
    let mut point_map: Vec<Vec<usize>> = (0..d).map(|i| vec![0; 1 << i]).collect();
    let mut concept_map = vec![0; 1 << d];
    fn fill(t: &MistakeTree, level: usize, prefix: usize, pm: &mut [Vec<usize>], cm: &mut [usize]) {
        match t {
            MistakeTree::Leaf { leaf } => cm[prefix] = *leaf,
            MistakeTree::Node { point, left, right } => {
                pm[level][prefix] = *point;
                fill(left, level + 1, prefix << 1, pm, cm);
                fill(right, level + 1, (prefix << 1) | 1, pm, cm);
            }
        }
    }
    fill(t, 0, 0, &mut point_map, &mut concept_map);
    let e = AugIndexEmbedding {
        d,
        concept_map,
        point_map,
    };
    if !e.verify(c) {
        return Err(Error::InvalidTree("embedding invariant failed".into()));
    }
    Ok(e)
}
