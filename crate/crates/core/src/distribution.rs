//! Finite probability distributions with exact integer weights.
//!
//! Every distribution is stored as non-negative integer numerators over a
//! common denominator, so disagreement masses and protocol errors come out
//! as exact rationals without big-number arithmetic in the hot loops.

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q_u128, to_f64, Q};

/// Float weights are snapped to this many binary digits.
const FLOAT_DENOM_BITS: u32 = 40;
const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    weights: Vec<u64>,
    denom: u64,
}

impl FiniteDistribution {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(FiniteDistribution {
            weights: vec![1; n],
            denom: n as u64,
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::InvalidDistribution(format!(
                "point mass at {at} outside support of size {n}"
            )));
        }
        let mut weights = vec![0; n];
        weights[at] = 1;
        Ok(FiniteDistribution { weights, denom: 1 })
    }

    /// Normalizes arbitrary non-negative integer weights.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or(Error::Overflow("distribution weights"))?;
        if total == 0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let g = counts.iter().fold(total, |g, &c| g.gcd(&c));
        Ok(FiniteDistribution {
            weights: counts.into_iter().map(|c| c / g).collect(),
            denom: total / g,
        })
    }

    /// Exact rational weights; they must sum to 1 within 1e-12 and are then
    /// renormalized to sum to exactly 1.
    pub fn from_ratios(probs: &[Q]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut lcm = num_bigint::BigInt::from(1);
        for p in probs {
            if p < &Q::from_integer(0.into()) {
                return Err(Error::InvalidDistribution(format!("negative weight {p}")));
            }
            lcm = lcm.lcm(p.denom());
        }
        let nums: Vec<u64> = probs
            .iter()
            .map(|p| {
                let n = p.numer() * (&lcm / p.denom());
                u64::try_from(n).map_err(|_| Error::Overflow("rational weights"))
            })
            .collect::<Result<_>>()?;
        let total: Q = probs.iter().sum();
        if (to_f64(&total) - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Self::from_counts(nums)
    }

    /// Float weights, snapped to a 2^-40 grid after the sum check.
    pub fn from_f64(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let scale = (1u64 << FLOAT_DENOM_BITS) as f64;
        Self::from_counts(probs.iter().map(|p| (p * scale).round() as u64).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn prob(&self, i: usize) -> Q {
        q_u128(self.weights[i] as u128, self.denom as u128)
    }

    pub fn prob_f64(&self, i: usize) -> f64 {
        self.weights[i] as f64 / self.denom as f64
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.prob_f64(i)).collect()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(i, _)| i)
    }

    /// Exact mass of the indices selected by `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(usize) -> bool) -> Q {
        let num: u128 = self
            .weights
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, &w)| w as u128)
            .sum();
        q_u128(num, self.denom as u128)
    }

    pub fn sampler(&self) -> Sampler {
        let mut acc = 0u64;
        let cumulative = self
            .weights
            .iter()
            .map(|&w| {
                acc += w;
                acc
            })
            .collect();
        Sampler {
            cumulative,
            denom: self.denom,
        }
    }
}

/// Inverse-CDF sampler over integer weights; exact up to the generator.
#[derive(Clone, Debug)]
pub struct Sampler {
    cumulative: Vec<u64>,
    denom: u64,
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen_range(0..self.denom);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// A distribution over pairs `(row, col)`, e.g. Alice and Bob inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDistribution {
    pub rows: usize,
    pub cols: usize,
    dist: FiniteDistribution,
}

impl PairDistribution {
    pub fn new(rows: usize, cols: usize, dist: FiniteDistribution) -> Result<Self> {
        if dist.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: dist.len(),
            });
        }
        Ok(PairDistribution { rows, cols, dist })
    }

    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, FiniteDistribution::uniform(rows * cols)?)
    }

    /// `row ~ row_dist`, then `col ~ col_dist` independently.
    pub fn product(row_dist: &FiniteDistribution, col_dist: &FiniteDistribution) -> Result<Self> {
        let mut counts = Vec::with_capacity(row_dist.len() * col_dist.len());
        for &a in row_dist.weights() {
            for &b in col_dist.weights() {
                counts.push(a.checked_mul(b).ok_or(Error::Overflow("product distribution"))?);
            }
        }
        Self::new(
            row_dist.len(),
            col_dist.len(),
            FiniteDistribution::from_counts(counts)?,
        )
    }

    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        Self::new(rows, cols, FiniteDistribution::from_counts(counts)?)
    }

    pub fn weight(&self, row: usize, col: usize) -> u64 {
        self.dist.weights()[row * self.cols + col]
    }

    pub fn denom(&self) -> u64 {
        self.dist.denom()
    }

    pub fn prob(&self, row: usize, col: usize) -> Q {
        self.dist.prob(row * self.cols + col)
    }

    pub fn flat(&self) -> &FiniteDistribution {
        &self.dist
    }

    /// Marginal weight of a row (numerator over `denom()`).
    pub fn row_weight(&self, row: usize) -> u64 {
        (0..self.cols).map(|c| self.weight(row, c)).sum()
    }

    /// The distribution of the column conditioned on the row; `None` when
    /// the row has zero mass.
    pub fn conditional_on_row(&self, row: usize) -> Option<FiniteDistribution> {
        let counts: Vec<u64> = (0..self.cols).map(|c| self.weight(row, c)).collect();
        FiniteDistribution::from_counts(counts).ok()
    }

    pub fn col_marginal(&self) -> FiniteDistribution {
        let counts = (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.weight(r, c)).sum())
            .collect();
        FiniteDistribution::from_counts(counts).expect("marginal of a valid distribution")
    }
}
