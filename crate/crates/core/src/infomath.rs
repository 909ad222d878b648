//! Entropies, divergences, statistical distance, and the numeric bounds used
//! for augmented index. Entropies are in bits; KL is given in nats and bits.

use serde::Serialize;

use crate::distribution::{FiniteDistribution, PairDistribution};
use crate::error::{Error, Result};
use crate::rational::{q_u128, serde_q, Q};

const TOL: f64 = 1e-12;

fn check(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidDistribution("weights must be finite and non-negative".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > TOL * p.len().max(1) as f64 {
        return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
    }
    Ok(())
}

/// `H(p)` in bits with `0 log 0 = 0`.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

pub fn renyi2(p: &[f64]) -> f64 {
    -p.iter().map(|x| x * x).sum::<f64>().log2()
}

pub fn min_entropy(p: &[f64]) -> f64 {
    -p.iter().cloned().fold(0.0, f64::max).log2()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropySuite {
    pub shannon: f64,
    pub renyi2: f64,
    pub min_entropy: f64,
    /// `log|X| >= H >= H_2 >= H_inf` up to rounding.
    pub ordering_ok: bool,
}

pub fn entropy_suite(p: &[f64]) -> Result<EntropySuite> {
    check(p)?;
    let (h, h2, hinf) = (shannon(p), renyi2(p), min_entropy(p));
    let log_n = (p.len() as f64).log2();
    Ok(EntropySuite {
        shannon: h,
        renyi2: h2,
        min_entropy: hinf,
        ordering_ok: log_n + 1e-9 >= h && h + 1e-9 >= h2 && h2 + 1e-9 >= hinf,
    })
}

pub fn entropy_suite_of(d: &FiniteDistribution) -> EntropySuite {
    entropy_suite(&d.to_f64_vec()).expect("finite distributions are valid")
}

/// Joint distribution of `(x, y)` with `x` indexing rows.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub nx: usize,
    pub ny: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn new(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                actual: p.len(),
            });
        }
        check(&p)?;
        Ok(JointDistribution { nx, ny, p })
    }

    pub fn from_pair(d: &PairDistribution) -> Self {
        JointDistribution {
            nx: d.rows,
            ny: d.cols,
            p: d.flat().to_f64_vec(),
        }
    }

    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        let p = px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
        Self::new(px.len(), py.len(), p)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    pub fn flat(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.nx).map(|x| (0..self.ny).map(|y| self.get(x, y)).sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny).map(|y| (0..self.nx).map(|x| self.get(x, y)).sum()).collect()
    }

    /// `H(x | y)`.
    pub fn conditional_x_given_y(&self) -> f64 {
        shannon(&self.p) - shannon(&self.marginal_y())
    }

    pub fn conditional_y_given_x(&self) -> f64 {
        shannon(&self.p) - shannon(&self.marginal_x())
    }

    pub fn mutual_information(&self) -> f64 {
        // Clamped: rounding can leave a tiny negative value for independent pairs.
        (shannon(&self.marginal_x()) + shannon(&self.marginal_y()) - shannon(&self.p)).max(0.0)
    }

    /// Product of the two marginals.
    pub fn independent_version(&self) -> JointDistribution {
        let (mx, my) = (self.marginal_x(), self.marginal_y());
        JointDistribution {
            nx: self.nx,
            ny: self.ny,
            p: mx.iter().flat_map(|a| my.iter().map(move |b| a * b)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointEntropies {
    pub joint: EntropySuite,
    pub h_x: f64,
    pub h_y: f64,
    pub h_x_given_y: f64,
    pub h_y_given_x: f64,
    pub mutual_information: f64,
}

pub fn joint_entropy_suite(j: &JointDistribution) -> JointEntropies {
    JointEntropies {
        joint: entropy_suite(&j.p).expect("validated on construction"),
        h_x: shannon(&j.marginal_x()),
        h_y: shannon(&j.marginal_y()),
        h_x_given_y: j.conditional_x_given_y(),
        h_y_given_x: j.conditional_y_given_x(),
        mutual_information: j.mutual_information(),
    }
}

/// Joint distribution of three variables, for the chain rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint3 {
    pub dims: [usize; 3],
    p: Vec<f64>,
}

impl Joint3 {
    pub fn new(dims: [usize; 3], p: Vec<f64>) -> Result<Self> {
        if p.len() != dims.iter().product::<usize>() {
            return Err(Error::LengthMismatch {
                expected: dims.iter().product(),
                actual: p.len(),
            });
        }
        check(&p)?;
        Ok(Joint3 { dims, p })
    }

    fn marginal(&self, keep: [bool; 3]) -> Vec<f64> {
        let [a, b, c] = self.dims;
        let size = |i: usize, n: usize| if keep[i] { n } else { 1 };
        let (sa, sb, sc) = (size(0, a), size(1, b), size(2, c));
        let mut out = vec![0.0; sa * sb * sc];
        for x in 0..a {
            for y in 0..b {
                for z in 0..c {
                    let ix = if keep[0] { x } else { 0 };
                    let iy = if keep[1] { y } else { 0 };
                    let iz = if keep[2] { z } else { 0 };
                    out[(ix * sb + iy) * sc + iz] += self.p[(x * b + y) * c + z];
                }
            }
        }
        out
    }

    fn h(&self, keep: [bool; 3]) -> f64 {
        shannon(&self.marginal(keep))
    }

    /// `I(x; y z)`.
    pub fn mi_x_yz(&self) -> f64 {
        (self.h([true, false, false]) + self.h([false, true, true]) - self.h([true, true, true])).max(0.0)
    }

    pub fn mi_x_y(&self) -> f64 {
        (self.h([true, false, false]) + self.h([false, true, false]) - self.h([true, true, false])).max(0.0)
    }

    /// `I(x; z | y)`.
    pub fn mi_x_z_given_y(&self) -> f64 {
        (self.h([true, true, false]) + self.h([false, true, true])
            - self.h([true, true, true])
            - self.h([false, true, false]))
        .max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Divergence {
    /// `+inf` when `p` charges a point `q` does not.
    pub kl_nats: f64,
    pub kl_bits: f64,
    pub finite: bool,
    pub statistical_distance: f64,
    /// `Delta <= sqrt(KL_nats / 2)`.
    pub pinsker_ok: bool,
}

pub fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

/// Half the L1 distance.
pub fn statistical_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

/// `max_T p(T) - q(T)` over all events; exhaustive.
pub fn statistical_distance_by_events(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() > 20 {
        return Err(Error::cap("event enumeration domain", 20u32, p.len() as u64));
    }
    Ok((0usize..1 << p.len())
        .map(|t| {
            (0..p.len())
                .filter(|i| t >> i & 1 == 1)
                .map(|i| p[i] - q[i])
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

pub fn divergence_and_distance(p: &[f64], q: &[f64]) -> Result<Divergence> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    check(p)?;
    check(q)?;
    let kl = kl_nats(p, q).max(0.0);
    let sd = statistical_distance(p, q);
    Ok(Divergence {
        kl_nats: kl,
        kl_bits: kl / std::f64::consts::LN_2,
        finite: kl.is_finite(),
        statistical_distance: sd,
        pinsker_ok: sd <= (kl / 2.0).sqrt() + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    /// `Pr_y[H_inf(x | y) < H_inf(x) - s - t]`, exactly.
    #[serde(with = "serde_q")]
    pub bad_probability: Q,
    pub bound: f64,
    pub holds: bool,
}

/// Probability that conditioning on `y` (with at most `2^s_bits` values)
/// costs more than `s_bits + t` bits of min-entropy of `x`. Rows are `x`.
pub fn min_entropy_conditioning_tail(j: &PairDistribution, s_bits: u32, t: f64) -> Result<TailReport> {
    let support_y = (0..j.cols).filter(|&y| (0..j.rows).any(|x| j.weight(x, y) > 0)).count();
    if s_bits < 64 && support_y as u128 > 1u128 << s_bits {
        return Err(Error::InvalidParameter(format!(
            "y takes {support_y} values, more than 2^{s_bits}"
        )));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let denom = j.denom() as u128;
    let wx_max = (0..j.rows).map(|x| j.flat().weights()[x * j.cols..(x + 1) * j.cols].iter().map(|&w| w as u128).sum::<u128>()).max().unwrap_or(0);
    let exp = s_bits as f64 + t;
    let mut bad = 0u128;
    for y in 0..j.cols {
        let wy: u128 = (0..j.rows).map(|x| j.weight(x, y) as u128).sum();
        if wy == 0 {
            continue;
        }
        let w_max = (0..j.rows).map(|x| j.weight(x, y) as u128).max().unwrap_or(0);
        // H_inf(x|y) < H_inf(x) - s - t  <=>  w_max * D > 2^(s+t) * wx_max * wy
        let lhs = w_max * denom;
        let is_bad = if exp.fract() == 0.0 && exp < 32.0 {
            let rhs = (wx_max * wy).checked_mul(1u128 << exp as u32);
            rhs.is_some_and(|r| lhs > r)
        } else {
            lhs as f64 > exp.exp2() * wx_max as f64 * wy as f64
        };
        if is_bad {
            bad += wy;
        }
    }
    let bad_probability = q_u128(bad, denom);
    let bound = (-t).exp2();
    Ok(TailReport {
        holds: crate::rational::to_f64(&bad_probability) < bound,
        bad_probability,
        bound,
    })
}

/// `(1 - H(eps)) d`, the distributional lower bound for augmented index.
pub fn augindex_bound(d: u32, eps: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside [0, 1/2]")));
    }
    Ok((1.0 - binary_entropy(eps)) * d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-5
    }

    #[test]
    fn entropy_examples() {
        let u = entropy_suite(&[0.25; 4]).unwrap();
        assert!(close(u.shannon, 2.0) && close(u.renyi2, 2.0) && close(u.min_entropy, 2.0));
        let s = entropy_suite(&[0.5, 0.25, 0.25]).unwrap();
        assert!(close(s.shannon, 1.5));
        assert!(close(s.renyi2, 1.41504));
        assert!(close(s.min_entropy, 1.0));
        assert!(s.ordering_ok);
        assert!(entropy_suite(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn independent_joint_has_no_information() {
        let j = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        assert!(j.mutual_information().abs() < 1e-12);
        let e = joint_entropy_suite(&j);
        assert!(close(e.h_x_given_y, e.h_x));
    }

    #[test]
    fn divergence_examples() {
        let same = divergence_and_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(same.kl_nats, 0.0);
        assert_eq!(same.statistical_distance, 0.0);
        let d = divergence_and_distance(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!(close(d.statistical_distance, 0.5));
        assert!(close(d.kl_nats, 0.693147));
        assert!(close((d.kl_nats / 2.0).sqrt(), 0.588705));
        assert!(d.pinsker_ok);
        let inf = divergence_and_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(!inf.finite && inf.pinsker_ok);
    }

    #[test]
    fn event_form_matches_half_l1() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.25, 0.25, 0.25, 0.25];
        assert!((statistical_distance_by_events(&p, &q).unwrap() - statistical_distance(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn tail_examples() {
        // x uniform on 4 values, y its first bit
        let j = PairDistribution::from_counts(4, 2, vec![1, 0, 1, 0, 0, 1, 0, 1]).unwrap();
        let r = min_entropy_conditioning_tail(&j, 1, 1.0).unwrap();
        assert_eq!(r.bad_probability, q_u128(0, 1));
        assert!(r.holds);
        let ind = PairDistribution::from_counts(3, 2, vec![1, 2, 1, 2, 1, 2]).unwrap();
        assert_eq!(min_entropy_conditioning_tail(&ind, 1, 0.5).unwrap().bad_probability, q_u128(0, 1));
        assert!(min_entropy_conditioning_tail(&ind, 0, 1.0).is_err());
    }

    #[test]
    fn augindex_bound_examples() {
        assert_eq!(augindex_bound(5, 0.0).unwrap(), 5.0);
        assert!(augindex_bound(3, 0.5).unwrap().abs() < 1e-12);
        assert!((augindex_bound(3, 0.125).unwrap() - 1.36933).abs() < 1e-4);
        assert!(close(binary_entropy(0.125), 0.54356));
        assert!(augindex_bound(3, 0.6).is_err());
    }

    #[test]
    fn chain_rule_on_a_small_joint() {
        let p: Vec<f64> = (1..=12).map(|i| i as f64 / 78.0).collect();
        let j = Joint3::new([2, 3, 2], p).unwrap();
        assert!((j.mi_x_yz() - j.mi_x_y() - j.mi_x_z_given_y()).abs() < 1e-12);
    }
}
