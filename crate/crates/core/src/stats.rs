//! Binomial intervals, exact binomial tails, and seeded random streams.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::rational::Q;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Two-sided Clopper-Pearson interval at the given confidence level.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Interval {
    assert!(trials > 0 && successes <= trials);
    let a = (1.0 - confidence) / 2.0;
    let k = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("positive shape").inverse_cdf(a)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).expect("positive shape").inverse_cdf(1.0 - a)
    };
    Interval { low, high }
}

/// `Pr[Binomial(k, q) >= t]`, exactly.
pub fn binomial_tail(k: u32, q: &Q, t: u32) -> Q {
    let one = Q::one();
    let rest = &one - q;
    let mut total = Q::zero();
    let mut choose = BigInt::one();
    for j in 0..=k {
        if j > 0 {
            choose = choose * BigInt::from(k - j + 1) / BigInt::from(j);
        }
        if j >= t {
            total += Q::from_integer(choose.clone()) * pow(q, j) * pow(&rest, k - j);
        }
    }
    total
}

fn pow(x: &Q, e: u32) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * x)
}
