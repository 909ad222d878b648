//! Entropies, divergences and the min-entropy conditioning tail.

use dpcc::commsim::line_hard_distributions;
use dpcc::infomath::{
    augindex_bound, divergence_and_distance, entropy_suite, joint_entropy_suite, min_entropy_conditioning_tail,
    JointDistribution,
};

fn main() -> dpcc::error::Result<()> {
    let p = [0.5, 0.25, 0.125, 0.125];
    let s = entropy_suite(&p)?;
    println!("H = {:.4}, H2 = {:.4}, Hinf = {:.4}", s.shannon, s.renyi2, s.min_entropy);

    let dv = divergence_and_distance(&[0.5, 0.5], &[0.9, 0.1])?;
    println!("KL = {:.4} bits, distance = {:.4}, Pinsker holds: {}", dv.kl_bits, dv.statistical_distance, dv.pinsker_ok);

    // Line and point drawn from the two hard distributions of Line_5.
    let (mu0, mu1, _) = line_hard_distributions(5)?;
    for (name, mu) in [("independent", &mu0), ("on the line", &mu1)] {
        let j = joint_entropy_suite(&JointDistribution::from_pair(mu));
        println!("{name}: H(f) = {:.3}, H(x) = {:.3}, I(f;x) = {:.3}", j.h_x, j.h_y, j.mutual_information);
        let tail = min_entropy_conditioning_tail(mu, 5, 1.0)?;
        println!("  Pr[conditioning costs > s + 1 bits] = {} (bound {})", tail.bad_probability, tail.bound);
    }

    for eps in [0.0, 0.125, 0.25] {
        println!("AugIndex_8 lower bound at eps {eps}: {:.3} bits", augindex_bound(8, eps)?);
    }
    Ok(())
}
