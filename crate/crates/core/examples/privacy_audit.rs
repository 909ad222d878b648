//! Exact and Monte-Carlo privacy audits.

use dpcc::dpaudit::{audit, AuditMode, EmMechanism, LeakyMechanism, LineReleaseMechanism, RandomizedResponse};
use dpcc::dplearn::{Hypothesis, LineLearnerConfig};

fn main() -> dpcc::error::Result<()> {
    let em = audit(&EmMechanism { alpha: 1.0 }, &[(vec![10, 8], vec![9, 8])], 1.0, 0.0, AuditMode::Exact)?;
    println!("EM (10,8) vs (9,8): max ratio {:.5}, {:?}", em.max_ratio, em.verdict);

    let rr = RandomizedResponse { flip: 0.25 };
    for alpha in [1.0, 3f64.ln()] {
        let r = audit(&rr, &[(true, false)], alpha, 0.0, AuditMode::Exact)?;
        println!("randomized response at alpha {alpha:.4}: ratio {:.3}, {:?}", r.max_ratio, r.verdict);
    }

    let cfg = LineLearnerConfig::new(11, 0.2, 0.25, 1.0, 0.05);
    let release = LineReleaseMechanism { cfg };
    let (h, g) = (Hypothesis::line(1, 2, 11), Hypothesis::line(4, 0, 11));
    let r = audit(&release, &[((h.clone(), 1), (g, 1)), ((h.clone(), 3), (h, 4))], 1.0, 0.05, AuditMode::Exact)?;
    println!("release step: delta needed {:.4} at alpha 1, {:?}", r.delta_needed, r.verdict);

    let leak = audit(&LeakyMechanism, &[(true, false)], 1.0, 0.05, AuditMode::MonteCarlo { trials: 20_000, seed: 3 })?;
    println!("leaky mechanism, sampled: {:?}", leak.verdict);
    Ok(())
}
