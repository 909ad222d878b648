//! Known-distribution and label-private learners on thresholds.

use dpcc::concepts::{make_builtin, Builtin};
use dpcc::distribution::FiniteDistribution;
use dpcc::dplearn::{dist_specific_learner, label_private_learner, pac_evaluate, LabelPrivateConfig, PacTask};
use dpcc::rational::q;

fn main() -> dpcc::error::Result<()> {
    let c = make_builtin(Builtin::Threshold { b: 3 })?;
    let d = FiniteDistribution::from_counts(vec![1, 1, 2, 4, 4, 2, 1, 1])?;
    let target = c.row(5).clone();
    let task = PacTask::realizable(&d, &target)?;

    let known = pac_evaluate(
        |o, r| dist_specific_learner(&c, &d, o, None, 1.0, r).map(|out| out.hypothesis),
        &task,
        200,
        &q(1, 4),
        1,
    )?;
    println!("known distribution: success rate {:.3}", known.success_rate);

    let cfg = LabelPrivateConfig { t: None, n: None };
    let label = pac_evaluate(
        |o, r| label_private_learner(&c, o, 1.0, &cfg, r).map(|out| out.hypothesis),
        &task,
        200,
        &q(1, 4),
        2,
    )?;
    println!(
        "label private: success rate {:.3} (99% CI {:.3}..{:.3})",
        label.success_rate, label.ci.low, label.ci.high
    );
    Ok(())
}
