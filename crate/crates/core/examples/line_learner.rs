//! The private learner for lines over Z_p^2, with scaled-down constants.

use dpcc::dplearn::{
    line_boosted_learner, line_overall_learner, line_setting, pac_evaluate, DistOracle, LineInput, LineLearnerConfig,
    PacTask,
};
use dpcc::rational::q;
use dpcc::stats::rng_stream;

fn main() -> dpcc::error::Result<()> {
    let p = 31;
    let mut cfg = LineLearnerConfig::new(p, 0.2, 0.25, 1.0, 0.05);
    cfg.range_width_override = Some(6);
    cfg.ell_override = Some(40);
    for flag in cfg.deviation_flags() {
        println!("note: {flag}");
    }
    let (lo, hi) = cfg.k_range();
    println!("log2 t in [{lo}, {hi}], {} subsamples, release threshold {:.3}", cfg.ell(), cfg.threshold());

    let (target, d) = line_setting(p, 3, 7, LineInput::LineHeavy)?;
    let mut oracle = DistOracle::realizable(&d, &target)?;
    let mut rng = rng_stream(5, 0);
    let one = line_overall_learner(&cfg, &mut oracle, &mut rng)?;
    println!(
        "single run: k={} h_bar={} c={} released={} -> {}",
        one.k, one.h_bar, one.c, one.released, one.hypothesis
    );

    let n = (p * p) as usize;
    for input in [LineInput::Uniform, LineInput::LineHeavy, LineInput::PointHeavy] {
        let (target, d) = line_setting(p, 3, 7, input)?;
        let task = PacTask::realizable(&d, &target)?;
        let rep = pac_evaluate(
            |o, r| line_boosted_learner(&cfg, o, r).map(|b| b.hypothesis.to_row(n)),
            &task,
            40,
            &q(1, 5),
            9,
        )?;
        println!(
            "{input:?}: success {}/{} (99% CI {:.2}..{:.2}), mean error {:.4}",
            rep.successes, rep.trials, rep.ci.low, rep.ci.high, rep.mean_error
        );
    }
    Ok(())
}
