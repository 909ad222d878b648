//! Minimum covers, greedy packings and the duality between them.

use dpcc::concepts::{make_builtin, Builtin};
use dpcc::distribution::FiniteDistribution;
use dpcc::rational::{fmt_q, q};
use dpcc::repdim::{max_packing_and_duality, min_cover};

fn main() -> dpcc::error::Result<()> {
    for kind in [Builtin::Threshold { b: 3 }, Builtin::Line { p: 3 }, Builtin::Box { b: 1, d: 3 }] {
        let c = make_builtin(kind)?;
        let d = FiniteDistribution::uniform(c.domain_size())?;
        println!("{kind:?}");
        for eps in [q(0, 1), q(1, 8), q(1, 4), q(1, 2)] {
            let proper = min_cover(&c, &d, &eps, true, true)?;
            let r = max_packing_and_duality(&c, &d, &eps, &q(1, 4), None)?;
            println!(
                "  eps {:>4}: proper cover {:>2} (optimal {}), greedy packing {:>2}, packing covers: {}",
                fmt_q(&eps),
                proper.len(),
                proper.optimal,
                r.packing.len(),
                r.packing_is_cover
            );
        }
    }
    Ok(())
}
