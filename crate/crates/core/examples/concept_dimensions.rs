//! VC and Littlestone dimensions of the built-in classes at small sizes.

use dpcc::concepts::{make_builtin, vc_dimension, Builtin};
use dpcc::mistaketree::ldim;

fn main() -> dpcc::error::Result<()> {
    let kinds = [
        Builtin::Point { b: 3 },
        Builtin::Threshold { b: 4 },
        Builtin::Line { p: 3 },
        Builtin::Box { b: 2, d: 2 },
        Builtin::Halfspace { b: 1, d: 3 },
    ];
    println!("{:<28} {:>6} {:>6} {:>4} {:>5}", "class", "|X|", "|C|", "vc", "ldim");
    for kind in kinds {
        let c = make_builtin(kind)?;
        let vc = vc_dimension(&c)?;
        let (l, _) = ldim(&c)?;
        println!(
            "{:<28} {:>6} {:>6} {:>4} {:>5}",
            format!("{kind:?}"),
            c.domain_size(),
            c.len(),
            vc.dimension,
            l
        );
    }
    Ok(())
}
