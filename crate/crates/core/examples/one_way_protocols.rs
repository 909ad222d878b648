//! One-way protocols: exact errors, amplification, Newman and the optimal
//! distributional protocol for augmented index.

use dpcc::commsim::{
    amplify, dist_cc, equality_protocol, newman_sparsify, optimal_distributional_protocol, protocol_error, ErrorMode,
    EvalTable,
};
use dpcc::concepts::{make_builtin, Builtin};
use dpcc::rational::{fmt_q, q};

fn main() -> dpcc::error::Result<()> {
    let points = make_builtin(Builtin::Point { b: 2 })?;
    let table = EvalTable::from_class(&points);
    for k in 1..=3 {
        let p = equality_protocol(2, k)?;
        let e = protocol_error(&p, &table, ErrorMode::WorstCase, None)?;
        let sparse = newman_sparsify(&p, 8, 1)?;
        let es = protocol_error(&sparse, &table, ErrorMode::WorstCase, None)?;
        println!(
            "equality k={k}: {} bits err {} | 8 private seeds: {} bits err {}",
            e.cost_bits,
            fmt_q(e.exact().unwrap()),
            es.cost_bits,
            fmt_q(es.exact().unwrap()),
        );
        // Majority of three runs; the table grows as (messages)^3.
        match amplify(&p, 3) {
            Ok(amp) => {
                let ea = protocol_error(&amp, &table, ErrorMode::WorstCase, None)?;
                println!("  majority of 3: {} bits err {}", ea.cost_bits, fmt_q(ea.exact().unwrap()));
            }
            Err(e) => println!("  majority of 3: {e}"),
        }
    }

    let aug = EvalTable::augindex(3)?;
    let mu = aug.uniform_mu()?;
    for budget in 0..=3 {
        let (_, err) = optimal_distributional_protocol(&aug, &mu, budget)?;
        println!("AugIndex_3, {budget} bits: least error {}", fmt_q(&err));
    }
    println!("bits needed for error 1/8: {}", dist_cc(&aug, &mu, &q(1, 8))?);
    Ok(())
}
