//! Representations to protocols and back.

use dpcc::bits::BitRow;
use dpcc::commsim::{equality_protocol, protocol_error, ErrorMode};
use dpcc::concepts::{make_builtin, Builtin};
use dpcc::distribution::{FiniteDistribution, PairDistribution};
use dpcc::rational::{fmt_q, q};
use dpcc::repdim::{
    check_det_rep_distfree, check_rep_fixed_dist, det_rep_to_protocol, eval_table, min_cover, prob_rep_to_protocol,
    protocol_to_prob_rep, DetRepresentation, ProbRepresentation, Representation,
};

fn main() -> dpcc::error::Result<()> {
    let points = make_builtin(Builtin::Point { b: 2 })?;
    let table = eval_table(&points);

    let p = equality_protocol(2, 2)?;
    let err = protocol_error(&p, &table, ErrorMode::WorstCase, None)?;
    let r = protocol_to_prob_rep(&p)?;
    let d = FiniteDistribution::uniform(4)?;
    let ok = check_rep_fixed_dist(Representation::Prob(&r), &points, &d, &q(1, 2), &q(1, 2))?;
    println!(
        "equality k=2: error {}, {} hypothesis sets of size <= {}, (1/2,1/2) representation: {}",
        fmt_q(err.exact().unwrap()),
        r.support.len(),
        r.support.iter().map(|h| h.len()).max().unwrap_or(0),
        ok.pass
    );

    let thr = make_builtin(Builtin::Threshold { b: 2 })?;
    let cover = min_cover(&thr, &d, &q(1, 4), true, false)?;
    let rep = ProbRepresentation::point_mass(cover.to_rep());
    let mu = PairDistribution::product(&FiniteDistribution::uniform(thr.len())?, &d)?;
    let back = prob_rep_to_protocol(&rep, &thr, &mu, &q(1, 4))?;
    let e = protocol_error(&back, &eval_table(&thr), ErrorMode::Distributional(&mu), None)?;
    println!(
        "Thr_2 cover of size {} -> {}-bit protocol with error {} under uniform inputs",
        cover.len(),
        e.cost_bits,
        fmt_q(e.exact().unwrap())
    );

    let h = DetRepresentation::new(vec![BitRow::ones(4), BitRow::zeros(4)])?;
    let chk = check_det_rep_distfree(&h, &points, &q(1, 2))?;
    println!("{{ones, zeros}} represents Point_2 at 1/2 for every distribution: {}", chk.pass);
    if chk.pass {
        let p = det_rep_to_protocol(&h, &points, &q(1, 2))?;
        let e = protocol_error(&p, &table, ErrorMode::WorstCase, None)?;
        println!("minimax protocol: {} bits, worst error {}", e.cost_bits, fmt_q(e.exact().unwrap()));
    }
    Ok(())
}
