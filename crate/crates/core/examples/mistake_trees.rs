//! Littlestone witness trees, checked and turned into augmented-index embeddings.

use dpcc::concepts::{make_builtin, Builtin};
use dpcc::mistaketree::{augindex_embedding, ldim, validate_tree};

fn main() -> dpcc::error::Result<()> {
    let c = make_builtin(Builtin::Threshold { b: 3 })?;
    let (d, tree) = ldim(&c)?;
    let v = validate_tree(&tree, &c)?;
    println!("Thr_3: ldim {d}, witness valid={} complete={}", v.valid, v.complete);
    println!("{}", tree.to_json());

    // Each root-to-leaf path is a string x; the leaf concept answers every prefix query.
    let emb = augindex_embedding(&tree, &c)?;
    println!("embedding of AugIndex_{} holds: {}", emb.d, emb.verify(&c));
    for (x, &f) in emb.concept_map.iter().enumerate() {
        println!("  x={x:0w$b} -> {}", c.name(f), w = emb.d);
    }
    Ok(())
}
