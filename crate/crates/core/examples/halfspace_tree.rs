//! Inductive mistake trees for halfspaces over the grid {0..2^b-1}^d.

use dpcc::mistaketree::{build_halfspace_tree, collision_free_halfspace, halfspace_tree_depth, validate_tree};

fn main() -> dpcc::error::Result<()> {
    for (d, b) in [(1, 3), (2, 1), (2, 2), (3, 1)] {
        let (tree, class) = build_halfspace_tree(d, b)?;
        let v = validate_tree(&tree, &class)?;
        println!(
            "d={d} b={b}: |HS| = {:>4}, depth {} (formula {}), valid {}, complete {}",
            class.len(),
            v.depth,
            halfspace_tree_depth(d, b),
            v.valid,
            v.complete
        );
    }
    // Weights with pairwise-distinct dot products on the grid, same halfspace.
    let (w, theta) = collision_free_halfspace(&[1, -1], 0, 1)?;
    println!("collision-free form of x1 - x2 >= 0: w = {w:?}, theta = {theta}");
    Ok(())
}
