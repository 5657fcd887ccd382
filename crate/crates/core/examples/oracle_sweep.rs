//! Sweeping whole families of gates against the closed-form counting oracle.

use quale::oracle::{ei_partial, ei_relative, exhaustive_check, random_check};
use quale::FunctionTable;

fn main() -> quale::Result<()> {
    let and = FunctionTable::two_source(2, 2, 2, vec![0, 0, 0, 1])?;
    let partial = ei_partial(&and, 0)?;
    let relative = ei_relative(&and, 0)?;
    println!("and, z=0: partial {:.6}, relative {:.6}", partial.bits(), relative.bits());

    for dims in [(2, 2, 2), (2, 3, 2), (3, 3, 2)] {
        println!("{dims:?}: {}", exhaustive_check(dims.0, dims.1, dims.2)?);
    }
    println!("random 4x4x3: {}", random_check(4, 4, 3, 50, 11)?);
    Ok(())
}
