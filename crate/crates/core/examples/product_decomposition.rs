//! Rectangular fibres, entanglement and product decompositions of gates.

use quale::entangle::{gamma_closed_form_two_source, is_rectangular, product_decomposition};
use quale::measure::output_space;
use quale::{entanglement, Distribution, FunctionTable, Partition, Subsystem, SystemSpec};

fn report(name: &str, outputs: Vec<usize>, nz: usize) -> quale::Result<()> {
    let g = FunctionTable::two_source(2, 2, nz, outputs)?;
    let spec = SystemSpec::gate(&g)?;
    let split = Partition::new([vec!["x"], vec!["y"]])?;
    println!("{name}");
    for z in g.image() {
        let d = Distribution::dirac(&output_space(&spec)?, z);
        let r = entanglement(&spec, &Subsystem::top(&spec), &split, &d)?;
        println!(
            "  z={z}: gamma {:.6} (closed form {:.6}), rectangular {}",
            r.gamma_bits(),
            gamma_closed_form_two_source(&g, z)?,
            is_rectangular(&g, z)?.is_rectangular()
        );
    }
    match product_decomposition(&g)? {
        Some(p) => println!("  splits as {:?} x {:?}", p.left.outputs(), p.right.outputs()),
        None => println!("  no product decomposition"),
    }
    Ok(())
}

fn main() -> quale::Result<()> {
    report("xor", vec![0, 1, 1, 0], 2)?;
    report("and", vec![0, 0, 0, 1], 2)?;
    report("copy both", vec![0, 1, 2, 3], 4)?;
    report("rectangular fibres, no product", vec![0, 1, 2, 2], 3)?;
    Ok(())
}
