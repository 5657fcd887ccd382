//! The effective-information lattice of an AND gate, printed as Graphviz.

use quale::cli::lattice_dot;
use quale::measure::{ei_lattice, output_space};
use quale::{Distribution, FunctionTable, SystemSpec};

fn main() -> quale::Result<()> {
    let and = FunctionTable::two_source(2, 2, 2, vec![0, 0, 0, 1])?;
    let spec = SystemSpec::gate(&and)?;
    for z in 0..2 {
        let d = Distribution::dirac(&output_space(&spec)?, z);
        let lattice = ei_lattice(&spec, &d, 16)?;
        println!("// output z={z}");
        for (coarse, fine, ei) in &lattice.covers {
            println!(
                "//   {} -> {}: {:.5}",
                lattice.nodes[*coarse].0, lattice.nodes[*fine].0, ei.bits()
            );
        }
        print!("{}", lattice_dot(&spec, &d, 16)?);
    }
    Ok(())
}
