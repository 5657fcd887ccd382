//! Effective information generated by an XOR gate and its parts.

use quale::lattice::enumerate_subsystems;
use quale::measure::output_space;
use quale::{effective_information, Context, Distribution, FunctionTable, Subsystem, SystemSpec};

fn main() -> quale::Result<()> {
    let xor = FunctionTable::two_source(2, 2, 2, vec![0, 1, 1, 0])?;
    let spec = SystemSpec::gate(&xor)?;
    let z0 = Distribution::dirac(&output_space(&spec)?, 0);

    for c in enumerate_subsystems(&spec, 16)? {
        let r = effective_information(&spec, &c, &Context::Null, &z0)?;
        println!("{c:<16} ei = {:.6} bits  measurement {:?}", r.bits(), r.measurement);
    }

    // Neither wire alone says anything; together they fix one bit.
    let x = Subsystem::from_pairs(&spec, [("x", "z")]);
    let top = Subsystem::top(&spec);
    let rel = effective_information(&spec, &top, &Context::Subsystem(x), &z0)?;
    println!("ei(top | x-z) = {:.6}", rel.bits());
    Ok(())
}
