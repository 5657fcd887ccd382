//! Restricting quale sections and gluing compatible ones back together.

use quale::lattice::{descent_counterexample, glue_sections, quale_section, restrict, GlueMode};
use quale::{build_quale, FunctionTable, Subsystem, SystemSpec};

fn main() -> quale::Result<()> {
    let and = FunctionTable::two_source(2, 2, 2, vec![0, 0, 0, 1])?;
    let spec = SystemSpec::gate(&and)?;
    let quale = build_quale(&spec, 16)?;
    println!("{} sections", quale.len());

    let top = quale_section(&spec, &Subsystem::top(&spec))?;
    let x = Subsystem::from_pairs(&spec, [("x", "z")]);
    let y = Subsystem::from_pairs(&spec, [("y", "z")]);
    let rx = restrict(&top, &x)?;
    let ry = restrict(&top, &y)?;
    println!("top restricted to {x}:\n{:?}", rx.map());
    match glue_sections(&rx, &ry, GlueMode::Strict) {
        Ok(s) => println!("glued:\n{:?}", s.map()),
        Err(e) => println!("strict gluing failed: {e}"),
    }

    // Two different sections that no cover can tell apart.
    let (a, b) = descent_counterexample();
    let mut parts = a.subsystem().pairs().map(|(s, t, _)| (s.to_string(), t.to_string()));
    let (p, q) = (parts.next().unwrap(), parts.next().unwrap());
    let left = a.subsystem().filter(|s, t| (s, t) == (p.0.as_str(), p.1.as_str()));
    let right = a.subsystem().filter(|s, t| (s, t) == (q.0.as_str(), q.1.as_str()));
    for part in [&left, &right] {
        println!("agree on {part}: {}", restrict(&a, part)? == restrict(&b, part)?);
    }
    println!("equal sections: {}", a == b);
    let glued = glue_sections(&restrict(&a, &left)?, &restrict(&a, &right)?, GlueMode::Strict)?;
    println!("gluing the parts gives the independent one: {}", glued == b);
    Ok(())
}
