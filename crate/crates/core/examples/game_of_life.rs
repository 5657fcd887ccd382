//! Unrolling a ring of life cells into a system and measuring one cell.

use std::path::Path;

use quale::document::load_automaton;
use quale::measure::{effective_information, output_space};
use quale::{Context, Distribution, Subsystem};

fn main() -> quale::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/life-ring.json");
    let automaton = load_automaton(path)?.to_spec()?;
    let spec = automaton.unroll()?;
    println!(
        "{} occasions, {} edges",
        spec.occasions().len(),
        spec.edges().len()
    );

    let out = output_space(&spec)?;
    let top = Subsystem::top(&spec);
    for z in 0..out.dim() {
        let d = Distribution::dirac(&out, z);
        match effective_information(&spec, &top, &Context::Null, &d) {
            Ok(r) => println!("{:<24} ei = {:.6}", out.label(z), r.bits()),
            Err(e) => println!("{:<24} {e}", out.label(z)),
        }
    }
    Ok(())
}
