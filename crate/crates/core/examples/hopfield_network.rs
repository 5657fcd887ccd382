//! A small stochastic Hopfield network storing one attractor.

use std::path::Path;

use quale::automaton::{hopfield_rule, hopfield_weights};
use quale::document::load_automaton;
use quale::measure::{effective_information, output_space};
use quale::rational::ratio;
use quale::{Context, Distribution, Subsystem};

fn main() -> quale::Result<()> {
    let weights = hopfield_weights(3, &[vec![1, 1, 0]])?;
    let rule = hopfield_rule(&weights[0], &ratio(1, 2))?;
    println!("rule for cell 0 at T=1/2:\n{rule:?}");

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/hopfield.json");
    let spec = load_automaton(path)?.to_spec()?.unroll()?;
    let out = output_space(&spec)?;
    let top = Subsystem::top(&spec);
    let mut ranked = Vec::new();
    for z in 0..out.dim() {
        let r = effective_information(&spec, &top, &Context::Null, &Distribution::dirac(&out, z))?;
        ranked.push((r.bits(), out.label(z)));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (bits, label) in ranked {
        println!("{label:<24} {bits:.6}");
    }
    Ok(())
}
