//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quale::document::load_system;
use quale::entangle::{enumerate_partitions, entanglement, is_rectangular, product_decomposition, Partition};
use quale::lattice::{build_quale, descent_counterexample, glue_sections, restrict, GlueMode, Section, Subsystem};
use quale::measure::{effective_information, ei_lattice, extended_mechanism, measure, output_space, Context};
use quale::oracle::{all_one_source, all_two_source, gamma_counts, is_product_fibred};
use quale::rational::Rational;
use quale::space::{Alphabet, Factor, ProductSpace};
use quale::stoch::{dual, Distribution, StochasticMatrix};
use quale::system::SystemSpec;
use quale::table::FunctionTable;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() < tol {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want} (tol {tol})"))
    }
}

fn dirac(sys: &SystemSpec, z: usize) -> Distribution {
    Distribution::dirac(&output_space(sys).unwrap(), z)
}

fn edge(sys: &SystemSpec, a: &str, b: &str) -> Subsystem {
    Subsystem::from_pairs(sys, [(a, b)])
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let sys = load_system(fixture("xor.json")).map_err(|e| e.to_string())?;
    let d = dirac(&sys, 0);
    let top = Subsystem::top(&sys);
    let m = measure(&extended_mechanism(&sys, &top).unwrap(), &d).unwrap();
    let half = Rational::new(1.into(), 2.into());
    if m.weights() != [half.clone(), Rational::zero(), Rational::zero(), half] {
        return Err(format!("measurement {:?}", m.weights()));
    }
    let whole = effective_information(&sys, &top, &Context::Null, &d).unwrap().bits();
    close("ei(top)", whole, 1.0, 1e-12)?;
    for src in ["vX", "vY"] {
        let ei = effective_information(&sys, &edge(&sys, src, "vZ"), &Context::Null, &d).unwrap().bits();
        close(src, ei, 0.0, 1e-12)?;
    }
    let gamma = entanglement(&sys, &top, &"vX|vY".parse().unwrap(), &d).unwrap().gamma_bits();
    close("gamma", gamma, 1.0, 1e-12)?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("ei=1, single edges 0, gamma=1 in {:.2?}", start.elapsed()))
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let functions = all_one_source(4, 3).unwrap();
    let mut checked = 0;
    for f in &functions {
        let sys = SystemSpec::gate(f).unwrap();
        let top = Subsystem::top(&sys);
        for y in f.image() {
            let ei = effective_information(&sys, &top, &Context::Null, &dirac(&sys, y)).unwrap().bits();
            let size = f.domain().dim() as f64;
            let preimage = f.outputs().iter().filter(|&&o| o == y).count() as f64;
            close(&format!("f={:?} y={y}", f.outputs()), ei, (size / preimage).log2(), 1e-9)?;
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{} functions, {checked} outputs in {:.2?}", functions.len(), start.elapsed()))
}

struct TwoSource {
    whole: f64,
    x: f64,
    y: f64,
    relative: f64,
    gamma: f64,
}

fn two_source(g: &FunctionTable, z: usize) -> TwoSource {
    let sys = SystemSpec::gate(g).unwrap();
    let d = dirac(&sys, z);
    let top = Subsystem::top(&sys);
    let xe = edge(&sys, "x", "z");
    let ye = edge(&sys, "y", "z");
    let ei = |c: &Subsystem, ctx: &Context| effective_information(&sys, c, ctx, &d).unwrap().bits();
    TwoSource {
        whole: ei(&top, &Context::Null),
        x: ei(&xe, &Context::Null),
        y: ei(&ye, &Context::Null),
        relative: ei(&top, &Context::Subsystem(xe.clone())),
        gamma: entanglement(&sys, &top, &"x|y".parse().unwrap(), &d).unwrap().gamma_bits(),
    }
}

fn exhaustive_family() -> Vec<FunctionTable> {
    let mut all = all_two_source(2, 2, 2).unwrap();
    all.extend(all_two_source(2, 2, 4).unwrap());
    all
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for g in exhaustive_family() {
        for z in g.image() {
            let r = two_source(&g, z);
            let label = format!("g={:?} z={z}", g.outputs());
            close(&format!("{label} relative"), r.relative, r.whole - r.x, 1e-9)?;
            close(&format!("{label} gamma counts"), r.gamma, gamma_counts(&g, z).unwrap().bits(), 1e-9)?;
            close(&format!("{label} gamma ei"), r.gamma, r.whole - r.x - r.y, 1e-9)?;
            cases += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("272 functions, {cases} outputs in {:.2?}", start.elapsed()))
}

fn ac4() -> Outcome {
    let mut disagreements = Vec::new();
    let mut cases = 0;
    for g in exhaustive_family() {
        for z in g.image() {
            let rect = is_rectangular(&g, z).unwrap().is_rectangular();
            let zero = two_source(&g, z).gamma < 1e-9;
            if rect != zero {
                disagreements.push(format!("g={:?} z={z}", g.outputs()));
            }
            cases += 1;
        }
    }
    if disagreements.is_empty() {
        Ok(format!("{cases} outputs, 0 disagreements"))
    } else {
        Err(format!("{} disagreements: {}", disagreements.len(), disagreements.join("; ")))
    }
}

/// Relabels outputs to `0..k` so the function is onto its codomain.
fn onto(nx: usize, ny: usize, outputs: Vec<usize>) -> FunctionTable {
    let image: Vec<usize> = outputs.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let outputs = outputs.iter().map(|o| image.binary_search(o).unwrap()).collect();
    FunctionTable::two_source(nx, ny, image.len(), outputs).unwrap()
}

fn same_fibres(g: &FunctionTable, left: &FunctionTable, right: &FunctionTable) -> bool {
    let (nx, ny) = g.two_source_dims().unwrap();
    let points: Vec<(usize, usize)> = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).collect();
    points.iter().all(|&(x, y)| {
        points.iter().all(|&(a, b)| {
            (g.at(x, y) == g.at(a, b)) == (left.apply(x) == left.apply(a) && right.apply(y) == right.apply(b))
        })
    })
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..100 {
        let (nx, ny) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (k1, k2) = (rng.gen_range(1..=nx), rng.gen_range(1..=ny));
        let g1: Vec<usize> = (0..nx).map(|_| rng.gen_range(0..k1)).collect();
        let g2: Vec<usize> = (0..ny).map(|_| rng.gen_range(0..k2)).collect();
        let g = onto(nx, ny, (0..nx).flat_map(|x| { let a = g1[x]; g2.iter().map(move |b| a * k2 + b) }).collect());
        let sys = SystemSpec::gate(&g).unwrap();
        let top = Subsystem::top(&sys);
        let p: Partition = "x|y".parse().unwrap();
        for z in g.image() {
            let gamma = entanglement(&sys, &top, &p, &dirac(&sys, z)).unwrap().gamma_bits();
            if gamma.abs() >= 1e-9 {
                return Err(format!("product #{i} {:?}: gamma {gamma} at z={z}", g.outputs()));
            }
        }
        match product_decomposition(&g).unwrap() {
            Some(d) if same_fibres(&g, &d.left, &d.right) => {}
            other => return Err(format!("product #{i} {:?}: decomposition {other:?}", g.outputs())),
        }
    }
    let mut found = 0;
    while found < 100 {
        let (nx, ny) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let nz = rng.gen_range(2..=4);
        let g = onto(nx, ny, (0..nx * ny).map(|_| rng.gen_range(0..nz)).collect());
        if is_product_fibred(&g).unwrap() {
            continue;
        }
        if let Some(d) = product_decomposition(&g).unwrap() {
            return Err(format!("non-product {:?} decomposed as {d:?}", g.outputs()));
        }
        found += 1;
    }
    Ok("100 products decompose with gamma=0; 100 non-products give none".into())
}

fn random_stochastic(rng: &mut ChaCha8Rng, domain: ProductSpace, codomain: ProductSpace, zeros: bool) -> StochasticMatrix {
    let rows = codomain.dim();
    let low = if zeros { 0 } else { 1 };
    let mut raw: Vec<Vec<i64>> = (0..domain.dim())
        .map(|_| (0..rows).map(|_| rng.gen_range(low..=6)).collect())
        .collect();
    for col in raw.iter_mut() {
        if col.iter().all(|&v| v == 0) {
            col[rng.gen_range(0..rows)] = 1;
        }
    }
    for r in 0..rows {
        if raw.iter().all(|c| c[r] == 0) {
            let c = rng.gen_range(0..raw.len());
            raw[c][r] = 1;
        }
    }
    let cols = raw
        .into_iter()
        .map(|c| {
            let total: i64 = c.iter().sum();
            c.into_iter().map(|v| Rational::new(v.into(), total.into())).collect()
        })
        .collect();
    StochasticMatrix::new(domain, codomain, cols).unwrap()
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst_gamma: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..50 {
        let blocks = rng.gen_range(2..=3);
        let mut sys = SystemSpec::new();
        for b in 0..blocks {
            let (src, trg) = (format!("s{b}"), format!("t{b}"));
            let (na, nb) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
            let (sa, ta) = (Alphabet::range(na), Alphabet::range(nb));
            sys.add_occasion(src.clone(), sa.clone());
            sys.add_occasion(trg.clone(), ta.clone());
            sys.add_edge(src.clone(), trg.clone());
            let s = ProductSpace::single(src.clone(), sa);
            let m = random_stochastic(&mut rng, s.clone(), ProductSpace::single(trg.clone(), ta), true);
            sys.set_mechanism(trg, m);
            sys.set_source(src, Distribution::uniform(&s));
        }
        sys.check().map_err(|e| e.to_string())?;
        let out = output_space(&sys).unwrap();
        let d = Distribution::dirac(&out, rng.gen_range(0..out.dim()));
        let p = Partition::new((0..blocks).map(|b| vec![format!("s{b}")])).unwrap();
        let r = entanglement(&sys, &Subsystem::top(&sys), &p, &d).map_err(|e| e.to_string())?;
        worst_gamma = worst_gamma.max(r.gamma_bits().abs());
        worst_gap = worst_gap.max(r.additivity_gap().abs());
    }
    if worst_gamma < 1e-9 && worst_gap < 1e-9 {
        Ok(format!("50 block systems, max gamma {worst_gamma:.1e}, max gap {worst_gap:.1e}"))
    } else {
        Err(format!("max gamma {worst_gamma}, max additivity gap {worst_gap}"))
    }
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut involution = 0;
    let mut bayes = 0;
    let mut first_failure = None;
    for i in 0..200 {
        let (n, k) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let m = random_stochastic(
            &mut rng,
            ProductSpace::single("a", Alphabet::range(n)),
            ProductSpace::single("b", Alphabet::range(k)),
            true,
        );
        let d = dual(&m).unwrap();
        // Bayes with a uniform prior: p(x|y) = p(y|x)p(x) / Σ_x' p(y|x')p(x').
        let prior = Rational::new(1.into(), (n as i64).into());
        let ok = (0..k).all(|y| {
            let evidence: Rational = (0..n).map(|x| m.entry(y, x) * &prior).sum();
            (0..n).all(|x| *d.entry(x, y) == m.entry(y, x) * &prior / &evidence)
        });
        bayes += usize::from(ok);
        let back = dual(&d).unwrap();
        if back == m {
            involution += 1;
        } else if first_failure.is_none() {
            first_failure = Some(format!("#{i} ({k}x{n})"));
        }
    }
    let summary = format!("Bayes {bayes}/200 exact; dual(dual(m)) = m for {involution}/200");
    if bayes == 200 && involution == 200 {
        Ok(summary)
    } else {
        Err(format!("{summary}; first involution failure {}", first_failure.unwrap_or_default()))
    }
}

fn random_alphabet(rng: &mut ChaCha8Rng) -> Alphabet {
    Alphabet::range(rng.gen_range(2..=3))
}

/// Host with sources x,y,z and targets u,v,w; `Ci` covers (x,y | u,w) and
/// `Cj` covers (x,z | v,w), sharing source x and target w.
fn gluing_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut host = SystemSpec::new();
    for id in ["u", "v", "w", "x", "y", "z"] {
        host.add_occasion(id, random_alphabet(rng));
    }
    for (a, b) in [("x", "w"), ("y", "u"), ("z", "v")] {
        host.add_edge(a, b);
    }
    let c = Subsystem::top(&host);
    let targets = c.target_space(&host).unwrap();
    let sources = c.source_space(&host).unwrap();
    let sp = |ids: &[&str]| host.space_of(ids.iter().copied()).unwrap();
    let px = random_stochastic(rng, sp(&["w"]), sp(&["x"]), true);
    let py = random_stochastic(rng, sp(&["u", "w", "x"]), sp(&["y"]), true);
    let pz = random_stochastic(rng, sp(&["v", "w", "x"]), sp(&["z"]), true);
    let columns = (0..targets.dim())
        .map(|t| {
            let tv = targets.decode(t);
            let (u, v, w) = (tv[0], tv[1], tv[2]);
            (0..sources.dim())
                .map(|s| {
                    let sv = sources.decode(s);
                    let (x, y, z) = (sv[0], sv[1], sv[2]);
                    let col = |m: &StochasticMatrix, digits: &[usize]| m.domain().encode(digits);
                    px.entry(x, w).clone()
                        * py.entry(y, col(&py, &[u, w, x]))
                        * pz.entry(z, col(&pz, &[v, w, x]))
                })
                .collect()
        })
        .collect();
    let joint = Section::new(c.clone(), StochasticMatrix::new(targets, sources, columns).unwrap());
    let ci = c.filter(|a, _| a != "z");
    let cj = c.filter(|a, _| a != "y");
    let a = restrict(&joint, &ci).unwrap();
    let b = restrict(&joint, &cj).unwrap();
    let g = glue_sections(&a, &b, GlueMode::Strict).map_err(|e| e.to_string())?;
    if g != joint {
        return Err("glued section differs from the joint".into());
    }
    if restrict(&g, &ci).unwrap() != a || restrict(&g, &cj).unwrap() != b {
        return Err("glued section does not restrict back".into());
    }
    Ok(())
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for i in 0..50 {
        gluing_case(&mut rng).map_err(|e| format!("case {i}: {e}"))?;
    }
    let (s1, s2) = descent_counterexample();
    if s1 == s2 {
        return Err("counterexample sections are equal".into());
    }
    let c = s1.subsystem().clone();
    for keep in ["vP", "vQ"] {
        let ci = c.filter(|_, t| t == keep);
        if restrict(&s1, &ci).unwrap() != restrict(&s2, &ci).unwrap() {
            return Err(format!("restrictions to {keep} differ"));
        }
    }
    Ok("50 glued joints round-trip exactly; descent counterexample confirmed".into())
}

fn dense_system(sources: usize, targets: usize, rng: &mut ChaCha8Rng) -> SystemSpec {
    let bit = Alphabet::binary();
    let mut sys = SystemSpec::new();
    let srcs: Vec<String> = (0..sources).map(|i| format!("s{i}")).collect();
    for s in &srcs {
        sys.add_occasion(s.clone(), bit.clone());
        sys.set_source(s.clone(), Distribution::uniform(&ProductSpace::single(s.clone(), bit.clone())));
    }
    for t in 0..targets {
        let id = format!("t{t}");
        sys.add_occasion(id.clone(), bit.clone());
        for s in &srcs {
            sys.add_edge(s.clone(), id.clone());
        }
        let domain = ProductSpace::new(srcs.iter().map(|s| Factor::new(s.clone(), bit.clone())).collect()).unwrap();
        let m = random_stochastic(rng, domain, ProductSpace::single(id.clone(), bit.clone()), false);
        sys.set_mechanism(id, m);
    }
    sys
}

fn ac9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let small = dense_system(2, 2, &mut rng);
    let start = Instant::now();
    build_quale(&small, 16).map_err(|e| e.to_string())?;
    let d = dirac(&small, 0);
    ei_lattice(&small, &d, 16).map_err(|e| e.to_string())?;
    let mut gammas = 0;
    for c in quale::lattice::enumerate_subsystems(&small, 16).unwrap().skip(1) {
        let sources: Vec<&str> = c.sources().into_iter().collect();
        for p in enumerate_partitions(&sources, 8).unwrap() {
            entanglement(&small, &c, &p, &d).map_err(|e| e.to_string())?;
            gammas += 1;
        }
    }
    let small_time = start.elapsed();
    within(small_time, Duration::from_secs(10))?;
    let large = dense_system(4, 4, &mut rng);
    let start = Instant::now();
    let q = build_quale(&large, 16).map_err(|e| e.to_string())?;
    let large_time = start.elapsed();
    if q.len() != 65_536 {
        return Err(format!("{} sections", q.len()));
    }
    within(large_time, Duration::from_secs(300))?;
    Ok(format!(
        "4-edge quale+lattice+{gammas} gammas in {small_time:.2?}; 65536 sections in {large_time:.2?}"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 xor fixture", ac1),
        ("AC2 preimage equivalence", ac2),
        ("AC3 comparison and entanglement identities", ac3),
        ("AC4 rectangularity iff zero entanglement", ac4),
        ("AC5 product decomposition", ac5),
        ("AC6 additivity over independent blocks", ac6),
        ("AC7 dual laws", ac7),
        ("AC8 gluing and non-unique descent", ac8),
        ("AC9 performance envelope", ac9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
