//! Closed forms for deterministic functions computed from preimage and
//! slice counts alone, and sweeps comparing them to the matrix pipeline.
//!
//! Nothing above [`crosscheck`] builds a matrix.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entangle::{entanglement, gamma_closed_form_two_source, is_rectangular, Partition};
use crate::error::{Error, Result};
use crate::lattice::Subsystem;
use crate::measure::{effective_information, output_space, Context};
use crate::rational::{self, Rational};
use crate::stoch::Distribution;
use crate::system::SystemSpec;
use crate::table::FunctionTable;

/// `log2(base) / denominator`, kept exact.
#[derive(Clone, Debug)]
pub struct ExactLog {
    pub base: Rational,
    pub denominator: u32,
}

impl ExactLog {
    fn new(base: Rational, denominator: usize) -> Self {
        ExactLog {
            base,
            denominator: denominator as u32,
        }
    }

    pub fn bits(&self) -> f64 {
        rational::log2(&self.base) / f64::from(self.denominator)
    }

    fn raised(&self, k: u32) -> Rational {
        Pow::pow(&self.base, k)
    }

    /// Exact difference.
    pub fn minus(&self, other: &ExactLog) -> ExactLog {
        ExactLog {
            base: self.raised(other.denominator) / other.raised(self.denominator),
            denominator: self.denominator * other.denominator,
        }
    }
}

impl PartialEq for ExactLog {
    fn eq(&self, other: &Self) -> bool {
        self.raised(other.denominator) == other.raised(self.denominator)
    }
}

fn count(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn check_output(f: &FunctionTable, y: usize) -> Result<()> {
    if y >= f.codomain().dim() {
        return Err(Error::UnknownSymbol {
            factor: format!("{:?}", f.codomain()),
            symbol: y.to_string(),
        });
    }
    Ok(())
}

fn dims(g: &FunctionTable) -> Result<(usize, usize)> {
    g.two_source_dims().ok_or_else(|| Error::ShapeMismatch {
        expected: "a function of two sources".into(),
        found: format!("{:?}", g.domain()),
    })
}

/// `|f⁻¹(y)|`.
pub fn preimage_count(f: &FunctionTable, y: usize) -> Result<usize> {
    check_output(f, y)?;
    Ok(f.outputs().iter().filter(|&&o| o == y).count())
}

/// `|g⁻¹_{x×Y}(z)|`: inputs in row `x` sent to `z`.
pub fn row_slice_count(g: &FunctionTable, x: usize, z: usize) -> Result<usize> {
    check_output(g, z)?;
    let (nx, ny) = dims(g)?;
    if x >= nx {
        return Err(Error::UnknownSymbol {
            factor: "x".into(),
            symbol: x.to_string(),
        });
    }
    Ok((0..ny).filter(|&y| g.at(x, y) == z).count())
}

/// `|g⁻¹_{X×y}(z)|`: inputs in column `y` sent to `z`.
pub fn column_slice_count(g: &FunctionTable, y: usize, z: usize) -> Result<usize> {
    check_output(g, z)?;
    let (nx, ny) = dims(g)?;
    if y >= ny {
        return Err(Error::UnknownSymbol {
            factor: "y".into(),
            symbol: y.to_string(),
        });
    }
    Ok((0..nx).filter(|&x| g.at(x, y) == z).count())
}

fn attained(f: &FunctionTable, y: usize) -> Result<usize> {
    let n = preimage_count(f, y)?;
    if n == 0 {
        return Err(Error::NotInImage(f.codomain().label(y)));
    }
    Ok(n)
}

/// `log2(|X| / |f⁻¹(y)|)`.
pub fn ei_classical(f: &FunctionTable, y: usize) -> Result<ExactLog> {
    let n = attained(f, y)?;
    Ok(ExactLog::new(
        Pow::pow(count(f.domain().dim()) / count(n), n as u32),
        n,
    ))
}

/// `log2|X| + Σ_x p(x|z) log2 p(x|z)` with `p(x|z) = |g⁻¹_{x×Y}(z)| / |g⁻¹(z)|`.
pub fn ei_partial(g: &FunctionTable, z: usize) -> Result<ExactLog> {
    let (nx, _) = dims(g)?;
    let rows = (0..nx).map(|x| row_slice_count(g, x, z)).collect::<Result<Vec<_>>>()?;
    partial_from_slices(nx, &rows, attained(g, z)?)
}

/// [`ei_partial`] for the `Y` source.
pub fn ei_partial_right(g: &FunctionTable, z: usize) -> Result<ExactLog> {
    let (_, ny) = dims(g)?;
    let cols = (0..ny).map(|y| column_slice_count(g, y, z)).collect::<Result<Vec<_>>>()?;
    partial_from_slices(ny, &cols, attained(g, z)?)
}

fn partial_from_slices(size: usize, slices: &[usize], n: usize) -> Result<ExactLog> {
    let mut base: Rational = Pow::pow(count(size), n as u32);
    for &s in slices.iter().filter(|&&s| s > 0) {
        base *= Pow::pow(count(s) / count(n), s as u32);
    }
    Ok(ExactLog::new(base, n))
}

/// `Σ_x p(x|z) log2(|Y| / |g⁻¹_{x×Y}(z)|)`.
pub fn ei_relative(g: &FunctionTable, z: usize) -> Result<ExactLog> {
    let (nx, ny) = dims(g)?;
    let n = attained(g, z)?;
    let mut base = Rational::one();
    for x in 0..nx {
        let s = row_slice_count(g, x, z)?;
        if s > 0 {
            base *= Pow::pow(count(ny) / count(s), s as u32);
        }
    }
    Ok(ExactLog::new(base, n))
}

/// `Σ_{(x,y)∈g⁻¹(z)} (1/n) log2(n / (|g⁻¹_{x×Y}(z)| |g⁻¹_{X×y}(z)|))`.
pub fn gamma_counts(g: &FunctionTable, z: usize) -> Result<ExactLog> {
    let (nx, ny) = dims(g)?;
    let n = attained(g, z)?;
    let mut base = Rational::one();
    for x in 0..nx {
        for y in 0..ny {
            if g.at(x, y) == z {
                let sx = row_slice_count(g, x, z)?;
                let sy = column_slice_count(g, y, z)?;
                base *= count(n) / count(sx * sy);
            }
        }
    }
    Ok(ExactLog::new(base, n))
}

/// Whether every pair of inputs with a common output also shares its row
/// pattern and its column pattern, i.e. `g` factors through a product of
/// one-source functions.
pub fn is_product_fibred(g: &FunctionTable) -> Result<bool> {
    let (nx, ny) = dims(g)?;
    let row = |x: usize| (0..ny).map(|y| g.at(x, y)).collect::<Vec<_>>();
    let col = |y: usize| (0..nx).map(|x| g.at(x, y)).collect::<Vec<_>>();
    for x in 0..nx {
        for y in 0..ny {
            for x2 in 0..nx {
                for y2 in 0..ny {
                    if g.at(x, y) == g.at(x2, y2) && (row(x) != row(x2) || col(y) != col(y2)) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    /// Output table, one digit per input.
    pub function: String,
    pub output: usize,
    pub quantity: &'static str,
    pub pipeline: f64,
    pub oracle: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g={} z={} {}: pipeline {:.12} oracle {:.12}",
            self.function, self.output, self.quantity, self.pipeline, self.oracle
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrosscheckReport {
    pub checked: usize,
    pub total: usize,
    pub seed: Option<u64>,
    pub mismatches: Vec<Mismatch>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.checked == self.total && self.mismatches.is_empty()
    }

    fn merge(reports: Vec<CrosscheckReport>, total: usize, seed: Option<u64>) -> Self {
        let mut out = CrosscheckReport {
            total,
            seed,
            ..Default::default()
        };
        for r in reports {
            out.checked += r.checked;
            out.mismatches.extend(r.mismatches);
        }
        out
    }
}

impl fmt::Display for CrosscheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} functions, {} mismatches",
            self.checked,
            self.total,
            self.mismatches.len()
        )?;
        if let Some(seed) = self.seed {
            write!(f, " (seed {seed})")?;
        }
        Ok(())
    }
}

fn label(f: &FunctionTable) -> String {
    f.outputs().iter().map(|o| o.to_string()).collect::<Vec<_>>().join("")
}

struct Recorder<'a> {
    function: &'a FunctionTable,
    output: usize,
    mismatches: Vec<Mismatch>,
}

impl Recorder<'_> {
    fn compare(&mut self, quantity: &'static str, pipeline: f64, oracle: f64) {
        if !((pipeline - oracle).abs() < TOLERANCE) {
            self.mismatches.push(Mismatch {
                function: label(self.function),
                output: self.output,
                quantity,
                pipeline,
                oracle,
            });
        }
    }
}

fn outputs(f: &FunctionTable) -> BTreeSet<usize> {
    f.image()
}

fn dirac(spec: &SystemSpec, z: usize) -> Result<Distribution> {
    Ok(Distribution::dirac(&output_space(spec)?, z))
}

/// Runs the pipeline on a one-target system computing `f` and compares
/// every quantity with its count-based closed form at each attained
/// output. Two-source functions get the full set of partial, relative,
/// and entanglement checks; others only the whole-system value.
pub fn crosscheck(f: &FunctionTable) -> Result<Vec<Mismatch>> {
    let sys = SystemSpec::gate(f)?;
    let top = Subsystem::top(&sys);
    let ids: Vec<String> = f.domain().ids().map(str::to_string).collect();
    let target = f.codomain().factors()[0].id.clone();
    let mut mismatches = Vec::new();
    for z in outputs(f) {
        let d = dirac(&sys, z)?;
        let mut rec = Recorder {
            function: f,
            output: z,
            mismatches: Vec::new(),
        };
        let whole = effective_information(&sys, &top, &Context::Null, &d)?.bits();
        rec.compare("ei", whole, ei_classical(f, z)?.bits());
        if let [xid, yid] = &ids[..] {
            let xe = Subsystem::from_pairs(&sys, [(xid.as_str(), target.as_str())]);
            let ye = Subsystem::from_pairs(&sys, [(yid.as_str(), target.as_str())]);
            let ei_x = effective_information(&sys, &xe, &Context::Null, &d)?.bits();
            let ei_y = effective_information(&sys, &ye, &Context::Null, &d)?.bits();
            let rel = effective_information(&sys, &top, &Context::Subsystem(xe), &d)?.bits();
            let partition = Partition::new([vec![xid.clone()], vec![yid.clone()]])?;
            let report = entanglement(&sys, &top, &partition, &d)?;
            let gamma = report.gamma_bits();
            let classical = ei_classical(f, z)?;
            let partial = ei_partial(f, z)?;
            let relative = ei_relative(f, z)?;
            let counts = gamma_counts(f, z)?;
            rec.compare("ei_partial", ei_x, partial.bits());
            rec.compare("ei_partial_right", ei_y, ei_partial_right(f, z)?.bits());
            rec.compare("ei_relative", rel, relative.bits());
            rec.compare("relative=whole-partial", rel, whole - ei_x);
            let exact = if relative == classical.minus(&partial) { 0.0 } else { 1.0 };
            rec.compare("relative=whole-partial (exact)", exact, 0.0);
            rec.compare("gamma", gamma, counts.bits());
            rec.compare("gamma_closed_form", gamma_closed_form_two_source(f, z)?, counts.bits());
            rec.compare("gamma=ei-partials", gamma, whole - ei_x - ei_y);
            let rectangular = is_rectangular(f, z)?.is_rectangular();
            let zero = gamma < TOLERANCE;
            rec.compare(
                "rectangular<=>gamma=0",
                f64::from(u8::from(rectangular)),
                f64::from(u8::from(zero)),
            );
            if zero {
                rec.compare("additivity", report.additivity_gap(), 0.0);
            }
        }
        mismatches.extend(rec.mismatches);
    }
    Ok(mismatches)
}

fn sweep(functions: Vec<FunctionTable>, seed: Option<u64>) -> Result<CrosscheckReport> {
    let total = functions.len();
    let reports = functions
        .par_iter()
        .map(|f| {
            Ok(CrosscheckReport {
                checked: 1,
                mismatches: crosscheck(f)?,
                ..Default::default()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrosscheckReport::merge(reports, total, seed))
}

/// Every `g: X × Y → Z` with the given alphabet sizes.
pub fn all_two_source(nx: usize, ny: usize, nz: usize) -> Result<Vec<FunctionTable>> {
    let inputs = (nx * ny) as u32;
    let total = nz.checked_pow(inputs).ok_or(Error::BudgetExceeded {
        what: "functions",
        count: usize::MAX,
        limit: usize::MAX,
    })?;
    (0..total)
        .map(|mut code| {
            let outputs = (0..nx * ny)
                .map(|_| {
                    let o = code % nz;
                    code /= nz;
                    o
                })
                .collect();
            FunctionTable::two_source(nx, ny, nz, outputs)
        })
        .collect()
}

/// `count` uniformly random `g: X × Y → Z` from a seeded generator.
pub fn random_two_source(nx: usize, ny: usize, nz: usize, count: usize, seed: u64) -> Result<Vec<FunctionTable>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| FunctionTable::two_source(nx, ny, nz, (0..nx * ny).map(|_| rng.gen_range(0..nz)).collect()))
        .collect()
}

/// Every `f: X → Y` with `|X| ≤ max_x`, `|Y| ≤ max_y`.
pub fn all_one_source(max_x: usize, max_y: usize) -> Result<Vec<FunctionTable>> {
    use crate::space::{Alphabet, ProductSpace};
    let mut out = Vec::new();
    for nx in 1..=max_x {
        for ny in 1..=max_y {
            let domain = ProductSpace::single("x", Alphabet::range(nx));
            let codomain = ProductSpace::single("y", Alphabet::range(ny));
            for mut code in 0..ny.pow(nx as u32) {
                let outputs = (0..nx)
                    .map(|_| {
                        let o = code % ny;
                        code /= ny;
                        o
                    })
                    .collect();
                out.push(FunctionTable::new(domain.clone(), codomain.clone(), outputs)?);
            }
        }
    }
    Ok(out)
}

pub fn exhaustive_check(nx: usize, ny: usize, nz: usize) -> Result<CrosscheckReport> {
    sweep(all_two_source(nx, ny, nz)?, None)
}

pub fn random_check(nx: usize, ny: usize, nz: usize, count: usize, seed: u64) -> Result<CrosscheckReport> {
    sweep(random_two_source(nx, ny, nz, count, seed)?, Some(seed))
}

pub fn one_source_check(max_x: usize, max_y: usize) -> Result<CrosscheckReport> {
    sweep(all_one_source(max_x, max_y)?, None)
}
