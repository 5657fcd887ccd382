//! Command-line front end. Each command returns an [`Outcome`] instead of
//! printing, so it can be driven from tests.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::document::{self, load_automaton, load_system, Entry};
use crate::entangle::{enumerate_partitions, entanglement, Partition, DEFAULT_SOURCE_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::{build_quale, Subsystem, DEFAULT_EDGE_BUDGET};
use crate::measure::{effective_information, ei_lattice, output_space, Context};
use crate::oracle::{exhaustive_check, random_check};
use crate::stoch::{Distribution, Divergence};
use crate::system::SystemSpec;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn from_error(e: &Error) -> Self {
        Outcome {
            code: if e.is_input_error() { 2 } else { 1 },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

fn finish(result: Result<Outcome>) -> Outcome {
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Splits `"a-b"` at the dash whose sides are both known occasions.
fn parse_pair(spec: &SystemSpec, text: &str) -> Result<(String, String)> {
    let found: Vec<(String, String)> = text
        .match_indices('-')
        .map(|(i, _)| (&text[..i], &text[i + 1..]))
        .filter(|(a, b)| spec.occasion(a).is_some() && spec.occasion(b).is_some())
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    match &found[..] {
        [one] => Ok(one.clone()),
        [] => Err(Error::Parse(format!("`{text}` is not a pair of known occasions"))),
        _ => Err(Error::Parse(format!("`{text}` splits into occasions ambiguously"))),
    }
}

/// `all`, `null`, or comma-separated `src-trg` pairs.
pub fn parse_subsystem(spec: &SystemSpec, text: &str) -> Result<Subsystem> {
    match text.trim() {
        "all" => Ok(Subsystem::top(spec)),
        "null" | "" => Ok(Subsystem::bottom()),
        list => {
            let pairs = list
                .split(',')
                .map(|p| parse_pair(spec, p.trim()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Subsystem::from_pairs(spec, pairs))
        }
    }
}

pub fn parse_context(spec: &SystemSpec, text: &str) -> Result<Context> {
    match text.trim() {
        "null" => Ok(Context::Null),
        other => Ok(Context::Subsystem(parse_subsystem(spec, other)?)),
    }
}

/// Resolves a key to a target occasion: exact id, or else the unique id
/// ending with the key, ignoring case (`z` finds `vZ`).
fn resolve_target<'a>(targets: &[&'a str], key: &str) -> Result<&'a str> {
    if let Some(t) = targets.iter().find(|t| **t == key) {
        return Ok(t);
    }
    let key_lower = key.to_lowercase();
    let hits: Vec<&&str> = targets
        .iter()
        .filter(|t| t.to_lowercase().ends_with(&key_lower))
        .collect();
    match hits[..] {
        [one] => Ok(one),
        [] => Err(Error::UnknownFactor(key.to_string())),
        _ => Err(Error::Parse(format!("output key `{key}` is ambiguous"))),
    }
}

/// `@file.json` (a JSON array over joint outputs), `id=sym,id=sym`, or a
/// bare symbol when there is a single target.
pub fn parse_output(spec: &SystemSpec, text: &str) -> Result<Distribution> {
    let space = output_space(spec)?;
    if let Some(path) = text.strip_prefix('@') {
        let raw = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let entries: Vec<Entry> = serde_json::from_str(&raw)?;
        let weights = entries.iter().map(Entry::value).collect::<Result<Vec<_>>>()?;
        return Distribution::new(space, weights);
    }
    let targets: Vec<&str> = space.ids().collect();
    let mut symbols: Vec<Option<String>> = vec![None; targets.len()];
    if !text.contains('=') {
        if targets.len() != 1 {
            return Err(Error::Parse(format!(
                "`{text}` names no target; use id=symbol for each of {}",
                targets.join(",")
            )));
        }
        symbols[0] = Some(text.trim().to_string());
    } else {
        for part in text.split(',') {
            let (key, sym) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected id=symbol, found `{part}`")))?;
            let id = resolve_target(&targets, key.trim())?;
            let pos = space.position(id).expect("target of output space");
            symbols[pos] = Some(sym.trim().to_string());
        }
    }
    let symbols = symbols
        .iter()
        .zip(&targets)
        .map(|(s, id)| {
            s.as_deref()
                .ok_or_else(|| Error::Parse(format!("no output symbol given for `{id}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let index = space.index_of_symbols(&symbols)?;
    Ok(Distribution::dirac(&space, index))
}

fn bits(d: &Divergence) -> String {
    d.to_string()
}

fn infinite_note(spec_out: &mut String, d: &Divergence, space: &crate::space::ProductSpace) {
    if let Divergence::Infinite { offending } = d {
        let states: Vec<String> = offending.iter().map(|&i| space.label(i)).collect();
        let _ = writeln!(spec_out, "support mismatch at: {}", states.join("; "));
    }
}

pub fn cmd_validate(path: &Path) -> Outcome {
    finish((|| {
        let sys = load_system(path)?;
        let violations = sys.validate();
        if violations.is_empty() {
            return Ok(Outcome::ok(format!(
                "valid: {} occasions, {} edges\n",
                sys.occasions().len(),
                sys.edges().len()
            )));
        }
        let mut stderr = String::new();
        for v in &violations {
            let _ = writeln!(stderr, "{v}");
        }
        Ok(Outcome {
            code: 1,
            stdout: String::new(),
            stderr,
        })
    })())
}

fn load_valid(path: &Path) -> Result<SystemSpec> {
    let sys = load_system(path)?;
    sys.check()?;
    Ok(sys)
}

pub fn cmd_quale(path: &Path, max_edges: usize, out: Option<&Path>) -> Outcome {
    finish((|| {
        let sys = load_valid(path)?;
        let quale = build_quale(&sys, max_edges)?;
        let json = document::quale_to_json(&quale);
        match out {
            Some(p) => {
                write_file(p, &json)?;
                Ok(Outcome::ok(format!("{} sections\n", quale.len())))
            }
            None => Ok(Outcome::ok(json)),
        }
    })())
}

pub fn cmd_ei(path: &Path, subsystem: &str, context: &str, output: &str) -> Outcome {
    finish((|| {
        let sys = load_valid(path)?;
        let c1 = parse_subsystem(&sys, subsystem)?;
        let c2 = parse_context(&sys, context)?;
        let d = parse_output(&sys, output)?;
        let r = effective_information(&sys, &c1, &c2, &d)?;
        let mut stderr = String::new();
        infinite_note(&mut stderr, &r.ei, r.measurement.space());
        Ok(Outcome {
            code: 0,
            stdout: format!("{}\n", bits(&r.ei)),
            stderr,
        })
    })())
}

pub fn cmd_gamma(path: &Path, subsystem: &str, partition: Option<&str>, all: bool, output: &str) -> Outcome {
    finish((|| {
        let sys = load_valid(path)?;
        let c = parse_subsystem(&sys, subsystem)?;
        let d = parse_output(&sys, output)?;
        let partitions = match (partition, all) {
            (Some(p), false) => vec![p.parse::<Partition>()?],
            (None, true) => {
                let sources: Vec<&str> = c.sources().into_iter().collect();
                enumerate_partitions(&sources, DEFAULT_SOURCE_BUDGET)?
            }
            _ => return Err(Error::Parse("give exactly one of --partition or --all-partitions".into())),
        };
        let mut stdout = String::from("partition\tgamma_bits\tei_bits\tblock_ei_bits\n");
        let mut stderr = String::new();
        for p in &partitions {
            let r = entanglement(&sys, &c, p, &d)?;
            let blocks: Vec<String> = r.block_ei.iter().map(bits).collect();
            let _ = writeln!(stdout, "{p}\t{}\t{}\t{}", bits(&r.gamma), bits(&r.ei), blocks.join(","));
            if let Divergence::Infinite { .. } = r.gamma {
                let _ = writeln!(stderr, "{p}: infinite entanglement");
            }
        }
        Ok(Outcome {
            code: 0,
            stdout,
            stderr,
        })
    })())
}

/// Hasse diagram of the subsystem lattice with `ei` labels.
pub fn lattice_dot(sys: &SystemSpec, d: &Distribution, max_edges: usize) -> Result<String> {
    let l = ei_lattice(sys, d, max_edges)?;
    let mut dot = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, (c, ei)) in l.nodes.iter().enumerate() {
        let _ = writeln!(dot, "  n{i} [label=\"{}\\nei={}\"];", c.label(), five(ei));
    }
    for (coarse, fine, ei) in &l.covers {
        let _ = writeln!(dot, "  n{coarse} -> n{fine} [label=\"{}\"];", five(ei));
    }
    dot.push_str("}\n");
    Ok(dot)
}

fn five(d: &Divergence) -> String {
    match d {
        Divergence::Finite(b) => format!("{b:.5}"),
        Divergence::Infinite { .. } => "inf".into(),
    }
}

pub fn cmd_lattice(path: &Path, output: &str, dot: Option<&Path>, max_edges: usize) -> Outcome {
    finish((|| {
        let sys = load_valid(path)?;
        let d = parse_output(&sys, output)?;
        let text = lattice_dot(&sys, &d, max_edges)?;
        match dot {
            Some(p) => {
                write_file(p, &text)?;
                Ok(Outcome::ok(String::new()))
            }
            None => Ok(Outcome::ok(text)),
        }
    })())
}

pub fn cmd_unroll(path: &Path, steps: Option<usize>, out: Option<&Path>) -> Outcome {
    finish((|| {
        let doc = load_automaton(path)?;
        let mut a = doc.to_spec()?;
        if let Some(steps) = steps {
            if steps == 0 {
                return Err(Error::EmptyWindow);
            }
            a.end = a.start + steps as i64 - 1;
        }
        let sys = a.unroll()?;
        sys.check()?;
        let json = document::system_to_json(&sys);
        match out {
            Some(p) => {
                write_file(p, &json)?;
                Ok(Outcome::ok(format!(
                    "{} occasions, {} edges\n",
                    sys.occasions().len(),
                    sys.edges().len()
                )))
            }
            None => Ok(Outcome::ok(json)),
        }
    })())
}

fn parse_dims(text: &str) -> Result<(usize, usize, usize)> {
    let parts = text
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Parse(format!("expected dimensions like 2x2x2, found `{text}`")))?;
    match parts[..] {
        [a, b, c] if a > 0 && b > 0 && c > 0 => Ok((a, b, c)),
        _ => Err(Error::Parse(format!("expected dimensions like 2x2x2, found `{text}`"))),
    }
}

pub fn cmd_oracle_check(exhaustive: Option<&str>, random: Option<usize>, seed: u64, dims: &str) -> Outcome {
    finish((|| {
        let report = match (exhaustive, random) {
            (Some(d), None) => {
                let (x, y, z) = parse_dims(d)?;
                exhaustive_check(x, y, z)?
            }
            (None, Some(n)) => {
                let (x, y, z) = parse_dims(dims)?;
                random_check(x, y, z, n, seed)?
            }
            _ => return Err(Error::Parse("give exactly one of --exhaustive or --random".into())),
        };
        let mut stdout = format!("{report}\n");
        for m in &report.mismatches {
            let _ = writeln!(stdout, "{m}");
        }
        Ok(Outcome {
            code: i32::from(!report.passed()),
            stdout,
            stderr: String::new(),
        })
    })())
}

#[derive(Parser, Debug)]
#[command(name = "quale", version, about = "Measurement, effective information, and entanglement of finite stochastic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct OutputArg {
    /// Observed output: `id=symbol,...`, a bare symbol for one target, or
    /// `@dist.json`.
    #[arg(long)]
    pub output: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a system document.
    Validate { path: PathBuf },
    /// Write every section of the quale as JSON.
    Quale {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EDGE_BUDGET)]
        max_edges: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective information of a subsystem in a context.
    Ei {
        path: PathBuf,
        #[arg(long, default_value = "all")]
        subsystem: String,
        #[arg(long, default_value = "null")]
        context: String,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Entanglement over one or all partitions of the subsystem's sources.
    Gamma {
        path: PathBuf,
        #[arg(long, default_value = "all")]
        subsystem: String,
        #[arg(long, conflicts_with = "all_partitions")]
        partition: Option<String>,
        #[arg(long)]
        all_partitions: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Hasse diagram of the subsystem lattice, in DOT.
    Lattice {
        path: PathBuf,
        #[command(flatten)]
        output: OutputArg,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EDGE_BUDGET)]
        max_edges: usize,
    },
    /// Unroll an automaton document into a system document.
    Unroll {
        path: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the matrix pipeline with count-based closed forms.
    OracleCheck {
        /// Every function of the given shape, e.g. 2x2x4.
        #[arg(long, conflicts_with = "random")]
        exhaustive: Option<String>,
        /// This many random functions.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Shape for --random.
        #[arg(long, default_value = "3x3x3")]
        dims: String,
    },
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Quale { path, max_edges, out } => cmd_quale(&path, max_edges, out.as_deref()),
        Command::Ei {
            path,
            subsystem,
            context,
            output,
        } => cmd_ei(&path, &subsystem, &context, &output.output),
        Command::Gamma {
            path,
            subsystem,
            partition,
            all_partitions,
            output,
        } => cmd_gamma(&path, &subsystem, partition.as_deref(), all_partitions, &output.output),
        Command::Lattice {
            path,
            output,
            dot,
            max_edges,
        } => cmd_lattice(&path, &output.output, dot.as_deref(), max_edges),
        Command::Unroll { path, steps, out } => cmd_unroll(&path, steps, out.as_deref()),
        Command::OracleCheck {
            exhaustive,
            random,
            seed,
            dims,
        } => cmd_oracle_check(exhaustive.as_deref(), random, seed, &dims),
    }
}

/// Parses arguments and runs; usage errors exit 2.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}
