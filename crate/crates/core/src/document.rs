//! JSON documents for systems, automata, and qualia.
//!
//! Rational entries are written as `"p/q"` strings. On input, strings may
//! also hold integers or finite decimals, and JSON numbers are accepted;
//! every form is converted exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{hopfield_rule, hopfield_weights, AutomatonSpec, Initial, Neighbor, Rule};
use crate::error::{Error, Result};
use crate::lattice::Quale;
use crate::rational::{self, Rational};
use crate::space::{Alphabet, Factor, ProductSpace};
use crate::stoch::{Distribution, StochasticMatrix};
use crate::system::SystemSpec;

pub const FORMAT_VERSION: u32 = 1;

/// A rational as it appears in a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(serde_json::Number),
}

impl Entry {
    pub fn value(&self) -> Result<Rational> {
        match self {
            Entry::Text(s) => rational::parse(s),
            Entry::Number(n) => rational::parse(&n.to_string()),
        }
    }
}

impl From<&Rational> for Entry {
    fn from(r: &Rational) -> Self {
        Entry::Text(rational::format(r))
    }
}

fn values(entries: &[Entry]) -> Result<Vec<Rational>> {
    entries.iter().map(Entry::value).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccasionDoc {
    pub id: String,
    pub alphabet: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismDoc {
    pub target: String,
    /// Column order is mixed radix over these, first most significant.
    pub sources: Vec<String>,
    /// One column per joint source symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Vec<Entry>>>,
    /// Deterministic shorthand: one output symbol per joint source symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceDoc {
    pub occasion: String,
    pub distribution: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub format_version: u32,
    pub occasions: Vec<OccasionDoc>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub mechanisms: Vec<MechanismDoc>,
    #[serde(default)]
    pub sources: Vec<SourceDoc>,
}

fn unknown(id: &str) -> Error {
    Error::UnknownFactor(id.to_string())
}

impl SystemDocument {
    /// Builds the system. Structural problems (missing mechanisms, wrong
    /// domains) are left for [`SystemSpec::validate`]; malformed matrices and
    /// symbols fail here.
    pub fn to_spec(&self) -> Result<SystemSpec> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let mut sys = SystemSpec::new();
        for o in &self.occasions {
            sys.add_occasion(o.id.clone(), Alphabet::new(o.alphabet.iter().cloned())?);
        }
        for (s, t) in &self.edges {
            sys.add_edge(s.clone(), t.clone());
        }
        for m in &self.mechanisms {
            let alphabet = |id: &str| sys.alphabet(id).cloned().ok_or_else(|| unknown(id));
            let domain = ProductSpace::new(
                m.sources
                    .iter()
                    .map(|id| Ok(Factor::new(id.clone(), alphabet(id)?)))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let codomain = ProductSpace::single(m.target.clone(), alphabet(&m.target)?);
            let matrix = match (&m.columns, &m.outputs) {
                (Some(cols), None) => {
                    let cols = cols.iter().map(|c| values(c)).collect::<Result<Vec<_>>>()?;
                    StochasticMatrix::new(domain.clone(), codomain, cols)?
                }
                (None, Some(outs)) => {
                    if outs.len() != domain.dim() {
                        return Err(Error::LengthMismatch {
                            expected: domain.dim(),
                            found: outs.len(),
                        });
                    }
                    let idx = outs
                        .iter()
                        .map(|s| codomain.index_of_symbols(&[s.as_str()]))
                        .collect::<Result<Vec<_>>>()?;
                    StochasticMatrix::deterministic(domain.clone(), codomain, |i| idx[i])
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "mechanism for `{}` needs exactly one of `columns` or `outputs`",
                        m.target
                    )))
                }
            };
            sys.set_mechanism(m.target.clone(), matrix.reorder_domain(&domain.sorted())?);
        }
        for s in &self.sources {
            let alphabet = sys.alphabet(&s.occasion).cloned().ok_or_else(|| unknown(&s.occasion))?;
            let space = ProductSpace::single(s.occasion.clone(), alphabet);
            sys.set_source(s.occasion.clone(), Distribution::new(space, values(&s.distribution)?)?);
        }
        Ok(sys)
    }

    /// Canonical document: sources of each mechanism in id order, every
    /// mechanism written as columns.
    pub fn from_spec(spec: &SystemSpec) -> Self {
        SystemDocument {
            format_version: FORMAT_VERSION,
            occasions: spec
                .occasions()
                .iter()
                .map(|o| OccasionDoc {
                    id: o.id.clone(),
                    alphabet: o.alphabet.symbols().to_vec(),
                })
                .collect(),
            edges: spec.edges().iter().cloned().collect(),
            mechanisms: spec
                .mechanisms()
                .iter()
                .map(|(target, m)| MechanismDoc {
                    target: target.clone(),
                    sources: m.domain().ids().map(str::to_string).collect(),
                    columns: Some(m.columns().map(|c| c.iter().map(Entry::from).collect()).collect()),
                    outputs: None,
                })
                .collect(),
            sources: spec
                .sources()
                .iter()
                .map(|(id, d)| SourceDoc {
                    occasion: id.clone(),
                    distribution: d.weights().iter().map(Entry::from).collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_system(text: &str) -> Result<SystemSpec> {
    serde_json::from_str::<SystemDocument>(text)?.to_spec()
}

pub fn system_to_json(spec: &SystemSpec) -> String {
    to_pretty(&SystemDocument::from_spec(spec))
}

pub fn load_system(path: impl AsRef<Path>) -> Result<SystemSpec> {
    parse_system(&read(path)?)
}

fn read(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

/// A neighbor written either as a bare cell id (lag 1) or with a lag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NeighborDoc {
    Cell(String),
    Lagged { cell: String, lag: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RuleDoc {
    Life,
    /// Output symbols, one per joint neighborhood input.
    Table { outputs: Vec<String> },
    /// One column per joint neighborhood input.
    Kernel { columns: Vec<Vec<Entry>> },
    /// Logistic firing with explicit weights over the neighborhood, or
    /// Hebbian weights embedding the given attractors (indexed by `cells`).
    Hopfield {
        temperature: Entry,
        #[serde(default)]
        weights: Option<Vec<Entry>>,
        #[serde(default)]
        attractors: Option<Vec<Vec<u8>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDoc {
    Symbol(String),
    Distribution(Vec<Entry>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowDoc {
    pub start: i64,
    pub end: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDocument {
    pub format_version: u32,
    pub cells: Vec<String>,
    #[serde(default)]
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub neighborhoods: BTreeMap<String, Vec<NeighborDoc>>,
    /// Applied to cells without an entry in `rules`.
    #[serde(default)]
    pub default_rule: Option<RuleDoc>,
    #[serde(default)]
    pub rules: BTreeMap<String, RuleDoc>,
    /// `schedule[cell][t]` overrides the rule at step `t`.
    #[serde(default)]
    pub schedule: BTreeMap<String, BTreeMap<i64, RuleDoc>>,
    pub window: WindowDoc,
    pub initial: BTreeMap<String, InitialDoc>,
}

impl AutomatonDocument {
    pub fn to_spec(&self) -> Result<AutomatonSpec> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let mut a = AutomatonSpec {
            cells: self.cells.clone(),
            start: self.window.start,
            end: self.window.end,
            ..Default::default()
        };
        for (cell, symbols) in &self.alphabets {
            a.alphabets.insert(cell.clone(), Alphabet::new(symbols.iter().cloned())?);
        }
        for (cell, hood) in &self.neighborhoods {
            a.neighborhoods.insert(
                cell.clone(),
                hood.iter()
                    .map(|n| match n {
                        NeighborDoc::Cell(c) => Neighbor::new(c.clone()),
                        NeighborDoc::Lagged { cell, lag } => Neighbor::lagged(cell.clone(), *lag),
                    })
                    .collect(),
            );
        }
        for cell in &self.cells {
            let doc = self.rules.get(cell).or(self.default_rule.as_ref());
            if let Some(doc) = doc {
                let rule = self.rule(&a, cell, doc)?;
                a.rules.insert(cell.clone(), rule);
            }
        }
        for (cell, steps) in &self.schedule {
            let mut s = BTreeMap::new();
            for (t, doc) in steps {
                s.insert(*t, self.rule(&a, cell, doc)?);
            }
            a.schedule.insert(cell.clone(), s);
        }
        for (cell, init) in &self.initial {
            a.initial.insert(
                cell.clone(),
                match init {
                    InitialDoc::Symbol(s) => Initial::Symbol(s.clone()),
                    InitialDoc::Distribution(w) => Initial::Distribution(values(w)?),
                },
            );
        }
        Ok(a)
    }

    fn rule(&self, a: &AutomatonSpec, cell: &str, doc: &RuleDoc) -> Result<Rule> {
        let hood = a
            .neighborhoods
            .get(cell)
            .ok_or_else(|| Error::InvalidAutomaton(format!("cell `{cell}` has no neighborhood")))?;
        let inputs = ProductSpace::new(
            hood.iter()
                .enumerate()
                .map(|(i, n)| Factor::new(format!("n{i}"), a.alphabet(&n.cell)))
                .collect(),
        )?;
        let out = ProductSpace::single("out", a.alphabet(cell));
        Ok(match doc {
            RuleDoc::Life => Rule::Life,
            RuleDoc::Table { outputs } => Rule::Table(
                outputs
                    .iter()
                    .map(|s| out.index_of_symbols(&[s.as_str()]))
                    .collect::<Result<Vec<_>>>()?,
            ),
            RuleDoc::Kernel { columns } => {
                let cols = columns.iter().map(|c| values(c)).collect::<Result<Vec<_>>>()?;
                Rule::Kernel(StochasticMatrix::new(inputs, out, cols)?)
            }
            RuleDoc::Hopfield {
                temperature,
                weights,
                attractors,
            } => {
                let w = match (weights, attractors) {
                    (Some(w), None) => values(w)?,
                    (None, Some(xi)) => {
                        let alpha = hopfield_weights(self.cells.len(), xi)?;
                        let me = self.cells.iter().position(|c| c == cell).expect("known cell");
                        hood.iter()
                            .map(|n| {
                                let j = self.cells.iter().position(|c| *c == n.cell).ok_or_else(|| {
                                    Error::InvalidAutomaton(format!("unknown neighbor `{}`", n.cell))
                                })?;
                                Ok(alpha[me][j].clone())
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                    _ => {
                        return Err(Error::Parse(format!(
                            "hopfield rule for `{cell}` needs exactly one of `weights` or `attractors`"
                        )))
                    }
                };
                Rule::Kernel(hopfield_rule(&w, &temperature.value()?)?)
            }
        })
    }
}

pub fn parse_automaton(text: &str) -> Result<AutomatonDocument> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_automaton(path: impl AsRef<Path>) -> Result<AutomatonDocument> {
    parse_automaton(&read(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionDoc {
    /// Sorted `src-trg` list, `null` for the empty subsystem.
    pub subsystem: String,
    pub targets: Vec<String>,
    pub sources: Vec<String>,
    /// One column per joint target symbol, each a distribution over joint
    /// source symbols.
    pub columns: Vec<Vec<Entry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualeDocument {
    pub format_version: u32,
    pub sections: Vec<SectionDoc>,
}

pub fn quale_to_json(quale: &Quale) -> String {
    let sections = quale
        .sections()
        .iter()
        .map(|s| SectionDoc {
            subsystem: s.subsystem().label(),
            targets: s.map().domain().ids().map(str::to_string).collect(),
            sources: s.map().codomain().ids().map(str::to_string).collect(),
            columns: s.map().columns().map(|c| c.iter().map(Entry::from).collect()).collect(),
        })
        .collect();
    to_pretty(&QualeDocument {
        format_version: FORMAT_VERSION,
        sections,
    })
}
