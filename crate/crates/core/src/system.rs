//! Distributed dynamical systems: a directed graph of occasions, each with
//! an output alphabet and a mechanism from its sources' joint alphabet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::space::{Alphabet, ProductSpace};
use crate::stoch::{Distribution, StochasticMatrix};
use crate::table::{lift_function, FunctionTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occasion {
    pub id: String,
    pub alphabet: Alphabet,
}

/// A rule broken by a [`SystemSpec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateOccasion(String),
    UnknownOccasion { edge: (String, String), missing: String },
    MissingMechanism(String),
    MissingSource(String),
    /// Mechanism attached to an occasion that has no incoming edges, or to
    /// an unknown occasion.
    UnexpectedMechanism(String),
    /// Source distribution attached to an occasion that has incoming edges,
    /// or to an unknown occasion.
    UnexpectedSource(String),
    DomainMismatch { occasion: String, expected: String, found: String },
    /// Right factors, wrong order.
    DomainOrderMismatch { occasion: String, expected: Vec<String>, found: Vec<String> },
    CodomainMismatch { occasion: String, expected: String, found: String },
    SourceSpaceMismatch { occasion: String, expected: String, found: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateOccasion(id) => write!(f, "DuplicateOccasion: `{id}`"),
            Violation::UnknownOccasion { edge, missing } => {
                write!(f, "UnknownOccasion: edge {}-{} references `{missing}`", edge.0, edge.1)
            }
            Violation::MissingMechanism(id) => write!(f, "MissingMechanism: `{id}` has sources but no mechanism"),
            Violation::MissingSource(id) => write!(f, "MissingSource: `{id}` has no sources and no distribution"),
            Violation::UnexpectedMechanism(id) => write!(f, "UnexpectedMechanism: `{id}`"),
            Violation::UnexpectedSource(id) => write!(f, "UnexpectedSource: `{id}`"),
            Violation::DomainMismatch { occasion, expected, found } => {
                write!(f, "DomainMismatch: `{occasion}` expects {expected}, mechanism has {found}")
            }
            Violation::DomainOrderMismatch { occasion, expected, found } => write!(
                f,
                "DomainOrderMismatch: `{occasion}` expects ({}), mechanism has ({})",
                expected.join(","),
                found.join(",")
            ),
            Violation::CodomainMismatch { occasion, expected, found } => {
                write!(f, "CodomainMismatch: `{occasion}` expects {expected}, mechanism has {found}")
            }
            Violation::SourceSpaceMismatch { occasion, expected, found } => {
                write!(f, "SourceSpaceMismatch: `{occasion}` expects {expected}, distribution has {found}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemSpec {
    occasions: Vec<Occasion>,
    edges: BTreeSet<(String, String)>,
    mechanisms: BTreeMap<String, StochasticMatrix>,
    sources: BTreeMap<String, Distribution>,
}

impl SystemSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_occasion(mut self, id: impl Into<String>, alphabet: Alphabet) -> Self {
        self.add_occasion(id, alphabet);
        self
    }

    pub fn with_edge(mut self, source: impl Into<String>, target: impl Into<String>) -> Self {
        self.add_edge(source, target);
        self
    }

    pub fn with_mechanism(mut self, target: impl Into<String>, m: StochasticMatrix) -> Self {
        self.set_mechanism(target, m);
        self
    }

    pub fn with_source(mut self, occasion: impl Into<String>, d: Distribution) -> Self {
        self.set_source(occasion, d);
        self
    }

    pub fn add_occasion(&mut self, id: impl Into<String>, alphabet: Alphabet) {
        self.occasions.push(Occasion {
            id: id.into(),
            alphabet,
        });
    }

    pub fn add_edge(&mut self, source: impl Into<String>, target: impl Into<String>) {
        self.edges.insert((source.into(), target.into()));
    }

    pub fn set_mechanism(&mut self, target: impl Into<String>, m: StochasticMatrix) {
        self.mechanisms.insert(target.into(), m);
    }

    pub fn set_source(&mut self, occasion: impl Into<String>, d: Distribution) {
        self.sources.insert(occasion.into(), d);
    }

    pub fn occasions(&self) -> &[Occasion] {
        &self.occasions
    }

    pub fn occasion(&self, id: &str) -> Option<&Occasion> {
        self.occasions.iter().find(|o| o.id == id)
    }

    pub fn alphabet(&self, id: &str) -> Option<&Alphabet> {
        self.occasion(id).map(|o| &o.alphabet)
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn has_edge(&self, source: &str, target: &str) -> bool {
        self.edges.contains(&(source.to_string(), target.to_string()))
    }

    pub fn mechanisms(&self) -> &BTreeMap<String, StochasticMatrix> {
        &self.mechanisms
    }

    pub fn mechanism(&self, id: &str) -> Option<&StochasticMatrix> {
        self.mechanisms.get(id)
    }

    pub fn sources(&self) -> &BTreeMap<String, Distribution> {
        &self.sources
    }

    /// Sources of `target` in canonical (id) order.
    pub fn sources_of(&self, target: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(_, t)| t == target)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    /// Product of the listed occasions' alphabets, sorted by id.
    pub fn space_of<'a, I>(&self, ids: I) -> Result<ProductSpace>
    where
        I: IntoIterator<Item = &'a str>,
    {
        ProductSpace::canonical(
            ids.into_iter()
                .map(|id| {
                    self.alphabet(id)
                        .cloned()
                        .map(|a| (id.to_string(), a))
                        .ok_or_else(|| Error::UnknownFactor(id.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `S_l`: the canonical input space of an occasion's mechanism.
    pub fn input_space(&self, target: &str) -> Result<ProductSpace> {
        self.space_of(self.sources_of(target))
    }

    /// Occasions with at least one outgoing edge, sorted.
    pub fn edge_sources(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|(s, _)| s.as_str()).collect()
    }

    /// Occasions with at least one incoming edge, sorted.
    pub fn edge_targets(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|(_, t)| t.as_str()).collect()
    }

    /// Every rule this system breaks; empty iff well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for o in &self.occasions {
            if !seen.insert(o.id.as_str()) {
                out.push(Violation::DuplicateOccasion(o.id.clone()));
            }
        }
        let mut edges_ok = true;
        for (s, t) in &self.edges {
            for end in [s, t] {
                if !seen.contains(end.as_str()) {
                    edges_ok = false;
                    out.push(Violation::UnknownOccasion {
                        edge: (s.clone(), t.clone()),
                        missing: end.clone(),
                    });
                }
            }
        }
        let targets = self.edge_targets();
        for o in &self.occasions {
            let has_sources = targets.contains(o.id.as_str());
            match (has_sources, self.mechanisms.get(&o.id), self.sources.get(&o.id)) {
                (true, None, _) => out.push(Violation::MissingMechanism(o.id.clone())),
                (true, Some(m), d) => {
                    if d.is_some() {
                        out.push(Violation::UnexpectedSource(o.id.clone()));
                    }
                    if edges_ok {
                        self.check_mechanism(o, m, &mut out);
                    }
                }
                (false, m, None) => {
                    if m.is_some() {
                        out.push(Violation::UnexpectedMechanism(o.id.clone()));
                    }
                    out.push(Violation::MissingSource(o.id.clone()));
                }
                (false, m, Some(d)) => {
                    if m.is_some() {
                        out.push(Violation::UnexpectedMechanism(o.id.clone()));
                    }
                    let expected = ProductSpace::single(o.id.clone(), o.alphabet.clone());
                    if d.space() != &expected {
                        out.push(Violation::SourceSpaceMismatch {
                            occasion: o.id.clone(),
                            expected: format!("{expected:?}"),
                            found: format!("{:?}", d.space()),
                        });
                    }
                }
            }
        }
        for id in self.mechanisms.keys() {
            if !seen.contains(id.as_str()) {
                out.push(Violation::UnexpectedMechanism(id.clone()));
            }
        }
        for id in self.sources.keys() {
            if !seen.contains(id.as_str()) {
                out.push(Violation::UnexpectedSource(id.clone()));
            }
        }
        out
    }

    fn check_mechanism(&self, o: &Occasion, m: &StochasticMatrix, out: &mut Vec<Violation>) {
        let expected_codomain = ProductSpace::single(o.id.clone(), o.alphabet.clone());
        if m.codomain() != &expected_codomain {
            out.push(Violation::CodomainMismatch {
                occasion: o.id.clone(),
                expected: format!("{expected_codomain:?}"),
                found: format!("{:?}", m.codomain()),
            });
        }
        let Ok(expected) = self.input_space(&o.id) else {
            return;
        };
        if m.domain() == &expected {
            return;
        }
        if m.domain().same_factors(&expected) {
            out.push(Violation::DomainOrderMismatch {
                occasion: o.id.clone(),
                expected: expected.ids().map(String::from).collect(),
                found: m.domain().ids().map(String::from).collect(),
            });
        } else {
            out.push(Violation::DomainMismatch {
                occasion: o.id.clone(),
                expected: format!("{expected:?}"),
                found: format!("{:?}", m.domain()),
            });
        }
    }

    /// `Ok(())` when [`validate`](Self::validate) finds nothing.
    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSystem { violations })
        }
    }

    /// One target computing `f` from uniformly distributed sources, one
    /// occasion per factor of `f`'s domain.
    pub fn gate(f: &FunctionTable) -> Result<Self> {
        let [out] = f.codomain().factors() else {
            return Err(Error::ShapeMismatch {
                expected: "a single codomain factor".into(),
                found: format!("{:?}", f.codomain()),
            });
        };
        let mut sys = SystemSpec::new();
        for factor in f.domain().factors() {
            sys.add_occasion(factor.id.clone(), factor.alphabet.clone());
            sys.add_edge(factor.id.clone(), out.id.clone());
            sys.set_source(
                factor.id.clone(),
                Distribution::uniform(&ProductSpace::single(factor.id.clone(), factor.alphabet.clone())),
            );
        }
        sys.add_occasion(out.id.clone(), out.alphabet.clone());
        let domain = f.domain().sorted();
        let m = lift_function(f).reorder_domain(&domain)?;
        sys.set_mechanism(out.id.clone(), m);
        sys.check()?;
        Ok(sys)
    }
}
