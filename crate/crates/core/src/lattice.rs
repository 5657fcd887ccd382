//! Subsystems, glued mechanisms, and the quale.
//!
//! A [`Subsystem`] is a set of ordered occasion pairs. Pairs that are edges
//! of the host system are effective; the rest are carried along but never
//! contribute to a mechanism. Source and target coordinates of a subsystem
//! are always ordered by occasion id.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Alphabet, ProductSpace};
use crate::stoch::{compose, diagonal, dual, projection, tensor, Distribution, StochasticMatrix};
use crate::system::SystemSpec;

/// Default ceiling on the number of edges for full-lattice operations.
pub const DEFAULT_EDGE_BUDGET: usize = 16;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subsystem {
    /// `true` marks an effective pair (an edge of the host).
    pairs: BTreeMap<(String, String), bool>,
}

impl Subsystem {
    /// The empty subsystem.
    pub fn bottom() -> Self {
        Self::default()
    }

    /// Every edge of the host.
    pub fn top(spec: &SystemSpec) -> Self {
        Subsystem {
            pairs: spec.edges().iter().map(|e| (e.clone(), true)).collect(),
        }
    }

    /// Tags each pair against the host's edge set.
    pub fn from_pairs<I, A, B>(spec: &SystemSpec, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        Subsystem {
            pairs: pairs
                .into_iter()
                .map(|(a, b)| {
                    let (a, b) = (a.into(), b.into());
                    let effective = spec.has_edge(&a, &b);
                    ((a, b), effective)
                })
                .collect(),
        }
    }

    /// Adds a pair, tagging it against the host.
    pub fn with_pair(mut self, spec: &SystemSpec, source: &str, target: &str) -> Self {
        self.pairs.insert(
            (source.to_string(), target.to_string()),
            spec.has_edge(source, target),
        );
        self
    }

    /// The pairs satisfying `keep`, tags preserved.
    pub fn filter(&self, keep: impl Fn(&str, &str) -> bool) -> Self {
        Subsystem {
            pairs: self
                .pairs
                .iter()
                .filter(|((a, b), _)| keep(a, b))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, bool)> {
        self.pairs.iter().map(|((a, b), e)| (a.as_str(), b.as_str(), *e))
    }

    pub fn effective_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs
            .iter()
            .filter(|(_, e)| **e)
            .map(|((a, b), _)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// No effective pairs: behaves as the empty subsystem.
    pub fn is_null(&self) -> bool {
        self.effective_pairs().next().is_none()
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.pairs.contains_key(&(source.to_string(), target.to_string()))
    }

    /// Sources of effective pairs.
    pub fn sources(&self) -> BTreeSet<&str> {
        self.effective_pairs().map(|(a, _)| a).collect()
    }

    /// Targets of effective pairs.
    pub fn targets(&self) -> BTreeSet<&str> {
        self.effective_pairs().map(|(_, b)| b).collect()
    }

    /// Effective sources feeding `target`.
    pub fn sources_of(&self, target: &str) -> Vec<&str> {
        self.effective_pairs()
            .filter(|(_, b)| *b == target)
            .map(|(a, _)| a)
            .collect()
    }

    pub fn is_subset_of(&self, other: &Subsystem) -> bool {
        self.pairs.keys().all(|k| other.pairs.contains_key(k))
    }

    pub fn union(&self, other: &Subsystem) -> Subsystem {
        let mut pairs = self.pairs.clone();
        for (k, v) in &other.pairs {
            pairs.insert(k.clone(), *v);
        }
        Subsystem { pairs }
    }

    pub fn intersection(&self, other: &Subsystem) -> Subsystem {
        self.filter(|a, b| other.contains(a, b))
    }

    /// `S^C`, ordered by occasion id.
    pub fn source_space(&self, spec: &SystemSpec) -> Result<ProductSpace> {
        spec.space_of(self.sources())
    }

    /// `A^C`, ordered by occasion id.
    pub fn target_space(&self, spec: &SystemSpec) -> Result<ProductSpace> {
        spec.space_of(self.targets())
    }

    /// Sorted `src-trg` list, or `null` when empty.
    pub fn label(&self) -> String {
        if self.pairs.is_empty() {
            return "null".into();
        }
        self.pairs
            .keys()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.label())
    }
}

impl fmt::Debug for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|((a, b), e)| if *e { format!("{a}->{b}") } else { format!("{a}~>{b}") })
            .collect();
        write!(f, "Subsystem{{{}}}", parts.join(", "))
    }
}

/// Every subset of the host's edges, in binary-counting order over the
/// sorted edge list (the empty subsystem first).
pub fn enumerate_subsystems(
    spec: &SystemSpec,
    max_pairs: usize,
) -> Result<impl Iterator<Item = Subsystem>> {
    let edges: Vec<(String, String)> = spec.edges().iter().cloned().collect();
    if edges.len() > max_pairs {
        return Err(Error::BudgetExceeded {
            what: "edges",
            count: edges.len(),
            limit: max_pairs,
        });
    }
    let n = edges.len();
    Ok((0u64..1 << n).map(move |mask| Subsystem {
        pairs: (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (edges[i].clone(), true))
            .collect(),
    }))
}

/// `m^C_l`: the mechanism of `target` with inputs on edges outside `c`
/// averaged uniformly.
pub fn occasion_submechanism(
    spec: &SystemSpec,
    c: &Subsystem,
    target: &str,
) -> Result<StochasticMatrix> {
    if !c.targets().contains(target) {
        return Err(Error::NotATarget(target.to_string()));
    }
    let m = spec
        .mechanism(target)
        .ok_or_else(|| Error::NotATarget(target.to_string()))?;
    let kept = c.sources_of(target);
    let marginalize = dual(&projection(m.domain(), &kept)?)?;
    compose(m, &marginalize)
}

/// `m_C`: per-target submechanisms tensored together after the diagonal
/// copy of `S^C`. Domain `S^C`, codomain `A^C`.
pub fn glue_mechanism(spec: &SystemSpec, c: &Subsystem) -> Result<StochasticMatrix> {
    glue_cached(spec, c, &SubmechanismCache::default())
}

/// Occasion submechanisms keyed by target and kept sources; many
/// subsystems share them.
#[derive(Default)]
struct SubmechanismCache {
    entries: Mutex<HashMap<(String, Vec<String>), Arc<StochasticMatrix>>>,
}

impl SubmechanismCache {
    fn get(&self, spec: &SystemSpec, c: &Subsystem, target: &str) -> Result<Arc<StochasticMatrix>> {
        let key = (
            target.to_string(),
            c.sources_of(target).into_iter().map(str::to_string).collect(),
        );
        if let Some(m) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(occasion_submechanism(spec, c, target)?);
        self.entries.lock().expect("cache lock").insert(key, Arc::clone(&m));
        Ok(m)
    }
}

fn glue_cached(spec: &SystemSpec, c: &Subsystem, cache: &SubmechanismCache) -> Result<StochasticMatrix> {
    if c.is_null() {
        return Err(Error::EmptySubsystem);
    }
    let source = c.source_space(spec)?;
    let target = c.target_space(spec)?;
    let parts = c
        .targets()
        .into_iter()
        .map(|l| {
            let m = cache.get(spec, c, l)?;
            let map = source.restriction_map(m.domain())?;
            Ok((m, map))
        })
        .collect::<Result<Vec<_>>>()?;
    // Column s is the Kronecker product of each part's column at s's
    // restriction, which is what the diagonal followed by the tensor
    // computes, without materializing the intermediate space.
    let rows = target.dim();
    let mut entries = Vec::with_capacity(source.dim() * rows);
    for s in 0..source.dim() {
        let mut column = vec![Rational::one()];
        for (m, map) in &parts {
            let part = m.column(map[s]);
            let mut next = Vec::with_capacity(column.len() * part.len());
            for a in &column {
                for b in part {
                    next.push(if a.is_zero() || b.is_zero() {
                        Rational::zero()
                    } else {
                        a * b
                    });
                }
            }
            column = next;
        }
        entries.extend(column);
    }
    Ok(StochasticMatrix::from_columns_unchecked(source, target, entries))
}

/// Literal construction `(⊗_l m^C_l) ∘ Δ` with the dense diagonal. Matches
/// [`glue_mechanism`] exactly; exponential in the number of shared sources.
pub fn glue_mechanism_via_diagonal(spec: &SystemSpec, c: &Subsystem) -> Result<StochasticMatrix> {
    if c.is_null() {
        return Err(Error::EmptySubsystem);
    }
    let source = c.source_space(spec)?;
    let subs = c
        .targets()
        .into_iter()
        .map(|l| occasion_submechanism(spec, c, l))
        .collect::<Result<Vec<_>>>()?;
    let domains: Vec<ProductSpace> = subs.iter().map(|m| m.domain().clone()).collect();
    let delta = diagonal(&source, &domains)?;
    let mut offset = 0;
    let mut product: Option<StochasticMatrix> = None;
    for m in &subs {
        let n = m.domain().factors().len();
        let renamed = ProductSpace::new(delta.codomain().factors()[offset..offset + n].to_vec())?;
        offset += n;
        let m = m.with_domain(renamed)?;
        product = Some(match product {
            None => m,
            Some(p) => tensor(&p, &m)?,
        });
    }
    compose(&product.expect("nonempty"), &delta)
}

/// An element of the structure presheaf at a subsystem: a stochastic map
/// from target outputs `A^C` to source outputs `S^C`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Section {
    subsystem: Subsystem,
    map: StochasticMatrix,
}

impl Section {
    pub fn new(subsystem: Subsystem, map: StochasticMatrix) -> Self {
        Section { subsystem, map }
    }

    /// The unique section over the empty subsystem.
    pub fn scalar(subsystem: Subsystem) -> Self {
        Section {
            subsystem,
            map: StochasticMatrix::identity(&ProductSpace::scalar()),
        }
    }

    pub fn subsystem(&self) -> &Subsystem {
        &self.subsystem
    }

    pub fn map(&self) -> &StochasticMatrix {
        &self.map
    }
}

/// Marginal of a section map onto the kept target and source coordinates:
/// dropped targets are averaged uniformly, dropped sources summed out.
fn marginal_map<S: AsRef<str>>(
    map: &StochasticMatrix,
    targets: &[S],
    sources: &[S],
) -> Result<StochasticMatrix> {
    let average = dual(&projection(map.domain(), targets)?)?;
    let sum = projection(map.codomain(), sources)?;
    compose(&sum, &compose(map, &average)?)
}

/// Restriction along `c1 ⊆ section's subsystem`.
pub fn restrict(section: &Section, c1: &Subsystem) -> Result<Section> {
    if !c1.is_subset_of(&section.subsystem) {
        return Err(Error::NotASubsystem {
            inner: c1.to_string(),
            outer: section.subsystem.to_string(),
        });
    }
    let targets: Vec<&str> = c1.targets().into_iter().collect();
    let sources: Vec<&str> = c1.sources().into_iter().collect();
    Ok(Section {
        subsystem: c1.clone(),
        map: marginal_map(&section.map, &targets, &sources)?,
    })
}

/// What to do when a glued map fails to be column stochastic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GlueMode {
    /// Report [`Error::NotStochastic`].
    #[default]
    Strict,
    /// Rescale each column to sum to 1.
    Renormalize,
}

/// Glues two compatible sections into a section over the union subsystem
/// with `p(x,y,z|u,v,w) = a(x,y|u,w)·b(x,z|v,w) / p(x|w)`, where `x`/`w`
/// are the shared source/target coordinates and `p(x|w)` is `b` with its
/// private sources summed out and private targets averaged. `0/0` is 0.
pub fn glue_sections(a: &Section, b: &Section, mode: GlueMode) -> Result<Section> {
    let common = a.subsystem.intersection(&b.subsystem);
    let ra = restrict(a, &common)?;
    let rb = restrict(b, &common)?;
    if ra.map != rb.map {
        return Err(Error::Incompatible(format!(
            "restrictions to {} differ",
            common
        )));
    }
    let (ta, sa) = (a.map.domain(), a.map.codomain());
    let (tb, sb) = (b.map.domain(), b.map.codomain());
    let shared_t: Vec<&str> = ta.ids().filter(|id| tb.contains(id)).collect();
    let shared_s: Vec<&str> = sa.ids().filter(|id| sb.contains(id)).collect();
    let pa = marginal_map(&a.map, &shared_t, &shared_s)?;
    let pb = marginal_map(&b.map, &shared_t, &shared_s)?;
    if pa != pb {
        return Err(Error::Incompatible(
            "marginals on shared coordinates differ".into(),
        ));
    }
    let targets = ProductSpace::canonical(
        ta.factors()
            .iter()
            .chain(tb.factors().iter().filter(|f| !ta.contains(&f.id)))
            .map(|f| (f.id.clone(), f.alphabet.clone())),
    )?;
    let sources = ProductSpace::canonical(
        sa.factors()
            .iter()
            .chain(sb.factors().iter().filter(|f| !sa.contains(&f.id)))
            .map(|f| (f.id.clone(), f.alphabet.clone())),
    )?;
    let t_to_a = targets.restriction_map(ta)?;
    let t_to_b = targets.restriction_map(tb)?;
    let t_to_w = targets.restriction_map(pb.domain())?;
    let s_to_a = sources.restriction_map(sa)?;
    let s_to_b = sources.restriction_map(sb)?;
    let s_to_x = sources.restriction_map(pb.codomain())?;
    let rows = sources.dim();
    let mut entries = Vec::with_capacity(targets.dim() * rows);
    for t in 0..targets.dim() {
        let mut column: Vec<Rational> = (0..rows)
            .map(|s| {
                let p = pb.entry(s_to_x[s], t_to_w[t]);
                if p.is_zero() {
                    return Rational::zero();
                }
                let va = a.map.entry(s_to_a[s], t_to_a[t]);
                let vb = b.map.entry(s_to_b[s], t_to_b[t]);
                if va.is_zero() || vb.is_zero() {
                    Rational::zero()
                } else {
                    va * vb / p
                }
            })
            .collect();
        let sum: Rational = column.iter().sum();
        if !sum.is_one() {
            match mode {
                GlueMode::Renormalize if !sum.is_zero() => {
                    column.iter_mut().for_each(|v| *v /= &sum);
                }
                _ => {
                    return Err(Error::NotStochastic {
                        column: t,
                        sum: sum.to_string(),
                    })
                }
            }
        }
        entries.extend(column);
    }
    Ok(Section {
        subsystem: a.subsystem.union(&b.subsystem),
        map: StochasticMatrix::from_columns_unchecked(targets, sources, entries),
    })
}

/// The quale: one section per subsystem, in enumeration order.
#[derive(Clone, Debug)]
pub struct Quale {
    sections: Vec<Section>,
    index: HashMap<Subsystem, usize>,
}

impl Quale {
    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn get(&self, c: &Subsystem) -> Option<&Section> {
        self.index.get(c).map(|&i| &self.sections[i])
    }
}

/// The section of `c` in the quale: the dual of its glued mechanism.
pub fn quale_section(spec: &SystemSpec, c: &Subsystem) -> Result<Section> {
    section_cached(spec, c, &SubmechanismCache::default())
}

fn section_cached(spec: &SystemSpec, c: &Subsystem, cache: &SubmechanismCache) -> Result<Section> {
    if c.is_null() {
        return Ok(Section::scalar(c.clone()));
    }
    let m = glue_cached(spec, c, cache)?;
    let map = dual(&m).map_err(|e| match e {
        Error::NotSurjective { row, .. } => Error::NotSurjective {
            row,
            subsystem: Some(c.to_string()),
        },
        other => other,
    })?;
    Ok(Section::new(c.clone(), map))
}

/// Builds the section of every subsystem. Sections are computed in
/// parallel; the result order matches [`enumerate_subsystems`].
pub fn build_quale(spec: &SystemSpec, max_pairs: usize) -> Result<Quale> {
    spec.check()?;
    let subsystems: Vec<Subsystem> = enumerate_subsystems(spec, max_pairs)?.collect();
    let cache = SubmechanismCache::default();
    let sections = subsystems
        .par_iter()
        .map(|c| section_cached(spec, c, &cache))
        .collect::<Result<Vec<_>>>()?;
    let index = subsystems.into_iter().enumerate().map(|(i, c)| (c, i)).collect();
    Ok(Quale { sections, index })
}

/// Two distinct sections over the same two-target subsystem whose
/// restrictions to both single-target subsystems agree: a perfectly
/// correlated pair of source bits and an independent uniform pair.
pub fn descent_counterexample() -> (Section, Section) {
    let b = Alphabet::binary();
    let host = SystemSpec::new()
        .with_occasion("vA", b.clone())
        .with_occasion("vB", b.clone())
        .with_occasion("vP", b.clone())
        .with_occasion("vQ", b.clone())
        .with_edge("vA", "vP")
        .with_edge("vB", "vQ");
    let c = Subsystem::top(&host);
    let targets = c.target_space(&host).expect("known occasions");
    let sources = c.source_space(&host).expect("known occasions");
    let half = rational::ratio(1, 2);
    let correlated = vec![half.clone(), Rational::zero(), Rational::zero(), half];
    let independent = Distribution::uniform(&sources).weights().to_vec();
    let build = |col: Vec<Rational>| {
        StochasticMatrix::new(targets.clone(), sources.clone(), vec![col; targets.dim()])
            .expect("stochastic")
    };
    (
        Section::new(c.clone(), build(correlated)),
        Section::new(c, build(independent)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::table::{lift_function, FunctionTable};

    pub(crate) fn gate(outputs: Vec<usize>) -> SystemSpec {
        let b = Alphabet::binary();
        let g = FunctionTable::new(
            ProductSpace::canonical([("vX", b.clone()), ("vY", b.clone())]).unwrap(),
            ProductSpace::single("vZ", b.clone()),
            outputs,
        )
        .unwrap();
        SystemSpec::new()
            .with_occasion("vX", b.clone())
            .with_occasion("vY", b.clone())
            .with_occasion("vZ", b.clone())
            .with_edge("vX", "vZ")
            .with_edge("vY", "vZ")
            .with_mechanism("vZ", lift_function(&g))
            .with_source("vX", Distribution::uniform(&ProductSpace::single("vX", b.clone())))
            .with_source("vY", Distribution::uniform(&ProductSpace::single("vY", b)))
    }

    fn xor() -> SystemSpec {
        gate(vec![0, 1, 1, 0])
    }

    fn and() -> SystemSpec {
        gate(vec![0, 0, 0, 1])
    }

    #[test]
    fn enumerates_powerset_in_binary_order() {
        let subs: Vec<String> = enumerate_subsystems(&xor(), 16)
            .unwrap()
            .map(|c| c.label())
            .collect();
        assert_eq!(subs, vec!["null", "vX-vZ", "vY-vZ", "vX-vZ,vY-vZ"]);
    }

    #[test]
    fn enumeration_budget_guard() {
        let mut sys = SystemSpec::new();
        for i in 0..21 {
            sys.add_edge(format!("s{i}"), "t");
        }
        assert!(matches!(
            enumerate_subsystems(&sys, 20),
            Err(Error::BudgetExceeded { count: 21, limit: 20, .. })
        ));
        let one = SystemSpec::new().with_edge("a", "b");
        assert_eq!(enumerate_subsystems(&one, 20).unwrap().count(), 2);
    }

    #[test]
    fn submechanism_of_top_is_the_mechanism() {
        let sys = and();
        let top = Subsystem::top(&sys);
        assert_eq!(
            &occasion_submechanism(&sys, &top, "vZ").unwrap(),
            sys.mechanism("vZ").unwrap()
        );
    }

    #[test]
    fn and_gate_partial_submechanism() {
        let sys = and();
        let c = Subsystem::from_pairs(&sys, [("vX", "vZ")]);
        let m = occasion_submechanism(&sys, &c, "vZ").unwrap();
        assert_eq!(m.column(0), &[int(1), int(0)]);
        assert_eq!(m.column(1), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(glue_mechanism(&sys, &c).unwrap(), m);
        assert!(matches!(
            occasion_submechanism(&sys, &c, "vX"),
            Err(Error::NotATarget(_))
        ));
    }

    #[test]
    fn xor_partial_submechanism_is_uniform() {
        let sys = xor();
        let c = Subsystem::from_pairs(&sys, [("vX", "vZ")]);
        let m = occasion_submechanism(&sys, &c, "vZ").unwrap();
        for col in m.columns() {
            assert_eq!(col, &[ratio(1, 2), ratio(1, 2)]);
        }
    }

    #[test]
    fn top_glue_recovers_whole_mechanism() {
        let sys = xor();
        assert_eq!(
            &glue_mechanism(&sys, &Subsystem::top(&sys)).unwrap(),
            sys.mechanism("vZ").unwrap()
        );
        assert_eq!(
            glue_mechanism(&sys, &Subsystem::bottom()),
            Err(Error::EmptySubsystem)
        );
    }

    fn shared_source_system() -> SystemSpec {
        // Two sources a, b; targets p = a, q = a XOR b.
        let bit = Alphabet::binary();
        let ab = ProductSpace::canonical([("a", bit.clone()), ("b", bit.clone())]).unwrap();
        let p = FunctionTable::new(ab.clone(), ProductSpace::single("p", bit.clone()), vec![0, 0, 1, 1]).unwrap();
        let q = FunctionTable::new(ab, ProductSpace::single("q", bit.clone()), vec![0, 1, 1, 0]).unwrap();
        SystemSpec::new()
            .with_occasion("a", bit.clone())
            .with_occasion("b", bit.clone())
            .with_occasion("p", bit.clone())
            .with_occasion("q", bit.clone())
            .with_edge("a", "p")
            .with_edge("b", "p")
            .with_edge("a", "q")
            .with_edge("b", "q")
            .with_mechanism("p", lift_function(&p))
            .with_mechanism("q", lift_function(&q))
            .with_source("a", Distribution::uniform(&ProductSpace::single("a", bit.clone())))
            .with_source("b", Distribution::uniform(&ProductSpace::single("b", bit)))
    }

    #[test]
    fn shared_sources_are_duplicated_before_tensoring() {
        let sys = shared_source_system();
        let m = glue_mechanism(&sys, &Subsystem::top(&sys)).unwrap();
        // Direct joint table: (a,b) -> (a, a XOR b)
        let expected = [(0, 0), (0, 1), (1, 1), (1, 0)];
        for (s, (p, q)) in expected.iter().enumerate() {
            let row = m.codomain().encode(&[*p, *q]);
            assert_eq!(m.column_distribution(s), Distribution::dirac(m.codomain(), row));
        }
        for c in enumerate_subsystems(&sys, 16).unwrap().skip(1) {
            assert_eq!(
                glue_mechanism(&sys, &c).unwrap(),
                glue_mechanism_via_diagonal(&sys, &c).unwrap(),
                "{c}"
            );
        }
    }

    #[test]
    fn ineffective_pairs_do_not_change_the_mechanism() {
        let sys = and();
        let c = Subsystem::from_pairs(&sys, [("vX", "vZ")]);
        let padded = c.clone().with_pair(&sys, "vY", "vX").with_pair(&sys, "vZ", "vZ");
        assert_eq!(padded.len(), 3);
        assert_eq!(glue_mechanism(&sys, &c).unwrap(), glue_mechanism(&sys, &padded).unwrap());
        assert_eq!(
            quale_section(&sys, &c).unwrap().map(),
            quale_section(&sys, &padded).unwrap().map()
        );
    }

    #[test]
    fn xor_quale_sections() {
        let sys = xor();
        let q = build_quale(&sys, 16).unwrap();
        assert_eq!(q.len(), 4);
        let top = q.get(&Subsystem::top(&sys)).unwrap();
        assert_eq!(top.map().column(0), &[ratio(1, 2), int(0), int(0), ratio(1, 2)]);
        assert_eq!(top.map().column(1), &[int(0), ratio(1, 2), ratio(1, 2), int(0)]);
        for pair in [("vX", "vZ"), ("vY", "vZ")] {
            let s = q.get(&Subsystem::from_pairs(&sys, [pair])).unwrap();
            for col in s.map().columns() {
                assert_eq!(col, &[ratio(1, 2), ratio(1, 2)]);
            }
        }
        assert_eq!(q.get(&Subsystem::bottom()).unwrap().map().rows(), 1);
    }

    #[test]
    fn single_edge_section_is_normalized_preimage() {
        let bit = Alphabet::binary();
        let x = ProductSpace::single("x", Alphabet::range(3));
        let f = FunctionTable::new(x.clone(), ProductSpace::single("y", bit.clone()), vec![0, 0, 1]).unwrap();
        let sys = SystemSpec::new()
            .with_occasion("x", Alphabet::range(3))
            .with_occasion("y", bit)
            .with_edge("x", "y")
            .with_mechanism("y", lift_function(&f))
            .with_source("x", Distribution::uniform(&x));
        let s = quale_section(&sys, &Subsystem::top(&sys)).unwrap();
        assert_eq!(s.map(), &dual(&lift_function(&f)).unwrap());
        assert_eq!(s.map().column(0), &[ratio(1, 2), ratio(1, 2), int(0)]);
    }

    #[test]
    fn nonsurjective_quale_names_subsystem() {
        let sys = gate(vec![0, 0, 0, 0]);
        match build_quale(&sys, 16) {
            Err(Error::NotSurjective { subsystem: Some(s), .. }) => assert!(s.contains("vX-vZ")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restriction_laws() {
        let sys = shared_source_system();
        let q = build_quale(&sys, 16).unwrap();
        let top = q.get(&Subsystem::top(&sys)).unwrap();
        assert_eq!(&restrict(top, &Subsystem::top(&sys)).unwrap(), top);
        let bottom = restrict(top, &Subsystem::bottom()).unwrap();
        assert_eq!(bottom.map(), &StochasticMatrix::identity(&ProductSpace::scalar()));
        let c2 = Subsystem::from_pairs(&sys, [("a", "p"), ("b", "p"), ("a", "q")]);
        let c1 = Subsystem::from_pairs(&sys, [("a", "q")]);
        let chained = restrict(&restrict(top, &c2).unwrap(), &c1).unwrap();
        assert_eq!(chained, restrict(top, &c1).unwrap());
        assert!(matches!(
            restrict(&restrict(top, &c1).unwrap(), &c2),
            Err(Error::NotASubsystem { .. })
        ));
    }

    #[test]
    fn xor_top_restricts_to_uniform() {
        let sys = xor();
        let q = build_quale(&sys, 16).unwrap();
        let c = Subsystem::from_pairs(&sys, [("vX", "vZ")]);
        let r = restrict(q.get(&Subsystem::top(&sys)).unwrap(), &c).unwrap();
        for col in r.map().columns() {
            assert_eq!(col, &[ratio(1, 2), ratio(1, 2)]);
        }
        assert_eq!(r.map(), q.get(&c).unwrap().map());
    }

    #[test]
    fn gluing_disjoint_sections_is_a_product() {
        let sys = shared_source_system();
        let q = build_quale(&sys, 16).unwrap();
        // Different targets and different sources.
        let ci = Subsystem::from_pairs(&sys, [("a", "p")]);
        let cj = Subsystem::from_pairs(&sys, [("b", "q")]);
        let (a, b) = (q.get(&ci).unwrap(), q.get(&cj).unwrap());
        let g = glue_sections(a, b, GlueMode::Strict).unwrap();
        assert_eq!(g.map(), &tensor(a.map(), b.map()).unwrap());
        assert_eq!(g.subsystem(), &ci.union(&cj));
    }

    #[test]
    fn gluing_a_section_with_itself_is_idempotent() {
        let sys = shared_source_system();
        let q = build_quale(&sys, 16).unwrap();
        for s in q.sections() {
            assert_eq!(&glue_sections(s, s, GlueMode::Strict).unwrap(), s);
        }
    }

    #[test]
    fn gluing_recovers_a_known_joint() {
        // Sections over targets (t1) and (t2) sharing source x; the joint
        // p(x,y,z|u,v) = p(x) p(y|x,u) p(z|x,v) is conditionally independent
        // given x, so gluing its two marginals reproduces it.
        let bit = Alphabet::binary();
        let host = SystemSpec::new()
            .with_edge("x", "u")
            .with_edge("y", "u")
            .with_edge("x", "v")
            .with_edge("z", "v");
        let host = ["u", "v", "x", "y", "z"]
            .iter()
            .fold(host, |h, id| h.with_occasion(*id, bit.clone()));
        let c = Subsystem::top(&host);
        let targets = c.target_space(&host).unwrap();
        let sources = c.source_space(&host).unwrap();
        let px = [ratio(1, 3), ratio(2, 3)];
        let py = |x: usize, u: usize| if (x + u) % 2 == 0 { ratio(1, 4) } else { ratio(3, 5) };
        let pz = |x: usize, v: usize| if x == v { ratio(1, 2) } else { ratio(1, 6) };
        let bern = |p: Rational, bit: usize| if bit == 1 { p } else { int(1) - p };
        let columns: Vec<Vec<Rational>> = (0..targets.dim())
            .map(|t| {
                let tv = targets.decode(t);
                let (u, v) = (tv[0], tv[1]);
                (0..sources.dim())
                    .map(|s| {
                        let sv = sources.decode(s);
                        let (x, y, z) = (sv[0], sv[1], sv[2]);
                        px[x].clone() * bern(py(x, u), y) * bern(pz(x, v), z)
                    })
                    .collect()
            })
            .collect();
        let joint = Section::new(c.clone(), StochasticMatrix::new(targets, sources, columns).unwrap());
        let ci = c.filter(|_, t| t == "u");
        let cj = c.filter(|_, t| t == "v");
        let a = restrict(&joint, &ci).unwrap();
        let b = restrict(&joint, &cj).unwrap();
        let g = glue_sections(&a, &b, GlueMode::Strict).unwrap();
        assert_eq!(g, joint);
        assert_eq!(restrict(&g, &ci).unwrap(), a);
        assert_eq!(restrict(&g, &cj).unwrap(), b);
    }

    #[test]
    fn incompatible_sections_are_rejected() {
        let (correlated, _) = descent_counterexample();
        let c = correlated.subsystem().clone();
        let ci = c.filter(|_, t| t == "vP");
        let a = restrict(&correlated, &ci).unwrap();
        let skewed = Section::new(
            ci.clone(),
            StochasticMatrix::new(
                a.map().domain().clone(),
                a.map().codomain().clone(),
                vec![vec![ratio(1, 3), ratio(2, 3)]; 2],
            )
            .unwrap(),
        );
        assert!(matches!(
            glue_sections(&a, &skewed, GlueMode::Strict),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn descent_is_not_unique() {
        let (correlated, independent) = descent_counterexample();
        assert_ne!(correlated, independent);
        assert_eq!(correlated.map().entry(0, 0), &ratio(1, 2));
        assert_eq!(independent.map().entry(0, 0), &ratio(1, 4));
        let c = correlated.subsystem().clone();
        for keep in ["vP", "vQ"] {
            let ci = c.filter(|_, t| t == keep);
            let a = restrict(&correlated, &ci).unwrap();
            let b = restrict(&independent, &ci).unwrap();
            assert_eq!(a, b);
            for col in a.map().columns() {
                assert_eq!(col, &[ratio(1, 2), ratio(1, 2)]);
            }
        }
        // Both glue back from the shared single-target restrictions; the
        // glued section is the independent one.
        let ci = c.filter(|_, t| t == "vP");
        let cj = c.filter(|_, t| t == "vQ");
        let g = glue_sections(
            &restrict(&correlated, &ci).unwrap(),
            &restrict(&correlated, &cj).unwrap(),
            GlueMode::Strict,
        )
        .unwrap();
        assert_eq!(g, independent);
    }

    #[test]
    fn non_stochastic_glue_is_reported() {
        // Arbitrary joint over (t1,t2) -> (x) with x's law depending on both
        // targets; its two marginals are compatible but do not glue to a
        // stochastic map.
        let bit = Alphabet::binary();
        let host = SystemSpec::new()
            .with_occasion("x", bit.clone())
            .with_occasion("u", bit.clone())
            .with_occasion("v", bit.clone())
            .with_edge("x", "u")
            .with_edge("x", "v");
        let c = Subsystem::top(&host);
        let targets = c.target_space(&host).unwrap();
        let sources = c.source_space(&host).unwrap();
        let half = vec![ratio(1, 2), ratio(1, 2)];
        let cols = vec![vec![int(1), int(0)], half.clone(), half, vec![int(0), int(1)]];
        let joint = Section::new(c.clone(), StochasticMatrix::new(targets, sources, cols).unwrap());
        let a = restrict(&joint, &c.filter(|_, t| t == "u")).unwrap();
        let b = restrict(&joint, &c.filter(|_, t| t == "v")).unwrap();
        let strict = glue_sections(&a, &b, GlueMode::Strict);
        assert!(matches!(strict, Err(Error::NotStochastic { .. })), "{strict:?}");
        let soft = glue_sections(&a, &b, GlueMode::Renormalize).unwrap();
        for col in soft.map().columns() {
            assert_eq!(col.iter().sum::<Rational>(), int(1));
        }
    }
}
