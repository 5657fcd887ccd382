//! Cellular automata over a finite time window, unrolled into occasion
//! graphs. Occasion ids follow `cell@t`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Alphabet, Factor, ProductSpace};
use crate::stoch::{Distribution, StochasticMatrix};
use crate::system::SystemSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub cell: String,
    /// Steps into the past; 1 for an ordinary automaton.
    pub lag: usize,
}

impl Neighbor {
    pub fn new(cell: impl Into<String>) -> Self {
        Neighbor {
            cell: cell.into(),
            lag: 1,
        }
    }

    pub fn lagged(cell: impl Into<String>, lag: usize) -> Self {
        Neighbor {
            cell: cell.into(),
            lag,
        }
    }
}

/// A cell's update rule, read positionally over its neighborhood (first
/// neighbor most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Output symbol index for every joint neighborhood input.
    Table(Vec<usize>),
    /// Stochastic rule; factor ids are ignored, only shapes must match.
    Kernel(StochasticMatrix),
    /// Game of life; the cell must be in its own neighborhood at lag 1.
    Life,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Initial {
    Symbol(String),
    Distribution(Vec<Rational>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AutomatonSpec {
    pub cells: Vec<String>,
    /// Cells without an entry are binary.
    pub alphabets: BTreeMap<String, Alphabet>,
    pub neighborhoods: BTreeMap<String, Vec<Neighbor>>,
    pub rules: BTreeMap<String, Rule>,
    /// Per-time overrides: `schedule[cell][t]` replaces the rule at `t`.
    pub schedule: BTreeMap<String, BTreeMap<i64, Rule>>,
    pub start: i64,
    pub end: i64,
    pub initial: BTreeMap<String, Initial>,
}

pub fn occasion_id(cell: &str, t: i64) -> String {
    format!("{cell}@{t}")
}

impl AutomatonSpec {
    pub fn alphabet(&self, cell: &str) -> Alphabet {
        self.alphabets
            .get(cell)
            .cloned()
            .unwrap_or_else(Alphabet::binary)
    }

    fn max_lag(&self, cell: &str) -> usize {
        self.neighborhoods
            .get(cell)
            .and_then(|n| n.iter().map(|x| x.lag).max())
            .unwrap_or(1)
    }

    fn rule_at(&self, cell: &str, t: i64) -> Option<&Rule> {
        self.schedule
            .get(cell)
            .and_then(|s| s.get(&t))
            .or_else(|| self.rules.get(cell))
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidAutomaton(m));
        let cells: BTreeSet<&str> = self.cells.iter().map(String::as_str).collect();
        if cells.len() != self.cells.len() {
            return bad("duplicate cell ids".into());
        }
        for (cell, hood) in &self.neighborhoods {
            if !cells.contains(cell.as_str()) {
                return bad(format!("neighborhood for unknown cell `{cell}`"));
            }
            let mut seen = BTreeSet::new();
            for n in hood {
                if !cells.contains(n.cell.as_str()) {
                    return bad(format!("`{cell}` lists unknown neighbor `{}`", n.cell));
                }
                if n.lag == 0 {
                    return bad(format!("`{cell}` has a neighbor with lag 0"));
                }
                if !seen.insert((n.cell.as_str(), n.lag)) {
                    return bad(format!("`{cell}` lists `{}` twice at lag {}", n.cell, n.lag));
                }
            }
        }
        for cell in &self.cells {
            if !self.neighborhoods.contains_key(cell) {
                return bad(format!("cell `{cell}` has no neighborhood"));
            }
            if !self.rules.contains_key(cell) {
                return bad(format!("cell `{cell}` has no rule"));
            }
            if !self.initial.contains_key(cell) {
                return bad(format!("cell `{cell}` has no initial condition"));
            }
        }
        Ok(())
    }

    /// Unrolls into one occasion per (cell, t) in `[start, end]`.
    ///
    /// Occasions whose lagged inputs would fall before `start` carry the
    /// cell's initial condition; all others carry the rule in force at `t`.
    pub fn unroll(&self) -> Result<SystemSpec> {
        if self.start > self.end {
            return Err(Error::EmptyWindow);
        }
        self.check()?;
        let mut sys = SystemSpec::new();
        for t in self.start..=self.end {
            for cell in &self.cells {
                sys.add_occasion(occasion_id(cell, t), self.alphabet(cell));
            }
        }
        for cell in &self.cells {
            let alphabet = self.alphabet(cell);
            let first_ruled = self.start + self.max_lag(cell) as i64;
            for t in self.start..=self.end {
                let id = occasion_id(cell, t);
                if t < first_ruled {
                    let space = ProductSpace::single(id.clone(), alphabet.clone());
                    sys.set_source(id, initial_distribution(&self.initial[cell], &space)?);
                    continue;
                }
                let hood = &self.neighborhoods[cell];
                let factors: Vec<Factor> = hood
                    .iter()
                    .map(|n| Factor::new(occasion_id(&n.cell, t - n.lag as i64), self.alphabet(&n.cell)))
                    .collect();
                for f in &factors {
                    sys.add_edge(f.id.clone(), id.clone());
                }
                let domain = ProductSpace::new(factors)?;
                let codomain = ProductSpace::single(id.clone(), alphabet.clone());
                let rule = self.rule_at(cell, t).expect("checked");
                let m = self.rule_matrix(cell, rule, domain.clone(), codomain)?;
                sys.set_mechanism(id, m.reorder_domain(&domain.sorted())?);
            }
        }
        Ok(sys)
    }

    fn rule_matrix(
        &self,
        cell: &str,
        rule: &Rule,
        domain: ProductSpace,
        codomain: ProductSpace,
    ) -> Result<StochasticMatrix> {
        let arity_error = |found: String| {
            Error::InvalidAutomaton(format!(
                "rule for `{cell}` does not match its neighborhood {domain:?}: {found}"
            ))
        };
        match rule {
            Rule::Table(outputs) => {
                if outputs.len() != domain.dim() {
                    return Err(arity_error(format!("table has {} entries", outputs.len())));
                }
                if outputs.iter().any(|&o| o >= codomain.dim()) {
                    return Err(arity_error("output symbol out of range".into()));
                }
                Ok(StochasticMatrix::deterministic(domain, codomain, |i| outputs[i]))
            }
            Rule::Kernel(m) => {
                if !m.domain().same_shape(&domain) || m.rows() != codomain.dim() {
                    return Err(arity_error(format!("kernel is {:?} -> {:?}", m.domain(), m.codomain())));
                }
                m.with_domain(domain)?.with_codomain(codomain)
            }
            Rule::Life => {
                let hood = &self.neighborhoods[cell];
                let me = hood
                    .iter()
                    .position(|n| n.cell == cell && n.lag == 1)
                    .ok_or_else(|| arity_error("life rule needs the cell in its own neighborhood".into()))?;
                if domain.factors().iter().any(|f| f.alphabet.len() != 2) || codomain.dim() != 2 {
                    return Err(arity_error("life rule needs binary cells".into()));
                }
                let table = life_rule_at(hood.len(), me);
                Ok(StochasticMatrix::deterministic(domain, codomain, |i| table[i] as usize))
            }
        }
    }
}

fn initial_distribution(init: &Initial, space: &ProductSpace) -> Result<Distribution> {
    match init {
        Initial::Symbol(s) => Ok(Distribution::dirac(space, space.index_of_symbols(&[s])?)),
        Initial::Distribution(w) => Distribution::new(space.clone(), w.clone()),
    }
}

/// Game-of-life table over a binary neighborhood whose first entry is the
/// cell itself.
pub fn life_rule(neighborhood_size: usize) -> Vec<u8> {
    life_rule_at(neighborhood_size, 0)
}

/// Game-of-life table with the cell at `self_position`: output 1 iff exactly
/// three other neighbors were 1, or the cell and exactly two others were 1.
pub fn life_rule_at(neighborhood_size: usize, self_position: usize) -> Vec<u8> {
    assert!(self_position < neighborhood_size);
    (0..1usize << neighborhood_size)
        .map(|joint| {
            let bit = |pos: usize| (joint >> (neighborhood_size - 1 - pos)) & 1;
            let me = bit(self_position);
            let others = (0..neighborhood_size)
                .filter(|&p| p != self_position)
                .map(bit)
                .sum::<usize>();
            u8::from(others == 3 || (me == 1 && others == 2))
        })
        .collect()
}

/// Default snapping denominator for transcendental rule entries.
pub fn default_precision() -> BigInt {
    BigInt::from(10u64.pow(12))
}

/// Logistic firing rule `p(1|n) = e^{h/T} / (e^{h/T} + 1)` with
/// `h = Σ_j weights[j]·n_j`, snapped to the default precision.
pub fn hopfield_rule(weights: &[Rational], temperature: &Rational) -> Result<StochasticMatrix> {
    hopfield_rule_with_precision(weights, temperature, &default_precision())
}

pub fn hopfield_rule_with_precision(
    weights: &[Rational],
    temperature: &Rational,
    denominator: &BigInt,
) -> Result<StochasticMatrix> {
    if !temperature.is_positive() {
        return Err(Error::NonpositiveTemperature);
    }
    let domain = ProductSpace::new(
        (0..weights.len())
            .map(|j| Factor::new(format!("n{j}"), Alphabet::binary()))
            .collect(),
    )?;
    let codomain = ProductSpace::single("out", Alphabet::binary());
    let t = rational::to_f64(temperature);
    let columns = (0..domain.dim())
        .map(|i| {
            let pattern = domain.decode(i);
            let field: Rational = weights
                .iter()
                .zip(&pattern)
                .filter(|(_, &n)| n == 1)
                .map(|(w, _)| w.clone())
                .sum();
            let x = rational::to_f64(&field) / t;
            // Numerically stable logistic.
            let p1 = if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            };
            let on = rational::snap(p1, denominator);
            vec![Rational::one() - &on, on]
        })
        .collect();
    StochasticMatrix::new(domain, codomain, columns)
}

/// Hebbian embedding `α_jk = Σ_μ (2ξ_j^μ − 1)(2ξ_k^μ − 1)`.
pub fn hopfield_weights(cells: usize, attractors: &[Vec<u8>]) -> Result<Vec<Vec<Rational>>> {
    let mut alpha = vec![vec![Rational::zero(); cells]; cells];
    for xi in attractors {
        if xi.len() != cells {
            return Err(Error::LengthMismatch {
                expected: cells,
                found: xi.len(),
            });
        }
        if xi.iter().any(|&b| b > 1) {
            return Err(Error::InvalidAutomaton("attractor entries must be 0 or 1".into()));
        }
        for j in 0..cells {
            for k in 0..cells {
                let s = (2 * xi[j] as i64 - 1) * (2 * xi[k] as i64 - 1);
                alpha[j][k] += rational::int(s);
            }
        }
    }
    Ok(alpha)
}
