//! Column-stochastic matrices over labeled product spaces, with exact
//! rational entries.
//!
//! Entry `(row y, column x)` of a [`StochasticMatrix`] is `p(y|x)`. Every
//! operation here is pure and returns a fresh value.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Factor, ProductSpace};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StochasticMatrix {
    domain: ProductSpace,
    codomain: ProductSpace,
    /// Column-major: `entries[col * rows + row]`.
    entries: Vec<Rational>,
}

/// A probability vector; equivalently a stochastic map out of the scalar
/// space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    space: ProductSpace,
    weights: Vec<Rational>,
}

impl StochasticMatrix {
    /// Validating constructor from one vector per domain basis element.
    pub fn new(
        domain: ProductSpace,
        codomain: ProductSpace,
        columns: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let rows = codomain.dim();
        if columns.len() != domain.dim() || columns.iter().any(|c| c.len() != rows) {
            return Err(Error::ShapeMismatch {
                expected: format!("{} columns of length {}", domain.dim(), rows),
                found: format!(
                    "{} columns of lengths {:?}",
                    columns.len(),
                    columns.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        for (j, col) in columns.iter().enumerate() {
            if let Some(i) = col.iter().position(|v| v.is_negative()) {
                return Err(Error::NonStochastic {
                    column: j,
                    reason: format!("negative entry {} in row {i}", col[i]),
                });
            }
            let sum: Rational = col.iter().sum();
            if !sum.is_one() {
                return Err(Error::NonStochastic {
                    column: j,
                    reason: format!("column sums to {sum}"),
                });
            }
        }
        Ok(StochasticMatrix {
            domain,
            codomain,
            entries: columns.into_iter().flatten().collect(),
        })
    }

    /// Builds from already-stochastic columns; callers guarantee the invariant.
    pub(crate) fn from_columns_unchecked(
        domain: ProductSpace,
        codomain: ProductSpace,
        entries: Vec<Rational>,
    ) -> Self {
        debug_assert_eq!(entries.len(), domain.dim() * codomain.dim());
        let m = StochasticMatrix {
            domain,
            codomain,
            entries,
        };
        debug_assert!(m.columns().all(|c| c.iter().sum::<Rational>().is_one()));
        m
    }

    /// Deterministic map sending basis element `x` to basis element `f(x)`.
    pub fn deterministic(
        domain: ProductSpace,
        codomain: ProductSpace,
        f: impl Fn(usize) -> usize,
    ) -> Self {
        let rows = codomain.dim();
        let mut entries = vec![Rational::zero(); domain.dim() * rows];
        for x in 0..domain.dim() {
            let y = f(x);
            assert!(y < rows, "image index out of range");
            entries[x * rows + y] = Rational::one();
        }
        StochasticMatrix {
            domain,
            codomain,
            entries,
        }
    }

    pub fn identity(space: &ProductSpace) -> Self {
        Self::deterministic(space.clone(), space.clone(), |x| x)
    }

    /// The map to the scalar space.
    pub fn terminal(space: &ProductSpace) -> Self {
        Self::deterministic(space.clone(), ProductSpace::scalar(), |_| 0)
    }

    pub fn domain(&self) -> &ProductSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &ProductSpace {
        &self.codomain
    }

    pub fn rows(&self) -> usize {
        self.codomain.dim()
    }

    pub fn cols(&self) -> usize {
        self.domain.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.entries[col * self.rows() + row]
    }

    pub fn column(&self, col: usize) -> &[Rational] {
        let r = self.rows();
        &self.entries[col * r..(col + 1) * r]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.rows().max(1))
    }

    pub fn column_distribution(&self, col: usize) -> Distribution {
        Distribution {
            space: self.codomain.clone(),
            weights: self.column(col).to_vec(),
        }
    }

    pub fn row_sum(&self, row: usize) -> Rational {
        (0..self.cols()).map(|c| self.entry(row, c)).sum()
    }

    /// Whether every entry is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero() || v.is_one())
    }

    /// Indices of rows that are entirely zero.
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.rows())
            .filter(|&r| (0..self.cols()).all(|c| self.entry(r, c).is_zero()))
            .collect()
    }

    /// Bayes posterior over the domain for codomain element `row`, under a
    /// uniform prior: the `row`-th column of the dual.
    pub fn posterior(&self, row: usize) -> Result<Distribution> {
        let total = self.row_sum(row);
        if total.is_zero() {
            return Err(Error::NotSurjective {
                row: self.codomain.label(row),
                subsystem: None,
            });
        }
        Ok(Distribution {
            space: self.domain.clone(),
            weights: (0..self.cols())
                .map(|c| self.entry(row, c) / &total)
                .collect(),
        })
    }

    /// Same entries over a domain with identical shape but different ids.
    pub fn with_domain(&self, domain: ProductSpace) -> Result<Self> {
        if !domain.same_shape(&self.domain) {
            return Err(mismatch(&domain, &self.domain));
        }
        Ok(StochasticMatrix {
            domain,
            ..self.clone()
        })
    }

    /// Same entries over a codomain with identical shape but different ids.
    pub fn with_codomain(&self, codomain: ProductSpace) -> Result<Self> {
        if !codomain.same_shape(&self.codomain) {
            return Err(mismatch(&codomain, &self.codomain));
        }
        Ok(StochasticMatrix {
            codomain,
            ..self.clone()
        })
    }

    /// Permutes the domain factors into the order of `target`, which must
    /// hold the same factors.
    pub fn reorder_domain(&self, target: &ProductSpace) -> Result<Self> {
        if !target.same_factors(&self.domain) {
            return Err(mismatch(target, &self.domain));
        }
        let map = target.restriction_map(&self.domain)?;
        let rows = self.rows();
        let mut entries = Vec::with_capacity(self.entries.len());
        for &old in &map {
            entries.extend_from_slice(&self.entries[old * rows..(old + 1) * rows]);
        }
        Ok(StochasticMatrix {
            domain: target.clone(),
            codomain: self.codomain.clone(),
            entries,
        })
    }

    /// Permutes the codomain factors into the order of `target`.
    pub fn reorder_codomain(&self, target: &ProductSpace) -> Result<Self> {
        if !target.same_factors(&self.codomain) {
            return Err(mismatch(target, &self.codomain));
        }
        let map = target.restriction_map(&self.codomain)?;
        let rows = self.rows();
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols() {
            for &old in &map {
                entries.push(self.entries[c * rows + old].clone());
            }
        }
        Ok(StochasticMatrix {
            domain: self.domain.clone(),
            codomain: target.clone(),
            entries,
        })
    }

    /// Applies the map to a distribution on its domain.
    pub fn apply(&self, d: &Distribution) -> Result<Distribution> {
        if d.space != self.domain {
            return Err(mismatch(&d.space, &self.domain));
        }
        let mut weights = vec![Rational::zero(); self.rows()];
        for (c, w) in d.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (acc, v) in weights.iter_mut().zip(self.column(c)) {
                if !v.is_zero() {
                    *acc += w * v;
                }
            }
        }
        Ok(Distribution {
            space: self.codomain.clone(),
            weights,
        })
    }
}

impl fmt::Debug for StochasticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:?} -> {:?}", self.domain, self.codomain)?;
        for r in 0..self.rows() {
            let row: Vec<String> = (0..self.cols())
                .map(|c| self.entry(r, c).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Distribution {
    pub fn new(space: ProductSpace, weights: Vec<Rational>) -> Result<Self> {
        let m = StochasticMatrix::new(ProductSpace::scalar(), space, vec![weights])?;
        Ok(Distribution::from_matrix(m))
    }

    pub fn dirac(space: &ProductSpace, index: usize) -> Self {
        let mut weights = vec![Rational::zero(); space.dim()];
        weights[index] = Rational::one();
        Distribution {
            space: space.clone(),
            weights,
        }
    }

    pub fn uniform(space: &ProductSpace) -> Self {
        let n = space.dim();
        Distribution {
            space: space.clone(),
            weights: vec![rational::ratio(1, n as i64); n],
        }
    }

    /// The single column of a map out of the scalar space.
    pub fn from_matrix(m: StochasticMatrix) -> Self {
        assert!(m.domain.is_scalar(), "distribution needs scalar domain");
        Distribution {
            space: m.codomain,
            weights: m.entries,
        }
    }

    pub fn to_matrix(&self) -> StochasticMatrix {
        StochasticMatrix {
            domain: ProductSpace::scalar(),
            codomain: self.space.clone(),
            entries: self.weights.clone(),
        }
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &Rational {
        &self.weights[index]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, _)| i)
    }

    /// Marginal on the listed factors (kept in this space's order).
    pub fn marginal<S: AsRef<str>>(&self, kept: &[S]) -> Result<Distribution> {
        projection(&self.space, kept)?.apply(self)
    }

    /// Permutes factors into the order of `target`.
    pub fn reorder(&self, target: &ProductSpace) -> Result<Distribution> {
        Ok(Distribution::from_matrix(
            self.to_matrix().reorder_codomain(target)?,
        ))
    }

    pub fn tensor(&self, other: &Distribution) -> Result<Distribution> {
        Ok(Distribution::from_matrix(tensor(
            &self.to_matrix(),
            &other.to_matrix(),
        )?))
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .support()
            .map(|i| format!("{}: {}", self.space.label(i), self.weights[i]))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn mismatch(a: &ProductSpace, b: &ProductSpace) -> Error {
    Error::SpaceMismatch {
        left: a.describe(),
        right: b.describe(),
    }
}

/// Validating constructor; see [`StochasticMatrix::new`].
pub fn make_matrix(
    domain: ProductSpace,
    codomain: ProductSpace,
    columns: Vec<Vec<Rational>>,
) -> Result<StochasticMatrix> {
    StochasticMatrix::new(domain, codomain, columns)
}

/// `second ∘ first`.
pub fn compose(second: &StochasticMatrix, first: &StochasticMatrix) -> Result<StochasticMatrix> {
    if first.codomain != second.domain {
        return Err(mismatch(&first.codomain, &second.domain));
    }
    let rows = second.rows();
    let mut entries = vec![Rational::zero(); first.cols() * rows];
    for j in 0..first.cols() {
        let out = &mut entries[j * rows..(j + 1) * rows];
        for (k, w) in first.column(j).iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (acc, v) in out.iter_mut().zip(second.column(k)) {
                if !v.is_zero() {
                    *acc += w * v;
                }
            }
        }
    }
    Ok(StochasticMatrix::from_columns_unchecked(
        first.domain.clone(),
        second.codomain.clone(),
        entries,
    ))
}

/// Kronecker product; the factors of `m1` come first (most significant).
pub fn tensor(m1: &StochasticMatrix, m2: &StochasticMatrix) -> Result<StochasticMatrix> {
    let domain = m1.domain.concat(&m2.domain)?;
    let codomain = m1.codomain.concat(&m2.codomain)?;
    let (r1, r2) = (m1.rows(), m2.rows());
    let mut entries = Vec::with_capacity(domain.dim() * codomain.dim());
    for c1 in 0..m1.cols() {
        for c2 in 0..m2.cols() {
            for a in m1.column(c1) {
                for b in m2.column(c2) {
                    entries.push(if a.is_zero() || b.is_zero() {
                        Rational::zero()
                    } else {
                        a * b
                    });
                }
            }
        }
    }
    debug_assert_eq!(entries.len(), m1.cols() * m2.cols() * r1 * r2);
    Ok(StochasticMatrix::from_columns_unchecked(
        domain, codomain, entries,
    ))
}

/// Normalized transpose: Bayes inversion under the uniform prior. Errors when
/// some row is entirely zero.
///
/// `dual(dual(m)) == m` holds exactly when the row sums of `m` are constant
/// on each connected block of its support (deterministic maps, doubly
/// stochastic maps), but not for arbitrary stochastic matrices.
pub fn dual(m: &StochasticMatrix) -> Result<StochasticMatrix> {
    let mut entries = Vec::with_capacity(m.entries.len());
    for r in 0..m.rows() {
        entries.extend(m.posterior(r)?.weights);
    }
    Ok(StochasticMatrix::from_columns_unchecked(
        m.codomain.clone(),
        m.domain.clone(),
        entries,
    ))
}

/// Deterministic projection onto the kept factors.
pub fn projection<S: AsRef<str>>(space: &ProductSpace, kept: &[S]) -> Result<StochasticMatrix> {
    let sub = space.subspace(kept)?;
    let map = space.restriction_map(&sub)?;
    Ok(StochasticMatrix::deterministic(space.clone(), sub, |i| {
        map[i]
    }))
}

/// Generalized diagonal `δ_s ↦ ⊗_j δ_(s restricted to targets[j])`.
///
/// The codomain concatenates the target spaces. A factor id that repeats
/// across targets is renamed `id#n` on its n-th repetition, so
/// `diagonal(X, [X, X])` has codomain `X × X#1`.
pub fn diagonal(source: &ProductSpace, targets: &[ProductSpace]) -> Result<StochasticMatrix> {
    let maps = targets
        .iter()
        .map(|t| source.restriction_map(t))
        .collect::<Result<Vec<_>>>()?;
    let mut factors: Vec<Factor> = Vec::new();
    for t in targets {
        for f in t.factors() {
            let repeats = factors
                .iter()
                .filter(|g| g.id == f.id || g.id.starts_with(&format!("{}#", f.id)))
                .count();
            let id = if repeats == 0 {
                f.id.clone()
            } else {
                format!("{}#{}", f.id, repeats)
            };
            factors.push(Factor::new(id, f.alphabet.clone()));
        }
    }
    let codomain = ProductSpace::new(factors)?;
    let dims: Vec<usize> = targets.iter().map(ProductSpace::dim).collect();
    Ok(StochasticMatrix::deterministic(
        source.clone(),
        codomain,
        |s| {
            maps.iter()
                .zip(&dims)
                .fold(0, |acc, (map, d)| acc * d + map[s])
        },
    ))
}

/// Relative entropy in bits.
#[derive(Clone, Debug, PartialEq)]
pub enum Divergence {
    Finite(f64),
    /// `p` puts weight where `q` has none; lists the offending basis indices.
    Infinite { offending: Vec<usize> },
}

impl Divergence {
    pub fn bits(&self) -> f64 {
        match self {
            Divergence::Finite(b) => *b,
            Divergence::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Divergence::Finite(_))
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Finite(b) => write!(f, "{b:.12}"),
            Divergence::Infinite { .. } => write!(f, "inf"),
        }
    }
}

/// `Σ p_i log2(p_i / q_i)` with `0·log(0/q) = 0`. Each ratio is formed
/// exactly before the logarithm is taken.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<Divergence> {
    if p.space != q.space {
        return Err(mismatch(&p.space, &q.space));
    }
    let mut offending = Vec::new();
    let mut bits = 0.0;
    for (i, (pi, qi)) in p.weights.iter().zip(&q.weights).enumerate() {
        if pi.is_zero() {
            continue;
        }
        if qi.is_zero() {
            offending.push(i);
            continue;
        }
        bits += rational::to_f64(pi) * rational::log2(&(pi / qi));
    }
    if !offending.is_empty() {
        return Ok(Divergence::Infinite { offending });
    }
    // Rounding can push an exact zero slightly negative.
    Ok(Divergence::Finite(if bits < 0.0 && bits > -1e-12 {
        0.0
    } else {
        bits
    }))
}
