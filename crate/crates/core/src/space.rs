//! Alphabets and labeled product spaces.
//!
//! A joint index over a [`ProductSpace`] is the mixed-radix encoding of the
//! per-factor indices with the first factor most significant. The empty
//! product is the scalar space of dimension 1.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Arc<[String]>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Alphabet {
            symbols: symbols.into(),
        })
    }

    /// Symbols `"0"`, `"1"`, ..., `"n-1"`.
    pub fn range(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Alphabet::new((0..n).map(|i| i.to_string())).expect("distinct")
    }

    pub fn binary() -> Self {
        Alphabet::range(2)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols.to_vec()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub id: String,
    pub alphabet: Alphabet,
}

impl Factor {
    pub fn new(id: impl Into<String>, alphabet: Alphabet) -> Self {
        Factor {
            id: id.into(),
            alphabet,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ProductSpace {
    factors: Vec<Factor>,
}

impl ProductSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.id == f.id) {
                return Err(Error::DuplicateFactor(f.id.clone()));
            }
        }
        Ok(ProductSpace { factors })
    }

    /// The scalar space: no factors, dimension 1.
    pub fn scalar() -> Self {
        ProductSpace::default()
    }

    pub fn single(id: impl Into<String>, alphabet: Alphabet) -> Self {
        ProductSpace {
            factors: vec![Factor::new(id, alphabet)],
        }
    }

    /// Builds a space from `(id, alphabet)` pairs, sorting factors by id.
    pub fn canonical<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Alphabet)>,
        S: Into<String>,
    {
        let mut fs: Vec<Factor> = factors
            .into_iter()
            .map(|(id, a)| Factor::new(id, a))
            .collect();
        fs.sort_by(|a, b| a.id.cmp(&b.id));
        ProductSpace::new(fs)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.id.as_str())
    }

    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.alphabet.len()).product()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.id == id)
    }

    pub fn factor(&self, id: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.position(id).is_some()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.factors.len());
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (d, f)| acc * f.alphabet.len() + d)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for (slot, f) in digits.iter_mut().zip(&self.factors).rev() {
            let n = f.alphabet.len();
            *slot = index % n;
            index /= n;
        }
        digits
    }

    /// Encodes a joint symbol given as one symbol per factor.
    pub fn index_of_symbols(&self, symbols: &[&str]) -> Result<usize> {
        if symbols.len() != self.factors.len() {
            return Err(Error::LengthMismatch {
                expected: self.factors.len(),
                found: symbols.len(),
            });
        }
        let digits = symbols
            .iter()
            .zip(&self.factors)
            .map(|(s, f)| {
                f.alphabet.index_of(s).ok_or_else(|| Error::UnknownSymbol {
                    factor: f.id.clone(),
                    symbol: s.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.encode(&digits))
    }

    /// Human-readable label of a joint index, e.g. `vX=0,vY=1`.
    pub fn label(&self, index: usize) -> String {
        if self.is_scalar() {
            return "()".into();
        }
        self.decode(index)
            .iter()
            .zip(&self.factors)
            .map(|(d, f)| format!("{}={}", f.id, f.alphabet.symbol(*d)))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// The subspace keeping the listed factor ids, in this space's order.
    pub fn subspace<S: AsRef<str>>(&self, kept: &[S]) -> Result<Self> {
        for k in kept {
            if !self.contains(k.as_ref()) {
                return Err(Error::UnknownFactor(k.as_ref().to_string()));
            }
        }
        Ok(ProductSpace {
            factors: self
                .factors
                .iter()
                .filter(|f| kept.iter().any(|k| k.as_ref() == f.id))
                .cloned()
                .collect(),
        })
    }

    /// Factors of `self` not present in `other`.
    pub fn without(&self, other: &ProductSpace) -> Self {
        ProductSpace {
            factors: self
                .factors
                .iter()
                .filter(|f| !other.contains(&f.id))
                .cloned()
                .collect(),
        }
    }

    /// Concatenation; errors on a repeated factor id.
    pub fn concat(&self, other: &ProductSpace) -> Result<Self> {
        if let Some(f) = other.factors.iter().find(|f| self.contains(&f.id)) {
            return Err(Error::FactorCollision(f.id.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(ProductSpace { factors })
    }

    /// Same factors sorted by id.
    pub fn sorted(&self) -> Self {
        let mut factors = self.factors.clone();
        factors.sort_by(|a, b| a.id.cmp(&b.id));
        ProductSpace { factors }
    }

    /// Same factor set and alphabets, possibly in a different order.
    pub fn same_factors(&self, other: &ProductSpace) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .all(|f| other.factor(&f.id) == Some(f))
    }

    /// Same dimension per factor position; ids may differ.
    pub fn same_shape(&self, other: &ProductSpace) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| a.alphabet.len() == b.alphabet.len())
    }

    /// For every joint index of `self`, the joint index of its restriction
    /// to `sub`. Every factor of `sub` must occur in `self` with the same
    /// alphabet.
    pub fn restriction_map(&self, sub: &ProductSpace) -> Result<Vec<usize>> {
        let positions = sub
            .factors
            .iter()
            .map(|f| match self.factor(&f.id) {
                Some(g) if g.alphabet == f.alphabet => Ok(self.position(&f.id).unwrap()),
                Some(_) => Err(Error::SpaceMismatch {
                    left: format!("{self:?}"),
                    right: format!("{sub:?}"),
                }),
                None => Err(Error::UnknownFactor(f.id.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut digits_sub = vec![0; positions.len()];
        Ok((0..self.dim())
            .map(|i| {
                let digits = self.decode(i);
                for (slot, &p) in digits_sub.iter_mut().zip(&positions) {
                    *slot = digits[p];
                }
                sub.encode(&digits_sub)
            })
            .collect())
    }

    pub(crate) fn describe(&self) -> String {
        format!("{self:?}")
    }
}

impl fmt::Debug for ProductSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_scalar() {
            return write!(f, "R");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}:{}", x.id, x.alphabet.len()))
            .collect();
        write!(f, "[{}]", parts.join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> ProductSpace {
        ProductSpace::new(vec![
            Factor::new("x", Alphabet::range(2)),
            Factor::new("y", Alphabet::range(3)),
        ])
        .unwrap()
    }

    #[test]
    fn first_factor_is_most_significant() {
        let s = xy();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.encode(&[1, 0]), 3);
        assert_eq!(s.encode(&[0, 2]), 2);
        assert_eq!(s.decode(5), vec![1, 2]);
        assert_eq!(s.label(4), "x=1,y=1");
    }

    #[test]
    fn scalar_space_has_dimension_one() {
        let s = ProductSpace::scalar();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.encode(&[]), 0);
        assert_eq!(s.decode(0), Vec::<usize>::new());
    }

    #[test]
    fn alphabets_reject_duplicates_and_empty() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn duplicate_factor_ids_rejected() {
        let err = ProductSpace::new(vec![
            Factor::new("x", Alphabet::binary()),
            Factor::new("x", Alphabet::binary()),
        ]);
        assert_eq!(err, Err(Error::DuplicateFactor("x".into())));
    }

    #[test]
    fn restriction_map_drops_factors() {
        let s = xy();
        let y = s.subspace(&["y"]).unwrap();
        assert_eq!(s.restriction_map(&y).unwrap(), vec![0, 1, 2, 0, 1, 2]);
        let x = s.subspace(&["x"]).unwrap();
        assert_eq!(s.restriction_map(&x).unwrap(), vec![0, 0, 0, 1, 1, 1]);
        assert!(s.subspace(&["z"]).is_err());
    }

    #[test]
    fn symbols_resolve_to_joint_index() {
        let s = xy();
        assert_eq!(s.index_of_symbols(&["1", "2"]).unwrap(), 5);
        assert!(matches!(
            s.index_of_symbols(&["1", "7"]),
            Err(Error::UnknownSymbol { .. })
        ));
    }
}
