//! Deterministic functions between finite product sets, stored as dense
//! lookup tables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::space::{Alphabet, Factor, ProductSpace};
use crate::stoch::StochasticMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionTable {
    domain: ProductSpace,
    codomain: ProductSpace,
    /// Joint codomain index for every joint domain index.
    outputs: Vec<usize>,
}

impl FunctionTable {
    pub fn new(domain: ProductSpace, codomain: ProductSpace, outputs: Vec<usize>) -> Result<Self> {
        if outputs.len() != domain.dim() {
            return Err(Error::LengthMismatch {
                expected: domain.dim(),
                found: outputs.len(),
            });
        }
        if let Some(i) = outputs.iter().position(|&o| o >= codomain.dim()) {
            return Err(Error::UnknownSymbol {
                factor: format!("{codomain:?}"),
                symbol: format!("index {} (input {})", outputs[i], domain.label(i)),
            });
        }
        Ok(FunctionTable {
            domain,
            codomain,
            outputs,
        })
    }

    pub fn from_fn(
        domain: ProductSpace,
        codomain: ProductSpace,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let outputs = (0..domain.dim())
            .map(|i| codomain.encode(&f(&domain.decode(i))))
            .collect();
        FunctionTable::new(domain, codomain, outputs)
    }

    /// Builds from `(input symbols, output symbols)` rows; every joint input
    /// must appear exactly once.
    pub fn from_symbols(
        domain: ProductSpace,
        codomain: ProductSpace,
        rows: &[(Vec<&str>, Vec<&str>)],
    ) -> Result<Self> {
        let mut outputs = vec![None; domain.dim()];
        for (input, output) in rows {
            let i = domain.index_of_symbols(input)?;
            let o = codomain.index_of_symbols(output)?;
            outputs[i] = Some(o);
        }
        let outputs = outputs
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| Error::NotTotal(domain.label(i))))
            .collect::<Result<Vec<_>>>()?;
        FunctionTable::new(domain, codomain, outputs)
    }

    /// `g: X × Y → Z` with factors named `x`, `y`, `z` over symbol ranges.
    pub fn two_source(nx: usize, ny: usize, nz: usize, outputs: Vec<usize>) -> Result<Self> {
        let domain = ProductSpace::new(vec![
            Factor::new("x", Alphabet::range(nx)),
            Factor::new("y", Alphabet::range(ny)),
        ])?;
        FunctionTable::new(domain, ProductSpace::single("z", Alphabet::range(nz)), outputs)
    }

    pub fn domain(&self) -> &ProductSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &ProductSpace {
        &self.codomain
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn apply(&self, input: usize) -> usize {
        self.outputs[input]
    }

    /// `g(x, y)` for a two-factor domain.
    pub fn at(&self, x: usize, y: usize) -> usize {
        self.outputs[self.domain.encode(&[x, y])]
    }

    pub fn image(&self) -> BTreeSet<usize> {
        self.outputs.iter().copied().collect()
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() == self.codomain.dim()
    }

    /// Sizes of the two domain factors, when there are exactly two.
    pub fn two_source_dims(&self) -> Option<(usize, usize)> {
        match self.domain.factors() {
            [a, b] => Some((a.alphabet.len(), b.alphabet.len())),
            _ => None,
        }
    }

    /// Resolves an output symbol list to a joint codomain index.
    pub fn output_index(&self, symbols: &[&str]) -> Result<usize> {
        self.codomain.index_of_symbols(symbols)
    }
}

/// The deterministic stochastic map `δ_x ↦ δ_f(x)`.
pub fn lift_function(f: &FunctionTable) -> StochasticMatrix {
    StochasticMatrix::deterministic(f.domain.clone(), f.codomain.clone(), |x| f.outputs[x])
}
