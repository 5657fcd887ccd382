//! Measurements by subsystems and the effective information they generate.
//!
//! Every subsystem's mechanism is extended to the whole system, a map from
//! `S^D` (all edge sources) to `A^D` (all edge targets), so that measurements
//! by different subsystems live on the same space and can be compared.

use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{enumerate_subsystems, glue_mechanism, Subsystem};
use crate::rational::Rational;
use crate::space::ProductSpace;
use crate::stoch::{compose, dual, kl_divergence, projection, Distribution, Divergence, StochasticMatrix};
use crate::system::SystemSpec;

/// `S^D`: every occasion with an outgoing edge.
pub fn input_space(spec: &SystemSpec) -> Result<ProductSpace> {
    spec.space_of(spec.edge_sources())
}

/// `A^D`: every occasion with an incoming edge.
pub fn output_space(spec: &SystemSpec) -> Result<ProductSpace> {
    spec.space_of(spec.edge_targets())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedMechanism {
    subsystem: Subsystem,
    map: StochasticMatrix,
}

impl ExtendedMechanism {
    pub fn subsystem(&self) -> &Subsystem {
        &self.subsystem
    }

    /// `S^D → A^D`.
    pub fn map(&self) -> &StochasticMatrix {
        &self.map
    }
}

/// `dual(π_{A^D→A^C}) ∘ m_C ∘ π_{S^D→S^C}`: inputs outside `S^C` are ignored
/// and outputs outside `A^C` emitted uniformly.
pub fn extend(spec: &SystemSpec, c: &Subsystem, m_c: &StochasticMatrix) -> Result<ExtendedMechanism> {
    let (s_d, a_d) = (input_space(spec)?, output_space(spec)?);
    let (s_c, a_c) = (c.source_space(spec)?, c.target_space(spec)?);
    if m_c.domain() != &s_c || m_c.codomain() != &a_c {
        return Err(Error::SpaceMismatch {
            left: format!("{:?} -> {:?}", m_c.domain(), m_c.codomain()),
            right: format!("{s_c:?} -> {a_c:?}"),
        });
    }
    let inputs: Vec<&str> = s_c.ids().collect();
    let outputs: Vec<&str> = a_c.ids().collect();
    let forget = projection(&s_d, &inputs)?;
    let pad = dual(&projection(&a_d, &outputs)?)?;
    Ok(ExtendedMechanism {
        subsystem: c.clone(),
        map: compose(&pad, &compose(m_c, &forget)?)?,
    })
}

/// Every column uniform on `A^D`.
pub fn null_mechanism(spec: &SystemSpec) -> Result<ExtendedMechanism> {
    let (s_d, a_d) = (input_space(spec)?, output_space(spec)?);
    let column = Distribution::uniform(&a_d).weights().to_vec();
    Ok(ExtendedMechanism {
        subsystem: Subsystem::bottom(),
        map: StochasticMatrix::new(s_d.clone(), a_d, vec![column; s_d.dim()])?,
    })
}

/// Glues and extends `c`; subsystems without effective pairs give the null
/// mechanism.
pub fn extended_mechanism(spec: &SystemSpec, c: &Subsystem) -> Result<ExtendedMechanism> {
    if c.is_null() {
        let mut m = null_mechanism(spec)?;
        m.subsystem = c.clone();
        return Ok(m);
    }
    extend(spec, c, &glue_mechanism(spec, c)?)
}

/// `dual(m) ∘ d_out`: the posterior over system inputs. Only rows carrying
/// weight in `d_out` need be reachable.
pub fn measure(m: &ExtendedMechanism, d_out: &Distribution) -> Result<Distribution> {
    let map = &m.map;
    if d_out.space() != map.codomain() {
        return Err(Error::SpaceMismatch {
            left: format!("{:?}", d_out.space()),
            right: format!("{:?}", map.codomain()),
        });
    }
    let mut weights = vec![Rational::zero(); map.cols()];
    for a in d_out.support() {
        let total = map.row_sum(a);
        if total.is_zero() {
            return Err(Error::UnsupportedOutput(map.codomain().label(a)));
        }
        let scale = d_out.weight(a) / total;
        for (s, w) in weights.iter_mut().enumerate() {
            let e = map.entry(a, s);
            if !e.is_zero() {
                *w += e * &scale;
            }
        }
    }
    Distribution::new(map.domain().clone(), weights)
}

/// The coarser side of an effective-information comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Context {
    /// The empty subsystem; its measurement is uniform on `S^D`.
    Null,
    Subsystem(Subsystem),
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::Null => write!(f, "null"),
            Context::Subsystem(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementResult {
    pub subsystem: Subsystem,
    pub context: Context,
    pub output: Distribution,
    pub measurement: Distribution,
    pub context_measurement: Distribution,
    pub ei: Divergence,
}

impl MeasurementResult {
    pub fn bits(&self) -> f64 {
        self.ei.bits()
    }
}

/// `ei = KL(measure(m_C1, d_out) ‖ measure(m_C2, d_out))` in bits.
pub fn effective_information(
    spec: &SystemSpec,
    c1: &Subsystem,
    context: &Context,
    d_out: &Distribution,
) -> Result<MeasurementResult> {
    if let Context::Subsystem(c2) = context {
        if !c2.is_subset_of(c1) {
            return Err(Error::ContextNotContained {
                context: c2.to_string(),
                subsystem: c1.to_string(),
            });
        }
    }
    let measurement = measure(&extended_mechanism(spec, c1)?, d_out)?;
    let context_measurement = match context {
        Context::Null => Distribution::uniform(measurement.space()),
        Context::Subsystem(c2) => measure(&extended_mechanism(spec, c2)?, d_out)?,
    };
    let ei = kl_divergence(&measurement, &context_measurement)?;
    Ok(MeasurementResult {
        subsystem: c1.clone(),
        context: context.clone(),
        output: d_out.clone(),
        measurement,
        context_measurement,
        ei,
    })
}

/// The subsystem lattice annotated with effective information.
#[derive(Clone, Debug)]
pub struct EiLattice {
    /// Subsystems in enumeration order, each with `ei` against the null
    /// context.
    pub nodes: Vec<(Subsystem, Divergence)>,
    /// Covering relations `(coarse, fine, ei of fine in the context of
    /// coarse)`, indices into `nodes`.
    pub covers: Vec<(usize, usize, Divergence)>,
}

/// Measures every subsystem once at `d_out`, then compares along each
/// covering relation.
pub fn ei_lattice(spec: &SystemSpec, d_out: &Distribution, max_pairs: usize) -> Result<EiLattice> {
    spec.check()?;
    let subsystems: Vec<Subsystem> = enumerate_subsystems(spec, max_pairs)?.collect();
    let measurements = subsystems
        .par_iter()
        .map(|c| measure(&extended_mechanism(spec, c)?, d_out))
        .collect::<Result<Vec<_>>>()?;
    let uniform = Distribution::uniform(&input_space(spec)?);
    let nodes = subsystems
        .iter()
        .zip(&measurements)
        .map(|(c, m)| Ok((c.clone(), kl_divergence(m, &uniform)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut covers = Vec::new();
    // Subsystems enumerate as bit masks; covers differ in exactly one bit.
    for fine in 0..subsystems.len() {
        let mut bits = fine;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            let coarse = fine ^ low;
            covers.push((
                coarse,
                fine,
                kl_divergence(&measurements[fine], &measurements[coarse])?,
            ));
            bits ^= low;
        }
    }
    covers.sort_by_key(|(c, f, _)| (*c, *f));
    Ok(EiLattice { nodes, covers })
}
