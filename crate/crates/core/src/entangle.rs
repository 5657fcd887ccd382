//! Entanglement of a measurement over a partition of its sources, and the
//! two-source closed forms and decomposability tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::Subsystem;
use crate::measure::{extended_mechanism, measure, input_space};
use crate::space::{Alphabet, ProductSpace};
use crate::stoch::{kl_divergence, Distribution, Divergence};
use crate::system::SystemSpec;
use crate::table::FunctionTable;

/// Default ceiling on the number of sources for partition enumeration.
pub const DEFAULT_SOURCE_BUDGET: usize = 8;

/// Disjoint nonempty blocks of occasion ids. Blocks are sorted internally
/// and ordered by least member.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    blocks: Vec<Vec<String>>,
}

impl Partition {
    pub fn new<I, B, S>(blocks: I) -> Result<Self>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for block in blocks {
            let mut b: Vec<String> = block.into_iter().map(Into::into).collect();
            if b.is_empty() {
                return Err(Error::NotAPartition("empty block".into()));
            }
            b.sort();
            for id in &b {
                if !seen.insert(id.clone()) {
                    return Err(Error::NotAPartition(format!("{id} appears twice")));
                }
            }
            out.push(b);
        }
        out.sort();
        Ok(Partition { blocks: out })
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.blocks
    }

    pub fn members(&self) -> BTreeSet<&str> {
        self.blocks.iter().flatten().map(String::as_str).collect()
    }

    /// Checks that the blocks cover exactly `sources`.
    pub fn check_covers<'a>(&self, sources: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let want: BTreeSet<&str> = sources.into_iter().collect();
        let have = self.members();
        if want != have {
            return Err(Error::NotAPartition(format!(
                "blocks cover {{{}}}, sources are {{{}}}",
                have.into_iter().collect::<Vec<_>>().join(","),
                want.into_iter().collect::<Vec<_>>().join(",")
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.blocks.iter().map(|b| b.join(",")).collect();
        write!(f, "{}", blocks.join("|"))
    }
}

/// `"vX|vY,vW"`: blocks separated by `|`, members by `,`.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Partition::new(s.split('|').map(|b| {
            b.split(',')
                .map(str::trim)
                .filter(|id| !id.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>()
        }))
    }
}

/// All set partitions of `sources`, as restricted-growth strings in
/// lexicographic order. Yields Bell(n) partitions.
pub fn enumerate_partitions<S: AsRef<str>>(sources: &[S], max_sources: usize) -> Result<Vec<Partition>> {
    let n = sources.len();
    if n > max_sources {
        return Err(Error::BudgetExceeded {
            what: "sources",
            count: n,
            limit: max_sources,
        });
    }
    let mut ids: Vec<&str> = sources.iter().map(AsRef::as_ref).collect();
    ids.sort();
    if n == 0 {
        return Ok(vec![Partition { blocks: Vec::new() }]);
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut parts = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            parts[b].push(ids[i].to_string());
        }
        out.push(Partition { blocks: parts });
        // Next string: bump the rightmost position that may grow.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let bound = rgs[..i].iter().max().unwrap() + 1;
            if rgs[i] < bound {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|v| *v = 0);
                break;
            }
            i -= 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    pub subsystem: Subsystem,
    pub partition: Partition,
    pub gamma: Divergence,
    /// Effective information of the whole subsystem against the null context.
    pub ei: Divergence,
    /// One entry per block, against the null context.
    pub block_ei: Vec<Divergence>,
}

impl EntanglementReport {
    pub fn gamma_bits(&self) -> f64 {
        self.gamma.bits()
    }

    /// `ei(C) − Σ ei(blocks)`; zero whenever `γ` is.
    pub fn additivity_gap(&self) -> f64 {
        self.ei.bits() - self.block_ei.iter().map(Divergence::bits).sum::<f64>()
    }
}

/// `γ = KL(measurement by C on S^C ‖ ⊗_j measurement by block j on S^{M_j})`,
/// where block `j` keeps the pairs of `c` whose source lies in `M_j`.
pub fn entanglement(
    spec: &SystemSpec,
    c: &Subsystem,
    partition: &Partition,
    d_out: &Distribution,
) -> Result<EntanglementReport> {
    partition.check_covers(c.sources())?;
    let uniform = Distribution::uniform(&input_space(spec)?);
    let whole = measure(&extended_mechanism(spec, c)?, d_out)?;
    let ei = kl_divergence(&whole, &uniform)?;
    let sources: Vec<&str> = c.sources().into_iter().collect();
    let whole_c = whole.marginal(&sources)?;
    let mut block_ei = Vec::with_capacity(partition.blocks().len());
    let mut product: Option<Distribution> = None;
    for block in partition.blocks() {
        let sub = c.filter(|a, _| block.iter().any(|b| b == a));
        let m = measure(&extended_mechanism(spec, &sub)?, d_out)?;
        block_ei.push(kl_divergence(&m, &uniform)?);
        let marginal = m.marginal(block)?;
        product = Some(match product {
            None => marginal,
            Some(p) => p.tensor(&marginal)?,
        });
    }
    let product = match product {
        Some(p) => p.reorder(whole_c.space())?,
        None => Distribution::uniform(&ProductSpace::scalar()),
    };
    Ok(EntanglementReport {
        subsystem: c.clone(),
        partition: partition.clone(),
        gamma: kl_divergence(&whole_c, &product)?,
        ei,
        block_ei,
    })
}

/// Preimage of `z` with its row and column slice sizes.
struct Fibre {
    points: Vec<(usize, usize)>,
    row: BTreeMap<usize, usize>,
    col: BTreeMap<usize, usize>,
}

fn fibre(g: &FunctionTable, z: usize) -> Result<Fibre> {
    let (nx, ny) = two_source_dims(g)?;
    let mut f = Fibre {
        points: Vec::new(),
        row: BTreeMap::new(),
        col: BTreeMap::new(),
    };
    for x in 0..nx {
        for y in 0..ny {
            if g.at(x, y) == z {
                f.points.push((x, y));
                *f.row.entry(x).or_default() += 1;
                *f.col.entry(y).or_default() += 1;
            }
        }
    }
    if f.points.is_empty() {
        return Err(Error::NotInImage(g.codomain().label(z)));
    }
    Ok(f)
}

fn two_source_dims(g: &FunctionTable) -> Result<(usize, usize)> {
    g.two_source_dims().ok_or_else(|| Error::ShapeMismatch {
        expected: "a function of two sources".into(),
        found: format!("{:?}", g.domain()),
    })
}

/// `Σ_{(x,y)∈g⁻¹(z)} (1/n) log2(n / (|g⁻¹_{x×Y}(z)| |g⁻¹_{X×y}(z)|))`.
pub fn gamma_closed_form_two_source(g: &FunctionTable, z: usize) -> Result<f64> {
    let f = fibre(g, z)?;
    let n = f.points.len() as f64;
    Ok(f.points
        .iter()
        .map(|(x, y)| (n / (f.row[x] * f.col[y]) as f64).log2() / n)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rectangularity {
    Rectangular,
    /// `first` and `second` lie in the fibre but `missing`, which takes the
    /// row of `first` and the column of `second`, does not.
    Witness {
        first: (usize, usize),
        second: (usize, usize),
        missing: (usize, usize),
    },
}

impl Rectangularity {
    pub fn is_rectangular(&self) -> bool {
        matches!(self, Rectangularity::Rectangular)
    }
}

/// Whether `g⁻¹(z)` is the product of its row and column projections.
pub fn is_rectangular(g: &FunctionTable, z: usize) -> Result<Rectangularity> {
    let f = fibre(g, z)?;
    let members: BTreeSet<(usize, usize)> = f.points.iter().copied().collect();
    for &first in &f.points {
        for &second in &f.points {
            let missing = (first.0, second.1);
            if !members.contains(&missing) {
                return Ok(Rectangularity::Witness {
                    first,
                    second,
                    missing,
                });
            }
        }
    }
    Ok(Rectangularity::Rectangular)
}

/// `g = h ∘ (g1 × g2)` with `h` injective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductDecomposition {
    pub left: FunctionTable,
    pub right: FunctionTable,
    /// The output of `g` for each attained `(g1, g2)` pair.
    pub combine: BTreeMap<(usize, usize), usize>,
}

/// Sorted classes of slices, or `None` if they overlap without coinciding
/// or fail to cover.
fn slice_classes(slices: BTreeSet<Vec<usize>>, n: usize) -> Option<Vec<usize>> {
    let mut class = vec![usize::MAX; n];
    // BTreeSet order on sorted vectors is least-member order for disjoint sets.
    for (k, s) in slices.iter().enumerate() {
        for &i in s {
            if class[i] != usize::MAX {
                return None;
            }
            class[i] = k;
        }
    }
    class.iter().all(|&c| c != usize::MAX).then_some(class)
}

/// Splits a surjective two-source `g` into a product of one-source
/// functions whose fibres reproduce those of `g`. Returns `None` when no
/// such split exists.
pub fn product_decomposition(g: &FunctionTable) -> Result<Option<ProductDecomposition>> {
    let (nx, ny) = two_source_dims(g)?;
    if !g.is_surjective() {
        let missing = (0..g.codomain().dim()).find(|z| !g.image().contains(z)).unwrap();
        return Err(Error::NotSurjectiveFunction(g.codomain().label(missing)));
    }
    let mut x_slices = BTreeSet::new();
    let mut y_slices = BTreeSet::new();
    for z in g.image() {
        for y in 0..ny {
            let s: Vec<usize> = (0..nx).filter(|&x| g.at(x, y) == z).collect();
            if !s.is_empty() {
                x_slices.insert(s);
            }
        }
        for x in 0..nx {
            let s: Vec<usize> = (0..ny).filter(|&y| g.at(x, y) == z).collect();
            if !s.is_empty() {
                y_slices.insert(s);
            }
        }
    }
    let (Some(cx), Some(cy)) = (slice_classes(x_slices, nx), slice_classes(y_slices, ny)) else {
        return Ok(None);
    };
    let mut combine = BTreeMap::new();
    let mut used = BTreeMap::new();
    for x in 0..nx {
        for y in 0..ny {
            let z = g.at(x, y);
            if *combine.entry((cx[x], cy[y])).or_insert(z) != z {
                return Ok(None);
            }
            if *used.entry(z).or_insert((cx[x], cy[y])) != (cx[x], cy[y]) {
                return Ok(None);
            }
        }
    }
    let [fx, fy] = g.domain().factors() else {
        unreachable!("two source dims checked");
    };
    let build = |input: &crate::space::Factor, id: &str, class: Vec<usize>| -> Result<FunctionTable> {
        let k = class.iter().max().map_or(0, |m| m + 1);
        let alphabet = Alphabet::new((0..k).map(|i| format!("q{i}")))?;
        FunctionTable::new(
            ProductSpace::single(input.id.clone(), input.alphabet.clone()),
            ProductSpace::single(id, alphabet),
            class,
        )
    };
    Ok(Some(ProductDecomposition {
        left: build(fx, "z1", cx)?,
        right: build(fy, "z2", cy)?,
        combine,
    }))
}
