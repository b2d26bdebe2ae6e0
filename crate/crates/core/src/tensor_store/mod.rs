//! The symmetry-reduced four-index tensor up to a basis cutoff.
//!
//! Only canonical keys with nonzero values are stored; [`Tensor::lookup`]
//! maps any key in the cutoff to its canonical representative and returns
//! zero for keys that are absent.

mod format;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use format::ExportFormat;

use crate::closed_form::{Backend, ClosedForm, OscillatorScale};
use crate::error::{Error, Result};
use crate::index::{allowed, canonical_key, is_canonical, Axis, ElementKey, PairSel, QuantumTriple};
use crate::recurrence::{build_family, FamilySpec, RecurrenceScalar};

/// Default ceiling on the number of canonical keys a build may enumerate.
pub const DEFAULT_KEY_LIMIT: u128 = 50_000_000;

/// Which single-particle states enter the basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum BasisCutoff {
    /// `max(n_x, n_y, n_z) <= n`.
    PerAxis(u32),
    /// `n_x + n_y + n_z <= N`.
    Shells(u32),
}

impl BasisCutoff {
    pub fn value(&self) -> u32 {
        match *self {
            BasisCutoff::PerAxis(n) | BasisCutoff::Shells(n) => n,
        }
    }

    pub fn contains(&self, t: &QuantumTriple) -> bool {
        match *self {
            BasisCutoff::PerAxis(n) => t.max_component() <= n,
            BasisCutoff::Shells(n) => t.nx as u64 + t.ny as u64 + t.nz as u64 <= n as u64,
        }
    }

    pub fn contains_key(&self, key: &ElementKey) -> bool {
        key.particles().iter().all(|t| self.contains(t))
    }

    /// Largest single index any basis state can carry.
    pub fn max_index(&self) -> u32 {
        self.value()
    }

    /// Number of basis states.
    pub fn basis_size(&self) -> u128 {
        let n = self.value() as u128;
        match self {
            BasisCutoff::PerAxis(_) => (n + 1).pow(3),
            BasisCutoff::Shells(_) => (n + 1) * (n + 2) * (n + 3) / 6,
        }
    }

    /// Basis states ordered by shell, then `(n_x, n_y, n_z)`.
    pub fn basis(&self) -> Vec<QuantumTriple> {
        let n = self.value();
        let mut out = Vec::new();
        for (nx, ny, nz) in (0..=n).flat_map(|x| (0..=n).flat_map(move |y| (0..=n).map(move |z| (x, y, z)))) {
            let t = QuantumTriple::new(nx, ny, nz);
            if self.contains(&t) {
                out.push(t);
            }
        }
        out.sort_by_key(|t| (t.total(), t.nx, t.ny, t.nz));
        out
    }

    /// Exact number of symmetry orbits of `B^4` keys, counted with Burnside's
    /// lemma over the order-8 symmetry group.
    pub fn canonical_key_count(&self) -> u128 {
        let b = self.basis_size();
        (b.pow(4) + 2 * b.pow(3) + 3 * b.pow(2) + 2 * b) / 8
    }
}

impl fmt::Display for BasisCutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisCutoff::PerAxis(n) => write!(f, "per_axis {n}"),
            BasisCutoff::Shells(n) => write!(f, "shells {n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Every key from the closed form.
    #[default]
    Direct,
    /// Keys grouped into x-axis `(λ1, λ4)` families built by recurrence.
    Recurrence,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Direct => "direct",
            Strategy::Recurrence => "recurrence",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Strategy::Direct),
            "recurrence" => Ok(Strategy::Recurrence),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub cutoff: BasisCutoff,
    pub scale: OscillatorScale,
    pub backend: Backend,
    pub strategy: Strategy,
    pub workers: usize,
    pub key_limit: u128,
}

impl BuildOptions {
    pub fn new(cutoff: BasisCutoff) -> Self {
        BuildOptions {
            cutoff,
            scale: OscillatorScale::unit(),
            backend: Backend::Float,
            strategy: Strategy::Direct,
            workers: 1,
            key_limit: DEFAULT_KEY_LIMIT,
        }
    }
}

/// Canonical, parity-allowed keys of the cutoff in ascending order.
pub fn canonical_keys(cutoff: BasisCutoff, key_limit: u128) -> Result<Vec<ElementKey>> {
    let count = cutoff.canonical_key_count();
    if count > key_limit {
        return Err(Error::TooLarge {
            keys: count,
            limit: key_limit,
        });
    }
    let basis = cutoff.basis();
    let mut keys = Vec::new();
    for &a in &basis {
        for &b in &basis {
            for &c in &basis {
                for &d in &basis {
                    let k = ElementKey::new(a, b, c, d);
                    if is_canonical(&k) && allowed(&k) {
                        keys.push(k);
                    }
                }
            }
        }
    }
    keys.sort_unstable();
    Ok(keys)
}

/// FNV-1a over the twelve indices; fixes the shard of a key independently
/// of the platform and the worker count.
fn shard_hash(key: &ElementKey) -> u64 {
    key.indices().iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &n| {
        n.to_le_bytes()
            .iter()
            .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
    })
}

/// Nonzero values of the symmetry-reduced tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    cutoff: BasisCutoff,
    scale: OscillatorScale,
    backend: Backend,
    elements: BTreeMap<ElementKey, f64>,
}

impl Tensor {
    /// Assembles a tensor from stored records, checking that every key is
    /// canonical and inside the cutoff and every value finite and nonzero.
    pub fn from_elements(
        cutoff: BasisCutoff,
        scale: OscillatorScale,
        backend: Backend,
        elements: impl IntoIterator<Item = (ElementKey, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, value) in elements {
            if !cutoff.contains_key(&key) {
                return Err(Error::OutOfCutoff { key });
            }
            if !is_canonical(&key) {
                return Err(Error::Format(format!("key {key} is not canonical")));
            }
            if !value.is_finite() || value == 0.0 {
                return Err(Error::Format(format!("key {key} has stored value {value}")));
            }
            if map.insert(key, value).is_some() {
                return Err(Error::Format(format!("duplicate key {key}")));
            }
        }
        Ok(Tensor {
            cutoff,
            scale,
            backend,
            elements: map,
        })
    }

    pub fn cutoff(&self) -> BasisCutoff {
        self.cutoff
    }

    pub fn scale(&self) -> OscillatorScale {
        self.scale
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Number of stored (canonical, nonzero) elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = (&ElementKey, &f64)> {
        self.elements.iter()
    }

    /// Value of any key in the cutoff.
    pub fn lookup(&self, key: &ElementKey) -> Result<f64> {
        if !self.cutoff.contains_key(key) {
            return Err(Error::OutOfCutoff { key: *key });
        }
        let c = canonical_key(key);
        Ok(self.elements.get(&c.key).copied().unwrap_or(0.0))
    }
}

/// Builds the tensor on a dedicated pool of `options.workers` threads.
///
/// Keys (or whole families, for the recurrence strategy) are assigned to
/// shards by a fixed hash and merged into an ordered map, so the result does
/// not depend on the number of workers.
pub fn build_tensor(options: &BuildOptions) -> Result<Tensor> {
    if options.workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let keys = canonical_keys(options.cutoff, options.key_limit)?;
    let cf = ClosedForm::new(options.scale, options.cutoff.max_index());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let shards = options.workers as u64;

    let values: Vec<(ElementKey, f64)> = match options.strategy {
        Strategy::Direct => {
            let mut buckets = vec![Vec::new(); options.workers];
            for k in keys {
                buckets[(shard_hash(&k) % shards) as usize].push(k);
            }
            let backend = options.backend;
            let parts: Vec<Vec<(ElementKey, f64)>> = pool.install(|| {
                buckets
                    .into_par_iter()
                    .map(|bucket| {
                        bucket
                            .into_iter()
                            .map(|k| cf.element(&k, backend).map(|v| (k, v.value)).map_err(|e| e.at(k)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()
            })?;
            parts.into_iter().flatten().collect()
        }
        Strategy::Recurrence => {
            let mut families: BTreeMap<ElementKey, Vec<ElementKey>> = BTreeMap::new();
            for k in keys {
                families
                    .entry(k.with_pair(Axis::X, PairSel::P14, 0, 0))
                    .or_default()
                    .push(k);
            }
            let mut buckets = vec![Vec::new(); options.workers];
            for fam in families {
                buckets[(shard_hash(&fam.0) % shards) as usize].push(fam);
            }
            let backend = options.backend;
            let parts: Vec<Vec<(ElementKey, f64)>> = pool.install(|| {
                buckets
                    .into_par_iter()
                    .map(|bucket| {
                        let mut out = Vec::new();
                        for (template, members) in bucket {
                            match backend {
                                Backend::Float => family_values::<f64>(&cf, template, &members, &mut out)?,
                                Backend::Exact => family_values::<BigRational>(&cf, template, &members, &mut out)?,
                            }
                        }
                        Ok(out)
                    })
                    .collect::<Result<_>>()
            })?;
            parts.into_iter().flatten().collect()
        }
    };

    Tensor::from_elements(
        options.cutoff,
        options.scale,
        options.backend,
        values.into_iter().filter(|&(_, v)| v != 0.0),
    )
}

fn family_values<T: RecurrenceScalar>(
    cf: &ClosedForm,
    template: ElementKey,
    members: &[ElementKey],
    out: &mut Vec<(ElementKey, f64)>,
) -> Result<()> {
    let n_max = members
        .iter()
        .map(|k| k.lambda1.nx.max(k.lambda4.nx))
        .max()
        .unwrap_or(0);
    let spec = FamilySpec::new(Axis::X, PairSel::P14, template);
    let frontier = build_family::<T>(cf, spec, n_max).map_err(|e| e.at(template))?;
    for k in members {
        let v = frontier
            .normalized(k.lambda1.nx, k.lambda4.nx, cf)
            .ok_or(Error::MissingNeighbor {
                n_minus: k.lambda1.nx.min(k.lambda4.nx),
                n_plus: k.lambda1.nx.max(k.lambda4.nx),
            })?;
        out.push((*k, v.value));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
