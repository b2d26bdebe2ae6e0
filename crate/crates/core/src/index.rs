//! Quantum-number bookkeeping: single-particle triples, four-particle element
//! keys, per-axis pair decomposition, the parity selection rule and the
//! symmetry orbit used to deduplicate stored elements.
//!
//! Particle order inside an [`ElementKey`] is `(λ1, λ2, λ3, λ4)` for the
//! element `<λ1 λ2 | 1/r12 | λ3 λ4>`; λ1 and λ4 share coordinate `r1`, λ2 and
//! λ3 share `r2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian axis of the isotropic oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which particle pair of a key: (λ1, λ4) share `r1`, (λ2, λ3) share `r2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairSel {
    P14,
    P23,
}

/// Oscillator quanta `(nx, ny, nz)` of one particle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantumTriple {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
}

impl QuantumTriple {
    pub const ZERO: QuantumTriple = QuantumTriple { nx: 0, ny: 0, nz: 0 };

    pub const fn new(nx: u32, ny: u32, nz: u32) -> Self {
        QuantumTriple { nx, ny, nz }
    }

    pub fn get(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        }
    }

    pub fn set(&mut self, axis: Axis, n: u32) {
        match axis {
            Axis::X => self.nx = n,
            Axis::Y => self.ny = n,
            Axis::Z => self.nz = n,
        }
    }

    pub fn total(&self) -> u32 {
        self.nx + self.ny + self.nz
    }

    pub fn max_component(&self) -> u32 {
        self.nx.max(self.ny).max(self.nz)
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.nx, self.ny, self.nz]
    }
}

impl fmt::Display for QuantumTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.nx, self.ny, self.nz)
    }
}

/// Identifies the matrix element `V^{λ1 λ2}_{λ3 λ4}`.
///
/// The derived ordering is the lexicographic order of the 12-integer tuple
/// `(n_x^1 n_y^1 n_z^1 n_x^2 ... n_z^4)`, which is also the command-line and
/// file order of the indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementKey {
    pub lambda1: QuantumTriple,
    pub lambda2: QuantumTriple,
    pub lambda3: QuantumTriple,
    pub lambda4: QuantumTriple,
}

impl ElementKey {
    pub const fn new(
        lambda1: QuantumTriple,
        lambda2: QuantumTriple,
        lambda3: QuantumTriple,
        lambda4: QuantumTriple,
    ) -> Self {
        ElementKey {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
        }
    }

    pub fn from_indices(n: [u32; 12]) -> Self {
        ElementKey {
            lambda1: QuantumTriple::new(n[0], n[1], n[2]),
            lambda2: QuantumTriple::new(n[3], n[4], n[5]),
            lambda3: QuantumTriple::new(n[6], n[7], n[8]),
            lambda4: QuantumTriple::new(n[9], n[10], n[11]),
        }
    }

    pub fn indices(&self) -> [u32; 12] {
        let [a, b, c, d] = self.particles();
        [
            a.nx, a.ny, a.nz, b.nx, b.ny, b.nz, c.nx, c.ny, c.nz, d.nx, d.ny, d.nz,
        ]
    }

    pub fn particles(&self) -> [QuantumTriple; 4] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
    }

    pub fn max_index(&self) -> u32 {
        self.indices().into_iter().max().unwrap_or(0)
    }

    /// The two indices of `pair` along `axis`, in particle order
    /// (λ1, λ4) or (λ2, λ3).
    pub fn pair_indices(&self, axis: Axis, pair: PairSel) -> (u32, u32) {
        match pair {
            PairSel::P14 => (self.lambda1.get(axis), self.lambda4.get(axis)),
            PairSel::P23 => (self.lambda2.get(axis), self.lambda3.get(axis)),
        }
    }

    /// Returns a copy with the `pair` indices along `axis` replaced.
    pub fn with_pair(mut self, axis: Axis, pair: PairSel, first: u32, second: u32) -> Self {
        match pair {
            PairSel::P14 => {
                self.lambda1.set(axis, first);
                self.lambda4.set(axis, second);
            }
            PairSel::P23 => {
                self.lambda2.set(axis, first);
                self.lambda3.set(axis, second);
            }
        }
        self
    }

    pub fn axis_pairs(&self, axis: Axis) -> (AxisPair, AxisPair) {
        let (a1, a4) = self.pair_indices(axis, PairSel::P14);
        let (a2, a3) = self.pair_indices(axis, PairSel::P23);
        (axis_pair(a1, a4), axis_pair(a2, a3))
    }
}

impl fmt::Display for ElementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} {} {} {}]",
            self.lambda1, self.lambda2, self.lambda3, self.lambda4
        )
    }
}

impl FromStr for ElementKey {
    type Err = Error;

    /// Twelve non-negative integers separated by whitespace and/or commas.
    fn from_str(s: &str) -> Result<Self> {
        let mut n = [0u32; 12];
        let mut count = 0;
        for tok in s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            if count == 12 {
                return Err(Error::InvalidArgument(
                    "more than 12 indices in element key".into(),
                ));
            }
            n[count] = tok.parse().map_err(|_| {
                Error::InvalidArgument(format!("index {tok:?} is not a non-negative integer"))
            })?;
            count += 1;
        }
        if count != 12 {
            return Err(Error::InvalidArgument(format!(
                "element key needs 12 indices, got {count}"
            )));
        }
        Ok(ElementKey::from_indices(n))
    }
}

/// Ordered decomposition `(n_minus, n_plus)` of one particle pair along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AxisPair {
    pub n_minus: u32,
    pub n_plus: u32,
    pub diff: u32,
}

pub fn axis_pair(na: u32, nb: u32) -> AxisPair {
    let (n_minus, n_plus) = if na <= nb { (na, nb) } else { (nb, na) };
    AxisPair {
        n_minus,
        n_plus,
        diff: n_plus - n_minus,
    }
}

/// `s_i` for one axis, or `None` when the parity sum is odd and the element vanishes.
pub type AxisParity = Option<u32>;

/// Per-axis half parity sums `s_i = (|n_i^1 - n_i^4| + |n_i^2 - n_i^3|) / 2`.
pub fn selection_rule(key: &ElementKey) -> [AxisParity; 3] {
    Axis::ALL.map(|axis| {
        let (p14, p23) = key.axis_pairs(axis);
        let sum = p14.diff + p23.diff;
        (sum % 2 == 0).then_some(sum / 2)
    })
}

/// Whether the selection rule lets the element be nonzero.
pub fn allowed(key: &ElementKey) -> bool {
    selection_rule(key).iter().all(Option::is_some)
}

/// Canonical representative of a key's symmetry orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalKey {
    pub key: ElementKey,
    /// Number of distinct keys in the orbit (1, 2, 4 or 8).
    pub orbit_size: u8,
}

/// All keys related to `key` by λ1↔λ4, λ2↔λ3 and the exchange of the
/// (1,4) and (2,3) pairs. Duplicates are kept.
pub fn orbit(key: &ElementKey) -> [ElementKey; 8] {
    let ElementKey {
        lambda1: a,
        lambda2: b,
        lambda3: c,
        lambda4: d,
    } = *key;
    let mut out = [*key; 8];
    let mut i = 0;
    for (p, q) in [(a, d), (d, a)] {
        for (r, s) in [(b, c), (c, b)] {
            out[i] = ElementKey::new(p, r, s, q);
            out[i + 1] = ElementKey::new(r, p, q, s);
            i += 2;
        }
    }
    out
}

/// Lexicographically smallest member of the orbit, with the orbit size.
pub fn canonical_key(key: &ElementKey) -> CanonicalKey {
    let mut members = orbit(key);
    members.sort_unstable();
    let mut distinct = 1u8;
    for w in members.windows(2) {
        if w[0] != w[1] {
            distinct += 1;
        }
    }
    CanonicalKey {
        key: members[0],
        orbit_size: distinct,
    }
}

pub fn is_canonical(key: &ElementKey) -> bool {
    orbit(key).iter().all(|k| key <= k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(n: [u32; 12]) -> ElementKey {
        ElementKey::from_indices(n)
    }

    #[test]
    fn axis_pair_examples() {
        assert_eq!(axis_pair(3, 1), AxisPair { n_minus: 1, n_plus: 3, diff: 2 });
        assert_eq!(axis_pair(2, 2), AxisPair { n_minus: 2, n_plus: 2, diff: 0 });
        assert_eq!(axis_pair(0, 5), AxisPair { n_minus: 0, n_plus: 5, diff: 5 });
    }

    #[test]
    fn axis_pair_symmetric() {
        for a in 0..=16 {
            for b in 0..=16 {
                assert_eq!(axis_pair(a, b), axis_pair(b, a));
            }
        }
    }

    #[test]
    fn selection_rule_examples() {
        assert_eq!(selection_rule(&key([0; 12])), [Some(0), Some(0), Some(0)]);

        let mut n = [0; 12];
        n[0] = 1;
        assert_eq!(selection_rule(&key(n))[0], None);

        // n_x^1 = 1, n_x^3 = 1
        let mut n = [0; 12];
        n[0] = 1;
        n[6] = 1;
        assert_eq!(selection_rule(&key(n)), [Some(1), Some(0), Some(0)]);
    }

    #[test]
    fn selection_rule_parity_exhaustive() {
        // one axis at a time is enough: the rule is per axis
        for a in 0..=4u32 {
            for b in 0..=4 {
                for c in 0..=4 {
                    for d in 0..=4 {
                        let k = key([a, 0, 0, b, 0, 0, c, 0, 0, d, 0, 0]);
                        let odd = (a.abs_diff(d) + b.abs_diff(c)) % 2 == 1;
                        assert_eq!(selection_rule(&k)[0].is_none(), odd);
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_fixed_point() {
        let t = QuantumTriple::new(1, 2, 0);
        let k = ElementKey::new(t, t, t, t);
        let c = canonical_key(&k);
        assert_eq!(c.key, k);
        assert_eq!(c.orbit_size, 1);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let k: ElementKey = "1 0 0, 0 2 0 0 0 3 4 0 0".parse().unwrap();
        assert_eq!(k.indices(), [1, 0, 0, 0, 2, 0, 0, 0, 3, 4, 0, 0]);
        assert!("1 2 3".parse::<ElementKey>().is_err());
        assert!("0 0 0 0 0 0 0 0 0 0 0 -1".parse::<ElementKey>().is_err());
        assert!("0 0 0 0 0 0 0 0 0 0 0 0 0".parse::<ElementKey>().is_err());
    }

    fn arb_key(max: u32) -> impl Strategy<Value = ElementKey> {
        prop::array::uniform12(0..=max).prop_map(ElementKey::from_indices)
    }

    proptest! {
        #[test]
        fn canonical_idempotent(k in arb_key(5)) {
            let c = canonical_key(&k);
            prop_assert_eq!(canonical_key(&c.key), c);
            prop_assert!(is_canonical(&c.key));
            prop_assert!(c.key <= k);
        }

        #[test]
        fn orbit_members_share_canonical(k in arb_key(4)) {
            let c = canonical_key(&k);
            for m in orbit(&k) {
                prop_assert_eq!(canonical_key(&m), c);
            }
        }

        #[test]
        fn selection_rule_is_orbit_invariant(k in arb_key(4)) {
            let rule = selection_rule(&k);
            for m in orbit(&k) {
                prop_assert_eq!(selection_rule(&m), rule);
            }
        }

        #[test]
        fn display_parse_roundtrip(k in arb_key(255)) {
            let text = k.indices().map(|n| n.to_string()).join(" ");
            prop_assert_eq!(text.parse::<ElementKey>().unwrap(), k);
        }
    }
}
