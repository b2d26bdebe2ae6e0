//! Families of elements from integer-coefficient recurrences.
//!
//! Fix every index except one axis-pair `{n^j, n^k}` and write
//! `(n-, n+)` for its ordered values. In terms of the unnormalized element
//! `V̄ = V · Π_j (2^{n_x^j} n_x^j! 2^{n_y^j} n_y^j! 2^{n_z^j} n_z^j!)^{1/2}`
//!
//! ```text
//! V̄(n- + 1, n+) = V̄(n-, n+ + 1) + 2 n+ V̄(n-, n+ - 1) - 2 n- V̄(n- - 1, n+)
//! ```
//!
//! so a family is determined by its `n- = 0` row. [`build_family`] computes
//! that row with the closed form and fills the rest with one O(1) step per
//! entry.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::closed_form::{Backend, ClosedForm, ElementValue, ExactElement};
use crate::error::{Error, Result};
use crate::index::{Axis, ElementKey, PairSel};

/// Scalar carried through the unnormalized recurrences.
///
/// `f64` values include the `√(2/π)/a` prefactor; `BigRational` values are
/// the exact coefficient of `√(2/π)/a`.
pub trait RecurrenceScalar: Clone + Debug + PartialEq + Send + Sync {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul_int(&self, c: u64) -> Self;

    /// `V̄` for `key` from a closed-form value of the matching backend.
    fn unnormalize(value: &ElementValue, key: &ElementKey) -> Result<Self>;

    /// Back to the normalized element for `key`.
    fn normalize(&self, key: &ElementKey, cf: &ClosedForm) -> ElementValue;
}

/// `Π_{axis, pair} 2^{n+} n-!`, the exact ratio `V̄ / (coefficient · √(2/π)/a)`.
pub fn unnormalization_factor(key: &ElementKey) -> BigInt {
    let mut acc = BigInt::from(1);
    for axis in Axis::ALL {
        let (p14, p23) = key.axis_pairs(axis);
        for p in [p14, p23] {
            acc *= (2..=p.n_minus).fold(BigInt::from(1), |f, k| f * k);
            acc <<= p.n_plus as usize;
        }
    }
    acc
}

/// `Π_j (2^{n_j} n_j!)^{1/2}` over all twelve indices, in floating point.
pub fn unnormalization_factor_f64(key: &ElementKey) -> f64 {
    key.indices()
        .iter()
        .map(|&n| (1..=n).map(|k| 2.0 * k as f64).product::<f64>().sqrt())
        .product()
}

impl RecurrenceScalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        0.0
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_int(&self, c: u64) -> Self {
        self * c as f64
    }

    fn unnormalize(value: &ElementValue, key: &ElementKey) -> Result<Self> {
        let v = value.value * unnormalization_factor_f64(key);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { key: *key })
        }
    }

    fn normalize(&self, key: &ElementKey, _cf: &ClosedForm) -> ElementValue {
        ElementValue {
            value: self / unnormalization_factor_f64(key),
            exact: None,
        }
    }
}

impl RecurrenceScalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Zero::zero()
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_int(&self, c: u64) -> Self {
        self * BigRational::from_integer(BigInt::from(c))
    }

    fn unnormalize(value: &ElementValue, key: &ElementKey) -> Result<Self> {
        let exact = value.exact.as_ref().ok_or_else(|| {
            Error::InvalidArgument("exact recurrence needs exact-backend seeds".into())
        })?;
        Ok(&exact.coefficient * BigRational::from_integer(unnormalization_factor(key)))
    }

    fn normalize(&self, key: &ElementKey, cf: &ClosedForm) -> ElementValue {
        if self.is_zero() {
            return ElementValue::zero(Backend::Exact);
        }
        let coefficient = self / BigRational::from_integer(unnormalization_factor(key));
        let mut radicand = BigRational::from_integer(BigInt::from(1));
        for axis in Axis::ALL {
            let (p14, p23) = key.axis_pairs(axis);
            for p in [p14, p23] {
                radicand *= cf.tables().pair_norm_squared(p.n_minus, p.n_plus);
            }
        }
        let exact = ExactElement {
            coefficient,
            radicand,
        };
        ElementValue {
            value: exact.to_f64() / cf.scale().a(),
            exact: Some(exact),
        }
    }
}

/// Normalized step: `V(n-, n+)` from `V(n- - 1, n+ + 1)`, `V(n- - 1, n+ - 1)`
/// and `V(n- - 2, n+)`, all at the same remaining indices.
///
/// The third neighbour enters with weight `√((n- - 1)/n-)` and is ignored
/// when `n- = 1`.
pub fn recur_step_normalized(n_minus: u32, n_plus: u32, neighbors: [f64; 3]) -> Result<f64> {
    if n_minus == 0 {
        return Err(Error::InvalidArgument("normalized step needs n_minus > 0".into()));
    }
    if n_plus < n_minus {
        return Err(Error::InvalidArgument(format!(
            "normalized step needs n_plus >= n_minus, got ({n_minus}, {n_plus})"
        )));
    }
    let m = n_minus as f64;
    let p = n_plus as f64;
    let [up, down, back] = neighbors;
    let mut v = ((p + 1.0) / m).sqrt() * up + (p / m).sqrt() * down;
    if n_minus > 1 {
        v -= ((m - 1.0) / m).sqrt() * back;
    }
    Ok(v)
}

/// Unnormalized step producing `V̄(n- + 1, n+)`.
///
/// * `next_plus` is `V̄(n-, n+ + 1)`
/// * `prev_plus` is `V̄(n-, n+ - 1)`, required when `n+ > 0`
/// * `prev_minus` is `V̄(n- - 1, n+)`, required when `n- > 0`
pub fn recur_step_unnormalized<T: RecurrenceScalar>(
    n_minus: u32,
    n_plus: u32,
    next_plus: &T,
    prev_plus: Option<&T>,
    prev_minus: Option<&T>,
) -> Result<T> {
    let mut v = next_plus.clone();
    if n_plus > 0 {
        let pp = prev_plus.ok_or(Error::MissingNeighbor {
            n_minus,
            n_plus: n_plus - 1,
        })?;
        v = v.add(&pp.mul_int(2 * n_plus as u64));
    }
    if n_minus > 0 {
        let pm = prev_minus.ok_or(Error::MissingNeighbor {
            n_minus: n_minus - 1,
            n_plus,
        })?;
        v = v.sub(&pm.mul_int(2 * n_minus as u64));
    }
    Ok(v)
}

/// Target of the four-index relation along one axis,
///
/// ```text
/// V̄_{0, m-}^{n+, m+ + 1} = -V̄_{0, m-}^{n+ + 1, m+} + 2 m- V̄_{0, m- - 1}^{n+, m+}
/// ```
///
/// where one pair holds `{0, n+}` and the other `{m-, m+ + 1}`. It moves one
/// quantum from the second pair to the first: with a zero index the first
/// pair's Fourier transform gains a factor `-iq` per quantum, and the second
/// pair obeys `D̄_{m, M+1} = iq D̄_{m, M} + 2m D̄_{m-1, M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourIndexShape {
    pub axis: Axis,
    /// The pair holding `{0, n+}`.
    pub zero_pair: PairSel,
    pub n_plus: u32,
    pub m_minus: u32,
    pub m_plus: u32,
    target: ElementKey,
}

impl FourIndexShape {
    pub fn from_key(key: &ElementKey, axis: Axis, zero_pair: PairSel) -> Result<Self> {
        let other = match zero_pair {
            PairSel::P14 => PairSel::P23,
            PairSel::P23 => PairSel::P14,
        };
        let (z1, z2) = key.pair_indices(axis, zero_pair);
        let (o1, o2) = key.pair_indices(axis, other);
        if z1.min(z2) != 0 || o1.max(o2) == 0 {
            return Err(Error::ShapeMismatch { key: *key });
        }
        Ok(FourIndexShape {
            axis,
            zero_pair,
            n_plus: z1.max(z2),
            m_minus: o1.min(o2),
            m_plus: o1.max(o2) - 1,
            target: *key,
        })
    }

    fn other(&self) -> PairSel {
        match self.zero_pair {
            PairSel::P14 => PairSel::P23,
            PairSel::P23 => PairSel::P14,
        }
    }

    pub fn target(&self) -> ElementKey {
        self.target
    }

    /// `V̄_{0, m-}^{n+ + 1, m+}`.
    pub fn transfer_key(&self) -> ElementKey {
        let (z1, z2) = self.target.pair_indices(self.axis, self.zero_pair);
        let (o1, o2) = self.target.pair_indices(self.axis, self.other());
        let (z1, z2) = if z1 >= z2 { (z1 + 1, z2) } else { (z1, z2 + 1) };
        let (o1, o2) = if o1 >= o2 { (o1 - 1, o2) } else { (o1, o2 - 1) };
        self.target
            .with_pair(self.axis, self.zero_pair, z1, z2)
            .with_pair(self.axis, self.other(), o1, o2)
    }

    /// `V̄_{0, m- - 1}^{n+, m+}`, absent when `m- = 0`.
    pub fn lowered_key(&self) -> Option<ElementKey> {
        if self.m_minus == 0 {
            return None;
        }
        let (o1, o2) = self.target.pair_indices(self.axis, self.other());
        Some(self.target.with_pair(self.axis, self.other(), o1 - 1, o2 - 1))
    }
}

/// Four-index step: `-transfer + 2 m- lowered`, the second term absent when
/// `m- = 0`.
pub fn recur_step_four_index<T: RecurrenceScalar>(
    shape: &FourIndexShape,
    transfer: &T,
    lowered: Option<&T>,
) -> Result<T> {
    let minus = T::zero().sub(transfer);
    if shape.m_minus == 0 {
        return Ok(minus);
    }
    let low = lowered.ok_or(Error::MissingNeighbor {
        n_minus: shape.m_minus - 1,
        n_plus: shape.m_plus,
    })?;
    Ok(minus.add(&low.mul_int(2 * shape.m_minus as u64)))
}

/// Which pair along which axis a family varies, and the fixed remaining
/// indices (the varied pair's entries in `template` are ignored).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub axis: Axis,
    pub pair: PairSel,
    pub template: ElementKey,
}

impl FamilySpec {
    pub fn new(axis: Axis, pair: PairSel, template: ElementKey) -> Self {
        FamilySpec {
            axis,
            pair,
            template: template.with_pair(axis, pair, 0, 0),
        }
    }

    /// Family member with the varied pair set to `(first, second)` in
    /// particle order.
    pub fn key(&self, first: u32, second: u32) -> ElementKey {
        self.template.with_pair(self.axis, self.pair, first, second)
    }
}

/// Completed family: unnormalized values for all `n- <= n+ <= n_max`.
#[derive(Clone, Debug)]
pub struct RecurrenceFrontier<T> {
    spec: FamilySpec,
    n_max: u32,
    entries: BTreeMap<(u32, u32), T>,
    seed_count: usize,
}

impl<T: RecurrenceScalar> RecurrenceFrontier<T> {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of closed-form evaluations used to seed the family.
    pub fn seed_count(&self) -> usize {
        self.seed_count
    }

    /// `V̄` for the pair `{a, b}` in either order.
    pub fn get(&self, a: u32, b: u32) -> Option<&T> {
        self.entries.get(&(a.min(b), a.max(b)))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), &T)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// Normalized element for the pair `(first, second)` in particle order.
    pub fn normalized(&self, first: u32, second: u32, cf: &ClosedForm) -> Option<ElementValue> {
        self.get(first, second)
            .map(|v| v.normalize(&self.spec.key(first, second), cf))
    }
}

/// Builds the family `spec` for `n- <= n+ <= n_max`.
///
/// Seeds are the `n- = 0` row up to `n+ = 2·n_max`, the width needed by the
/// dependency cone of the step; all other entries come from
/// [`recur_step_unnormalized`].
pub fn build_family<T: RecurrenceScalar>(
    cf: &ClosedForm,
    spec: FamilySpec,
    n_max: u32,
) -> Result<RecurrenceFrontier<T>> {
    let width = 2 * n_max;
    let mut work: HashMap<(u32, u32), T> = HashMap::new();
    for b in 0..=width {
        let key = spec.key(0, b);
        let v = cf.element(&key, T::BACKEND).map_err(|e| e.at(key))?;
        work.insert((0, b), T::unnormalize(&v, &key).map_err(|e| e.at(key))?);
    }
    for a in 0..n_max {
        for b in (a + 1)..=(width - a - 1) {
            let next_plus = work.get(&(a, b + 1)).ok_or(Error::MissingNeighbor { n_minus: a, n_plus: b + 1 })?;
            let v = recur_step_unnormalized(
                a,
                b,
                next_plus,
                work.get(&(a, b - 1)),
                a.checked_sub(1).and_then(|am| work.get(&(am, b))),
            )?;
            work.insert((a + 1, b), v);
        }
    }
    let entries = work
        .into_iter()
        .filter(|&((m, p), _)| m <= p && p <= n_max)
        .collect();
    Ok(RecurrenceFrontier {
        spec,
        n_max,
        entries,
        seed_count: width as usize + 1,
    })
}

/// Normalized family built with the square-root step
/// [`recur_step_normalized`]; values include the `√(2/π)/a` prefactor.
pub fn build_family_normalized(
    cf: &ClosedForm,
    spec: FamilySpec,
    n_max: u32,
) -> Result<BTreeMap<(u32, u32), f64>> {
    let width = 2 * n_max;
    let mut work: HashMap<(u32, u32), f64> = HashMap::new();
    for b in 0..=width {
        let key = spec.key(0, b);
        work.insert((0, b), cf.element(&key, Backend::Float).map_err(|e| e.at(key))?.value);
    }
    for m in 1..=n_max {
        for p in m..=(width - m) {
            let get = |a: u32, b: u32| {
                work.get(&(a, b))
                    .copied()
                    .ok_or(Error::MissingNeighbor { n_minus: a, n_plus: b })
            };
            let back = if m >= 2 { get(m - 2, p)? } else { 0.0 };
            let v = recur_step_normalized(m, p, [get(m - 1, p + 1)?, get(m - 1, p - 1)?, back])?;
            work.insert((m, p), v);
        }
    }
    Ok(work
        .into_iter()
        .filter(|&((m, p), _)| m <= p && p <= n_max)
        .collect())
}

/// `f64` view of an exact unnormalized value, for diagnostics.
pub fn exact_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
