use super::*;
use crate::index::{orbit, QuantumTriple};
use proptest::prelude::*;

fn key(n: [u32; 12]) -> ElementKey {
    ElementKey::from_indices(n)
}

fn exact(k: &ElementKey) -> ElementValue {
    element_direct(k, OscillatorScale::unit(), Backend::Exact).unwrap()
}

fn float(k: &ElementKey) -> ElementValue {
    element_direct(k, OscillatorScale::unit(), Backend::Float).unwrap()
}

/// Reference values from an independent NumPy evaluation of the defining
/// six-dimensional integral (Gaussian transform of 1/r12, rotated
/// Gauss-Hermite grids, Gauss-Legendre in the transform variable), a = 1.
const GOLDEN: &[([u32; 12], f64)] = &[
    ([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 0.7978845608028655),
    ([1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0], 0.6649038006690551),
    ([1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0], 0.1329807601338105),
    ([2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], -0.094031597257959),
    ([0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0], 0.1329807601338105),
    ([2, 1, 0, 0, 1, 1, 1, 0, 1, 1, 2, 0], 0.01378380119244133),
    ([3, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0], -0.04886025119029158),
    ([2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2], 0.3574590602986947),
    ([1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1], 0.5043770259360982),
    ([4, 0, 1, 0, 3, 0, 2, 1, 1, 0, 2, 0], -0.0014984310411712187),
];

#[test]
fn ground_state_is_sqrt_two_over_pi() {
    let v = exact(&key([0; 12]));
    assert!((v.value - 0.797884560802865).abs() < 1e-12);
    let e = v.exact.unwrap();
    assert_eq!(e.coefficient, BigRational::from_integer(1.into()));
    assert_eq!(e.radicand, BigRational::from_integer(1.into()));
}

#[test]
fn golden_values() {
    for &(n, expected) in GOLDEN {
        let k = key(n);
        let e = exact(&k).value;
        let f = float(&k).value;
        assert!(rel_diff(e, expected) < 1e-12, "{k}: exact {e} vs {expected}");
        assert!(rel_diff(f, expected) < 1e-12, "{k}: float {f} vs {expected}");
    }
}

#[test]
fn v11_exact_form() {
    // n_x^1 = n_x^4 = 1: coefficient 5/6 with unit radicand
    let e = exact(&key([1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0])).exact.unwrap();
    assert_eq!(e.coefficient, BigRational::new(5.into(), 6.into()));
    assert_eq!(e.radicand, BigRational::from_integer(1.into()));
}

#[test]
fn selection_rule_zero_is_exact() {
    let k = key([1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    let v = exact(&k);
    assert!(v.is_zero());
    assert_eq!(v.value, 0.0);
    assert_eq!(float(&k).value, 0.0);
}

#[test]
fn scale_law() {
    let k = key([2, 1, 0, 0, 1, 1, 1, 0, 1, 1, 2, 0]);
    let base = exact(&k).value;
    for a in [0.5, 1.0, 2.0, 7.3] {
        let s = OscillatorScale::new(a).unwrap();
        for backend in [Backend::Exact, Backend::Float] {
            let v = element_direct(&k, s, backend).unwrap().value;
            assert!(rel_diff(v * a, base) < 4.0 * f64::EPSILON, "a={a} {backend}");
        }
    }
}

#[test]
fn bad_scale_rejected() {
    assert!(OscillatorScale::new(0.0).is_err());
    assert!(OscillatorScale::new(-1.0).is_err());
    assert!(OscillatorScale::new(f64::NAN).is_err());
    assert!(OscillatorScale::new(f64::INFINITY).is_err());
}

#[test]
fn diagonal_positive() {
    for a in [QuantumTriple::new(0, 0, 0), QuantumTriple::new(2, 1, 0), QuantumTriple::new(3, 3, 1)] {
        for b in [QuantumTriple::new(0, 0, 1), QuantumTriple::new(1, 2, 2), QuantumTriple::new(4, 0, 0)] {
            let k = ElementKey::new(a, b, b, a);
            assert!(exact(&k).value > 0.0, "{k}");
        }
    }
}

#[test]
fn batch_matches_sequential() {
    assert!(element_batch(&[], OscillatorScale::unit(), Backend::Float).unwrap().is_empty());

    let k = key([1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0]);
    let pair = element_batch(&[k, k], OscillatorScale::unit(), Backend::Exact).unwrap();
    assert_eq!(pair[0], pair[1]);
    assert_eq!(pair[0], exact(&k));

    let keys: Vec<_> = (0..100u32)
        .map(|i| {
            let mut n = [0u32; 12];
            for (j, slot) in n.iter_mut().enumerate() {
                *slot = (i * 7 + j as u32 * 13 + (i * j as u32) % 5) % 4;
            }
            key(n)
        })
        .collect();
    let batch = element_batch(&keys, OscillatorScale::unit(), Backend::Float).unwrap();
    for (k, v) in keys.iter().zip(&batch) {
        assert_eq!(v.value, float(k).value, "{k}");
    }
}

#[test]
fn cached_and_uncached_agree() {
    let cached = ClosedForm::new(OscillatorScale::unit(), 3);
    for n in [[3, 1, 0, 2, 2, 1, 1, 0, 3, 0, 1, 2], [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0]] {
        let k = key(n);
        assert_eq!(cached.element(&k, Backend::Exact).unwrap(), exact(&k));
    }
}

#[test]
fn float_tracks_exact_at_index_eight() {
    let t = QuantumTriple::new(8, 8, 8);
    let k = ElementKey::new(t, t, t, t);
    let e = exact(&k).value;
    let f = float(&k).value;
    assert!(rel_diff(f, e) < 1e-12, "{f} vs {e}");
}

fn arb_key(max: u32) -> impl Strategy<Value = ElementKey> {
    prop::array::uniform12(0..=max).prop_map(ElementKey::from_indices)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_agrees_with_exact(k in arb_key(3)) {
        let e = exact(&k).value;
        let f = float(&k).value;
        prop_assert!(rel_diff(f, e) <= 1e-12, "{} vs {}", f, e);
    }

    #[test]
    fn orbit_values_identical(k in arb_key(3)) {
        let base = exact(&k).exact.unwrap();
        for m in orbit(&k) {
            prop_assert_eq!(&exact(&m).exact.unwrap(), &base);
        }
    }

    #[test]
    fn odd_parity_gives_exact_zero(mut n in prop::array::uniform12(0u32..=5), axis in 0usize..3) {
        // force an odd parity sum on one axis
        let sum = n[axis].abs_diff(n[9 + axis]) + n[3 + axis].abs_diff(n[6 + axis]);
        if sum % 2 == 0 {
            n[axis] += 1;
        }
        let k = ElementKey::from_indices(n);
        prop_assert_eq!(float(&k).value, 0.0);
        prop_assert!(exact(&k).is_zero());
    }
}
