//! Comparison of closed-form values against the quadrature oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{Backend, ClosedForm, OscillatorScale};
use crate::error::Result;
use crate::index::ElementKey;
use crate::oracle::{QuadratureOracle, QuadratureSpec};

pub const DEFAULT_THRESHOLD: f64 = 1e-8;
/// Oracle magnitude below which an element counts as vanishing.
pub const ZERO_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct ValidationRow {
    pub key: ElementKey,
    pub closed_form: f64,
    pub oracle: f64,
    pub oracle_error: f64,
    /// `|closed - oracle| / |oracle|`, or `|closed - oracle|` for vanishing
    /// oracle values.
    pub rel_error: f64,
    pub sign_ok: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub threshold: f64,
    pub checked: usize,
    pub failures: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

/// Compares one pair of values under the acceptance rules.
pub fn compare(key: ElementKey, closed_form: f64, oracle: f64, oracle_error: f64, threshold: f64) -> ValidationRow {
    let vanishing = oracle.abs() < ZERO_TOLERANCE;
    let rel_error = if vanishing {
        (closed_form - oracle).abs()
    } else {
        (closed_form - oracle).abs() / oracle.abs()
    };
    let sign_ok = vanishing || closed_form.signum() == oracle.signum();
    let passed = if vanishing {
        closed_form.abs() < ZERO_TOLERANCE
    } else {
        sign_ok && rel_error <= threshold
    };
    ValidationRow {
        key,
        closed_form,
        oracle,
        oracle_error,
        rel_error,
        sign_ok,
        passed,
    }
}

/// Validates `keys` against `oracle` using an arbitrary closed-form
/// evaluator. Oracle failures (non-convergence) are returned as errors.
pub fn validate_with<F>(keys: &[ElementKey], oracle: &QuadratureOracle, threshold: f64, closed_form: F) -> Result<ValidationReport>
where
    F: Fn(&ElementKey) -> Result<f64> + Sync,
{
    let rows = keys
        .par_iter()
        .map(|k| {
            let c = closed_form(k).map_err(|e| e.at(*k))?;
            let o = oracle.element(k)?;
            Ok(compare(*k, c, o.value, o.error_estimate, threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = rows.iter().filter(|r| !r.passed).count();
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let mean_rel_error = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.rel_error).sum::<f64>() / rows.len() as f64
    };
    Ok(ValidationReport {
        threshold,
        checked: rows.len(),
        failures,
        max_rel_error,
        mean_rel_error,
        rows,
    })
}

/// Validates `keys` with the closed form on `backend`. With `sign_flip` set
/// every closed-form value is negated, which must make validation fail.
pub fn validate_keys(keys: &[ElementKey], scale: OscillatorScale, backend: Backend, sign_flip: bool) -> Result<ValidationReport> {
    let max = keys.iter().map(ElementKey::max_index).max().unwrap_or(0);
    let oracle = QuadratureOracle::new(scale, QuadratureSpec::for_max_index(max), max);
    let cf = ClosedForm::new(scale, max);
    let sign = if sign_flip { -1.0 } else { 1.0 };
    validate_with(keys, &oracle, DEFAULT_THRESHOLD, |k| Ok(sign * cf.element(k, backend)?.value))
}

/// All `(max_index + 1)^12` keys in ascending order.
pub fn exhaustive_keys(max_index: u32) -> impl Iterator<Item = ElementKey> {
    let n = max_index as u64 + 1;
    (0..n.pow(12)).map(move |mut i| {
        let mut idx = [0u32; 12];
        for slot in idx.iter_mut().rev() {
            *slot = (i % n) as u32;
            i /= n;
        }
        ElementKey::from_indices(idx)
    })
}

/// `count` keys with every index uniform in `0..=max_index`, reproducible
/// from `seed`.
pub fn random_keys(count: usize, max_index: u32, seed: u64) -> Vec<ElementKey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ElementKey::from_indices(std::array::from_fn(|_| rng.random_range(0..=max_index))))
        .collect()
}

/// Float-versus-exact comparison at one maximum index.
#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub max_index: u32,
    pub keys: usize,
    pub max_rel_error: f64,
    pub worst_key: ElementKey,
}

/// Keys probed by the cancellation audit at index `n`: the uniform key, the
/// key with `(n, n, n)` on one pair and the ground state on the other, and
/// `samples` random keys whose largest index is exactly `n`.
pub fn audit_keys(n: u32, samples: usize, seed: u64) -> Vec<ElementKey> {
    use crate::index::QuantumTriple;
    let full = QuantumTriple::new(n, n, n);
    let mut keys = vec![
        ElementKey::new(full, full, full, full),
        ElementKey::new(full, QuantumTriple::ZERO, QuantumTriple::ZERO, full),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    while keys.len() < samples + 2 {
        let mut idx: [u32; 12] = std::array::from_fn(|_| rng.random_range(0..=n));
        idx[rng.random_range(0..12)] = n;
        let k = ElementKey::from_indices(idx);
        if crate::index::allowed(&k) {
            keys.push(k);
        }
    }
    keys
}

/// Relative deviation of the float backend from the exact one for
/// `max_index = 0..=up_to`.
pub fn cancellation_audit(up_to: u32, samples: usize, seed: u64) -> Result<Vec<AuditRow>> {
    (0..=up_to)
        .map(|n| {
            let keys = audit_keys(n, samples, seed);
            let cf = ClosedForm::new(OscillatorScale::unit(), n);
            let errs = keys
                .par_iter()
                .map(|k| {
                    let e = cf.element(k, Backend::Exact)?.value;
                    let f = match cf.element(k, Backend::Float) {
                        Ok(v) => v.value,
                        Err(crate::Error::Overflow { .. }) => f64::INFINITY,
                        Err(err) => return Err(err),
                    };
                    Ok((crate::closed_form::rel_diff(f, e), *k))
                })
                .collect::<Result<Vec<_>>>()?;
            let (max_rel_error, worst_key) = errs
                .into_iter()
                .fold((0.0, ElementKey::default()), |acc, x| if x.0 > acc.0 { x } else { acc });
            Ok(AuditRow {
                max_index: n,
                keys: keys.len(),
                max_rel_error,
                worst_key,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_order_and_count() {
        let keys: Vec<_> = exhaustive_keys(1).collect();
        assert_eq!(keys.len(), 4096);
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(keys[1].indices()[11], 1);
    }

    #[test]
    fn random_keys_reproducible() {
        let a = random_keys(20, 4, 7);
        assert_eq!(a, random_keys(20, 4, 7));
        assert_ne!(a, random_keys(20, 4, 8));
        assert!(a.iter().all(|k| k.max_index() <= 4));
    }

    #[test]
    fn compare_rules() {
        let k = ElementKey::default();
        assert!(compare(k, 1.0, 1.0 + 1e-12, 0.0, 1e-8).passed);
        assert!(!compare(k, 1.0, 1.0 + 1e-6, 0.0, 1e-8).passed);
        assert!(!compare(k, -1.0, 1.0, 0.0, 1e-8).passed);
        assert!(compare(k, 0.0, 3e-14, 0.0, 1e-8).passed);
        assert!(!compare(k, 1e-3, 3e-14, 0.0, 1e-8).passed);
    }

    #[test]
    fn small_validation_passes_and_sign_flip_fails() {
        let keys = random_keys(40, 2, 1);
        let ok = validate_keys(&keys, OscillatorScale::unit(), Backend::Exact, false).unwrap();
        assert!(ok.passed(), "{:?}", ok.failing_rows().next());
        assert!(ok.max_rel_error < 1e-10);
        let bad = validate_keys(&keys, OscillatorScale::unit(), Backend::Exact, true).unwrap();
        assert!(!bad.passed());
    }
}
