//! Timing of one recurrence family against direct evaluation of the same
//! elements.

use std::time::Instant;

use serde::Serialize;

use crate::closed_form::{Backend, ClosedForm, OscillatorScale};
use crate::error::{Error, Result};
use crate::index::{Axis, ElementKey, PairSel};
use crate::recurrence::{build_family, FamilySpec};

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub n_max: u32,
    pub repetitions: usize,
    /// Elements in the family (`n- <= n+ <= n_max`).
    pub family_size: usize,
    /// Median wall time per repetition, nanoseconds.
    pub direct_ns: u128,
    pub recurrence_ns: u128,
    /// `direct_ns / recurrence_ns`.
    pub ratio: f64,
    /// Largest relative difference between the two results.
    pub max_rel_diff: f64,
}

fn median(mut v: Vec<u128>) -> u128 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Times the x-axis `(λ1, λ4)` family over the ground-state template on the
/// float backend. Both sides start from an evaluator without per-axis
/// caches, so each repetition pays for all the closed-form work it does.
pub fn bench_family(n_max: u32, repetitions: usize) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    let scale = OscillatorScale::unit();
    let spec = FamilySpec::new(Axis::X, PairSel::P14, ElementKey::default());
    let members: Vec<(u32, u32)> = (0..=n_max)
        .flat_map(|p| (0..=p).map(move |m| (m, p)))
        .collect();

    let mut direct_times = Vec::with_capacity(repetitions);
    let mut recurrence_times = Vec::with_capacity(repetitions);
    let mut direct = Vec::new();
    let mut max_rel_diff: f64 = 0.0;
    for _ in 0..repetitions {
        let cf = ClosedForm::uncached(scale, 2 * n_max);
        let start = Instant::now();
        direct = members
            .iter()
            .map(|&(m, p)| cf.element(&spec.key(m, p), Backend::Float).map(|v| v.value))
            .collect::<Result<Vec<_>>>()?;
        direct_times.push(start.elapsed().as_nanos());

        let cf = ClosedForm::uncached(scale, 2 * n_max);
        let start = Instant::now();
        let family = build_family::<f64>(&cf, spec, n_max)?;
        let values: Vec<f64> = members
            .iter()
            .map(|&(m, p)| family.normalized(m, p, &cf).map(|v| v.value).unwrap_or(f64::NAN))
            .collect();
        recurrence_times.push(start.elapsed().as_nanos());

        for (d, r) in direct.iter().zip(&values) {
            if *d != 0.0 {
                max_rel_diff = max_rel_diff.max((d - r).abs() / d.abs());
            }
        }
    }
    let direct_ns = median(direct_times);
    let recurrence_ns = median(recurrence_times).max(1);
    Ok(BenchReport {
        n_max,
        repetitions,
        family_size: direct.len(),
        direct_ns,
        recurrence_ns,
        ratio: direct_ns as f64 / recurrence_ns as f64,
        max_rel_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape() {
        let r = bench_family(3, 2).unwrap();
        assert_eq!(r.family_size, 10);
        assert!(r.direct_ns > 0);
        assert!(r.max_rel_diff < 1e-12);
        assert!(serde_json::to_string(&r).unwrap().contains("\"ratio\""));
        assert!(bench_family(3, 0).is_err());
    }
}
