use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::dd::DoubleDouble;
use crate::combinatorics::CombTables;
use crate::error::{Error, Result};
use crate::index::AxisPair;

/// One `(k, k')` term of a single-axis double sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisTerm {
    pub k: u32,
    pub k_prime: u32,
    pub coefficient: BigRational,
}

/// The single-axis double sum as a list of `(k, k', coefficient)` terms.
///
/// `coefficient = (-1)^(k+k') / (k! k'!) · C(n+14, n-14 - k) · C(n+23, n-23 - k')
/// · (2s + 2k + 2k' - 1)!! / 2^(2s + k + k')`, with `k <= n-14`, `k' <= n-23`.
pub fn axis_sum(pair14: AxisPair, pair23: AxisPair, s: u32) -> Result<Vec<AxisTerm>> {
    let tables = CombTables::for_max_index(pair14.n_plus.max(pair23.n_plus));
    axis_sum_with(&tables, pair14, pair23, s)
}

pub(crate) fn axis_sum_with(
    tables: &CombTables,
    pair14: AxisPair,
    pair23: AxisPair,
    s: u32,
) -> Result<Vec<AxisTerm>> {
    if pair14.diff + pair23.diff != 2 * s {
        return Err(Error::InvalidArgument(format!(
            "s = {s} inconsistent with pair differences {} and {}",
            pair14.diff, pair23.diff
        )));
    }
    let mut terms = Vec::with_capacity(((pair14.n_minus + 1) * (pair23.n_minus + 1)) as usize);
    for k in 0..=pair14.n_minus {
        let b14 = tables.binomial(pair14.n_plus, (pair14.n_minus - k) as i64);
        let fk = tables.factorial(k);
        for kp in 0..=pair23.n_minus {
            let b23 = tables.binomial(pair23.n_plus, (pair23.n_minus - kp) as i64);
            let mut num = BigInt::from(b14.clone() * b23 * tables.odd_double_factorial(s + k + kp));
            if (k + kp) % 2 == 1 {
                num = -num;
            }
            let den = BigInt::from(fk.clone() * tables.factorial(kp)) << (2 * s + k + kp) as usize;
            terms.push(AxisTerm {
                k,
                k_prime: kp,
                coefficient: BigRational::new(num, den),
            });
        }
    }
    Ok(terms)
}

/// Single-axis sum merged by `j = k + k'`, kept over a common denominator.
///
/// The `1/(1 + 2Ω)` factor couples the three axes through `Ω`, so the axes
/// cannot be summed independently; only terms with equal `k + k'` may be
/// merged before the cross-axis combination.
#[derive(Clone, Debug)]
pub struct AxisPoly {
    pub s: u32,
    /// `numerators[j] / denominator` is the merged coefficient of `j = k + k'`.
    pub numerators: Vec<BigInt>,
    pub denominator: BigInt,
    pub(crate) dd: Vec<DoubleDouble>,
    /// Product of the squared normalization factors of both pairs.
    pub norm_squared: BigRational,
    pub(crate) norm_squared_f64: f64,
}

impl AxisPoly {
    pub(crate) fn build(tables: &CombTables, pair14: AxisPair, pair23: AxisPair) -> Self {
        let s = (pair14.diff + pair23.diff) / 2;
        let terms = axis_sum_with(tables, pair14, pair23, s).expect("parity checked by caller");
        let len = (pair14.n_minus + pair23.n_minus + 1) as usize;
        let mut merged = vec![BigRational::zero(); len];
        for t in terms {
            merged[(t.k + t.k_prime) as usize] += t.coefficient;
        }
        let denominator = merged
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let numerators = merged
            .iter()
            .map(|c| c.numer() * (&denominator / c.denom()))
            .collect();
        let dd = merged.iter().map(DoubleDouble::from_rational).collect();
        let norm_squared = tables.pair_norm_squared(pair14.n_minus, pair14.n_plus)
            * tables.pair_norm_squared(pair23.n_minus, pair23.n_plus);
        let norm_squared_f64 = norm_squared.to_f64().unwrap_or(f64::NAN);
        AxisPoly {
            s,
            numerators,
            denominator,
            dd,
            norm_squared,
            norm_squared_f64,
        }
    }
}

/// Exact sum over `Ω` of `c_Ω / (1 + 2Ω)` where `c` is the convolution of
/// the three axis polynomials, shifted by `s_x + s_y + s_z`.
pub(crate) fn cross_axis_exact(polys: [&AxisPoly; 3]) -> BigRational {
    let conv = convolve(&convolve(&polys[0].numerators, &polys[1].numerators), &polys[2].numerators);
    let shift: u64 = polys.iter().map(|p| p.s as u64).sum();
    let den = &polys[0].denominator * &polys[1].denominator * &polys[2].denominator;

    let mut lcm = BigInt::one();
    for (j, c) in conv.iter().enumerate() {
        if !c.is_zero() {
            lcm = lcm.lcm(&BigInt::from(2 * (shift + j as u64) + 1));
        }
    }
    let mut total = BigInt::zero();
    for (j, c) in conv.iter().enumerate() {
        if !c.is_zero() {
            total += c * (&lcm / BigInt::from(2 * (shift + j as u64) + 1));
        }
    }
    BigRational::new(total, lcm * den)
}

pub(crate) fn cross_axis_dd(polys: [&AxisPoly; 3]) -> DoubleDouble {
    let shift: u64 = polys.iter().map(|p| p.s as u64).sum();
    let mut acc = DoubleDouble::ZERO;
    for (jx, cx) in polys[0].dd.iter().enumerate() {
        for (jy, cy) in polys[1].dd.iter().enumerate() {
            let cxy = *cx * *cy;
            for (jz, cz) in polys[2].dd.iter().enumerate() {
                let omega = shift + (jx + jy + jz) as u64;
                acc = acc + (cxy * *cz).div_f64((2 * omega + 1) as f64);
            }
        }
    }
    acc
}

fn convolve(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::axis_pair;
    use crate::oracle::rules::gauss_hermite;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn empty_sums() {
        let t = axis_sum(axis_pair(0, 0), axis_pair(0, 0), 0).unwrap();
        assert_eq!(
            t,
            vec![AxisTerm { k: 0, k_prime: 0, coefficient: rat(1, 1) }]
        );
    }

    #[test]
    fn sum_limits_follow_n_minus() {
        let t = axis_sum(axis_pair(1, 1), axis_pair(0, 0), 0).unwrap();
        let ks: Vec<_> = t.iter().map(|t| (t.k, t.k_prime)).collect();
        assert_eq!(ks, vec![(0, 0), (1, 0)]);
        // C(1,1) (-1)!! / 1 = 1 ; -C(1,0) 1!! / (1! 2) = -1/2
        assert_eq!(t[0].coefficient, rat(1, 1));
        assert_eq!(t[1].coefficient, rat(-1, 2));
    }

    #[test]
    fn shifted_pair_single_term() {
        let t = axis_sum(axis_pair(0, 2), axis_pair(0, 0), 1).unwrap();
        assert_eq!(t.len(), 1);
        // C(2,0) * 1!! / 2^2
        assert_eq!(t[0].coefficient, rat(1, 4));
    }

    #[test]
    fn inconsistent_s_rejected() {
        assert!(axis_sum(axis_pair(0, 2), axis_pair(0, 0), 0).is_err());
    }

    /// Laguerre polynomial by its three-term recurrence (not the power series).
    fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
        let mut prev = 1.0;
        if n == 0 {
            return prev;
        }
        let mut cur = 1.0 + alpha - x;
        for k in 1..n {
            let k = k as f64;
            let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// The axis terms reproduce the q-integral of the Laguerre product with
    /// a Gaussian (a = 1):
    /// ∫ e^{-(u+1/2)q²} (q/2)^{2s} L L dq = √(2π) Σ c_{kk'} (2u+1)^{-(s+k+k'+1/2)}.
    #[test]
    fn terms_match_laguerre_gaussian_integral() {
        let (x, w) = gauss_hermite(40);
        for &(m14, p14, m23, p23) in &[
            (0u32, 0u32, 0u32, 0u32),
            (1, 1, 0, 0),
            (1, 3, 0, 2),
            (2, 3, 1, 2),
            (3, 3, 2, 4),
            (2, 5, 0, 3),
        ] {
            let a = axis_pair(m14, p14);
            let b = axis_pair(m23, p23);
            if (a.diff + b.diff) % 2 == 1 {
                continue;
            }
            let s = (a.diff + b.diff) / 2;
            let terms = axis_sum(a, b, s).unwrap();
            for &u in &[0.0, 0.3, 1.7] {
                let c = (u + 0.5f64).sqrt();
                let numeric: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| {
                        let q = xi / c;
                        let y = q * q / 2.0;
                        wi * (q / 2.0).powi(2 * s as i32)
                            * laguerre(a.n_minus, a.diff as f64, y)
                            * laguerre(b.n_minus, b.diff as f64, y)
                    })
                    .sum::<f64>()
                    / c;
                let closed: f64 = terms
                    .iter()
                    .map(|t| {
                        t.coefficient.to_f64().unwrap()
                            * (2.0 * u + 1.0).powf(-(s as f64 + (t.k + t.k_prime) as f64 + 0.5))
                    })
                    .sum::<f64>()
                    * (2.0 * std::f64::consts::PI).sqrt();
                assert!(
                    (numeric - closed).abs() <= 1e-12 * closed.abs().max(1e-3),
                    "pairs {a:?} {b:?} u={u}: {numeric} vs {closed}"
                );
            }
        }
    }
}
