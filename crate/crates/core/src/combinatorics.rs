//! Exact integer combinatorics used by the closed form.
//!
//! Binomials and double factorials leave the `u64` range around index 10,
//! so everything here is arbitrary precision.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `m!!` for `m >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(m: i64) -> Result<BigUint> {
    if m < -1 {
        return Err(Error::InvalidArgument(format!(
            "double factorial undefined for {m}"
        )));
    }
    let mut acc = BigUint::one();
    let mut k = m;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    Ok(acc)
}

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u32, k: i64) -> BigUint {
    if k < 0 || k > n as i64 {
        return BigUint::zero();
    }
    let k = (k as u32).min(n - k as u32);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Read-only tables of factorials, odd double factorials and binomials up
/// to a fixed argument, built once before concurrent use.
///
/// Lookups beyond the table fall back to direct computation.
#[derive(Clone, Debug)]
pub struct CombTables {
    limit: u32,
    factorials: Vec<BigUint>,
    // odd_double[j] = (2j - 1)!!
    odd_double: Vec<BigUint>,
    // pascal[n][k]
    pascal: Vec<Vec<BigUint>>,
}

impl CombTables {
    /// Tables covering arguments up to `limit` (`(2j-1)!!` up to `2j-1 <= 2*limit+1`).
    pub fn new(limit: u32) -> Self {
        let mut factorials = Vec::with_capacity(limit as usize + 1);
        factorials.push(BigUint::one());
        for n in 1..=limit {
            let next = factorials[n as usize - 1].clone() * n;
            factorials.push(next);
        }

        let mut odd_double = Vec::with_capacity(limit as usize + 2);
        odd_double.push(BigUint::one());
        for j in 1..=limit + 1 {
            let next = odd_double[j as usize - 1].clone() * (2 * j - 1);
            odd_double.push(next);
        }

        let mut pascal: Vec<Vec<BigUint>> = Vec::with_capacity(limit as usize + 1);
        for n in 0..=limit as usize {
            let mut row = vec![BigUint::one(); n + 1];
            for k in 1..n {
                row[k] = &pascal[n - 1][k - 1] + &pascal[n - 1][k];
            }
            pascal.push(row);
        }

        CombTables {
            limit,
            factorials,
            odd_double,
            pascal,
        }
    }

    /// Tables sized for elements whose indices do not exceed `max_index`.
    pub fn for_max_index(max_index: u32) -> Self {
        CombTables::new(4 * max_index + 2)
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn factorial(&self, n: u32) -> BigUint {
        match self.factorials.get(n as usize) {
            Some(v) => v.clone(),
            None => factorial(n),
        }
    }

    /// `(2j - 1)!!`.
    pub fn odd_double_factorial(&self, j: u32) -> BigUint {
        match self.odd_double.get(j as usize) {
            Some(v) => v.clone(),
            None => double_factorial(2 * j as i64 - 1).expect("argument >= -1"),
        }
    }

    pub fn binomial(&self, n: u32, k: i64) -> BigUint {
        if k < 0 || k > n as i64 {
            return BigUint::zero();
        }
        match self.pascal.get(n as usize) {
            Some(row) => row[k as usize].clone(),
            None => binomial(n, k),
        }
    }

    /// `2^P m! / (P! 2^m)` for an ordered pair `m <= P`: the square of the
    /// pair's normalization factor.
    pub fn pair_norm_squared(&self, n_minus: u32, n_plus: u32) -> BigRational {
        let num = self.factorial(n_minus) << (n_plus - n_minus) as usize;
        BigRational::new(BigInt::from(num), BigInt::from(self.factorial(n_plus)))
    }
}
