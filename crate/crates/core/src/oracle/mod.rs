//! Numerical reference for matrix elements, independent of the Laguerre
//! expansion used by the closed form.
//!
//! The defining six-dimensional integral is evaluated from the real-space
//! oscillator wavefunctions and the Gaussian representation
//! `1/r = (2/√π) ∫₀^∞ exp(-t² r²) dt`. For fixed `t` the integrand factorizes
//! into three two-dimensional axis integrals. Each one is taken on a
//! Gauss–Hermite grid in rotated coordinates `u = (x1+x2)/√2`,
//! `v = (x1-x2)/√2`, where the Gaussian part is diagonal. The `t` integral
//! is mapped onto `c = √2 t a / √(1 + 2t²a²) ∈ [0, 1)` and done by
//! Gauss–Legendre. Refinement doubles both node counts.

pub mod rules;

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::OscillatorScale;
use crate::error::{Error, Result};
use crate::index::{Axis, ElementKey};
use rules::{gauss_hermite, gauss_legendre};

const PI_M4: f64 = 0.751_125_544_464_942_5;

/// Absolute slack added to the convergence test so that vanishing elements
/// (which come out at rounding level) are not reported as divergent.
const ZERO_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub t_nodes: usize,
    pub target_rel_error: f64,
}

impl QuadratureSpec {
    pub fn new(nodes_per_axis: usize, t_nodes: usize, target_rel_error: f64) -> Result<Self> {
        if nodes_per_axis < 8 {
            return Err(Error::InvalidArgument(format!(
                "nodes_per_axis must be at least 8, got {nodes_per_axis}"
            )));
        }
        if t_nodes < 16 {
            return Err(Error::InvalidArgument(format!(
                "t_nodes must be at least 16, got {t_nodes}"
            )));
        }
        if target_rel_error.is_nan() || target_rel_error <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "target_rel_error must be positive, got {target_rel_error}"
            )));
        }
        Ok(QuadratureSpec {
            nodes_per_axis,
            t_nodes,
            target_rel_error,
        })
    }

    /// Defaults for keys whose indices do not exceed `max_index`.
    ///
    /// Axis integrands are polynomials of degree at most `4·max_index` in each
    /// rotated coordinate and the mapped `t` integrand is a polynomial of
    /// degree at most `12·max_index`, so both rules are exact at these sizes.
    pub fn for_max_index(max_index: u32) -> Self {
        let n = max_index as usize;
        QuadratureSpec {
            nodes_per_axis: 2 * n + 8,
            t_nodes: (6 * n + 4).max(16),
            target_rel_error: 1e-10,
        }
    }

    pub fn refined(&self) -> Self {
        QuadratureSpec {
            nodes_per_axis: 2 * self.nodes_per_axis,
            t_nodes: 2 * self.t_nodes,
            ..*self
        }
    }
}

/// Normalized 1D oscillator eigenfunction `ψ_n(x)` for oscillator length `a`.
pub fn hermite_wavefunction(n: u32, x: f64, a: f64) -> f64 {
    let xi = x / a;
    let mut out = vec![0.0; n as usize + 1];
    hermite_polys(xi, &mut out);
    out[n as usize] * (-0.5 * xi * xi).exp() / a.sqrt()
}

/// Fills `out[k] = ψ_k(aξ) √a e^{ξ²/2}` for `k < out.len()` by the
/// normalized three-term recurrence.
fn hermite_polys(xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI_M4;
    if out.len() > 1 {
        out[1] = SQRT_2 * xi * PI_M4;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// A quadrature grid at one resolution.
struct Grid {
    // Gauss–Legendre in c ∈ [0,1]: (c, weight)
    t: Vec<(f64, f64)>,
    gh_x: Vec<f64>,
    gh_w: Vec<f64>,
}

impl Grid {
    fn new(nodes_per_axis: usize, t_nodes: usize) -> Self {
        let (gx, gw) = gauss_legendre(t_nodes);
        let t = gx
            .iter()
            .zip(&gw)
            .map(|(&x, &w)| ((x + 1.0) / 2.0, w / 2.0))
            .collect();
        let (gh_x, gh_w) = gauss_hermite(nodes_per_axis);
        Grid { t, gh_x, gh_w }
    }

    /// Per-`t`-node axis integrals for the given index quadruples
    /// `(n1, n4, n2, n3)`.
    fn axis_integrals(&self, quads: &[[u32; 4]]) -> HashMap<[u32; 4], Vec<f64>> {
        let mut unique = quads.to_vec();
        unique.sort_unstable();
        unique.dedup();
        let n = unique.iter().flatten().copied().max().unwrap_or(0) as usize + 1;
        let m = self.gh_x.len();
        let mut table: HashMap<[u32; 4], Vec<f64>> = unique
            .iter()
            .map(|q| (*q, Vec::with_capacity(self.t.len())))
            .collect();
        let mut h1 = vec![0.0; n];
        let mut h2 = vec![0.0; n];
        let mut sums = vec![0.0; unique.len()];
        for &(c, _) in &self.t {
            let shrink = (1.0 - c * c).sqrt();
            sums.iter_mut().for_each(|s| *s = 0.0);
            for ip in 0..m {
                for iw in 0..m {
                    let v = self.gh_x[iw] * shrink;
                    hermite_polys((self.gh_x[ip] + v) / SQRT_2, &mut h1);
                    hermite_polys((self.gh_x[ip] - v) / SQRT_2, &mut h2);
                    let w = self.gh_w[ip] * self.gh_w[iw];
                    for (s, q) in sums.iter_mut().zip(&unique) {
                        let [n1, n4, n2, n3] = q.map(|x| x as usize);
                        *s += w * h1[n1] * h1[n4] * h2[n2] * h2[n3];
                    }
                }
            }
            for (s, q) in sums.iter().zip(&unique) {
                table.get_mut(q).expect("allocated").push(*s);
            }
        }
        table
    }
}

/// Axis quadruple `(n1, n4, n2, n3)` of a key.
fn axis_quad(key: &ElementKey, axis: Axis) -> [u32; 4] {
    [
        key.lambda1.get(axis),
        key.lambda4.get(axis),
        key.lambda2.get(axis),
        key.lambda3.get(axis),
    ]
}

/// Neumaier-compensated sum in fixed order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

struct Level {
    grid: Grid,
    axes: HashMap<[u32; 4], Vec<f64>>,
}

impl Level {
    fn value(&self, key: &ElementKey, a: f64) -> f64 {
        let [gx, gy, gz] = Axis::ALL.map(|axis| &self.axes[&axis_quad(key, axis)]);
        let integral = compensated_sum(
            self.grid
                .t
                .iter()
                .enumerate()
                .map(|(i, &(_, w))| w * gx[i] * gy[i] * gz[i]),
        );
        2.0 / PI.sqrt() / SQRT_2 * integral / a
    }
}

/// Quadrature oracle with cached axis integrals for all keys whose indices
/// do not exceed a fixed maximum. Built once, then shareable across threads.
pub struct QuadratureOracle {
    scale: OscillatorScale,
    spec: QuadratureSpec,
    max_index: u32,
    coarse: Level,
    fine: Level,
}

/// Oracle result: the refined value and the change under refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub error_estimate: f64,
}

impl QuadratureOracle {
    pub fn new(scale: OscillatorScale, spec: QuadratureSpec, max_index: u32) -> Self {
        let n = max_index + 1;
        let quads: Vec<[u32; 4]> = (0..n.pow(4))
            .map(|i| [i % n, i / n % n, i / n / n % n, i / n / n / n])
            .collect();
        let build = |s: &QuadratureSpec| {
            let grid = Grid::new(s.nodes_per_axis, s.t_nodes);
            let axes = grid.axis_integrals(&quads);
            Level { grid, axes }
        };
        let coarse = build(&spec);
        let fine = build(&spec.refined());
        QuadratureOracle {
            scale,
            spec,
            max_index,
            coarse,
            fine,
        }
    }

    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn element(&self, key: &ElementKey) -> Result<OracleValue> {
        if key.max_index() > self.max_index {
            return Err(Error::InvalidArgument(format!(
                "key {key} exceeds oracle table range {}",
                self.max_index
            )));
        }
        let a = self.scale.a();
        let coarse = self.coarse.value(key, a);
        let fine = self.fine.value(key, a);
        let estimate = (fine - coarse).abs();
        let allowed = self.spec.target_rel_error * fine.abs() + ZERO_FLOOR / a;
        if estimate > allowed {
            return Err(Error::NonConvergence { estimate, allowed }.at(*key));
        }
        Ok(OracleValue {
            value: fine,
            error_estimate: estimate,
        })
    }
}

/// Numerical value of one element with its refinement error estimate.
pub fn element_quadrature(
    key: &ElementKey,
    scale: OscillatorScale,
    spec: QuadratureSpec,
) -> Result<OracleValue> {
    let a = scale.a();
    let quads = Axis::ALL.map(|axis| axis_quad(key, axis));
    let level = |s: &QuadratureSpec| -> f64 {
        let grid = Grid::new(s.nodes_per_axis, s.t_nodes);
        let axes = grid.axis_integrals(&quads);
        Level { grid, axes }.value(key, a)
    };
    let coarse = level(&spec);
    let fine = level(&spec.refined());
    let estimate = (fine - coarse).abs();
    let allowed = spec.target_rel_error * fine.abs() + ZERO_FLOOR / a;
    if estimate > allowed {
        return Err(Error::NonConvergence { estimate, allowed }.at(*key));
    }
    Ok(OracleValue {
        value: fine,
        error_estimate: estimate,
    })
}

/// Fourier convolution `C(q) = ∫ ψ_{n1}(x) ψ_{n4}(x) e^{-iqx} dx` in closed
/// form: `(2^{n+} n-! / (n+! 2^{n-}))^{1/2} i^{n1+n4} (-1)^{n+}
/// e^{-q²a²/4} (aq/2)^{|n1-n4|} L^{|n1-n4|}_{n-}(a²q²/2)`.
pub fn convolution_c(n1: u32, n4: u32, q: f64, a: f64) -> Complex64 {
    let (m, p) = if n1 <= n4 { (n1, n4) } else { (n4, n1) };
    let d = p - m;
    // (2^d m!/p!)^{1/2} as a running product
    let norm = (m + 1..=p).fold(1.0f64, |acc, j| acc * 2.0 / j as f64).sqrt();
    let x = a * a * q * q / 2.0;
    let mag = norm * (-q * q * a * a / 4.0).exp() * (a * q / 2.0).powi(d as i32) * laguerre(m, d as f64, x);
    let phase = match (n1 + n4) % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let sign = if p % 2 == 1 { -1.0 } else { 1.0 };
    phase * (sign * mag)
}

/// `D(q) = ∫ ψ_{n1} ψ_{n4} e^{+iqx} dx = C(-q)`.
pub fn convolution_d(n1: u32, n4: u32, q: f64, a: f64) -> Complex64 {
    convolution_c(n1, n4, -q, a)
}

/// `∫ ψ_{n1}(x) ψ_{n4}(x) e^{-iqx} dx` by direct Gauss–Hermite quadrature.
pub fn convolution_c_quadrature(n1: u32, n4: u32, q: f64, a: f64, nodes: usize) -> Complex64 {
    let (x, w) = gauss_hermite(nodes);
    let mut h = vec![0.0; n1.max(n4) as usize + 1];
    let mut re = Vec::with_capacity(nodes);
    let mut im = Vec::with_capacity(nodes);
    for (&xi, &wi) in x.iter().zip(&w) {
        hermite_polys(xi, &mut h);
        let f = wi * h[n1 as usize] * h[n4 as usize];
        let phase = -q * a * xi;
        re.push(f * phase.cos());
        im.push(f * phase.sin());
    }
    Complex64::new(
        compensated_sum(re.into_iter()),
        compensated_sum(im.into_iter()),
    )
}

/// Generalized Laguerre `L_n^α(x)` by upward recurrence.
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
