//! Two-body Coulomb matrix elements in the three-dimensional isotropic
//! harmonic-oscillator product basis.
//!
//! * [`closed_form`] evaluates single elements from the analytic expression,
//!   exactly (rational arithmetic) or in floating point.
//! * [`recurrence`] builds whole families of elements from a seed row with
//!   integer-coefficient recurrences.
//! * [`oracle`] integrates the defining six-dimensional integral numerically
//!   and is used to validate the other two.
//! * [`tensor_store`] builds, stores and serializes the symmetry-reduced
//!   four-index tensor up to a basis cutoff.
//!
//! Indices are ordered `(n_x¹ n_y¹ n_z¹ n_x² n_y² n_z² n_x³ n_y³ n_z³ n_x⁴ n_y⁴ n_z⁴)`
//! for the element `<λ1 λ2 | 1/r12 | λ3 λ4>`, with λ1, λ4 at `r1` and
//! λ2, λ3 at `r2`. Values are in units of `1/a` times the chosen scale.

pub mod bench;
pub mod closed_form;
pub mod combinatorics;
pub mod error;
pub mod index;
pub mod oracle;
pub mod recurrence;
pub mod tensor_store;
pub mod validate;

pub use closed_form::{element_batch, element_direct, Backend, ClosedForm, ElementValue, ExactElement, OscillatorScale};
pub use error::{Error, Result};
pub use index::{axis_pair, canonical_key, selection_rule, Axis, AxisPair, ElementKey, PairSel, QuantumTriple};
pub use oracle::{element_quadrature, QuadratureOracle, QuadratureSpec};
