//! Exact symbolic engine for Heisenberg-picture quadrature algebra.
//!
//! Every quadrature operator of a register is a real linear combination of a
//! fixed initial basis: the input-mode quadratures (which stay symbolic
//! forever — the channel must work for arbitrary input states), the vacuum
//! quadratures of the squeezed ancilla modes, and fresh detector-vacuum
//! quadratures injected by inefficient homodyne detection. Gates,
//! measurements, and feed-forwards are linear substitutions on these forms,
//! so noise variances are computed exactly.

mod form;
mod register;

pub use form::{symplectic_product, BasisLabel, LabelKind, LinearForm, Quadrature};
pub use register::{ModePair, QuadratureRegister, SymplecticCheck, SymplecticEntry};
