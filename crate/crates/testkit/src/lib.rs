//! Reference implementations used only by tests.
//!
//! Everything here is written against plain `Vec` storage and textbook
//! algorithms so it shares no code path with the production crates.

pub mod circuit;
pub mod fock;
pub mod mat;
pub mod oracles;
pub mod quadrature;

pub use mat::{
    hermitian_eigenvalues, min_eigenvalue, negativity_2x2, partial_transpose_2x2,
    singular_values_2x2, Mat,
};
use num_complex::Complex64 as C64;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// e^{-|α|²/2} αⁿ / √n!
pub fn coherent_amplitude(alpha: C64, n: usize) -> C64 {
    (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(n as u32) / factorial(n).sqrt()
}

/// ⟨a|b⟩ for untruncated coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp()
}
