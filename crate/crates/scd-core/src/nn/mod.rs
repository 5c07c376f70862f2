//! Minimal dense-layer machinery with hand-written backward passes.
//! Everything is f64 so analytic gradients can be checked against central
//! finite differences at tight tolerances.

mod adam;
mod linear;
mod lstm;

pub use adam::Adam;
pub use linear::{Linear, LinearGrads};
pub use lstm::{BiLstm, BiLstmCache, BiLstmGrads, Lstm, LstmCache, LstmGrads};

use ndarray::{Array1, Array2};
use rand::Rng;

/// Uniform(-0.1, 0.1) initialization, the shared scheme for every
/// trainable tensor.
pub fn init_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-0.1..0.1))
}

pub fn init_vector(rng: &mut impl Rng, len: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || rng.gen_range(-0.1..0.1))
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
