use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::{init_matrix, init_vector};

/// Affine map `y = x W + b` over row-major batches.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// (in, out)
    pub w: Array2<f64>,
    /// (out,)
    pub b: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub dw: Array2<f64>,
    pub db: Array1<f64>,
}

impl Linear {
    pub fn new(rng: &mut impl Rng, input: usize, output: usize) -> Linear {
        Linear {
            w: init_matrix(rng, input, output),
            b: init_vector(rng, output),
        }
    }

    pub fn zeros(input: usize, output: usize) -> Linear {
        Linear {
            w: Array2::zeros((input, output)),
            b: Array1::zeros(output),
        }
    }

    /// (n, in) -> (n, out)
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Returns parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, x: ArrayView2<f64>, dy: ArrayView2<f64>) -> (LinearGrads, Array2<f64>) {
        let dw = x.t().dot(&dy);
        let db = dy.sum_axis(Axis(0));
        let dx = dy.dot(&self.w.t());
        (LinearGrads { dw, db }, dx)
    }

    pub fn grads_zeros(&self) -> LinearGrads {
        LinearGrads {
            dw: Array2::zeros(self.w.raw_dim()),
            db: Array1::zeros(self.b.raw_dim()),
        }
    }
}

impl LinearGrads {
    pub fn accumulate(&mut self, other: &LinearGrads) {
        self.dw += &other.dw;
        self.db += &other.db;
    }

    pub fn scale(&mut self, factor: f64) {
        self.dw *= factor;
        self.db *= factor;
    }
}
