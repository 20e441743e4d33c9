use rand::Rng;

use super::params::join;
use super::{Matrix, Parameters};
use crate::error::{Error, Result};

/// Affine map `y = W x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub w: Matrix,
    pub b: Matrix,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize) -> Self {
        DenseParams {
            w: Matrix::zeros(output, input),
            b: Matrix::zeros(output, 1),
        }
    }

    pub fn init<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let mut d = DenseParams::zeros(input, output);
        d.w.init_uniform(rng);
        d
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn forward_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let mut y = self.b.data().to_vec();
        self.w.matvec_acc(x, &mut y);
        Ok(y)
    }

    /// Applies the layer to every row of `x`.
    pub fn forward_rows(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), self.output_dim());
        for t in 0..x.rows() {
            let y = self.forward_vec(x.row(t))?;
            out.row_mut(t).copy_from_slice(&y);
        }
        Ok(out)
    }

    /// Backward for [`forward_vec`](Self::forward_vec): accumulates into
    /// `grads` and adds the input gradient to `dx`.
    pub fn backward_vec(&self, x: &[f64], dy: &[f64], grads: &mut DenseParams, dx: &mut [f64]) {
        grads.w.outer_acc(dy, x);
        for (g, d) in grads.b.data_mut().iter_mut().zip(dy) {
            *g += d;
        }
        self.w.matvec_t_acc(dy, dx);
    }

    pub fn backward_rows(&self, x: &Matrix, dy: &Matrix, grads: &mut DenseParams) -> Matrix {
        let mut dx = Matrix::zeros(x.rows(), x.cols());
        for t in 0..x.rows() {
            self.backward_vec(x.row(t), dy.row(t), grads, dx.row_mut(t));
        }
        dx
    }
}

impl Parameters for DenseParams {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        f(join(prefix, "w"), &self.w);
        f(join(prefix, "b"), &self.b);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        f(join(prefix, "w"), &mut self.w);
        f(join(prefix, "b"), &mut self.b);
    }
}
