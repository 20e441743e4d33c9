//! Unidirectional and bidirectional LSTM layers with exact BPTT.
//!
//! Gates are stacked row-wise in the order input, forget, cell, output:
//! rows `[0, h)` of `w`, `u` and `b` belong to the input gate, `[h, 2h)` to the
//! forget gate, and so on.

use rand::Rng;

use super::params::join;
use super::{sigmoid, Matrix, Parameters};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// Input weights, `4h x in`.
    pub w: Matrix,
    /// Recurrent weights, `4h x h`.
    pub u: Matrix,
    /// Biases, `4h x 1`.
    pub b: Matrix,
}

/// Per-step activations kept for the backward pass, indexed by time step.
#[derive(Clone, Debug)]
pub struct LstmTrace {
    gates: Matrix,
    cells: Matrix,
    tanh_cells: Matrix,
    pub hidden: Matrix,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            w: Matrix::zeros(4 * hidden, input),
            u: Matrix::zeros(4 * hidden, hidden),
            b: Matrix::zeros(4 * hidden, 1),
        }
    }

    /// Uniform `1/sqrt(fan-in)` weights, zero biases except forget = 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = LstmParams::zeros(input, hidden);
        p.w.init_uniform(rng);
        p.u.init_uniform(rng);
        for r in hidden..2 * hidden {
            p.b.set(r, 0, 1.0);
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.cols()
    }

    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "LSTM expects {} inputs per step, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Runs over the rows of `x`, in reverse time order when `reverse`.
    pub fn forward(&self, x: &Matrix, reverse: bool) -> Result<LstmTrace> {
        self.check(x)?;
        let steps = x.rows();
        let h = self.hidden_dim();
        let mut trace = LstmTrace {
            gates: Matrix::zeros(steps, 4 * h),
            cells: Matrix::zeros(steps, h),
            tanh_cells: Matrix::zeros(steps, h),
            hidden: Matrix::zeros(steps, h),
        };
        let mut z = vec![0.0; 4 * h];
        for k in 0..steps {
            let (t, prev) = step_order(k, steps, reverse);
            z.copy_from_slice(self.b.data());
            self.w.matvec_acc(x.row(t), &mut z);
            if let Some(p) = prev {
                self.u.matvec_acc(trace.hidden.row(p), &mut z);
            }
            let (zi, rest) = z.split_at_mut(h);
            let (zf, rest) = rest.split_at_mut(h);
            let (zg, zo) = rest.split_at_mut(h);
            for j in 0..h {
                zi[j] = sigmoid(zi[j]);
                zf[j] = sigmoid(zf[j]);
                zg[j] = zg[j].tanh();
                zo[j] = sigmoid(zo[j]);
            }
            for j in 0..h {
                let c_prev = prev.map_or(0.0, |p| trace.cells.get(p, j));
                let c = zf[j] * c_prev + zi[j] * zg[j];
                let tc = c.tanh();
                trace.cells.set(t, j, c);
                trace.tanh_cells.set(t, j, tc);
                trace.hidden.set(t, j, zo[j] * tc);
            }
            trace.gates.row_mut(t).copy_from_slice(&z);
        }
        Ok(trace)
    }

    /// Accumulates parameter gradients into `grads` and input gradients into
    /// `dx`, given `dh` (the loss gradient w.r.t. each step's hidden output)
    /// read from columns `dh_offset..dh_offset + h` of `dh`.
    pub fn backward(
        &self,
        x: &Matrix,
        trace: &LstmTrace,
        dh: &Matrix,
        dh_offset: usize,
        reverse: bool,
        grads: &mut LstmParams,
        dx: &mut Matrix,
    ) {
        let steps = x.rows();
        let h = self.hidden_dim();
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for k in (0..steps).rev() {
            let (t, prev) = step_order(k, steps, reverse);
            let gates = trace.gates.row(t);
            let (gi, rest) = gates.split_at(h);
            let (gf, rest) = rest.split_at(h);
            let (gg, go) = rest.split_at(h);
            let tc = trace.tanh_cells.row(t);
            let up = &dh.row(t)[dh_offset..dh_offset + h];
            for j in 0..h {
                let dhj = up[j] + dh_next[j];
                let c_prev = prev.map_or(0.0, |p| trace.cells.get(p, j));
                let d_o = dhj * tc[j];
                let dc = dhj * go[j] * (1.0 - tc[j] * tc[j]) + dc_next[j];
                dz[j] = dc * gg[j] * gi[j] * (1.0 - gi[j]);
                dz[h + j] = dc * c_prev * gf[j] * (1.0 - gf[j]);
                dz[2 * h + j] = dc * gi[j] * (1.0 - gg[j] * gg[j]);
                dz[3 * h + j] = d_o * go[j] * (1.0 - go[j]);
                dc_next[j] = dc * gf[j];
            }
            for (g, d) in grads.b.data_mut().iter_mut().zip(&dz) {
                *g += d;
            }
            grads.w.outer_acc(&dz, x.row(t));
            self.w.matvec_t_acc(&dz, dx.row_mut(t));
            dh_next.fill(0.0);
            if let Some(p) = prev {
                grads.u.outer_acc(&dz, trace.hidden.row(p));
                self.u.matvec_t_acc(&dz, &mut dh_next);
            }
        }
    }
}

/// Maps processing index `k` to `(time step, previous time step)`.
fn step_order(k: usize, steps: usize, reverse: bool) -> (usize, Option<usize>) {
    if reverse {
        let t = steps - 1 - k;
        (t, (k > 0).then_some(t + 1))
    } else {
        (k, k.checked_sub(1))
    }
}

impl Parameters for LstmParams {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        f(join(prefix, "w"), &self.w);
        f(join(prefix, "u"), &self.u);
        f(join(prefix, "b"), &self.b);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        f(join(prefix, "w"), &mut self.w);
        f(join(prefix, "u"), &mut self.u);
        f(join(prefix, "b"), &mut self.b);
    }
}

/// Forward and backward LSTMs over the same sequence; step outputs are
/// `[forward_h ; backward_h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiLstmParams {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

#[derive(Clone, Debug)]
pub struct BiLstmTrace {
    fwd: LstmTrace,
    bwd: LstmTrace,
    pub output: Matrix,
}

impl BiLstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        BiLstmParams {
            forward: LstmParams::zeros(input, hidden),
            backward: LstmParams::zeros(input, hidden),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        BiLstmParams {
            forward: LstmParams::init(input, hidden, rng),
            backward: LstmParams::init(input, hidden, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.forward.hidden_dim()
    }

    pub fn forward(&self, x: &Matrix) -> Result<BiLstmTrace> {
        let fwd = self.forward.forward(x, false)?;
        let bwd = self.backward.forward(x, true)?;
        let h = self.forward.hidden_dim();
        let mut output = Matrix::zeros(x.rows(), 2 * h);
        for t in 0..x.rows() {
            let row = output.row_mut(t);
            row[..h].copy_from_slice(fwd.hidden.row(t));
            row[h..].copy_from_slice(bwd.hidden.row(t));
        }
        Ok(BiLstmTrace { fwd, bwd, output })
    }

    /// Returns the gradient w.r.t. `x`; parameter gradients accumulate into `grads`.
    pub fn backward(
        &self,
        x: &Matrix,
        trace: &BiLstmTrace,
        d_out: &Matrix,
        grads: &mut BiLstmParams,
    ) -> Result<Matrix> {
        if d_out.shape() != trace.output.shape() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} does not match output {:?}",
                d_out.shape(),
                trace.output.shape()
            )));
        }
        let h = self.forward.hidden_dim();
        let mut dx = Matrix::zeros(x.rows(), x.cols());
        self.forward
            .backward(x, &trace.fwd, d_out, 0, false, &mut grads.forward, &mut dx);
        self.backward
            .backward(x, &trace.bwd, d_out, h, true, &mut grads.backward, &mut dx);
        Ok(dx)
    }
}

impl Parameters for BiLstmParams {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        self.forward.visit(&join(prefix, "fwd"), f);
        self.backward.visit(&join(prefix, "bwd"), f);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        self.forward.visit_mut(&join(prefix, "fwd"), f);
        self.backward.visit_mut(&join(prefix, "bwd"), f);
    }
}

/// A stack of bi-LSTM layers; layer `k + 1` reads layer `k`'s outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct BiLstmStack {
    pub layers: Vec<BiLstmParams>,
}

#[derive(Clone, Debug)]
pub struct StackTrace {
    inputs: Vec<Matrix>,
    traces: Vec<BiLstmTrace>,
}

impl StackTrace {
    pub fn output(&self) -> &Matrix {
        &self.traces[self.traces.len() - 1].output
    }
}

impl BiLstmStack {
    pub fn init<R: Rng>(input: usize, hidden: usize, depth: usize, rng: &mut R) -> Self {
        let depth = depth.max(1);
        let layers = (0..depth)
            .map(|k| BiLstmParams::init(if k == 0 { input } else { 2 * hidden }, hidden, rng))
            .collect();
        BiLstmStack { layers }
    }

    pub fn zeros(input: usize, hidden: usize, depth: usize) -> Self {
        let layers = (0..depth.max(1))
            .map(|k| BiLstmParams::zeros(if k == 0 { input } else { 2 * hidden }, hidden))
            .collect();
        BiLstmStack { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn forward(&self, x: &Matrix) -> Result<StackTrace> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut traces: Vec<BiLstmTrace> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = match traces.last() {
                Some(t) => t.output.clone(),
                None => x.clone(),
            };
            let trace = layer.forward(&input)?;
            inputs.push(input);
            traces.push(trace);
        }
        Ok(StackTrace { inputs, traces })
    }

    pub fn backward(
        &self,
        trace: &StackTrace,
        d_out: &Matrix,
        grads: &mut BiLstmStack,
    ) -> Result<Matrix> {
        let mut d = d_out.clone();
        for k in (0..self.layers.len()).rev() {
            d = self.layers[k].backward(
                &trace.inputs[k],
                &trace.traces[k],
                &d,
                &mut grads.layers[k],
            )?;
        }
        Ok(d)
    }
}

impl Parameters for BiLstmStack {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        for (k, layer) in self.layers.iter().enumerate() {
            layer.visit(&join(prefix, &format!("layer{k}")), f);
        }
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        for (k, layer) in self.layers.iter_mut().enumerate() {
            layer.visit_mut(&join(prefix, &format!("layer{k}")), f);
        }
    }
}
