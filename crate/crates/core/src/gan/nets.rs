//! The three networks and the per-step path features they read.

use rand::Rng;

use crate::ctc::{self, CtcAlphabet};
use crate::error::{Error, Result};
use crate::nn::{
    log_softmax, mean_pool, sigmoid, BiLstmStack, DenseParams, Matrix, Parameters, StackTrace,
};
use crate::path::Point;

/// Columns of [`path_features`].
pub const FEATURES: usize = 5;

/// Keeps the speed feature differentiable when two points coincide.
const SPEED_FLOOR: f64 = 1e-12;

/// Per-step features `(x - 0.5, y - 0.5, s*dx, s*dy, s*|d|)` with `s = L - 1`
/// and the first step's deltas zero, so a straight stroke across the board
/// has velocity features of order one regardless of `L`.
pub fn path_features(points: &[Point]) -> Matrix {
    let n = points.len();
    let s = n.saturating_sub(1) as f64;
    let mut m = Matrix::zeros(n, FEATURES);
    for (t, p) in points.iter().enumerate() {
        let row = m.row_mut(t);
        row[0] = p.x - 0.5;
        row[1] = p.y - 0.5;
        if t > 0 {
            let (dx, dy) = (p.x - points[t - 1].x, p.y - points[t - 1].y);
            row[2] = s * dx;
            row[3] = s * dy;
            row[4] = s * (dx * dx + dy * dy + SPEED_FLOOR).sqrt();
        }
    }
    m
}

/// Pulls a feature gradient back onto `points`: returns `L x 2`.
pub fn features_backward(points: &[Point], d_feat: &Matrix) -> Matrix {
    let n = d_feat.rows();
    let s = n.saturating_sub(1) as f64;
    let mut d = Matrix::zeros(n, 2);
    for t in 0..n {
        let f = d_feat.row(t);
        d.set(t, 0, d.get(t, 0) + f[0]);
        d.set(t, 1, d.get(t, 1) + f[1]);
        if t > 0 {
            let (dx, dy) = (points[t].x - points[t - 1].x, points[t].y - points[t - 1].y);
            let norm = (dx * dx + dy * dy + SPEED_FLOOR).sqrt();
            // Gradient w.r.t. (dx, dy) of this step's delta features.
            let gx = s * (f[2] + f[4] * dx / norm);
            let gy = s * (f[3] + f[4] * dy / norm);
            d.set(t, 0, d.get(t, 0) + gx);
            d.set(t, 1, d.get(t, 1) + gy);
            d.set(t - 1, 0, d.get(t - 1, 0) - gx);
            d.set(t - 1, 1, d.get(t - 1, 1) - gy);
        }
    }
    d
}

fn visit_pair<'a>(
    prefix: &str,
    stack: &'a BiLstmStack,
    head: &'a DenseParams,
    f: &mut dyn FnMut(String, &'a Matrix),
) {
    stack.visit(&crate::nn::params_join(prefix, "stack"), f);
    head.visit(&crate::nn::params_join(prefix, "head"), f);
}

/// Path transformer: `Y_t = X_t + shift(head(stack(features(X), noise))_t)`
/// where `shift(r) = m * tanh(r / m)` bounds each displacement coordinate by
/// `m = max_shift` (no bound when `m` is 0).
///
/// Optional noise channels are appended to the features so one input path
/// can map to many outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub stack: BiLstmStack,
    pub head: DenseParams,
    pub max_shift: f64,
    /// Radius of the binomial low-pass filter applied to the head output
    /// along the path; 0 disables it.
    pub smoothing: usize,
    /// Read the head output as (along, across) the input path's local
    /// direction instead of (x, y).
    pub local_frame: bool,
}

#[derive(Clone, Debug)]
pub struct GeneratorTrace {
    stack: StackTrace,
    frames: Vec<(f64, f64)>,
    /// Bounded displacement in the generator's output frame.
    pub displacement: Matrix,
    pub output: Vec<Point>,
}

impl Generator {
    /// Random stack, zero head: the identity map until trained.
    pub fn init<R: Rng>(
        noise_channels: usize,
        hidden: usize,
        depth: usize,
        max_shift: f64,
        rng: &mut R,
    ) -> Self {
        let stack = BiLstmStack::init(FEATURES + noise_channels, hidden, depth, rng);
        let head = DenseParams::zeros(stack.output_dim(), 2);
        Generator {
            stack,
            head,
            max_shift,
            smoothing: 0,
            local_frame: false,
        }
    }

    pub fn with_local_frame(mut self, on: bool) -> Self {
        self.local_frame = on;
        self
    }

    /// Unit tangent per point, or `(1, 0)` everywhere in the plain frame.
    fn frames(&self, points: &[Point]) -> Vec<(f64, f64)> {
        let n = points.len();
        (0..n)
            .map(|t| {
                if !self.local_frame || n < 2 {
                    return (1.0, 0.0);
                }
                let (a, b) = (points[t.saturating_sub(1)], points[(t + 1).min(n - 1)]);
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let len = dx.hypot(dy);
                if len > 0.0 {
                    (dx / len, dy / len)
                } else {
                    (1.0, 0.0)
                }
            })
            .collect()
    }

    pub fn with_smoothing(mut self, radius: usize) -> Self {
        self.smoothing = radius;
        self
    }

    pub fn noise_channels(&self) -> usize {
        self.stack.input_dim() - FEATURES
    }

    fn input(&self, points: &[Point], noise: &Matrix) -> Result<Matrix> {
        let nc = self.noise_channels();
        if noise.cols() != nc || (nc > 0 && noise.rows() != points.len()) {
            return Err(Error::Shape(format!(
                "generator expects {} x {nc} noise, got {:?}",
                points.len(),
                noise.shape()
            )));
        }
        let feat = path_features(points);
        let mut x = Matrix::zeros(points.len(), FEATURES + nc);
        for t in 0..points.len() {
            let row = x.row_mut(t);
            row[..FEATURES].copy_from_slice(feat.row(t));
            if nc > 0 {
                row[FEATURES..].copy_from_slice(noise.row(t));
            }
        }
        Ok(x)
    }

    pub fn forward(&self, points: &[Point], noise: &Matrix) -> Result<GeneratorTrace> {
        let stack = self.stack.forward(&self.input(points, noise)?)?;
        let raw = self.head.forward_rows(stack.output())?;
        let mut displacement = smooth(&raw, self.smoothing, false);
        let m = self.max_shift;
        if m > 0.0 {
            displacement.data_mut().iter_mut().for_each(|d| *d = m * (*d / m).tanh());
        }
        let frames = self.frames(points);
        let output = points
            .iter()
            .zip(&frames)
            .enumerate()
            .map(|(t, (p, &(ux, uy)))| {
                let (a, b) = (displacement.get(t, 0), displacement.get(t, 1));
                Point::new(p.x + a * ux - b * uy, p.y + a * uy + b * ux)
            })
            .collect();
        Ok(GeneratorTrace {
            stack,
            frames,
            displacement,
            output,
        })
    }

    /// `d_output` is the loss gradient w.r.t. the output points (`L x 2`).
    pub fn backward(
        &self,
        trace: &GeneratorTrace,
        d_output: &Matrix,
        grads: &mut Generator,
    ) -> Result<()> {
        if d_output.shape() != trace.displacement.shape() {
            return Err(Error::Shape(format!(
                "generator output gradient {:?}, expected {:?}",
                d_output.shape(),
                trace.displacement.shape()
            )));
        }
        let m = self.max_shift;
        let mut d_raw = d_output.clone();
        for (t, &(ux, uy)) in trace.frames.iter().enumerate() {
            let (gx, gy) = (d_output.get(t, 0), d_output.get(t, 1));
            d_raw.set(t, 0, gx * ux + gy * uy);
            d_raw.set(t, 1, -gx * uy + gy * ux);
        }
        if m > 0.0 {
            for (g, d) in d_raw.data_mut().iter_mut().zip(trace.displacement.data()) {
                let th = d / m;
                *g *= 1.0 - th * th;
            }
        }
        let d_raw = smooth(&d_raw, self.smoothing, true);
        let d_stack = self.head.backward_rows(trace.stack.output(), &d_raw, &mut grads.head);
        self.stack.backward(&trace.stack, &d_stack, &mut grads.stack)?;
        Ok(())
    }
}

/// Weights of the binomial filter of `radius` at offsets `-radius..=radius`.
fn binomial(radius: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for _ in 0..2 * radius {
        let mut next = vec![1.0; w.len() + 1];
        for k in 1..w.len() {
            next[k] = w[k - 1] + w[k];
        }
        w = next;
    }
    w
}

/// Filters each column of `x` along the rows with a binomial kernel,
/// renormalized where it overhangs the ends. `transpose` applies the adjoint,
/// which the backward pass needs because renormalization breaks symmetry.
fn smooth(x: &Matrix, radius: usize, transpose: bool) -> Matrix {
    if radius == 0 {
        return x.clone();
    }
    let w = binomial(radius);
    let (n, cols) = x.shape();
    let r = radius as isize;
    let mut out = Matrix::zeros(n, cols);
    for t in 0..n {
        let taps = || (-r..=r).filter(move |k| (0..n as isize).contains(&(t as isize + k)));
        let norm: f64 = taps().map(|k| w[(k + r) as usize]).sum();
        for k in taps() {
            let s = (t as isize + k) as usize;
            let weight = w[(k + r) as usize] / norm;
            let (from, to) = if transpose { (t, s) } else { (s, t) };
            for c in 0..cols {
                let v = out.get(to, c) + weight * x.get(from, c);
                out.set(to, c, v);
            }
        }
    }
    out
}

impl Parameters for Generator {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        visit_pair(prefix, &self.stack, &self.head, f);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        self.stack.visit_mut(&crate::nn::params_join(prefix, "stack"), f);
        self.head.visit_mut(&crate::nn::params_join(prefix, "head"), f);
    }
}

/// Real-vs-generated scorer: mean-pooled stack output into one logit.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub stack: BiLstmStack,
    pub head: DenseParams,
}

#[derive(Clone, Debug)]
pub struct DiscriminatorTrace {
    points: Vec<Point>,
    stack: StackTrace,
    pooled: Vec<f64>,
    pub logit: f64,
}

impl DiscriminatorTrace {
    pub fn probability(&self) -> f64 {
        sigmoid(self.logit)
    }
}

impl Discriminator {
    pub fn init<R: Rng>(hidden: usize, depth: usize, rng: &mut R) -> Self {
        let stack = BiLstmStack::init(FEATURES, hidden, depth, rng);
        let head = DenseParams::init(stack.output_dim(), 1, rng);
        Discriminator { stack, head }
    }

    pub fn forward(&self, points: &[Point]) -> Result<DiscriminatorTrace> {
        let stack = self.stack.forward(&path_features(points))?;
        let pooled = mean_pool(stack.output())?;
        let logit = self.head.forward_vec(&pooled)?[0];
        Ok(DiscriminatorTrace {
            points: points.to_vec(),
            stack,
            pooled,
            logit,
        })
    }

    /// Probability that `points` came from the user distribution.
    pub fn probability(&self, points: &[Point]) -> Result<f64> {
        Ok(self.forward(points)?.probability())
    }

    /// Backward from `d_logit`; returns the gradient w.r.t. the points.
    pub fn backward(
        &self,
        trace: &DiscriminatorTrace,
        d_logit: f64,
        grads: &mut Discriminator,
    ) -> Result<Matrix> {
        let mut d_pooled = vec![0.0; trace.pooled.len()];
        self.head.backward_vec(&trace.pooled, &[d_logit], &mut grads.head, &mut d_pooled);
        let out = trace.stack.output();
        let n = out.rows() as f64;
        let mut d_stack = Matrix::zeros(out.rows(), out.cols());
        for t in 0..out.rows() {
            for (d, g) in d_stack.row_mut(t).iter_mut().zip(&d_pooled) {
                *d = g / n;
            }
        }
        let d_feat = self.stack.backward(&trace.stack, &d_stack, &mut grads.stack)?;
        Ok(features_backward(&trace.points, &d_feat))
    }
}

impl Parameters for Discriminator {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        visit_pair(prefix, &self.stack, &self.head, f);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        self.stack.visit_mut(&crate::nn::params_join(prefix, "stack"), f);
        self.head.visit_mut(&crate::nn::params_join(prefix, "head"), f);
    }
}

/// Word recognizer: per-step logits over the alphabet plus blank.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    pub stack: BiLstmStack,
    pub head: DenseParams,
}

#[derive(Clone, Debug)]
pub struct ClassifierTrace {
    points: Vec<Point>,
    stack: StackTrace,
    pub logits: Matrix,
}

impl Classifier {
    pub fn init<R: Rng>(classes: usize, hidden: usize, depth: usize, rng: &mut R) -> Self {
        let stack = BiLstmStack::init(FEATURES, hidden, depth, rng);
        let head = DenseParams::init(stack.output_dim(), classes, rng);
        Classifier { stack, head }
    }

    pub fn classes(&self) -> usize {
        self.head.output_dim()
    }

    pub fn forward(&self, points: &[Point]) -> Result<ClassifierTrace> {
        let stack = self.stack.forward(&path_features(points))?;
        let logits = self.head.forward_rows(stack.output())?;
        Ok(ClassifierTrace {
            points: points.to_vec(),
            stack,
            logits,
        })
    }

    /// Per-step log probabilities.
    pub fn log_probs(&self, points: &[Point]) -> Result<Matrix> {
        let logits = self.forward(points)?.logits;
        let mut out = Matrix::zeros(logits.rows(), logits.cols());
        for t in 0..logits.rows() {
            out.row_mut(t).copy_from_slice(&log_softmax(logits.row(t)));
        }
        Ok(out)
    }

    /// Backward from logit gradients; returns the gradient w.r.t. the points.
    pub fn backward(
        &self,
        trace: &ClassifierTrace,
        d_logits: &Matrix,
        grads: &mut Classifier,
    ) -> Result<Matrix> {
        let d_stack = self.head.backward_rows(trace.stack.output(), d_logits, &mut grads.head);
        let d_feat = self.stack.backward(&trace.stack, &d_stack, &mut grads.stack)?;
        Ok(features_backward(&trace.points, &d_feat))
    }

    /// CTC loss of `labels` on `points`. Accumulates `scale` times the
    /// parameter gradient into `grads` and returns the loss together with the
    /// (equally scaled) gradient w.r.t. the points.
    pub fn ctc_backward(
        &self,
        points: &[Point],
        labels: &[usize],
        alphabet: &CtcAlphabet,
        scale: f64,
        grads: &mut Classifier,
    ) -> Result<(f64, Matrix)> {
        let trace = self.forward(points)?;
        let (loss, mut d_logits) = ctc::ctc_loss_and_grad(&trace.logits, labels, alphabet)?;
        d_logits.scale(scale);
        let d_points = self.backward(&trace, &d_logits, grads)?;
        Ok((loss, d_points))
    }
}

impl Parameters for Classifier {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix)) {
        visit_pair(prefix, &self.stack, &self.head, f);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix)) {
        self.stack.visit_mut(&crate::nn::params_join(prefix, "stack"), f);
        self.head.visit_mut(&crate::nn::params_join(prefix, "head"), f);
    }
}
