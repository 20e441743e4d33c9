//! Numeric core: matrices, dense and bi-LSTM layers with hand-derived
//! backward passes, Adam, checkpoints and a finite-difference gradient check.

mod adam;
pub mod checkpoint;
mod dense;
mod gradcheck;
mod lstm;
mod matrix;
mod params;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, TensorSet};
pub use dense::DenseParams;
pub use gradcheck::{gradient_check, relative_error, GradCheck};
pub use lstm::{BiLstmParams, BiLstmStack, BiLstmTrace, LstmParams, LstmTrace, StackTrace};
pub use matrix::{axpy, dot, Matrix};
pub use params::Parameters;
pub(crate) use params::join as params_join;

use crate::error::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(x))`, stable for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Softmax with max subtraction.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// Column means over the rows (time steps) of `x`.
pub fn mean_pool(x: &Matrix) -> Result<Vec<f64>> {
    if x.rows() == 0 {
        return Err(Error::Shape("mean_pool over an empty sequence".into()));
    }
    let mut out = vec![0.0; x.cols()];
    for t in 0..x.rows() {
        axpy(1.0, x.row(t), &mut out);
    }
    let n = x.rows() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn activation_identities() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        assert_eq!(sigmoid(0.0), 0.5);
        let s = softmax(&[1000.0, 999.0, -5.0]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert!((log_sigmoid(2.0) - sigmoid(2.0).ln()).abs() < 1e-15);
        let ls = log_softmax(&[1.0, 2.0, 3.0]);
        let s = softmax(&[1.0, 2.0, 3.0]);
        for (a, b) in ls.iter().zip(&s) {
            assert!((a - b.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_pool_of_identical_rows() {
        let x = Matrix::from_rows(&[vec![0.25, -1.0], vec![0.25, -1.0], vec![0.25, -1.0]]).unwrap();
        assert_eq!(mean_pool(&x).unwrap(), vec![0.25, -1.0]);
        assert!(mean_pool(&Matrix::zeros(0, 2)).is_err());
    }

    fn random_seq(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = seed::rng(seed);
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Straight-line scalar re-implementation of one LSTM direction.
    fn reference_direction(p: &LstmParams, x: &Matrix, reverse: bool) -> Vec<Vec<f64>> {
        let h = p.hidden_dim();
        let steps = x.rows();
        let mut hs = vec![vec![0.0; h]; steps];
        let mut hprev = vec![0.0; h];
        let mut cprev = vec![0.0; h];
        let order: Vec<usize> = if reverse { (0..steps).rev().collect() } else { (0..steps).collect() };
        for t in order {
            let mut hnew = vec![0.0; h];
            let mut cnew = vec![0.0; h];
            for j in 0..h {
                let pre = |gate: usize| {
                    let r = gate * h + j;
                    let mut z = p.b.get(r, 0);
                    for k in 0..x.cols() {
                        z += p.w.get(r, k) * x.get(t, k);
                    }
                    for k in 0..h {
                        z += p.u.get(r, k) * hprev[k];
                    }
                    z
                };
                let i = 1.0 / (1.0 + (-pre(0)).exp());
                let f = 1.0 / (1.0 + (-pre(1)).exp());
                let g = pre(2).tanh();
                let o = 1.0 / (1.0 + (-pre(3)).exp());
                cnew[j] = f * cprev[j] + i * g;
                hnew[j] = o * cnew[j].tanh();
            }
            hs[t] = hnew.clone();
            hprev = hnew;
            cprev = cnew;
        }
        hs
    }

    #[test]
    fn bilstm_matches_scalar_reference() {
        let p = BiLstmParams::init(2, 3, &mut seed::rng(11));
        let x = random_seq(5, 2, 12);
        let out = p.forward(&x).unwrap().output;
        let f = reference_direction(&p.forward, &x, false);
        let b = reference_direction(&p.backward, &x, true);
        for t in 0..5 {
            for j in 0..3 {
                assert!((out.get(t, j) - f[t][j]).abs() < 1e-12);
                assert!((out.get(t, 3 + j) - b[t][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_params_give_zero_states() {
        let p = BiLstmParams::zeros(2, 4);
        let out = p.forward(&random_seq(6, 2, 3)).unwrap().output;
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_sequence() {
        let p = BiLstmParams::init(2, 3, &mut seed::rng(4));
        let x = random_seq(1, 2, 5);
        let out = p.forward(&x).unwrap().output;
        let f = reference_direction(&p.forward, &x, false);
        let b = reference_direction(&p.backward, &x, true);
        assert_eq!(out.rows(), 1);
        assert!((out.get(0, 0) - f[0][0]).abs() < 1e-15);
        assert!((out.get(0, 3) - b[0][0]).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let p = BiLstmParams::init(2, 3, &mut seed::rng(4));
        assert!(matches!(p.forward(&Matrix::zeros(4, 3)), Err(Error::Shape(_))));
        let x = random_seq(4, 2, 1);
        let trace = p.forward(&x).unwrap();
        let mut g = p.zeros_like();
        assert!(p.backward(&x, &trace, &Matrix::zeros(4, 5), &mut g).is_err());
    }

    #[test]
    fn every_step_sees_the_whole_sequence() {
        let p = BiLstmStack::init(2, 4, 2, &mut seed::rng(8));
        let x = random_seq(7, 2, 9);
        let base = p.forward(&x).unwrap().output().clone();
        for t_changed in 0..7 {
            let mut y = x.clone();
            y.set(t_changed, 0, y.get(t_changed, 0) + 0.5);
            let out = p.forward(&y).unwrap().output().clone();
            for t in 0..7 {
                let moved = (0..8).any(|j| out.get(t, j) != base.get(t, j));
                assert!(moved, "step {t} ignored change at {t_changed}");
            }
        }
    }

    /// Loss = sum of weights * outputs, so the upstream gradient is `weights`.
    fn stack_grad_check(input: usize, hidden: usize, depth: usize, steps: usize, seed_: u64) -> f64 {
        let stack = BiLstmStack::init(input, hidden, depth, &mut seed::rng(seed_));
        let x = random_seq(steps, input, seed_ + 1);
        let weights = random_seq(steps, 2 * hidden, seed_ + 2);
        let loss_at = |flat: &[f64], x: &Matrix| {
            let mut s = stack.clone();
            s.assign_flat(flat).unwrap();
            let out = s.forward(x).unwrap();
            out.output().data().iter().zip(weights.data()).map(|(a, b)| a * b).sum::<f64>()
        };
        let trace = stack.forward(&x).unwrap();
        let mut grads = stack.zeros_like();
        let dx = stack.backward(&trace, &weights, &mut grads).unwrap();
        let flat = stack.flatten();
        let cfg = GradCheck { seed: seed_, ..GradCheck::default() };
        let param_err = gradient_check(|p| loss_at(p, &x), &flat, &grads.flatten(), cfg);
        let input_err = gradient_check(
            |xv| loss_at(&flat, &Matrix::from_vec(steps, input, xv.to_vec()).unwrap()),
            x.data(),
            dx.data(),
            cfg,
        );
        param_err.max(input_err)
    }

    #[test]
    fn bptt_matches_finite_differences() {
        for (k, &(i, h, d, t)) in [(2, 3, 1, 5), (4, 8, 2, 10), (3, 5, 2, 1)].iter().enumerate() {
            let err = stack_grad_check(i, h, d, t, 100 + k as u64);
            assert!(err < 1e-4, "in={i} hidden={h} depth={d} T={t}: {err}");
        }
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let stack = BiLstmStack::init(2, 3, 2, &mut seed::rng(2));
        let x = random_seq(4, 2, 3);
        let trace = stack.forward(&x).unwrap();
        let mut grads = stack.zeros_like();
        stack.backward(&trace, &Matrix::zeros(4, 6), &mut grads).unwrap();
        assert_eq!(grads.sq_norm(), 0.0);
    }

    #[test]
    fn duplicated_example_doubles_gradient() {
        let stack = BiLstmStack::init(2, 3, 1, &mut seed::rng(5));
        let x = random_seq(4, 2, 6);
        let up = random_seq(4, 6, 7);
        let trace = stack.forward(&x).unwrap();
        let mut once = stack.zeros_like();
        stack.backward(&trace, &up, &mut once).unwrap();
        let mut twice = stack.zeros_like();
        stack.backward(&trace, &up, &mut twice).unwrap();
        stack.backward(&trace, &up, &mut twice).unwrap();
        let mut doubled = once.clone();
        doubled.scale(2.0);
        for (a, b) in twice.flatten().iter().zip(doubled.flatten()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn forward_is_bit_deterministic() {
        let stack = BiLstmStack::init(2, 5, 2, &mut seed::rng(5));
        let x = random_seq(9, 2, 6);
        assert_eq!(
            stack.forward(&x).unwrap().output(),
            stack.forward(&x).unwrap().output()
        );
    }
}
