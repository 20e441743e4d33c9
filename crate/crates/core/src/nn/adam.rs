use super::{Matrix, Parameters};
use crate::error::{Error, Result};

/// Adam optimizer state for one parameter bundle.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let mut gs: Vec<&Matrix> = Vec::new();
        grads.visit("", &mut |_, g| gs.push(g));
        if self.m.is_empty() {
            self.m = gs.iter().map(|g| Matrix::zeros(g.rows(), g.cols())).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != gs.len() {
            return Err(Error::Shape("Adam: state does not match the gradient bundle".into()));
        }
        let mut shapes_ok = true;
        let mut i = 0;
        params.visit("", &mut |_, p| {
            shapes_ok &= i < gs.len() && p.shape() == gs[i].shape() && gs[i].shape() == self.m[i].shape();
            i += 1;
        });
        if !shapes_ok || i != gs.len() {
            return Err(Error::Shape("Adam: parameter/gradient/state shapes differ".into()));
        }
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let lr = self.lr;
        let eps = self.eps;
        let (ms, vs) = (&mut self.m, &mut self.v);
        let mut i = 0;
        params.visit_mut("", &mut |_, p| {
            let g = gs[i].data();
            let m = ms[i].data_mut();
            let v = vs[i].data_mut();
            for (k, pk) in p.data_mut().iter_mut().enumerate() {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                let update = lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                *pk -= update;
            }
            i += 1;
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::DenseParams;

    fn setup() -> (DenseParams, DenseParams) {
        let mut p = DenseParams::zeros(3, 2);
        for (k, v) in p.w.data_mut().iter_mut().enumerate() {
            *v = k as f64 * 0.1 - 0.2;
        }
        let mut g = p.zeros_like();
        for (k, v) in g.w.data_mut().iter_mut().enumerate() {
            *v = if k % 2 == 0 { 0.3 } else { -2.0 };
        }
        g.b.data_mut()[0] = 1e-3;
        (p, g)
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let (mut p, g) = setup();
        let before = p.clone();
        Adam::new(0.0).step(&mut p, &g).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn zero_grads_are_a_no_op() {
        let (mut p, g) = setup();
        let before = p.clone();
        Adam::new(0.1).step(&mut p, &g.zeros_like()).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr_against_the_sign() {
        let (mut p, g) = setup();
        let before = p.flatten();
        let lr = 0.01;
        Adam::new(lr).step(&mut p, &g).unwrap();
        for ((a, b), gk) in p.flatten().iter().zip(&before).zip(g.flatten()) {
            let delta = a - b;
            assert!(delta.abs() <= lr * (1.0 + 1e-6));
            if gk != 0.0 {
                assert_eq!(delta.signum(), -gk.signum());
                assert!(delta.abs() > lr * 0.99);
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let (mut p, _) = setup();
        let g = DenseParams::zeros(2, 2);
        assert!(Adam::new(0.1).step(&mut p, &g).is_err());
    }
}
