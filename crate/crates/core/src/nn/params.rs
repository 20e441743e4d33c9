use super::Matrix;
use crate::error::{Error, Result};

/// A bundle of named parameter matrices visited in a fixed order.
///
/// Gradients use the same type as the parameters they belong to.
pub trait Parameters: Clone {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Matrix));
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(String, &mut Matrix));

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.visit_mut("", &mut |_, m| m.fill(0.0));
        z
    }

    fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit("", &mut |_, m| n += m.data().len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.visit("", &mut |_, m| out.extend_from_slice(m.data()));
        out
    }

    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        self.visit_mut("", &mut |_, m| {
            let n = m.data().len();
            m.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        });
        Ok(())
    }

    fn add_assign(&mut self, other: &Self) {
        let mut others = Vec::new();
        other.visit("", &mut |_, m| others.push(m));
        let mut i = 0;
        self.visit_mut("", &mut |_, m| {
            m.add_assign(others[i]);
            i += 1;
        });
    }

    fn scale(&mut self, s: f64) {
        self.visit_mut("", &mut |_, m| m.scale(s));
    }

    fn sq_norm(&self) -> f64 {
        let mut total = 0.0;
        self.visit("", &mut |_, m| total += m.data().iter().map(|v| v * v).sum::<f64>());
        total
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}
