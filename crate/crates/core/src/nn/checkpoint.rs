//! JSON checkpoints: `{"version": 1, "shapes": {...}, "values": {...}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Parameters;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Named tensors with their shapes, keyed in sorted order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TensorSet {
    pub shapes: BTreeMap<String, [usize; 2]>,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl TensorSet {
    pub fn insert_params<P: Parameters>(&mut self, prefix: &str, params: &P) {
        params.visit(prefix, &mut |name, m| {
            self.shapes.insert(name.clone(), [m.rows(), m.cols()]);
            self.values.insert(name, m.data().to_vec());
        });
    }

    /// Loads every tensor of `params` (named under `prefix`), checking shapes.
    pub fn restore_params<P: Parameters>(&self, prefix: &str, params: &mut P) -> Result<()> {
        let mut failure = None;
        params.visit_mut(prefix, &mut |name, m| {
            if failure.is_some() {
                return;
            }
            let shape = match self.shapes.get(&name) {
                Some(s) => *s,
                None => {
                    failure = Some(format!("missing tensor {name}"));
                    return;
                }
            };
            if shape != [m.rows(), m.cols()] {
                failure = Some(format!(
                    "tensor {name} has shape {shape:?}, expected [{}, {}]",
                    m.rows(),
                    m.cols()
                ));
                return;
            }
            match self.values.get(&name) {
                Some(v) if v.len() == m.data().len() => {
                    if v.iter().all(|x| x.is_finite()) {
                        m.data_mut().copy_from_slice(v);
                    } else {
                        failure = Some(format!("tensor {name} has non-finite values"));
                    }
                }
                Some(v) => {
                    failure = Some(format!(
                        "tensor {name} has {} values for shape {shape:?}",
                        v.len()
                    ))
                }
                None => failure = Some(format!("missing values for {name}")),
            }
        });
        match failure {
            Some(msg) => Err(Error::Shape(msg)),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    #[serde(flatten)]
    pub tensors: TensorSet,
}

impl Checkpoint {
    pub fn from_params<P: Parameters>(params: &P) -> Self {
        let mut tensors = TensorSet::default();
        tensors.insert_params("", params);
        Checkpoint {
            version: CHECKPOINT_VERSION,
            tensors,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and loads into `template`, which fixes the expected shapes.
    pub fn load_into<P: Parameters>(text: &str, template: &mut P) -> Result<()> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Shape(format!("unsupported checkpoint version {}", ckpt.version)));
        }
        let expected = tensor_count(template);
        if ckpt.tensors.len() != expected {
            return Err(Error::Shape(format!(
                "checkpoint has {} tensors, expected {expected}",
                ckpt.tensors.len()
            )));
        }
        ckpt.tensors.restore_params("", template)
    }
}

pub fn tensor_count<P: Parameters>(params: &P) -> usize {
    let mut n = 0;
    params.visit("", &mut |_, _| n += 1);
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{BiLstmStack, DenseParams};
    use crate::seed;

    #[test]
    fn round_trip() {
        let stack = BiLstmStack::init(3, 4, 2, &mut seed::rng(1));
        let text = Checkpoint::from_params(&stack).to_json().unwrap();
        let mut other = BiLstmStack::zeros(3, 4, 2);
        Checkpoint::load_into(&text, &mut other).unwrap();
        assert_eq!(other, stack);
        assert!(text.contains("\"layer1.bwd.w\":[16,8]"));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let d = DenseParams::init(3, 2, &mut seed::rng(1));
        let text = Checkpoint::from_params(&d).to_json().unwrap();
        let mut wrong = DenseParams::zeros(4, 2);
        let err = Checkpoint::load_into(&text, &mut wrong).unwrap_err();
        assert!(err.to_string().contains("shape"), "{err}");
        assert!(Checkpoint::load_into("{\"version\":1}", &mut wrong).is_err());
    }
}
