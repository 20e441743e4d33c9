//! Continuous-path (swipe) keyboard laboratory: spline path synthesis, a
//! user-style simulator, adversarial style transfer with bi-LSTM networks,
//! CTC recognition and training-composition experiments.

pub mod ctc;
pub mod error;
pub mod eval;
pub mod gan;
pub mod layout;
pub mod nn;
pub mod path;
pub mod render;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use layout::{reference_qwerty, KeyboardLayout};
pub use path::{Corpus, CorpusMetadata, Path, Point, Source};
