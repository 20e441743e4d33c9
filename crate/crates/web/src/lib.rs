//! Browser demo: path drawing, user-style knobs and a CTC check, exported
//! through wasm-bindgen. The plain functions carry the logic so they can be
//! tested natively.

use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use swipegan::ctc::{ctc_brute_force, ctc_loss, greedy_decode, CtcAlphabet};
use swipegan::nn::{softmax, Matrix};
use swipegan::render::render_svg;
use swipegan::synth::{apply_user_style, synthesize_spline, StyleParams};
use swipegan::{reference_qwerty, seed, Result};

/// Points per drawn path.
pub const DEMO_LENGTH: usize = 64;

/// Letters of the CTC demo alphabet; small enough to enumerate.
pub const CTC_ALPHABET: [char; 3] = ['a', 'b', 'c'];

pub fn spline_svg(word: &str) -> Result<String> {
    let layout = reference_qwerty();
    Ok(render_svg(&layout, &synthesize_spline(&layout, word, DEMO_LENGTH)?))
}

pub fn user_style_svg(word: &str, style: &StyleParams) -> Result<String> {
    style.validate()?;
    let layout = reference_qwerty();
    let clean = synthesize_spline(&layout, word, DEMO_LENGTH)?;
    Ok(render_svg(&layout, &apply_user_style(&clean, style)))
}

#[derive(Debug, Serialize)]
pub struct CtcDemo {
    pub word: String,
    pub steps: usize,
    /// Per-step probabilities; the last column is the blank.
    pub probs: Vec<Vec<f64>>,
    pub forward_backward: f64,
    pub brute_force: f64,
    pub greedy: String,
}

/// Seeded random per-step distributions scored against `word` both ways.
pub fn ctc_demo(word: &str, steps: usize, seed_: u64) -> Result<CtcDemo> {
    let alpha = CtcAlphabet::new(CTC_ALPHABET.to_vec())?;
    let mut rng = seed::rng(seed_);
    let rows: Vec<Vec<f64>> = (0..steps)
        .map(|_| softmax(&(0..alpha.size()).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>()))
        .collect();
    let probs = Matrix::from_rows(&rows)?;
    Ok(CtcDemo {
        word: word.to_string(),
        steps,
        forward_backward: ctc_loss(&probs, &alpha, word)?,
        brute_force: ctc_brute_force(&probs, &alpha, word)?,
        greedy: greedy_decode(&probs, &alpha),
        probs: rows,
    })
}

fn js(e: swipegan::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen(js_name = splineSvg)]
pub fn spline_svg_js(word: &str) -> std::result::Result<String, JsValue> {
    spline_svg(word).map_err(js)
}

#[wasm_bindgen(js_name = userStyleSvg)]
pub fn user_style_svg_js(
    word: &str,
    overshoot: f64,
    excursion: f64,
    corner_cut: f64,
    speed_warp: f64,
    rng_seed: u32,
) -> std::result::Result<String, JsValue> {
    let style = StyleParams {
        overshoot_scale: overshoot,
        excursion_amplitude: excursion,
        corner_cut,
        speed_warp,
        rng_seed: u64::from(rng_seed),
        ..StyleParams::default()
    };
    user_style_svg(word, &style).map_err(js)
}

/// JSON-encoded [`CtcDemo`].
#[wasm_bindgen(js_name = ctcDemo)]
pub fn ctc_demo_js(word: &str, steps: usize, rng_seed: u32) -> std::result::Result<String, JsValue> {
    let demo = ctc_demo(word, steps, u64::from(rng_seed)).map_err(js)?;
    serde_json::to_string(&demo).map_err(|e| JsValue::from_str(&e.to_string()))
}
