//! Recognizer training and Top-1 evaluation, training-composition
//! experiments and learning-curve fitting.

use std::collections::HashSet;
use std::fmt::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ctc::{lexicon_top1_log, CtcAlphabet};
use crate::error::{Error, Result};
use crate::gan::{fit_classifier, Classifier, FitConfig, FitReport};
use crate::nn::checkpoint::CHECKPOINT_VERSION;
use crate::nn::{Matrix, TensorSet};
use crate::path::{Path, Point};
use crate::seed;

/// Anything producing per-step log probabilities over `a..z` plus blank.
pub trait StepScorer {
    fn log_probs(&self, points: &[Point]) -> Result<Matrix>;
}

impl StepScorer for Classifier {
    fn log_probs(&self, points: &[Point]) -> Result<Matrix> {
        Classifier::log_probs(self, points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognizerConfig {
    pub hidden: usize,
    pub depth: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            hidden: 32,
            depth: 1,
            epochs: 30,
            batch_size: 16,
            lr: 1e-2,
            seed: 0,
        }
    }
}

impl RecognizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.depth == 0 || self.batch_size == 0 {
            return Err(Error::invalid("hidden, depth and batch_size must be positive"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("lr must be finite and >= 0"));
        }
        Ok(())
    }
}

/// A trained classifier together with the settings that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Recognizer {
    pub config: RecognizerConfig,
    pub classifier: Classifier,
}

#[derive(Serialize, Deserialize)]
struct RecognizerCheckpoint {
    version: u32,
    config: RecognizerConfig,
    #[serde(flatten)]
    tensors: TensorSet,
}

impl Recognizer {
    /// Untrained network drawn from `config.seed`.
    pub fn new(config: RecognizerConfig) -> Result<Self> {
        config.validate()?;
        let classifier = Classifier::init(
            CtcAlphabet::lowercase().size(),
            config.hidden,
            config.depth,
            &mut seed::derived_rng(config.seed, "recognizer", 0),
        );
        Ok(Recognizer { config, classifier })
    }

    pub fn to_checkpoint(&self) -> Result<String> {
        let mut tensors = TensorSet::default();
        tensors.insert_params("classifier", &self.classifier);
        Ok(serde_json::to_string(&RecognizerCheckpoint {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            tensors,
        })?)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let ck: RecognizerCheckpoint = serde_json::from_str(text)
            .map_err(|e| Error::Shape(format!("unreadable checkpoint: {e}")))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Shape(format!("unsupported checkpoint version {}", ck.version)));
        }
        let mut rec = Recognizer::new(ck.config)?;
        ck.tensors.restore_params("classifier", &mut rec.classifier)?;
        if ck.tensors.len() != crate::nn::checkpoint::tensor_count(&rec.classifier) {
            return Err(Error::Shape("checkpoint has unexpected tensors".into()));
        }
        Ok(rec)
    }
}

impl StepScorer for Recognizer {
    fn log_probs(&self, points: &[Point]) -> Result<Matrix> {
        self.classifier.log_probs(points)
    }
}

/// Trains a fresh recognizer with CTC for `config.epochs` epochs over
/// `paths`. Paths whose word cannot be aligned are skipped and counted.
pub fn train_recognizer(
    paths: &[&Path],
    lexicon: &[String],
    config: &RecognizerConfig,
) -> Result<(Recognizer, FitReport)> {
    if paths.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    let words: HashSet<&str> = lexicon.iter().map(String::as_str).collect();
    if let Some(p) = paths.iter().find(|p| !words.contains(p.word.as_str())) {
        return Err(Error::invalid(format!("training word {:?} is not in the lexicon", p.word)));
    }
    let mut rec = Recognizer::new(config.clone())?;
    let fit = FitConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        lr: config.lr,
        seed: seed::derive(config.seed, "fit", 0),
    };
    let report = fit_classifier(&mut rec.classifier, &CtcAlphabet::lowercase(), paths, fit)?;
    Ok((rec, report))
}

/// Lexicon-constrained Top-1 recognition of one path.
pub fn recognize<S: StepScorer + ?Sized>(
    scorer: &S,
    points: &[Point],
    lexicon: &[String],
) -> Result<String> {
    lexicon_top1_log(&scorer.log_probs(points)?, &CtcAlphabet::lowercase(), lexicon)
}

/// Fraction of `test` whose Top-1 lexicon word equals its label.
pub fn evaluate_top1<S: StepScorer + ?Sized>(
    scorer: &S,
    test: &[&Path],
    lexicon: &[String],
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("test corpus is empty"));
    }
    let mut correct = 0usize;
    for p in test {
        match recognize(scorer, &p.points, lexicon) {
            Ok(w) if w == p.word => correct += 1,
            Ok(_) | Err(Error::NoFeasibleWord { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// A training mixture: how many user-style, spline and generated paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionSpec {
    pub label: String,
    #[serde(default)]
    pub user: usize,
    #[serde(default)]
    pub synthetic: usize,
    #[serde(default)]
    pub gan: usize,
}

impl CompositionSpec {
    pub fn new(label: &str, user: usize, synthetic: usize, gan: usize) -> Self {
        CompositionSpec {
            label: label.to_string(),
            user,
            synthetic,
            gan,
        }
    }
}

/// The corpora compositions draw from.
#[derive(Clone, Copy, Debug)]
pub struct Pools<'a> {
    pub user: &'a [Path],
    pub synthetic: &'a [Path],
    pub gan: &'a [Path],
    pub test: &'a [Path],
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositionResult {
    pub label: String,
    pub n_user: usize,
    pub n_synth: usize,
    pub n_gan: usize,
    pub top1: f64,
    pub seed: u64,
    pub runtime_secs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<CompositionResult>,
}

impl ExperimentReport {
    /// `label,n_user,n_synth,n_gan,top1`; deterministic for fixed inputs.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,n_user,n_synth,n_gan,top1\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.label, r.n_user, r.n_synth, r.n_gan, r.top1);
        }
        s
    }

    pub fn to_table(&self) -> String {
        let header = ["label", "user", "synth", "gan", "top1", "secs"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.n_user.to_string(),
                    r.n_synth.to_string(),
                    r.n_gan.to_string(),
                    format!("{:.4}", r.top1),
                    format!("{:.1}", r.runtime_secs),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..6)
            .map(|c| cells.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        let line = |s: &mut String, row: &[&str]| {
            let parts: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if c == 0 {
                        format!("{v:<w$}", w = widths[c])
                    } else {
                        format!("{v:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(s, "{}", parts.join("  ").trim_end());
        };
        line(&mut s, &header);
        for r in &cells {
            line(&mut s, &r.iter().map(String::as_str).collect::<Vec<_>>());
        }
        s
    }
}

fn point_key(p: &Path) -> Vec<u64> {
    p.points.iter().flat_map(|q| [q.x.to_bits(), q.y.to_bits()]).collect()
}

/// Fails if any test path has exactly the same points as a training path.
pub fn check_disjoint(train: &[&Path], test: &[&Path]) -> Result<()> {
    let keys: HashSet<Vec<u64>> = train.iter().map(|p| point_key(p)).collect();
    match test.iter().position(|p| keys.contains(&point_key(p))) {
        Some(i) => Err(Error::invalid(format!(
            "test path {i} ({:?}) also appears in the training data",
            test[i].word
        ))),
        None => Ok(()),
    }
}

/// `n` paths from `pool`, in an order fixed by `(seed, name)` so every
/// composition asking for the same source sees a nested subset.
fn pick<'a>(pool: &'a [Path], n: usize, seed_: u64, name: &str) -> Result<Vec<&'a Path>> {
    if n > pool.len() {
        return Err(Error::invalid(format!(
            "{n} {name} paths requested, {} available",
            pool.len()
        )));
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut seed::derived_rng(seed_, name, 0));
    Ok(idx[..n].iter().map(|&i| &pool[i]).collect())
}

/// Trains one recognizer per spec with identical settings and evaluates each
/// on the shared test pool, in spec order.
pub fn run_compositions(
    specs: &[CompositionSpec],
    pools: Pools<'_>,
    lexicon: &[String],
    config: &RecognizerConfig,
) -> Result<ExperimentReport> {
    let mut seen = HashSet::new();
    for s in specs {
        if !seen.insert(s.label.as_str()) {
            return Err(Error::invalid(format!("duplicate composition label {:?}", s.label)));
        }
        if s.user + s.synthetic + s.gan == 0 {
            return Err(Error::invalid(format!("composition {:?} is empty", s.label)));
        }
    }
    let test: Vec<&Path> = pools.test.iter().collect();
    let mut rows = Vec::with_capacity(specs.len());
    for s in specs {
        let start = Instant::now();
        let mut train = pick(pools.user, s.user, config.seed, "user")?;
        train.extend(pick(pools.synthetic, s.synthetic, config.seed, "synthetic")?);
        train.extend(pick(pools.gan, s.gan, config.seed, "gan")?);
        check_disjoint(&train, &test)?;
        let (rec, _) = train_recognizer(&train, lexicon, config)?;
        let top1 = evaluate_top1(&rec, &test, lexicon)?;
        rows.push(CompositionResult {
            label: s.label.clone(),
            n_user: s.user,
            n_synth: s.synthetic,
            n_gan: s.gan,
            top1,
            seed: config.seed,
            runtime_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ExperimentReport { rows })
}

/// Least-squares slope of `ln(error)` against `ln(size)`.
pub fn learning_curve_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid("a slope needs at least two points"));
    }
    if let Some(&(s, e)) = points.iter().find(|&&(s, e)| !(s > 0.0 && e > 0.0)) {
        return Err(Error::invalid(format!(
            "sizes and errors must be positive, got ({s}, {e})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, e)| (s.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all training sizes are equal"));
    }
    Ok(sxy / sxx)
}

/// Parses `size,error` rows (an optional header line is skipped).
pub fn parse_curve_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => out.push(p),
            None if i == 0 && out.is_empty() => {}
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected `size,error`, got {line:?}"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_two_points_is_closed_form() {
        let s = learning_curve_slope(&[(1.1e6, 0.415), (2.2e6, 0.378)]).unwrap();
        assert!((s - (0.378f64 / 0.415).ln() / 2f64.ln()).abs() < 1e-15);
        assert!((s + 0.1347).abs() < 1e-3);
        assert_eq!(learning_curve_slope(&[(10.0, 0.3), (20.0, 0.3)]).unwrap(), 0.0);
        assert!(learning_curve_slope(&[(10.0, 0.3)]).is_err());
        assert!(learning_curve_slope(&[(10.0, 0.0), (20.0, 0.3)]).is_err());
    }

    #[test]
    fn curve_csv() {
        let pts = parse_curve_csv("size,error\n1100000,0.415\n2200000,0.378\n").unwrap();
        assert_eq!(pts, vec![(1.1e6, 0.415), (2.2e6, 0.378)]);
        assert!(matches!(parse_curve_csv("1,2\nx,y\n"), Err(Error::Parse { line: 2, .. })));
    }
}
