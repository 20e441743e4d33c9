//! Adversarial style transfer with an auxiliary recognizer.
//!
//! A generator shifts each point of a synthetic path, a discriminator tells
//! user-style paths from generated ones, and a CTC classifier keeps the
//! generated paths readable. The generator minimizes
//! `lambda * (adversarial + distance) + (1 - lambda) * ctc`.

mod nets;

pub use nets::{
    features_backward, path_features, Classifier, ClassifierTrace, Discriminator,
    DiscriminatorTrace, Generator, GeneratorTrace, FEATURES,
};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ctc::{min_steps, CtcAlphabet};
use crate::error::{Error, Result};
use crate::nn::checkpoint::CHECKPOINT_VERSION;
use crate::nn::{log_sigmoid, sigmoid, Adam, Matrix, Parameters, TensorSet};
use crate::path::{Corpus, CorpusMetadata, Path, Point, Source, COORD_MARGIN, DEFAULT_LENGTH};
use crate::seed;

/// Probabilities are kept this far from 0 and 1 before taking logs.
pub const PROB_EPS: f64 = 1e-12;

/// Generator string recorded in transferred corpora.
pub const TRANSFER_GENERATOR: &str = "gan-transfer";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GanCost {
    pub value: f64,
    /// Set when an input probability had to be pulled into `[eps, 1 - eps]`.
    pub clamped: bool,
}

/// `ln d_p + ln(1 - d_y) + delta`, where `d_p` and `d_y` are the
/// discriminator's outputs on user and generated paths.
pub fn compute_gan_cost(d_p: f64, d_y: f64, delta: f64) -> Result<GanCost> {
    for (name, p) in [("d_p", d_p), ("d_y", d_y)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("{name} = {p} is not a probability")));
        }
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("distance term {delta} must be finite and >= 0")));
    }
    let clamp = |p: f64| p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let (cp, cy) = (clamp(d_p), clamp(d_y));
    Ok(GanCost {
        value: cp.ln() + (1.0 - cy).ln() + delta,
        clamped: cp != d_p || cy != d_y,
    })
}

/// `lambda * k + (1 - lambda) * l`.
pub fn combined_loss(k: f64, l: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 1.0 {
        return Ok(k);
    }
    if lambda == 0.0 {
        return Ok(l);
    }
    Ok(lambda * k + (1.0 - lambda) * l)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda = {lambda} outside [0, 1]")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanConfig {
    /// Points per path.
    pub length: usize,
    pub lambda: f64,
    pub generator_hidden: usize,
    pub generator_depth: usize,
    /// Bound on each displacement coordinate; 0 leaves it unbounded.
    pub max_shift: f64,
    /// Radius of the low-pass filter on displacements; 0 disables it.
    pub smoothing: usize,
    /// Displacements along and across the input path rather than in x, y.
    pub local_frame: bool,
    /// Weight of the mean squared displacement in the generator objective.
    pub delta_weight: f64,
    /// Size of the per-path Gaussian latent fed to the generator at every
    /// step; 0 makes the generator a deterministic function of its input.
    pub noise_channels: usize,
    pub discriminator_hidden: usize,
    pub discriminator_depth: usize,
    pub classifier_hidden: usize,
    pub classifier_depth: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub lr_classifier: f64,
    /// Learning rates fall linearly to this fraction of their initial value
    /// over the run; 1 keeps them constant.
    pub lr_floor: f64,
    pub batch_size: usize,
    pub iterations: usize,
    /// Epochs of classifier pre-training before the adversarial loop.
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    /// Use `ln(1 - D(G(x)))` for the generator instead of `-ln D(G(x))`.
    pub literal_minimax: bool,
    /// Steps between checkpoint callbacks; 0 disables them.
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            length: DEFAULT_LENGTH,
            lambda: 0.5,
            generator_hidden: 16,
            generator_depth: 1,
            max_shift: 0.1,
            smoothing: 2,
            local_frame: true,
            delta_weight: 5.0,
            noise_channels: 2,
            discriminator_hidden: 16,
            discriminator_depth: 1,
            classifier_hidden: 32,
            classifier_depth: 1,
            lr_generator: 1e-3,
            lr_discriminator: 1e-3,
            lr_classifier: 1e-3,
            lr_floor: 0.1,
            batch_size: 16,
            iterations: 2000,
            pretrain_epochs: 30,
            pretrain_lr: 1e-2,
            literal_minimax: false,
            checkpoint_every: 0,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.length < 2 {
            return Err(Error::invalid("length must be at least 2"));
        }
        let sizes = [
            ("generator_hidden", self.generator_hidden),
            ("generator_depth", self.generator_depth),
            ("discriminator_hidden", self.discriminator_hidden),
            ("discriminator_depth", self.discriminator_depth),
            ("classifier_hidden", self.classifier_hidden),
            ("classifier_depth", self.classifier_depth),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.max_shift >= 0.0 && self.max_shift.is_finite()) {
            return Err(Error::invalid("max_shift must be finite and >= 0"));
        }
        if !(self.lr_floor >= 0.0 && self.lr_floor <= 1.0) {
            return Err(Error::invalid("lr_floor must be in [0, 1]"));
        }
        if !(self.delta_weight >= 0.0 && self.delta_weight.is_finite()) {
            return Err(Error::invalid("delta_weight must be finite and >= 0"));
        }
        for (name, lr) in [
            ("lr_generator", self.lr_generator),
            ("lr_discriminator", self.lr_discriminator),
            ("lr_classifier", self.lr_classifier),
            ("pretrain_lr", self.pretrain_lr),
        ] {
            if !(lr >= 0.0 && lr.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// How often each network has been run or updated by the training loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub generator_forward: u64,
    pub discriminator_forward: u64,
    pub discriminator_updates: u64,
    pub classifier_forward: u64,
    pub classifier_updates: u64,
}

/// Losses measured during one training step, before its updates.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Discriminator cross-entropy; `None` when `lambda = 0`.
    pub d_loss: Option<f64>,
    /// Generator adversarial term plus mean distance; `None` when `lambda = 0`.
    pub g_loss: Option<f64>,
    /// Mean CTC loss on generated paths; `None` when `lambda = 1` or every
    /// target was infeasible.
    pub ctc_loss: Option<f64>,
    /// Mean squared displacement between input and generated paths.
    pub delta_mean: f64,
    /// Paths whose word cannot be aligned in `length` steps.
    pub skipped: usize,
}

/// Loss curves as CSV: `step,d_loss,g_loss,ctc_loss,delta_mean`.
pub fn loss_csv(reports: &[StepReport]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("step,d_loss,g_loss,ctc_loss,delta_mean\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step,
            opt(r.d_loss),
            opt(r.g_loss),
            opt(r.ctc_loss),
            r.delta_mean
        ));
    }
    out
}

/// One standard-normal latent vector of `cols` values, drawn from `seed`
/// and repeated on each of `rows` steps. Per-step white noise would make the
/// generated strokes jitter.
pub fn noise_matrix(rows: usize, cols: usize, seed_: u64) -> Matrix {
    let mut rng = seed::rng(seed_);
    let z: Vec<f64> = (0..cols).map(|_| rng.sample(StandardNormal)).collect();
    let data = (0..rows).flat_map(|_| z.iter().copied()).collect();
    Matrix::from_vec(rows, cols, data).expect("sized by construction")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub updates: usize,
    /// Training paths dropped because their word cannot be aligned.
    pub skipped: usize,
    /// Mean CTC loss over the last epoch (NaN when nothing was trained).
    pub final_loss: f64,
}

/// Trains `classifier` with CTC on `paths` for a fixed number of epochs,
/// reshuffling each epoch.
pub fn fit_classifier(
    classifier: &mut Classifier,
    alphabet: &CtcAlphabet,
    paths: &[&Path],
    cfg: FitConfig,
) -> Result<FitReport> {
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch_size must be positive"));
    }
    let mut items = Vec::with_capacity(paths.len());
    let mut skipped = 0;
    for p in paths {
        let labels = alphabet.encode(&p.word)?;
        if p.len() < min_steps(&labels) {
            skipped += 1;
        } else {
            items.push((p.points.as_slice(), labels));
        }
    }
    let mut adam = Adam::new(cfg.lr);
    let mut updates = 0;
    let mut final_loss = f64::NAN;
    let mut order: Vec<usize> = (0..items.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut seed::derived_rng(cfg.seed, "epoch", epoch as u64));
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut grads = classifier.zeros_like();
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let (points, labels) = &items[i];
                total += classifier.ctc_backward(points, labels, alphabet, scale, &mut grads)?.0;
            }
            adam.step(classifier, &grads)?;
            updates += 1;
        }
        if !items.is_empty() {
            final_loss = total / items.len() as f64;
        }
    }
    Ok(FitReport {
        updates,
        skipped,
        final_loss,
    })
}

/// Generator, discriminator and classifier with their optimizer state.
#[derive(Clone, Debug)]
pub struct GanModel {
    pub config: GanConfig,
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub classifier: Classifier,
    alphabet: CtcAlphabet,
    opt_generator: Adam,
    opt_discriminator: Adam,
    opt_classifier: Adam,
    counts: CallCounts,
}

#[derive(Serialize, Deserialize)]
struct GanCheckpoint {
    version: u32,
    lambda: f64,
    config: GanConfig,
    #[serde(flatten)]
    tensors: TensorSet,
}

impl GanModel {
    pub fn new(config: GanConfig) -> Result<Self> {
        config.validate()?;
        let alphabet = CtcAlphabet::lowercase();
        let s = config.seed;
        let generator = Generator::init(
            config.noise_channels,
            config.generator_hidden,
            config.generator_depth,
            config.max_shift,
            &mut seed::derived_rng(s, "generator", 0),
        )
        .with_smoothing(config.smoothing)
        .with_local_frame(config.local_frame);
        let discriminator = Discriminator::init(
            config.discriminator_hidden,
            config.discriminator_depth,
            &mut seed::derived_rng(s, "discriminator", 0),
        );
        let classifier = Classifier::init(
            alphabet.size(),
            config.classifier_hidden,
            config.classifier_depth,
            &mut seed::derived_rng(s, "classifier", 0),
        );
        Ok(GanModel {
            opt_generator: Adam::new(config.lr_generator),
            opt_discriminator: Adam::new(config.lr_discriminator),
            opt_classifier: Adam::new(config.lr_classifier),
            config,
            generator,
            discriminator,
            classifier,
            alphabet,
            counts: CallCounts::default(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    pub fn alphabet(&self) -> &CtcAlphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> CallCounts {
        self.counts
    }

    fn check_length(&self, path: &Path) -> Result<()> {
        if path.len() != self.config.length {
            return Err(Error::LengthMismatch {
                left: path.len(),
                right: self.config.length,
            });
        }
        Ok(())
    }

    fn noise(&self, noise_seed: u64) -> Matrix {
        noise_matrix(self.config.length, self.config.noise_channels, noise_seed)
    }

    /// Maps a synthetic path to a generated one, clamped to the coordinate
    /// margin. The same `(path, noise_seed)` always gives the same output.
    pub fn transfer(&self, path: &Path, noise_seed: u64) -> Result<Path> {
        self.check_length(path)?;
        let trace = self.generator.forward(&path.points, &self.noise(noise_seed))?;
        let (lo, hi) = (-COORD_MARGIN, 1.0 + COORD_MARGIN);
        let points = trace
            .output
            .into_iter()
            .map(|p| Point::new(p.x.clamp(lo, hi), p.y.clamp(lo, hi)))
            .collect();
        Ok(Path::new(path.word.clone(), Source::Gan, points))
    }

    /// Transfers every path, path `i` using noise derived from `(seed, i)`.
    pub fn transfer_corpus(&self, corpus: &Corpus, seed_: u64) -> Result<Corpus> {
        let paths = corpus
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| self.transfer(p, seed::derive(seed_, "transfer", i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let metadata = CorpusMetadata {
            layout: corpus.metadata.layout.clone(),
            seed: seed_,
            generator: TRANSFER_GENERATOR.to_string(),
            style: None,
        };
        Ok(Corpus::new(metadata, paths))
    }

    fn noises(&self, count: usize, noise_seed: u64) -> Vec<Matrix> {
        (0..count)
            .map(|i| self.noise(seed::derive(noise_seed, "sample", i as u64)))
            .collect()
    }

    fn generate(&mut self, batch_x: &[&Path], noises: &[Matrix]) -> Result<Vec<GeneratorTrace>> {
        self.counts.generator_forward += batch_x.len() as u64;
        batch_x
            .iter()
            .zip(noises)
            .map(|(x, n)| self.generator.forward(&x.points, n))
            .collect()
    }

    fn check_batches(&self, batch_x: &[&Path], batch_p: &[&Path]) -> Result<()> {
        if batch_x.is_empty() || batch_p.is_empty() {
            return Err(Error::invalid("training batches must be non-empty"));
        }
        for p in batch_x.iter().chain(batch_p) {
            self.check_length(p)?;
        }
        Ok(())
    }

    /// Discriminator cross-entropy on user paths `batch_p` against frozen
    /// generator outputs, accumulating its gradient when `grads` is given.
    fn discriminator_loss(
        &mut self,
        fakes: &[Vec<Point>],
        batch_p: &[&Path],
        mut grads: Option<&mut Discriminator>,
    ) -> Result<f64> {
        let (np, nf) = (batch_p.len() as f64, fakes.len() as f64);
        let mut loss = 0.0;
        self.counts.discriminator_forward += (batch_p.len() + fakes.len()) as u64;
        for p in batch_p {
            let tr = self.discriminator.forward(&p.points)?;
            loss -= log_sigmoid(tr.logit) / np;
            if let Some(g) = grads.as_deref_mut() {
                self.discriminator.backward(&tr, (sigmoid(tr.logit) - 1.0) / np, g)?;
            }
        }
        for y in fakes {
            let tr = self.discriminator.forward(y)?;
            loss -= log_sigmoid(-tr.logit) / nf;
            if let Some(g) = grads.as_deref_mut() {
                self.discriminator.backward(&tr, sigmoid(tr.logit) / nf, g)?;
            }
        }
        Ok(loss)
    }

    /// One ascent step for the discriminator with the generator frozen;
    /// returns the cross-entropy before the update.
    pub fn discriminator_step(
        &mut self,
        batch_x: &[&Path],
        batch_p: &[&Path],
        noise_seed: u64,
    ) -> Result<f64> {
        self.check_batches(batch_x, batch_p)?;
        let noises = self.noises(batch_x.len(), noise_seed);
        let fakes: Vec<Vec<Point>> =
            self.generate(batch_x, &noises)?.into_iter().map(|t| t.output).collect();
        let mut grads = self.discriminator.zeros_like();
        let loss = self.discriminator_loss(&fakes, batch_p, Some(&mut grads))?;
        self.opt_discriminator.step(&mut self.discriminator, &grads)?;
        self.counts.discriminator_updates += 1;
        Ok(loss)
    }

    /// The generator's objective on `batch_x` with the current networks,
    /// using the noise a step with `noise_seed` would draw.
    pub fn generator_objective(&mut self, batch_x: &[&Path], noise_seed: u64) -> Result<f64> {
        let noises = self.noises(batch_x.len(), noise_seed);
        Ok(self.generator_pass(batch_x, &noises, false)?.objective)
    }

    fn generator_pass(
        &mut self,
        batch_x: &[&Path],
        noises: &[Matrix],
        backprop: bool,
    ) -> Result<GeneratorPass> {
        let lambda = self.config.lambda;
        let b = batch_x.len() as f64;
        let l = self.config.length as f64;
        let traces = self.generate(batch_x, noises)?;
        let mut pass = GeneratorPass {
            objective: 0.0,
            adversarial: 0.0,
            delta: 0.0,
            ctc: 0.0,
            ctc_count: 0,
            skipped: 0,
            g_grads: self.generator.zeros_like(),
            c_grads: self.classifier.zeros_like(),
        };
        let mut scratch_d = self.discriminator.zeros_like();
        for (x, trace) in batch_x.iter().zip(&traces) {
            // Displacement in x, y whatever frame the generator works in.
            let disp: Vec<f64> = x
                .points
                .iter()
                .zip(&trace.output)
                .flat_map(|(p, q)| [q.x - p.x, q.y - p.y])
                .collect();
            let delta = disp.iter().map(|v| v * v).sum::<f64>() / l;
            pass.delta += delta / b;
            let mut d_out = Matrix::zeros(trace.output.len(), 2);
            if lambda > 0.0 {
                self.counts.discriminator_forward += 1;
                let tr = self.discriminator.forward(&trace.output)?;
                let (adv, d_logit) = if self.config.literal_minimax {
                    (log_sigmoid(-tr.logit), -sigmoid(tr.logit))
                } else {
                    (-log_sigmoid(tr.logit), sigmoid(tr.logit) - 1.0)
                };
                let dw = self.config.delta_weight;
                pass.adversarial += adv / b;
                pass.objective += lambda * (adv + dw * delta) / b;
                if backprop {
                    let d_pts =
                        self.discriminator.backward(&tr, lambda * d_logit / b, &mut scratch_d)?;
                    d_out.add_assign(&d_pts);
                    let s = lambda * dw * 2.0 / (l * b);
                    for (d, v) in d_out.data_mut().iter_mut().zip(&disp) {
                        *d += s * v;
                    }
                }
            }
            if lambda < 1.0 {
                let labels = self.alphabet.encode(&x.word)?;
                if trace.output.len() < min_steps(&labels) {
                    pass.skipped += 1;
                } else {
                    self.counts.classifier_forward += 1;
                    let w = (1.0 - lambda) / b;
                    let (loss, d_pts) = if backprop {
                        self.classifier.ctc_backward(
                            &trace.output,
                            &labels,
                            &self.alphabet,
                            w,
                            &mut pass.c_grads,
                        )?
                    } else {
                        let lp = self.classifier.log_probs(&trace.output)?;
                        (crate::ctc::ctc_loss_log(&lp, &labels, &self.alphabet)?, Matrix::zeros(0, 0))
                    };
                    pass.ctc += loss;
                    pass.ctc_count += 1;
                    pass.objective += w * loss;
                    if backprop {
                        d_out.add_assign(&d_pts);
                    }
                }
            }
            if backprop {
                self.generator.backward(trace, &d_out, &mut pass.g_grads)?;
            }
        }
        Ok(pass)
    }

    /// One discriminator step (skipped when `lambda = 0`), then one joint
    /// generator and classifier step (the classifier is untouched when
    /// `lambda = 1`).
    pub fn train_step(
        &mut self,
        step: usize,
        batch_x: &[&Path],
        batch_p: &[&Path],
        noise_seed: u64,
    ) -> Result<StepReport> {
        self.check_batches(batch_x, batch_p)?;
        let lambda = self.config.lambda;
        let d_loss = if lambda > 0.0 {
            Some(self.discriminator_step(batch_x, batch_p, noise_seed)?)
        } else {
            None
        };
        let noises = self.noises(batch_x.len(), noise_seed);
        let pass = self.generator_pass(batch_x, &noises, true)?;
        self.opt_generator.step(&mut self.generator, &pass.g_grads)?;
        if lambda < 1.0 {
            self.opt_classifier.step(&mut self.classifier, &pass.c_grads)?;
            self.counts.classifier_updates += 1;
        }
        Ok(StepReport {
            step,
            d_loss,
            g_loss: (lambda > 0.0)
                .then_some(pass.adversarial + self.config.delta_weight * pass.delta),
            ctc_loss: (pass.ctc_count > 0).then(|| pass.ctc / pass.ctc_count as f64),
            delta_mean: pass.delta,
            skipped: pass.skipped,
        })
    }

    /// Pre-trains the classifier on `paths` for `pretrain_epochs` epochs.
    pub fn pretrain_classifier(&mut self, paths: &[&Path]) -> Result<FitReport> {
        let cfg = FitConfig {
            epochs: self.config.pretrain_epochs,
            batch_size: self.config.batch_size,
            lr: self.config.pretrain_lr,
            seed: seed::derive(self.config.seed, "pretrain", 0),
        };
        for p in paths {
            self.check_length(p)?;
        }
        let alphabet = self.alphabet.clone();
        fit_classifier(&mut self.classifier, &alphabet, paths, cfg)
    }

    /// Runs `iterations` training steps on batches drawn (with replacement)
    /// from the synthetic and user corpora. `on_checkpoint` is called after
    /// every `checkpoint_every` steps.
    pub fn train<F>(
        &mut self,
        synthetic: &Corpus,
        user: &Corpus,
        mut on_checkpoint: F,
    ) -> Result<Vec<StepReport>>
    where
        F: FnMut(usize, &GanModel) -> Result<()>,
    {
        if synthetic.is_empty() || user.is_empty() {
            return Err(Error::invalid("training corpora must be non-empty"));
        }
        if synthetic.metadata.layout != user.metadata.layout {
            return Err(Error::invalid(format!(
                "corpora use different layouts: {} vs {}",
                synthetic.metadata.layout, user.metadata.layout
            )));
        }
        for p in synthetic.paths.iter().chain(&user.paths) {
            self.check_length(p)?;
        }
        let bs = self.config.batch_size;
        let mut reports = Vec::with_capacity(self.config.iterations);
        let total = self.config.iterations;
        for step in 0..total {
            let progress = if total > 1 { step as f64 / (total - 1) as f64 } else { 0.0 };
            let factor = 1.0 - (1.0 - self.config.lr_floor) * progress;
            self.opt_generator.lr = self.config.lr_generator * factor;
            self.opt_discriminator.lr = self.config.lr_discriminator * factor;
            self.opt_classifier.lr = self.config.lr_classifier * factor;
            let mut rng = seed::derived_rng(self.config.seed, "batch", step as u64);
            let bx: Vec<&Path> = (0..bs)
                .map(|_| &synthetic.paths[rng.random_range(0..synthetic.len())])
                .collect();
            let bp: Vec<&Path> =
                (0..bs).map(|_| &user.paths[rng.random_range(0..user.len())]).collect();
            let noise_seed = seed::derive(self.config.seed, "noise", step as u64);
            reports.push(self.train_step(step, &bx, &bp, noise_seed)?);
            let every = self.config.checkpoint_every;
            if every > 0 && (step + 1) % every == 0 {
                on_checkpoint(step + 1, self)?;
            }
        }
        Ok(reports)
    }

    /// Fraction of `real` scored above 0.5 plus `fake` scored below it.
    pub fn discriminator_accuracy(&self, real: &[&Path], fake: &[&Path]) -> Result<f64> {
        let mut correct = 0usize;
        for p in real {
            correct += (self.discriminator.probability(&p.points)? > 0.5) as usize;
        }
        for p in fake {
            correct += (self.discriminator.probability(&p.points)? < 0.5) as usize;
        }
        Ok(correct as f64 / (real.len() + fake.len()).max(1) as f64)
    }

    pub fn tensors(&self) -> TensorSet {
        let mut t = TensorSet::default();
        t.insert_params("generator", &self.generator);
        t.insert_params("discriminator", &self.discriminator);
        t.insert_params("classifier", &self.classifier);
        t
    }

    /// Checkpoint JSON: version, lambda, config and all named tensors.
    pub fn to_checkpoint(&self) -> Result<String> {
        let ck = GanCheckpoint {
            version: CHECKPOINT_VERSION,
            lambda: self.config.lambda,
            config: self.config.clone(),
            tensors: self.tensors(),
        };
        Ok(serde_json::to_string(&ck)?)
    }

    /// Restores a model from [`to_checkpoint`](Self::to_checkpoint) output.
    /// Optimizer state starts fresh.
    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let ck: GanCheckpoint = serde_json::from_str(text)
            .map_err(|e| Error::Shape(format!("unreadable checkpoint: {e}")))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Shape(format!("unsupported checkpoint version {}", ck.version)));
        }
        let mut config = ck.config;
        config.lambda = ck.lambda;
        let mut model = GanModel::new(config)?;
        ck.tensors.restore_params("generator", &mut model.generator)?;
        ck.tensors.restore_params("discriminator", &mut model.discriminator)?;
        ck.tensors.restore_params("classifier", &mut model.classifier)?;
        let expected = model.tensors().len();
        if ck.tensors.len() != expected {
            return Err(Error::Shape(format!(
                "checkpoint has {} tensors, model has {expected}",
                ck.tensors.len()
            )));
        }
        Ok(model)
    }
}

struct GeneratorPass {
    objective: f64,
    adversarial: f64,
    delta: f64,
    ctc: f64,
    ctc_count: usize,
    skipped: usize,
    g_grads: Generator,
    c_grads: Classifier,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::reference_qwerty;
    use crate::nn::{gradient_check, DenseParams, GradCheck};
    use crate::synth::{generate_corpus, CorpusMode, StyleParams};

    fn tiny_config(lambda: f64) -> GanConfig {
        GanConfig {
            length: 8,
            lambda,
            generator_hidden: 3,
            discriminator_hidden: 3,
            classifier_hidden: 4,
            noise_channels: 1,
            batch_size: 2,
            iterations: 3,
            pretrain_epochs: 1,
            seed: 5,
            ..GanConfig::default()
        }
    }

    fn corpora(length: usize) -> (Corpus, Corpus) {
        let layout = reference_qwerty();
        let words: Vec<String> = ["go", "to", "ax"].iter().map(|s| s.to_string()).collect();
        let style = StyleParams::default();
        let s = generate_corpus(&layout, &words, 2, CorpusMode::Synthetic, &style, 1, length).unwrap();
        let u = generate_corpus(&layout, &words, 2, CorpusMode::UserStyle, &style, 2, length).unwrap();
        (s, u)
    }

    // Thousands of chained operations: at eps = 1e-5 rounding noise in the
    // objective dominates the smallest gradient entries.
    fn deep() -> GradCheck {
        GradCheck {
            eps: 1e-4,
            ..GradCheck::default()
        }
    }

    fn with_random_head(mut m: GanModel) -> GanModel {
        let h = m.generator.stack.output_dim();
        m.generator.head = DenseParams::init(h, 2, &mut seed::rng(77));
        m
    }

    #[test]
    fn cost_identities() {
        let eps = 1e-9;
        assert!(compute_gan_cost(1.0 - eps, eps, 0.0).unwrap().value.abs() < 1e-6);
        let c = compute_gan_cost(0.5, 0.5, 0.02).unwrap();
        assert!((c.value + 1.366294).abs() < 1e-6);
        assert!(!c.clamped);
        let c = compute_gan_cost(1.0, 0.0, 0.0).unwrap();
        assert!(c.clamped && c.value.is_finite());
        assert!(compute_gan_cost(1.5, 0.5, 0.0).is_err());
        assert!(compute_gan_cost(0.5, 0.5, -1.0).is_err());
        assert_eq!(combined_loss(-1.3, 2.7, 1.0).unwrap(), -1.3);
        assert_eq!(combined_loss(-1.3, 2.7, 0.0).unwrap(), 2.7);
        assert_eq!(combined_loss(-1.0, 2.0, 0.5).unwrap(), 0.5);
        assert!(combined_loss(0.0, 0.0, 1.1).is_err());
    }

    #[test]
    fn joint_objective_gradient() {
        for lambda in [0.0, 0.3, 1.0] {
            for literal in [false, true] {
                let mut cfg = tiny_config(lambda);
                cfg.literal_minimax = literal;
                let mut m = with_random_head(GanModel::new(cfg).unwrap());
                let (s, _) = corpora(8);
                let batch: Vec<&Path> = s.paths.iter().step_by(2).collect();
                let noises = m.noises(batch.len(), 9);
                let pass = m.generator_pass(&batch, &noises, true).unwrap();
                let g0 = m.generator.flatten();
                let probe = m.clone();
                let loss = |flat: &[f64]| {
                    let mut mm = probe.clone();
                    mm.generator.assign_flat(flat).unwrap();
                    mm.generator_pass(&batch, &noises, false).unwrap().objective
                };
                let ga = pass.g_grads.flatten();
                let err = gradient_check(loss, &g0, &ga, deep());
                assert!(err < 1e-4, "generator, lambda {lambda}: {err}");
                if lambda < 1.0 {
                    let c0 = m.classifier.flatten();
                    let loss = |flat: &[f64]| {
                        let mut mm = probe.clone();
                        mm.classifier.assign_flat(flat).unwrap();
                        mm.generator_pass(&batch, &noises, false).unwrap().objective
                    };
                    let err =
                        gradient_check(loss, &c0, &pass.c_grads.flatten(), deep());
                    assert!(err < 1e-4, "classifier, lambda {lambda}: {err}");
                }
            }
        }
    }

    #[test]
    fn zero_learning_rates_leave_parameters_unchanged() {
        let mut cfg = tiny_config(0.5);
        cfg.lr_generator = 0.0;
        cfg.lr_discriminator = 0.0;
        cfg.lr_classifier = 0.0;
        let mut m = with_random_head(GanModel::new(cfg).unwrap());
        let before = m.tensors();
        let (s, u) = corpora(8);
        m.train(&s, &u, |_, _| Ok(())).unwrap();
        assert_eq!(m.tensors(), before);
    }

    #[test]
    fn lambda_endpoints_skip_networks() {
        let (s, u) = corpora(8);
        let mut m = GanModel::new(tiny_config(1.0)).unwrap();
        let classifier = m.classifier.clone();
        let reports = m.train(&s, &u, |_, _| Ok(())).unwrap();
        assert_eq!(m.counts().classifier_forward, 0);
        assert_eq!(m.counts().classifier_updates, 0);
        assert_eq!(m.classifier, classifier);
        assert!(reports.iter().all(|r| r.ctc_loss.is_none() && r.d_loss.is_some()));

        let mut m = GanModel::new(tiny_config(0.0)).unwrap();
        let disc = m.discriminator.clone();
        let reports = m.train(&s, &u, |_, _| Ok(())).unwrap();
        assert_eq!(m.counts().discriminator_forward, 0);
        assert_eq!(m.counts().discriminator_updates, 0);
        assert_eq!(m.discriminator, disc);
        assert!(reports.iter().all(|r| r.d_loss.is_none() && r.g_loss.is_none()));
        assert!(m.counts().classifier_updates > 0);
    }

    #[test]
    fn small_step_does_not_increase_generator_objective() {
        let (s, u) = corpora(8);
        let mut m = with_random_head(GanModel::new(tiny_config(0.5)).unwrap());
        let bx: Vec<&Path> = s.paths.iter().collect();
        let bp: Vec<&Path> = u.paths.iter().collect();
        // The discriminator moves first; measure the generator after that.
        m.discriminator_step(&bx, &bp, 3).unwrap();
        let mut probe = m.clone();
        let before = probe.generator_objective(&bx, 3).unwrap();
        let noises = probe.noises(bx.len(), 3);
        let pass = probe.generator_pass(&bx, &noises, true).unwrap();
        probe.opt_generator.step(&mut probe.generator, &pass.g_grads).unwrap();
        probe.opt_classifier.step(&mut probe.classifier, &pass.c_grads).unwrap();
        let after = probe.generator_objective(&bx, 3).unwrap();
        assert!(after <= before + 1e-6, "{before} -> {after}");
    }

    #[test]
    fn training_is_reproducible_and_checkpoints_round_trip() {
        let (s, u) = corpora(8);
        let run = || {
            let mut m = GanModel::new(tiny_config(0.5)).unwrap();
            let r = m.train(&s, &u, |_, _| Ok(())).unwrap();
            (m, loss_csv(&r))
        };
        let (a, ca) = run();
        let (b, cb) = run();
        assert_eq!(ca, cb);
        let text = a.to_checkpoint().unwrap();
        assert_eq!(text, b.to_checkpoint().unwrap());
        let back = GanModel::from_checkpoint(&text).unwrap();
        assert_eq!(back.tensors(), a.tensors());
        assert_eq!(back.config, a.config);
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["shapes"]["generator.head.w"] = serde_json::json!([3, 3]);
        let err = GanModel::from_checkpoint(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Shape(_)), "{err}");
    }

    #[test]
    fn checkpoints_are_called_back() {
        let (s, u) = corpora(8);
        let mut cfg = tiny_config(0.5);
        cfg.iterations = 5;
        cfg.checkpoint_every = 2;
        let mut m = GanModel::new(cfg).unwrap();
        let mut at = Vec::new();
        m.train(&s, &u, |step, _| {
            at.push(step);
            Ok(())
        })
        .unwrap();
        assert_eq!(at, vec![2, 4]);
    }

    #[test]
    fn transfer_contract() {
        let (s, _) = corpora(8);
        let m = GanModel::new(tiny_config(0.5)).unwrap();
        for p in &s.paths {
            let y = m.transfer(p, 1).unwrap();
            assert!(y.same_points(p));
            assert_eq!(y.source, Source::Gan);
        }
        let trained = with_random_head(m);
        let a = trained.transfer(&s.paths[0], 4).unwrap();
        assert!(a.same_points(&trained.transfer(&s.paths[0], 4).unwrap()));
        assert!(!a.same_points(&trained.transfer(&s.paths[0], 5).unwrap()));
        let (short, _) = corpora(6);
        assert!(matches!(
            trained.transfer(&short.paths[0], 1),
            Err(Error::LengthMismatch { left: 6, right: 8 })
        ));
    }

    #[test]
    fn rejects_bad_batches() {
        let (s, u) = corpora(8);
        let mut m = GanModel::new(tiny_config(0.5)).unwrap();
        let bx: Vec<&Path> = s.paths.iter().collect();
        assert!(matches!(m.train_step(0, &bx, &[], 1), Err(Error::InvalidArgument(_))));
        let (short, _) = corpora(6);
        assert!(m.train(&short, &u, |_, _| Ok(())).is_err());
        let mut cfg = tiny_config(0.5);
        cfg.lambda = 1.5;
        assert!(GanModel::new(cfg).is_err());
    }

    #[test]
    fn infeasible_targets_are_skipped() {
        let layout = reference_qwerty();
        let words = vec!["aab".to_string()];
        let style = StyleParams::default();
        let s = generate_corpus(&layout, &words, 2, CorpusMode::Synthetic, &style, 1, 3).unwrap();
        let mut cfg = tiny_config(0.5);
        cfg.length = 3;
        let mut m = GanModel::new(cfg).unwrap();
        let bx: Vec<&Path> = s.paths.iter().collect();
        let r = m.train_step(0, &bx, &bx, 1).unwrap();
        assert_eq!(r.skipped, 2);
        assert!(r.ctc_loss.is_none());
    }
}
