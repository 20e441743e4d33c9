use std::path::{Path as FsPath, PathBuf};

use swipegan::eval::{
    evaluate_top1, learning_curve_slope, parse_curve_csv, run_compositions, train_recognizer,
    CompositionSpec, Pools, Recognizer, RecognizerConfig,
};
use swipegan::gan::{loss_csv, GanConfig, GanModel};
use swipegan::path::{write_atomic, DEFAULT_LENGTH};
use swipegan::render::render_svg;
use swipegan::synth::{generate_corpus, parse_lexicon, CorpusMode};
use swipegan::{reference_qwerty, Corpus, KeyboardLayout, Path};

use crate::config::RunConfig;
use crate::{
    CliError, CompositionsArgs, CurveArgs, EvalArgs, Mode, RenderArgs, SynthArgs, TrainGanArgs,
    TrainRecArgs, TransferArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

fn read_text(flag: &str, path: &FsPath) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{flag} {}: {e}", path.display())))
}

fn write_text(path: &FsPath, text: &str) -> CliResult {
    write_atomic(path, text.as_bytes())
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))
}

fn read_corpus(flag: &str, path: &FsPath) -> CliResult<Corpus> {
    Corpus::read_file(path)
        .map_err(|e| CliError::validation(format!("{flag} {}: {e}", path.display())))
}

fn load_layout(path: Option<&PathBuf>) -> CliResult<KeyboardLayout> {
    match path {
        None => Ok(reference_qwerty()),
        Some(p) => KeyboardLayout::from_json(&read_text("--layout", p)?)
            .map_err(|e| CliError::validation(format!("--layout {}: {e}", p.display()))),
    }
}

fn load_lexicon(flag: Option<&PathBuf>, cfg: &RunConfig) -> CliResult<Vec<String>> {
    let path = flag
        .or(cfg.lexicon.as_ref())
        .ok_or_else(|| CliError::validation("--lexicon is required"))?;
    let words = parse_lexicon(&read_text("--lexicon", path)?);
    if words.is_empty() {
        return Err(CliError::validation(format!("--lexicon {}: no words", path.display())));
    }
    Ok(words)
}

pub fn synth(a: SynthArgs) -> CliResult {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let layout = load_layout(a.layout.as_ref().or(cfg.layout.as_ref()))?;
    let lexicon = load_lexicon(a.lexicon.as_ref(), &cfg)?;
    for w in &lexicon {
        layout
            .check_word(w)
            .map_err(|e| CliError::validation(format!("--lexicon: {e}")))?;
    }
    let per_word = a
        .per_word
        .or(cfg.per_word)
        .ok_or_else(|| CliError::validation("--per-word is required"))?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let length = a.length.or(cfg.length).unwrap_or(DEFAULT_LENGTH);
    if length < 2 {
        return Err(CliError::validation("--length must be at least 2"));
    }
    let style = cfg.style.unwrap_or_default();
    let mode = match a.mode {
        Mode::Synthetic => CorpusMode::Synthetic,
        Mode::User => CorpusMode::UserStyle,
    };
    let corpus = generate_corpus(&layout, &lexicon, per_word, mode, &style, seed, length)
        .map_err(|e| CliError::from_core("synth", e))?;
    let bytes = corpus.to_bytes().map_err(|e| CliError::runtime(e.to_string()))?;
    write_atomic(&a.out, &bytes)
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", a.out.display())))?;
    println!("wrote {} paths to {}", corpus.len(), a.out.display());
    println!(
        "layout={} generator={} seed={} length={length}",
        corpus.metadata.layout, corpus.metadata.generator, corpus.metadata.seed
    );
    Ok(())
}

fn corpus_length(flag: &str, corpus: &Corpus) -> CliResult<usize> {
    let n = corpus
        .paths
        .first()
        .map(Path::len)
        .ok_or_else(|| CliError::validation(format!("{flag}: corpus is empty")))?;
    if let Some(p) = corpus.paths.iter().find(|p| p.len() != n) {
        return Err(CliError::validation(format!(
            "{flag}: mixed path lengths {n} and {}",
            p.len()
        )));
    }
    Ok(n)
}

pub fn train_gan(a: TrainGanArgs) -> CliResult {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let synthetic = read_corpus("--synthetic", &a.synthetic)?;
    let user = read_corpus("--user", &a.user)?;
    let ls = corpus_length("--synthetic", &synthetic)?;
    let lu = corpus_length("--user", &user)?;
    if ls != lu {
        return Err(CliError::validation(format!(
            "--synthetic has {ls}-point paths but --user has {lu}-point paths"
        )));
    }
    if synthetic.metadata.layout != user.metadata.layout {
        return Err(CliError::validation(format!(
            "--synthetic uses layout {} but --user uses {}",
            synthetic.metadata.layout, user.metadata.layout
        )));
    }
    let mut gc = cfg.gan.clone().unwrap_or_else(|| GanConfig {
        length: ls,
        ..GanConfig::default()
    });
    if let Some(l) = cfg.length {
        gc.length = l;
    }
    if gc.length != ls {
        return Err(CliError::validation(format!(
            "config length {} does not match corpus length {ls}",
            gc.length
        )));
    }
    if let Some(s) = a.seed.or(cfg.seed) {
        gc.seed = s;
    }
    if let Some(v) = a.iterations {
        gc.iterations = v;
    }
    if let Some(v) = a.lambda {
        gc.lambda = v;
    }
    if let Some(v) = a.batch_size {
        gc.batch_size = v;
    }
    if let Some(v) = a.pretrain_epochs {
        gc.pretrain_epochs = v;
    }
    if let Some(v) = a.checkpoint_every {
        gc.checkpoint_every = v;
    }
    let mut model = GanModel::new(gc).map_err(|e| CliError::from_core("config", e))?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", a.out.display())))?;
    if model.config.iterations > 0 && model.config.pretrain_epochs > 0 {
        let both: Vec<&Path> = synthetic.paths.iter().chain(&user.paths).collect();
        let fit = model
            .pretrain_classifier(&both)
            .map_err(|e| CliError::from_core("pre-training", e))?;
        println!(
            "classifier pre-trained: {} updates, final loss {:.4}, {} skipped",
            fit.updates, fit.final_loss, fit.skipped
        );
    }
    let out = a.out.clone();
    let reports = model
        .train(&synthetic, &user, |step, m| {
            let text = m.to_checkpoint()?;
            write_atomic(&out.join(format!("checkpoint-{step:06}.json")), text.as_bytes())
        })
        .map_err(|e| CliError::from_core("training", e))?;
    let text = model.to_checkpoint().map_err(|e| CliError::runtime(e.to_string()))?;
    write_text(&a.out.join("gan.json"), &text)?;
    write_text(&a.out.join("losses.csv"), &loss_csv(&reports))?;
    let skipped: usize = reports.iter().map(|r| r.skipped).sum();
    println!(
        "trained {} steps; wrote {}",
        reports.len(),
        a.out.join("gan.json").display()
    );
    if let Some(r) = reports.last() {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "last step: d_loss {} g_loss {} ctc_loss {} delta {:.6}; {skipped} infeasible targets skipped",
            f(r.d_loss),
            f(r.g_loss),
            f(r.ctc_loss),
            r.delta_mean
        );
    }
    Ok(())
}

pub fn transfer(a: TransferArgs) -> CliResult {
    let model = GanModel::from_checkpoint(&read_text("--model", &a.model)?)
        .map_err(|e| CliError::from_core("--model", e))?;
    let input = read_corpus("--in", &a.input)?;
    let out = model
        .transfer_corpus(&input, a.seed)
        .map_err(|e| CliError::from_core("--in", e))?;
    let bytes = out.to_bytes().map_err(|e| CliError::runtime(e.to_string()))?;
    write_atomic(&a.out, &bytes)
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", a.out.display())))?;
    println!("transferred {} paths to {}", out.len(), a.out.display());
    Ok(())
}

fn recognizer_config(cfg: &RunConfig) -> RecognizerConfig {
    let mut rc = cfg.recognizer.clone().unwrap_or_default();
    if let Some(s) = cfg.seed {
        rc.seed = s;
    }
    rc
}

pub fn train_rec(a: TrainRecArgs) -> CliResult {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let lexicon = load_lexicon(a.lexicon.as_ref(), &cfg)?;
    let mut corpora = Vec::new();
    for p in &a.train {
        corpora.push(read_corpus("--train", p)?);
    }
    let mut rc = recognizer_config(&cfg);
    if let Some(v) = a.epochs {
        rc.epochs = v;
    }
    if let Some(v) = a.hidden {
        rc.hidden = v;
    }
    if let Some(v) = a.lr {
        rc.lr = v;
    }
    if let Some(v) = a.seed {
        rc.seed = v;
    }
    let paths: Vec<&Path> = corpora.iter().flat_map(|c| &c.paths).collect();
    let (rec, fit) =
        train_recognizer(&paths, &lexicon, &rc).map_err(|e| CliError::from_core("--train", e))?;
    let text = rec.to_checkpoint().map_err(|e| CliError::runtime(e.to_string()))?;
    write_text(&a.out, &text)?;
    println!(
        "trained on {} paths ({} skipped as infeasible): {} updates, final loss {:.4}",
        paths.len(),
        fit.skipped,
        fit.updates,
        fit.final_loss
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> CliResult {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let lexicon = load_lexicon(a.lexicon.as_ref(), &cfg)?;
    let rec = Recognizer::from_checkpoint(&read_text("--model", &a.model)?)
        .map_err(|e| CliError::from_core("--model", e))?;
    let test = read_corpus("--test", &a.test)?;
    let refs: Vec<&Path> = test.paths.iter().collect();
    let top1 = evaluate_top1(&rec, &refs, &lexicon).map_err(|e| CliError::from_core("--test", e))?;
    println!("top1 {top1:.6} ({} paths)", refs.len());
    if let Some(out) = &a.out {
        write_text(out, &format!("paths,top1\n{},{top1}\n", refs.len()))?;
    }
    Ok(())
}

pub fn compositions(a: CompositionsArgs) -> CliResult {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let lexicon = load_lexicon(a.lexicon.as_ref(), &cfg)?;
    let specs: Vec<CompositionSpec> = serde_json::from_str(&read_text("--specs", &a.specs)?)
        .map_err(|e| CliError::validation(format!("--specs {}: {e}", a.specs.display())))?;
    let load = |flag: &str, p: &Option<PathBuf>| -> CliResult<Vec<Path>> {
        match p {
            Some(p) => Ok(read_corpus(flag, p)?.paths),
            None => Ok(Vec::new()),
        }
    };
    let user = load("--user", &a.user)?;
    let synthetic = load("--synthetic", &a.synthetic)?;
    let gan = load("--gan", &a.gan)?;
    let test = read_corpus("--test", &a.test)?.paths;
    let mut rc = recognizer_config(&cfg);
    if let Some(v) = a.epochs {
        rc.epochs = v;
    }
    if let Some(v) = a.seed {
        rc.seed = v;
    }
    let pools = Pools {
        user: &user,
        synthetic: &synthetic,
        gan: &gan,
        test: &test,
    };
    let report = run_compositions(&specs, pools, &lexicon, &rc)
        .map_err(|e| CliError::from_core("--specs", e))?;
    write_text(&a.out, &report.to_csv())?;
    print!("{}", report.to_table());
    Ok(())
}

pub fn curve(a: CurveArgs) -> CliResult {
    let points = parse_curve_csv(&read_text("--in", &a.input)?)
        .map_err(|e| CliError::from_core("--in", e))?;
    let slope = learning_curve_slope(&points).map_err(|e| CliError::from_core("--in", e))?;
    println!("slope {slope:.4}");
    if let Some(out) = &a.out {
        write_text(out, &format!("points,slope\n{},{slope}\n", points.len()))?;
    }
    Ok(())
}

pub fn render(a: RenderArgs) -> CliResult {
    let layout = load_layout(a.layout.as_ref())?;
    let corpus = read_corpus("--in", &a.input)?;
    if corpus.is_empty() {
        return Err(CliError::validation("--in: corpus is empty"));
    }
    let path = corpus.paths.get(a.index).ok_or_else(|| {
        CliError::validation(format!(
            "--index {} out of range for {} paths",
            a.index,
            corpus.len()
        ))
    })?;
    write_text(&a.out, &render_svg(&layout, path))?;
    println!("rendered {:?} ({} points) to {}", path.word, path.len(), a.out.display());
    Ok(())
}

