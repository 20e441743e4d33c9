use swipegan::gan::{GanConfig, GanModel};
use swipegan::nn::DenseParams;
use swipegan::seed;
use swipegan::synth::{generate_corpus, CorpusMode, StyleParams};
use swipegan::{reference_qwerty, Corpus, Path};

fn corpora(per_word: usize, user_seed: u64) -> (Corpus, Corpus) {
    let layout = reference_qwerty();
    let words: Vec<String> = ["the", "and", "you", "that", "with", "have"].iter().map(|w| w.to_string()).collect();
    let style = StyleParams::default();
    let s = generate_corpus(&layout, &words, per_word, CorpusMode::Synthetic, &style, 1, 32).unwrap();
    let u = generate_corpus(&layout, &words, per_word, CorpusMode::UserStyle, &style, user_seed, 32).unwrap();
    (s, u)
}

#[test]
fn discriminator_separates_styles_against_a_frozen_generator() {
    let (s, u) = corpora(20, 2);
    let cfg = GanConfig {
        length: 32,
        lambda: 1.0,
        lr_generator: 0.0,
        lr_discriminator: 1e-2,
        discriminator_hidden: 8,
        generator_hidden: 4,
        iterations: 300,
        ..GanConfig::default()
    };
    let mut m = GanModel::new(cfg).unwrap();
    let before = m.generator.clone();
    m.train(&s, &u, |_, _| Ok(())).unwrap();
    assert_eq!(m.generator, before);
    let (held_s, held_u) = corpora(10, 9);
    let fake = m.transfer_corpus(&held_s, 0).unwrap();
    let real: Vec<&Path> = held_u.paths.iter().collect();
    let fake: Vec<&Path> = fake.paths.iter().collect();
    let acc = m.discriminator_accuracy(&real, &fake).unwrap();
    assert!(acc > 0.95, "held-out accuracy {acc}");
}

#[test]
fn transfer_is_deterministic_and_keeps_labels() {
    let (s, _) = corpora(2, 2);
    let cfg = GanConfig { length: 32, generator_hidden: 4, ..GanConfig::default() };
    let mut m = GanModel::new(cfg).unwrap();
    let h = m.generator.stack.output_dim();
    m.generator.head = DenseParams::init(h, 2, &mut seed::rng(4));
    let a = m.transfer_corpus(&s, 3).unwrap();
    let b = m.transfer_corpus(&s, 3).unwrap();
    for ((x, y), z) in s.paths.iter().zip(&a.paths).zip(&b.paths) {
        assert!(y.same_points(z));
        assert_eq!(x.word, y.word);
        assert_eq!(y.len(), x.len());
        assert!(!y.same_points(x));
    }
}
