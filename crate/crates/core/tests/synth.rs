use proptest::prelude::*;
use swipegan::synth::*;
use swipegan::{reference_qwerty, Corpus};

fn lexicon(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

proptest! {
    #[test]
    fn spline_passes_through_every_via_point(word in "[a-z]{1,8}", extra in 0usize..40) {
        let layout = reference_qwerty();
        let via = layout.word_to_via_points(&word).unwrap();
        let n = via.len().max(2) + extra;
        let path = synthesize_spline(&layout, &word, n).unwrap();
        prop_assert_eq!(path.len(), n);
        let mut from = 0;
        for v in via {
            let (i, d) = path.points[from..]
                .iter()
                .enumerate()
                .map(|(i, p)| (from + i, p.dist(v)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            prop_assert!(d < 1e-9);
            from = i;
        }
    }

    #[test]
    fn user_style_keeps_length_and_is_deterministic(word in "[a-z]{2,6}", s in 0u64..1000) {
        let layout = reference_qwerty();
        let clean = synthesize_spline(&layout, &word, 32).unwrap();
        let style = StyleParams::default().with_seed(s);
        let a = apply_user_style(&clean, &style);
        prop_assert_eq!(a.len(), clean.len());
        prop_assert!(a.points.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
        prop_assert!(a.same_points(&apply_user_style(&clean, &style)));
    }
}

#[test]
fn corpus_round_trips_bitwise() {
    let layout = reference_qwerty();
    let words = lexicon(&["hello", "go", "swipe"]);
    let c = generate_corpus(&layout, &words, 3, CorpusMode::UserStyle, &StyleParams::default(), 9, 24)
        .unwrap();
    let bytes = c.to_bytes().unwrap();
    let back = Corpus::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back.len(), 9);
    for (a, b) in c.paths.iter().zip(&back.paths) {
        assert!(a.same_points(b));
        assert_eq!(a.word, b.word);
    }
    assert_eq!(back.to_bytes().unwrap(), bytes);
}

#[test]
fn user_style_moves_statistics_away_from_splines() {
    let layout = reference_qwerty();
    let words = lexicon(&["the", "and", "you", "that", "was"]);
    let style = StyleParams::default();
    let s = generate_corpus(&layout, &words, 10, CorpusMode::Synthetic, &style, 1, 64).unwrap();
    let u = generate_corpus(&layout, &words, 10, CorpusMode::UserStyle, &style, 2, 64).unwrap();
    let (ss, us) = (s.stats(), u.stats());
    assert!(us.mean_arc_length > ss.mean_arc_length);
    assert!(us.mean_turning_angle > ss.mean_turning_angle);
}
