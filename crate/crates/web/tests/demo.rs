use swipegan::synth::StyleParams;
use swipegan_web::*;

#[test]
fn spline_drawing_has_one_segment_per_step() {
    let svg = spline_svg("hello").unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="seg""#).count(), DEMO_LENGTH - 1);
    assert!(spline_svg("h3llo").is_err());
}

#[test]
fn style_drawing_is_deterministic_and_validated() {
    let style = StyleParams::default().with_seed(4);
    assert_eq!(user_style_svg("swipe", &style).unwrap(), user_style_svg("swipe", &style).unwrap());
    assert_ne!(user_style_svg("swipe", &style).unwrap(), spline_svg("swipe").unwrap());
    let bad = StyleParams { corner_cut: 2.0, ..style };
    assert!(user_style_svg("swipe", &bad).is_err());
}

#[test]
fn ctc_demo_agrees_with_enumeration() {
    for s in 0..20 {
        let d = ctc_demo("abb", 6, s).unwrap();
        assert!((d.forward_backward - d.brute_force).abs() < 1e-9);
        assert_eq!(d.probs.len(), 6);
    }
    assert!(ctc_demo("abb", 2, 0).is_err());
    assert!(ctc_demo("abc", 11, 0).is_err());
    assert!(ctc_demo("xyz", 5, 0).is_err());
}
