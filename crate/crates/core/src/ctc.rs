//! Connectionist temporal classification: loss, gradient, a brute-force
//! oracle, greedy decoding and lexicon-constrained Top-1 recognition.
//!
//! Step distributions are `K x (|alphabet| + 1)` matrices, one time step per
//! row; the blank is the last column.

use crate::error::{Error, Result};
use crate::nn::{log_softmax, Matrix};

/// Output symbols of a recognizer: the characters plus a trailing blank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtcAlphabet {
    chars: Vec<char>,
}

impl CtcAlphabet {
    pub fn new(chars: Vec<char>) -> Result<Self> {
        for (i, c) in chars.iter().enumerate() {
            if chars[..i].contains(c) {
                return Err(Error::invalid(format!("duplicate character {c:?} in alphabet")));
            }
        }
        Ok(CtcAlphabet { chars })
    }

    /// `a`..`z`.
    pub fn lowercase() -> Self {
        CtcAlphabet {
            chars: ('a'..='z').collect(),
        }
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn blank(&self) -> usize {
        self.chars.len()
    }

    /// Number of output classes, blank included.
    pub fn size(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn index(&self, c: char) -> Result<usize> {
        self.chars
            .iter()
            .position(|&x| x == c)
            .ok_or(Error::UnknownCharacter(c))
    }

    pub fn encode(&self, word: &str) -> Result<Vec<usize>> {
        word.chars().map(|c| self.index(c)).collect()
    }

    pub fn decode(&self, labels: &[usize]) -> String {
        labels.iter().filter_map(|&l| self.chars.get(l)).collect()
    }
}

/// Blank-interleaved label sequence `[-, w1, -, w2, -, ..., wn, -]`.
pub fn ctc_expand(alphabet: &CtcAlphabet, word: &str) -> Result<Vec<usize>> {
    let labels = alphabet.encode(word)?;
    Ok(expand_labels(&labels, alphabet.blank()))
}

fn expand_labels(labels: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * labels.len() + 1);
    out.push(blank);
    for &l in labels {
        out.push(l);
        out.push(blank);
    }
    out
}

/// Fewest steps any alignment of `labels` needs: one per label plus a blank
/// between each pair of equal neighbours.
pub fn min_steps(labels: &[usize]) -> usize {
    let repeats = labels.windows(2).filter(|w| w[0] == w[1]).count();
    (labels.len() + repeats).max(1)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn check_distribution(probs: &Matrix, alphabet: &CtcAlphabet) -> Result<()> {
    if probs.cols() != alphabet.size() {
        return Err(Error::Shape(format!(
            "step distributions have {} classes, alphabet needs {}",
            probs.cols(),
            alphabet.size()
        )));
    }
    if probs.rows() == 0 {
        return Err(Error::invalid("CTC needs at least one time step"));
    }
    for k in 0..probs.rows() {
        let row = probs.row(k);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid(format!("step {k} is not a probability distribution")));
        }
    }
    Ok(())
}

fn log_matrix(probs: &Matrix) -> Matrix {
    let mut out = probs.clone();
    out.data_mut().iter_mut().for_each(|p| *p = p.ln());
    out
}

/// Forward/backward lattice over the expanded labels for per-step log
/// probabilities. `beta` excludes the emission at its own step, so
/// `alpha[t][s] + beta[t][s]` is the log mass of alignments through `(t, s)`.
struct Lattice {
    ext: Vec<usize>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    log_prob: f64,
}

fn skip_allowed(ext: &[usize], s: usize, blank: usize) -> bool {
    s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]
}

fn check_feasible(word_labels: &[usize], steps: usize, alphabet: &CtcAlphabet) -> Result<()> {
    let needed = min_steps(word_labels);
    if steps < needed {
        return Err(Error::InfeasibleTarget {
            word: alphabet.decode(word_labels),
            needed,
            steps,
        });
    }
    Ok(())
}

fn forward(log_probs: &Matrix, labels: &[usize], blank: usize) -> (Vec<usize>, Vec<f64>, f64) {
    let ext = expand_labels(labels, blank);
    let (steps, states) = (log_probs.rows(), ext.len());
    let mut alpha = vec![f64::NEG_INFINITY; steps * states];
    alpha[0] = log_probs.get(0, ext[0]);
    if states > 1 {
        alpha[1] = log_probs.get(0, ext[1]);
    }
    for t in 1..steps {
        let (prev, cur) = alpha.split_at_mut(t * states);
        let prev = &prev[(t - 1) * states..];
        let row = log_probs.row(t);
        for s in 0..states {
            let mut acc = prev[s];
            if s >= 1 {
                acc = log_add(acc, prev[s - 1]);
            }
            if skip_allowed(&ext, s, blank) {
                acc = log_add(acc, prev[s - 2]);
            }
            cur[s] = if acc == f64::NEG_INFINITY { acc } else { acc + row[ext[s]] };
        }
    }
    let last = &alpha[(steps - 1) * states..];
    let mut log_prob = last[states - 1];
    if states > 1 {
        log_prob = log_add(log_prob, last[states - 2]);
    }
    (ext, alpha, log_prob)
}

fn lattice(log_probs: &Matrix, labels: &[usize], blank: usize) -> Lattice {
    let (ext, alpha, log_prob) = forward(log_probs, labels, blank);
    let (steps, states) = (log_probs.rows(), ext.len());
    let mut beta = vec![f64::NEG_INFINITY; steps * states];
    beta[(steps - 1) * states + states - 1] = 0.0;
    if states > 1 {
        beta[(steps - 1) * states + states - 2] = 0.0;
    }
    for t in (0..steps - 1).rev() {
        let next_row = log_probs.row(t + 1);
        for s in 0..states {
            let next = |s2: usize| beta[(t + 1) * states + s2] + next_row[ext[s2]];
            let mut acc = next(s);
            if s + 1 < states {
                acc = log_add(acc, next(s + 1));
            }
            if s + 2 < states && skip_allowed(&ext, s + 2, blank) {
                acc = log_add(acc, next(s + 2));
            }
            beta[t * states + s] = acc;
        }
    }
    Lattice {
        ext,
        alpha,
        beta,
        log_prob,
    }
}

/// `-ln` of the total probability of all alignments collapsing to `word`.
pub fn ctc_loss(probs: &Matrix, alphabet: &CtcAlphabet, word: &str) -> Result<f64> {
    check_distribution(probs, alphabet)?;
    let labels = alphabet.encode(word)?;
    check_feasible(&labels, probs.rows(), alphabet)?;
    Ok(-forward(&log_matrix(probs), &labels, alphabet.blank()).2)
}

/// CTC loss from per-step log probabilities and already-encoded labels.
pub fn ctc_loss_log(log_probs: &Matrix, labels: &[usize], alphabet: &CtcAlphabet) -> Result<f64> {
    check_feasible(labels, log_probs.rows(), alphabet)?;
    Ok(-forward(log_probs, labels, alphabet.blank()).2)
}

/// Gradient of the loss w.r.t. the pre-softmax logits that produced `probs`:
/// `probs - posterior occupancy` at every step.
pub fn ctc_grad(probs: &Matrix, alphabet: &CtcAlphabet, word: &str) -> Result<Matrix> {
    check_distribution(probs, alphabet)?;
    let labels = alphabet.encode(word)?;
    check_feasible(&labels, probs.rows(), alphabet)?;
    Ok(grad_from_log(&log_matrix(probs), &labels, alphabet.blank()).1)
}

/// Loss and logit gradient straight from logits (softmax applied per step).
pub fn ctc_loss_and_grad(
    logits: &Matrix,
    labels: &[usize],
    alphabet: &CtcAlphabet,
) -> Result<(f64, Matrix)> {
    if logits.cols() != alphabet.size() {
        return Err(Error::Shape(format!(
            "logits have {} classes, alphabet needs {}",
            logits.cols(),
            alphabet.size()
        )));
    }
    check_feasible(labels, logits.rows(), alphabet)?;
    let mut log_probs = Matrix::zeros(logits.rows(), logits.cols());
    for t in 0..logits.rows() {
        log_probs.row_mut(t).copy_from_slice(&log_softmax(logits.row(t)));
    }
    Ok(grad_from_log(&log_probs, labels, alphabet.blank()))
}

fn grad_from_log(log_probs: &Matrix, labels: &[usize], blank: usize) -> (f64, Matrix) {
    let lat = lattice(log_probs, labels, blank);
    let (steps, classes) = (log_probs.rows(), log_probs.cols());
    let states = lat.ext.len();
    let mut grad = Matrix::zeros(steps, classes);
    for t in 0..steps {
        let row = grad.row_mut(t);
        for (c, g) in row.iter_mut().enumerate() {
            *g = log_probs.get(t, c).exp();
        }
        for s in 0..states {
            let mass = lat.alpha[t * states + s] + lat.beta[t * states + s] - lat.log_prob;
            if mass > f64::NEG_INFINITY {
                row[lat.ext[s]] -= mass.exp();
            }
        }
    }
    (-lat.log_prob, grad)
}

/// Largest enumeration [`ctc_brute_force`] accepts.
pub const BRUTE_FORCE_MAX_STEPS: usize = 10;
pub const BRUTE_FORCE_MAX_CHARS: usize = 5;

/// Collapses repeats, then drops blanks.
pub fn collapse(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in path {
        if prev != Some(l) && l != blank {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Direct evaluation: enumerates every step string, keeps those collapsing to
/// `word` and returns `-ln` of their summed probability.
pub fn ctc_brute_force(probs: &Matrix, alphabet: &CtcAlphabet, word: &str) -> Result<f64> {
    check_distribution(probs, alphabet)?;
    let steps = probs.rows();
    if steps > BRUTE_FORCE_MAX_STEPS || alphabet.chars().len() > BRUTE_FORCE_MAX_CHARS {
        return Err(Error::TooLarge(format!(
            "{steps} steps over {} characters",
            alphabet.chars().len()
        )));
    }
    let target = alphabet.encode(word)?;
    let classes = alphabet.size();
    let mut digits = vec![0usize; steps];
    let mut total = 0.0;
    loop {
        if collapse(&digits, alphabet.blank()) == target {
            total += digits
                .iter()
                .enumerate()
                .map(|(t, &c)| probs.get(t, c))
                .product::<f64>();
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == steps {
                return Ok(-total.ln());
            }
            digits[pos] += 1;
            if digits[pos] < classes {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Per-step argmax (lowest index wins ties), collapsed.
pub fn greedy_decode(probs: &Matrix, alphabet: &CtcAlphabet) -> String {
    let best: Vec<usize> = (0..probs.rows())
        .map(|t| {
            let row = probs.row(t);
            let mut arg = 0;
            for (c, &p) in row.iter().enumerate() {
                if p > row[arg] {
                    arg = c;
                }
            }
            arg
        })
        .collect();
    alphabet.decode(&collapse(&best, alphabet.blank()))
}

/// Lexicon word with the lowest CTC loss; ties go to the lexicographically
/// smaller word and infeasible words are skipped.
pub fn lexicon_top1(probs: &Matrix, alphabet: &CtcAlphabet, lexicon: &[String]) -> Result<String> {
    check_distribution(probs, alphabet)?;
    lexicon_top1_log(&log_matrix(probs), alphabet, lexicon)
}

pub fn lexicon_top1_log(
    log_probs: &Matrix,
    alphabet: &CtcAlphabet,
    lexicon: &[String],
) -> Result<String> {
    if lexicon.is_empty() {
        return Err(Error::invalid("empty lexicon"));
    }
    let mut best: Option<(f64, &String)> = None;
    for word in lexicon {
        let labels = alphabet.encode(word)?;
        if log_probs.rows() < min_steps(&labels) {
            continue;
        }
        let loss = -forward(log_probs, &labels, alphabet.blank()).2;
        let better = match best {
            None => true,
            Some((b, w)) => loss < b || (loss == b && word < w),
        };
        if better {
            best = Some((loss, word));
        }
    }
    best.map(|(_, w)| w.clone())
        .ok_or(Error::NoFeasibleWord { steps: log_probs.rows() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{gradient_check, softmax, GradCheck};
    use crate::seed;
    use rand::Rng;

    fn ab() -> CtcAlphabet {
        CtcAlphabet::new(vec!['a', 'b']).unwrap()
    }

    fn uniform(steps: usize, classes: usize) -> Matrix {
        Matrix::from_vec(steps, classes, vec![1.0 / classes as f64; steps * classes]).unwrap()
    }

    fn random_logits(steps: usize, classes: usize, seed_: u64) -> Matrix {
        let mut rng = seed::rng(seed_);
        let data = (0..steps * classes).map(|_| rng.random_range(-2.0..2.0)).collect();
        Matrix::from_vec(steps, classes, data).unwrap()
    }

    fn probs_of(logits: &Matrix) -> Matrix {
        let mut p = logits.clone();
        for t in 0..p.rows() {
            let s = softmax(logits.row(t));
            p.row_mut(t).copy_from_slice(&s);
        }
        p
    }

    #[test]
    fn expansion() {
        let a = ab();
        assert_eq!(ctc_expand(&a, "ab").unwrap(), vec![2, 0, 2, 1, 2]);
        assert_eq!(ctc_expand(&a, "").unwrap(), vec![2]);
        assert_eq!(ctc_expand(&a, "aa").unwrap(), vec![2, 0, 2, 0, 2]);
        assert!(matches!(ctc_expand(&a, "c"), Err(Error::UnknownCharacter('c'))));
    }

    #[test]
    fn worked_values() {
        let a = ab();
        let one = Matrix::from_vec(1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(ctc_loss(&one, &a, "a").unwrap(), 0.0);
        let u = uniform(2, 3);
        assert!((ctc_loss(&u, &a, "a").unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!((ctc_brute_force(&u, &a, "a").unwrap() - 1.098612).abs() < 1e-6);
        assert!(matches!(
            ctc_loss(&u, &a, "aa"),
            Err(Error::InfeasibleTarget { needed: 3, steps: 2, .. })
        ));
    }

    #[test]
    fn oracle_agreement() {
        let mut rng = seed::rng(42);
        for i in 0..200 {
            let chars = rng.random_range(1..=4usize);
            let alpha = CtcAlphabet::new(('a'..).take(chars).collect()).unwrap();
            let steps = rng.random_range(1..=6usize);
            let len = rng.random_range(0..=3usize);
            let word: String = (0..len).map(|_| alpha.chars()[rng.random_range(0..chars)]).collect();
            let p = probs_of(&random_logits(steps, alpha.size(), i));
            let brute = ctc_brute_force(&p, &alpha, &word).unwrap();
            match ctc_loss(&p, &alpha, &word) {
                Ok(dp) => assert!((dp - brute).abs() < 1e-9, "{word} K={steps}: {dp} vs {brute}"),
                Err(Error::InfeasibleTarget { .. }) => assert!(brute.is_infinite()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn collapsed_outputs_partition_probability() {
        let a = ab();
        let p = probs_of(&random_logits(2, 3, 9));
        let words = ["", "a", "b", "aa", "ab", "ba", "bb"];
        let total: f64 = words
            .iter()
            .map(|w| (-ctc_brute_force(&p, &a, w).unwrap()).exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let alpha = CtcAlphabet::lowercase();
        assert!(matches!(
            ctc_brute_force(&uniform(2, 27), &alpha, "a"),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn gradient_rows_sum_to_zero_and_match_differences() {
        let alpha = CtcAlphabet::new(vec!['a', 'b', 'c']).unwrap();
        for (i, word) in ["abc", "aa", "b", "", "cab"].iter().enumerate() {
            let logits = random_logits(8, 4, 100 + i as u64);
            let labels = alpha.encode(word).unwrap();
            let (_, grad) = ctc_loss_and_grad(&logits, &labels, &alpha).unwrap();
            let via_probs = ctc_grad(&probs_of(&logits), &alpha, word).unwrap();
            for t in 0..8 {
                assert!(grad.row(t).iter().sum::<f64>().abs() < 1e-10);
                for c in 0..4 {
                    assert!((grad.get(t, c) - via_probs.get(t, c)).abs() < 1e-12);
                }
            }
            let loss = |flat: &[f64]| {
                let l = Matrix::from_vec(8, 4, flat.to_vec()).unwrap();
                ctc_loss_and_grad(&l, &labels, &alpha).unwrap().0
            };
            let err = gradient_check(loss, logits.data(), grad.data(), GradCheck::default());
            assert!(err < 1e-4, "{word}: {err}");
        }
    }

    #[test]
    fn gradient_vanishes_at_the_optimum() {
        let a = ab();
        let p = Matrix::from_vec(1, 3, vec![1.0 - 2e-12, 1e-12, 1e-12]).unwrap();
        let g = ctc_grad(&p, &a, "a").unwrap();
        assert!(g.data().iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10);
    }

    #[test]
    fn feasibility_is_monotone() {
        let alpha = CtcAlphabet::lowercase();
        for word in ["aa", "hello", "book", "abc"] {
            let labels = alpha.encode(word).unwrap();
            let first = min_steps(&labels);
            for steps in 1..12 {
                let ok = ctc_loss(&uniform(steps, 27), &alpha, word).is_ok();
                assert_eq!(ok, steps >= first, "{word} at {steps}");
            }
        }
    }

    fn one_hot(path: &[usize], classes: usize) -> Matrix {
        let mut m = Matrix::zeros(path.len(), classes);
        for (t, &c) in path.iter().enumerate() {
            m.set(t, c, 1.0);
        }
        m
    }

    #[test]
    fn greedy_cases() {
        let a = ab();
        assert_eq!(greedy_decode(&one_hot(&[0, 0, 2, 1], 3), &a), "ab");
        assert_eq!(greedy_decode(&one_hot(&[0, 2, 0], 3), &a), "aa");
        assert_eq!(greedy_decode(&one_hot(&[2, 2, 2], 3), &a), "");
        assert_eq!(greedy_decode(&uniform(3, 3), &a), "a");
    }

    #[test]
    fn greedy_inverts_expanded_alignments() {
        let alpha = CtcAlphabet::lowercase();
        for word in ["hello", "data", "a", "book"] {
            let ext = ctc_expand(&alpha, word).unwrap();
            assert_eq!(greedy_decode(&one_hot(&ext, 27), &alpha), word);
        }
    }

    #[test]
    fn lexicon_cases() {
        let alpha = CtcAlphabet::lowercase();
        let lex: Vec<String> = vec!["to".into(), "go".into()];
        let ext = ctc_expand(&alpha, "go").unwrap();
        let mut p = one_hot(&ext, 27);
        for v in p.data_mut() {
            *v = 0.9 * *v + 0.1 / 27.0;
        }
        assert_eq!(lexicon_top1(&p, &alpha, &lex).unwrap(), "go");
        let ab_lex: Vec<String> = vec!["b".into(), "a".into()];
        assert_eq!(lexicon_top1(&uniform(2, 3), &ab(), &ab_lex).unwrap(), "a");
        let aa: Vec<String> = vec!["aa".into()];
        assert!(matches!(
            lexicon_top1(&uniform(1, 27), &alpha, &aa),
            Err(Error::NoFeasibleWord { steps: 1 })
        ));
    }

    #[test]
    fn rejects_non_distributions() {
        let a = ab();
        let bad = Matrix::from_vec(1, 3, vec![0.5, 0.5, 0.5]).unwrap();
        assert!(ctc_loss(&bad, &a, "a").is_err());
        assert!(ctc_loss(&uniform(2, 4), &a, "a").is_err());
    }
}
