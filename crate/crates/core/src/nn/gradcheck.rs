use rand::seq::index::sample;

use crate::seed;

/// Central-difference settings for [`gradient_check`].
#[derive(Clone, Copy, Debug)]
pub struct GradCheck {
    pub eps: f64,
    /// Coordinates probed; every coordinate when the bundle is smaller.
    pub coords: usize,
    pub seed: u64,
}

impl Default for GradCheck {
    fn default() -> Self {
        GradCheck {
            eps: 1e-5,
            coords: 200,
            seed: 0,
        }
    }
}

/// Relative error `|a - n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares `analytic` (the gradient of `loss` at `params`) against central
/// differences on a seeded subsample of coordinates. Returns the max relative
/// error.
pub fn gradient_check<F>(mut loss: F, params: &[f64], analytic: &[f64], cfg: GradCheck) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len(), "gradient length must match params");
    let n = params.len();
    let coords: Vec<usize> = if n <= cfg.coords {
        (0..n).collect()
    } else {
        let mut idx = sample(&mut seed::rng(cfg.seed), n, cfg.coords).into_vec();
        idx.sort_unstable();
        idx
    };
    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in coords {
        let orig = probe[i];
        probe[i] = orig + cfg.eps;
        let up = loss(&probe);
        probe[i] = orig - cfg.eps;
        let down = loss(&probe);
        probe[i] = orig;
        let numeric = (up - down) / (2.0 * cfg.eps);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    worst
}
