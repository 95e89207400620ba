use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Estimator {
    Mle,
    MillerMadow,
    Bub,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Mle => "mle",
            Estimator::MillerMadow => "mm",
            Estimator::Bub => "bub",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mle" => Ok(Estimator::Mle),
            "mm" | "millermadow" | "miller-madow" => Ok(Estimator::MillerMadow),
            "bub" => Ok(Estimator::Bub),
            _ => Err(Error::Invalid(format!("unknown estimator `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyEstimate {
    /// Nats, never negative.
    pub value: f64,
    pub estimator: Estimator,
    /// BUB was requested but the support was over the cap, so this is a
    /// Miller-Madow estimate.
    pub fell_back: bool,
}

/// Largest support BUB coefficients are computed for.
pub const BUB_SUPPORT_CAP: usize = 1_000_000;

const GRID: usize = 400;
const MAX_K: usize = 11;
const SMOOTHING: f64 = 1.0;

/// Entropy of the distribution with the given nonzero bin counts out of `n`
/// samples. `support` is the number of bins the variable could occupy; it
/// picks the BUB coefficients and caps every estimate at `ln(support)`.
pub fn entropy(counts: &[u64], n: u64, support: usize, estimator: Estimator) -> EntropyEstimate {
    assert!(n > 0, "entropy of an empty sample");
    let mle = || {
        let nf = n as f64;
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / nf;
                -p * p.ln()
            })
            .sum::<f64>()
    };
    let miller_madow = || {
        let m = counts.iter().filter(|&&c| c > 0).count();
        mle() + (m.saturating_sub(1)) as f64 / (2.0 * n as f64)
    };
    let (value, fell_back) = match estimator {
        Estimator::Mle => (mle(), false),
        Estimator::MillerMadow => (miller_madow(), false),
        Estimator::Bub if support > BUB_SUPPORT_CAP => (miller_madow(), true),
        Estimator::Bub => {
            let a = bub_coefficients(n as usize, support.max(1));
            let v = counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| a[c as usize])
                .sum::<f64>();
            (v, false)
        }
    };
    // no distribution over `support` bins has more than ln(support) nats
    let observed = counts.iter().filter(|&&c| c > 0).count();
    let ceiling = (support.max(observed).max(1) as f64).ln();
    EntropyEstimate {
        value: value.clamp(0.0, ceiling),
        estimator,
        fell_back,
    }
}

/// Supports are rounded up to a geometric grid (ratio 2^(1/4)) so that the
/// coefficient cache stays small.
pub fn support_bucket(m: usize) -> usize {
    let mut b = 1usize;
    while b < m {
        b = (b + 1).max((b as f64 * 2f64.powf(0.25)).ceil() as usize);
    }
    b
}

type Key = (usize, usize);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Vec<f64>>>> {
    static C: OnceLock<Mutex<HashMap<Key, Arc<Vec<f64>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// BUB coefficients `a_0..=a_n` for `n` samples over at most `m` bins
/// (bucketed), memoized for the life of the process.
pub fn bub_coefficients(n: usize, m: usize) -> Arc<Vec<f64>> {
    let key = (n, support_bucket(m));
    if let Some(a) = cache().lock().expect("not poisoned").get(&key) {
        return a.clone();
    }
    let a = Arc::new(compute_bub(key.0, key.1));
    cache()
        .lock()
        .expect("not poisoned")
        .entry(key)
        .or_insert(a)
        .clone()
}

fn miller_madow_coefficients(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            if j == 0 {
                0.0
            } else {
                let p = j as f64 / nf;
                -p * p.ln() + (1.0 - p) / (2.0 * nf)
            }
        })
        .collect()
}

/// Best-upper-bound coefficients: start from Miller-Madow, then refit
/// `a_1..=a_k` to minimise the weighted squared bias over a grid of bin
/// probabilities plus a smoothness penalty standing in for the variance
/// bound, and keep the `k` with the smallest bound
/// `(2 max |bias|)^2 + n max |a_j - a_{j-1}|^2`.
fn compute_bub(n: usize, m: usize) -> Vec<f64> {
    let base = miller_madow_coefficients(n);
    if n < 3 {
        return base;
    }
    let p: Vec<f64> = (0..GRID)
        .map(|i| {
            let u = i as f64 / (GRID - 1) as f64;
            u * u
        })
        .collect();
    let h: Vec<f64> = p
        .iter()
        .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
        .collect();
    let w: Vec<f64> = p.iter().map(|&x| 1.0 / x.max(1.0 / m as f64)).collect();
    // b[g][j] = P(Binomial(n, p_g) = j)
    let b: Vec<Vec<f64>> = p.iter().map(|&x| binomial_pmf_row(n, x)).collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 1..=MAX_K.min(n - 1) {
        let mut a = base.clone();
        let mut am = DMatrix::<f64>::zeros(GRID, k);
        let mut r = DVector::<f64>::zeros(GRID);
        for g in 0..GRID {
            let tail: f64 = (k + 1..=n).map(|j| b[g][j] * a[j]).sum();
            for j in 1..=k {
                am[(g, j - 1)] = b[g][j] * w[g];
            }
            r[g] = (h[g] - tail) * w[g];
        }
        // Differences a_1 - a_0, ..., a_{k+1} - a_k with a_0 = 0 and a_{k+1}
        // fixed: D x + c.
        let mut d = DMatrix::<f64>::zeros(k + 1, k);
        for i in 0..=k {
            if i < k {
                d[(i, i)] = 1.0;
            }
            if i > 0 {
                d[(i, i - 1)] = -1.0;
            }
        }
        let mut c = DVector::<f64>::zeros(k + 1);
        c[k] = a[k + 1];
        let lam = SMOOTHING * n as f64;
        let lhs = am.transpose() * &am * 4.0 + d.transpose() * &d * lam;
        let rhs = am.transpose() * &r * 4.0 - d.transpose() * &c * lam;
        let Some(x) = lhs.lu().solve(&rhs) else {
            continue;
        };
        for j in 1..=k {
            a[j] = x[j - 1];
        }
        let bias = (0..GRID)
            .map(|g| {
                let e: f64 = (0..=n).map(|j| b[g][j] * a[j]).sum();
                ((e - h[g]) * w[g]).abs()
            })
            .fold(0.0, f64::max);
        let step = (1..=k + 1)
            .map(|j| (a[j] - a[j - 1]).abs())
            .fold(0.0, f64::max);
        let bound = (2.0 * bias).powi(2) + n as f64 * step * step;
        if best.as_ref().is_none_or(|(bb, _)| bound < *bb) {
            best = Some((bound, a));
        }
    }
    best.map(|(_, a)| a).unwrap_or(base)
}

fn binomial_pmf_row(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    (0..=n)
        .map(|j| (ln_binomial(n as u64, j as u64) + j as f64 * lp + (n - j) as f64 * lq).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_over_four() {
        let e = entropy(&[25, 25, 25, 25], 100, 4, Estimator::Mle);
        assert!((e.value - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_value_is_zero() {
        for est in [Estimator::Mle, Estimator::MillerMadow, Estimator::Bub] {
            assert_eq!(entropy(&[37], 37, 1, est).value, 0.0, "{est}");
        }
    }

    #[test]
    fn miller_madow_adds_correction() {
        let mle = entropy(&[3, 1], 4, 2, Estimator::Mle).value;
        let mm = entropy(&[3, 1], 4, 2, Estimator::MillerMadow).value;
        assert!((mm - mle - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn capped_at_log_support() {
        // Miller-Madow alone would say ln 4 + 3/8
        let e = entropy(&[1, 1, 1, 1], 4, 4, Estimator::MillerMadow);
        assert_eq!(e.value, 4f64.ln());
    }

    #[test]
    fn bub_over_cap_falls_back() {
        let e = entropy(&[1, 1], 2, BUB_SUPPORT_CAP + 1, Estimator::Bub);
        assert!(e.fell_back);
        assert_eq!(
            e.value,
            entropy(&[1, 1], 2, BUB_SUPPORT_CAP + 1, Estimator::MillerMadow).value
        );
    }

    #[test]
    fn buckets_cover_and_grow() {
        for m in 1..2000 {
            assert!(support_bucket(m) >= m);
        }
        assert_eq!(support_bucket(1), 1);
        assert!(support_bucket(1000) < 1300);
    }

    #[test]
    fn bub_reduces_undersampled_bias() {
        let (m, n) = (100usize, 50usize);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut e_mle, mut e_bub) = (0.0, 0.0);
        for _ in 0..200 {
            let mut c = vec![0u64; m];
            for _ in 0..n {
                c[rng.random_range(0..m)] += 1;
            }
            e_mle += entropy(&c, n as u64, m, Estimator::Mle).value - (m as f64).ln();
            e_bub += entropy(&c, n as u64, m, Estimator::Bub).value - (m as f64).ln();
        }
        assert!(e_bub.abs() < e_mle.abs());
        assert!(e_mle < 0.0);
    }
}
