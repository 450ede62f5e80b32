//! Binomial confidence intervals and Monte Carlo summaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{MsaError, Result};

/// Two-sided level used for every interval.
pub const CONFIDENCE: f64 = 0.95;

/// Quantile of the Beta(a, b) law by bisection on the regularized incomplete
/// beta function.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper–Pearson interval for `k` successes out of `n` trials.
pub fn clopper_pearson(k: u64, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(MsaError::NoSamples);
    }
    if k > n {
        return Err(MsaError::InvalidParameter(format!("{k} successes out of {n}")));
    }
    let tail = 0.5 * (1.0 - CONFIDENCE);
    let (kf, nf) = (k as f64, n as f64);
    let low = if k == 0 {
        0.0
    } else if k == n {
        tail.powf(1.0 / nf)
    } else {
        beta_quantile(kf, nf - kf + 1.0, tail)
    };
    let high = if k == n {
        1.0
    } else if k == 0 {
        1.0 - tail.powf(1.0 / nf)
    } else {
        beta_quantile(kf + 1.0, nf - kf, 1.0 - tail)
    };
    Ok((low, high))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    BoundViolated,
    BoundUnresolvable,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::BoundViolated => "bound_violated",
            Status::BoundUnresolvable => "bound_unresolvable",
        }
    }
}

/// Direction of a claimed probability bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `P <= value`.
    Upper,
    /// `P >= value`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub kind: BoundKind,
}

impl Bound {
    pub fn upper(value: f64) -> Self {
        Self { value, kind: BoundKind::Upper }
    }

    pub fn lower(value: f64) -> Self {
        Self { value, kind: BoundKind::Lower }
    }
}

/// Estimated probability with its Clopper–Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub p_hat: f64,
    pub n: u64,
    pub successes: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: Option<Bound>,
    pub status: Status,
}

impl ProbEstimate {
    pub fn from_counts(successes: u64, n: u64, bound: Option<Bound>) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(successes, n)?;
        let p_hat = successes as f64 / n as f64;
        let status = match bound {
            None => Status::Ok,
            Some(b) => judge(b, ci_low, ci_high, n),
        };
        Ok(Self { p_hat, n, successes, ci_low, ci_high, bound, status })
    }

    pub fn bound_value(&self) -> Option<f64> {
        self.bound.map(|b| b.value)
    }
}

/// Compares an interval with a bound. A bound is unresolvable when even the
/// most favourable outcome at this `n` (no successes for an upper bound, all
/// successes for a lower one) would leave the interval straddling it.
fn judge(b: Bound, ci_low: f64, ci_high: f64, n: u64) -> Status {
    let (_, best_high) = clopper_pearson(0, n).expect("n > 0");
    let (all_low, _) = clopper_pearson(n, n).expect("n > 0");
    match b.kind {
        BoundKind::Upper => {
            if ci_low > b.value {
                Status::BoundViolated
            } else if best_high > b.value {
                Status::BoundUnresolvable
            } else {
                Status::Ok
            }
        }
        BoundKind::Lower => {
            if ci_high < b.value {
                Status::BoundViolated
            } else if all_low < b.value {
                Status::BoundUnresolvable
            } else {
                Status::Ok
            }
        }
    }
}

/// Mean of complex samples with the standard error of the mean, computed as
/// `sqrt(Σ|z - mean|² / (n (n - 1)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
    pub n: u64,
}

impl ComplexEstimate {
    pub fn from_samples(samples: &[Complex64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(MsaError::NoSamples);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().fold(Complex64::new(0.0, 0.0), |a, z| a + z) / n;
        let ss: f64 = samples.iter().map(|z| (z - mean).norm_sqr()).sum();
        let stderr = if samples.len() > 1 { (ss / (n * (n - 1.0))).sqrt() } else { 0.0 };
        Ok(Self { re: mean.re, im: mean.im, stderr, n: samples.len() as u64 })
    }

    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.mean().norm()
    }
}

/// Mean and standard error of real samples.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n * (n - 1.0))).sqrt())
}

/// Median of a non-empty slice.
pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    /// Binomial tail by direct summation in log space.
    fn binom_cdf(k: u64, n: u64, p: f64) -> f64 {
        let mut lg = vec![0.0f64; n as usize + 2];
        for i in 1..lg.len() {
            lg[i] = lg[i - 1] + (i as f64).ln();
        }
        (0..=k)
            .map(|i| {
                let (i, nn) = (i as usize, n as usize);
                (lg[nn] - lg[i] - lg[nn - i] + i as f64 * p.ln() + (nn - i) as f64 * (1.0 - p).ln()).exp()
            })
            .sum()
    }

    #[test]
    fn interval_endpoints_solve_the_tail_equations() {
        for (k, n) in [(1u64, 10u64), (5, 20), (37, 100), (99, 100)] {
            let (lo, hi) = clopper_pearson(k, n).unwrap();
            // P(X >= k | lo) = 0.025 and P(X <= k | hi) = 0.025.
            assert!((1.0 - binom_cdf(k - 1, n, lo) - 0.025).abs() < 1e-9, "{k}/{n}");
            assert!((binom_cdf(k, n, hi) - 0.025).abs() < 1e-9, "{k}/{n}");
        }
    }

    #[test]
    fn zero_and_full_counts() {
        let (lo, hi) = clopper_pearson(0, 100).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-15);
        let (lo, hi) = clopper_pearson(100, 100).unwrap();
        assert_eq!(hi, 1.0);
        assert!((lo - 0.025f64.powf(0.01)).abs() < 1e-15);
        assert_eq!(clopper_pearson(0, 0), Err(MsaError::NoSamples));
    }

    #[test]
    fn coverage_on_known_bernoulli_stream() {
        let p = 0.07;
        let n = 400;
        let reps = 200;
        let mut covered = 0;
        for rep in 0..reps {
            let mut rng = stream_rng(77, rep);
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = clopper_pearson(k, n).unwrap();
            if lo <= p && p <= hi {
                covered += 1;
            }
        }
        assert!(covered as f64 / reps as f64 >= 0.93, "coverage {covered}/{reps}");
    }

    #[test]
    fn status_rules() {
        let e = ProbEstimate::from_counts(0, 10_000, Some(Bound::upper(0.01))).unwrap();
        assert_eq!(e.status, Status::Ok);
        let e = ProbEstimate::from_counts(500, 10_000, Some(Bound::upper(0.01))).unwrap();
        assert_eq!(e.status, Status::BoundViolated);
        let e = ProbEstimate::from_counts(0, 10, Some(Bound::upper(0.01))).unwrap();
        assert_eq!(e.status, Status::BoundUnresolvable);
        let e = ProbEstimate::from_counts(10, 10, Some(Bound::lower(1.0 - 1e-24))).unwrap();
        assert_eq!(e.status, Status::BoundUnresolvable);
        let e = ProbEstimate::from_counts(2, 10, Some(Bound::lower(0.9))).unwrap();
        assert_eq!(e.status, Status::BoundViolated);
    }

    #[test]
    fn complex_summary() {
        let z = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let e = ComplexEstimate::from_samples(&z).unwrap();
        assert_eq!(e.mean(), Complex64::new(0.5, 0.5));
        assert!((e.stderr - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    proptest! {
        #[test]
        fn interval_brackets_the_estimate(n in 1u64..500, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let e = ProbEstimate::from_counts(k, n, None).unwrap();
            prop_assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
            prop_assert!(e.ci_low >= 0.0 && e.ci_high <= 1.0);
        }
    }
}
