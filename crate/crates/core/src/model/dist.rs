//! Count distributions used by the point and extra-point layers.
//!
//! The negative binomial counts failures before the `r`-th success with
//! success probability `p`, so the untruncated mean is `r (1 - p) / p`.
//! Truncated to `[0, r - 2]` its pmf is
//! `C(y + r - 1, y) q^y / S(q)` with `q = 1 - p` and
//! `S(q) = sum_{k <= r - 2} C(k + r - 1, k) q^k`; the common `p^r` cancels.

use std::sync::LazyLock;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::DomainError;

/// Precomputed binomial coefficients for one `r`.
#[derive(Debug, Clone)]
pub struct TruncNegBin {
    r: u32,
    /// `C(k + r - 1, k)` for `k = 0..=r-2`.
    coeffs: Vec<f64>,
    ln_coeffs: Vec<f64>,
}

static R25: LazyLock<TruncNegBin> = LazyLock::new(|| TruncNegBin::new(25));
static R15: LazyLock<TruncNegBin> = LazyLock::new(|| TruncNegBin::new(15));

impl TruncNegBin {
    pub fn new(r: u32) -> Self {
        assert!(r >= 2, "target must be at least 2");
        let ln_coeffs: Vec<f64> = (0..=r - 2)
            .map(|k| ln_gamma((k + r) as f64) - ln_gamma(r as f64) - ln_gamma(k as f64 + 1.0))
            .collect();
        let mut coeffs = Vec::with_capacity(ln_coeffs.len());
        let mut c = 1.0;
        for k in 0..=r - 2 {
            coeffs.push(c);
            c *= (k + r) as f64 / (k + 1) as f64;
        }
        TruncNegBin {
            r,
            coeffs,
            ln_coeffs,
        }
    }

    /// Shared tables for the two targets that occur in play.
    pub fn for_target(r: u32) -> std::borrow::Cow<'static, TruncNegBin> {
        match r {
            25 => std::borrow::Cow::Borrowed(&*R25),
            15 => std::borrow::Cow::Borrowed(&*R15),
            _ => std::borrow::Cow::Owned(TruncNegBin::new(r)),
        }
    }

    pub fn target(&self) -> u32 {
        self.r
    }

    pub fn max_value(&self) -> u32 {
        self.r - 2
    }

    /// `S(q)` by Horner's rule.
    fn normaliser(&self, q: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * q + c)
    }

    /// Log-pmf given `ln q` and `q`; `y` must be within the support.
    #[inline]
    pub fn ln_pmf_q(&self, y: u32, q: f64, ln_q: f64) -> f64 {
        let y_term = if y == 0 { 0.0 } else { y as f64 * ln_q };
        self.ln_coeffs[y as usize] + y_term - self.normaliser(q).ln()
    }

    pub fn ln_pmf(&self, y: u32, p: f64) -> Result<f64, DomainError> {
        check_probability(p)?;
        if y > self.max_value() {
            return Err(DomainError(format!(
                "y = {y} exceeds the truncation bound {}",
                self.max_value()
            )));
        }
        let q = 1.0 - p;
        Ok(self.ln_pmf_q(y, q, q.ln()))
    }

    /// Inverse-cdf draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, q: f64) -> u32 {
        let total = self.normaliser(q);
        let mut u = rng.random::<f64>() * total;
        let mut term = 1.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let w = c * term;
            if u < w {
                return k as u32;
            }
            u -= w;
            term *= q;
        }
        self.max_value()
    }
}

fn check_probability(p: f64) -> Result<(), DomainError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(DomainError(format!("probability {p} outside (0, 1)")))
    }
}

/// Log-pmf of the negative binomial right-truncated at `r - 2`.
pub fn trunc_negbin_logpmf(y: u32, r: u32, p: f64) -> Result<f64, DomainError> {
    if r < 2 {
        return Err(DomainError(format!("target {r} below 2")));
    }
    TruncNegBin::for_target(r).ln_pmf(y, p)
}

/// Untruncated negative binomial pmf at `k`, computed in logs.
fn negbin_pmf(k: u32, r: u32, p: f64) -> f64 {
    let ln = ln_gamma((k + r) as f64) - ln_gamma(r as f64) - ln_gamma(k as f64 + 1.0)
        + r as f64 * p.ln()
        + k as f64 * (1.0 - p).ln();
    ln.exp()
}

/// `c* = (r - 1) f_NB(r - 1) / F_NB(r - 2)`.
pub fn cstar(r: u32, p: f64) -> f64 {
    let tnb = TruncNegBin::for_target(r);
    let q = 1.0 - p;
    // F_NB(r - 2) = p^r S(q)
    let ln_cdf = r as f64 * p.ln() + tnb.normaliser(q).ln();
    (r - 1) as f64 * (negbin_pmf(r - 1, r, p).ln() - ln_cdf).exp()
}

/// Mean of the truncated negative binomial. Equal to `r (1 - p) / p - c* / p`,
/// but summed as `q S'(q) / S(q)`: the closed form divides by `p` and loses
/// digits as `p` goes to zero.
pub fn trunc_negbin_mean(r: u32, p: f64) -> f64 {
    let tnb = TruncNegBin::for_target(r);
    let q = 1.0 - p;
    let (num, den) = tnb
        .coeffs
        .iter()
        .enumerate()
        .rev()
        .fold((0.0, 0.0), |(n, d), (k, &c)| (n * q + k as f64 * c, d * q + c));
    (num / den).clamp(0.0, (r - 2) as f64)
}

/// `P(O = 0) = pi + (1 - pi) e^{-lambda}`.
pub fn zip_zero_mass(pi: f64, lambda: f64) -> f64 {
    pi + (1.0 - pi) * (-lambda).exp()
}

pub fn poisson_logpmf(k: u32, lambda: f64) -> f64 {
    if k == 0 {
        -lambda
    } else {
        k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)
    }
}

/// Zero-inflated Poisson log-pmf.
pub fn zip_logpmf(o: u32, pi: f64, lambda: f64) -> f64 {
    if o == 0 {
        zip_zero_mass(pi, lambda).ln()
    } else {
        (1.0 - pi).ln() + poisson_logpmf(o, lambda)
    }
}

pub fn sample_zip<R: Rng + ?Sized>(rng: &mut R, pi: f64, lambda: f64) -> u32 {
    if rng.random::<f64>() < pi {
        return 0;
    }
    sample_poisson(rng, lambda)
}

pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
    draw as u32
}

/// `1 / (1 + e^{-x})`
#[inline]
pub fn inv_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln inv_logit(x)`
#[inline]
pub fn ln_inv_logit(x: f64) -> f64 {
    -softplus(-x)
}

pub fn normal_logpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn inv_gamma_logpdf(x: f64, shape: f64, scale: f64) -> f64 {
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

pub fn lognormal_logpdf(x: f64, log_mean: f64, log_sd: f64) -> f64 {
    normal_logpdf(x.ln(), log_mean, log_sd) - x.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{Discrete, NegativeBinomial};

    /// Brute-force truncated pmf from the untruncated statrs pmf.
    fn oracle_pmf(y: u32, r: u32, p: f64) -> f64 {
        let nb = NegativeBinomial::new(r as f64, p).unwrap();
        let cdf: f64 = (0..=r - 2).map(|k| nb.pmf(k as u64)).sum();
        nb.pmf(y as u64) / cdf
    }

    fn grid() -> impl Iterator<Item = (u32, f64)> {
        [15u32, 25]
            .into_iter()
            .flat_map(|r| (1..=99).map(move |i| (r, i as f64 / 100.0)))
    }

    #[test]
    fn normalises_on_grid() {
        for (r, p) in grid() {
            let total: f64 = (0..=r - 2)
                .map(|y| trunc_negbin_logpmf(y, r, p).unwrap().exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "r={r} p={p} total={total}");
        }
    }

    #[test]
    fn matches_brute_force_pmf() {
        let got = trunc_negbin_logpmf(10, 25, 0.6).unwrap().exp();
        let want = oracle_pmf(10, 25, 0.6);
        assert!((got - want).abs() < 1e-12 * want.max(1.0), "{got} vs {want}");
        for (r, p) in grid().step_by(7) {
            for y in [0, r / 2, r - 2] {
                let got = trunc_negbin_logpmf(y, r, p).unwrap().exp();
                let want = oracle_pmf(y, r, p);
                assert!((got - want).abs() < 1e-10, "r={r} p={p} y={y}");
            }
        }
    }

    #[test]
    fn mean_matches_brute_force() {
        for (r, p) in grid() {
            let brute: f64 = (0..=r - 2).map(|y| y as f64 * oracle_pmf(y, r, p)).sum();
            let mean = trunc_negbin_mean(r, p);
            assert!((mean - brute).abs() < 1e-10, "r={r} p={p}: {mean} vs {brute}");
            assert!(cstar(r, p) > 0.0);
            let closed = r as f64 * (1.0 - p) / p - cstar(r, p) / p;
            assert!((closed - mean).abs() < 1e-9 * (1.0 / p), "closed form r={r} p={p}");
        }
    }

    #[test]
    fn mean_decreasing_in_p() {
        let means: Vec<f64> = (1..1000).map(|i| trunc_negbin_mean(25, i as f64 / 1000.0)).collect();
        assert!(means.windows(2).all(|w| w[1] < w[0]));
        assert!(trunc_negbin_mean(25, 0.9999) < 0.01);
    }

    #[test]
    fn outside_support() {
        assert!(trunc_negbin_logpmf(14, 15, 0.5).is_err());
        assert!(trunc_negbin_logpmf(3, 25, 0.0).is_err());
        assert!(trunc_negbin_logpmf(3, 25, 1.0).is_err());
    }

    #[test]
    fn zip_cases() {
        assert!((zip_logpmf(0, 1.0, 3.0)).abs() < 1e-15);
        assert_eq!(zip_logpmf(2, 1.0, 3.0), f64::NEG_INFINITY);
        for k in 0..10 {
            assert!((zip_logpmf(k, 0.0, 2.5) - poisson_logpmf(k, 2.5)).abs() < 1e-12);
        }
        let pi = inv_logit(2.12);
        assert!((pi - 0.8928).abs() < 1e-3);
        let zero = zip_logpmf(0, pi, 3.97).exp();
        assert!((zero - 0.895).abs() < 1e-3, "{zero}");
        assert!((zero - (pi + (1.0 - pi) * (-3.97f64).exp())).abs() < 1e-12);
        assert!(zip_zero_mass(0.3, 1e-9) > 1.0 - 1e-8);
    }

    #[test]
    fn sampler_respects_support_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tnb = TruncNegBin::new(25);
        let p: f64 = 0.45;
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let y = tnb.sample(&mut rng, 1.0 - p);
            assert!(y <= 23);
            sum += y as f64;
        }
        let mean = sum / n as f64;
        let want = trunc_negbin_mean(25, p);
        assert!((mean - want).abs() < 0.02, "{mean} vs {want}");
    }

    #[test]
    fn logistic_helpers() {
        for x in [-800.0, -30.0, -1.0, 0.0, 0.16, 5.0, 800.0] {
            let p = inv_logit(x);
            assert!((0.0..=1.0).contains(&p));
            if x.abs() < 30.0 {
                assert!((ln_inv_logit(x) - p.ln()).abs() < 1e-12);
            }
        }
        assert!((inv_logit(0.16) - 0.5399).abs() < 1e-4);
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-12);
    }
}
