//! Closed-form asymptotic miss probabilities for the supported families.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

/// The slowly varying factor in a regularly varying popularity
/// `q_i ~ c l(i) / i^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlowlyVarying {
    /// `l(x) = 1` (pure Zipf).
    Constant,
    /// `l(x) = log x`.
    Log,
}

/// Closed Zipf prediction at one cache size.
#[derive(Debug, Clone, Copy)]
pub struct ZipfClosed {
    /// `P[C_0 > x]` for a single flow with unit sizes.
    pub miss: f64,
    /// The limit of `P[C_0 > x] / P[R_0 > x]`:
    /// `(1 - 1/alpha) Gamma(1 - 1/alpha)^alpha`.
    pub tail_ratio_limit: f64,
}

/// Single-flow Zipf (or regularly varying) closed form,
/// `miss ~ Gamma(2 - 1/alpha) Gamma(1 - 1/alpha)^(alpha-1) / (alpha - 1)
///  * c l(x) / x^(alpha-1)`.
pub fn closed_zipf(alpha: f64, c: f64, l: SlowlyVarying, x: f64) -> Result<ZipfClosed> {
    if alpha <= 1.0 {
        return Err(Error::Domain(format!(
            "closed Zipf form needs alpha > 1 (got {alpha}); alpha <= 1 requires the finite-catalog regime"
        )));
    }
    if !(c > 0.0) || !(x > 0.0) {
        return Err(Error::OutOfRange("closed_zipf needs positive c and x".into()));
    }
    let inv = 1.0 / alpha;
    let k = gamma(2.0 - inv) * gamma(1.0 - inv).powf(alpha - 1.0) / (alpha - 1.0);
    let l_x = match l {
        SlowlyVarying::Constant => 1.0,
        SlowlyVarying::Log => x.ln(),
    };
    Ok(ZipfClosed {
        miss: k * c * l_x / x.powf(alpha - 1.0),
        tail_ratio_limit: (1.0 - inv) * gamma(1.0 - inv).powf(alpha),
    })
}

/// Closed Weibull prediction at one cache size.
#[derive(Debug, Clone, Copy)]
pub struct WeibullClosed {
    /// `P[C_0 > x] ~ (e^gamma c / xi) x^(1-xi) e^(-x^xi)`.
    pub miss: f64,
    /// The limit of `P[C_0 > x] / P[R_0 > x] = e^gamma`.
    pub ratio_limit: f64,
    /// Set when `xi` lies outside the proven range `(0, 1/3)` but inside
    /// `(0, 1)`, where the formula is used heuristically.
    pub outside_proven_range: bool,
}

/// Single-flow heavy-tailed Weibull closed form for `q_i ~ c e^{-i^xi}`.
pub fn closed_weibull(xi: f64, c: f64, x: f64) -> Result<WeibullClosed> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("Weibull shape must lie in (0, 1) (got {xi})")));
    }
    if !(c > 0.0) || !(x > 0.0) {
        return Err(Error::OutOfRange("closed_weibull needs positive c and x".into()));
    }
    let ratio = EULER_GAMMA.exp();
    Ok(WeibullClosed {
        miss: ratio * c / xi * x.powf(1.0 - xi) * (-x.powf(xi)).exp(),
        ratio_limit: ratio,
        outside_proven_range: xi >= 1.0 / 3.0,
    })
}

/// One flow of a multi-Zipf mix: `q_i ~ c / i^alpha`, mixing probability
/// `nu` and constant item size `size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfFlow {
    pub alpha: f64,
    pub c: f64,
    pub nu: f64,
    pub size: f64,
}

/// Closed-form model for several non-overlapping Zipf flows with
/// per-flow constant sizes sharing one cache.
///
/// The smallest exponent `alpha_1` dominates the pooled mass curve:
/// `m(z) ~ gamma_1 z^(1/alpha_1)` with
/// `gamma_1 = Gamma(1 - 1/alpha_1) sum_(k in S1) s_k (c_k nu_k)^(1/alpha_1)`.
/// The refined inverse also keeps the second-smallest exponent's term.
#[derive(Debug, Clone)]
pub struct MultiZipfModel {
    flows: Vec<ZipfFlow>,
    alpha1: f64,
    alpha2: Option<f64>,
    s1: Vec<usize>,
    s2: Vec<usize>,
    gamma1: f64,
    gamma2: f64,
}

impl MultiZipfModel {
    pub fn new(flows: Vec<ZipfFlow>) -> Result<Self> {
        if flows.is_empty() {
            return Err(Error::InvalidSpec("multi-Zipf model needs at least one flow".into()));
        }
        for f in &flows {
            if f.alpha <= 1.0 {
                return Err(Error::Domain(format!(
                    "multi-Zipf model needs alpha > 1 (got {})",
                    f.alpha
                )));
            }
            if !(f.c > 0.0 && f.nu > 0.0 && f.size > 0.0) {
                return Err(Error::InvalidSpec("c, nu and size must be positive".into()));
            }
        }
        let nu_sum: f64 = flows.iter().map(|f| f.nu).sum();
        if (nu_sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "mixing probabilities sum to {nu_sum}, expected 1"
            )));
        }
        let alpha1 = flows.iter().map(|f| f.alpha).fold(f64::INFINITY, f64::min);
        let tol = 1e-12;
        let s1: Vec<usize> = (0..flows.len())
            .filter(|&k| (flows[k].alpha - alpha1).abs() <= tol * alpha1)
            .collect();
        let alpha2 = flows
            .iter()
            .filter(|f| (f.alpha - alpha1).abs() > tol * alpha1)
            .map(|f| f.alpha)
            .fold(f64::INFINITY, f64::min);
        let (alpha2, s2) = if alpha2.is_finite() {
            let s2: Vec<usize> = (0..flows.len())
                .filter(|&k| (flows[k].alpha - alpha2).abs() <= tol * alpha2)
                .collect();
            (Some(alpha2), s2)
        } else {
            (None, Vec::new())
        };
        let gamma_for = |members: &[usize], a: f64| -> f64 {
            gamma(1.0 - 1.0 / a)
                * members
                    .iter()
                    .map(|&k| flows[k].size * (flows[k].c * flows[k].nu).powf(1.0 / a))
                    .sum::<f64>()
        };
        let gamma1 = gamma_for(&s1, alpha1);
        let gamma2 = match alpha2 {
            Some(a2) => gamma_for(&s2, a2),
            None => 0.0,
        };
        Ok(MultiZipfModel { flows, alpha1, alpha2, s1, s2, gamma1, gamma2 })
    }

    pub fn flows(&self) -> &[ZipfFlow] {
        &self.flows
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn dominant_flows(&self) -> &[usize] {
        &self.s1
    }

    pub fn second_flows(&self) -> &[usize] {
        &self.s2
    }

    /// Closed-form `m_inverse(x)`: `x^a1 / gamma_1^a1` plainly, or with
    /// the two-term refinement
    /// `x^a1 / (gamma_1 + gamma_2 (x/gamma_1)^(a1/a2 - 1))^a1`.
    pub fn m_inverse(&self, x: f64, refined: bool) -> f64 {
        let a1 = self.alpha1;
        let denom = match self.alpha2 {
            Some(a2) if refined => {
                self.gamma1 + self.gamma2 * (x / self.gamma1).powf(a1 / a2 - 1.0)
            }
            _ => self.gamma1,
        };
        x.powf(a1) / denom.powf(a1)
    }

    /// Per-flow asymptotic miss probabilities at cache size `x`:
    /// `Gamma(2 - 1/alpha_k) / Phi_k(m_inverse(x))` with
    /// `Phi_k(t) = (alpha_k - 1) c_k^(-1/alpha_k) (nu_k t)^(1 - 1/alpha_k)`.
    pub fn per_flow_miss(&self, x: f64, refined: bool) -> Vec<f64> {
        let t = self.m_inverse(x, refined);
        self.flows
            .iter()
            .map(|f| {
                let inv = 1.0 / f.alpha;
                let phi = (f.alpha - 1.0) * f.c.powf(-inv) * (f.nu * t).powf(1.0 - inv);
                gamma(2.0 - inv) / phi
            })
            .collect()
    }

    pub fn overall_miss(&self, x: f64, refined: bool) -> f64 {
        self.per_flow_miss(x, refined)
            .iter()
            .zip(&self.flows)
            .map(|(&m, f)| f.nu * m)
            .sum()
    }
}

/// Per-flow miss probabilities from the multi-Zipf closed form;
/// `refined` switches to the two-term inverse.
pub fn closed_multi_zipf(model: &MultiZipfModel, x: f64, refined: bool) -> Vec<f64> {
    model.per_flow_miss(x, refined)
}
