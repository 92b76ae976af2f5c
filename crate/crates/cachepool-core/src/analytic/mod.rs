//! The characteristic-time machinery and miss-ratio predictors.
//!
//! Everything here is driven by the expected distinct size mass
//!
//! ```text
//! m(z)    = sum_i s_i (1 - (1 - p_i)^z)
//! m_bar(z)= sum_i s_i (1 - exp(-p_i z))
//! ```
//!
//! over the mixed catalog: `m_inverse(x)` is the characteristic number of
//! requests filling a cache of size `x`, and the Che characteristic time
//! is the root of `m_bar(T) = x`. Three predictors are built on top:
//!
//! * [`AnalyticModel::predict_che`] — the general-purpose numeric
//!   predictor `sum_i q_i e^{-p_i T}` per flow;
//! * [`AnalyticModel::predict_asymptotic`] — `Gamma(beta_k + 1) /
//!   Phi_k(m_inverse(x))` with `Phi_k` interpolated from the finite
//!   catalog;
//! * [`closed`] — closed forms for Zipf, Weibull and multi-Zipf mixes.

pub mod closed;
mod phi;
mod solve;

pub use phi::LogLogInterp;

use crate::error::{Error, Result};
use crate::workload::Catalog;
use rayon::prelude::*;
use std::sync::Arc;

/// Deterministic chunked summation: chunk results are reduced in order,
/// so the value does not depend on the number of worker threads.
fn par_sum(n: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 1 << 16;
    if n <= CHUNK {
        return (0..n).map(term).sum();
    }
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            (lo..hi).map(&term).sum::<f64>()
        })
        .collect();
    chunks.iter().sum()
}

/// `m(z)` and `m_bar(z)` over an arbitrary `(p_i, s_i)` population. The
/// probabilities need not sum to one (truncated analytic populations are
/// allowed); catalog-backed callers go through [`AnalyticModel`].
#[derive(Debug, Clone)]
pub struct DistinctMassCurve {
    p: Vec<f64>,
    /// Precomputed `log1p(-p_i)`; `-inf` marks deterministic items.
    ln1p: Vec<f64>,
    sizes: Vec<f64>,
    total_size: f64,
}

impl DistinctMassCurve {
    pub fn new(p: Vec<f64>, sizes: Vec<f64>) -> Self {
        assert_eq!(p.len(), sizes.len());
        let ln1p = p.iter().map(|&pi| (-pi).ln_1p()).collect();
        let total_size = sizes.iter().sum();
        DistinctMassCurve { p, ln1p, sizes, total_size }
    }

    pub fn total_size(&self) -> f64 {
        self.total_size
    }

    /// Expected total size of distinct items seen in `z` i.i.d. requests.
    pub fn m(&self, z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let (ln1p, sizes) = (&self.ln1p, &self.sizes);
        par_sum(self.p.len(), |i| {
            let e = z * ln1p[i];
            if e == f64::NEG_INFINITY {
                sizes[i]
            } else {
                sizes[i] * (-e.exp_m1())
            }
        })
    }

    /// Poissonized variant `sum s_i (1 - e^{-p_i z})`.
    pub fn m_bar(&self, z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let (p, sizes) = (&self.p, &self.sizes);
        par_sum(p.len(), |i| sizes[i] * (-(-p[i] * z).exp_m1()))
    }

    fn check_invertible(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return Err(Error::OutOfRange(format!("cache size {x} must be non-negative")));
        }
        if x >= self.total_size {
            return Err(Error::Saturated { x, total: self.total_size });
        }
        Ok(())
    }

    /// `m_inverse(x)`: the characteristic request count filling size `x`.
    pub fn m_invert(&self, x: f64) -> Result<f64> {
        self.check_invertible(x)?;
        Ok(solve::invert_increasing(|z| self.m(z), x))
    }

    /// Che characteristic time: the unique root of `m_bar(T) = x`.
    pub fn che_time(&self, x: f64) -> Result<f64> {
        self.check_invertible(x)?;
        Ok(solve::invert_increasing(|z| self.m_bar(z), x))
    }
}

/// Per-flow Che prediction at one cache size.
#[derive(Debug, Clone)]
pub struct ChePrediction {
    pub t: f64,
    pub per_flow: Vec<f64>,
    pub overall: f64,
}

/// Result of the asymptotic predictor.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticPrediction {
    pub miss: f64,
    /// Local regular-variation index of `Phi_k` used in the Gamma factor.
    pub beta: f64,
    /// True when `m_inverse(x)` fell outside the catalog-covered range of
    /// `Phi_k` and endpoint slopes were extended.
    pub extrapolated: bool,
}

/// Options for [`AnalyticModel::predict_asymptotic`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AsymptoticOptions {
    /// Permit evaluation outside the interpolant's covered range.
    pub allow_extrapolation: bool,
    /// Use this regular-variation index instead of the measured slope
    /// (closed-form scenarios know their beta exactly).
    pub beta_override: Option<f64>,
}

/// Analytic model bound to a catalog: the mass curve plus per-flow tail
/// interpolants. Immutable and cheap to share.
#[derive(Debug, Clone)]
pub struct AnalyticModel {
    catalog: Arc<Catalog>,
    curve: DistinctMassCurve,
    phis: Vec<LogLogInterp>,
}

impl AnalyticModel {
    pub fn new(catalog: Arc<Catalog>) -> Self {
        let sizes: Vec<f64> = catalog.sizes().iter().map(|&s| s as f64).collect();
        let curve = DistinctMassCurve::new(catalog.mixed_p().to_vec(), sizes);
        let phis = catalog
            .flows()
            .iter()
            .map(|f| LogLogInterp::from_flow(f.p(), f.q_suffix()))
            .collect();
        AnalyticModel { catalog, curve, phis }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn curve(&self) -> &DistinctMassCurve {
        &self.curve
    }

    pub fn phi(&self, k: usize) -> &LogLogInterp {
        &self.phis[k]
    }

    pub fn m_eval(&self, z: f64) -> f64 {
        self.curve.m(z)
    }

    pub fn m_bar_eval(&self, z: f64) -> f64 {
        self.curve.m_bar(z)
    }

    pub fn m_invert(&self, x: f64) -> Result<f64> {
        self.curve.m_invert(x)
    }

    pub fn che_time(&self, x: f64) -> Result<f64> {
        self.curve.che_time(x)
    }

    /// Flow-local `m_bar^{(k)}(z) = sum s_i (1 - e^{-q_i z})` over the
    /// flow's conditional distribution (decomposition property).
    pub fn m_bar_flow(&self, k: usize, z: f64) -> f64 {
        let flow = self.catalog.flow(k);
        let (q, idx) = (flow.q(), flow.union_idx());
        let sizes = self.catalog.sizes();
        par_sum(q.len(), |i| {
            sizes[idx[i] as usize] as f64 * (-(-q[i] * z).exp_m1())
        })
    }

    /// Search-cost tail `P[sigma > n | I_0 = k] = sum_i q_i (1 - p_i)^n`;
    /// real `n` is accepted through the continuous extension.
    pub fn sigma_tail(&self, k: usize, n: f64) -> f64 {
        assert!(n >= 0.0, "sigma tail needs n >= 0");
        if n == 0.0 {
            return 1.0;
        }
        let flow = self.catalog.flow(k);
        let (q, p) = (flow.q(), flow.p());
        par_sum(q.len(), |i| {
            let e = n * (-p[i]).ln_1p();
            if e == f64::NEG_INFINITY {
                0.0
            } else {
                q[i] * e.exp()
            }
        })
    }

    /// Che-approximation miss probabilities per flow and overall.
    pub fn predict_che(&self, x: f64) -> Result<ChePrediction> {
        let t = self.che_time(x)?;
        let per_flow: Vec<f64> = (0..self.catalog.n_flows())
            .map(|k| {
                let flow = self.catalog.flow(k);
                let (q, p) = (flow.q(), flow.p());
                par_sum(q.len(), |i| q[i] * (-p[i] * t).exp())
            })
            .collect();
        let overall = self
            .catalog
            .flows()
            .iter()
            .zip(&per_flow)
            .map(|(f, &m)| f.nu() * m)
            .sum();
        Ok(ChePrediction { t, per_flow, overall })
    }

    /// Asymptotic prediction
    /// `Gamma(beta_k + 1) / Phi_k(m_inverse(x))` for flow `k`.
    pub fn predict_asymptotic(
        &self,
        k: usize,
        x: f64,
        opts: AsymptoticOptions,
    ) -> Result<AsymptoticPrediction> {
        let t = self.m_invert(x)?;
        let interp = &self.phis[k];
        let extrapolated = !interp.in_range(t);
        if extrapolated && !opts.allow_extrapolation {
            return Err(Error::OutOfRange(format!(
                "m_inverse({x}) = {t:.3e} outside the catalog range of flow {k}'s tail relation"
            )));
        }
        let beta = opts.beta_override.unwrap_or_else(|| interp.slope_at(t));
        let miss = statrs::function::gamma::gamma(beta + 1.0) / interp.eval(t);
        Ok(AsymptoticPrediction { miss, beta, extrapolated })
    }
}
