//! Pooling-versus-separation planning.
//!
//! Static separation splits a cache of size `x` by fractions `u_k`;
//! pooling serves all flows in one list. For non-overlapping Zipf flows
//! with per-flow constant sizes the asymptotics are closed-form: the
//! optimal split solves a convex problem (KKT), and the pooled/separated
//! miss ratio is a Hoelder-type expression that equals one exactly when
//! all item sizes match. For two overlapping flows the good region
//! predicate decides whether pooling beats a given split for *both*
//! flows.

use crate::analytic::closed::{MultiZipfModel, ZipfFlow};
use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Planner verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Pooling is strictly better for the compared objective.
    Pool,
    /// Optimal static separation is asymptotically better.
    Separate,
    /// Asymptotically indistinguishable (equal sizes).
    Equivalent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pool => write!(f, "pool"),
            Verdict::Separate => write!(f, "separate"),
            Verdict::Equivalent => write!(f, "equivalent"),
        }
    }
}

/// A static split with its predicted consequences at one cache size.
/// Miss probabilities are asymptotic closed forms, clamped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PartitionPlan {
    pub u: Vec<f64>,
    pub pooled_per_flow: Vec<f64>,
    pub separated_per_flow: Vec<f64>,
    pub overall_pooled: f64,
    pub overall_separated: f64,
    /// Asymptotic limit of pooled / optimally-separated overall miss.
    pub ratio: f64,
    pub verdict: Verdict,
}

fn require_common_alpha(flows: &[ZipfFlow]) -> Result<f64> {
    let alpha = flows[0].alpha;
    if flows.iter().any(|f| (f.alpha - alpha).abs() > 1e-12 * alpha) {
        return Err(Error::UnsupportedConfig(
            "this operation requires a common Zipf exponent across flows".into(),
        ));
    }
    Ok(alpha)
}

fn validate_flows(flows: &[ZipfFlow]) -> Result<()> {
    if flows.is_empty() {
        return Err(Error::InvalidSpec("no flows".into()));
    }
    for f in flows {
        if f.alpha <= 1.0 {
            return Err(Error::Domain(format!("alpha must exceed 1 (got {})", f.alpha)));
        }
        if !(f.c > 0.0 && f.nu > 0.0 && f.size > 0.0) {
            return Err(Error::InvalidSpec("c, nu and size must be positive".into()));
        }
    }
    Ok(())
}

/// Single-flow closed-form miss for a Zipf flow with constant size `s`
/// alone in a cache of size `y`; raw asymptotic value, may exceed 1 for
/// small `y`.
pub fn solo_zipf_miss(f: &ZipfFlow, y: f64) -> f64 {
    if y <= 0.0 {
        return f64::INFINITY;
    }
    let inv = 1.0 / f.alpha;
    let k = gamma(1.0 - inv).powf(f.alpha) / f.alpha;
    k * f.c * (f.size / y).powf(f.alpha - 1.0)
}

/// Optimal static split for Zipf flows (KKT closed form when exponents
/// match):
/// `u_k ~ (c_k nu_k)^(1/alpha) s_k^(1 - 1/alpha)`, normalized.
///
/// With differing exponents the asymptotic optimum concentrates on the
/// flows with the smallest exponent (their misses dominate every
/// objective term that decays slower); the returned split follows the
/// same closed form restricted to those flows and gives the rest zero.
/// At finite cache sizes prefer [`optimize_split_numeric`].
pub fn optimal_split_zipf(flows: &[ZipfFlow]) -> Result<Vec<f64>> {
    validate_flows(flows)?;
    let model = MultiZipfModel::new(flows.to_vec())?;
    let members = model.dominant_flows();
    let alpha = flows[members[0]].alpha;
    let mut u = vec![0.0; flows.len()];
    let mut total = 0.0;
    for &k in members {
        let f = &flows[k];
        let w = (f.c * f.nu).powf(1.0 / alpha) * f.size.powf(1.0 - 1.0 / alpha);
        u[k] = w;
        total += w;
    }
    u.iter_mut().for_each(|v| *v /= total);
    Ok(u)
}

/// Asymptotic pooled-over-separated overall miss ratio and the per-flow
/// predictions at cache size `x`.
///
/// The ratio (restricted to the dominant-exponent flows) is
/// `[sum w_k][sum w_k s_k]^(alpha-1) / [sum w_k s_k^(1-1/alpha)]^alpha`
/// with `w_k = (c_k nu_k)^(1/alpha)`; it is `>= 1` by Hoelder's
/// inequality with equality iff the sizes coincide.
pub fn pooling_vs_separation(flows: &[ZipfFlow], x: f64) -> Result<PartitionPlan> {
    validate_flows(flows)?;
    if !(x > 0.0) {
        return Err(Error::OutOfRange("cache size must be positive".into()));
    }
    let model = MultiZipfModel::new(flows.to_vec())?;
    let members = model.dominant_flows();
    let alpha = flows[members[0]].alpha;
    let w: Vec<f64> = members.iter().map(|&k| (flows[k].c * flows[k].nu).powf(1.0 / alpha)).collect();
    let s: Vec<f64> = members.iter().map(|&k| flows[k].size).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_ws: f64 = w.iter().zip(&s).map(|(a, b)| a * b).sum();
    let sum_w_pow: f64 = w.iter().zip(&s).map(|(a, b)| a * b.powf(1.0 - 1.0 / alpha)).sum();
    let ratio = sum_w * sum_ws.powf(alpha - 1.0) / sum_w_pow.powf(alpha);

    let u = optimal_split_zipf(flows)?;
    let pooled_per_flow: Vec<f64> =
        model.per_flow_miss(x, false).into_iter().map(|m| m.min(1.0)).collect();
    let separated_per_flow: Vec<f64> = flows
        .iter()
        .zip(&u)
        .map(|(f, &uk)| solo_zipf_miss(f, uk * x).min(1.0))
        .collect();
    let overall_pooled = flows.iter().zip(&pooled_per_flow).map(|(f, m)| f.nu * m).sum();
    let overall_separated = flows.iter().zip(&separated_per_flow).map(|(f, m)| f.nu * m).sum();

    let max_size = s.iter().cloned().fold(f64::MIN, f64::max);
    let min_size = s.iter().cloned().fold(f64::MAX, f64::min);
    let verdict = if (ratio - 1.0).abs() <= 1e-9 && (max_size / min_size - 1.0).abs() <= 1e-9 {
        Verdict::Equivalent
    } else {
        Verdict::Separate
    };
    Ok(PartitionPlan {
        u,
        pooled_per_flow,
        separated_per_flow,
        overall_pooled,
        overall_separated,
        ratio,
        verdict,
    })
}

/// Pairwise asymptotic miss ratios of pooled flows (equal sizes, common
/// exponent): `R_ij = c_i^(1/alpha) nu_i^(1/alpha - 1) /
/// (c_j^(1/alpha) nu_j^(1/alpha - 1))`.
#[derive(Debug, Clone)]
pub struct FlowImpact {
    pub ratio_matrix: Vec<Vec<f64>>,
    pub pooled_per_flow: Vec<f64>,
    /// Per-flow miss under the optimal split, each flow at `u_k x`.
    pub separated_per_flow: Vec<f64>,
    /// Whether pooling matched optimal separation per flow (always true
    /// asymptotically; kept as a numeric cross-check).
    pub pooling_matches_separation: bool,
}

pub fn per_flow_impact(flows: &[ZipfFlow], x: f64) -> Result<FlowImpact> {
    validate_flows(flows)?;
    let alpha = require_common_alpha(flows)?;
    let size = flows[0].size;
    if flows.iter().any(|f| (f.size - size).abs() > 1e-9 * size) {
        return Err(Error::UnsupportedConfig(
            "per-flow impact ratios require equal item sizes".into(),
        ));
    }
    let weight =
        |f: &ZipfFlow| f.c.powf(1.0 / alpha) * f.nu.powf(1.0 / alpha - 1.0);
    let ratio_matrix: Vec<Vec<f64>> = flows
        .iter()
        .map(|fi| flows.iter().map(|fj| weight(fi) / weight(fj)).collect())
        .collect();
    let model = MultiZipfModel::new(flows.to_vec())?;
    let pooled = model.per_flow_miss(x, false);
    let u = optimal_split_zipf(flows)?;
    let separated: Vec<f64> =
        flows.iter().zip(&u).map(|(f, &uk)| solo_zipf_miss(f, uk * x)).collect();
    let matches = pooled
        .iter()
        .zip(&separated)
        .all(|(&p, &s)| s > 0.0 && (p / s - 1.0).abs() < 1e-9);
    Ok(FlowImpact {
        ratio_matrix,
        pooled_per_flow: pooled.into_iter().map(|m| m.min(1.0)).collect(),
        separated_per_flow: separated.into_iter().map(|m| m.min(1.0)).collect(),
        pooling_matches_separation: matches,
    })
}

/// Parameters of the two-flow overlap model (classes A, B shared D, all
/// Zipf with common exponent `alpha` and unit sizes).
#[derive(Debug, Clone, Copy)]
pub struct OverlapParams {
    pub alpha: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_d: f64,
    pub p_a1: f64,
    pub p_d1: f64,
    pub p_b2: f64,
    pub p_d2: f64,
}

impl OverlapParams {
    pub fn new(
        alpha: f64,
        nu1: f64,
        c: (f64, f64, f64),
        p_d1: f64,
        p_d2: f64,
    ) -> Result<Self> {
        let params = OverlapParams {
            alpha,
            nu1,
            nu2: 1.0 - nu1,
            c_a: c.0,
            c_b: c.1,
            c_d: c.2,
            p_a1: 1.0 - p_d1,
            p_d1,
            p_b2: 1.0 - p_d2,
            p_d2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 1.0 {
            return Err(Error::Domain(format!("alpha must exceed 1 (got {})", self.alpha)));
        }
        for (name, v) in [
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("c_a", self.c_a),
            ("c_b", self.c_b),
            ("c_d", self.c_d),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be positive (got {v})")));
            }
        }
        if (self.p_a1 + self.p_d1 - 1.0).abs() > 1e-12 || (self.p_b2 + self.p_d2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec("class weights of each flow must sum to 1".into()));
        }
        if self.p_d1 < 0.0 || self.p_d2 < 0.0 || self.p_a1 < 0.0 || self.p_b2 < 0.0 {
            return Err(Error::InvalidSpec("class weights must be non-negative".into()));
        }
        Ok(())
    }

    /// Mixed weight of the shared class, `p_D* = p_D1 nu1 + p_D2 nu2`.
    pub fn p_d_star(&self) -> f64 {
        self.p_d1 * self.nu1 + self.p_d2 * self.nu2
    }
}

/// Result of a good-region membership test.
#[derive(Debug, Clone, Copy)]
pub struct RegionCheck {
    pub member: bool,
    /// Normalized slack of the binding constraint, `(lhs - rhs) / lhs`;
    /// positive inside the region.
    pub margin: f64,
    pub margins: (f64, f64),
}

/// Good-region membership: with parameters inside the region, pooling
/// beats the static split `u` for *both* flows asymptotically.
///
/// The flow-1 constraint compares the separated two-class mixture
/// against the pooled three-class mixture; the flow-2 constraint is the
/// same inequality with the roles of the flows exchanged (u1 -> u2,
/// cA <-> cB, pA1 <-> pB2, pD1 -> pD2 and nu1 <-> nu2; the pooled
/// denominator and p_D* are invariant under the exchange).
pub fn good_region(params: &OverlapParams, u: (f64, f64)) -> Result<RegionCheck> {
    params.validate()?;
    let pds = params.p_d_star();
    if !(pds > 0.0) {
        return Err(Error::Domain("good region is defined for p_D* > 0".into()));
    }
    if !(u.0 > 0.0 && u.1 > 0.0) || (u.0 + u.1 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSpec("u must be positive and sum to 1".into()));
    }
    let a = params.alpha;
    let inv = 1.0 / a;
    let pooled_mix = (params.c_a * params.p_a1 * params.nu1).powf(inv)
        + (params.c_b * params.p_b2 * params.nu2).powf(inv)
        + (params.c_d * pds).powf(inv);
    let constraint = |c_own: f64, p_own: f64, p_d: f64, nu: f64, u_own: f64| {
        let lhs = ((c_own * p_own).powf(inv) + (params.c_d * p_d).powf(inv)).powf(a)
            / pooled_mix.powf(a - 1.0);
        let rhs = u_own.powf(a - 1.0)
            * ((c_own * p_own).powf(inv) / nu.powf(1.0 - inv)
                + params.c_d.powf(inv) * p_d / pds.powf(1.0 - inv));
        (lhs - rhs) / lhs
    };
    let m1 = constraint(params.c_a, params.p_a1, params.p_d1, params.nu1, u.0);
    let m2 = constraint(params.c_b, params.p_b2, params.p_d2, params.nu2, u.1);
    Ok(RegionCheck { member: m1 > 0.0 && m2 > 0.0, margin: m1.min(m2), margins: (m1, m2) })
}

/// Closed-form overall-optimal flow-level split for the overlap model:
/// each flow alone is a two-class Zipf mixture with tail weight
/// `G_k^alpha`, so the KKT split is `u_k ~ nu_k^(1/alpha) G_k`.
pub fn overlap_u_star(params: &OverlapParams) -> (f64, f64) {
    let inv = 1.0 / params.alpha;
    let g1 = (params.c_a * params.p_a1).powf(inv) + (params.c_d * params.p_d1).powf(inv);
    let g2 = (params.c_b * params.p_b2).powf(inv) + (params.c_d * params.p_d2).powf(inv);
    let w1 = params.nu1.powf(inv) * g1;
    let w2 = params.nu2.powf(inv) * g2;
    (w1 / (w1 + w2), w2 / (w1 + w2))
}

/// Separated asymptotic miss of one overlap flow alone in a cache of
/// size `y` (two-class Zipf mixture closed form); raw value.
pub fn overlap_solo_miss(params: &OverlapParams, flow: usize, y: f64) -> f64 {
    let inv = 1.0 / params.alpha;
    let (c_own, p_own, p_d) = match flow {
        0 => (params.c_a, params.p_a1, params.p_d1),
        _ => (params.c_b, params.p_b2, params.p_d2),
    };
    if y <= 0.0 {
        return f64::INFINITY;
    }
    let g = (c_own * p_own).powf(inv) + (params.c_d * p_d).powf(inv);
    let k = gamma(1.0 - inv).powf(params.alpha) / params.alpha;
    k * g.powf(params.alpha) / y.powf(params.alpha - 1.0)
}

/// Pooled asymptotic miss of one overlap flow at cache size `x`; raw
/// value.
pub fn overlap_pooled_miss(params: &OverlapParams, flow: usize, x: f64) -> f64 {
    let a = params.alpha;
    let inv = 1.0 / a;
    let pds = params.p_d_star();
    let pooled_mix = (params.c_a * params.p_a1 * params.nu1).powf(inv)
        + (params.c_b * params.p_b2 * params.nu2).powf(inv)
        + (params.c_d * pds).powf(inv);
    let (c_own, p_own, p_d, nu) = match flow {
        0 => (params.c_a, params.p_a1, params.p_d1, params.nu1),
        _ => (params.c_b, params.p_b2, params.p_d2, params.nu2),
    };
    if x <= 0.0 {
        return f64::INFINITY;
    }
    let h = (c_own * p_own).powf(inv) / nu.powf(1.0 - inv)
        + params.c_d.powf(inv) * p_d / pds.powf(1.0 - inv);
    let k = gamma(2.0 - inv) / (a - 1.0) * gamma(1.0 - inv).powf(a - 1.0);
    k * pooled_mix.powf(a - 1.0) * h / x.powf(a - 1.0)
}

/// Result of the numeric split optimizer.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub u: Vec<f64>,
    pub objective: f64,
    /// Set when a non-monotone predictor forced a grid-only search.
    pub grid_fallback: bool,
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - PHI * (hi - lo);
    let mut b = lo + PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + PHI * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Minimizes the overall predicted miss `sum_k nu_k miss_k(u_k x)` over
/// the simplex. Two flows use grid bracketing plus golden-section
/// refinement to width 1e-4; more flows run projected pairwise descent
/// from the warm start (KKT closed form when available). A predictor
/// whose response is not non-increasing in the allocated space degrades
/// the search to the plain grid and flags the result.
pub fn optimize_split_numeric(
    predictor: &(dyn Fn(usize, f64) -> f64 + Sync),
    nus: &[f64],
    x: f64,
    grid: usize,
    warm_start: Option<&[f64]>,
) -> Result<SplitResult> {
    let m = nus.len();
    if m == 0 {
        return Err(Error::InvalidSpec("no flows".into()));
    }
    if !(x > 0.0) {
        return Err(Error::OutOfRange("cache size must be positive".into()));
    }
    let grid = grid.max(4);
    // Raw predictor values: asymptotic forms may exceed 1 near zero
    // allocations, and that curvature is exactly what the search needs.
    let miss = |k: usize, y: f64| -> f64 {
        if y <= 0.0 {
            return f64::INFINITY;
        }
        let v = predictor(k, y);
        if v.is_finite() {
            v.max(0.0)
        } else {
            f64::INFINITY
        }
    };
    if m == 1 {
        return Ok(SplitResult { u: vec![1.0], objective: miss(0, x), grid_fallback: false });
    }

    // Monotonicity probe: miss must not increase with more space.
    let mut monotone = true;
    'probe: for k in 0..m {
        let mut last = f64::INFINITY;
        for i in 1..=8 {
            let v = miss(k, x * i as f64 / 8.0);
            if v > last + 1e-12 {
                monotone = false;
                break 'probe;
            }
            last = v;
        }
    }

    if m == 2 {
        let objective = |u1: f64| nus[0] * miss(0, u1 * x) + nus[1] * miss(1, (1.0 - u1) * x);
        let mut best = (1.0 / grid as f64, f64::INFINITY);
        for i in 1..grid {
            let u1 = i as f64 / grid as f64;
            let v = objective(u1);
            if v < best.1 {
                best = (u1, v);
            }
        }
        if !monotone {
            return Ok(SplitResult {
                u: vec![best.0, 1.0 - best.0],
                objective: best.1,
                grid_fallback: true,
            });
        }
        let step = 1.0 / grid as f64;
        let (u1, obj) =
            golden_min(objective, (best.0 - step).max(1e-9), (best.0 + step).min(1.0 - 1e-9), 1e-4);
        return Ok(SplitResult { u: vec![u1, 1.0 - u1], objective: obj, grid_fallback: false });
    }

    // M > 2: projected pairwise descent from the warm start.
    let mut u: Vec<f64> = match warm_start {
        Some(w) if w.len() == m => w.to_vec(),
        _ => vec![1.0 / m as f64; m],
    };
    let total: f64 = u.iter().sum();
    u.iter_mut().for_each(|v| *v /= total);
    let objective = |u: &[f64]| -> f64 {
        u.iter().enumerate().map(|(k, &uk)| nus[k] * miss(k, uk * x)).sum()
    };
    let mut obj = objective(&u);
    if !monotone {
        return Ok(SplitResult { u, objective: obj, grid_fallback: true });
    }
    for _sweep in 0..200 {
        let before = obj;
        for i in 0..m {
            for j in (i + 1)..m {
                let pool = u[i] + u[j];
                if pool <= 0.0 {
                    continue;
                }
                let others: f64 = obj
                    - nus[i] * miss(i, u[i] * x)
                    - nus[j] * miss(j, u[j] * x);
                let pair = |ui: f64| {
                    others + nus[i] * miss(i, ui * x) + nus[j] * miss(j, (pool - ui) * x)
                };
                let (ui, v) = golden_min(pair, 0.0, pool, 1e-6 * pool.max(1e-9));
                if v < obj {
                    u[i] = ui;
                    u[j] = pool - ui;
                    obj = v;
                }
            }
        }
        if before - obj < 1e-9 {
            break;
        }
    }
    let total: f64 = u.iter().sum();
    u.iter_mut().for_each(|v| *v /= total);
    Ok(SplitResult { u, objective: obj, grid_fallback: false })
}
