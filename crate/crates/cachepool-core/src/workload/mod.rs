//! Flow specifications, catalog construction and request sampling.
//!
//! A scenario is a set of [`FlowSpec`]s mixed by probabilities `nu_k`.
//! [`build_catalog`] materializes the finite union universe (identities,
//! sizes, conditional and mixed probabilities); [`RequestSampler`] then
//! draws i.i.d. requests from it, optionally under a piecewise-constant
//! [`RateSchedule`].

mod catalog;
mod sampler;

pub use catalog::{Catalog, FlowCatalog, ItemClass, ItemId};
pub use sampler::RequestSampler;

use crate::error::{Error, Result};
use crate::rng;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use std::collections::BTreeMap;

/// How a family's normalization constant is obtained.
///
/// The catalog always carries exactly normalized masses; an `Explicit`
/// value is cross-checked against the computed constant (used to pin
/// published four-digit constants) rather than trusted for the masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Auto,
    Explicit(f64),
}

/// Popularity families supported for finite catalogs. All are heavy
/// tailed in the sense `q_n / q_{n+1} -> 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum PopularityFamily {
    /// `q_i = c / i^alpha`, optionally with explicit head masses for the
    /// first items (the family part then starts after the head).
    Zipf { alpha: f64, c: Normalization, head: Vec<f64> },
    /// `q_i = c log(i) / i^alpha`; the zero-mass first index is skipped
    /// when no head is given.
    LogZipf { alpha: f64, c: Normalization, head: Vec<f64> },
    /// `q_i = c exp(-i^xi)` with shape `0 < xi < 1/3`.
    Weibull { xi: f64, c: Normalization },
}

impl PopularityFamily {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            PopularityFamily::Zipf { alpha, .. } | PopularityFamily::LogZipf { alpha, .. } => {
                Some(*alpha)
            }
            PopularityFamily::Weibull { .. } => None,
        }
    }
}

/// Item size assignment for one flow (or one overlap class).
#[derive(Debug, Clone, PartialEq)]
pub enum SizeRule {
    Constant(u64),
    /// Sizes drawn independently per item at build time; one draw per
    /// item, fixed by the seed. `probs` are relative weights and are
    /// normalized internally (published parameter sets do not always sum
    /// to one exactly).
    Multinomial { support: Vec<u64>, probs: Vec<f64> },
}

/// Overlap class labels for the two-flow shared-data model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OverlapClass {
    A,
    B,
    D,
}

/// One request flow.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub id: usize,
    /// Mixing probability `nu_k`; must sum to one across a scenario.
    pub nu: f64,
    pub popularity: PopularityFamily,
    pub catalog_size: usize,
    pub size_rule: SizeRule,
    /// Present only in the two-flow overlap model: probability of
    /// requesting the flow's own class vs. the shared class.
    pub class_weights: Option<BTreeMap<OverlapClass, f64>>,
}

/// Shared class of the two-flow overlap model. The own classes (A and B)
/// come from the two flows' own popularity families.
#[derive(Debug, Clone)]
pub struct OverlapSpec {
    pub shared: PopularityFamily,
    pub shared_items: usize,
}

/// Piecewise-constant mixing probabilities, cycled over the request
/// stream: `(segment length in requests, nu vector)`.
#[derive(Debug, Clone)]
pub struct RateSchedule {
    pub segments: Vec<(u64, Vec<f64>)>,
}

impl RateSchedule {
    pub fn validate(&self, n_flows: usize) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidSpec("schedule has no segments".into()));
        }
        for (dur, nus) in &self.segments {
            if *dur == 0 {
                return Err(Error::InvalidSpec("schedule segment of zero length".into()));
            }
            check_nu_vector(nus, n_flows)?;
        }
        Ok(())
    }
}

fn check_nu_vector(nus: &[f64], n_flows: usize) -> Result<()> {
    if nus.len() != n_flows {
        return Err(Error::InvalidSpec(format!(
            "nu vector has {} entries for {} flows",
            nus.len(),
            n_flows
        )));
    }
    if nus.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidSpec("nu entries must be non-negative".into()));
    }
    let total: f64 = nus.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!("nu vector sums to {total}, expected 1")));
    }
    Ok(())
}

/// Masses of one family over its index range, plus the computed
/// normalization constant.
struct FamilyMasses {
    /// `(family index, un-weighted probability mass)`, already normalized.
    entries: Vec<(u32, f64)>,
    c: f64,
}

fn family_masses(family: &PopularityFamily, n: usize) -> Result<FamilyMasses> {
    if n == 0 {
        return Err(Error::InvalidSpec("catalog_size must be positive".into()));
    }
    let (head, tail_mass_fn, alpha_like, c_spec): (&[f64], Box<dyn Fn(u32) -> f64>, f64, Normalization) =
        match family {
            PopularityFamily::Zipf { alpha, c, head } => {
                if *alpha <= 1.0 {
                    return Err(Error::Domain(format!(
                        "Zipf exponent must exceed 1 (got {alpha}); the infinite-catalog model is undefined at or below 1"
                    )));
                }
                let a = *alpha;
                (head, Box::new(move |i: u32| (i as f64).powf(-a)), a, *c)
            }
            PopularityFamily::LogZipf { alpha, c, head } => {
                if *alpha <= 1.0 {
                    return Err(Error::Domain(format!(
                        "log-Zipf exponent must exceed 1 (got {alpha})"
                    )));
                }
                let a = *alpha;
                (head, Box::new(move |i: u32| (i as f64).ln() * (i as f64).powf(-a)), a, *c)
            }
            PopularityFamily::Weibull { xi, c } => {
                if !(*xi > 0.0 && *xi < 1.0 / 3.0) {
                    return Err(Error::Domain(format!(
                        "Weibull shape must lie in (0, 1/3) (got {xi})"
                    )));
                }
                let xi = *xi;
                (&[], Box::new(move |i: u32| (-((i as f64).powf(xi))).exp()), f64::NAN, *c)
            }
        };

    let head_sum: f64 = head.iter().sum();
    if !head.is_empty()
        && (head.iter().any(|&h| h <= 0.0) || head_sum >= 1.0 || head.len() >= n)
    {
        return Err(Error::InvalidSpec(
            "head masses must be positive and sum to less than 1, and leave room for the family part"
                .into(),
        ));
    }

    // The family part starts after the head; log-Zipf without a head skips
    // its zero-mass first index.
    let mut first = head.len() as u32 + 1;
    if matches!(family, PopularityFamily::LogZipf { .. }) && head.is_empty() {
        first = 2;
    }
    let mut raw: Vec<f64> = (first..=n as u32).map(&tail_mass_fn).collect();
    if raw.is_empty() {
        return Err(Error::InvalidSpec("family part of the catalog is empty".into()));
    }
    for w in raw.windows(2) {
        if w[0] < w[1] {
            return Err(Error::InvalidSpec(format!(
                "family masses must be non-increasing after the head (alpha {alpha_like} too close to 1 for this family)"
            )));
        }
    }
    // Sum ascending for accuracy.
    let tail_total: f64 = raw.iter().rev().sum();
    let c = (1.0 - head_sum) / tail_total;
    if let Normalization::Explicit(c_given) = c_spec {
        if !(c_given > 0.0) || (c_given - c).abs() > 1e-3 * c {
            return Err(Error::InvalidSpec(format!(
                "explicit normalization constant {c_given} disagrees with the computed {c:.6}"
            )));
        }
    }
    for v in raw.iter_mut() {
        *v *= c;
    }
    let mut entries: Vec<(u32, f64)> = head
        .iter()
        .enumerate()
        .map(|(i, &h)| (i as u32 + 1, h))
        .collect();
    entries.extend((first..).zip(raw));
    Ok(FamilyMasses { entries, c })
}

/// Normalization constant the family receives on an `n`-item catalog
/// (what `Normalization::Auto` computes at build time).
pub fn normalization_constant(family: &PopularityFamily, n: usize) -> Result<f64> {
    family_masses(family, n).map(|f| f.c)
}

fn draw_sizes(rule: &SizeRule, count: usize, seed: u64, stream: u64) -> Result<Vec<u64>> {
    match rule {
        SizeRule::Constant(s) => {
            if *s == 0 {
                return Err(Error::InvalidSpec("constant item size must be >= 1".into()));
            }
            Ok(vec![*s; count])
        }
        SizeRule::Multinomial { support, probs } => {
            if support.is_empty() || support.len() != probs.len() {
                return Err(Error::InvalidSpec("size support and probabilities must match".into()));
            }
            if support.iter().any(|&s| s == 0) {
                return Err(Error::InvalidSpec("item sizes must be >= 1".into()));
            }
            if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) || probs.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidSpec(
                    "size weights must be non-negative with positive total".into(),
                ));
            }
            let dist = WeightedIndex::new(probs)
                .map_err(|e| Error::InvalidSpec(format!("size distribution: {e}")))?;
            let mut rng = rng::stream_rng(seed, stream);
            Ok((0..count).map(|_| support[dist.sample(&mut rng)]).collect())
        }
    }
}

/// Builds the union catalog for a scenario.
///
/// Without `overlap` the flows' item sets are disjoint. With `overlap`
/// exactly two flows are supported: each keeps its own class (A resp. B)
/// from its popularity family and additionally requests the shared class
/// D described by the overlap spec, mixed by the flows' `class_weights`.
/// Item sizes are drawn once, so the result is deterministic in `seed`.
pub fn build_catalog(specs: &[FlowSpec], overlap: Option<&OverlapSpec>, seed: u64) -> Result<Catalog> {
    if specs.is_empty() {
        return Err(Error::InvalidSpec("no flows given".into()));
    }
    let nus: Vec<f64> = specs.iter().map(|s| s.nu).collect();
    let nu_total: f64 = nus.iter().sum();
    if (nu_total - 1.0).abs() > 1e-12 || nus.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidSpec(format!(
            "flow mixing probabilities must be positive and sum to 1 (got {nu_total})"
        )));
    }

    match overlap {
        None => {
            if specs.iter().any(|s| s.class_weights.is_some()) {
                return Err(Error::UnsupportedConfig(
                    "class_weights given without an overlap spec".into(),
                ));
            }
            let mut sizes = Vec::new();
            let mut ranges = Vec::new();
            let mut raw_flows = Vec::new();
            let mut offset = 0u32;
            for (k, spec) in specs.iter().enumerate() {
                let fam = family_masses(&spec.popularity, spec.catalog_size)?;
                let count = fam.entries.len();
                sizes.extend(draw_sizes(
                    &spec.size_rule,
                    count,
                    seed,
                    rng::STREAM_SIZES.wrapping_add(k as u64),
                )?);
                ranges.push((ItemClass::Flow(k as u16), fam.entries[0].0, count as u32));
                let entries = fam
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(j, &(_, m))| (offset + j as u32, m))
                    .collect();
                raw_flows.push(catalog::RawFlow { nu: spec.nu, c_value: fam.c, entries });
                offset += count as u32;
            }
            Catalog::assemble(sizes, Catalog::ranges_store(ranges), raw_flows)
        }
        Some(ov) => {
            if specs.len() != 2 {
                return Err(Error::UnsupportedConfig(format!(
                    "overlapped data is supported for exactly two flows (got {})",
                    specs.len()
                )));
            }
            for spec in specs {
                if spec.size_rule != SizeRule::Constant(1) {
                    return Err(Error::UnsupportedConfig(
                        "overlapped flows support unit item sizes only".into(),
                    ));
                }
            }
            let own_key = [OverlapClass::A, OverlapClass::B];
            let mut weights = Vec::new();
            for (k, spec) in specs.iter().enumerate() {
                let cw = spec.class_weights.as_ref().ok_or_else(|| {
                    Error::InvalidSpec(format!("flow {k} needs class_weights under overlap"))
                })?;
                let own = *cw.get(&own_key[k]).ok_or_else(|| {
                    Error::InvalidSpec(format!("flow {k} class_weights missing its own class"))
                })?;
                let shared = *cw.get(&OverlapClass::D).ok_or_else(|| {
                    Error::InvalidSpec(format!("flow {k} class_weights missing class D"))
                })?;
                if cw.len() != 2 {
                    return Err(Error::InvalidSpec(format!(
                        "flow {k} class_weights must name exactly its own class and D"
                    )));
                }
                if ((own + shared) - 1.0).abs() > 1e-12 || own < 0.0 || shared < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "flow {k} class weights must be non-negative and sum to 1"
                    )));
                }
                weights.push((own, shared));
            }

            let fam_a = family_masses(&specs[0].popularity, specs[0].catalog_size)?;
            let fam_b = family_masses(&specs[1].popularity, specs[1].catalog_size)?;
            let fam_d = family_masses(&ov.shared, ov.shared_items)?;
            let (na, nb, nd) = (fam_a.entries.len(), fam_b.entries.len(), fam_d.entries.len());
            let sizes = vec![1u64; na + nb + nd];
            let ranges = vec![
                (ItemClass::Flow(0), fam_a.entries[0].0, na as u32),
                (ItemClass::Flow(1), fam_b.entries[0].0, nb as u32),
                (ItemClass::Shared, fam_d.entries[0].0, nd as u32),
            ];
            let own_entries = |fam: &FamilyMasses, base: u32, w: f64| {
                fam.entries
                    .iter()
                    .enumerate()
                    .map(|(j, &(_, m))| (base + j as u32, w * m))
                    .collect::<Vec<_>>()
            };
            let mut flow0 = own_entries(&fam_a, 0, weights[0].0);
            flow0.extend(own_entries(&fam_d, (na + nb) as u32, weights[0].1));
            let mut flow1 = own_entries(&fam_b, na as u32, weights[1].0);
            flow1.extend(own_entries(&fam_d, (na + nb) as u32, weights[1].1));
            let raw_flows = vec![
                catalog::RawFlow { nu: specs[0].nu, c_value: fam_a.c, entries: flow0 },
                catalog::RawFlow { nu: specs[1].nu, c_value: fam_b.c, entries: flow1 },
            ];
            Catalog::assemble(sizes, Catalog::ranges_store(ranges), raw_flows)
        }
    }
}

/// Draws one request: the flow according to `nu_now`, then an item from
/// that flow's conditional distribution. Shared items resolve to their
/// single union identity.
pub fn sample_request<R: Rng>(
    catalog: &Catalog,
    nu_now: &[f64],
    rng: &mut R,
) -> Result<(usize, ItemId)> {
    check_nu_vector(nu_now, catalog.n_flows())?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut flow = catalog.n_flows() - 1;
    for (k, &nu) in nu_now.iter().enumerate() {
        acc += nu;
        if u < acc {
            flow = k;
            break;
        }
    }
    let v: f64 = rng.gen();
    let idx = catalog.sample_flow_item(flow, v);
    Ok((flow, catalog.item_id(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zipf_flow(id: usize, nu: f64, alpha: f64, n: usize) -> FlowSpec {
        FlowSpec {
            id,
            nu,
            popularity: PopularityFamily::Zipf { alpha, c: Normalization::Auto, head: vec![] },
            catalog_size: n,
            size_rule: SizeRule::Constant(1),
            class_weights: None,
        }
    }

    #[test]
    fn experiment_constants_reproduce() {
        // 10^6-item truncated families from the published experiments.
        let n = 1_000_000;
        let f = family_masses(
            &PopularityFamily::Zipf { alpha: 2.5, c: Normalization::Auto, head: vec![] },
            n,
        )
        .unwrap();
        assert!((f.c - 0.7454).abs() < 5e-5, "c = {}", f.c);
        let f = family_masses(
            &PopularityFamily::Zipf { alpha: 1.5, c: Normalization::Auto, head: vec![] },
            n,
        )
        .unwrap();
        assert!((f.c - 0.3831).abs() < 5e-5, "c = {}", f.c);
        let f = family_masses(
            &PopularityFamily::Zipf { alpha: 1.7, c: Normalization::Auto, head: vec![] },
            n,
        )
        .unwrap();
        assert!((f.c - 0.4868).abs() < 5e-5, "c = {}", f.c);
        // Head-mass log-Zipf flows: c_k = (1 - head) / sum_(i>=2) log(i) i^-alpha.
        let f = family_masses(
            &PopularityFamily::LogZipf { alpha: 2.2, c: Normalization::Auto, head: vec![0.1] },
            n,
        )
        .unwrap();
        assert!((f.c - 1.4193).abs() < 5e-5, "c1 = {}", f.c);
        let f = family_masses(
            &PopularityFamily::LogZipf { alpha: 2.4, c: Normalization::Auto, head: vec![0.15] },
            n,
        )
        .unwrap();
        assert!((f.c - 1.8804).abs() < 5e-5, "c2 = {}", f.c);
        let f = family_masses(
            &PopularityFamily::LogZipf { alpha: 2.6, c: Normalization::Auto, head: vec![0.2] },
            n,
        )
        .unwrap();
        assert!((f.c - 2.3910).abs() < 5e-5, "c3 = {}", f.c);
    }

    #[test]
    fn explicit_constant_is_cross_checked() {
        let ok = family_masses(
            &PopularityFamily::Zipf { alpha: 2.5, c: Normalization::Explicit(0.7454), head: vec![] },
            1_000_000,
        );
        assert!(ok.is_ok());
        let bad = family_masses(
            &PopularityFamily::Zipf { alpha: 2.5, c: Normalization::Explicit(0.9), head: vec![] },
            1_000_000,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn alpha_at_or_below_one_is_rejected() {
        let err = build_catalog(&[zipf_flow(0, 1.0, 1.0, 100)], None, 1).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn single_flow_mixed_equals_conditional() {
        let cat = build_catalog(&[zipf_flow(0, 1.0, 2.0, 50)], None, 1).unwrap();
        for (p, q) in cat.mixed_p().iter().zip(cat.flow(0).q()) {
            assert_eq!(p, q);
        }
    }

    #[test]
    fn overlap_requires_two_flows() {
        let ov = OverlapSpec {
            shared: PopularityFamily::Zipf { alpha: 1.7, c: Normalization::Auto, head: vec![] },
            shared_items: 100,
        };
        let err = build_catalog(&[zipf_flow(0, 1.0, 1.7, 100)], Some(&ov), 1).unwrap_err();
        assert!(matches!(err, Error::UnsupportedConfig(_)));
    }

    fn overlap_specs(nu1: f64, p_d: f64, alpha: f64, n: usize) -> (Vec<FlowSpec>, OverlapSpec) {
        let mut f0 = zipf_flow(0, nu1, alpha, n);
        f0.class_weights =
            Some([(OverlapClass::A, 1.0 - p_d), (OverlapClass::D, p_d)].into_iter().collect());
        let mut f1 = zipf_flow(1, 1.0 - nu1, alpha, n);
        f1.class_weights =
            Some([(OverlapClass::B, 1.0 - p_d), (OverlapClass::D, p_d)].into_iter().collect());
        let ov = OverlapSpec {
            shared: PopularityFamily::Zipf { alpha, c: Normalization::Auto, head: vec![] },
            shared_items: n,
        };
        (vec![f0, f1], ov)
    }

    #[test]
    fn overlap_catalog_mixes_shared_class() {
        let (specs, ov) = overlap_specs(0.5, 0.2, 1.7, 200);
        let cat = build_catalog(&specs, Some(&ov), 7).unwrap();
        assert_eq!(cat.n_items(), 600);
        // Shared mass: each flow puts 0.2 on class D, so the D share of the
        // mixed distribution is p_D* = 0.2.
        let d_mass: f64 = (0..cat.n_items() as u32)
            .filter(|&i| cat.item_id(i).class == ItemClass::Shared)
            .map(|i| cat.mixed_p()[i as usize])
            .sum();
        assert!((d_mass - 0.2).abs() < 1e-12, "d_mass = {d_mass}");
        // Flow conditional q is not necessarily non-increasing in the
        // canonical (p-descending) order; the q ordering is kept too.
        let by_q: Vec<f64> =
            cat.flow(0).order_by_q().map(|pos| cat.flow(0).q()[pos as usize]).collect();
        for w in by_q.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn sampling_matches_distribution() {
        use rand::SeedableRng;
        let cat = build_catalog(
            &[zipf_flow(0, 0.3, 2.0, 20), zipf_flow(1, 0.7, 1.5, 20)],
            None,
            3,
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n = 200_000;
        let mut flow_counts = [0u64; 2];
        let mut top_item = 0u64;
        for _ in 0..n {
            let (k, id) = sample_request(&cat, &[0.3, 0.7], &mut rng).unwrap();
            flow_counts[k] += 1;
            if k == 1 && id.index == 1 {
                top_item += 1;
            }
        }
        let f1 = flow_counts[1] as f64 / n as f64;
        assert!((f1 - 0.7).abs() < 3.0 * (0.7f64 * 0.3 / n as f64).sqrt() + 1e-3);
        // top item of flow 1 has q_1 = c(1.5, 20); conditional on flow 1.
        let q1 = cat.flow(1).q()[0];
        let observed = top_item as f64 / flow_counts[1] as f64;
        assert!((observed - q1).abs() < 4.0 * (q1 * (1.0 - q1) / flow_counts[1] as f64).sqrt());
    }

    #[test]
    fn shared_class_request_fraction() {
        use rand::SeedableRng;
        // Both flows put weight 0.2 on the shared class, so one request
        // in five hits class D regardless of the mix.
        let (specs, ov) = overlap_specs(0.3, 0.2, 1.7, 500);
        let cat = build_catalog(&specs, Some(&ov), 2).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        let n = 100_000;
        let mut shared = 0u64;
        for _ in 0..n {
            let (_, id) = sample_request(&cat, &[0.3, 0.7], &mut rng).unwrap();
            if id.class == ItemClass::Shared {
                shared += 1;
            }
        }
        let frac = shared as f64 / n as f64;
        let sigma = (0.2f64 * 0.8 / n as f64).sqrt();
        assert!((frac - 0.2).abs() < 3.0 * sigma + 1e-3, "shared fraction {frac}");
    }

    #[test]
    fn deterministic_sizes_and_masses() {
        let spec = FlowSpec {
            id: 0,
            nu: 1.0,
            popularity: PopularityFamily::Zipf { alpha: 2.0, c: Normalization::Auto, head: vec![] },
            catalog_size: 500,
            size_rule: SizeRule::Multinomial {
                support: vec![1, 2, 4],
                probs: vec![0.5, 0.3, 0.2],
            },
            class_weights: None,
        };
        let a = build_catalog(&[spec.clone()], None, 42).unwrap();
        let b = build_catalog(&[spec], None, 42).unwrap();
        assert_eq!(a.sizes(), b.sizes());
        assert_eq!(a.mixed_p(), b.mixed_p());
    }

    #[test]
    fn weibull_shape_range_enforced() {
        let bad = FlowSpec {
            id: 0,
            nu: 1.0,
            popularity: PopularityFamily::Weibull { xi: 0.5, c: Normalization::Auto },
            catalog_size: 100,
            size_rule: SizeRule::Constant(1),
            class_weights: None,
        };
        assert!(matches!(build_catalog(&[bad], None, 1), Err(Error::Domain(_))));
    }
}
