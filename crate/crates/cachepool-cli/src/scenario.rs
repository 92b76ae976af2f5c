//! Scenario files: a JSON tree describing flows, capacities and the run
//! budget. See the bundled `scenarios/` directory for examples.

use cachepool_core::workload::{
    FlowSpec, Normalization, OverlapClass, OverlapSpec, PopularityFamily, RateSchedule, SizeRule,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConstOrAuto {
    Value(f64),
    Tag(String),
}

impl Default for ConstOrAuto {
    fn default() -> Self {
        ConstOrAuto::Tag("auto".into())
    }
}

impl ConstOrAuto {
    fn to_normalization(&self, at: &str) -> Result<Normalization, CliError> {
        match self {
            ConstOrAuto::Value(v) => Ok(Normalization::Explicit(*v)),
            ConstOrAuto::Tag(t) if t == "auto" => Ok(Normalization::Auto),
            ConstOrAuto::Tag(t) => {
                Err(CliError::config(format!("{at}: c must be a number or \"auto\", got {t:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SizesCfg {
    Constant(u64),
    Multinomial { support: Vec<u64>, probs: Vec<f64> },
}

impl Default for SizesCfg {
    fn default() -> Self {
        SizesCfg::Constant(1)
    }
}

impl From<&SizesCfg> for SizeRule {
    fn from(cfg: &SizesCfg) -> SizeRule {
        match cfg {
            SizesCfg::Constant(s) => SizeRule::Constant(*s),
            SizesCfg::Multinomial { support, probs } => {
                SizeRule::Multinomial { support: support.clone(), probs: probs.clone() }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowCfg {
    pub nu: f64,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub c: ConstOrAuto,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub head: Vec<f64>,
    #[serde(default)]
    pub sizes: SizesCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapCfg {
    #[serde(rename = "pA1")]
    pub p_a1: f64,
    #[serde(rename = "pD1")]
    pub p_d1: f64,
    #[serde(rename = "pB2")]
    pub p_b2: f64,
    #[serde(rename = "pD2")]
    pub p_d2: f64,
    /// Zipf exponents of classes A, B, D.
    pub alphas: [f64; 3],
    #[serde(default)]
    pub cs: Option<[ConstOrAuto; 3]>,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentCfg {
    pub requests: u64,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CapacitiesCfg {
    List(Vec<f64>),
    LogRange { min: f64, max: f64, points: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WarmupCfg {
    Tag(String),
    Fixed { fixed: u64 },
}

impl Default for WarmupCfg {
    fn default() -> Self {
        WarmupCfg::Tag("auto".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationCfg {
    pub mode: String, // "full" | "split"
    #[serde(default)]
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanCfg {
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub u: Option<Vec<f64>>,
    #[serde(default)]
    pub nu1_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    pub flows: Vec<FlowCfg>,
    #[serde(default)]
    pub overlap: Option<OverlapCfg>,
    #[serde(default)]
    pub schedule: Vec<SegmentCfg>,
    pub capacities: CapacitiesCfg,
    pub requests: u64,
    #[serde(default)]
    pub warmup: WarmupCfg,
    #[serde(default)]
    pub methods: Vec<String>,
    #[serde(default)]
    pub separation: Option<SeparationCfg>,
    #[serde(default)]
    pub plan: Option<PlanCfg>,
    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub runtime_budget_secs: Option<u64>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Base seed: fixes catalog construction (size draws) for the whole
    /// scenario; run seeds vary only the request streams.
    pub base_seed: u64,
    pub specs: Vec<FlowSpec>,
    pub overlap: Option<OverlapSpec>,
    pub overlap_cfg: Option<OverlapCfg>,
    pub schedule: Option<RateSchedule>,
    pub capacities: Vec<f64>,
    pub requests: u64,
    pub warmup: cachepool_core::cache_sim::Warmup,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub separation: Option<Separation>,
    pub plan: Option<PlanCfg>,
    pub x_min: Option<f64>,
    pub runtime_budget_secs: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Che,
    Asymptotic,
    Closed,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Che => "che",
            Method::Asymptotic => "asymptotic",
            Method::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Separation {
    Full,
    Split(Vec<f64>),
}

fn parse_family(cfg: &FlowCfg, at: &str) -> Result<PopularityFamily, CliError> {
    let family = cfg.family.as_deref().unwrap_or("zipf");
    let c = cfg.c.to_normalization(at)?;
    match family {
        "zipf" => {
            let alpha = cfg
                .alpha
                .ok_or_else(|| CliError::config(format!("{at}: zipf needs alpha")))?;
            Ok(PopularityFamily::Zipf { alpha, c, head: cfg.head.clone() })
        }
        "log_zipf" => {
            let alpha = cfg
                .alpha
                .ok_or_else(|| CliError::config(format!("{at}: log_zipf needs alpha")))?;
            Ok(PopularityFamily::LogZipf { alpha, c, head: cfg.head.clone() })
        }
        "weibull" => {
            let xi =
                cfg.xi.ok_or_else(|| CliError::config(format!("{at}: weibull needs xi")))?;
            if !cfg.head.is_empty() {
                return Err(CliError::config(format!("{at}: weibull takes no head masses")));
            }
            Ok(PopularityFamily::Weibull { xi, c })
        }
        other => Err(CliError::config(format!("{at}: unknown family {other:?}"))),
    }
}

pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn validate(
    file: ScenarioFile,
    seeds_override: Option<Vec<u64>>,
    methods_override: Option<Vec<String>>,
    no_warmup: bool,
) -> Result<Scenario, CliError> {
    if file.flows.is_empty() {
        return Err(CliError::config("scenario has no flows".into()));
    }

    let capacities = match &file.capacities {
        CapacitiesCfg::List(xs) => xs.clone(),
        CapacitiesCfg::LogRange { min, max, points } => {
            if *points < 2 || !(min > &0.0) || max <= min {
                return Err(CliError::config("capacities log range needs min>0, max>min, points>=2".into()));
            }
            (0..*points)
                .map(|i| {
                    (min.ln() + (max.ln() - min.ln()) * i as f64 / (*points as f64 - 1.0)).exp()
                })
                .collect()
        }
    };
    if capacities.is_empty() {
        return Err(CliError::config("capacity list is empty".into()));
    }
    if capacities.windows(2).any(|w| w[0] >= w[1]) || capacities[0] <= 0.0 {
        return Err(CliError::config("capacities must be positive and ascending".into()));
    }

    // Flows and the optional overlap model.
    let (specs, overlap) = match &file.overlap {
        None => {
            let specs = file
                .flows
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let at = format!("flows[{k}]");
                    let n = f
                        .n
                        .ok_or_else(|| CliError::config(format!("{at}: N is required")))?;
                    Ok(FlowSpec {
                        id: k,
                        nu: f.nu,
                        popularity: parse_family(f, &at)?,
                        catalog_size: n,
                        size_rule: SizeRule::from(&f.sizes),
                        class_weights: None,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (specs, None)
        }
        Some(ov) => {
            if file.flows.len() != 2 {
                return Err(CliError::config(format!(
                    "overlap scenarios need exactly two flows, got {}",
                    file.flows.len()
                )));
            }
            for (k, f) in file.flows.iter().enumerate() {
                if f.family.is_some() || f.alpha.is_some() || f.xi.is_some() {
                    return Err(CliError::config(format!(
                        "flows[{k}]: per-flow families are configured by overlap.alphas in overlap scenarios"
                    )));
                }
                if !matches!(f.sizes, SizesCfg::Constant(1)) {
                    return Err(CliError::config(format!(
                        "flows[{k}]: overlap scenarios use unit item sizes"
                    )));
                }
            }
            let cs = match &ov.cs {
                Some(cs) => [
                    cs[0].to_normalization("overlap.cs[0]")?,
                    cs[1].to_normalization("overlap.cs[1]")?,
                    cs[2].to_normalization("overlap.cs[2]")?,
                ],
                None => [Normalization::Auto, Normalization::Auto, Normalization::Auto],
            };
            let weights: [(OverlapClass, f64, f64); 2] = [
                (OverlapClass::A, ov.p_a1, ov.p_d1),
                (OverlapClass::B, ov.p_b2, ov.p_d2),
            ];
            let specs = file
                .flows
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let (own_class, own_w, d_w) = weights[k];
                    let mut cw = BTreeMap::new();
                    cw.insert(own_class, own_w);
                    cw.insert(OverlapClass::D, d_w);
                    FlowSpec {
                        id: k,
                        nu: f.nu,
                        popularity: PopularityFamily::Zipf {
                            alpha: ov.alphas[k],
                            c: cs[k],
                            head: vec![],
                        },
                        catalog_size: f.n.unwrap_or(ov.n),
                        size_rule: SizeRule::Constant(1),
                        class_weights: Some(cw),
                    }
                })
                .collect();
            let spec = OverlapSpec {
                shared: PopularityFamily::Zipf { alpha: ov.alphas[2], c: cs[2], head: vec![] },
                shared_items: ov.n,
            };
            (specs, Some(spec))
        }
    };

    let schedule = if file.schedule.is_empty() {
        None
    } else {
        Some(RateSchedule {
            segments: file.schedule.iter().map(|s| (s.requests, s.nu.clone())).collect(),
        })
    };

    let warmup = if no_warmup {
        cachepool_core::cache_sim::Warmup::None
    } else {
        match &file.warmup {
            WarmupCfg::Tag(t) if t == "auto" => cachepool_core::cache_sim::Warmup::Auto,
            WarmupCfg::Tag(t) if t == "none" => cachepool_core::cache_sim::Warmup::None,
            WarmupCfg::Tag(t) => {
                return Err(CliError::config(format!(
                    "warmup must be \"auto\", \"none\" or {{\"fixed\": n}}, got {t:?}"
                )))
            }
            WarmupCfg::Fixed { fixed } => cachepool_core::cache_sim::Warmup::Fixed(*fixed),
        }
    };

    let seeds = seeds_override
        .or(file.seeds.clone())
        .unwrap_or_else(|| vec![file.seed]);
    if seeds.is_empty() {
        return Err(CliError::config("need at least one seed".into()));
    }

    let method_names =
        methods_override.unwrap_or_else(|| {
            if file.methods.is_empty() {
                vec!["che".into()]
            } else {
                file.methods.clone()
            }
        });
    let methods = method_names
        .iter()
        .map(|m| match m.as_str() {
            "che" => Ok(Method::Che),
            "asymptotic" => Ok(Method::Asymptotic),
            "closed" => Ok(Method::Closed),
            other => Err(CliError::config(format!("unknown method {other:?}"))),
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let separation = match &file.separation {
        None => None,
        Some(s) => match s.mode.as_str() {
            "full" => Some(Separation::Full),
            "split" => {
                let u = s.u.clone().ok_or_else(|| {
                    CliError::config("separation mode \"split\" needs u".into())
                })?;
                if u.len() != file.flows.len() {
                    return Err(CliError::config("separation.u needs one entry per flow".into()));
                }
                let total: f64 = u.iter().sum();
                if (total - 1.0).abs() > 1e-9 || u.iter().any(|&v| v <= 0.0) {
                    return Err(CliError::config("separation.u must be positive and sum to 1".into()));
                }
                Some(Separation::Split(u))
            }
            other => {
                return Err(CliError::config(format!("unknown separation mode {other:?}")))
            }
        },
    };

    Ok(Scenario {
        base_seed: file.seed,
        specs,
        overlap,
        overlap_cfg: file.overlap,
        schedule,
        capacities,
        requests: file.requests,
        warmup,
        seeds,
        methods,
        separation,
        plan: file.plan,
        x_min: file.x_min,
        runtime_budget_secs: file.runtime_budget_secs,
    })
}
