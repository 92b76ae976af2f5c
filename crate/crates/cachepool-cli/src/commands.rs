//! The four subcommands: simulate, predict, plan, compare.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cachepool_core::analytic::closed::ZipfFlow;
use cachepool_core::analytic::{AnalyticModel, AsymptoticOptions};
use cachepool_core::cache_sim::{run, RunConfig};
use cachepool_core::planner;
use cachepool_core::workload::{build_catalog, normalization_constant, Catalog, PopularityFamily, SizeRule};
use rayon::prelude::*;

use crate::output::{sig, CsvFile};
use crate::scenario::{Method, Scenario, Separation};
use crate::CliError;

pub struct Budget {
    started: Instant,
    limit: Option<Duration>,
}

impl Budget {
    pub fn new(scenario: &Scenario) -> Budget {
        Budget {
            started: Instant::now(),
            limit: scenario.runtime_budget_secs.map(Duration::from_secs),
        }
    }

    fn exceeded(&self) -> bool {
        self.limit.is_some_and(|l| self.started.elapsed() > l)
    }
}

fn flow_label(flow: Option<usize>) -> String {
    match flow {
        Some(k) => k.to_string(),
        None => "*".into(),
    }
}

#[derive(Debug, Clone)]
pub struct SimRow {
    pub x: f64,
    pub flow: Option<usize>,
    pub requests: u64,
    pub misses: u64,
    pub miss_ratio: f64,
    pub stderr: f64,
}

impl SimRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            sig(self.x),
            flow_label(self.flow),
            self.requests,
            self.misses,
            sig(self.miss_ratio),
            sig(self.stderr)
        )
    }
}

/// Runs one catalog over all seeds and merges: counts are summed, the
/// reported ratio is the mean of per-seed ratios, and the standard error
/// is binomial for one seed or the across-seed sample error otherwise.
fn simulate_catalog(
    catalog: &Catalog,
    scenario: &Scenario,
    capacities: &[f64],
    label_x: &[f64],
    budget: &Budget,
) -> Result<(Vec<SimRow>, bool), CliError> {
    let per_seed: Vec<Vec<cachepool_core::cache_sim::MissStats>> = scenario
        .seeds
        .par_iter()
        .map(|&seed| {
            let cfg = RunConfig {
                n_requests: scenario.requests,
                warmup: scenario.warmup,
                seed,
                stream: 0,
            };
            run(catalog, scenario.schedule.as_ref(), capacities, &cfg).map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    let n_seeds = per_seed.len();
    let n_flows = catalog.n_flows();
    let mut rows = Vec::new();
    for (i, &x) in label_x.iter().enumerate() {
        let cell = |get: &dyn Fn(&cachepool_core::cache_sim::MissStats) -> cachepool_core::cache_sim::FlowCounts,
                    flow: Option<usize>| {
            let counts: Vec<cachepool_core::cache_sim::FlowCounts> =
                per_seed.iter().map(|s| get(&s[i])).collect();
            let requests: u64 = counts.iter().map(|c| c.requests).sum();
            let misses: u64 = counts.iter().map(|c| c.misses).sum();
            let ratios: Vec<f64> = counts.iter().map(|c| c.miss_ratio()).collect();
            let mean = ratios.iter().sum::<f64>() / n_seeds as f64;
            let stderr = if n_seeds == 1 {
                counts[0].stderr()
            } else {
                let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
                    / (n_seeds as f64 - 1.0);
                (var / n_seeds as f64).sqrt()
            };
            SimRow { x, flow, requests, misses, miss_ratio: mean, stderr }
        };
        for k in 0..n_flows {
            rows.push(cell(&|s| s.per_flow[k], Some(k)));
        }
        rows.push(cell(&|s| s.overall, None));
    }
    Ok((rows, budget.exceeded()))
}

/// Pooled simulation over the scenario's capacity sweep.
pub fn simulate_pooled(
    scenario: &Scenario,
    catalog: &Catalog,
    budget: &Budget,
) -> Result<(Vec<SimRow>, bool), CliError> {
    simulate_catalog(catalog, scenario, &scenario.capacities, &scenario.capacities, budget)
}

/// Separated simulation: each flow alone, either at the full capacities
/// (`mode = full`) or at its split share (`mode = split`). Rows keep the
/// scenario capacity in the `x` column.
pub fn simulate_separated(
    scenario: &Scenario,
    catalog: &Catalog,
    budget: &Budget,
) -> Result<(Vec<SimRow>, bool), CliError> {
    let Some(sep) = &scenario.separation else {
        return Ok((Vec::new(), false));
    };
    let n_flows = catalog.n_flows();
    let mut per_flow_rows: Vec<Vec<SimRow>> = Vec::new();
    let mut truncated = false;
    for k in 0..n_flows {
        if budget.exceeded() {
            truncated = true;
            break;
        }
        let share = match sep {
            Separation::Full => 1.0,
            Separation::Split(u) => u[k],
        };
        let caps: Vec<f64> = scenario.capacities.iter().map(|&x| share * x).collect();
        let solo = catalog.solo(k);
        let (rows, trunc) =
            simulate_catalog(&solo, scenario, &caps, &scenario.capacities, budget)?;
        truncated |= trunc;
        // Solo catalogs have a single flow; relabel it as flow k and drop
        // the duplicate overall row.
        per_flow_rows.push(
            rows.into_iter()
                .filter(|r| r.flow == Some(0))
                .map(|r| SimRow { flow: Some(k), ..r })
                .collect(),
        );
    }
    let mut rows = Vec::new();
    if per_flow_rows.len() == n_flows {
        let nus = catalog.nus();
        for i in 0..scenario.capacities.len() {
            let mut overall_ratio = 0.0;
            let mut overall_var = 0.0;
            let (mut req, mut mis) = (0u64, 0u64);
            for k in 0..n_flows {
                let r = &per_flow_rows[k][i];
                rows.push(r.clone());
                overall_ratio += nus[k] * r.miss_ratio;
                overall_var += (nus[k] * r.stderr).powi(2);
                req += r.requests;
                mis += r.misses;
            }
            rows.push(SimRow {
                x: scenario.capacities[i],
                flow: None,
                requests: req,
                misses: mis,
                miss_ratio: overall_ratio,
                stderr: overall_var.sqrt(),
            });
        }
    } else {
        rows = per_flow_rows.into_iter().flatten().collect();
    }
    rows.sort_by(|a, b| {
        a.x.partial_cmp(&b.x).unwrap().then(
            a.flow.map_or(usize::MAX, |k| k).cmp(&b.flow.map_or(usize::MAX, |k| k)),
        )
    });
    Ok((rows, truncated))
}

#[derive(Debug, Clone, Copy)]
pub enum PredValue {
    Val(f64),
    Skipped,
    Saturated,
}

impl PredValue {
    fn csv(&self) -> String {
        match self {
            PredValue::Val(v) => sig(*v),
            PredValue::Skipped => "skipped".into(),
            PredValue::Saturated => "saturated".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PredRow {
    pub x: f64,
    pub flow: Option<usize>,
    pub method: Method,
    pub value: PredValue,
}

fn zipf_flows_for_closed(scenario: &Scenario, catalog: &Catalog) -> Option<Vec<ZipfFlow>> {
    if scenario.overlap.is_some() {
        return None;
    }
    let mut flows = Vec::new();
    for (k, spec) in scenario.specs.iter().enumerate() {
        let PopularityFamily::Zipf { .. } = &spec.popularity else {
            return None;
        };
        let SizeRule::Constant(s) = spec.size_rule else {
            return None;
        };
        flows.push(ZipfFlow {
            alpha: spec.popularity.alpha().unwrap(),
            c: catalog.flow(k).c_value(),
            nu: spec.nu,
            size: s as f64,
        });
    }
    Some(flows)
}

/// Analytic tail mass of a flow's popularity beyond its materialized
/// catalog; the closed forms assume it is negligible.
fn analytic_tail_beyond(family: &PopularityFamily, c: f64, n: usize) -> f64 {
    let n = n as f64;
    match family {
        PopularityFamily::Zipf { alpha, .. } => c / ((alpha - 1.0) * n.powf(alpha - 1.0)),
        PopularityFamily::LogZipf { alpha, .. } => {
            let a = alpha - 1.0;
            c * (n.ln() / (a * n.powf(a)) + 1.0 / (a * a * n.powf(a)))
        }
        PopularityFamily::Weibull { xi, .. } => {
            c / xi * n.powf(1.0 - xi) * (-n.powf(*xi)).exp()
        }
    }
}

/// Closed-form per-flow predictions, or `None` per flow when the family
/// combination has no supported closed form; the second element is the
/// flow's analytic tail mass beyond the materialized catalog.
fn closed_predictions(
    scenario: &Scenario,
    catalog: &Catalog,
    x: f64,
) -> Vec<Option<(f64, f64)>> {
    use cachepool_core::analytic::closed;
    let n_flows = catalog.n_flows();
    let tail = |k: usize| {
        analytic_tail_beyond(
            &scenario.specs[k].popularity,
            catalog.flow(k).c_value(),
            scenario.specs[k].catalog_size,
        )
    };
    if let Some(cfg) = &scenario.overlap_cfg {
        let params = overlap_params(scenario, cfg);
        return match params {
            Ok(p) => {
                let class_tail = |c: f64, n: usize| c / ((p.alpha - 1.0) * (n as f64).powf(p.alpha - 1.0));
                let tails = [
                    p.p_a1 * class_tail(p.c_a, scenario.specs[0].catalog_size)
                        + p.p_d1 * class_tail(p.c_d, cfg.n),
                    p.p_b2 * class_tail(p.c_b, scenario.specs[1].catalog_size)
                        + p.p_d2 * class_tail(p.c_d, cfg.n),
                ];
                (0..2)
                    .map(|k| Some((planner::overlap_pooled_miss(&p, k, x).min(1.0), tails[k])))
                    .collect()
            }
            Err(_) => vec![None; n_flows],
        };
    }
    if let Some(flows) = zipf_flows_for_closed(scenario, catalog) {
        if let Ok(model) = closed::MultiZipfModel::new(flows) {
            return model
                .per_flow_miss(x, true)
                .into_iter()
                .enumerate()
                .map(|(k, m)| Some((m.min(1.0), tail(k))))
                .collect();
        }
    }
    if n_flows == 1 {
        let spec = &scenario.specs[0];
        if spec.size_rule == SizeRule::Constant(1) {
            let c = catalog.flow(0).c_value();
            let v = match &spec.popularity {
                PopularityFamily::Zipf { alpha, .. } => {
                    closed::closed_zipf(*alpha, c, closed::SlowlyVarying::Constant, x)
                        .ok()
                        .map(|z| z.miss)
                }
                PopularityFamily::LogZipf { alpha, .. } => {
                    closed::closed_zipf(*alpha, c, closed::SlowlyVarying::Log, x)
                        .ok()
                        .map(|z| z.miss)
                }
                PopularityFamily::Weibull { xi, .. } => {
                    closed::closed_weibull(*xi, c, x).ok().map(|w| w.miss)
                }
            };
            return vec![v.map(|m| (m.min(1.0), tail(0)))];
        }
    }
    vec![None; n_flows]
}

/// Analytic predictions for every `(x, flow, method)` combination.
pub fn predict_table(
    scenario: &Scenario,
    catalog: &Arc<Catalog>,
) -> Result<Vec<PredRow>, CliError> {
    let model = AnalyticModel::new(catalog.clone());
    let nus = catalog.nus();
    let mut rows = Vec::new();
    let mut worst_truncation = 0.0f64;
    for &x in &scenario.capacities {
        for method in &scenario.methods {
            match method {
                Method::Che => match model.predict_che(x) {
                    Ok(p) => {
                        for (k, &m) in p.per_flow.iter().enumerate() {
                            rows.push(PredRow { x, flow: Some(k), method: *method, value: PredValue::Val(m) });
                        }
                        rows.push(PredRow { x, flow: None, method: *method, value: PredValue::Val(p.overall) });
                    }
                    Err(cachepool_core::Error::Saturated { .. }) => {
                        for k in 0..catalog.n_flows() {
                            rows.push(PredRow { x, flow: Some(k), method: *method, value: PredValue::Saturated });
                        }
                        rows.push(PredRow { x, flow: None, method: *method, value: PredValue::Saturated });
                    }
                    Err(e) => return Err(e.into()),
                },
                Method::Asymptotic => {
                    let opts = AsymptoticOptions { allow_extrapolation: true, beta_override: None };
                    let mut per_flow = Vec::new();
                    let mut saturated = false;
                    for k in 0..catalog.n_flows() {
                        match model.predict_asymptotic(k, x, opts) {
                            Ok(p) => per_flow.push(PredValue::Val(p.miss.min(1.0))),
                            Err(cachepool_core::Error::Saturated { .. }) => {
                                per_flow.push(PredValue::Saturated);
                                saturated = true;
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    let overall = if saturated {
                        PredValue::Saturated
                    } else {
                        PredValue::Val(
                            per_flow
                                .iter()
                                .zip(&nus)
                                .map(|(v, &nu)| match v {
                                    PredValue::Val(m) => nu * m,
                                    _ => 0.0,
                                })
                                .sum(),
                        )
                    };
                    for (k, v) in per_flow.into_iter().enumerate() {
                        rows.push(PredRow { x, flow: Some(k), method: *method, value: v });
                    }
                    rows.push(PredRow { x, flow: None, method: *method, value: overall });
                }
                Method::Closed => {
                    let per_flow = closed_predictions(scenario, catalog, x);
                    for v in per_flow.iter().flatten() {
                        let (miss, tail) = *v;
                        if miss > 0.0 {
                            worst_truncation = worst_truncation.max(tail / miss);
                        }
                    }
                    let overall = if per_flow.iter().all(|v| v.is_some()) {
                        PredValue::Val(
                            per_flow
                                .iter()
                                .zip(&nus)
                                .map(|(v, &nu)| nu * v.unwrap().0)
                                .sum(),
                        )
                    } else {
                        PredValue::Skipped
                    };
                    for (k, v) in per_flow.into_iter().enumerate() {
                        rows.push(PredRow {
                            x,
                            flow: Some(k),
                            method: *method,
                            value: v.map_or(PredValue::Skipped, |(m, _)| PredValue::Val(m)),
                        });
                    }
                    rows.push(PredRow { x, flow: None, method: *method, value: overall });
                }
            }
        }
    }
    if worst_truncation > 1e-6 {
        eprintln!(
            "warning: closed-form predictions ignore {} of popularity mass beyond the \
             materialized catalogs (relative to the smallest predicted miss); grow N or \
             reduce x if this matters",
            sig(worst_truncation)
        );
    }
    Ok(rows)
}

pub fn cmd_simulate(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let budget = Budget::new(scenario);
    let catalog = build_catalog(&scenario.specs, scenario.overlap.as_ref(), scenario.base_seed)?;
    let (rows, truncated) = simulate_pooled(scenario, &catalog, &budget)?;
    let mut csv = CsvFile::create(out, "miss_sim.csv", "x,flow,requests,misses,miss_ratio,stderr")?;
    for row in &rows {
        csv.row(&row.csv())?;
    }
    let path = csv.finish()?;
    eprintln!("wrote {}", path.display());
    if truncated {
        return Err(CliError::runtime("runtime budget exceeded; output is partial".into()));
    }
    let (sep_rows, sep_truncated) = simulate_separated(scenario, &catalog, &budget)?;
    if !sep_rows.is_empty() {
        let mut csv = CsvFile::create(
            out,
            "miss_sim_separated.csv",
            "x,flow,requests,misses,miss_ratio,stderr",
        )?;
        for row in &sep_rows {
            csv.row(&row.csv())?;
        }
        let path = csv.finish()?;
        eprintln!("wrote {}", path.display());
    }
    if sep_truncated {
        return Err(CliError::runtime("runtime budget exceeded; output is partial".into()));
    }
    Ok(())
}

pub fn cmd_predict(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let catalog = Arc::new(build_catalog(&scenario.specs, scenario.overlap.as_ref(), scenario.base_seed)?);
    let rows = predict_table(scenario, &catalog)?;
    let mut csv = CsvFile::create(out, "predictions.csv", "x,flow,method,miss_pred")?;
    for r in &rows {
        csv.row(&format!("{},{},{},{}", sig(r.x), flow_label(r.flow), r.method.name(), r.value.csv()))?;
    }
    let path = csv.finish()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn overlap_params(
    scenario: &Scenario,
    cfg: &crate::scenario::OverlapCfg,
) -> Result<planner::OverlapParams, CliError> {
    let zipf = |alpha: f64| PopularityFamily::Zipf {
        alpha,
        c: cachepool_core::workload::Normalization::Auto,
        head: vec![],
    };
    let n_a = scenario.specs[0].catalog_size;
    let n_b = scenario.specs[1].catalog_size;
    let c_a = normalization_constant(&zipf(cfg.alphas[0]), n_a)?;
    let c_b = normalization_constant(&zipf(cfg.alphas[1]), n_b)?;
    let c_d = normalization_constant(&zipf(cfg.alphas[2]), cfg.n)?;
    if (cfg.alphas[0] - cfg.alphas[1]).abs() > 1e-12 || (cfg.alphas[0] - cfg.alphas[2]).abs() > 1e-12 {
        return Err(CliError::config(
            "the overlap planner requires a common alpha across classes".into(),
        ));
    }
    planner::OverlapParams::new(
        cfg.alphas[0],
        scenario.specs[0].nu,
        (c_a, c_b, c_d),
        cfg.p_d1,
        cfg.p_d2,
    )
    .map_err(CliError::from)
}

pub fn cmd_plan(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let x = scenario
        .plan
        .as_ref()
        .and_then(|p| p.x)
        .unwrap_or_else(|| *scenario.capacities.last().unwrap());
    let mut report = String::new();

    match &scenario.overlap_cfg {
        Some(cfg) => {
            let params = overlap_params(scenario, cfg)?;
            let u_star = planner::overlap_u_star(&params);
            let u = match scenario.plan.as_ref().and_then(|p| p.u.clone()) {
                Some(u) if u.len() == 2 => (u[0], u[1]),
                Some(_) => return Err(CliError::config("plan.u needs two entries".into())),
                None => u_star,
            };
            let check = planner::good_region(&params, u)?;
            let star_check = planner::good_region(&params, u_star)?;
            report.push_str(&format!(
                "overlap plan at x = {}\n\
                 parameters: alpha {} nu1 {} pD1 {} pD2 {} (cA {} cB {} cD {})\n\
                 split u = ({}, {})\n\
                 good region member: {} (margins {}, {})\n\
                 overall-optimal split u* = ({}, {}); u* in its good region: {}\n",
                sig(x),
                sig(params.alpha),
                sig(params.nu1),
                sig(params.p_d1),
                sig(params.p_d2),
                sig(params.c_a),
                sig(params.c_b),
                sig(params.c_d),
                sig(u.0),
                sig(u.1),
                check.member,
                sig(check.margins.0),
                sig(check.margins.1),
                sig(u_star.0),
                sig(u_star.1),
                star_check.member,
            ));
            for k in 0..2 {
                let pooled = planner::overlap_pooled_miss(&params, k, x).min(1.0);
                let sep = planner::overlap_solo_miss(
                    &params,
                    k,
                    (if k == 0 { u.0 } else { u.1 }) * x,
                )
                .min(1.0);
                report.push_str(&format!(
                    "flow {k}: pooled {} vs separated {} -> {}\n",
                    sig(pooled),
                    sig(sep),
                    if pooled < sep { "pool" } else { "separate" },
                ));
            }
            // nu1 sweep for the region boundary.
            let grid = scenario
                .plan
                .as_ref()
                .and_then(|p| p.nu1_grid.clone())
                .unwrap_or_else(|| (1..20).map(|i| i as f64 * 0.05).collect());
            let mut csv = CsvFile::create(out, "region_sweep.csv", "nu1,margin1,margin2,member")?;
            for nu1 in grid {
                let p = planner::OverlapParams::new(
                    params.alpha,
                    nu1,
                    (params.c_a, params.c_b, params.c_d),
                    params.p_d1,
                    params.p_d2,
                )?;
                let r = planner::good_region(&p, u)?;
                csv.row(&format!(
                    "{},{},{},{}",
                    sig(nu1),
                    sig(r.margins.0),
                    sig(r.margins.1),
                    r.member
                ))?;
            }
            let path = csv.finish()?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let catalog = Arc::new(build_catalog(
                &scenario.specs,
                scenario.overlap.as_ref(),
                scenario.base_seed,
            )?);
            let flows = zipf_flows_for_closed(scenario, &catalog).ok_or_else(|| {
                CliError::config(
                    "the planner needs Zipf flows with constant sizes (and no overlap section)"
                        .into(),
                )
            })?;
            let plan = planner::pooling_vs_separation(&flows, x)?;
            report.push_str(&format!(
                "plan at x = {}\n\
                 flows: {}\n\
                 optimal split u* = [{}]\n\
                 asymptotic pooled/separated ratio = {} -> verdict {}\n",
                sig(x),
                flows
                    .iter()
                    .map(|f| format!("(alpha {} c {} nu {} size {})", sig(f.alpha), sig(f.c), sig(f.nu), sig(f.size)))
                    .collect::<Vec<_>>()
                    .join(" "),
                plan.u.iter().map(|v| sig(*v)).collect::<Vec<_>>().join(", "),
                sig(plan.ratio),
                plan.verdict,
            ));
            for (k, (p, s)) in plan.pooled_per_flow.iter().zip(&plan.separated_per_flow).enumerate() {
                report.push_str(&format!(
                    "flow {k}: pooled {} vs separated {}\n",
                    sig(*p),
                    sig(*s)
                ));
            }
            if let Ok(impact) = planner::per_flow_impact(&flows, x) {
                report.push_str("pairwise pooled miss ratios (row / column):\n");
                for row in &impact.ratio_matrix {
                    report.push_str(&format!(
                        "  [{}]\n",
                        row.iter().map(|v| sig(*v)).collect::<Vec<_>>().join(", ")
                    ));
                }
            }
            // Finite-x comparison with the Che predictor: pooled catalog
            // against each flow alone at its optimal share.
            let model = AnalyticModel::new(catalog.clone());
            if let Ok(che) = model.predict_che(x) {
                let mut sep_overall = 0.0;
                let mut detail = Vec::new();
                for k in 0..flows.len() {
                    let solo = Arc::new(catalog.solo(k));
                    let solo_model = AnalyticModel::new(solo);
                    let y = plan.u[k] * x;
                    let miss = match solo_model.predict_che(y) {
                        Ok(p) => p.overall,
                        Err(_) => 1.0,
                    };
                    sep_overall += flows[k].nu * miss;
                    detail.push(format!("flow {k}: {} vs {}", sig(che.per_flow[k]), sig(miss)));
                }
                report.push_str(&format!(
                    "che numeric at x = {}: pooled overall {} vs separated overall {}\n  per flow (pooled vs separated): {}\n",
                    sig(x),
                    sig(che.overall),
                    sig(sep_overall),
                    detail.join("; ")
                ));
            }
        }
    }

    print!("{report}");
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join("plan.txt");
    std::fs::write(&path, &report)
        .map_err(|e| CliError::runtime(format!("write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_compare(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let budget = Budget::new(scenario);
    let catalog = Arc::new(build_catalog(
        &scenario.specs,
        scenario.overlap.as_ref(),
        scenario.base_seed,
    )?);
    let (sim_rows, truncated) = simulate_pooled(scenario, &catalog, &budget)?;
    if truncated {
        return Err(CliError::runtime("runtime budget exceeded before predictions".into()));
    }
    let pred_rows = predict_table(scenario, &catalog)?;

    let lookup = |x: f64, flow: Option<usize>| -> Option<&SimRow> {
        sim_rows.iter().find(|r| r.x == x && r.flow == flow)
    };
    let x_min = scenario
        .x_min
        .unwrap_or_else(|| 200.0 * catalog.mean_request_size());
    let mut csv = CsvFile::create(out, "compare.csv", "x,flow,method,empirical,predicted,rel_error")?;
    // max relative error per (flow, method) over x >= x_min.
    let mut summary: std::collections::BTreeMap<(String, &'static str), f64> =
        std::collections::BTreeMap::new();
    for pred in &pred_rows {
        let sim = lookup(pred.x, pred.flow).ok_or_else(|| {
            CliError::runtime(format!(
                "missing simulation row for x = {}, flow {}",
                pred.x,
                flow_label(pred.flow)
            ))
        })?;
        let (pred_field, rel_field) = match pred.value {
            PredValue::Val(v) => {
                if sim.miss_ratio > 0.0 {
                    let rel = (v - sim.miss_ratio).abs() / sim.miss_ratio;
                    if pred.x >= x_min {
                        let key = (flow_label(pred.flow), pred.method.name());
                        let slot = summary.entry(key).or_insert(0.0);
                        *slot = slot.max(rel);
                    }
                    (sig(v), sig(rel))
                } else {
                    (sig(v), String::new())
                }
            }
            other => (other.csv(), String::new()),
        };
        csv.row(&format!(
            "{},{},{},{},{},{}",
            sig(pred.x),
            flow_label(pred.flow),
            pred.method.name(),
            sig(sim.miss_ratio),
            pred_field,
            rel_field
        ))?;
    }
    for ((flow, method), max_rel) in &summary {
        csv.row(&format!("summary,{flow},{method},,,{}", sig(*max_rel)))?;
    }
    let path = csv.finish()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
