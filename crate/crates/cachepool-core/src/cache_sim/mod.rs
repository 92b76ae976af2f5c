//! LRU simulation in move-to-front form.
//!
//! A request misses at capacity `x` exactly when the total size of items
//! used strictly more recently than the requested one exceeds `x` (first
//! requests always miss, and items larger than the cache always miss but
//! still displace others). Because the miss events `{C > x}` are nested
//! in `x`, one pass over the stream serves every capacity at once.

mod fenwick;

use crate::analytic::DistinctMassCurve;
use crate::error::{Error, Result};
use crate::workload::{Catalog, RateSchedule, RequestSampler};
use fenwick::Fenwick;

const FREE: u32 = u32::MAX;

/// Move-to-front order of all previously requested items with a
/// size-weighted recency index, supporting "total size strictly more
/// recent than item" queries in logarithmic time.
#[derive(Debug, Clone)]
pub struct CacheState {
    fenwick: Fenwick,
    /// item -> slot + 1; 0 marks never-requested items.
    slot_of: Vec<u32>,
    /// slot -> item, `FREE` when vacated.
    slot_item: Vec<u32>,
    slot_weight: Vec<u64>,
    next_slot: usize,
    live_size: u64,
    distinct: u32,
}

impl CacheState {
    pub fn new(n_items: usize) -> Self {
        let cap = 4096.min(4 * n_items.max(1));
        CacheState {
            fenwick: Fenwick::new(cap),
            slot_of: vec![0; n_items],
            slot_item: vec![FREE; cap],
            slot_weight: vec![0; cap],
            next_slot: 0,
            live_size: 0,
            distinct: 0,
        }
    }

    /// Total size of all distinct items requested so far.
    pub fn live_size(&self) -> u64 {
        self.live_size
    }

    pub fn distinct(&self) -> u32 {
        self.distinct
    }

    /// Processes a request: returns the total size of strictly more
    /// recently used items (`None` on the first request to this item) and
    /// moves the item to the front.
    #[inline]
    pub fn touch(&mut self, item: u32, size: u64) -> Option<u64> {
        let prev = self.slot_of[item as usize];
        let cost = if prev == 0 {
            self.live_size += size;
            self.distinct += 1;
            None
        } else {
            let slot = (prev - 1) as usize;
            let ahead = self.live_size - self.fenwick.prefix(slot) as u64;
            self.fenwick.add(slot, -(self.slot_weight[slot] as i64));
            self.slot_item[slot] = FREE;
            self.slot_weight[slot] = 0;
            Some(ahead)
        };
        if self.next_slot == self.fenwick.len() {
            self.compact();
        }
        let slot = self.next_slot;
        self.fenwick.add(slot, size as i64);
        self.slot_item[slot] = item;
        self.slot_weight[slot] = size;
        self.slot_of[item as usize] = slot as u32 + 1;
        self.next_slot += 1;
        cost
    }

    /// Recency order, most recent first (for small-scale verification).
    pub fn mtf_order(&self) -> Vec<u32> {
        (0..self.next_slot)
            .rev()
            .map(|s| self.slot_item[s])
            .filter(|&item| item != FREE)
            .collect()
    }

    fn compact(&mut self) {
        let live: Vec<(u32, u64)> = (0..self.next_slot)
            .filter(|&s| self.slot_item[s] != FREE)
            .map(|s| (self.slot_item[s], self.slot_weight[s]))
            .collect();
        let cap = (4 * live.len()).max(4096);
        self.fenwick = Fenwick::new(cap);
        self.slot_item = vec![FREE; cap];
        self.slot_weight = vec![0; cap];
        for (slot, &(item, w)) in live.iter().enumerate() {
            self.fenwick.add(slot, w as i64);
            self.slot_item[slot] = item;
            self.slot_weight[slot] = w;
            self.slot_of[item as usize] = slot as u32 + 1;
        }
        self.next_slot = live.len();
    }
}

/// Single-capacity step: `true` is a miss. First requests miss; items
/// larger than the cache miss permanently but still enter the order.
#[inline]
pub fn step(state: &mut CacheState, item: u32, size: u64, x: f64) -> bool {
    debug_assert!(x > 0.0);
    match state.touch(item, size) {
        None => true,
        Some(ahead) => ahead as f64 > x || size as f64 > x,
    }
}

/// Warmup policy for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warmup {
    /// Per capacity: `max(10 x / mean_request_size, 1e6, 1.05 T_che(x))`
    /// requests, capped at half the budget (the cap sets the
    /// low-confidence flag). The characteristic-time term makes the
    /// counted window stationary: once `m(n)` passes `x`, the miss
    /// process at capacity `x` has no cold-start transient left.
    Auto,
    Fixed(u64),
    None,
}

/// Request/miss counters for one flow (or the whole mix).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowCounts {
    pub requests: u64,
    pub misses: u64,
}

impl FlowCounts {
    pub fn miss_ratio(&self) -> f64 {
        if self.requests == 0 {
            f64::NAN
        } else {
            self.misses as f64 / self.requests as f64
        }
    }

    /// Binomial standard error of the miss ratio.
    pub fn stderr(&self) -> f64 {
        if self.requests == 0 {
            f64::NAN
        } else {
            let r = self.miss_ratio();
            (r * (1.0 - r) / self.requests as f64).sqrt()
        }
    }
}

/// Post-warmup counters for one capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct MissStats {
    pub capacity: f64,
    pub warmup_requests: u64,
    pub per_flow: Vec<FlowCounts>,
    pub overall: FlowCounts,
    /// Set when a flow saw fewer than 100 counted requests or the warmup
    /// had to be truncated to fit the budget.
    pub low_confidence: bool,
}

/// One simulation run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_requests: u64,
    pub warmup: Warmup,
    pub seed: u64,
    /// RNG stream index; sweeps over the same seed use distinct streams.
    pub stream: u64,
}

/// Simulates the catalog once and reports per-flow miss statistics for
/// every capacity, sharing a single move-to-front pass (a request misses
/// at capacity `x` iff its search cost exceeds `x`, so all capacities
/// observe the same pass).
pub fn run(
    catalog: &Catalog,
    schedule: Option<&RateSchedule>,
    capacities: &[f64],
    cfg: &RunConfig,
) -> Result<Vec<MissStats>> {
    if capacities.is_empty() {
        return Err(Error::InvalidSpec("no capacities given".into()));
    }
    if capacities.windows(2).any(|w| w[0] >= w[1]) || capacities[0] <= 0.0 {
        return Err(Error::InvalidSpec("capacities must be positive and strictly ascending".into()));
    }
    if cfg.n_requests == 0 {
        return Err(Error::InvalidSpec("n_requests must be positive".into()));
    }

    let warmups = resolve_warmups(catalog, capacities, cfg)?;
    let n_caps = capacities.len();
    let n_flows = catalog.n_flows();

    // Activation thresholds are non-decreasing, so at any time the set of
    // counting capacities is a prefix of the (ascending) capacity list,
    // and so is the set of missing capacities; histograms over the prefix
    // length recover per-capacity counts afterwards.
    let mut miss_hist = vec![vec![0u64; n_caps + 1]; n_flows];
    let mut req_hist = vec![vec![0u64; n_caps + 1]; n_flows];
    let mut sampler = RequestSampler::new(catalog, schedule, cfg.seed, cfg.stream)?;
    let mut state = CacheState::new(catalog.n_items());
    let sizes = catalog.sizes();
    let mut active = 0usize;

    for t in 0..cfg.n_requests {
        while active < n_caps && warmups[active] <= t {
            active += 1;
        }
        let (flow, item) = sampler.next_request();
        let size = sizes[item as usize];
        let threshold = match state.touch(item, size) {
            None => f64::INFINITY,
            Some(ahead) => (ahead as f64).max(size as f64),
        };
        if active == 0 {
            continue;
        }
        let missing = capacities.partition_point(|&x| x < threshold);
        miss_hist[flow as usize][missing.min(active)] += 1;
        req_hist[flow as usize][active] += 1;
    }

    let mut out = Vec::with_capacity(n_caps);
    for (i, &x) in capacities.iter().enumerate() {
        let mut per_flow = vec![FlowCounts::default(); n_flows];
        let mut overall = FlowCounts::default();
        for k in 0..n_flows {
            let requests: u64 = req_hist[k][i + 1..].iter().sum();
            let misses: u64 = miss_hist[k][i + 1..].iter().sum();
            per_flow[k] = FlowCounts { requests, misses };
            overall.requests += requests;
            overall.misses += misses;
        }
        let starved = per_flow.iter().any(|f| f.requests < 100);
        let truncated = cfg.warmup == Warmup::Auto && warmups[i] == cfg.n_requests / 2;
        out.push(MissStats {
            capacity: x,
            warmup_requests: warmups[i],
            per_flow,
            overall,
            low_confidence: starved || truncated,
        });
    }
    Ok(out)
}

fn resolve_warmups(catalog: &Catalog, capacities: &[f64], cfg: &RunConfig) -> Result<Vec<u64>> {
    match cfg.warmup {
        Warmup::None => Ok(vec![0; capacities.len()]),
        Warmup::Fixed(w) => {
            if w >= cfg.n_requests {
                return Err(Error::InvalidSpec(format!(
                    "warmup {w} must be smaller than the request budget {}",
                    cfg.n_requests
                )));
            }
            Ok(vec![w; capacities.len()])
        }
        Warmup::Auto => {
            let curve = DistinctMassCurve::new(
                catalog.mixed_p().to_vec(),
                catalog.sizes().iter().map(|&s| s as f64).collect(),
            );
            let total = catalog.total_size_mass();
            let mean = catalog.mean_request_size();
            let cap = cfg.n_requests / 2;
            Ok(capacities
                .iter()
                .map(|&x| {
                    let mut w = (10.0 * x / mean).ceil().max(1e6);
                    if x < total {
                        // Characteristic time: past it the miss process at
                        // this capacity is stationary.
                        let t = curve.che_time(x).expect("x < total");
                        w = w.max((1.05 * t).ceil());
                    }
                    (w as u64).min(cap)
                })
                .collect())
        }
    }
}
