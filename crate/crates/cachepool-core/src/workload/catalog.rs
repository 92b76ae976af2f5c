//! Materialized item catalogs.
//!
//! A [`Catalog`] is the finite union universe requested by a set of flows:
//! one entry per distinct item (shared items appear once), with its size,
//! its mixed request probability `p_i` and, per flow, the conditional
//! probability `q_i` of being asked by that flow.
//!
//! Per flow the canonical storage order sorts items by their mixed
//! probability, descending. In that order the suffix sums
//! `Q_y = sum_{i>=y} q_i` are materialized once and kept exactly
//! consistent with the stored masses: after normalization, `q_y` is
//! redefined as `Q_y - Q_{y+1}`, so the telescoping identities hold
//! bit-for-bit and `sum q_i = 1` exactly.

use crate::error::{Error, Result};

/// Which class an item belongs to.
///
/// Without overlap every item is owned by exactly one flow. The two-flow
/// overlap model additionally has a shared class requested by both flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ItemClass {
    /// Items private to one flow (class A or B in the overlap model).
    Flow(u16),
    /// Items requested by both flows (class D).
    Shared,
}

/// Stable identity of a data item: class plus the 1-based index inside
/// the class, in the popularity order the family was defined with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItemId {
    pub class: ItemClass,
    pub index: u32,
}

impl std::fmt::Display for ItemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.class {
            ItemClass::Flow(k) => write!(f, "{}:{}", k, self.index),
            ItemClass::Shared => write!(f, "D:{}", self.index),
        }
    }
}

/// Item identities, stored either as contiguous class ranges (the common
/// case after a build) or explicitly (solo catalogs, raw test instances).
#[derive(Debug, Clone)]
pub(crate) enum IdStore {
    /// `(class, first_index, len)` blocks laid out consecutively.
    Ranges(Vec<(ItemClass, u32, u32)>),
    Explicit(Vec<ItemId>),
}

impl IdStore {
    fn lookup(&self, union_idx: u32) -> ItemId {
        match self {
            IdStore::Explicit(v) => v[union_idx as usize],
            IdStore::Ranges(ranges) => {
                let mut base = 0u32;
                for &(class, first, len) in ranges {
                    if union_idx < base + len {
                        return ItemId { class, index: first + (union_idx - base) };
                    }
                    base += len;
                }
                unreachable!("union index {union_idx} outside id ranges")
            }
        }
    }
}

/// One flow's view of the catalog, in canonical (mixed-probability
/// descending) order.
#[derive(Debug, Clone)]
pub struct FlowCatalog {
    nu: f64,
    c_value: f64,
    union_idx: Vec<u32>,
    q: Vec<f64>,
    p: Vec<f64>,
    /// `q_suffix[y] = sum_{i >= y} q_i` (0-based), length `len + 1`.
    q_suffix: Vec<f64>,
    /// `cum[y] = 1 - q_suffix[y + 1]`, used for inverse-CDF sampling.
    cum: Vec<f64>,
    /// Positions re-sorted by conditional probability, descending; `None`
    /// when the canonical order is already non-increasing in `q`.
    order_by_q: Option<Vec<u32>>,
}

impl FlowCatalog {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Normalization constant of the popularity family, when the flow was
    /// built from one (NaN for raw instances).
    pub fn c_value(&self) -> f64 {
        self.c_value
    }

    /// Conditional probabilities `q_i`, canonical order.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Unconditional (mixed) probabilities `p_i` of this flow's items.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Union-universe index of each item, canonical order.
    pub fn union_idx(&self) -> &[u32] {
        &self.union_idx
    }

    pub fn q_suffix(&self) -> &[f64] {
        &self.q_suffix
    }

    /// Positions sorted by `q` descending (identity when `None` was stored).
    pub fn order_by_q(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match &self.order_by_q {
            Some(v) => Box::new(v.iter().copied()),
            None => Box::new(0..self.len() as u32),
        }
    }

    fn sample_pos(&self, v: f64) -> usize {
        let pos = self.cum.partition_point(|&c| c <= v);
        pos.min(self.len() - 1)
    }
}

/// The materialized union universe for a scenario.
#[derive(Debug, Clone)]
pub struct Catalog {
    sizes: Vec<u64>,
    mixed_p: Vec<f64>,
    ids: IdStore,
    flows: Vec<FlowCatalog>,
    total_size_mass: f64,
    mean_request_size: f64,
}

/// Raw ingredients of one flow before assembly: `(union index, mass)`
/// pairs; masses may be un-normalized.
pub(crate) struct RawFlow {
    pub nu: f64,
    pub c_value: f64,
    pub entries: Vec<(u32, f64)>,
}

impl Catalog {
    /// Assembles a catalog from raw per-flow masses over a shared union
    /// universe. This is the single construction path: the public builders
    /// in [`super`] and the test-facing [`Catalog::from_parts`] both end
    /// up here.
    pub(crate) fn assemble(sizes: Vec<u64>, ids: IdStore, raw_flows: Vec<RawFlow>) -> Result<Catalog> {
        let n = sizes.len();
        if n == 0 {
            return Err(Error::InvalidSpec("catalog has no items".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidSpec("item sizes must be >= 1".into()));
        }
        let nu_sum: f64 = raw_flows.iter().map(|f| f.nu).sum();
        if (nu_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "flow mixing probabilities must sum to 1 (got {nu_sum})"
            )));
        }

        // First pass: normalized masses and the provisional mixed vector
        // used only to fix the canonical per-flow order.
        let mut norm: Vec<Vec<(u32, f64)>> = Vec::with_capacity(raw_flows.len());
        let mut provisional_p = vec![0.0f64; n];
        for raw in &raw_flows {
            if raw.entries.is_empty() {
                return Err(Error::InvalidSpec("flow with empty item list".into()));
            }
            let total: f64 = raw.entries.iter().map(|&(_, w)| w).sum();
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::InvalidSpec("flow masses must be positive and finite".into()));
            }
            let scaled: Vec<(u32, f64)> = raw
                .entries
                .iter()
                .map(|&(idx, w)| {
                    debug_assert!((idx as usize) < n);
                    (idx, w / total)
                })
                .collect();
            for &(idx, q) in &scaled {
                provisional_p[idx as usize] += raw.nu * q;
            }
            norm.push(scaled);
        }

        // Second pass per flow: order by mixed probability descending,
        // then rebuild the masses from normalized suffix sums so that
        // Q_y - Q_{y+1} = q_y and sum q = 1 hold exactly.
        let mut flows = Vec::with_capacity(raw_flows.len());
        for (raw, mut entries) in raw_flows.iter().zip(norm) {
            entries.sort_by(|a, b| {
                let pa = provisional_p[a.0 as usize];
                let pb = provisional_p[b.0 as usize];
                pb.partial_cmp(&pa).unwrap().then(a.0.cmp(&b.0))
            });
            let len = entries.len();
            let mut q_suffix = vec![0.0f64; len + 1];
            for y in (0..len).rev() {
                q_suffix[y] = q_suffix[y + 1] + entries[y].1;
            }
            let head = q_suffix[0];
            for v in q_suffix.iter_mut() {
                *v /= head;
            }
            let mut q = vec![0.0f64; len];
            let mut cum = vec![0.0f64; len];
            for y in 0..len {
                q[y] = q_suffix[y] - q_suffix[y + 1];
                cum[y] = 1.0 - q_suffix[y + 1];
            }
            let union_idx: Vec<u32> = entries.iter().map(|&(idx, _)| idx).collect();
            let non_increasing = q.windows(2).all(|w| w[0] >= w[1]);
            let order_by_q = if non_increasing {
                None
            } else {
                let mut ord: Vec<u32> = (0..len as u32).collect();
                ord.sort_by(|&a, &b| {
                    q[b as usize].partial_cmp(&q[a as usize]).unwrap().then(a.cmp(&b))
                });
                Some(ord)
            };
            flows.push(FlowCatalog {
                nu: raw.nu,
                c_value: raw.c_value,
                union_idx,
                q,
                p: Vec::new(),
                q_suffix,
                cum,
                order_by_q,
            });
        }

        // Final mixed probabilities from the exactified masses. The loop
        // order is part of the contract: recomputing p from {q, nu} in
        // flow-then-position order reproduces the stored vector bit-for-bit.
        let mut mixed_p = vec![0.0f64; n];
        for flow in &flows {
            for (pos, &idx) in flow.union_idx.iter().enumerate() {
                mixed_p[idx as usize] += flow.nu * flow.q[pos];
            }
        }
        for flow in flows.iter_mut() {
            flow.p = flow.union_idx.iter().map(|&idx| mixed_p[idx as usize]).collect();
        }

        let p_total: f64 = mixed_p.iter().sum();
        if (p_total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "mixed probabilities sum to {p_total}, expected 1"
            )));
        }

        let total_size_mass = sizes.iter().map(|&s| s as f64).sum();
        let mean_request_size = mixed_p
            .iter()
            .zip(&sizes)
            .map(|(&p, &s)| p * s as f64)
            .sum();

        Ok(Catalog { sizes, mixed_p, ids, flows, total_size_mass, mean_request_size })
    }

    /// Builds a catalog directly from per-flow conditional distributions
    /// over an explicit union universe. Items shared by several flows are
    /// expressed by giving them positive mass in more than one flow.
    pub fn from_parts(nus: &[f64], per_flow_q: &[Vec<f64>], sizes: &[u64]) -> Result<Catalog> {
        if nus.len() != per_flow_q.len() || nus.is_empty() {
            return Err(Error::InvalidSpec("need one conditional distribution per flow".into()));
        }
        let n = sizes.len();
        let mut owners = vec![0usize; n];
        for q in per_flow_q {
            if q.len() != n {
                return Err(Error::InvalidSpec(
                    "conditional distributions must cover the whole union universe".into(),
                ));
            }
            for (idx, &m) in q.iter().enumerate() {
                if m < 0.0 || !m.is_finite() {
                    return Err(Error::InvalidSpec("masses must be finite and non-negative".into()));
                }
                if m > 0.0 {
                    owners[idx] += 1;
                }
            }
        }
        if owners.iter().any(|&o| o == 0) {
            return Err(Error::InvalidSpec("every item needs positive mass in some flow".into()));
        }
        let mut ids = Vec::with_capacity(n);
        let mut per_class_count: std::collections::HashMap<ItemClass, u32> =
            std::collections::HashMap::new();
        for idx in 0..n {
            let class = if owners[idx] > 1 {
                ItemClass::Shared
            } else {
                let k = per_flow_q.iter().position(|q| q[idx] > 0.0).unwrap();
                ItemClass::Flow(k as u16)
            };
            let slot = per_class_count.entry(class).or_insert(0);
            *slot += 1;
            ids.push(ItemId { class, index: *slot });
        }
        let raw_flows = nus
            .iter()
            .zip(per_flow_q)
            .map(|(&nu, q)| RawFlow {
                nu,
                c_value: f64::NAN,
                entries: q
                    .iter()
                    .enumerate()
                    .filter(|&(_, &m)| m > 0.0)
                    .map(|(idx, &m)| (idx as u32, m))
                    .collect(),
            })
            .collect();
        Catalog::assemble(sizes.to_vec(), IdStore::Explicit(ids), raw_flows)
    }

    pub(crate) fn ranges_store(ranges: Vec<(ItemClass, u32, u32)>) -> IdStore {
        IdStore::Ranges(ranges)
    }

    pub fn n_items(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, union_idx: u32) -> u64 {
        self.sizes[union_idx as usize]
    }

    /// Mixed request probabilities `p_i` over the union universe.
    pub fn mixed_p(&self) -> &[f64] {
        &self.mixed_p
    }

    /// Total size of all distinct items; caches at least this large are
    /// saturated.
    pub fn total_size_mass(&self) -> f64 {
        self.total_size_mass
    }

    /// Expected size of a requested item, `sum p_i s_i`.
    pub fn mean_request_size(&self) -> f64 {
        self.mean_request_size
    }

    pub fn flow(&self, k: usize) -> &FlowCatalog {
        &self.flows[k]
    }

    pub fn flows(&self) -> &[FlowCatalog] {
        &self.flows
    }

    pub fn nus(&self) -> Vec<f64> {
        self.flows.iter().map(|f| f.nu).collect()
    }

    pub fn item_id(&self, union_idx: u32) -> ItemId {
        self.ids.lookup(union_idx)
    }

    /// Tail sum `Q_y = sum_{i >= y} q_i` for flow `k`, with `y` 1-based in
    /// the canonical order; `Q_1 = 1` and `Q_{N+1} = 0`.
    pub fn tail_sum(&self, k: usize, y: usize) -> Result<f64> {
        let flow = self
            .flows
            .get(k)
            .ok_or_else(|| Error::OutOfRange(format!("flow {k} of {}", self.flows.len())))?;
        if y == 0 || y > flow.len() + 1 {
            return Err(Error::OutOfRange(format!(
                "tail index {y} outside 1..={}",
                flow.len() + 1
            )));
        }
        Ok(flow.q_suffix[y - 1])
    }

    /// The catalog flow `k` sees when served alone: its conditional
    /// distribution becomes the mixed one (`nu = 1`), re-canonicalized.
    pub fn solo(&self, k: usize) -> Catalog {
        let flow = &self.flows[k];
        let mut order: Vec<u32> = (0..flow.len() as u32).collect();
        order.sort_by(|&a, &b| {
            flow.q[b as usize]
                .partial_cmp(&flow.q[a as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        let sizes: Vec<u64> = order.iter().map(|&pos| self.sizes[flow.union_idx[pos as usize] as usize]).collect();
        let ids: Vec<ItemId> = order.iter().map(|&pos| self.item_id(flow.union_idx[pos as usize])).collect();
        let entries: Vec<(u32, f64)> = order
            .iter()
            .enumerate()
            .map(|(new_idx, &pos)| (new_idx as u32, flow.q[pos as usize]))
            .collect();
        Catalog::assemble(
            sizes,
            IdStore::Explicit(ids),
            vec![RawFlow { nu: 1.0, c_value: flow.c_value, entries }],
        )
        .expect("solo projection of a valid catalog is valid")
    }

    pub(crate) fn sample_flow_item(&self, k: usize, v: f64) -> u32 {
        let flow = &self.flows[k];
        flow.union_idx[flow.sample_pos(v)]
    }
}
