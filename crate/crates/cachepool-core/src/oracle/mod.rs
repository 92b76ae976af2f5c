//! Exact miss probabilities for tiny instances.
//!
//! The move-to-front list order over `n` items is a Markov chain on the
//! `n!` permutations: a request for item `i` moves it to the front. For
//! instances of at most [`MAX_ITEMS`] items the stationary distribution
//! is solved directly (dense LU up to 6 items, power iteration above),
//! and the exact miss probability of flow `k` at capacity `x` is
//!
//! ```text
//! P[miss | k] = sum_sigma pi(sigma) sum_i q_i^(k) 1{size ahead of i in sigma > x}
//! ```
//!
//! This path is deliberately independent of the search-cost machinery in
//! [`crate::analytic`], so it can serve as ground truth for both the
//! simulator and the predictors.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Hard cap on instance size (8! = 40320 states).
pub const MAX_ITEMS: usize = 8;
/// Largest instance solved by dense LU; larger ones use power iteration.
const DENSE_LIMIT: usize = 6;

/// A fully explicit instance: mixed probabilities, per-flow conditional
/// probabilities over the same item set, sizes and a capacity.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub nus: Vec<f64>,
    pub per_flow_q: Vec<Vec<f64>>,
    pub mixed_p: Vec<f64>,
    pub sizes: Vec<u64>,
    pub capacity: f64,
}

impl TinyInstance {
    pub fn new(
        nus: Vec<f64>,
        per_flow_q: Vec<Vec<f64>>,
        sizes: Vec<u64>,
        capacity: f64,
    ) -> Result<Self> {
        let n = sizes.len();
        if n == 0 || nus.is_empty() || nus.len() != per_flow_q.len() {
            return Err(Error::InvalidSpec("inconsistent tiny instance".into()));
        }
        if n > MAX_ITEMS {
            return Err(Error::TooLarge { got: n, limit: MAX_ITEMS });
        }
        if !(capacity > 0.0) {
            return Err(Error::InvalidSpec("capacity must be positive".into()));
        }
        let nu_sum: f64 = nus.iter().sum();
        if (nu_sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec("nu must sum to 1".into()));
        }
        let mut mixed_p = vec![0.0; n];
        for (nu, q) in nus.iter().zip(&per_flow_q) {
            if q.len() != n {
                return Err(Error::InvalidSpec("flow distribution length mismatch".into()));
            }
            let qs: f64 = q.iter().sum();
            if (qs - 1.0).abs() > 1e-9 || q.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidSpec("each flow's q must be a distribution".into()));
            }
            for (slot, &v) in mixed_p.iter_mut().zip(q) {
                *slot += nu * v;
            }
        }
        if mixed_p.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidSpec("every item needs positive mixed probability".into()));
        }
        Ok(TinyInstance { nus, per_flow_q, mixed_p, sizes, capacity })
    }

    pub fn single_flow(p: Vec<f64>, sizes: Vec<u64>, capacity: f64) -> Result<Self> {
        TinyInstance::new(vec![1.0], vec![p], sizes, capacity)
    }

    pub fn n_items(&self) -> usize {
        self.sizes.len()
    }
}

/// Exact per-flow and overall miss probabilities.
#[derive(Debug, Clone)]
pub struct ExactMiss {
    pub per_flow: Vec<f64>,
    pub overall: f64,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All permutations of `0..n` in lexicographic order; index = Lehmer rank.
fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(factorial(n));
    let mut cur = (0..n as u8).collect::<Vec<_>>();
    loop {
        out.push(cur.clone());
        // next_permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

fn lehmer_rank(perm: &[u8]) -> usize {
    let n = perm.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller_right =
            perm[i + 1..].iter().filter(|&&v| v < perm[i]).count();
        rank += smaller_right * factorial(n - 1 - i);
    }
    rank
}

/// Targets of the move-to-front transition: `trans[s * n + i]` is the
/// state reached from permutation `s` when item `i` is requested.
/// Permutations list most-recent first.
fn transition_table(perms: &[Vec<u8>], n: usize) -> Vec<u32> {
    let mut trans = vec![0u32; perms.len() * n];
    let mut scratch = vec![0u8; n];
    for (s, perm) in perms.iter().enumerate() {
        for item in 0..n as u8 {
            let pos = perm.iter().position(|&v| v == item).unwrap();
            scratch[0] = item;
            scratch[1..=pos].copy_from_slice(&perm[..pos]);
            scratch[pos + 1..].copy_from_slice(&perm[pos + 1..]);
            trans[s * n + item as usize] = lehmer_rank(&scratch) as u32;
        }
    }
    trans
}

fn stationary_dense(perms: &[Vec<u8>], trans: &[u32], p: &[f64]) -> Vec<f64> {
    let states = perms.len();
    let n = p.len();
    // (P^T - I) pi = 0 with the last row replaced by sum(pi) = 1.
    let mut a = DMatrix::<f64>::zeros(states, states);
    for s in 0..states {
        for i in 0..n {
            let t = trans[s * n + i] as usize;
            a[(t, s)] += p[i];
        }
        a[(s, s)] -= 1.0;
    }
    for s in 0..states {
        a[(states - 1, s)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(states);
    b[states - 1] = 1.0;
    let pi = a.lu().solve(&b).expect("stationary system is nonsingular");
    pi.iter().copied().collect()
}

fn stationary_power(perms: &[Vec<u8>], trans: &[u32], p: &[f64]) -> Vec<f64> {
    let states = perms.len();
    let n = p.len();
    let mut pi = vec![1.0 / states as f64; states];
    let mut next = vec![0.0f64; states];
    for _ in 0..500_000 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..states {
            let mass = pi[s];
            if mass == 0.0 {
                continue;
            }
            for i in 0..n {
                next[trans[s * n + i] as usize] += mass * p[i];
            }
        }
        let diff: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if diff < 1e-14 {
            break;
        }
    }
    pi
}

fn stationary(inst: &TinyInstance) -> (Vec<Vec<u8>>, Vec<f64>) {
    let n = inst.n_items();
    let perms = permutations(n);
    let trans = transition_table(&perms, n);
    let mut pi = if n <= DENSE_LIMIT {
        stationary_dense(&perms, &trans, &inst.mixed_p)
    } else {
        stationary_power(&perms, &trans, &inst.mixed_p)
    };
    // Clean up and verify: pi is a distribution with residual < 1e-12.
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    let mut residual = vec![0.0f64; pi.len()];
    for s in 0..pi.len() {
        for i in 0..n {
            residual[trans[s * n + i] as usize] += pi[s] * inst.mixed_p[i];
        }
    }
    let err: f64 = residual.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
    assert!(err < 1e-12, "stationary residual {err}");
    (perms, pi)
}

/// Exact stationary miss probabilities of the instance.
pub fn exact_miss(inst: &TinyInstance) -> Result<ExactMiss> {
    if inst.n_items() > MAX_ITEMS {
        return Err(Error::TooLarge { got: inst.n_items(), limit: MAX_ITEMS });
    }
    let n = inst.n_items();
    let (perms, pi) = stationary(inst);
    // miss_weight[i] = P[size ahead of item i exceeds the capacity].
    let mut miss_weight = vec![0.0f64; n];
    for (perm, &prob) in perms.iter().zip(&pi) {
        let mut ahead = 0u64;
        for &item in perm {
            if ahead as f64 > inst.capacity || inst.sizes[item as usize] as f64 > inst.capacity {
                miss_weight[item as usize] += prob;
            }
            ahead += inst.sizes[item as usize];
        }
    }
    let per_flow: Vec<f64> = inst
        .per_flow_q
        .iter()
        .map(|q| q.iter().zip(&miss_weight).map(|(&qi, &w)| qi * w).sum())
        .collect();
    let overall = inst.nus.iter().zip(&per_flow).map(|(&nu, &m)| nu * m).sum();
    Ok(ExactMiss { per_flow, overall })
}

/// Exact search-cost tail table `P[sigma > n | I_0 = k]` for
/// `n = 0..=n_max`, from the defining sum `sum_i q_i (1 - p_i)^n`.
pub fn exact_sigma_distribution(inst: &TinyInstance, n_max: u32) -> Vec<Vec<f64>> {
    inst.per_flow_q
        .iter()
        .map(|q| {
            (0..=n_max)
                .map(|n| {
                    if n == 0 {
                        return 1.0;
                    }
                    q.iter()
                        .zip(&inst.mixed_p)
                        .map(|(&qi, &pi)| {
                            let e = n as f64 * (-pi).ln_1p();
                            if e == f64::NEG_INFINITY {
                                0.0
                            } else {
                                qi * e.exp()
                            }
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}
