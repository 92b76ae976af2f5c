//! Fenwick tree over recency slots, weighted by item size.

#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    /// Adds `delta` at position `i` (0-based).
    #[inline]
    pub fn add(&mut self, i: usize, delta: i64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum over positions `0..=i`.
    #[inline]
    pub fn prefix(&self, i: usize) -> i64 {
        let mut j = i + 1;
        let mut s = 0i64;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }
}
