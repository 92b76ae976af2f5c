//! The per-flow tail relation `Phi_k`.
//!
//! `Phi_k` maps reciprocal popularity `1/p_y` to reciprocal tail mass
//! `1/Q_y`. On a finite catalog it is known exactly at the catalog
//! points; between them we interpolate linearly in log-log space, which
//! is exact for pure power laws and monotone by construction. Outside the
//! covered range the endpoint segment slopes are extended.

/// Piecewise log-log-linear monotone interpolant.
#[derive(Debug, Clone)]
pub struct LogLogInterp {
    /// ln(1/p_y), strictly increasing.
    lx: Vec<f64>,
    /// ln(1/Q_y), non-decreasing.
    ly: Vec<f64>,
}

impl LogLogInterp {
    /// Builds the interpolant from a flow's mixed probabilities and
    /// conditional suffix sums, both in canonical order.
    pub fn from_flow(p: &[f64], q_suffix: &[f64]) -> Self {
        let mut lx = Vec::with_capacity(p.len());
        let mut ly = Vec::with_capacity(p.len());
        for y in 0..p.len() {
            if !(p[y] > 0.0) || !(q_suffix[y] > 0.0) {
                continue;
            }
            let x = -p[y].ln();
            if let Some(&last) = lx.last() {
                if x <= last {
                    continue; // tied popularity: keep the first tail point
                }
            }
            lx.push(x);
            ly.push(-q_suffix[y].ln());
        }
        LogLogInterp { lx, ly }
    }

    /// Test constructor from explicit `(t, Phi(t))` samples.
    #[cfg(test)]
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        let mut lx: Vec<f64> = points.iter().map(|&(t, _)| t.ln()).collect();
        let mut ly: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
        let mut order: Vec<usize> = (0..lx.len()).collect();
        order.sort_by(|&a, &b| lx[a].partial_cmp(&lx[b]).unwrap());
        lx = order.iter().map(|&i| lx[i]).collect();
        ly = order.iter().map(|&i| ly[i]).collect();
        LogLogInterp { lx, ly }
    }

    pub fn n_points(&self) -> usize {
        self.lx.len()
    }

    /// Whether `t` lies inside the range covered by catalog points.
    pub fn in_range(&self, t: f64) -> bool {
        if self.lx.is_empty() {
            return false;
        }
        let lt = t.ln();
        lt >= self.lx[0] && lt <= *self.lx.last().unwrap()
    }

    /// ln Phi(e^lt), extrapolating with the endpoint segment slopes.
    pub fn eval_ln(&self, lt: f64) -> f64 {
        let n = self.lx.len();
        match n {
            0 => f64::NAN,
            1 => self.ly[0],
            _ => {
                let seg = if lt <= self.lx[0] {
                    0
                } else if lt >= self.lx[n - 1] {
                    n - 2
                } else {
                    self.lx.partition_point(|&x| x <= lt).min(n - 1) - 1
                };
                let (x0, x1) = (self.lx[seg], self.lx[seg + 1]);
                let (y0, y1) = (self.ly[seg], self.ly[seg + 1]);
                y0 + (y1 - y0) * (lt - x0) / (x1 - x0)
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_ln(t.ln()).exp()
    }

    /// Local log-log slope, measured centrally over one decade around `t`
    /// and clamped to the covered range.
    pub fn slope_at(&self, t: f64) -> f64 {
        let n = self.lx.len();
        if n < 2 {
            return 0.0;
        }
        let half = 0.5 * std::f64::consts::LN_10;
        let (lo, hi) = (self.lx[0], self.lx[n - 1]);
        let lt = t.ln();
        let mut l1 = (lt - half).clamp(lo, hi);
        let mut l2 = (lt + half).clamp(lo, hi);
        if l2 - l1 < 1e-9 {
            // Window collapsed at a boundary: fall back to the endpoint
            // segment.
            if lt <= lo {
                l1 = self.lx[0];
                l2 = self.lx[1];
            } else {
                l1 = self.lx[n - 2];
                l2 = self.lx[n - 1];
            }
        }
        (self.eval_ln(l2) - self.eval_ln(l1)) / (l2 - l1)
    }
}
