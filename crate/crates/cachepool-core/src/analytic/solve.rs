//! Monotone root bracketing and bisection shared by the characteristic
//! time solvers.

/// Finds `z >= 0` with `f(z) = target` for a continuous, non-decreasing
/// `f` with `f(0) <= target`. Brackets by doubling from 1 and then
/// bisects in log space (linearly on `[0, 1]` when the root is below 1);
/// stops after 80 refinement steps or when the bracket's relative width
/// drops below 1e-10.
pub(crate) fn invert_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    const MAX_STEPS: usize = 80;
    const REL_TOL: f64 = 1e-10;

    if f(1.0) >= target {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..MAX_STEPS {
            if hi - lo <= REL_TOL * hi.max(1e-300) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    let mut hi = 2.0f64;
    let mut doublings = 0;
    while f(hi) < target {
        hi *= 2.0;
        doublings += 1;
        assert!(doublings < 1100, "root bracketing diverged");
    }
    let (mut llo, mut lhi) = ((hi / 2.0).ln(), hi.ln());
    for _ in 0..MAX_STEPS {
        if lhi - llo <= REL_TOL {
            break;
        }
        let mid = 0.5 * (llo + lhi);
        if f(mid.exp()) < target {
            llo = mid;
        } else {
            lhi = mid;
        }
    }
    (0.5 * (llo + lhi)).exp()
}
