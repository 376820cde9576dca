//! Scalar root bracketing and golden-section minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Finds `x` in `[lo, hi]` with `f(x) = target` for a strictly increasing `f` by bisection.
///
/// The caller guarantees `f(lo) <= target <= f(hi)`. Iterates until the bracket is
/// narrower than `tol` or stops shrinking in floating point.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    if f(lo) >= target {
        return lo;
    }
    if f(hi) <= target {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. Stops once the bracket is narrower than `tol`.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return (x, f(x));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        if x1 <= a && x2 >= b {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x1, f1), (x2, f2), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}
