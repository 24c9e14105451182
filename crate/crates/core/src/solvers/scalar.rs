/// Golden-section search for the minimiser of a convex `f` on `[lo, hi]`.
///
/// Returns `(argmin, value)`; the abscissa is within `tol` of a true minimiser.
pub fn minimize_scalar_convex(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let tol = tol.max(f64::EPSILON * (1.0 + a.abs().max(b.abs())));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    // endpoints are candidates too: the minimiser may sit on the boundary
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))].into_iter().fold(
        (f64::NAN, f64::INFINITY),
        |best, c| if c.1 < best.1 { c } else { best },
    )
}
