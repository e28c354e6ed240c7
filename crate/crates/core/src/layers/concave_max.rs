/// Global maximizer of a smooth scalar function on `[lo, hi]`: a uniform scan
/// locates the best bracket, then golden-section refines it.
pub(crate) fn scalar_argmax(f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    scalar_argmax_with(f, lo, hi, 256, 1e-12)
}

/// [`scalar_argmax`] with `scan` bracket nodes and relative tolerance `tol`.
pub(crate) fn scalar_argmax_with(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, scan: usize, tol: f64) -> f64 {
    let step = (hi - lo) / scan as f64;
    let node = |k: usize| if k == scan { hi } else { lo + k as f64 * step };
    let mut best = 0;
    let mut best_val = f(lo);
    for k in 1..=scan {
        let v = f(node(k));
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    let (mut a, mut b) = (node(best.saturating_sub(1)), node((best + 1).min(scan)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    if f(mid) >= best_val {
        mid
    } else {
        node(best)
    }
}
