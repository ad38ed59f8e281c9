use crate::error::{Error, Result};

/// Stopping rules for [`find_root_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    /// Accept `x` once `|f(x)| <= abs_tol`.
    pub abs_tol: f64,
    /// Accept once the bracket is narrower than `rel_tol * |x| + x_tol`.
    pub rel_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
    /// Geometric bracket doublings allowed before giving up.
    pub max_expansions: usize,
}

impl Default for RootSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            x_tol: 1e-300,
            max_iter: 200,
            max_expansions: 60,
        }
    }
}

/// Root of a monotone function. The seed bracket is expanded geometrically
/// (width doubling on the side where the root must lie) until it straddles
/// a sign change, then Brent's method finishes the job.
pub fn find_root_monotone<F>(mut f: F, seed: (f64, f64), spec: &RootSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if seed.0 <= seed.1 { seed } else { (seed.1, seed.0) };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain("root bracket must be finite"));
    }
    if hi == lo {
        hi = lo + 1.0;
    }
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::domain("root function returned NaN at bracket"));
    }
    let mut width = hi - lo;
    let mut expansions = 0;
    while flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        if expansions == spec.max_expansions {
            return Err(Error::Bracketing { lo, hi });
        }
        expansions += 1;
        if flo == fhi {
            lo -= width;
            hi += width;
            flo = f(lo);
            fhi = f(hi);
        } else {
            let increasing = fhi > flo;
            // For increasing f with both values positive the root lies left.
            let go_left = increasing == (flo > 0.0);
            if go_left {
                hi = lo;
                fhi = flo;
                lo -= width;
                flo = f(lo);
            } else {
                lo = hi;
                flo = fhi;
                hi += width;
                fhi = f(hi);
            }
        }
        width *= 2.0;
        if flo.is_nan() || fhi.is_nan() {
            return Err(Error::Bracketing { lo, hi });
        }
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    brent(&mut f, lo, hi, flo, fhi, spec)
}

fn brent<F>(f: &mut F, a0: f64, b0: f64, fa0: f64, fb0: f64, spec: &RootSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..spec.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (spec.rel_tol * b.abs() + spec.x_tol);
        let m = 0.5 * (c - b);
        if fb.abs() <= spec.abs_tol || m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}
