//! Numerical kernel shared by the pricers.
//!
//! Every semi-infinite integral `∫_a^∞ rho_0(x) g(x) dx` is evaluated through
//! the CDF substitution `p = P_{0x}`, which absorbs the density and maps the
//! tail onto the finite interval `[0, P_{0a}]`:
//!
//! ```text
//! ∫_a^∞ rho_0(x) g(x) dx = ∫_0^{P_{0a}} g(X(p)) dp
//! ```
//!
//! The panel touching `p = 0` is additionally graded (`p = P u^4`) so that
//! integrands growing like `ln(1/p)` (moments of `X`) stay smooth.

mod gauss;
mod normal;
mod root;

pub use normal::{log_normal_cdf, normal_cdf, normal_pdf};
pub use root::{find_root_monotone, RootSpec};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use gauss::GaussRule;

/// Default Gauss–Hermite node count for Gaussian expectations.
pub const HERMITE_NODES: usize = 200;
const HERMITE_DOUBLINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Bisection depth; 0 applies the rule once with no error control.
    pub max_levels: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 256,
            max_levels: 8,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    /// Fixed 64-node rule without refinement, for inner loops of path
    /// simulation where the integrands are smooth and cost dominates.
    pub fn coarse() -> Self {
        Self {
            nodes: 64,
            max_levels: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::domain(format!("quadrature needs at least 16 nodes, got {}", self.nodes)));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        Ok(())
    }
}

struct Adaptive<'a> {
    rule: &'a GaussRule,
    max_levels: u32,
    rel_tol: f64,
    abs_tol: f64,
}

impl Adaptive<'_> {
    fn run<const N: usize, F>(&self, f: &mut F, a: f64, b: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> [f64; N],
    {
        let whole = self.rule.apply(f, a, b);
        if self.max_levels == 0 {
            return Ok(whole);
        }
        self.refine(f, a, b, whole, 1)
    }

    fn refine<const N: usize, F>(&self, f: &mut F, a: f64, b: f64, whole: [f64; N], level: u32) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> [f64; N],
    {
        let mid = 0.5 * (a + b);
        let left = self.rule.apply(f, a, mid);
        let right = self.rule.apply(f, mid, b);
        let mut sum = [0.0; N];
        let mut err = 0.0_f64;
        let mut scale = 0.0_f64;
        for k in 0..N {
            sum[k] = left[k] + right[k];
            err = err.max((sum[k] - whole[k]).abs());
            scale = scale.max(sum[k].abs());
        }
        if err.is_nan() {
            return Err(Error::Quadrature { previous: whole[0], last: sum[0] });
        }
        if err <= self.abs_tol.max(self.rel_tol * scale) {
            return Ok(sum);
        }
        if level >= self.max_levels {
            return Err(Error::Quadrature { previous: whole[0], last: sum[0] });
        }
        let l = self.refine(f, a, mid, left, level + 1)?;
        let r = self.refine(f, mid, b, right, level + 1)?;
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = l[k] + r[k];
        }
        Ok(out)
    }
}

/// Adaptive Gauss–Legendre integral of a vector-valued integrand over
/// `[a, b]`; all components share the node evaluations.
pub fn integrate_vec<const N: usize, F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    spec.validate()?;
    if a == b {
        return Ok([0.0; N]);
    }
    let rule = gauss::legendre(spec.nodes);
    let adaptive = Adaptive {
        rule: &rule,
        max_levels: spec.max_levels,
        rel_tol: spec.rel_tol,
        abs_tol: spec.abs_tol,
    };
    let out = adaptive.run(&mut f, a, b)?;
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::Quadrature { previous: f64::NAN, last: f64::NAN });
    }
    Ok(out)
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x| [f(x)], a, b, spec).map(|[v]| v)
}

/// `∫_lower^∞ rho_0(x) g(x) dx` for every `lower` in `lowers` (ascending).
///
/// The tail is cut into panels at the requested lower limits (and at any
/// curve knots in between), each panel integrated in `p`-space, and the
/// results accumulated from the far end.
pub fn tail_integrals<const N: usize, G>(
    mut g: G,
    curve: &DiscountCurve,
    lowers: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<[f64; N]>>
where
    G: FnMut(f64) -> [f64; N],
{
    if lowers.is_empty() {
        return Ok(Vec::new());
    }
    if lowers.windows(2).any(|w| w[1] < w[0]) || lowers[0] < 0.0 {
        return Err(Error::domain("tail lower limits must be nonnegative and ascending"));
    }
    let mut bad_quantile = false;
    let mut integrand = |p: f64| {
        let x = curve.quantile_unchecked(p);
        if x.is_nan() {
            bad_quantile = true;
            return [0.0; N];
        }
        g(x)
    };

    let k = lowers.len();
    let mut out = vec![[0.0; N]; k];
    // Far tail beyond the last knot, graded towards p = 0; knot-to-knot
    // panels in between.
    let far_knots = curve.knots_between(lowers[k - 1], f64::INFINITY);
    let far_start = far_knots.last().copied().unwrap_or(lowers[k - 1]);
    let p_last = curve.discount_unchecked(far_start);
    let mut acc = if p_last > 0.0 {
        integrate_vec(
            |u: f64| {
                let u3 = u * u * u;
                let mut v = integrand(p_last * u3 * u);
                let jac = 4.0 * p_last * u3;
                for c in v.iter_mut() {
                    *c *= jac;
                }
                v
            },
            0.0,
            1.0,
            spec,
        )?
    } else {
        [0.0; N]
    };
    let mut cuts = vec![lowers[k - 1]];
    cuts.extend(far_knots);
    for w in cuts.windows(2).rev() {
        let panel = integrate_vec(
            &mut integrand,
            curve.discount_unchecked(w[1]),
            curve.discount_unchecked(w[0]),
            spec,
        )?;
        for c in 0..N {
            acc[c] += panel[c];
        }
    }
    out[k - 1] = acc;
    for i in (0..k - 1).rev() {
        let mut cuts = vec![lowers[i]];
        cuts.extend(curve.knots_between(lowers[i], lowers[i + 1]));
        cuts.push(lowers[i + 1]);
        for w in cuts.windows(2).rev() {
            let p_hi = curve.discount_unchecked(w[0]);
            let p_lo = curve.discount_unchecked(w[1]);
            let panel = integrate_vec(&mut integrand, p_lo, p_hi, spec)?;
            for c in 0..N {
                acc[c] += panel[c];
            }
        }
        out[i] = acc;
    }
    if bad_quantile {
        return Err(Error::Horizon("curve inverse failed inside a tail integral".into()));
    }
    Ok(out)
}

/// Precomputed composite Gauss–Legendre nodes for the tails beyond a fixed
/// set of lower limits, for integrands evaluated many times (one per Monte
/// Carlo draw) against the same curve.
///
/// Nodes are stored in maturity space with `rho_0` absorbed in the weights,
/// ordered from the far end inwards.
#[derive(Debug, Clone)]
pub struct TailRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `ends[i]`: node count covering `[lowers[i], ∞)`.
    ends: Vec<usize>,
}

impl TailRule {
    /// `nodes` Gauss–Legendre points on each of `pieces` equal sub-panels of
    /// every panel.
    pub fn new(curve: &DiscountCurve, lowers: &[f64], nodes: usize, pieces: usize) -> Result<Self> {
        if lowers.is_empty() || lowers.windows(2).any(|w| w[1] < w[0]) || lowers[0] < 0.0 {
            return Err(Error::domain("tail lower limits must be nonempty, nonnegative and ascending"));
        }
        if nodes < 2 || pieces == 0 {
            return Err(Error::domain("tail rule needs at least two nodes and one piece"));
        }
        let rule = gauss::legendre(nodes);
        let mut out = Self { nodes: Vec::new(), weights: Vec::new(), ends: vec![0; lowers.len()] };
        let push = |out: &mut Self, p: f64, w: f64| -> Result<()> {
            let x = curve.quantile_unchecked(p);
            if x.is_nan() {
                return Err(Error::Horizon("curve inverse failed while building a tail rule".into()));
            }
            out.nodes.push(x);
            out.weights.push(w);
            Ok(())
        };
        let k = lowers.len();
        let far_knots = curve.knots_between(lowers[k - 1], f64::INFINITY);
        let far_start = far_knots.last().copied().unwrap_or(lowers[k - 1]);
        let p_last = curve.discount_unchecked(far_start);
        if p_last > 0.0 {
            for j in 0..pieces {
                let (a, b) = (j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let u = mid + half * y;
                    let u3 = u * u * u;
                    push(&mut out, p_last * u3 * u, half * w * 4.0 * p_last * u3)?;
                }
            }
        }
        let panel = |out: &mut Self, x_lo: f64, x_hi: f64| -> Result<()> {
            let (p_lo, p_hi) = (curve.discount_unchecked(x_hi), curve.discount_unchecked(x_lo));
            for j in 0..pieces {
                let a = p_lo + (p_hi - p_lo) * j as f64 / pieces as f64;
                let b = p_lo + (p_hi - p_lo) * (j + 1) as f64 / pieces as f64;
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
                    push(out, mid + half * y, half * w)?;
                }
            }
            Ok(())
        };
        let mut cuts = vec![lowers[k - 1]];
        cuts.extend(far_knots);
        for w in cuts.windows(2).rev() {
            panel(&mut out, w[0], w[1])?;
        }
        out.ends[k - 1] = out.nodes.len();
        for i in (0..k - 1).rev() {
            let mut cuts = vec![lowers[i]];
            cuts.extend(curve.knots_between(lowers[i], lowers[i + 1]));
            cuts.push(lowers[i + 1]);
            for w in cuts.windows(2).rev() {
                if w[1] > w[0] {
                    panel(&mut out, w[0], w[1])?;
                }
            }
            out.ends[i] = out.nodes.len();
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maturities at which integrands are evaluated.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `∫_{lowers[i]}^∞ rho_0 g` for every lower limit, from node values
    /// `values[j] = g(nodes[j])`.
    pub fn integrate_values(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ends.len());
        let mut acc = 0.0;
        let mut j = 0;
        for &end in self.ends.iter().rev() {
            while j < end {
                acc += self.weights[j] * values[j];
                j += 1;
            }
            out.push(acc);
        }
        out.reverse();
        out
    }

    pub fn integrate<G: FnMut(f64) -> f64>(&self, mut g: G) -> Vec<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| g(x)).collect();
        self.integrate_values(&values)
    }
}

/// `∫_lower^∞ rho_0(x) g(x) dx` via the CDF change of variable.
pub fn integrate_tail<G>(mut g: G, curve: &DiscountCurve, lower: f64, spec: &QuadratureSpec) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    if !(lower >= 0.0) {
        return Err(Error::domain(format!("tail lower limit must be >= 0, got {lower}")));
    }
    let v = tail_integrals(|x| [g(x)], curve, &[lower], spec)?;
    Ok(v[0][0])
}

/// `E[h(Z)]` for `Z ~ N(mean, variance)`.
///
/// Gauss–Hermite with node doubling (200, 400, 800, 1600) until successive
/// estimates agree; if they never do (kinked integrands such as clipped
/// payoffs), falls back to adaptive Gauss–Legendre on the standardised
/// line, which localises the kink by bisection.
pub fn integrate_gaussian<H>(mut h: H, mean: f64, variance: f64, spec: &QuadratureSpec) -> Result<f64>
where
    H: FnMut(f64) -> f64,
{
    integrate_gaussian_scaled(|x| (h(x), 0.0), mean, variance, spec)
}

/// As [`integrate_gaussian`] for an integrand given as `(m, s)` with value
/// `m e^s`. The scale is merged with the Gaussian weight before
/// exponentiating, so integrands growing like `e^{z^2/2}` stay finite.
pub fn integrate_gaussian_scaled<H>(mut h: H, mean: f64, variance: f64, spec: &QuadratureSpec) -> Result<f64>
where
    H: FnMut(f64) -> (f64, f64),
{
    if !(variance > 0.0) {
        return Err(Error::domain(format!("gaussian variance must be > 0, got {variance}")));
    }
    spec.validate()?;
    let sd = variance.sqrt();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let estimate = |n: usize, h: &mut H| {
        let rule = gauss::hermite(n);
        let mut acc = 0.0;
        for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
            if w > 0.0 {
                let (m, sc) = h(mean + std::f64::consts::SQRT_2 * sd * y);
                if m != 0.0 {
                    acc += m * (w.ln() + sc).exp();
                }
            }
        }
        acc * inv_sqrt_pi
    };
    let mut n = HERMITE_NODES;
    let mut prev = estimate(n, &mut h);
    for _ in 0..HERMITE_DOUBLINGS {
        n *= 2;
        let next = estimate(n, &mut h);
        if (next - prev).abs() <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    adaptive_gaussian(h, mean, variance, spec)
}

/// Adaptive Gauss–Legendre evaluation of `E[h(Z)]`, `Z ~ N(mean, variance)`,
/// over `mean ± 40 sd` split into unit panels of the standardised variable.
pub fn integrate_gaussian_adaptive<H>(mut h: H, mean: f64, variance: f64, spec: &QuadratureSpec) -> Result<f64>
where
    H: FnMut(f64) -> f64,
{
    adaptive_gaussian(|x| (h(x), 0.0), mean, variance, spec)
}

fn adaptive_gaussian<H>(mut h: H, mean: f64, variance: f64, spec: &QuadratureSpec) -> Result<f64>
where
    H: FnMut(f64) -> (f64, f64),
{
    if !(variance > 0.0) {
        return Err(Error::domain(format!("gaussian variance must be > 0, got {variance}")));
    }
    const HALF_WIDTH: i32 = 40;
    let sd = variance.sqrt();
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI).ln();
    let panel_spec = QuadratureSpec {
        nodes: 32,
        max_levels: spec.max_levels.max(40),
        rel_tol: spec.rel_tol,
        abs_tol: spec.abs_tol,
    };
    // Panels are judged against an absolute floor tied to the running total
    // so that far-tail panels with negligible mass do not force refinement.
    let mut total = 0.0_f64;
    let mut panels: Vec<(f64, f64)> = (-HALF_WIDTH..HALF_WIDTH).map(|k| (k as f64, k as f64 + 1.0)).collect();
    // central panels first so the floor is set by the bulk
    panels.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    for (a, b) in panels {
        let floor = spec.abs_tol.max(spec.rel_tol * total.abs() * 1e-2);
        let s = QuadratureSpec { abs_tol: floor, ..panel_spec };
        total += integrate(
            |z| {
                let (m, sc) = h(mean + sd * z);
                if m == 0.0 {
                    0.0
                } else {
                    m * (sc + ln_norm - 0.5 * z * z).exp()
                }
            },
            a,
            b,
            &s,
        )?;
    }
    Ok(total)
}
