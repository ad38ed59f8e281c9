//! Gauss–Legendre and Gauss–Hermite rules, computed once per node count
//! and cached for the lifetime of the process.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Applies the rule (defined on [-1, 1]) to `f` over [a, b].
    pub fn apply<const N: usize, F>(&self, f: &mut F, a: f64, b: f64) -> [f64; N]
    where
        F: FnMut(f64) -> [f64; N],
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; N];
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * z);
            for k in 0..N {
                acc[k] += w * v[k];
            }
        }
        for v in acc.iter_mut() {
            *v *= half;
        }
        acc
    }
}

type RuleCache = Mutex<HashMap<usize, Arc<GaussRule>>>;

fn cached(cache: &'static OnceLock<RuleCache>, n: usize, build: fn(usize) -> GaussRule) -> Arc<GaussRule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
}

pub fn legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_legendre)
}

/// Physicists' Hermite rule: `∫ e^{-y²} f(y) dy ≈ Σ w_i f(y_i)`.
pub fn hermite(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_hermite)
}

fn build_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

fn build_hermite(n: usize) -> GaussRule {
    // pi^{-1/4}
    const PIM4: f64 = 0.751_125_544_464_942_5;
    // Orthonormal recurrence values grow like e^{z^2/2}; they are kept
    // rescaled and the scale is tracked in log space.
    const RESCALE: f64 = 1e100;

    // Jacobi matrix has zero diagonal and off-diagonal sqrt(k/2). Roots are
    // isolated by Sturm counts, which unlike Newton from asymptotic guesses
    // cannot skip to a neighbouring root.
    let below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = -x;
        for k in 0..n {
            if k > 0 {
                q = -x - (k as f64 / 2.0) / q;
            }
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let upper = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let log_derivative = |z: f64| -> f64 {
        let mut p1 = PIM4;
        let mut p2 = 0.0;
        let mut log_scale = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            if p1.abs() > RESCALE {
                p1 /= RESCALE;
                p2 /= RESCALE;
                log_scale += RESCALE.ln();
            }
        }
        ((2.0 * n as f64).sqrt() * p2).abs().ln() + log_scale
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // ascending index k holds the root with exactly k roots below it
    for k in n / 2..n {
        let (mut lo, mut hi) = (0.0_f64, upper);
        while hi - lo > 1e-15 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z = if n % 2 == 1 && k == n / 2 { 0.0 } else { 0.5 * (lo + hi) };
        let w = (2.0_f64.ln() - 2.0 * log_derivative(z)).exp();
        nodes[k] = z;
        weights[k] = w;
        nodes[n - 1 - k] = -z;
        weights[n - 1 - k] = w;
    }
    GaussRule { nodes, weights }
}
