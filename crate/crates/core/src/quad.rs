//! Quadrature: adaptive Gauss–Kronrod integration and tabulated tail
//! integrals on geometric panels.
//!
//! The adaptive integrator is a global-error-control bisection scheme
//! over a heap of subintervals using the 21-point Kronrod extension of
//! the 10-point Gauss rule. [`LogTail`] precomputes `∫_Ω^∞ f(u) du`
//! for a positive integrand with power-law behaviour at small `u`, so
//! that fixed-point solvers can evaluate it for many cutoffs `Ω`
//! without re-integrating.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_99,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Weights of the embedded 10-point Gauss rule at XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

/// Adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_segments: 20_000,
        }
    }
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_points(f, &[a, b])
    }

    /// Integrate over consecutive segments `points[0]..points[1]..` with
    /// global error control. The points must be non-decreasing.
    pub fn integrate_points<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        if points.len() < 2 {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let (value, error) = gk21(&f, a, b);
            evaluations += 21;
            heap.push(Segment { a, b, value, error });
        }
        loop {
            let (total, err) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            if !total.is_finite() {
                return Err(Error::Convergence("non-finite integrand".into()));
            }
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= tol || heap.is_empty() {
                return Ok(Estimate {
                    value: total,
                    error: err,
                    evaluations,
                });
            }
            if heap.len() >= self.max_segments {
                return Err(Error::Convergence(format!(
                    "quadrature did not reach tolerance: value {total:.6e}, error {err:.3e}"
                )));
            }
            let worst = heap.pop().expect("non-empty heap");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // Interval cannot be split further in floating point.
                heap.push(Segment { error: 0.0, ..worst });
                continue;
            }
            let (v1, e1) = gk21(&f, worst.a, mid);
            let (v2, e2) = gk21(&f, mid, worst.b);
            evaluations += 42;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
    }

    /// Integrate `f` over `[a, ∞)`. `breaks` are interior points (in
    /// increasing order, all `> a`) where the integrand changes scale;
    /// the region beyond the last one is mapped onto a finite interval.
    pub fn integrate_to_inf<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        let mut points = vec![a];
        points.extend(breaks.iter().copied().filter(|&x| x > a));
        let finite = self.integrate_points(&f, &points)?;
        let b = *points.last().expect("at least one point");
        let tail = self.integrate(
            |t: f64| {
                let one_minus = 1.0 - t;
                if one_minus <= 0.0 {
                    return 0.0;
                }
                let x = b + t / one_minus;
                let v = f(x) / (one_minus * one_minus);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )?;
        Ok(Estimate {
            value: finite.value + tail.value,
            error: finite.error + tail.error,
            evaluations: finite.evaluations + tail.evaluations,
        })
    }
}

/// Points `lo, lo·r, lo·r², …` up to (excluding) `hi`, followed by `hi`.
pub fn geometric_points(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut x = lo * ratio;
    while x < hi {
        pts.push(x);
        x *= ratio;
    }
    pts.push(hi);
    pts
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const TAIL_NODES: usize = 16;

#[derive(Debug, Clone)]
struct Panel {
    t_lo: f64,
    t_hi: f64,
    // h(t) = f(e^t)·e^t at the Gauss nodes of the panel.
    values: Vec<f64>,
    // ∫ from the panel's lower edge to ∞.
    cumulative: f64,
}

/// Tabulated tail integral `Ω ↦ ∫_Ω^∞ f(u) du` for `Ω > 0`.
///
/// Panels are geometric with ratio 2 in `u` from `top` down to `floor`.
/// On each panel the integrand is sampled at Gauss–Legendre nodes in
/// `t = ln u`, where power laws become exponentials and polynomial
/// interpolation converges rapidly. Partial panels are integrated on the
/// barycentric interpolant. Below `floor` the integrand is continued as
/// the power law fitted to the lowest two nodes.
#[derive(Debug, Clone)]
pub struct LogTail {
    panels: Vec<Panel>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    above_top: f64,
    floor_fit: Option<(f64, f64)>,
}

impl LogTail {
    /// Build the table. `above_top` is `∫_top^∞ f`, supplied by the
    /// caller (zero for hard cutoffs).
    pub fn build<F>(f: F, floor: f64, top: f64, above_top: f64) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        use rayon::prelude::*;

        let (nodes, weights) = gauss_legendre(TAIL_NODES);
        let bary = barycentric_weights(&nodes);
        let ln2 = std::f64::consts::LN_2;
        let n_panels = ((top / floor).ln() / ln2).ceil().max(1.0) as usize;
        let t_top = top.ln();
        let mut panels: Vec<Panel> = (0..n_panels)
            .into_par_iter()
            .map(|j| {
                let t_hi = t_top - j as f64 * ln2;
                let t_lo = t_hi - ln2;
                let half = 0.5 * (t_hi - t_lo);
                let mid = 0.5 * (t_hi + t_lo);
                let values = nodes
                    .iter()
                    .map(|&x| {
                        let t = mid + half * x;
                        let u = t.exp();
                        f(u) * u
                    })
                    .collect();
                Panel {
                    t_lo,
                    t_hi,
                    values,
                    cumulative: 0.0,
                }
            })
            .collect();
        let mut acc = above_top;
        for p in panels.iter_mut() {
            let half = 0.5 * (p.t_hi - p.t_lo);
            let integral: f64 = p
                .values
                .iter()
                .zip(&weights)
                .map(|(v, w)| v * w)
                .sum::<f64>()
                * half;
            acc += integral;
            p.cumulative = acc;
        }
        let floor_fit = panels.last().and_then(|p| {
            let half = 0.5 * (p.t_hi - p.t_lo);
            let mid = 0.5 * (p.t_hi + p.t_lo);
            let (t0, t1) = (mid + half * nodes[0], mid + half * nodes[1]);
            let (h0, h1) = (p.values[0], p.values[1]);
            if h0 > 0.0 && h1 > 0.0 {
                // h(t) = f(u)·u ≈ c·u^(a+1)
                let slope = (h1 / h0).ln() / (t1 - t0);
                let c = h0 / (slope * t0).exp();
                Some((c, slope))
            } else {
                None
            }
        });
        Self {
            panels,
            nodes,
            weights,
            bary,
            above_top,
            floor_fit,
        }
    }

    pub fn floor(&self) -> f64 {
        self.panels.last().map_or(f64::INFINITY, |p| p.t_lo.exp())
    }

    pub fn top(&self) -> f64 {
        self.panels.first().map_or(0.0, |p| p.t_hi.exp())
    }

    /// `∫_Ω^∞ f(u) du`.
    pub fn tail(&self, omega: f64) -> f64 {
        if self.panels.is_empty() {
            return self.above_top;
        }
        let t = omega.ln();
        let t_top = self.panels[0].t_hi;
        if t >= t_top {
            // Above the table; callers only use this for a rough value.
            return self.above_top;
        }
        let ln2 = std::f64::consts::LN_2;
        let j = ((t_top - t) / ln2).floor() as usize;
        if j >= self.panels.len() {
            let last = self.panels.last().expect("non-empty");
            let below = match self.floor_fit {
                Some((c, s)) => {
                    // ∫ c·e^{s t'} dt' from t to the floor
                    if s == 0.0 {
                        c * (last.t_lo - t)
                    } else {
                        c / s * (s * t).exp() * (s * (last.t_lo - t)).exp_m1()
                    }
                }
                None => 0.0,
            };
            return last.cumulative + below;
        }
        let p = &self.panels[j];
        let above = if j == 0 {
            self.above_top
        } else {
            self.panels[j - 1].cumulative
        };
        above + self.partial(p, t, p.t_hi)
    }

    fn partial(&self, p: &Panel, from: f64, to: f64) -> f64 {
        if to <= from {
            return 0.0;
        }
        let half = 0.5 * (p.t_hi - p.t_lo);
        let mid = 0.5 * (p.t_hi + p.t_lo);
        let sub_half = 0.5 * (to - from);
        let sub_mid = 0.5 * (to + from);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = sub_mid + sub_half * x;
            let xi = (t - mid) / half;
            sum += w * barycentric_eval(&self.nodes, &self.bary, &p.values, xi);
        }
        sum * sub_half
    }
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

fn barycentric_eval(nodes: &[f64], w: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let d = x - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let c = w[j] / d;
        num += c * values[j];
        den += c;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert_relative_eq!(m, 2.0 / 31.0, epsilon = 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = Integrator::default()
            .integrate(|x: f64| x.powf(-0.5), 0.0, 1.0)
            .unwrap();
        assert_relative_eq!(est.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        // ∫_0^∞ x² e^{-x} dx = 2
        let est = Integrator::default()
            .integrate_to_inf(|x: f64| x * x * (-x).exp(), 0.0, &[1.0, 10.0])
            .unwrap();
        assert_relative_eq!(est.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn log_tail_matches_closed_form_power_law() {
        // f(u) = u^{-1.5} e^{-u}: compare with direct adaptive quadrature.
        let f = |u: f64| u.powf(-1.5) * (-u).exp();
        let top = 64.0;
        let above = Integrator::default()
            .integrate_to_inf(f, top, &[])
            .unwrap()
            .value;
        let table = LogTail::build(f, 1e-12, top, above);
        for &omega in &[1e-14, 3.3e-9, 1e-4, 0.37, 5.0, 40.0] {
            let mut pts = geometric_points(omega, top, 2.0);
            pts.dedup();
            let direct = Integrator::default()
                .integrate_to_inf(f, omega, &pts[1..])
                .unwrap()
                .value;
            assert_relative_eq!(table.tail(omega), direct, max_relative = 1e-9);
        }
    }
}
