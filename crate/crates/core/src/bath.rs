//! Bosonic environment: power-law spectral density with a high-frequency
//! cutoff, thermal occupation, discretization into modes, and the
//! backaction renormalizations of the effective two-level Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::Integrator;

/// High-frequency behaviour of the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffForm {
    /// `J(ω) = α ωᵑ e^{−ω/ω_c}`
    #[default]
    Exponential,
    /// `J(ω) = α ωᵑ θ(ω_c − ω)`
    Hard,
}

/// Spectral density `J(ω) = α ωᵑ × cutoff`, temperature and the energy
/// scales of the effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub alpha: f64,
    pub eta: f64,
    pub omega_c: f64,
    #[serde(default)]
    pub cutoff: CutoffForm,
    pub temperature: f64,
    pub e0: f64,
    /// Virtual-level scale of the two-boson coupling.
    pub e: f64,
}

impl BathSpec {
    /// Spec with `E0 = 1`, `ω_c = E0`, `E = E0/2` and an exponential cutoff.
    pub fn new(alpha: f64, eta: f64, temperature: f64) -> Self {
        Self {
            alpha,
            eta,
            omega_c: 1.0,
            cutoff: CutoffForm::Exponential,
            temperature,
            e0: 1.0,
            e: 0.5,
        }
    }

    pub fn with_cutoff(mut self, omega_c: f64, cutoff: CutoffForm) -> Self {
        self.omega_c = omega_c;
        self.cutoff = cutoff;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_e(mut self, e: f64) -> Self {
        self.e = e;
        self
    }

    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(domain(format!("η must be positive, got {}", self.eta)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(domain(format!("α must be non-negative, got {}", self.alpha)));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(domain(format!("ω_c must be positive, got {}", self.omega_c)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(domain(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.e0 > 0.0 && self.e > 0.0) {
            return Err(domain(format!(
                "E0 and E must be positive, got {} and {}",
                self.e0, self.e
            )));
        }
        Ok(())
    }

    /// `J(ω)` without argument checks; zero for `ω ≤ 0`.
    #[inline]
    pub fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        match self.cutoff {
            CutoffForm::Exponential => {
                self.alpha * omega.powf(self.eta) * (-omega / self.omega_c).exp()
            }
            CutoffForm::Hard => {
                if omega <= self.omega_c {
                    self.alpha * omega.powf(self.eta)
                } else {
                    0.0
                }
            }
        }
    }

    /// Bose occupation without argument checks.
    #[inline]
    pub fn n(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            1.0 / (omega / self.temperature).exp_m1()
        }
    }

    /// `coth(ω/2T) = 1 + 2N(ω)`.
    #[inline]
    pub fn coth(&self, omega: f64) -> f64 {
        1.0 + 2.0 * self.n(omega)
    }

    /// Frequency above which `J` is negligible (exponential) or zero (hard).
    pub fn spectral_top(&self) -> f64 {
        match self.cutoff {
            CutoffForm::Exponential => 64.0 * self.omega_c,
            CutoffForm::Hard => self.omega_c,
        }
    }

    /// Characteristic frequencies where integrands change character.
    pub(crate) fn scales(&self) -> Vec<f64> {
        let mut s = vec![self.omega_c];
        if self.temperature > 0.0 {
            s.push(self.temperature);
        }
        s
    }

    /// `∫_lo^∞ f(ω) dω` for an integrand that carries a factor of `J`,
    /// with breakpoints on a geometric ladder from `lo` and at `T`, `ω_c`.
    pub(crate) fn spectral_integral<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lo: f64,
        integrator: &Integrator,
    ) -> Result<f64> {
        self.spectral_integral_upto(f, lo, self.spectral_top(), integrator)
    }

    /// As [`Self::spectral_integral`], for an integrand that vanishes above
    /// `top` for a hard cutoff and decays exponentially beyond it otherwise.
    pub(crate) fn spectral_integral_upto<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lo: f64,
        top: f64,
        integrator: &Integrator,
    ) -> Result<f64> {
        let tail = |from: f64| -> Result<f64> {
            match self.cutoff {
                CutoffForm::Hard => Ok(0.0),
                CutoffForm::Exponential => Ok(integrator.integrate_to_inf(&f, from, &[])?.value),
            }
        };
        if lo >= top {
            return tail(lo);
        }
        let min_scale = self.scales().into_iter().fold(f64::INFINITY, f64::min);
        let start = if lo > 0.0 { lo } else { 1e-8 * min_scale };
        let mut pts = vec![lo];
        let mut x = start;
        while x < top {
            if x > lo {
                pts.push(x);
            }
            x *= 4.0;
        }
        pts.extend(self.scales().into_iter().filter(|&s| s > lo && s < top));
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let head = integrator.integrate_points(&f, &pts)?.value;
        Ok(head + tail(top)?)
    }
}

pub fn spectral_density(spec: &BathSpec, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(domain(format!("frequency must be non-negative, got {omega}")));
    }
    Ok(spec.j(omega))
}

pub fn occupation(spec: &BathSpec, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(format!("occupation needs ω > 0, got {omega}")));
    }
    Ok(spec.n(omega))
}

/// `prefactor · ∫₀^∞ J(ω)/ω dω`. The effective-Hamiltonian derivation
/// uses `prefactor = 1/E0`, the renormalization analysis `4/E`.
pub fn backaction_a(spec: &BathSpec, prefactor: f64) -> Result<f64> {
    if !(spec.eta > 0.0) {
        return Err(domain(format!(
            "∫J/ω diverges at low frequency for η = {}",
            spec.eta
        )));
    }
    if spec.alpha == 0.0 {
        return Ok(0.0);
    }
    let integral = spec.spectral_integral(|w| spec.j(w) / w, 0.0, &Integrator::default())?;
    Ok(prefactor * integral)
}

/// Environment-induced bias `E0 a(3a − 2)/(4(1 − a)²)` for `a < 1`.
pub fn induced_bias_from_a(a: f64, e0: f64) -> Result<f64> {
    if a >= 1.0 {
        return Err(Error::Validity(format!(
            "backaction a = {a} ≥ 1: strong-coupling breakdown"
        )));
    }
    Ok(e0 * a * (3.0 * a - 2.0) / (4.0 * (1.0 - a).powi(2)))
}

pub fn induced_bias(spec: &BathSpec) -> Result<f64> {
    let a = backaction_a(spec, 1.0 / spec.e0)?;
    induced_bias_from_a(a, spec.e0)
}

/// `Ẽ = ((1 − a)/(1 − 2a))² E0` for `a < 1/2`.
pub fn renormalized_e(a: f64, e0: f64) -> Result<f64> {
    if a >= 0.5 {
        return Err(Error::Validity(format!(
            "backaction a = {a} ≥ 1/2: two-boson scale is singular"
        )));
    }
    Ok(((1.0 - a) / (1.0 - 2.0 * a)).powi(2) * e0)
}

/// Weak-coupling diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// `max_ω J(ω)/E0`
    pub max_j_over_e0: f64,
    /// `max_ω J(ω)(1 + N(ω))/E`
    pub max_jn_over_e: f64,
    /// `lim_{ω→0} J(ω)N(ω)/E`: `αT/E` for ohmic baths, 0 for
    /// super-ohmic ones, unbounded for sub-ohmic ones at `T > 0`.
    pub low_frequency_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn validity_check(spec: &BathSpec, threshold: f64) -> Validity {
    if spec.alpha == 0.0 {
        return Validity {
            max_j_over_e0: 0.0,
            max_jn_over_e: 0.0,
            low_frequency_ratio: 0.0,
            threshold,
            pass: 0.0 <= threshold,
        };
    }
    let max_j = match spec.cutoff {
        CutoffForm::Exponential => {
            let w = spec.eta * spec.omega_c;
            spec.alpha * w.powf(spec.eta) * (-spec.eta).exp()
        }
        CutoffForm::Hard => spec.alpha * spec.omega_c.powf(spec.eta),
    };
    let low = if spec.temperature == 0.0 || spec.eta > 1.0 {
        0.0
    } else if spec.eta == 1.0 {
        spec.alpha * spec.temperature / spec.e
    } else {
        f64::INFINITY
    };
    // J(1+N) is unimodal in ln ω apart from the low-frequency limit.
    let g = |w: f64| spec.j(w) * (1.0 + spec.n(w)) / spec.e;
    let top = spec.spectral_top();
    let lo = 1e-12 * top;
    let steps = 600;
    let ratio = (top / lo).powf(1.0 / steps as f64);
    let mut best = (lo, g(lo));
    let mut w = lo;
    for _ in 0..=steps {
        let v = g(w);
        if v > best.1 {
            best = (w, v);
        }
        w *= ratio;
    }
    let (mut a, mut b) = ((best.0 / ratio).ln(), (best.0 * ratio).min(top).ln());
    for _ in 0..80 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1.exp()) < g(m2.exp()) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let max_jn = best.1.max(g((0.5 * (a + b)).exp())).max(low);
    let max_j_over_e0 = max_j / spec.e0;
    Validity {
        max_j_over_e0,
        max_jn_over_e: max_jn,
        low_frequency_ratio: low,
        threshold,
        pass: max_j_over_e0 <= threshold && max_jn <= threshold,
    }
}

/// Frequency grid used to discretize the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Linear,
    Logarithmic,
}

/// Finite set of modes with `g_k² = J(ω_k) Δω_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    pub omegas: Vec<f64>,
    pub couplings: Vec<f64>,
}

impl DiscretizedBath {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `Σ_k g_k² f(ω_k)`
    pub fn mode_sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.omegas
            .iter()
            .zip(&self.couplings)
            .map(|(&w, &g)| g * g * f(w))
            .sum()
    }
}

/// Discretize on `[0, 20·max(T, ω_c)]` (linear, midpoint rule) or on six
/// decades below that upper edge (logarithmic).
pub fn discretize(spec: &BathSpec, n_modes: usize, scheme: Scheme) -> Result<DiscretizedBath> {
    let w_max = 20.0 * spec.temperature.max(spec.omega_c);
    let w_min = match scheme {
        Scheme::Linear => 0.0,
        Scheme::Logarithmic => w_max * 1e-6,
    };
    discretize_range(spec, n_modes, scheme, w_min, w_max)
}

pub fn discretize_range(
    spec: &BathSpec,
    n_modes: usize,
    scheme: Scheme,
    w_min: f64,
    w_max: f64,
) -> Result<DiscretizedBath> {
    if n_modes < 2 {
        return Err(domain(format!("need at least 2 modes, got {n_modes}")));
    }
    if !(w_max > w_min && w_min >= 0.0) {
        return Err(domain(format!("invalid frequency range [{w_min}, {w_max}]")));
    }
    let (omegas, widths): (Vec<f64>, Vec<f64>) = match scheme {
        Scheme::Linear => {
            let h = (w_max - w_min) / n_modes as f64;
            (0..n_modes)
                .map(|k| (w_min + (k as f64 + 0.5) * h, h))
                .unzip()
        }
        Scheme::Logarithmic => {
            if w_min <= 0.0 {
                return Err(domain("logarithmic grid needs ω_min > 0"));
            }
            let ln_r = (w_max / w_min).ln() / (n_modes - 1) as f64;
            (0..n_modes)
                .map(|k| {
                    let w = w_min * (k as f64 * ln_r).exp();
                    (w, w * ln_r)
                })
                .unzip()
        }
    };
    let couplings = omegas
        .iter()
        .zip(&widths)
        .map(|(&w, &dw)| (spec.j(w) * dw).sqrt())
        .collect();
    Ok(DiscretizedBath { omegas, couplings })
}

/// Mode parameters after diagonalizing the backaction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedModeParams {
    pub omegas_tilde: Vec<f64>,
    pub g_tilde: Vec<f64>,
    pub e_tilde: f64,
    pub a: f64,
    pub eps_tilde: f64,
}

/// Dressed frequencies `ω̃_k = ω_k − g_k²/(2E0)`, couplings `g̃_k` with the
/// first-order mode-mixing corrections, `Ẽ`, `a` and `ε̃`, all evaluated
/// on the discrete bath.
pub fn dressed_mode_params(bath: &DiscretizedBath, spec: &BathSpec) -> Result<DressedModeParams> {
    let e0 = spec.e0;
    let a = bath.mode_sum(|w| 1.0 / w) / e0;
    let e_tilde = renormalized_e(a, e0)?;
    let eps_tilde = induced_bias_from_a(a, e0)?;
    let w = &bath.omegas;
    let g = &bath.couplings;
    let omegas_tilde = w.iter().zip(g).map(|(w, g)| w - g * g / (2.0 * e0)).collect();
    let pre = (1.0 - 2.0 * a) / (1.0 - a);
    let g_tilde = (0..w.len())
        .map(|k| {
            let mut minus = 0.0;
            let mut plus = 0.0;
            for l in 0..w.len() {
                if l != k {
                    minus += g[l] / (w[k] - w[l]);
                }
                plus += g[l] / (w[k] + w[l]);
            }
            let h = g[k] / (2.0 * e0);
            pre * (1.0 - h * minus + h * plus) * g[k] / 2.0
        })
        .collect();
    Ok(DressedModeParams {
        omegas_tilde,
        g_tilde,
        e_tilde,
        a,
        eps_tilde,
    })
}

/// The two sums controlling the size of the mode-mixing corrections,
/// `g_k²/(4E0²) Σ_{l≠k} g_l²/(ω_k − ω_l)²` and
/// `g_k²/(4E0²) Σ_l g_l²/(ω_k + ω_l)²`, per mode.
pub fn eigenvector_condition(bath: &DiscretizedBath, e0: f64) -> Vec<(f64, f64)> {
    let w = &bath.omegas;
    let g = &bath.couplings;
    (0..w.len())
        .map(|k| {
            let mut diff = 0.0;
            let mut sum = 0.0;
            for l in 0..w.len() {
                let gl2 = g[l] * g[l];
                if l != k {
                    diff += gl2 / (w[k] - w[l]).powi(2);
                }
                sum += gl2 / (w[k] + w[l]).powi(2);
            }
            let pre = g[k] * g[k] / (4.0 * e0 * e0);
            (pre * diff, pre * sum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn spectral_density_forms() {
        let spec = BathSpec::new(0.1, 1.0, 0.0).with_cutoff(1e300, CutoffForm::Hard);
        assert_relative_eq!(spectral_density(&spec, 2.0).unwrap(), 0.2);
        assert_eq!(spectral_density(&spec, 0.0).unwrap(), 0.0);
        let spec = BathSpec::new(0.1, 2.0, 0.0).with_cutoff(3.0, CutoffForm::Exponential);
        assert_relative_eq!(
            spectral_density(&spec, 3.0).unwrap(),
            0.1 * 9.0 * (-1f64).exp(),
            max_relative = 1e-15
        );
        assert!(spectral_density(&spec, -1.0).is_err());
        let hard = BathSpec::new(0.1, 2.0, 0.0).with_cutoff(3.0, CutoffForm::Hard);
        assert_eq!(hard.j(3.5), 0.0);
    }

    #[test]
    fn occupation_limits() {
        let cold = BathSpec::new(0.1, 1.0, 0.0);
        assert_eq!(occupation(&cold, 0.3).unwrap(), 0.0);
        let warm = BathSpec::new(0.1, 1.0, 0.2);
        assert_relative_eq!(occupation(&warm, 0.2).unwrap(), 0.581_976_706_869_326_4, epsilon = 1e-12);
        let w = 0.02 * 0.2;
        assert_relative_eq!(occupation(&warm, w).unwrap(), 0.2 / w, max_relative = 0.01);
        assert!(occupation(&warm, 0.0).is_err());
    }

    #[test]
    fn backaction_closed_forms() {
        let spec = BathSpec::new(0.05, 2.0, 0.0).with_cutoff(0.7, CutoffForm::Exponential);
        assert_relative_eq!(
            backaction_a(&spec, 1.0).unwrap(),
            0.05 * 0.49,
            max_relative = 1e-10
        );
        let spec = BathSpec::new(0.05, 1.0, 0.0).with_cutoff(0.7, CutoffForm::Hard);
        assert_relative_eq!(backaction_a(&spec, 1.0).unwrap(), 0.035, max_relative = 1e-10);
        let spec = BathSpec::new(0.05, 0.5, 0.3);
        assert_relative_eq!(
            backaction_a(&spec, 4.0 / spec.e).unwrap(),
            8.0 * 0.05 * gamma(0.5),
            max_relative = 1e-10
        );
        assert_eq!(backaction_a(&spec.with_alpha(0.0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn induced_bias_values() {
        assert_eq!(induced_bias_from_a(0.0, 1.0).unwrap(), 0.0);
        assert!(induced_bias_from_a(2.0 / 3.0, 1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(induced_bias_from_a(1.0 / 3.0, 2.0).unwrap(), -3.0 * 2.0 / 16.0, max_relative = 1e-14);
        assert!(matches!(induced_bias_from_a(1.0, 1.0), Err(Error::Validity(_))));
        let spec = BathSpec::new(0.01, 2.0, 0.0);
        let a = 0.01;
        assert_relative_eq!(
            induced_bias(&spec).unwrap(),
            a * (3.0 * a - 2.0) / (4.0 * (1.0 - a) * (1.0 - a)),
            max_relative = 1e-9
        );
    }

    #[test]
    fn validity_examples() {
        let v = validity_check(&BathSpec::new(0.0, 1.0, 0.3), 0.1);
        assert!(v.pass && v.max_j_over_e0 == 0.0 && v.max_jn_over_e == 0.0);
        let v = validity_check(&BathSpec::new(0.01, 1.0, 0.2), 0.1);
        assert_relative_eq!(v.low_frequency_ratio, 0.01 * 0.2 / 0.5);
        assert!(v.max_jn_over_e >= v.low_frequency_ratio);
        let v = validity_check(&BathSpec::new(10.0, 1.0, 0.0), 0.1);
        assert_relative_eq!(v.max_j_over_e0, 10.0 / std::f64::consts::E, max_relative = 1e-14);
        assert!(!v.pass);
        let sub = validity_check(&BathSpec::new(0.01, 0.5, 0.1), 0.1);
        assert!(sub.low_frequency_ratio.is_infinite() && !sub.pass);
    }

    #[test]
    fn max_jn_matches_dense_scan() {
        let spec = BathSpec::new(0.02, 2.0, 0.3);
        let v = validity_check(&spec, 0.1);
        let scan = (1..200_000)
            .map(|i| {
                let w = i as f64 * 1e-4;
                spec.j(w) * (1.0 + spec.n(w)) / spec.e
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(v.max_jn_over_e, scan, max_relative = 1e-6);
    }

    #[test]
    fn mode_sum_reproduces_integral() {
        let spec = BathSpec::new(0.1, 2.0, 0.0);
        let bath = discretize(&spec, 10_000, Scheme::Linear).unwrap();
        // ∫ α e^{−ω/ω_c} dω = α ω_c
        assert_relative_eq!(bath.mode_sum(|w| 1.0 / (w * w)), 0.1, max_relative = 0.01);
        let two = discretize(&spec, 2, Scheme::Linear).unwrap();
        assert_eq!(two.len(), 2);
        assert_relative_eq!(two.couplings[0].powi(2), spec.j(two.omegas[0]) * 10.0, max_relative = 1e-14);
        let log = discretize(&spec, 200, Scheme::Logarithmic).unwrap();
        assert_relative_eq!(log.omegas[0], 20.0 * 1e-6, max_relative = 1e-14);
        assert_relative_eq!(log.omegas[199] / log.omegas[0], 1e6, max_relative = 1e-12);
    }

    #[test]
    fn dressed_params_trivial_and_shift() {
        let spec = BathSpec::new(0.0, 1.0, 0.0);
        let bath = discretize(&spec, 50, Scheme::Linear).unwrap();
        let d = dressed_mode_params(&bath, &spec).unwrap();
        assert_eq!(d.omegas_tilde, bath.omegas);
        assert!(d.g_tilde.iter().all(|&g| g == 0.0));
        assert_eq!(d.e_tilde, 1.0);
        let spec = BathSpec::new(0.01, 1.0, 0.0);
        let mut prev = f64::INFINITY;
        for n in [100, 1000, 10_000] {
            let bath = discretize(&spec, n, Scheme::Linear).unwrap();
            let shift = bath
                .omegas
                .iter()
                .zip(&bath.couplings)
                .map(|(w, g)| w - (w - g * g / 2.0))
                .fold(0.0, f64::max);
            assert!(shift < prev);
            prev = shift;
        }
        let bath = discretize(&spec, 400, Scheme::Linear).unwrap();
        let d = dressed_mode_params(&bath, &spec).unwrap();
        assert!(d.e_tilde >= 1.0);
        for k in 0..bath.len() {
            let bound = bath.couplings[k].powi(2) / 2.0;
            assert!((d.omegas_tilde[k] - bath.omegas[k]).abs() <= bound + 4.0 * f64::EPSILON * bath.omegas[k]);
        }
        let strong = BathSpec::new(0.6, 1.0, 0.0);
        let bath = discretize(&strong, 400, Scheme::Linear).unwrap();
        assert!(matches!(dressed_mode_params(&bath, &strong), Err(Error::Validity(_))));
    }

    #[test]
    fn eigenvector_condition_continuum_limit() {
        let spec = BathSpec::new(0.05, 1.0, 0.0);
        let bath = discretize(&spec, 4000, Scheme::Linear).unwrap();
        let cond = eigenvector_condition(&bath, 1.0);
        for k in [400, 800, 1200] {
            let target = spec.j(bath.omegas[k]).powi(2);
            let r = cond[k].0 / target;
            assert!((0.5..=2.0).contains(&r), "mode {k}: ratio {r}");
        }
    }

    proptest! {
        #[test]
        fn detailed_balance(t in 1e-3f64..10.0, w in 1e-3f64..10.0) {
            let spec = BathSpec::new(0.1, 1.0, t);
            let n = spec.n(w);
            if w / t < 700.0 {
                prop_assert!(((n + 1.0) - (w / t).exp() * n).abs() <= 1e-12 * (n + 1.0));
            } else {
                prop_assert!((0.0..1e-300).contains(&n));
            }
        }

        #[test]
        fn e_tilde_identity(a in 0.0f64..0.49) {
            let e = renormalized_e(a, 1.7).unwrap();
            let back = e * (1.0 - 2.0 * a).powi(2) / (1.0 - a).powi(2);
            prop_assert!((back - 1.7).abs() <= 1e-12);
        }
    }
}
