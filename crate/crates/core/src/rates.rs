//! Thermalization rates between the two search states.
//!
//! In the coherent regime the golden rule gives the one- and two-boson
//! rates between dressed eigenstates split by `Δ̃`. In the incoherent
//! regime the rate is second order in the bare tunneling,
//! `Γ(ε) = (Δ/2)² ∫ dt e^{iεt − W(t)}`, with the displacement correlator
//!
//! ```text
//! W(t) = 4 ∫₀^∞ dω J(ω)/ω² [(1 − cos ωt) coth(ω/2T) + i sin ωt].
//! ```
//!
//! With this sign `Γ(ε)/Γ(−ε) = e^{ε/T}`, i.e. `ε > 0` is relaxation
//! into the lower state.

use std::f64::consts::PI;

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, CutoffForm, DiscretizedBath};
use crate::error::{domain, Error, Result};
use crate::fit::{scaling_fit, ExponentFit};
use crate::quad::{gauss_legendre, Integrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    GoldenSingle,
    GoldenTwo,
    IncoherentPolaron,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateDiagnostics {
    /// Length of the time window (incoherent rate only).
    pub window: f64,
    /// `e^{−Re W}` at the end of the window, or the quadrature error
    /// estimate for the golden-rule rates.
    pub truncation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub gamma: f64,
    pub method: RateMethod,
    pub diagnostics: RateDiagnostics,
}

fn check_delta_tilde(delta_tilde: f64) -> Result<()> {
    if delta_tilde > 0.0 && delta_tilde.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "golden-rule rates need Δ̃ > 0 (coherent regime), got {delta_tilde}"
        )))
    }
}

/// `Γ₁ = 2π J(Δ̃)`, optionally with stimulated emission `(1 + N(Δ̃))`.
pub fn golden_rule_single(delta_tilde: f64, bath: &BathSpec, stimulated: bool) -> Result<RateResult> {
    bath.validate()?;
    check_delta_tilde(delta_tilde)?;
    let mut gamma = 2.0 * PI * bath.j(delta_tilde);
    if stimulated {
        gamma *= 1.0 + bath.n(delta_tilde);
    }
    Ok(RateResult {
        gamma,
        method: RateMethod::GoldenSingle,
        diagnostics: RateDiagnostics::default(),
    })
}

/// `Γ₂ = (2π/E²) ∫₀^Δ̃ dω J(ω) J(Δ̃ − ω)`.
pub fn golden_rule_two(delta_tilde: f64, bath: &BathSpec) -> Result<RateResult> {
    bath.validate()?;
    check_delta_tilde(delta_tilde)?;
    if bath.alpha == 0.0 {
        return Ok(RateResult {
            gamma: 0.0,
            method: RateMethod::GoldenTwo,
            diagnostics: RateDiagnostics::default(),
        });
    }
    let f = |w: f64| bath.j(w) * bath.j(delta_tilde - w);
    // Symmetric about Δ̃/2.
    let mut pts = vec![0.0, 0.5 * delta_tilde];
    if bath.cutoff == CutoffForm::Hard && delta_tilde > bath.omega_c {
        let x = delta_tilde - bath.omega_c;
        if x < 0.5 * delta_tilde {
            pts.insert(1, x);
        }
    }
    let est = Integrator {
        rel_tol: 1e-13,
        ..Integrator::default()
    }
    .integrate_points(f, &pts)?;
    let pre = 2.0 * PI / (bath.e * bath.e);
    Ok(RateResult {
        gamma: pre * 2.0 * est.value,
        method: RateMethod::GoldenTwo,
        diagnostics: RateDiagnostics {
            window: 0.0,
            truncation: pre * 2.0 * est.error,
        },
    })
}

/// `W(t)` by quadrature over the bath spectrum.
pub fn polaron_correlator_exponent(bath: &BathSpec, t: f64) -> Result<Complex<f64>> {
    bath.validate()?;
    if !t.is_finite() {
        return Err(domain(format!("time must be finite, got {t}")));
    }
    if t == 0.0 || bath.alpha == 0.0 {
        return Ok(Complex::new(0.0, 0.0));
    }
    let tt = t.abs();
    let top = bath.spectral_top();
    let period = 2.0 * PI / tt;
    let mut pts = vec![0.0];
    let first = period.min(top);
    let mut x = 1e-8 * first;
    while x < first {
        pts.push(x);
        x *= 4.0;
    }
    let mut k = 1.0;
    while k * period < top {
        pts.push(k * period);
        k += 1.0;
    }
    pts.extend(bath.scales().into_iter().filter(|&s| s < top));
    pts.push(top);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let integ = Integrator {
        rel_tol: 1e-10,
        abs_tol: 1e-14,
        max_segments: 200_000,
    };
    let re_f = |w: f64| {
        let s = (0.5 * w * tt).sin();
        bath.j(w) / (w * w) * 2.0 * s * s * bath.coth(w)
    };
    let im_f = |w: f64| bath.j(w) / (w * w) * (w * tt).sin();
    let mut re = integ.integrate_points(re_f, &pts)?.value;
    let mut im = integ.integrate_points(im_f, &pts)?.value;
    if bath.cutoff == CutoffForm::Exponential {
        re += integ.integrate_to_inf(re_f, top, &[])?.value;
        im += integ.integrate_to_inf(im_f, top, &[])?.value;
    }
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    Ok(Complex::new(4.0 * re, 4.0 * sign * im))
}

/// `W(t)` as a sum over discrete modes, `4 Σ g_k²/ω_k² [...]`.
pub fn polaron_correlator_mode_sum(modes: &DiscretizedBath, bath: &BathSpec, t: f64) -> Complex<f64> {
    let (mut re, mut im) = (0.0, 0.0);
    for (&w, &g) in modes.omegas.iter().zip(&modes.couplings) {
        let c = g * g / (w * w);
        let s = (0.5 * w * t).sin();
        re += c * 2.0 * s * s * bath.coth(w);
        im += c * (w * t).sin();
    }
    Complex::new(4.0 * re, 4.0 * im)
}

const WINDOW_DECAY: f64 = 1e-12;
const MAX_WINDOW_OMEGA_C: f64 = 4096.0;
const PANEL_NODES: usize = 20;

/// Incoherent tunneling rate `(Δ/2)² · 2 Re ∫₀^∞ e^{iεt − W(t)} dt`.
pub fn incoherent_rate(delta: f64, epsilon: f64, bath: &BathSpec) -> Result<RateResult> {
    let window = decay_window(bath)?;
    incoherent_rate_window(delta, epsilon, bath, window)
}

/// Smallest window `2^k/ω_c` at whose end `e^{−Re W} < 1e-12`.
pub fn decay_window(bath: &BathSpec) -> Result<f64> {
    bath.validate()?;
    let mut t = 8.0 / bath.omega_c;
    loop {
        let w = polaron_correlator_exponent(bath, t)?;
        if (-w.re).exp() < WINDOW_DECAY {
            return Ok(t);
        }
        t *= 2.0;
        if t > MAX_WINDOW_OMEGA_C / bath.omega_c {
            return Err(Error::Convergence(format!(
                "correlator does not decay: e^(-Re W) = {:.3e} at t = {:.3e}",
                (-w.re).exp(),
                t / 2.0
            )));
        }
    }
}

/// As [`incoherent_rate`] on a prescribed window `[0, window]`.
pub fn incoherent_rate_window(
    delta: f64,
    epsilon: f64,
    bath: &BathSpec,
    window: f64,
) -> Result<RateResult> {
    bath.validate()?;
    if !(delta >= 0.0 && epsilon.is_finite() && window > 0.0) {
        return Err(domain("incoherent rate needs Δ ≥ 0, finite ε and a positive window"));
    }
    // Panels of half a period of max(|ε|, T) with 20 nodes each give at
    // least 40 nodes per period; they are also kept shorter than 1/ω_c to
    // resolve the short-time structure of W.
    let fastest = epsilon.abs().max(bath.temperature);
    let mut panel = 1.0 / bath.omega_c;
    if fastest > 0.0 {
        panel = panel.min(PI / fastest);
    }
    let n_panels = (window / panel).ceil() as usize;
    let h = window / n_panels as f64;
    let (x, wts) = gauss_legendre(PANEL_NODES);
    let nodes: Vec<(f64, f64)> = (0..n_panels)
        .flat_map(|p| {
            let a = p as f64 * h;
            x.iter()
                .zip(&wts)
                .map(move |(&xi, &wi)| (a + 0.5 * h * (xi + 1.0), 0.5 * h * wi))
        })
        .collect();
    let terms = nodes
        .par_iter()
        .map(|&(t, w)| {
            let wt = polaron_correlator_exponent(bath, t)?;
            Ok(w * (-wt.re).exp() * (epsilon * t - wt.im).cos())
        })
        .collect::<Result<Vec<f64>>>()?;
    let integral: f64 = terms.iter().sum();
    let end = polaron_correlator_exponent(bath, window)?;
    let gamma = (0.5 * delta).powi(2) * 2.0 * integral;
    Ok(RateResult {
        gamma: gamma.max(0.0),
        method: RateMethod::IncoherentPolaron,
        diagnostics: RateDiagnostics {
            window,
            truncation: (-end.re).exp(),
        },
    })
}

/// Which rate a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateRegime {
    Incoherent { epsilon: f64 },
    CoherentSingle { stimulated: bool },
    CoherentTwo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub rates: Vec<(u64, RateResult)>,
    pub fit: ExponentFit,
}

/// The rate at `Δ(N) = E0/√(N−1)` for every size, in input order.
pub fn rate_sweep(n_list: &[u64], bath: &BathSpec, regime: RateRegime) -> Result<Vec<(u64, RateResult)>> {
    bath.validate()?;
    if n_list.iter().any(|&n| n < 2) {
        return Err(domain("search-space sizes must be at least 2"));
    }
    // The polaron integral does not depend on Δ; compute it once.
    let unit = match regime {
        RateRegime::Incoherent { epsilon } => Some(incoherent_rate(1.0, epsilon, bath)?),
        _ => None,
    };
    n_list
        .par_iter()
        .map(|&n| {
            let delta = bath.e0 / ((n - 1) as f64).sqrt();
            let r = match regime {
                RateRegime::Incoherent { .. } => {
                    let u = unit.expect("computed above");
                    RateResult {
                        gamma: u.gamma * delta * delta,
                        ..u
                    }
                }
                RateRegime::CoherentSingle { stimulated } => golden_rule_single(delta, bath, stimulated)?,
                RateRegime::CoherentTwo => golden_rule_two(delta, bath)?,
            };
            Ok((n, r))
        })
        .collect()
}

/// [`rate_sweep`] plus the log-log slope against `N`.
pub fn rate_scaling_sweep(n_list: &[u64], bath: &BathSpec, regime: RateRegime) -> Result<RateSweep> {
    let rates = rate_sweep(n_list, bath, regime)?;
    let (ns, gs): (Vec<f64>, Vec<f64>) = rates.iter().map(|(n, r)| (*n as f64, r.gamma)).unzip();
    let fit = scaling_fit(&ns, &gs)?;
    Ok(RateSweep { rates, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize, Scheme};
    use approx::assert_relative_eq;

    #[test]
    fn single_rate_values() {
        let bath = BathSpec::new(0.1, 1.0, 0.0);
        let r = golden_rule_single(0.01, &bath, false).unwrap();
        assert_relative_eq!(r.gamma, 2.0 * PI * 1e-3, max_relative = 0.01);
        assert!(golden_rule_single(0.0, &bath, false).is_err());
        assert!(golden_rule_single(1e-300, &bath, false).unwrap().gamma < 1e-290);
        let warm = bath.with_temperature(0.05);
        let s = golden_rule_single(0.01, &warm, true).unwrap().gamma;
        assert_relative_eq!(s / r.gamma, 1.0 + warm.n(0.01), max_relative = 1e-14);
    }

    #[test]
    fn ohmic_zero_temperature_closed_form() {
        // W(t) = 4α[½ ln(1 + ω_c²t²) + i arctan(ω_c t)]
        let bath = BathSpec::new(0.3, 1.0, 0.0);
        for t in [0.1, 1.0, 7.5, 40.0] {
            let w = polaron_correlator_exponent(&bath, t).unwrap();
            assert_relative_eq!(w.re, 4.0 * 0.3 * 0.5 * (1.0 + t * t).ln(), max_relative = 1e-8);
            assert_relative_eq!(w.im, 4.0 * 0.3 * t.atan(), max_relative = 1e-8);
            let back = polaron_correlator_exponent(&bath, -t).unwrap();
            assert_eq!(back, w.conj());
        }
        assert_eq!(polaron_correlator_exponent(&bath, 0.0).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn mode_sum_agrees_at_short_times() {
        let bath = BathSpec::new(0.1, 2.0, 0.2);
        let modes = discretize(&bath, 10_000, Scheme::Linear).unwrap();
        for t in [0.5, 3.0, 10.0] {
            let a = polaron_correlator_exponent(&bath, t).unwrap();
            let b = polaron_correlator_mode_sum(&modes, &bath, t);
            assert_relative_eq!(a.re, b.re, max_relative = 0.01);
            assert_relative_eq!(a.im, b.im, max_relative = 0.01);
        }
    }

    #[test]
    fn incoherent_rate_is_quadratic_in_delta() {
        let bath = BathSpec::new(1.0, 1.0, 0.1);
        let a = incoherent_rate(0.01, 0.02, &bath).unwrap();
        let b = incoherent_rate(0.02, 0.02, &bath).unwrap();
        assert_relative_eq!(b.gamma / a.gamma, 4.0, max_relative = 1e-12);
        assert!(a.diagnostics.truncation < 1e-12);
    }

    #[test]
    fn detailed_balance() {
        let bath = BathSpec::new(1.0, 1.0, 0.1);
        let up = incoherent_rate(0.01, -0.05, &bath).unwrap().gamma;
        let down = incoherent_rate(0.01, 0.05, &bath).unwrap().gamma;
        assert_relative_eq!(down / up, (0.5f64).exp(), max_relative = 0.02);
    }

    #[test]
    fn window_doubling_is_stable() {
        let bath = BathSpec::new(0.8, 1.5, 0.2);
        let w = decay_window(&bath).unwrap();
        let a = incoherent_rate_window(0.01, 0.03, &bath, w).unwrap().gamma;
        let b = incoherent_rate_window(0.01, 0.03, &bath, 2.0 * w).unwrap().gamma;
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn real_part_grows_at_finite_temperature() {
        let bath = BathSpec::new(0.2, 0.7, 0.05);
        let mut last = 0.0;
        for k in 1..60 {
            let w = polaron_correlator_exponent(&bath, 0.5 * k as f64).unwrap().re;
            assert!(w >= last);
            last = w;
        }
    }

    #[test]
    fn weak_coupling_correlator_does_not_decay() {
        let bath = BathSpec::new(0.01, 3.0, 0.0);
        assert!(matches!(incoherent_rate(0.01, 0.0, &bath), Err(Error::Convergence(_))));
    }
}
