//! Adiabatic renormalization of the tunneling rate.
//!
//! Bath modes faster than `Ω = p Δ̃` are eliminated, suppressing the bare
//! rate to `Δ̃ = Δ e^{−S}` where the exponent collects single-boson
//! displacements,
//!
//! ```text
//! S₁(Ω) = 2 ∫_Ω^∞ dω J(ω)/ω² coth(ω/2T),
//! ```
//!
//! and two-boson scattering (`φ`) and pair processes (`χ`),
//!
//! ```text
//! φ(Ω) = (8/E²) ∫∫_{|ω−ω'|>Ω} J(ω)J(ω')/(ω−ω')² N(ω)(1+N(ω')),
//! χ(Ω) = (4/E²) ∫∫_{ω+ω'>Ω}  J(ω)J(ω')/(ω+ω')² (1+N(ω)+N(ω')).
//! ```
//!
//! The prefactors come from `A_kl A_lk = 4 g_k²g_l²/((ω_k−ω_l)²E²)` and the
//! analogous `B_kl B_lk`. The double integrals are evaluated in rotated
//! coordinates: with `u = |ω − ω'|`,
//! `φ = (8/E²) ∫_Ω^∞ G(u)/u² du` where
//! `G(u) = ∫₀^∞ dw J(w)J(w+u)[N(w+u)(1+N(w)) + N(w)(1+N(w+u))]`, and with
//! `v = ω + ω'`, `χ = (4/E²) ∫_Ω^∞ H(v)/v dv` where
//! `H(v) = ∫₀¹ dx J(xv)J((1−x)v)[1 + N(xv) + N((1−x)v)]`.

use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, CutoffForm};
use crate::error::{domain, Error, Result};
use crate::quad::{Integrator, LogTail};

/// Which renormalization processes are included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Single,
    Two,
    Combined,
}

impl Process {
    fn single(self) -> bool {
        matches!(self, Process::Single | Process::Combined)
    }

    fn two(self) -> bool {
        matches!(self, Process::Two | Process::Combined)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Coherent,
    Incoherent,
}

/// Location of a coherent/incoherent transition along one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    /// Incoherent already at the lower end of the parameter range.
    Zero,
    Finite(f64),
    /// Coherent over the whole searched range.
    Unbounded,
}

impl Threshold {
    pub fn finite(self) -> Option<f64> {
        match self {
            Threshold::Finite(x) => Some(x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormInput {
    pub delta: f64,
    pub bath: BathSpec,
    pub p: f64,
}

impl RenormInput {
    pub fn new(delta: f64, bath: BathSpec) -> Self {
        Self {
            delta,
            bath,
            p: DEFAULT_P,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(domain(format!("Δ must be positive, got {}", self.delta)));
        }
        if !(self.p >= 2.0) {
            return Err(domain(format!("p must be at least 2, got {}", self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormResult {
    pub regime: Regime,
    pub delta_tilde: f64,
    /// `exp(−S₁(pΔ̃))` at the last iterate.
    pub factor_single: f64,
    /// `exp(−φ(pΔ̃) − χ(pΔ̃))` at the last iterate.
    pub factor_two: f64,
    pub iterations: usize,
    pub residual: f64,
    /// False when the iteration limit was reached before either criterion.
    pub converged: bool,
    pub warning: Option<String>,
}

pub const DEFAULT_P: f64 = 10.0;
const DAMPING: f64 = 0.5;
const MAX_ITER: usize = 10_000;
const STEP_TOL: f64 = 1e-12;
const COLLAPSE: f64 = 1e-15;

const SINGLE_TOL: f64 = 1e-9;
const OUTER_TOL: f64 = 1e-9;
const INNER_TOL: f64 = 1e-11;

/// True when `S₁(Ω)` diverges as `Ω → 0`.
pub fn single_diverges_at_zero(bath: &BathSpec) -> bool {
    if bath.temperature == 0.0 {
        bath.eta <= 1.0
    } else {
        bath.eta <= 2.0
    }
}

fn single_integrand(bath: &BathSpec, w: f64) -> f64 {
    bath.j(w) / (w * w) * bath.coth(w)
}

/// `S₁(Ω) = 2 ∫_Ω^∞ J(ω)/ω² coth(ω/2T) dω`.
pub fn single_boson_exponent(bath: &BathSpec, omega: f64) -> Result<f64> {
    bath.validate()?;
    if !(omega >= 0.0) {
        return Err(domain(format!("cutoff must be non-negative, got {omega}")));
    }
    if bath.alpha == 0.0 {
        return Ok(0.0);
    }
    if omega == 0.0 && single_diverges_at_zero(bath) {
        return Err(domain(format!(
            "single-boson exponent diverges at Ω = 0 for η = {}, T = {}",
            bath.eta, bath.temperature
        )));
    }
    let integ = Integrator::with_rel_tol(SINGLE_TOL);
    Ok(2.0 * bath.spectral_integral(|w| single_integrand(bath, w), omega, &integ)?)
}

/// `G(u)`, the rotated inner integral of `φ` (without prefactor).
fn phi_kernel(bath: &BathSpec, u: f64, integ: &Integrator) -> Result<f64> {
    let top = match bath.cutoff {
        CutoffForm::Hard => bath.omega_c - u,
        CutoffForm::Exponential => bath.spectral_top(),
    };
    if top <= 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| {
        let a = w + u;
        let (nw, na) = (bath.n(w), bath.n(a));
        bath.j(w) * bath.j(a) * (na * (1.0 + nw) + nw * (1.0 + na))
    };
    bath.spectral_integral_upto(f, 0.0, top, integ)
}

/// `H(v)`, the rotated inner integral of `χ` (without prefactor).
fn chi_kernel(bath: &BathSpec, v: f64, integ: &Integrator) -> Result<f64> {
    if bath.cutoff == CutoffForm::Hard && v >= 2.0 * bath.omega_c {
        return Ok(0.0);
    }
    let f = |x: f64| {
        let (a, b) = (x * v, (1.0 - x) * v);
        bath.j(a) * bath.j(b) * (1.0 + bath.n(a) + bath.n(b))
    };
    // Symmetric under x ↔ 1 − x; integrate over [0, 1/2] on a mesh graded
    // toward the endpoint, where the thermal factors are singular.
    let mut pts: Vec<f64> = (1..=24).rev().map(|k| 0.5 * 0.25f64.powi(k)).collect();
    pts.insert(0, 0.0);
    pts.push(0.5);
    let mut extra = Vec::new();
    if bath.temperature > 0.0 {
        extra.push(bath.temperature / v);
    }
    extra.push(bath.omega_c / v);
    if bath.cutoff == CutoffForm::Hard {
        extra.push(1.0 - bath.omega_c / v);
    }
    pts.extend(extra.into_iter().filter(|&x| x > 0.0 && x < 0.5));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(2.0 * integ.integrate_points(f, &pts)?.value)
}

fn chi_top(bath: &BathSpec) -> f64 {
    match bath.cutoff {
        CutoffForm::Hard => 2.0 * bath.omega_c,
        CutoffForm::Exponential => bath.spectral_top(),
    }
}

fn nested<F: Fn(f64) -> Result<f64>>(f: F) -> impl Fn(f64) -> f64 {
    move |x| f(x).unwrap_or(f64::NAN)
}

/// Two-boson scattering exponent `φ(Ω)`; zero at `T = 0`.
pub fn phi(bath: &BathSpec, omega: f64) -> Result<f64> {
    bath.validate()?;
    if bath.temperature == 0.0 || bath.alpha == 0.0 {
        return Ok(0.0);
    }
    if !(omega > 0.0) {
        return Err(domain(format!(
            "φ diverges as Ω → 0 at T > 0; need Ω > 0, got {omega}"
        )));
    }
    let inner = Integrator::with_rel_tol(INNER_TOL);
    let outer = Integrator::with_rel_tol(OUTER_TOL);
    let g = nested(|u| phi_kernel(bath, u, &inner));
    let value = bath.spectral_integral(|u| g(u) / (u * u), omega, &outer)?;
    Ok(8.0 / (bath.e * bath.e) * value)
}

/// Two-boson pair-process exponent `χ(Ω)`; finite down to `Ω = 0`.
pub fn chi(bath: &BathSpec, omega: f64) -> Result<f64> {
    bath.validate()?;
    if !(omega >= 0.0) {
        return Err(domain(format!("cutoff must be non-negative, got {omega}")));
    }
    if bath.alpha == 0.0 {
        return Ok(0.0);
    }
    let inner = Integrator::with_rel_tol(INNER_TOL);
    let outer = Integrator::with_rel_tol(OUTER_TOL);
    let h = nested(|v| chi_kernel(bath, v, &inner));
    let value = bath.spectral_integral_upto(|v| h(v) / v, omega, chi_top(bath), &outer)?;
    Ok(4.0 / (bath.e * bath.e) * value)
}

/// Cached renormalization exponents for one bath shape (everything but
/// `α`). `S₁` scales as `α` and `φ`, `χ` as `α²`, so tables built at
/// `α = 1` serve every coupling strength.
#[derive(Debug, Clone)]
pub struct Renormalizer {
    template: BathSpec,
    process: Process,
    single: Option<LogTail>,
    phi: Option<LogTail>,
    chi: Option<LogTail>,
}

impl Renormalizer {
    pub fn new(bath: &BathSpec, process: Process) -> Result<Self> {
        bath.validate()?;
        let template = bath.with_alpha(1.0);
        let mut min_scale = template.omega_c;
        if template.temperature > 0.0 {
            min_scale = min_scale.min(template.temperature);
        }
        let floor = 1e-10 * min_scale;
        let single = if process.single() {
            let top = template.spectral_top();
            let above = match template.cutoff {
                CutoffForm::Hard => 0.0,
                CutoffForm::Exponential => Integrator::with_rel_tol(SINGLE_TOL)
                    .integrate_to_inf(|w| single_integrand(&template, w), top, &[])?
                    .value,
            };
            Some(LogTail::build(
                |w| 2.0 * single_integrand(&template, w),
                floor,
                top,
                2.0 * above,
            ))
        } else {
            None
        };
        let (phi, chi) = if process.two() {
            let inner = Integrator::with_rel_tol(INNER_TOL);
            let e2 = template.e * template.e;
            let phi = (template.temperature > 0.0).then(|| {
                let g = nested(|u| phi_kernel(&template, u, &inner));
                LogTail::build(
                    |u| 8.0 / e2 * g(u) / (u * u),
                    floor,
                    template.spectral_top(),
                    0.0,
                )
            });
            let h = nested(|v| chi_kernel(&template, v, &inner));
            let chi = LogTail::build(|v| 4.0 / e2 * h(v) / v, floor, chi_top(&template), 0.0);
            (phi, Some(chi))
        } else {
            (None, None)
        };
        for table in [&single, &phi, &chi].into_iter().flatten() {
            if !table.tail(table.floor()).is_finite() {
                return Err(Error::Convergence(
                    "renormalization kernel is not finite".into(),
                ));
            }
        }
        Ok(Self {
            template,
            process,
            single,
            phi,
            chi,
        })
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn bath(&self, alpha: f64) -> BathSpec {
        self.template.with_alpha(alpha)
    }

    /// `(S₁, φ, χ)` at cutoff `Ω` for coupling `α` (zero for processes
    /// not included).
    pub fn exponents(&self, alpha: f64, omega: f64) -> (f64, f64, f64) {
        let s1 = self.single.as_ref().map_or(0.0, |t| alpha * t.tail(omega));
        let a2 = alpha * alpha;
        let phi = self.phi.as_ref().map_or(0.0, |t| a2 * t.tail(omega));
        let chi = self.chi.as_ref().map_or(0.0, |t| a2 * t.tail(omega));
        (s1, phi, chi)
    }

    /// Damped Picard iteration `Δ̃ ← Δ̃ + ½(Δ e^{−S(pΔ̃)} − Δ̃)` from `Δ̃ = Δ`.
    pub fn solve(&self, alpha: f64, delta: f64, p: f64) -> RenormResult {
        let warning = (self.process.two() && self.template.eta < 1.0).then(|| {
            format!(
                "two-boson analysis assumes η ≥ 1, got η = {}",
                self.template.eta
            )
        });
        let mut x = delta;
        let mut last_step = 0.0;
        let mut decreasing = false;
        let mut factors = (1.0, 1.0);
        for it in 1..=MAX_ITER {
            let (s1, phi, chi) = self.exponents(alpha, p * x);
            factors = ((-s1).exp(), (-(phi + chi)).exp());
            let target = delta * factors.0 * factors.1;
            let next = x + DAMPING * (target - x);
            last_step = (next - x).abs();
            decreasing = next < x;
            x = next;
            if x < COLLAPSE * delta {
                return RenormResult {
                    regime: Regime::Incoherent,
                    delta_tilde: 0.0,
                    factor_single: factors.0,
                    factor_two: factors.1,
                    iterations: it,
                    residual: (target - x).abs(),
                    converged: true,
                    warning,
                };
            }
            if last_step <= STEP_TOL * x {
                return RenormResult {
                    regime: Regime::Coherent,
                    delta_tilde: x,
                    factor_single: factors.0,
                    factor_two: factors.1,
                    iterations: it,
                    residual: last_step,
                    converged: true,
                    warning,
                };
            }
        }
        let regime = if decreasing {
            Regime::Incoherent
        } else {
            Regime::Coherent
        };
        RenormResult {
            regime,
            delta_tilde: if decreasing { 0.0 } else { x },
            factor_single: factors.0,
            factor_two: factors.1,
            iterations: MAX_ITER,
            residual: last_step,
            converged: false,
            warning,
        }
    }

    pub fn is_coherent(&self, alpha: f64, delta: f64, p: f64) -> bool {
        self.solve(alpha, delta, p).regime == Regime::Coherent
    }

    /// Coupling strength separating the coherent (below) from the
    /// incoherent (above) phase, by geometric bisection to relative width
    /// `1e-4`.
    pub fn critical_alpha(&self, delta: f64, p: f64) -> Threshold {
        const ALPHA_MIN: f64 = 1e-14;
        const ALPHA_MAX: f64 = 1e4;
        let coherent = |a: f64| self.is_coherent(a, delta, p);
        let (mut lo, mut hi);
        let start = 1e-3;
        if coherent(start) {
            lo = start;
            hi = start;
            loop {
                hi *= 2.0;
                if hi > ALPHA_MAX {
                    return Threshold::Unbounded;
                }
                if !coherent(hi) {
                    break;
                }
                lo = hi;
            }
        } else {
            hi = start;
            lo = start;
            loop {
                lo /= 2.0;
                if lo < ALPHA_MIN {
                    return Threshold::Zero;
                }
                if coherent(lo) {
                    break;
                }
                hi = lo;
            }
        }
        while hi / lo > 1.0 + 1e-4 {
            let mid = (lo * hi).sqrt();
            if coherent(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Threshold::Finite((lo * hi).sqrt())
    }
}

fn fixed_point(input: &RenormInput, process: Process) -> Result<RenormResult> {
    input.validate()?;
    let r = Renormalizer::new(&input.bath, process)?;
    Ok(r.solve(input.bath.alpha, input.delta, input.p))
}

pub fn single_boson_fixed_point(input: &RenormInput) -> Result<RenormResult> {
    fixed_point(input, Process::Single)
}

pub fn two_boson_fixed_point(input: &RenormInput) -> Result<RenormResult> {
    fixed_point(input, Process::Two)
}

pub fn combined_fixed_point(input: &RenormInput) -> Result<RenormResult> {
    fixed_point(input, Process::Combined)
}

/// Critical coupling at fixed `Δ` for the bath shape of `bath` (its `α`
/// is ignored).
pub fn critical_alpha(delta: f64, bath: &BathSpec, p: f64, process: Process) -> Result<Threshold> {
    RenormInput { delta, bath: *bath, p }.validate()?;
    Ok(Renormalizer::new(bath, process)?.critical_alpha(delta, p))
}
