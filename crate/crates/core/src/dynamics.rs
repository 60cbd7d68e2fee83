//! Sweep dynamics of the two-level search model.
//!
//! The basis is `(|m⟩, |m⊥⟩)`, the eigenstates of `τ^z`, and the
//! Hamiltonian is `H(s) = −½(ε τ^z + Δ τ^x)` with the constant `E0/2`
//! dropped. Dephasing is the Lindblad channel `√(γ/2) τ^z`, which damps
//! the coherence `ρ_{m m⊥}` at rate `γ`.

use nalgebra::{Complex, Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::BathSpec;
use crate::error::{domain, Error, Result};
use crate::fit::{scaling_fit, ExponentFit};
use crate::model::SearchInstance;
use crate::ode::{Dopri5, Magnus4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    LocalAdiabatic,
}

pub const SCHEDULE_NODES: usize = 1024;

/// Interpolation `s(t)` on `[0, total_time]`.
///
/// For the local schedule `ds/dt = ε_ad·gap(s)²/E0`. Since `gap²` is a
/// quadratic `a s² + b s + c` with negative discriminant, `t(s)` is an
/// arctangent and inverts in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub total_time: f64,
    /// `(t, s)` samples, monotone in both coordinates.
    pub nodes: Vec<(f64, f64)>,
    quad: Option<[f64; 3]>,
    rate: f64,
}

fn gap_quadratic(instance: &SearchInstance) -> [f64; 3] {
    let q = |s: f64| instance.reduced_gap(s).powi(2);
    let (q0, qh, q1) = (q(0.0), q(0.5), q(1.0));
    let a = 2.0 * (q0 + q1 - 2.0 * qh);
    let b = q1 - q0 - a;
    [a, b, q0]
}

impl Schedule {
    pub fn linear(total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(domain(format!("total time must be positive, got {total_time}")));
        }
        let nodes = (0..=SCHEDULE_NODES)
            .map(|i| {
                let s = i as f64 / SCHEDULE_NODES as f64;
                (s * total_time, s)
            })
            .collect();
        Ok(Self {
            kind: ScheduleKind::Linear,
            total_time,
            nodes,
            quad: None,
            rate: 0.0,
        })
    }

    /// Local adiabatic schedule with `ds/dt = adiabaticity_eps·gap²/E0`.
    pub fn local(instance: &SearchInstance, adiabaticity_eps: f64) -> Result<Self> {
        if !(adiabaticity_eps > 0.0 && adiabaticity_eps.is_finite()) {
            return Err(domain(format!(
                "adiabaticity parameter must be positive, got {adiabaticity_eps}"
            )));
        }
        let quad = gap_quadratic(instance);
        // In reduced units gap = E0·√q, so ds/dt = ε_ad·E0·q(s).
        let rate = adiabaticity_eps * instance.e0();
        let t_of_s = |s: f64| local_time(quad, rate, s);
        let total_time = t_of_s(1.0);
        let nodes = (0..=SCHEDULE_NODES)
            .map(|i| {
                let s = i as f64 / SCHEDULE_NODES as f64;
                (t_of_s(s), s)
            })
            .collect();
        Ok(Self {
            kind: ScheduleKind::LocalAdiabatic,
            total_time,
            nodes,
            quad: Some(quad),
            rate,
        })
    }

    /// Local schedule rescaled to last `total_time`.
    pub fn local_with_time(instance: &SearchInstance, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(domain(format!("total time must be positive, got {total_time}")));
        }
        let unit = local_time(gap_quadratic(instance), instance.e0(), 1.0);
        Self::local(instance, unit / total_time)
    }

    pub fn with_time(kind: ScheduleKind, instance: &SearchInstance, total_time: f64) -> Result<Self> {
        match kind {
            ScheduleKind::Linear => Self::linear(total_time),
            ScheduleKind::LocalAdiabatic => Self::local_with_time(instance, total_time),
        }
    }

    pub fn s_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.total_time {
            return 1.0;
        }
        match self.quad {
            None => t / self.total_time,
            Some([a, b, c]) => {
                let rd = (4.0 * a * c - b * b).sqrt();
                let phase = 0.5 * rd * self.rate * t + (b / rd).atan();
                ((rd * phase.tan() - b) / (2.0 * a)).clamp(0.0, 1.0)
            }
        }
    }
}

fn local_time([a, b, c]: [f64; 3], rate: f64, s: f64) -> f64 {
    let rd = (4.0 * a * c - b * b).sqrt();
    2.0 / (rd * rate) * (((2.0 * a * s + b) / rd).atan() - (b / rd).atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DephasingParams {
    pub gamma_phi: f64,
}

impl DephasingParams {
    pub fn new(gamma_phi: f64) -> Result<Self> {
        if gamma_phi >= 0.0 && gamma_phi.is_finite() {
            Ok(Self { gamma_phi })
        } else {
            Err(domain(format!("dephasing rate must be non-negative, got {gamma_phi}")))
        }
    }

    /// Conventional high-temperature ohmic mapping `γ = 2παT`.
    pub fn from_bath(bath: &BathSpec) -> Result<Self> {
        bath.validate()?;
        Self::new(2.0 * std::f64::consts::PI * bath.alpha * bath.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub success_prob: f64,
    pub total_time: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    /// Largest deviation of `⟨ψ|ψ⟩` (closed) or `tr ρ` (dephasing) from 1.
    pub norm_drift: f64,
    pub steps: usize,
}

fn initial_bloch(instance: &SearchInstance) -> (f64, f64) {
    let (eps, delta) = instance.reduced(0.0);
    let g = eps.hypot(delta);
    (eps / g, delta / g)
}

struct Sampler {
    every: f64,
    next: f64,
    points: Vec<TrajectoryPoint>,
}

impl Sampler {
    fn new(total_time: f64, samples: usize) -> Option<Self> {
        (samples > 0).then(|| Self {
            every: total_time / samples as f64,
            next: 0.0,
            points: Vec::with_capacity(samples + 1),
        })
    }

    fn push(&mut self, t: f64, s: f64, r: [f64; 3], last: bool) {
        if t >= self.next || last {
            self.points.push(TrajectoryPoint { t, s, x: r[0], y: r[1], z: r[2] });
            while self.next <= t {
                self.next += self.every;
            }
        }
    }
}

/// Schrödinger evolution of `ψ = (ψ_m, ψ_m⊥)` from the ground state at `s = 0`.
pub fn evolve_closed(instance: &SearchInstance, schedule: &Schedule) -> Result<EvolutionResult> {
    evolve_closed_traced(instance, schedule, 0)
}

/// As [`evolve_closed`], keeping roughly `samples` Bloch vectors.
pub fn evolve_closed_traced(
    instance: &SearchInstance,
    schedule: &Schedule,
    samples: usize,
) -> Result<EvolutionResult> {
    let e0 = instance.e0();
    let (cz, sx) = initial_bloch(instance);
    let psi0 = [
        Complex::new(((1.0 + cz) / 2.0).sqrt(), 0.0),
        Complex::new(((1.0 - cz) / 2.0).sqrt() * sx.signum(), 0.0),
    ];
    // H = h·σ with h = −½(Δ, 0, ε)
    let field = |t: f64| {
        let (eps, delta) = instance.reduced(schedule.s_at(t));
        [-0.5 * delta * e0, 0.0, -0.5 * eps * e0]
    };
    let mut drift = 0.0f64;
    let mut sampler = Sampler::new(schedule.total_time, samples);
    let t_end = schedule.total_time;
    let (psi, stats) = Magnus4::default().solve(field, 0.0, t_end, psi0, |t, psi| {
        let (pm, pp) = (psi[0].norm_sqr(), psi[1].norm_sqr());
        drift = drift.max((pm + pp - 1.0).abs());
        if let Some(sm) = sampler.as_mut() {
            let c = psi[0].conj() * psi[1];
            sm.push(t, schedule.s_at(t), [2.0 * c.re, 2.0 * c.im, pm - pp], t >= t_end);
        }
    })?;
    Ok(EvolutionResult {
        success_prob: psi[0].norm_sqr().clamp(0.0, 1.0),
        total_time: t_end,
        trajectory: sampler.map(|s| s.points),
        norm_drift: drift,
        steps: stats.accepted,
    })
}

/// Master-equation evolution with pure dephasing along `τ^z`.
pub fn evolve_dephasing(
    instance: &SearchInstance,
    schedule: &Schedule,
    params: DephasingParams,
) -> Result<EvolutionResult> {
    evolve_dephasing_traced(instance, schedule, params, 0)
}

pub fn evolve_dephasing_traced(
    instance: &SearchInstance,
    schedule: &Schedule,
    params: DephasingParams,
    samples: usize,
) -> Result<EvolutionResult> {
    let params = DephasingParams::new(params.gamma_phi)?;
    let gamma = params.gamma_phi;
    let e0 = instance.e0();
    let (cz, sx) = initial_bloch(instance);
    // ρ = [[p, c], [c*, q]] stored as (p, q, Re c, Im c).
    let y0 = [0.5 * (1.0 + cz), 0.5 * (1.0 - cz), 0.5 * sx, 0.0];
    let rhs = |t: f64, y: &[f64; 4]| {
        let (eps, delta) = instance.reduced(schedule.s_at(t));
        let (eps, delta) = (eps * e0, delta * e0);
        let (p, q, cr, ci) = (y[0], y[1], y[2], y[3]);
        let dp = delta * ci;
        [
            dp,
            -dp,
            -eps * ci - gamma * cr,
            eps * cr - 0.5 * delta * (p - q) - gamma * ci,
        ]
    };
    let mut drift = 0.0f64;
    let mut sampler = Sampler::new(schedule.total_time, samples);
    let t_end = schedule.total_time;
    let (y, stats) = Dopri5::default().solve(rhs, 0.0, t_end, y0, |t, y| {
        drift = drift.max((y[0] + y[1] - 1.0).abs());
        if let Some(sm) = sampler.as_mut() {
            sm.push(t, schedule.s_at(t), [2.0 * y[2], -2.0 * y[3], y[0] - y[1]], t >= t_end);
        }
    })?;
    Ok(EvolutionResult {
        success_prob: y[0].clamp(0.0, 1.0),
        total_time: t_end,
        trajectory: sampler.map(|s| s.points),
        norm_drift: drift,
        steps: stats.accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coherence {
    Underdamped,
    Overdamped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiSpectrum {
    pub class: Coherence,
    /// Eigenvalues `(re, im)` of the generator acting on `(1, x, y, z)`.
    pub eigenvalues: Vec<(f64, f64)>,
}

/// Generator of the static (`ε = 0`) dephasing master equation on the
/// Pauli components `(1, x, y, z)` of `ρ`.
pub fn rabi_generator(delta: f64, gamma_phi: f64) -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 0.0,        0.0,        0.0,
        0.0, -gamma_phi, 0.0,        0.0,
        0.0, 0.0,        -gamma_phi, delta,
        0.0, 0.0,        -delta,     0.0,
    );
    m
}

pub fn rabi_coherence(delta: f64, gamma_phi: f64) -> Result<RabiSpectrum> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(format!("tunneling must be positive, got {delta}")));
    }
    DephasingParams::new(gamma_phi)?;
    let ev = rabi_generator(delta, gamma_phi).complex_eigenvalues();
    let scale = delta.max(gamma_phi);
    let mut eigenvalues: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
    eigenvalues.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let class = if eigenvalues.iter().any(|&(_, im)| im.abs() > 1e-9 * scale) {
        Coherence::Underdamped
    } else {
        Coherence::Overdamped
    };
    Ok(RabiSpectrum { class, eigenvalues })
}

/// Dephasing rate where the Rabi pair reaches the real axis, by
/// bisection on the classification.
pub fn rabi_threshold(delta: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = delta;
    while rabi_coherence(delta, hi)?.class == Coherence::Underdamped {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if rabi_coherence(delta, mid)?.class == Coherence::Underdamped {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Quench to zero bias and thermalize for `wait_time` with rates
/// `γ_up` (out of `|m⟩`) and `γ_down` (into `|m⟩`); success after
/// `repetitions` independent runs.
pub fn thermalization_protocol(
    instance: &SearchInstance,
    gamma_up: f64,
    gamma_down: f64,
    wait_time: f64,
    repetitions: u32,
) -> Result<f64> {
    if !(gamma_up >= 0.0 && gamma_down >= 0.0 && wait_time >= 0.0) {
        return Err(domain("rates and wait time must be non-negative"));
    }
    if repetitions == 0 {
        return Err(domain("need at least one repetition"));
    }
    let p0 = 1.0 / instance.n() as f64;
    let total = gamma_up + gamma_down;
    let p = if total == 0.0 {
        p0
    } else {
        let eq = gamma_down / total;
        eq + (p0 - eq) * (-total * wait_time).exp()
    };
    Ok(1.0 - (1.0 - p).powi(repetitions as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeScaling {
    pub kind: ScheduleKind,
    pub target: f64,
    pub gamma_phi: f64,
    pub times: Vec<(u64, f64)>,
    pub fit: ExponentFit,
}

const TIME_TOL: f64 = 1e-4;
const MAX_TIME: f64 = 1e9;

fn success(instance: &SearchInstance, kind: ScheduleKind, t: f64, gamma: f64) -> Result<f64> {
    let schedule = Schedule::with_time(kind, instance, t)?;
    let r = if gamma > 0.0 {
        evolve_dephasing(instance, &schedule, DephasingParams { gamma_phi: gamma })?
    } else {
        evolve_closed(instance, &schedule)?
    };
    Ok(r.success_prob)
}

/// Shortest sweep reaching `target`, bracketed by doubling from `1/E0`
/// and refined by geometric bisection to relative `1e-4`.
pub fn time_to_target(
    instance: &SearchInstance,
    target: f64,
    kind: ScheduleKind,
    gamma_phi: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain(format!("target success must lie in (0, 1), got {target}")));
    }
    let mut hi = 1.0 / instance.e0();
    while success(instance, kind, hi, gamma_phi)? < target {
        hi *= 2.0;
        if hi > MAX_TIME / instance.e0() {
            return Err(Error::Convergence(format!(
                "success {target} not reached for N = {} within t = {MAX_TIME:e}",
                instance.n()
            )));
        }
    }
    let mut lo = hi / 2.0;
    if success(instance, kind, lo, gamma_phi)? >= target {
        return Ok(lo);
    }
    while hi / lo - 1.0 > TIME_TOL {
        let mid = (lo * hi).sqrt();
        if success(instance, kind, mid, gamma_phi)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

pub fn runtime_scaling(
    n_list: &[u64],
    target: f64,
    kind: ScheduleKind,
    dephasing: Option<DephasingParams>,
) -> Result<RuntimeScaling> {
    if n_list.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "runtime scaling needs at least 4 sizes, got {}",
            n_list.len()
        )));
    }
    let gamma = dephasing.map_or(0.0, |d| d.gamma_phi);
    let times = n_list
        .par_iter()
        .map(|&n| {
            let inst = SearchInstance::new(n, 1.0)?;
            Ok((n, time_to_target(&inst, target, kind, gamma)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ns, ts): (Vec<f64>, Vec<f64>) = times.iter().map(|&(n, t)| (n as f64, t)).unzip();
    let fit = scaling_fit(&ns, &ts)?;
    Ok(RuntimeScaling {
        kind,
        target,
        gamma_phi: gamma,
        times,
        fit,
    })
}

/// Instantaneous Hamiltonian as a 2×2 matrix, for inspection.
pub fn hamiltonian(instance: &SearchInstance, s: f64) -> Result<Matrix2<f64>> {
    let p = crate::model::two_level_params(instance, s)?;
    Ok(Matrix2::new(-0.5 * p.epsilon, -0.5 * p.delta, -0.5 * p.delta, 0.5 * p.epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inst(n: u64) -> SearchInstance {
        SearchInstance::new(n, 1.0).unwrap()
    }

    #[test]
    fn local_schedule_endpoints_and_monotone() {
        let i = inst(1024);
        let sch = Schedule::local(&i, 0.2).unwrap();
        assert!(sch.nodes.len() > 1000);
        assert_eq!(sch.s_at(0.0), 0.0);
        assert_eq!(sch.s_at(sch.total_time), 1.0);
        assert!(sch.nodes.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1));
        for &(t, s) in &sch.nodes {
            assert!((sch.s_at(t) - s).abs() < 1e-9);
        }
        let slower = Schedule::local(&i, 0.1).unwrap();
        assert_relative_eq!(slower.total_time, 2.0 * sch.total_time, max_relative = 1e-12);
        let fixed = Schedule::local_with_time(&i, 77.0).unwrap();
        assert_relative_eq!(fixed.total_time, 77.0, max_relative = 1e-12);
    }

    #[test]
    fn local_schedule_follows_gap_squared() {
        let i = inst(256);
        let sch = Schedule::local(&i, 0.3).unwrap();
        for k in 1..20 {
            let t = sch.total_time * k as f64 / 20.0;
            let h = 1e-6 * sch.total_time;
            let ds = (sch.s_at(t + h) - sch.s_at(t - h)) / (2.0 * h);
            let g = crate::model::gap(&i, sch.s_at(t)).unwrap();
            assert_relative_eq!(ds, 0.3 * g * g, max_relative = 1e-5);
        }
    }

    #[test]
    fn sudden_and_adiabatic_limits() {
        let i = inst(64);
        let fast = evolve_closed(&i, &Schedule::linear(1e-6).unwrap()).unwrap();
        assert_relative_eq!(fast.success_prob, 1.0 / 64.0, max_relative = 1e-6);
        let slow = evolve_closed(&i, &Schedule::linear(20.0 * 64.0).unwrap()).unwrap();
        assert!(slow.success_prob > 0.99);
        assert!(slow.norm_drift < 1e-9);
    }

    #[test]
    fn dephasing_reduces_to_closed() {
        let i = inst(128);
        let sch = Schedule::local(&i, 0.5).unwrap();
        let a = evolve_closed(&i, &sch).unwrap();
        let b = evolve_dephasing(&i, &sch, DephasingParams::new(0.0).unwrap()).unwrap();
        assert!((a.success_prob - b.success_prob).abs() < 1e-8);
        assert!(b.norm_drift < 1e-9);
    }

    #[test]
    fn strong_dephasing_mixes() {
        let i = inst(64);
        let sch = Schedule::linear(4000.0).unwrap();
        let r = evolve_dephasing(&i, &sch, DephasingParams::new(20.0).unwrap()).unwrap();
        assert!((r.success_prob - 0.5).abs() < 0.05, "{}", r.success_prob);
    }

    #[test]
    fn trajectory_is_sampled() {
        let i = inst(64);
        let sch = Schedule::local(&i, 0.5).unwrap();
        let r = evolve_closed_traced(&i, &sch, 50).unwrap();
        let tr = r.trajectory.unwrap();
        assert!(tr.len() >= 40);
        assert_eq!(tr.last().unwrap().t, sch.total_time);
        for p in &tr {
            assert!((p.x * p.x + p.y * p.y + p.z * p.z - 1.0).abs() < 1e-8);
        }
        assert_relative_eq!(tr.last().unwrap().z, 2.0 * r.success_prob - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rabi_limits() {
        let r = rabi_coherence(0.3, 0.0).unwrap();
        assert_eq!(r.class, Coherence::Underdamped);
        let ims: Vec<f64> = r.eigenvalues.iter().map(|e| e.1).filter(|v| v.abs() > 1e-12).collect();
        assert_eq!(ims.len(), 2);
        for im in ims {
            assert_relative_eq!(im.abs(), 0.3, max_relative = 1e-12);
        }
        assert_relative_eq!(rabi_threshold(0.3).unwrap(), 0.6, max_relative = 1e-6);
        assert_eq!(rabi_coherence(0.3, 0.7).unwrap().class, Coherence::Overdamped);
    }

    #[test]
    fn thermalization_limits() {
        let i = inst(1 << 10);
        assert_relative_eq!(
            thermalization_protocol(&i, 0.0, 0.0, 5.0, 1).unwrap(),
            1.0 / 1024.0
        );
        assert_relative_eq!(thermalization_protocol(&i, 1.0, 3.0, 0.0, 1).unwrap(), 1.0 / 1024.0);
        assert_relative_eq!(thermalization_protocol(&i, 1.0, 3.0, 1e3, 1).unwrap(), 0.75);
        assert_relative_eq!(
            thermalization_protocol(&i, 1.0, 1.0, 1e3, 5).unwrap(),
            1.0 - 0.5f64.powi(5),
            max_relative = 1e-12
        );
        assert!(thermalization_protocol(&i, 1.0, 1.0, 1.0, 0).is_err());
    }
}
