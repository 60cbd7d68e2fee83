//! Coherent/incoherent phase diagram and critical-temperature scaling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::BathSpec;
use crate::error::{domain, Error, Result};
use crate::fit::{scaling_fit, ExponentFit};
use crate::model::{min_gap, SearchInstance};
use crate::renorm::{Process, Regime, Renormalizer, Threshold};

pub const T_LO: f64 = 1e-9;
pub const T_HI: f64 = 1.0;
const T_REL_WIDTH: f64 = 1e-3;

/// One classified point of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub eta: f64,
    pub temperature: f64,
    pub n: u64,
    pub alpha: f64,
    pub regime: Regime,
    pub delta_tilde: f64,
}

/// `T*(N)` samples for one bath shape and process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurve {
    pub eta: f64,
    pub alpha: f64,
    pub process: Process,
    /// Sizes with a finite critical temperature, increasing in `N`.
    pub samples: Vec<(u64, f64)>,
    /// Outcome for every requested size.
    pub thresholds: Vec<(u64, Threshold)>,
}

/// Bottleneck tunneling rate `min_s gap(s)` for a search-space size.
pub fn bottleneck_delta(n: u64, e0: f64) -> Result<f64> {
    Ok(min_gap(&SearchInstance::new(n, e0)?).1)
}

fn coherent_at(bath: &BathSpec, t: f64, delta: f64, p: f64, process: Process) -> Result<bool> {
    let r = Renormalizer::new(&bath.with_temperature(t), process)?;
    Ok(r.is_coherent(bath.alpha, delta, p))
}

/// Critical temperature at the bottleneck of an `N`-element search, by
/// geometric bisection between `T_LO·E0` and `T_HI·E0` to relative width
/// `1e-3`. `bath` supplies everything except the temperature.
pub fn critical_temperature(n: u64, bath: &BathSpec, p: f64, process: Process) -> Result<Threshold> {
    let delta = bottleneck_delta(n, bath.e0)?;
    critical_temperature_at(delta, bath, p, process)
}

/// As [`critical_temperature`] for an explicit tunneling rate.
pub fn critical_temperature_at(
    delta: f64,
    bath: &BathSpec,
    p: f64,
    process: Process,
) -> Result<Threshold> {
    bath.validate()?;
    let coherent = |t: f64| coherent_at(bath, t, delta, p, process);
    if !coherent(0.0)? {
        return Ok(Threshold::Zero);
    }
    let t_hi = T_HI * bath.e0;
    if coherent(t_hi)? {
        return Ok(Threshold::Unbounded);
    }
    let mut hi = t_hi;
    let mut lo = T_LO * bath.e0;
    // The lower bracket is extended a few decades before giving up.
    while !coherent(lo)? {
        hi = lo;
        lo *= 1e-2;
        if lo < 1e-6 * T_LO * bath.e0 {
            return Ok(Threshold::Zero);
        }
    }
    while hi / lo > 1.0 + T_REL_WIDTH {
        let mid = (lo * hi).sqrt();
        if coherent(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold::Finite((lo * hi).sqrt()))
}

/// Critical temperatures over a list of sizes, evaluated in parallel.
pub fn critical_curve(n_list: &[u64], bath: &BathSpec, p: f64, process: Process) -> Result<CriticalCurve> {
    if n_list.is_empty() {
        return Err(domain("empty list of search-space sizes"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("search-space sizes must be strictly increasing"));
    }
    let thresholds = n_list
        .par_iter()
        .map(|&n| critical_temperature(n, bath, p, process).map(|t| (n, t)))
        .collect::<Result<Vec<_>>>()?;
    let samples = thresholds
        .iter()
        .filter_map(|&(n, t)| t.finite().map(|t| (n, t)))
        .collect();
    Ok(CriticalCurve {
        eta: bath.eta,
        alpha: bath.alpha,
        process,
        samples,
        thresholds,
    })
}

/// Power-law fit of `T*` against `N`.
pub fn exponent_fit(curve: &CriticalCurve) -> Result<ExponentFit> {
    if curve.samples.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} of {} sizes have a finite critical temperature (η = {}, {:?})",
            curve.samples.len(),
            curve.thresholds.len(),
            curve.eta,
            curve.process
        )));
    }
    let (ns, ts): (Vec<f64>, Vec<f64>) = curve.samples.iter().map(|&(n, t)| (n as f64, t)).unzip();
    scaling_fit(&ns, &ts)
}

/// Critical-temperature boundary between two temperature grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub eta: f64,
    pub n: u64,
    /// Geometric interpolation between the last coherent and the first
    /// incoherent grid temperature; `None` when the column does not change
    /// regime.
    pub t_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub points: Vec<PhasePoint>,
    pub boundary: Vec<BoundaryPoint>,
}

/// Classify every `(η, T, N)` grid point with the combined process.
/// `bath` supplies `α`, the cutoff and the energy scales. Output order is
/// η-major, then `T`, then `N`, independent of scheduling.
pub fn phase_diagram(
    eta_grid: &[f64],
    t_grid: &[f64],
    n_list: &[u64],
    bath: &BathSpec,
    p: f64,
) -> Result<PhaseDiagram> {
    if eta_grid.is_empty() || t_grid.is_empty() || n_list.is_empty() {
        return Err(domain("phase diagram grids must be non-empty"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("temperature grid must be strictly increasing"));
    }
    let deltas = n_list
        .iter()
        .map(|&n| bottleneck_delta(n, bath.e0))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, f64)> = eta_grid
        .iter()
        .flat_map(|&eta| t_grid.iter().map(move |&t| (eta, t)))
        .collect();
    let columns = cells
        .par_iter()
        .map(|&(eta, t)| {
            let spec = BathSpec {
                eta,
                temperature: t,
                ..*bath
            };
            let r = Renormalizer::new(&spec, Process::Combined)?;
            Ok(n_list
                .iter()
                .zip(&deltas)
                .map(|(&n, &delta)| {
                    let res = r.solve(bath.alpha, delta, p);
                    PhasePoint {
                        eta,
                        temperature: t,
                        n,
                        alpha: bath.alpha,
                        regime: res.regime,
                        delta_tilde: res.delta_tilde,
                    }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<PhasePoint> = columns.into_iter().flatten().collect();
    let nt = t_grid.len();
    let nn = n_list.len();
    let mut boundary = Vec::with_capacity(eta_grid.len() * nn);
    for (ie, &eta) in eta_grid.iter().enumerate() {
        for (jn, &n) in n_list.iter().enumerate() {
            let at = |it: usize| &points[(ie * nt + it) * nn + jn];
            let t_star = (1..nt).find_map(|it| {
                let (a, b) = (at(it - 1), at(it));
                (a.regime == Regime::Coherent && b.regime == Regime::Incoherent)
                    .then(|| (a.temperature * b.temperature).sqrt())
            });
            boundary.push(BoundaryPoint { eta, n, t_star });
        }
    }
    Ok(PhaseDiagram { points, boundary })
}

/// Exponent of `T* ∝ N^δ` predicted for single-boson processes, `(η−2)/2`.
pub fn single_exponent_law(eta: f64) -> f64 {
    (eta - 2.0) / 2.0
}

/// Exponent predicted for two-boson processes, `−1/(4η+2)`.
pub fn two_exponent_law(eta: f64) -> f64 {
    -1.0 / (4.0 * eta + 2.0)
}

/// Root of `2η² − 3η − 1`, where the two laws coincide.
pub fn analytic_crossover() -> f64 {
    (3.0 + 17f64.sqrt()) / 4.0
}

/// Inputs for locating the crossover empirically. The two processes are
/// swept with separate bath shapes so that each can be placed in its own
/// scaling regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverSetup {
    pub single_bath: BathSpec,
    pub two_bath: BathSpec,
    pub single_sizes: Vec<u64>,
    pub two_sizes: Vec<u64>,
    pub eta_grid: Vec<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub analytic: f64,
    /// `None` when the fitted exponent curves do not intersect on the grid.
    pub empirical: Option<f64>,
    /// `(η, δ_single, δ_two)` per grid point.
    pub exponents: Vec<(f64, f64, f64)>,
}

/// Fit `δ(η)` for both processes on the grid and locate where the
/// single-boson exponent overtakes the two-boson one, by linear
/// interpolation of the difference between neighbouring grid points.
pub fn eta_crossover(setup: &CrossoverSetup) -> Result<Crossover> {
    if setup.eta_grid.len() < 2 {
        return Err(domain("crossover needs at least two η values"));
    }
    let exponents = setup
        .eta_grid
        .par_iter()
        .map(|&eta| {
            let single = critical_curve(
                &setup.single_sizes,
                &BathSpec { eta, ..setup.single_bath },
                setup.p,
                Process::Single,
            )?;
            let two = critical_curve(
                &setup.two_sizes,
                &BathSpec { eta, ..setup.two_bath },
                setup.p,
                Process::Two,
            )?;
            Ok((eta, exponent_fit(&single)?.delta_exp, exponent_fit(&two)?.delta_exp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Crossover {
        analytic: analytic_crossover(),
        empirical: crossover_from_exponents(&exponents),
        exponents,
    })
}

/// First `η` where `δ_single − δ_two` changes sign from `≤ 0` to `> 0`,
/// by linear interpolation. Rows are `(η, δ_single, δ_two)`, increasing
/// in `η`.
pub fn crossover_from_exponents(rows: &[(f64, f64, f64)]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (e0, s0, t0) = w[0];
        let (e1, s1, t1) = w[1];
        let (d0, d1) = (s0 - t0, s1 - t1);
        (d0 <= 0.0 && d1 > 0.0).then(|| e0 + (e1 - e0) * (-d0) / (d1 - d0))
    })
}
