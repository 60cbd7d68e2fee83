//! Two-level reduction of adiabatic quantum search.
//!
//! Along the schedule `s ∈ [0, 1]` the two lowest levels of the search
//! Hamiltonian are `H(s) = E0/2 − ½(ε τᶻ + Δ τˣ)` in the basis
//! `{|m⟩, |m⊥⟩}`, with
//!
//! ```text
//! ε(s)/E0 = 2s − 1 + 2(1 − s)/N,    Δ(s)/E0 = 2√(N−1)/N · (1 − s).
//! ```
//!
//! Everything is evaluated in units of `E0` and rescaled on return.

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Size of the search space and the energy scale of the problem
/// Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchInstance {
    n: u64,
    l: Option<u32>,
    e0: f64,
}

impl SearchInstance {
    pub fn new(n: u64, e0: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("search space size must be ≥ 2, got {n}")));
        }
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(domain(format!("E0 must be positive, got {e0}")));
        }
        let l = n.is_power_of_two().then(|| n.trailing_zeros());
        Ok(Self { n, l, e0 })
    }

    /// Instance on `l` qubits, `N = 2^l`.
    pub fn with_qubits(l: u32, e0: f64) -> Result<Self> {
        if !(1..=62).contains(&l) {
            return Err(domain(format!("qubit count must be in 1..=62, got {l}")));
        }
        Self::new(1u64 << l, e0)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn qubits(&self) -> Option<u32> {
        self.l
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Schedule point where the bias vanishes, `s* = (N−2)/(2(N−1))`.
    pub fn s_star(&self) -> f64 {
        let n = self.nf();
        (n - 2.0) / (2.0 * (n - 1.0))
    }

    /// Tunneling at zero bias, `E0/√(N−1)`.
    pub fn crossing_gap(&self) -> f64 {
        self.e0 / (self.nf() - 1.0).sqrt()
    }

    // Reduced (E0 = 1) bias and tunneling without range checks.
    pub(crate) fn reduced(&self, s: f64) -> (f64, f64) {
        let n = self.nf();
        let eps = 2.0 * s - 1.0 + 2.0 * (1.0 - s) / n;
        let delta = 2.0 * (n - 1.0).sqrt() / n * (1.0 - s);
        (eps, delta)
    }

    pub(crate) fn reduced_gap(&self, s: f64) -> f64 {
        let (e, d) = self.reduced(s);
        e.hypot(d)
    }
}

/// Bias and tunneling at one schedule point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelPoint {
    pub s: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl TwoLevelPoint {
    pub fn gap(&self) -> f64 {
        self.epsilon.hypot(self.delta)
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(domain(format!("schedule parameter must lie in [0, 1], got {s}")))
    }
}

pub fn two_level_params(instance: &SearchInstance, s: f64) -> Result<TwoLevelPoint> {
    check_s(s)?;
    let (eps, delta) = instance.reduced(s);
    Ok(TwoLevelPoint {
        s,
        epsilon: eps * instance.e0,
        delta: delta * instance.e0,
    })
}

/// Splitting of the two low-energy levels, `√(ε² + Δ²)`.
pub fn gap(instance: &SearchInstance, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(instance.reduced_gap(s) * instance.e0)
}

/// Minimum of the gap over the schedule: a 1024-point scan, golden-section
/// refinement to 1e-12 in `s`, and a final check against the vertex of
/// `gap²`, which is a quadratic polynomial in `s`.
pub fn min_gap(instance: &SearchInstance) -> (f64, f64) {
    const SCAN: usize = 1024;
    let g = |s: f64| instance.reduced_gap(s);
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..=SCAN {
        let v = g(i as f64 / SCAN as f64);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let mut lo = (best.saturating_sub(1)) as f64 / SCAN as f64;
    let mut hi = ((best + 1).min(SCAN)) as f64 / SCAN as f64;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        }
    }
    let mut s_min = 0.5 * (lo + hi);
    let mut g_min = g(s_min);
    for (s, v) in [(0.0, g(0.0)), (1.0, g(1.0))] {
        if v < g_min {
            s_min = s;
            g_min = v;
        }
    }
    // gap² = a s² + b s + c; its vertex is the exact minimizer when it
    // lies in [0, 1].
    let n = instance.nf();
    let a1 = 2.0 * (n - 1.0) / n;
    let b1 = -(n - 2.0) / n;
    let c1 = 2.0 * (n - 1.0).sqrt() / n;
    let qa = a1 * a1 + c1 * c1;
    let qb = 2.0 * a1 * b1 - 2.0 * c1 * c1;
    let vertex = -qb / (2.0 * qa);
    if (0.0..=1.0).contains(&vertex) && (vertex - s_min).abs() < 1e-9 {
        let v = g(vertex);
        if v <= g_min {
            s_min = vertex;
            g_min = v;
        }
    }
    (s_min, g_min * instance.e0)
}

/// Qubit axis of a single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli operator on one qubit projected onto `{|m⟩, |m⊥⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPauli {
    pub axis: Axis,
    pub sj: i8,
    pub m: Matrix2<Complex<f64>>,
}

impl ProjectedPauli {
    pub fn off_diagonal(&self) -> f64 {
        self.m[(0, 1)].norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.m - self.m.adjoint()).norm() <= tol
    }
}

/// `P σ_j P` where `sj = ⟨m|σ_jᶻ|m⟩ = ±1` is the marked bit of qubit `j`.
pub fn projected_pauli(instance: &SearchInstance, axis: Axis, sj: i8) -> Result<ProjectedPauli> {
    if sj != 1 && sj != -1 {
        return Err(domain(format!("sj must be ±1, got {sj}")));
    }
    let n = instance.nf();
    let r = (n - 1.0).sqrt();
    let s = f64::from(sj);
    let c = |re: f64, im: f64| Complex::new(re, im);
    let m = match axis {
        Axis::X => Matrix2::new(
            c(0.0, 0.0),
            c(1.0 / r, 0.0),
            c(1.0 / r, 0.0),
            c((n - 2.0) / (n - 1.0), 0.0),
        ),
        Axis::Y => Matrix2::new(c(0.0, 0.0), c(0.0, -s / r), c(0.0, s / r), c(0.0, 0.0)),
        Axis::Z => Matrix2::new(
            c(s, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(-s / (n - 1.0), 0.0),
        ),
    };
    Ok(ProjectedPauli { axis, sj, m })
}
