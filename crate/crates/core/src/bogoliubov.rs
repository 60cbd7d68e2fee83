//! Para-unitary diagonalization of quadratic bosonic Hamiltonians
//! `H = β†Mβ`, `β = (b₁…b_n, b₁†…b_n†)`.
//!
//! New modes are `c = Tβ` with `T = [[A, B], [B*, A*]]`, `T⁻¹ = μT†μ`
//! and `TμMT⁻¹ = ½ diag(λ, −λ)`, so that `H = Σ λ_i c_i†c_i` up to a
//! constant. `Σ ω b†b` corresponds to `M = ½ diag(ω, ω)`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bath::DiscretizedBath;
use crate::error::{domain, Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n: usize,
    m: CMatrix,
}

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

fn mu(n: usize) -> DVector<f64> {
    DVector::from_fn(2 * n, |i, _| if i < n { 1.0 } else { -1.0 })
}

/// `μ X` (rows of the lower half negated).
fn mu_left(x: &CMatrix) -> CMatrix {
    let n = x.nrows() / 2;
    let mut y = x.clone();
    y.rows_mut(n, n).neg_mut();
    y
}

/// `X μ` (columns of the right half negated).
fn mu_right(x: &CMatrix) -> CMatrix {
    let n = x.ncols() / 2;
    let mut y = x.clone();
    y.columns_mut(n, n).neg_mut();
    y
}

impl QuadraticHamiltonian {
    /// Checks that `M` is Hermitian with the bosonic block structure
    /// `[[h, g], [g*, h*]]`.
    pub fn new(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || m.ncols() != dim {
            return Err(domain(format!(
                "coefficient matrix must be 2n×2n, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("coefficient matrix has non-finite entries"));
        }
        let n = dim / 2;
        let scale = m.norm().max(1.0);
        if (&m - m.adjoint()).norm() > STRUCTURE_TOL * scale {
            return Err(domain("coefficient matrix is not Hermitian"));
        }
        let h = m.view((0, 0), (n, n));
        let g = m.view((0, n), (n, n));
        let lower = (m.view((n, 0), (n, n)) - g.conjugate()).norm()
            + (m.view((n, n), (n, n)) - h.conjugate()).norm();
        if lower > STRUCTURE_TOL * scale {
            return Err(domain("coefficient matrix lacks the [[h, g], [g*, h*]] block structure"));
        }
        Ok(Self { n, m })
    }

    pub fn from_blocks(h: &CMatrix, g: &CMatrix) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || g.nrows() != n || g.ncols() != n {
            return Err(domain("blocks must be square and of equal size"));
        }
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(h);
        m.view_mut((0, n), (n, n)).copy_from(g);
        m.view_mut((n, 0), (n, n)).copy_from(&g.conjugate());
        m.view_mut((n, n), (n, n)).copy_from(&h.conjugate());
        Self::new(m)
    }

    /// `Σ ω_k b_k†b_k`.
    pub fn diagonal(omegas: &[f64]) -> Result<Self> {
        let n = omegas.len();
        let h = CMatrix::from_fn(n, n, |i, j| if i == j { c(0.5 * omegas[i]) } else { c(0.0) });
        Self::from_blocks(&h, &CMatrix::zeros(n, n))
    }

    /// `ω b†b + g(bb + b†b†)`.
    pub fn single_mode_squeezing(omega: f64, g: f64) -> Result<Self> {
        Self::from_blocks(
            &CMatrix::from_element(1, 1, c(0.5 * omega)),
            &CMatrix::from_element(1, 1, c(g)),
        )
    }

    /// `ω(b₁†b₁ + b₂†b₂) + g(b₁†b₂ + b₂†b₁)`.
    pub fn beamsplitter(omega: f64, g: f64) -> Result<Self> {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.5 * omega), c(0.5 * g), c(0.5 * g), c(0.5 * omega)]);
        Self::from_blocks(&h, &CMatrix::zeros(2, 2))
    }

    /// `ω(b₁†b₁ + b₂†b₂) + g(b₁b₂ + b₁†b₂†)`.
    pub fn two_mode_squeezing(omega: f64, g: f64) -> Result<Self> {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.5 * omega), c(0.0), c(0.0), c(0.5 * omega)]);
        let s = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5 * g), c(0.5 * g), c(0.0)]);
        Self::from_blocks(&h, &s)
    }

    /// Bath modes with the two-boson coupling
    /// `Σ ω_k b_k†b_k + Σ_{kl} (g_k g_l/E)(b_k + b_k†)(b_l + b_l†)`.
    pub fn two_boson_bath(modes: &DiscretizedBath, e: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(domain(format!("level energy must be positive, got {e}")));
        }
        let n = modes.len();
        let g = &modes.couplings;
        let coup = CMatrix::from_fn(n, n, |i, j| c(g[i] * g[j] / e));
        let h = CMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 0.5 * modes.omegas[i] } else { 0.0 };
            c(d) + coup[(i, j)]
        });
        Self::from_blocks(&h, &coup)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    /// `μM`.
    pub fn dynamical_matrix(&self) -> CMatrix {
        mu_left(&self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    pub a: CMatrix,
    pub b: CMatrix,
    /// Ascending.
    pub lambdas: Vec<f64>,
    pub k: Option<CMatrix>,
}

impl BogoliubovTransform {
    pub fn identity(n: usize) -> Self {
        Self {
            a: CMatrix::identity(n, n),
            b: CMatrix::zeros(n, n),
            lambdas: vec![0.0; n],
            k: None,
        }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `T = [[A, B], [B*, A*]]`.
    pub fn t(&self) -> CMatrix {
        let n = self.n();
        let mut t = CMatrix::zeros(2 * n, 2 * n);
        t.view_mut((0, 0), (n, n)).copy_from(&self.a);
        t.view_mut((0, n), (n, n)).copy_from(&self.b);
        t.view_mut((n, 0), (n, n)).copy_from(&self.b.conjugate());
        t.view_mut((n, n), (n, n)).copy_from(&self.a.conjugate());
        t
    }

    /// `T⁻¹ = μT†μ`.
    pub fn t_inverse(&self) -> CMatrix {
        mu_right(&mu_left(&self.t().adjoint()))
    }
}

/// Colpa's construction: with `M = K†K` (Cholesky) the Hermitian matrix
/// `KμK†` has `n` positive eigenvalues `λ/2`; its eigenvectors `u` give
/// the para-normalized eigenvectors `K⁻¹u√(λ/2)` of `μM`.
pub fn diagonalize(h: &QuadraticHamiltonian) -> Result<BogoliubovTransform> {
    let n = h.n;
    let not_pd = || {
        Error::Instability(
            "coefficient matrix is not positive definite (dynamical instability / zero mode)".into(),
        )
    };
    let l = h.m.clone().cholesky().ok_or_else(not_pd)?.l();
    // The complex factorization takes square roots of negative pivots
    // instead of failing.
    if (0..2 * n).any(|i| {
        let d = l[(i, i)];
        !(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re)
    }) {
        return Err(not_pd());
    }
    let k_up = l.adjoint();
    let mut w = mu_right(&k_up) * &l;
    // Hermitize to rounding before the eigensolver.
    w = (&w + w.adjoint()).scale(0.5);
    let eig = w.symmetric_eigen();
    let mut pos: Vec<usize> = (0..2 * n).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if pos.len() != n || (0..2 * n).any(|i| eig.eigenvalues[i] == 0.0) {
        return Err(Error::Instability("dynamical matrix has a zero mode".into()));
    }
    pos.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut u = CMatrix::zeros(2 * n, n);
    for (col, &i) in pos.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        u.set_column(col, &eig.eigenvectors.column(i).scale(s));
    }
    let v = k_up
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::Instability("singular Cholesky factor".into()))?;
    let mut x = v.rows(0, n).into_owned();
    let mut y = v.rows(n, n).into_owned();
    for col in 0..n {
        let (imax, _) = x
            .column(col)
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let z = x[(imax, col)];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for r in 0..n {
                x[(r, col)] *= phase;
                y[(r, col)] *= phase;
            }
        }
    }
    let lambdas = pos.iter().map(|&i| 2.0 * eig.eigenvalues[i]).collect();
    Ok(BogoliubovTransform {
        a: x.adjoint(),
        b: -y.adjoint(),
        lambdas,
        k: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalResiduals {
    /// `‖TμT†μ − I‖_F`.
    pub para_unitarity: f64,
    /// `‖AA† − BB† − I‖_F`.
    pub block: f64,
}

pub fn verify_canonical(t: &BogoliubovTransform) -> CanonicalResiduals {
    let n = t.n();
    let tm = t.t();
    let prod = mu_right(&(mu_right(&tm) * tm.adjoint()));
    let para_unitarity = (prod - CMatrix::identity(2 * n, 2 * n)).norm();
    let block = (&t.a * t.a.adjoint() - &t.b * t.b.adjoint() - CMatrix::identity(n, n)).norm();
    CanonicalResiduals { para_unitarity, block }
}

/// `‖TμMT⁻¹ − ½ diag(λ, −λ)‖_F`.
pub fn diagonalization_residual(h: &QuadraticHamiltonian, t: &BogoliubovTransform) -> f64 {
    let n = t.n();
    let d = t.t() * h.dynamical_matrix() * t.t_inverse();
    let target = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            c(0.0)
        } else if i < n {
            c(0.5 * t.lambdas[i])
        } else {
            c(-0.5 * t.lambdas[i - n])
        }
    });
    (d - target).norm()
}

/// Eigenvalues of `μM` (complex Schur), and the largest deviation from
/// exact `(λ, −λ)` pairing.
pub fn pairing_residual(h: &QuadraticHamiltonian) -> Result<(Vec<C64>, f64)> {
    let mut ev: Vec<C64> = h
        .dynamical_matrix()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Convergence("Schur decomposition failed".into()))?
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let k = ev.len();
    let res = (0..k / 2)
        .map(|i| (ev[i] + ev[k - 1 - i]).norm())
        .fold(0.0, f64::max);
    Ok((ev, res))
}

const LOG_SERIES_RADIUS: f64 = 0.1;
const MAX_SQRT: usize = 60;

fn denman_beavers(x: &CMatrix) -> Result<CMatrix> {
    let dim = x.nrows();
    let mut y = x.clone();
    let mut z = CMatrix::identity(dim, dim);
    for _ in 0..100 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Branch("singular iterate in matrix square root".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Branch("singular iterate in matrix square root".into()))?;
        let y_next = (&y + zi).scale(0.5);
        let z_next = (&z + yi).scale(0.5);
        let change = (&y_next - &y).norm() / y_next.norm();
        y = y_next;
        z = z_next;
        if change < 1e-15 {
            return Ok(y);
        }
    }
    Err(Error::Convergence("matrix square root did not converge".into()))
}

/// Principal logarithm by inverse scaling and squaring: square roots
/// until `‖X − I‖ < 0.1`, then the Mercator series, rescaled by `2^k`.
pub fn matrix_log(t: &CMatrix) -> Result<CMatrix> {
    let dim = t.nrows();
    let ev = t
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Convergence("Schur decomposition failed".into()))?;
    for z in ev.iter() {
        if z.norm() == 0.0 || (z.re < 0.0 && z.im.abs() <= 1e-10 * z.norm()) {
            return Err(Error::Branch(format!(
                "eigenvalue {z} lies on the branch cut of the logarithm"
            )));
        }
    }
    let id = CMatrix::identity(dim, dim);
    let mut x = t.clone();
    let mut k = 0;
    while (&x - &id).norm() >= LOG_SERIES_RADIUS {
        if k == MAX_SQRT {
            return Err(Error::Convergence("too many square roots in matrix logarithm".into()));
        }
        x = denman_beavers(&x)?;
        k += 1;
    }
    let e = &x - &id;
    let mut term = e.clone();
    let mut sum = e.clone();
    for j in 2..200 {
        term = &term * &e;
        let s = if j % 2 == 0 { -1.0 } else { 1.0 } / j as f64;
        sum += term.scale(s);
        if term.norm() / (j as f64) < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Ok(sum.scale((1u64 << k) as f64))
}

/// `K = iμ log T`, so that `T = e^{−iμK}`.
pub fn generator_k(t: &BogoliubovTransform) -> Result<CMatrix> {
    let log = matrix_log(&t.t())?;
    Ok(mu_left(&log) * C64::i())
}

/// `e^{−iμK}`.
pub fn transform_from_generator(k: &CMatrix) -> CMatrix {
    (mu_left(k) * (-C64::i())).exp()
}

/// First-order generator of the two-boson bath, built from
/// `A_kl = −2i g_k g_l /((ω_k − ω_l)E)` for `k ≠ l` and
/// `B_kl = −2 g_k g_l /((ω_k + ω_l)E)`: `K = [[−A, −iB], [iB, −Aᵀ]]`.
pub fn first_order_generator(modes: &DiscretizedBath, e: f64) -> CMatrix {
    let n = modes.len();
    let (w, g) = (&modes.omegas, &modes.couplings);
    let a = CMatrix::from_fn(n, n, |k, l| {
        if k == l {
            c(0.0)
        } else {
            Complex::new(0.0, -2.0 * g[k] * g[l] / ((w[k] - w[l]) * e))
        }
    });
    let b = CMatrix::from_fn(n, n, |k, l| c(-2.0 * g[k] * g[l] / ((w[k] + w[l]) * e)));
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(-&a));
    out.view_mut((0, n), (n, n)).copy_from(&(&b * (-C64::i())));
    out.view_mut((n, 0), (n, n)).copy_from(&(&b * C64::i()));
    out.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    out
}

pub const FOCK_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockSpectrum {
    /// Lowest levels, ascending.
    pub levels: Vec<f64>,
    pub truncation: usize,
    /// Largest change of the reported spacings against a smaller
    /// truncation.
    pub drift: f64,
    pub warning: Option<String>,
}

impl FockSpectrum {
    pub fn spacings(&self) -> Vec<f64> {
        self.levels.iter().skip(1).map(|e| e - self.levels[0]).collect()
    }
}

fn fock_levels(h: &QuadraticHamiltonian, d: usize, count: usize) -> Vec<f64> {
    let n = h.n;
    let dim = d.pow(n as u32);
    let digits = |mut idx: usize| {
        let mut occ = vec![0usize; n];
        for o in occ.iter_mut() {
            *o = idx % d;
            idx /= d;
        }
        occ
    };
    let index = |occ: &[usize]| occ.iter().rev().fold(0, |acc, &o| acc * d + o);
    // β_i for i < n annihilates mode i, otherwise creates mode i − n.
    let apply = |op: usize, dagger: bool, occ: &mut Vec<usize>| -> f64 {
        let (mode, create) = if op < n { (op, dagger) } else { (op - n, !dagger) };
        if create {
            if occ[mode] + 1 >= d {
                return 0.0;
            }
            occ[mode] += 1;
            (occ[mode] as f64).sqrt()
        } else {
            if occ[mode] == 0 {
                return 0.0;
            }
            let amp = (occ[mode] as f64).sqrt();
            occ[mode] -= 1;
            amp
        }
    };
    let mut mat = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let base = digits(col);
        for j in 0..2 * n {
            for i in 0..2 * n {
                let coef = h.m[(i, j)];
                if coef.norm() == 0.0 {
                    continue;
                }
                let mut occ = base.clone();
                let a1 = apply(j, false, &mut occ);
                if a1 == 0.0 {
                    continue;
                }
                let a2 = apply(i, true, &mut occ);
                if a2 == 0.0 {
                    continue;
                }
                mat[(index(&occ), col)] += coef * (a1 * a2);
            }
        }
    }
    let mut vals: Vec<f64> = if mat.iter().all(|z| z.im == 0.0) {
        let re = mat.map(|z| z.re);
        let re = (&re + re.transpose()) * 0.5;
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let mat = (&mat + mat.adjoint()) * c(0.5);
        mat.symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    vals
}

/// Lowest `count` levels of `H` in a Fock basis with `truncation`
/// states per mode.
pub fn fock_oracle(h: &QuadraticHamiltonian, truncation: usize, count: usize) -> Result<FockSpectrum> {
    if h.n > 3 {
        return Err(domain(format!("Fock oracle supports at most 3 modes, got {}", h.n)));
    }
    if truncation < 4 || count < 2 {
        return Err(domain("Fock oracle needs truncation ≥ 4 and at least 2 levels"));
    }
    let levels = fock_levels(h, truncation, count);
    let coarse = fock_levels(h, truncation - (truncation / 5).max(2), count);
    let spacing = |v: &[f64]| v.iter().skip(1).map(|e| e - v[0]).collect::<Vec<_>>();
    let drift = spacing(&levels)
        .iter()
        .zip(spacing(&coarse))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let warning = (drift > FOCK_DRIFT_TOL)
        .then(|| format!("spacings moved by {drift:.3e} between truncations; increase truncation"));
    Ok(FockSpectrum {
        levels,
        truncation,
        drift,
        warning,
    })
}

/// `μ` as a dense diagonal, for callers composing their own checks.
pub fn metric(n: usize) -> CMatrix {
    CMatrix::from_diagonal(&mu(n).map(c))
}
