//! Gaussian continuous-variable states and their quadratic dynamics.
//!
//! Conventions: natural units with ħ = 1, quadrature ordering
//! (q₁, p₁, …, q_N, p_N), [q, p] = i, vacuum covariance ½·I.

use nalgebra::{DMatrix, DVector};

use crate::constants::PhysicalConstants;
use crate::error::{invalid, require_positive, Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, CMat};
use crate::tol;

/// Relative floor below which 2ν̃ is treated as exactly 1.
pub const SYMPLECTIC_NOISE: f64 = 1e-14;

/// Symplectic form Ω = ⊕ [[0, 1], [−1, 0]].
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let s = GaussianState { mean, cov };
        s.validate()?;
        Ok(s)
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Two-mode squeezed vacuum with squeezing parameter r.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (ch, sh) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let mut cov = DMatrix::zeros(4, 4);
        for i in 0..4 {
            cov[(i, i)] = ch;
        }
        cov[(0, 2)] = sh;
        cov[(2, 0)] = sh;
        cov[(1, 3)] = -sh;
        cov[(3, 1)] = -sh;
        GaussianState {
            mean: DVector::zeros(4),
            cov,
        }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Checks shape, symmetry and the uncertainty principle V + iΩ/2 ⪰ 0.
    pub fn validate(&self) -> Result<()> {
        let n = self.mean.len();
        if n == 0 || n % 2 != 0 || self.cov.nrows() != n || self.cov.ncols() != n {
            return Err(Error::Dimension(format!(
                "mean of length {n} with {}x{} covariance",
                self.cov.nrows(),
                self.cov.ncols()
            )));
        }
        if self.cov.iter().chain(self.mean.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite moments".into()));
        }
        let asym = (&self.cov - self.cov.transpose()).abs().max();
        if asym > tol::STATE * self.cov.abs().max().max(1.0) {
            return Err(Error::InvalidState(format!("covariance not symmetric ({asym:e})")));
        }
        let min = self.uncertainty_min_eigenvalue();
        if min < -tol::ENTANGLEMENT_ZERO {
            return Err(Error::InvalidState(format!(
                "covariance violates the uncertainty principle (eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue of V + iΩ/2.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let o = symplectic_form(self.modes());
        let m = CMat::from_fn(self.cov.nrows(), self.cov.ncols(), |i, j| {
            c(self.cov[(i, j)], 0.5 * o[(i, j)])
        });
        hermitian_eigenvalues(&m)[0]
    }

    /// Marginal state of the listed modes, in the listed order.
    pub fn reduced(&self, modes: &[usize]) -> Result<GaussianState> {
        let n = self.modes();
        if modes.is_empty() || modes.iter().any(|&k| k >= n) {
            return Err(Error::Dimension(format!("modes {modes:?} of {n}")));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cov[(idx[i], idx[j])]);
        Ok(GaussianState { mean, cov })
    }

    /// State of the other modes after an ideal measurement of the position
    /// quadrature of `mode`, for the outcome equal to its mean. The
    /// conditional covariance does not depend on the outcome.
    pub fn conditioned_on_position(&self, mode: usize) -> Result<GaussianState> {
        let n = self.modes();
        if mode >= n || n < 2 {
            return Err(Error::Dimension(format!("mode {mode} of {n}")));
        }
        let rest: Vec<usize> = (0..n).filter(|&k| k != mode).collect();
        let idx: Vec<usize> = rest.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let x = 2 * mode;
        let vx = self.cov[(x, x)];
        if vx <= 0.0 {
            return Err(Error::InvalidState("non-positive position variance".into()));
        }
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            self.cov[(idx[i], idx[j])] - self.cov[(idx[i], x)] * self.cov[(x, idx[j])] / vx
        });
        Ok(GaussianState { mean, cov })
    }

    /// det(2V); equals 1 exactly for pure states.
    pub fn purity_determinant(&self) -> f64 {
        (&self.cov * 2.0).determinant()
    }

    /// Symplectic eigenvalues ν_j (ascending), from the spectrum ±ν_j of the
    /// Hermitian matrix √V (iΩ) √V.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }
}

fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows() / 2;
    let eig = cov.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidState(
            "covariance is not positive definite".into(),
        ));
    }
    let sqrt_v = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let o = symplectic_form(n);
    let m = &sqrt_v * o * &sqrt_v;
    let herm = CMat::from_fn(2 * n, 2 * n, |i, j| c(0.0, m[(i, j)]));
    let vals = hermitian_eigenvalues(&herm);
    Ok(vals[n..].to_vec())
}

/// Symmetric quadratic Hamiltonian H = ½ RᵀMR + bᵀR.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    m: DMatrix<f64>,
    linear: DVector<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(m: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || n % 2 != 0 || m.ncols() != n || linear.len() != n {
            return Err(Error::Dimension(format!(
                "{}x{} coefficient matrix with {} linear terms",
                m.nrows(),
                m.ncols(),
                linear.len()
            )));
        }
        if m.iter().chain(linear.iter()).any(|x| !x.is_finite()) {
            return Err(invalid("hamiltonian", "non-finite coefficient"));
        }
        if (&m - m.transpose()).abs().max() > 1e-12 * m.abs().max().max(1.0) {
            return Err(invalid("hamiltonian", "coefficient matrix must be symmetric"));
        }
        Ok(QuadraticHamiltonian { m, linear })
    }

    pub fn quadratic(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        Self::new(m, DVector::zeros(n))
    }

    pub fn zero(modes: usize) -> Self {
        QuadraticHamiltonian {
            m: DMatrix::zeros(2 * modes, 2 * modes),
            linear: DVector::zeros(2 * modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    /// Symplectic matrix S = exp(ΩMt) and the mean offset d, so that
    /// R(t) = S R(0) + d. Both come from one exponential of the affine
    /// generator [[ΩM, Ωb], [0, 0]].
    pub fn flow(&self, t: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let n = self.m.nrows();
        let o = symplectic_form(n / 2);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(&(&o * &self.m * t));
        a.view_mut((0, n), (n, 1)).copy_from(&(&o * &self.linear * t));
        let e = a.exp();
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "matrix exponential overflowed (|Mt| = {:e})",
                self.m.abs().max() * t.abs()
            )));
        }
        let s = e.view((0, 0), (n, n)).into_owned();
        let d = e.view((0, n), (n, 1)).column(0).into_owned();
        Ok((s, d))
    }
}

/// Heisenberg evolution under a quadratic Hamiltonian for time t.
pub fn symplectic_evolve(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    t: f64,
) -> Result<GaussianState> {
    if h.m.nrows() != state.mean.len() {
        return Err(Error::Dimension(format!(
            "{}-mode Hamiltonian on a {}-mode state",
            h.m.nrows() / 2,
            state.modes()
        )));
    }
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    let (s, d) = h.flow(t)?;
    let mean = &s * &state.mean + d;
    let cov = &s * &state.cov * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState { mean, cov })
}

/// Logarithmic negativity across the cut `side` | rest (mode indices).
/// Sums max(0, −ln 2ν̃) over the symplectic eigenvalues of the partially
/// transposed covariance; for a one-mode side at most one term is non-zero.
pub fn log_negativity(state: &GaussianState, side: &[usize]) -> Result<f64> {
    state.validate()?;
    let n = state.modes();
    if side.is_empty() || side.len() >= n || side.iter().any(|&k| k >= n) {
        return Err(Error::Dimension(format!(
            "bipartition {side:?} of {n} modes"
        )));
    }
    let mut flip = DMatrix::<f64>::identity(2 * n, 2 * n);
    for &k in side {
        flip[(2 * k + 1, 2 * k + 1)] = -1.0;
    }
    let pt = &flip * &state.cov * &flip;
    let nus = symplectic_eigenvalues(&pt)?;
    Ok(nus
        .iter()
        .map(|&nu| {
            let x = 2.0 * nu;
            if x >= 1.0 - SYMPLECTIC_NOISE {
                0.0
            } else {
                -x.ln()
            }
        })
        .sum())
}

/// Mode order of the hybrid ensemble.
pub const MODE_Q: usize = 0;
pub const MODE_C: usize = 1;
pub const MODE_Q_PRIME: usize = 2;

/// H_eff = g₁ p_Q x_C + g₂ q_{Q'} k_C on modes (Q, C, Q').
pub fn hall_reginatto_hamiltonian(g1: f64, g2: f64) -> Result<QuadraticHamiltonian> {
    let mut m = DMatrix::zeros(6, 6);
    let (p_q, x_c, k_c, q_qp) = (1, 2, 3, 4);
    m[(p_q, x_c)] = g1;
    m[(x_c, p_q)] = g1;
    m[(q_qp, k_c)] = g2;
    m[(k_c, q_qp)] = g2;
    QuadraticHamiltonian::quadratic(m)
}

/// Evolves the hybrid ensemble and returns the final three-mode state and
/// the Q|Q' log-negativity with C traced out. `initial` defaults to vacua.
pub fn hall_reginatto_protocol(
    g1: f64,
    g2: f64,
    t: f64,
    initial: Option<&GaussianState>,
) -> Result<(GaussianState, f64)> {
    let vac = GaussianState::vacuum(3);
    let init = initial.unwrap_or(&vac);
    if init.modes() != 3 {
        return Err(Error::Dimension(format!(
            "hybrid protocol needs 3 modes, got {}",
            init.modes()
        )));
    }
    let h = hall_reginatto_hamiltonian(g1, g2)?;
    let out = symplectic_evolve(init, &h, t)?;
    let qq = out.reduced(&[MODE_Q, MODE_Q_PRIME])?;
    let en = log_negativity(&qq, &[0])?;
    Ok((out, en))
}

/// Q|Q' log-negativity of a hybrid-protocol output with the position of C
/// read out instead of traced over, i.e. C treated as a classical
/// configuration variable.
pub fn hall_reginatto_conditional_log_negativity(state: &GaussianState) -> Result<f64> {
    if state.modes() != 3 {
        return Err(Error::Dimension(format!(
            "hybrid protocol needs 3 modes, got {}",
            state.modes()
        )));
    }
    // remaining modes keep their order: Q, Q'
    log_negativity(&state.conditioned_on_position(MODE_C)?, &[0])
}

/// Largest allowed 2Gm/(d³ω²), the relative stiffness change caused by the
/// quadratic part of the mutual potential.
pub const TRAP_EXPANSION_LIMIT: f64 = 0.1;

/// Two trapped masses with the Newtonian potential expanded to second order
/// in the displacements, in dimensionless quadratures q = x√(mω/ħ).
pub fn trapped_oscillator_hamiltonian(
    m: f64,
    omega: f64,
    d: f64,
    k: &PhysicalConstants,
) -> Result<QuadraticHamiltonian> {
    require_positive("m", m)?;
    require_positive("omega", omega)?;
    require_positive("d", d)?;
    let stiffness = 2.0 * k.g * m / (d.powi(3) * omega * omega);
    if stiffness > TRAP_EXPANSION_LIMIT {
        return Err(invalid(
            "d",
            format!(
                "2Gm/(d^3 omega^2) = {stiffness:e} exceeds {TRAP_EXPANSION_LIMIT}; \
                 the quadratic expansion is not valid"
            ),
        ));
    }
    // λ x₁x₂ with λ = 2Gm²/d³, rescaled by ħ/(mω) and divided by ħ.
    let kappa = 2.0 * k.g * m / (d.powi(3) * omega);
    let lin = k.g * m * m / (d * d) / (k.hbar * m * omega).sqrt();
    let mut mm = DMatrix::zeros(4, 4);
    mm[(0, 0)] = omega - kappa;
    mm[(1, 1)] = omega;
    mm[(2, 2)] = omega - kappa;
    mm[(3, 3)] = omega;
    mm[(0, 2)] = kappa;
    mm[(2, 0)] = kappa;
    let b = DVector::from_vec(vec![-lin, 0.0, lin, 0.0]);
    QuadraticHamiltonian::new(mm, b)
}

/// Two ground-state oscillators evolved for t seconds; returns the state and
/// the log-negativity between them.
pub fn trapped_oscillator_protocol(
    m: f64,
    omega: f64,
    d: f64,
    t: f64,
    k: &PhysicalConstants,
) -> Result<(GaussianState, f64)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    let h = trapped_oscillator_hamiltonian(m, omega, d, k)?;
    let out = symplectic_evolve(&GaussianState::vacuum(2), &h, t)?;
    let en = log_negativity(&out, &[0])?;
    Ok((out, en))
}
