//! Dense states over labelled composite Hilbert spaces.
//!
//! Basis ordering is row-major over the layout: the first subsystem is the
//! most significant digit of a basis index. All states are immutable values.

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, hermitian_eigenvalues, CMat, CVec, C64, ONE, ZERO};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    subsystems: Vec<Subsystem>,
}

impl HilbertLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<Subsystem> = parts
            .into_iter()
            .map(|(l, d)| Subsystem {
                label: l.into(),
                dim: d,
            })
            .collect();
        if subsystems.is_empty() {
            return Err(Error::Dimension("layout needs at least one subsystem".into()));
        }
        let mut seen = HashSet::new();
        for s in &subsystems {
            if s.dim == 0 {
                return Err(Error::Dimension(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(Error::Dimension(format!("duplicate label `{}`", s.label)));
            }
        }
        let total = subsystems
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.dim));
        if total.is_none() {
            return Err(Error::Dimension("total dimension overflows".into()));
        }
        Ok(HilbertLayout { subsystems })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn qubits(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|l| (*l, 2)))
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    pub fn concat(&self, other: &HilbertLayout) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Sub-layout with the given labels, kept in this layout's order.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let pos = self.positions_sorted(labels)?;
        Self::new(pos.iter().map(|&p| {
            let s = &self.subsystems[p];
            (s.label.clone(), s.dim)
        }))
    }

    pub fn relabeled(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.len()
            )));
        }
        Self::new(labels.iter().zip(&self.subsystems).map(|(l, s)| (*l, s.dim)))
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::Dimension(format!("label `{l}` repeated")));
            }
            out.push(p);
        }
        Ok(out)
    }

    fn positions_sorted(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut p = self.positions(labels)?;
        p.sort_unstable();
        Ok(p)
    }

    /// For every basis index, its index within the `group` subsystems (in the
    /// given order) and within the remaining subsystems (in layout order).
    fn split(&self, group: &[usize]) -> Split {
        let dims = self.dims();
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !group.contains(p)).collect();
        let gdim: usize = group.iter().map(|&p| dims[p]).product();
        let rdim: usize = rest.iter().map(|&p| dims[p]).product();
        let total = self.total_dim();
        let mut g_of = vec![0; total];
        let mut r_of = vec![0; total];
        let mut full = vec![0; total];
        let mut digits = vec![0usize; dims.len()];
        for idx in 0..total {
            let mut rem = idx;
            for k in (0..dims.len()).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            let g = group.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let r = rest.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            g_of[idx] = g;
            r_of[idx] = r;
            full[g * rdim + r] = idx;
        }
        Split {
            gdim,
            rdim,
            g_of,
            r_of,
            full,
        }
    }
}

struct Split {
    gdim: usize,
    rdim: usize,
    g_of: Vec<usize>,
    r_of: Vec<usize>,
    /// full[g * rdim + r] is the basis index with group part g and rest part r.
    full: Vec<usize>,
}

impl Split {
    fn index(&self, g: usize, r: usize) -> usize {
        self.full[g * self.rdim + r]
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVec,
    layout: HilbertLayout,
}

impl PureState {
    /// Checks dimension and normalization (within [`tol::STATE`]).
    pub fn new(amps: impl Into<Vec<C64>>, layout: HilbertLayout) -> Result<Self> {
        let s = Self::unchecked(CVec::from_vec(amps.into()), layout)?;
        let n = s.norm_sqr();
        if (n - 1.0).abs() > tol::STATE {
            return Err(Error::InvalidState(format!("norm^2 = {n}, expected 1")));
        }
        Ok(s)
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(amps: impl Into<Vec<C64>>, layout: HilbertLayout) -> Result<Self> {
        let s = Self::unchecked(CVec::from_vec(amps.into()), layout)?;
        s.renormalized()
    }

    pub fn basis(layout: HilbertLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::Dimension(format!("basis index {index} >= {d}")));
        }
        let mut v = CVec::zeros(d);
        v[index] = ONE;
        Ok(PureState { amps: v, layout })
    }

    /// Basis state from one digit per subsystem.
    pub fn from_digits(layout: HilbertLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(d, n)| d >= n) {
            return Err(Error::Dimension(format!("digits {digits:?} for dims {dims:?}")));
        }
        let idx = digits.iter().zip(&dims).fold(0, |acc, (d, n)| acc * n + d);
        Self::basis(layout, idx)
    }

    pub(crate) fn unchecked(amps: CVec, layout: HilbertLayout) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for total dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        Ok(PureState { amps, layout })
    }

    pub fn renormalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("zero or non-finite norm".into()));
        }
        Ok(PureState {
            amps: &self.amps / c(n, 0.0),
            layout: self.layout.clone(),
        })
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::STATE
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: &self.amps * self.amps.adjoint(),
            layout: self.layout.clone(),
        }
    }

    pub fn relabeled(&self, labels: &[&str]) -> Result<Self> {
        Ok(PureState {
            amps: self.amps.clone(),
            layout: self.layout.relabeled(labels)?,
        })
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        PureState {
            amps: &self.amps * C64::from_polar(1.0, theta),
            layout: self.layout.clone(),
        }
    }

    /// Expectation value ⟨ψ|O|ψ⟩ with `op` acting on `targets`.
    pub fn expectation(&self, op: &LinearOperator, targets: &[&str]) -> Result<C64> {
        let out = apply(op, self, targets)?;
        Ok(self.amps.dotc(&out.amps))
    }
}

/// Density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    layout: HilbertLayout,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (within [`tol::STATE`]) and
    /// positivity (smallest eigenvalue >= -[`tol::ENTANGLEMENT_ZERO`]).
    pub fn new(mat: CMat, layout: HilbertLayout) -> Result<Self> {
        let rho = Self::unchecked(mat, layout)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn unchecked(mat: CMat, layout: HilbertLayout) -> Result<Self> {
        let d = layout.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for total dimension {d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DensityMatrix { mat, layout })
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        DensityMatrix {
            mat: CMat::identity(d, d) * c(1.0 / d as f64, 0.0),
            layout,
        }
    }

    /// Convex combination Σ wᵢ ρᵢ; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let d = first.1.layout.total_dim();
        let mut acc = CMat::zeros(d, d);
        let mut wsum = 0.0;
        for (w, rho) in parts {
            same_layout(&first.1.layout, &rho.layout)?;
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidState(format!("mixture weight {w}")));
            }
            acc += &rho.mat * c(*w, 0.0);
            wsum += w;
        }
        if (wsum - 1.0).abs() > tol::STATE {
            return Err(Error::InvalidState(format!("mixture weights sum to {wsum}")));
        }
        Ok(DensityMatrix {
            mat: acc,
            layout: first.1.layout.clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::max_abs_diff(&self.mat, &self.mat.adjoint());
        if herm > tol::STATE {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&self.mat);
        if (tr - ONE).norm() > tol::STATE {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.eigenvalues()[0];
        if min < -tol::ENTANGLEMENT_ZERO {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.mat)
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn relabeled(&self, labels: &[&str]) -> Result<Self> {
        Ok(DensityMatrix {
            mat: self.mat.clone(),
            layout: self.layout.relabeled(labels)?,
        })
    }

    /// Probability of basis outcome `index`.
    pub fn population(&self, index: usize) -> f64 {
        self.mat[(index, index)].re
    }
}

/// Square operator acting on a list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    mat: CMat,
    dims: Vec<usize>,
}

impl LinearOperator {
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension(format!(
                "{}x{} operator for dims {dims:?}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(LinearOperator { mat, dims })
    }

    pub fn on_qubit(m: [[C64; 2]; 2]) -> Self {
        LinearOperator {
            mat: CMat::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]),
            dims: vec![2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        LinearOperator {
            mat: CMat::identity(dim, dim),
            dims: vec![dim],
        }
    }

    pub fn pauli_x() -> Self {
        Self::on_qubit([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self::on_qubit([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::on_qubit([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::on_qubit([[h, h], [h, -h]])
    }

    /// |index⟩⟨index| on a `dim`-level system.
    pub fn projector(dim: usize, index: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = ONE;
        LinearOperator { mat: m, dims: vec![dim] }
    }

    /// Truncated annihilation operator on `cutoff` Fock levels.
    pub fn annihilation(cutoff: usize) -> Self {
        let mut m = CMat::zeros(cutoff, cutoff);
        for n in 1..cutoff {
            m[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
        }
        LinearOperator { mat: m, dims: vec![cutoff] }
    }

    pub fn creation(cutoff: usize) -> Self {
        Self::annihilation(cutoff).dagger()
    }

    pub fn number(cutoff: usize) -> Self {
        let m = CMat::from_diagonal(&CVec::from_iterator(
            cutoff,
            (0..cutoff).map(|n| c(n as f64, 0.0)),
        ));
        LinearOperator { mat: m, dims: vec![cutoff] }
    }

    /// D(β) = exp(β a† − β* a) exponentiated exactly on the truncated space,
    /// so the result is unitary to rounding.
    pub fn displacement(beta: C64, cutoff: usize) -> Self {
        let a = Self::annihilation(cutoff).mat;
        let k = a.adjoint() * beta - &a * beta.conj();
        // K is anti-Hermitian; H = iK is Hermitian and exp(K) = exp(-iH).
        let h = k * linalg::I;
        LinearOperator {
            mat: linalg::expm_hermitian(&h, 1.0),
            dims: vec![cutoff],
        }
    }

    /// exp(-i h t) for a Hermitian generator.
    pub fn evolution(h: &LinearOperator, t: f64) -> Self {
        LinearOperator {
            mat: linalg::expm_hermitian(&h.mat, t),
            dims: h.dims.clone(),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dagger(&self) -> Self {
        LinearOperator {
            mat: self.mat.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// self · other (other acts first).
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "compose {:?} with {:?}",
                self.dims, other.dims
            )));
        }
        Ok(LinearOperator {
            mat: &self.mat * &other.mat,
            dims: self.dims.clone(),
        })
    }

    pub fn tensor(&self, other: &LinearOperator) -> Self {
        LinearOperator {
            mat: linalg::kron(&self.mat, &other.mat),
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        LinearOperator {
            mat: &self.mat * k,
            dims: self.dims.clone(),
        }
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Dimension("operator sum over different dims".into()));
        }
        Ok(LinearOperator {
            mat: &self.mat + &other.mat,
            dims: self.dims.clone(),
        })
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        linalg::is_unitary(&self.mat, tol)
    }
}

fn same_layout(a: &HilbertLayout, b: &HilbertLayout) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "layouts differ: {:?} vs {:?}",
            a.labels(),
            b.labels()
        )))
    }
}

fn target_split(layout: &HilbertLayout, op: &LinearOperator, targets: &[&str]) -> Result<Split> {
    let pos = layout.positions(targets)?;
    let tdims: Vec<usize> = pos.iter().map(|&p| layout.subsystems[p].dim).collect();
    if tdims != op.dims {
        return Err(Error::Dimension(format!(
            "operator dims {:?} vs target dims {tdims:?}",
            op.dims
        )));
    }
    Ok(layout.split(&pos))
}

/// Kronecker product of normalized states; layouts are concatenated.
pub fn tensor(states: &[PureState]) -> Result<PureState> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::InvalidState("tensor of an empty sequence".into()))?;
    for s in states {
        if !s.is_normalized() {
            return Err(Error::InvalidState(format!(
                "tensor factor not normalized (norm^2 {})",
                s.norm_sqr()
            )));
        }
    }
    let mut acc = first.clone();
    for s in rest {
        acc = PureState {
            amps: linalg::kron_vec(&acc.amps, &s.amps),
            layout: acc.layout.concat(&s.layout)?,
        };
    }
    Ok(acc)
}

pub fn tensor_density(states: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::InvalidState("tensor of an empty sequence".into()))?;
    let mut acc = first.clone();
    for s in rest {
        acc = DensityMatrix {
            mat: linalg::kron(&acc.mat, &s.mat),
            layout: acc.layout.concat(&s.layout)?,
        };
    }
    Ok(acc)
}

/// Applies `op` to the `targets` subsystems (in the operator's tensor order),
/// identity elsewhere. The result is not renormalized, so the norm is kept
/// exactly when `op` is unitary.
pub fn apply(op: &LinearOperator, state: &PureState, targets: &[&str]) -> Result<PureState> {
    let sp = target_split(&state.layout, op, targets)?;
    let mut out = CVec::zeros(state.amps.len());
    let mut buf = CVec::zeros(sp.gdim);
    for r in 0..sp.rdim {
        for g in 0..sp.gdim {
            buf[g] = state.amps[sp.index(g, r)];
        }
        let y = &op.mat * &buf;
        for g in 0..sp.gdim {
            out[sp.index(g, r)] = y[g];
        }
    }
    Ok(PureState {
        amps: out,
        layout: state.layout.clone(),
    })
}

/// Full-space matrix of `op` acting on `targets`.
pub fn embed(op: &LinearOperator, layout: &HilbertLayout, targets: &[&str]) -> Result<CMat> {
    let sp = target_split(layout, op, targets)?;
    let d = layout.total_dim();
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if sp.r_of[i] == sp.r_of[j] {
                m[(i, j)] = op.mat[(sp.g_of[i], sp.g_of[j])];
            }
        }
    }
    Ok(m)
}

/// O ρ O† with `op` acting on `targets`. Not renormalized.
pub fn apply_to_density(
    op: &LinearOperator,
    rho: &DensityMatrix,
    targets: &[&str],
) -> Result<DensityMatrix> {
    let o = embed(op, &rho.layout, targets)?;
    Ok(DensityMatrix {
        mat: &o * &rho.mat * o.adjoint(),
        layout: rho.layout.clone(),
    })
}

/// Reduced state on `keep` (kept in layout order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Dimension("partial trace must keep a subsystem".into()));
    }
    let pos = rho.layout.positions_sorted(keep)?;
    let layout = rho.layout.select(keep)?;
    let sp = rho.layout.split(&pos);
    let mut out = CMat::zeros(sp.gdim, sp.gdim);
    for g in 0..sp.gdim {
        for h in 0..sp.gdim {
            let mut s = ZERO;
            for r in 0..sp.rdim {
                s += rho.mat[(sp.index(g, r), sp.index(h, r))];
            }
            out[(g, h)] = s;
        }
    }
    Ok(DensityMatrix { mat: out, layout })
}

/// Reduced state of a pure state, computed from its amplitude matrix.
pub fn reduced_state(psi: &PureState, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Dimension("partial trace must keep a subsystem".into()));
    }
    let pos = psi.layout.positions_sorted(keep)?;
    let layout = psi.layout.select(keep)?;
    let sp = psi.layout.split(&pos);
    let m = CMat::from_fn(sp.gdim, sp.rdim, |g, r| psi.amps[sp.index(g, r)]);
    Ok(DensityMatrix {
        mat: &m * m.adjoint(),
        layout,
    })
}

fn bipartition(layout: &HilbertLayout, side: &[&str]) -> Result<Vec<usize>> {
    let pos = layout.positions_sorted(side)?;
    if pos.is_empty() || pos.len() == layout.len() {
        return Err(Error::Dimension(
            "bipartition needs a non-empty proper subset of subsystems".into(),
        ));
    }
    Ok(pos)
}

/// Partial transpose over the `side` subsystems.
pub fn partial_transpose(rho: &DensityMatrix, side: &[&str]) -> Result<CMat> {
    let pos = bipartition(&rho.layout, side)?;
    let sp = rho.layout.split(&pos);
    let d = rho.layout.total_dim();
    let mut out = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let (a, b) = (sp.g_of[i], sp.r_of[i]);
            let (a2, b2) = (sp.g_of[j], sp.r_of[j]);
            out[(sp.index(a2, b), sp.index(a, b2))] = rho.mat[(i, j)];
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the partial transpose over `side`.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix, side: &[&str]) -> Result<f64> {
    Ok(hermitian_eigenvalues(&partial_transpose(rho, side)?)[0])
}

/// Sum of |negative eigenvalues| of the partial transpose over `side`.
pub fn negativity(rho: &DensityMatrix, side: &[&str]) -> Result<f64> {
    let ev = hermitian_eigenvalues(&partial_transpose(rho, side)?);
    Ok(ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum())
}

/// PPT test for a two-qubit state (necessary and sufficient there).
pub fn ppt_separable(rho: &DensityMatrix) -> Result<bool> {
    if rho.layout.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "PPT separability needs a 2x2 layout, got {:?}",
            rho.layout.dims()
        )));
    }
    let first = rho.layout.labels()[0].to_string();
    Ok(min_partial_transpose_eigenvalue(rho, &[first.as_str()])? >= -tol::ENTANGLEMENT_ZERO)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyBase {
    #[default]
    Bits,
    Nats,
}

fn shannon(probs: &[f64], base: EntropyBase) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    let h = h.max(0.0);
    match base {
        EntropyBase::Bits => h / std::f64::consts::LN_2,
        EntropyBase::Nats => h,
    }
}

/// von Neumann entropy of the reduced state on `side`, in bits.
pub fn entanglement_entropy(psi: &PureState, side: &[&str]) -> Result<f64> {
    entanglement_entropy_in(psi, side, EntropyBase::Bits)
}

pub fn entanglement_entropy_in(psi: &PureState, side: &[&str], base: EntropyBase) -> Result<f64> {
    if !psi.is_normalized() {
        return Err(Error::InvalidState(format!(
            "entropy of a non-normalized state (norm^2 {})",
            psi.norm_sqr()
        )));
    }
    bipartition(&psi.layout, side)?;
    let red = reduced_state(psi, side)?;
    Ok(shannon(&red.eigenvalues(), base))
}

pub fn von_neumann_entropy(rho: &DensityMatrix, base: EntropyBase) -> f64 {
    shannon(&rho.eigenvalues(), base)
}

/// 1 − Tr ρ².
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// Anything that can be compared by fidelity.
pub trait QuantumState {
    fn layout(&self) -> &HilbertLayout;
    fn as_pure(&self) -> Option<&PureState>;
    fn density(&self) -> DensityMatrix;
}

impl QuantumState for PureState {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn as_pure(&self) -> Option<&PureState> {
        Some(self)
    }
    fn density(&self) -> DensityMatrix {
        self.to_density()
    }
}

impl QuantumState for DensityMatrix {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn as_pure(&self) -> Option<&PureState> {
        None
    }
    fn density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// |⟨a|b⟩|² for pure inputs, ⟨ψ|σ|ψ⟩ for one pure input, and the squared
/// Uhlmann fidelity (Tr √(√ρ σ √ρ))² otherwise. Clamped to [0, 1].
pub fn fidelity(a: &impl QuantumState, b: &impl QuantumState) -> Result<f64> {
    same_layout(a.layout(), b.layout())?;
    let f = match (a.as_pure(), b.as_pure()) {
        (Some(x), Some(y)) => x.amps.dotc(&y.amps).norm_sqr(),
        (Some(x), None) => (x.amps.adjoint() * b.density().mat * &x.amps)[(0, 0)].re,
        (None, Some(y)) => (y.amps.adjoint() * a.density().mat * &y.amps)[(0, 0)].re,
        (None, None) => {
            let s = linalg::sqrtm_psd(&a.density().mat);
            let inner = &s * &b.density().mat * &s;
            let ev = hermitian_eigenvalues(&inner);
            // Rounding leaves O(1e-16) eigenvalues in the null space whose
            // square roots would otherwise add O(1e-8) each.
            let floor = 1e-13 * ev.iter().cloned().fold(0.0, f64::max);
            let t: f64 = ev.iter().filter(|&&x| x > floor).map(|&x| x.sqrt()).sum();
            t * t
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Poisson weight of a coherent state beyond the first `cutoff` levels.
pub fn truncation_leakage(alpha: C64, cutoff: usize) -> f64 {
    let mu = alpha.norm_sqr();
    if mu == 0.0 {
        return 0.0;
    }
    // Work in logs so large |α| does not underflow e^{-μ}.
    let mut lp = -mu;
    for n in 1..=cutoff {
        lp += (mu / n as f64).ln();
    }
    let mut sum = 0.0;
    let mut n = cutoff;
    loop {
        let p = lp.exp();
        sum += p;
        n += 1;
        lp += (mu / n as f64).ln();
        if (n as f64) > mu && (p < 1e-18 * sum || p == 0.0) {
            break;
        }
        if n > cutoff + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Coherent state on `cutoff` Fock levels under the label `mode`.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<PureState> {
    coherent_state_with(alpha, cutoff, "mode", tol::TRUNCATION_LEAKAGE).map(|(s, _)| s)
}

/// Coherent state with explicit label and leakage tolerance; returns the
/// renormalized truncated state and the discarded weight.
pub fn coherent_state_with(
    alpha: C64,
    cutoff: usize,
    label: &str,
    leakage_tol: f64,
) -> Result<(PureState, f64)> {
    if cutoff < 1 {
        return Err(invalid("cutoff", "must be >= 1"));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(invalid("alpha", "must be finite"));
    }
    let leak = truncation_leakage(alpha, cutoff);
    if leak > leakage_tol {
        return Err(Error::Truncation {
            leakage: leak,
            tolerance: leakage_tol,
            cutoff,
        });
    }
    let mut amps = Vec::with_capacity(cutoff);
    let mut a = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..cutoff {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    let s = PureState::normalized(amps, HilbertLayout::single(label, cutoff)?)?;
    Ok((s, leak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gie_testkit as tk;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn bell() -> PureState {
        let h = c(FRAC_1_SQRT_2, 0.0);
        PureState::new(vec![h, ZERO, ZERO, h], HilbertLayout::qubits(&["a", "b"]).unwrap())
            .unwrap()
    }

    fn plus(label: &str) -> PureState {
        let h = c(FRAC_1_SQRT_2, 0.0);
        PureState::new(vec![h, h], HilbertLayout::single(label, 2).unwrap()).unwrap()
    }

    fn ket(label: &str, bit: usize) -> PureState {
        PureState::basis(HilbertLayout::single(label, 2).unwrap(), bit).unwrap()
    }

    fn to_tk(m: &CMat) -> tk::Mat {
        tk::Mat::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    #[test]
    fn layout_rejects_duplicates_and_zero_dims() {
        assert!(HilbertLayout::new([("a", 2), ("a", 2)]).is_err());
        assert!(HilbertLayout::new([("a", 0)]).is_err());
        let l = HilbertLayout::new([("a", 2), ("f", 5)]).unwrap();
        assert_eq!(l.total_dim(), 10);
    }

    #[test]
    fn basis_product() {
        let s = tensor(&[ket("a", 0), ket("b", 0)]).unwrap();
        let want = [ONE, ZERO, ZERO, ZERO];
        assert!(s.amplitudes().iter().zip(want).all(|(x, y)| *x == y));
        assert_eq!(s.layout().labels(), ["a", "b"]);
    }

    #[test]
    fn plus_plus_is_uniform() {
        let s = tensor(&[plus("a"), plus("b")]).unwrap();
        assert!(s.amplitudes().iter().all(|z| (z - c(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn tensor_rejects_empty() {
        assert!(tensor(&[]).is_err());
    }

    #[test]
    fn qubit_times_coherent_matches_closed_form() {
        let alpha = c(1.0, 0.0);
        let f = coherent_state(alpha, 20).unwrap().relabeled(&["f"]).unwrap();
        let s = tensor(&[ket("q", 0), f]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        for n in 0..20 {
            let want = tk::coherent_amplitude(alpha, n);
            assert!((s.amplitudes()[n] - want).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn pauli_x_flips_first_qubit() {
        let s = tensor(&[ket("a", 0), ket("b", 0)]).unwrap();
        let out = apply(&LinearOperator::pauli_x(), &s, &["a"]).unwrap();
        assert_eq!(out.amplitudes()[2], ONE);
    }

    #[test]
    fn hadamard_makes_plus() {
        let out = apply(&LinearOperator::hadamard(), &ket("a", 0), &["a"]).unwrap();
        assert!((fidelity(&out, &plus("a")).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_checks_dims_and_labels() {
        let s = tensor(&[ket("a", 0), ket("b", 0)]).unwrap();
        assert!(matches!(
            apply(&LinearOperator::pauli_x(), &s, &["zz"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(apply(&LinearOperator::identity(3), &s, &["a"]).is_err());
    }

    #[test]
    fn apply_respects_target_order() {
        let cnot = CMat::from_row_slice(
            4,
            4,
            &[
                ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO,
                ONE, ZERO,
            ],
        );
        let op = LinearOperator::new(cnot, vec![2, 2]).unwrap();
        // control b, target a: |a=0,b=1> -> |a=1,b=1>
        let s = tensor(&[ket("a", 0), ket("b", 1)]).unwrap();
        let out = apply(&op, &s, &["b", "a"]).unwrap();
        assert_eq!(out.amplitudes()[3], ONE);
    }

    #[test]
    fn displaced_vacuum_is_coherent() {
        for beta in [c(0.5, 0.0), c(-1.2, 0.7), c(0.0, 2.0), c(1.4, -1.4)] {
            let vac = coherent_state(ZERO, 30).unwrap();
            let d = LinearOperator::displacement(beta, 30);
            assert!(d.is_unitary(1e-12));
            let out = apply(&d, &vac, &["mode"]).unwrap();
            let want = coherent_state(beta, 30).unwrap();
            let f = fidelity(&out, &want).unwrap();
            assert!(f > 1.0 - 1e-8, "beta = {beta}, f = {f}");
        }
    }

    #[test]
    fn field_traced_from_product_is_pure() {
        let f = coherent_state(c(0.7, 0.2), 30).unwrap().relabeled(&["f"]).unwrap();
        let s = tensor(&[ket("q", 0), f]).unwrap();
        let r = partial_trace(&s.to_density(), &["q"]).unwrap();
        assert!((r.matrix()[(0, 0)] - ONE).norm() < 1e-12);
        assert!(r.matrix()[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let r = partial_trace(&bell().to_density(), &["a"]).unwrap();
        let want = DensityMatrix::maximally_mixed(HilbertLayout::single("a", 2).unwrap());
        assert!(linalg::max_abs_diff(r.matrix(), want.matrix()) < 1e-15);
    }

    #[test]
    fn mass_traced_from_cat_gives_coherence_overlap() {
        let (a, a2) = (c(0.3, 0.0), c(-0.2, 0.5));
        let n = 30;
        let fa = coherent_state(a, n).unwrap();
        let fb = coherent_state(a2, n).unwrap();
        let mut amps = Vec::new();
        amps.extend(fa.amplitudes().iter().map(|z| z * FRAC_1_SQRT_2));
        amps.extend(fb.amplitudes().iter().map(|z| z * FRAC_1_SQRT_2));
        let layout = HilbertLayout::new([("m", 2), ("f", n)]).unwrap();
        let s = PureState::new(amps, layout).unwrap();
        let rho = s.to_density();
        let field = partial_trace(&rho, &["f"]).unwrap();
        // direct outer-product oracle: ½|α⟩⟨α| + ½|α'⟩⟨α'|
        let va: Vec<C64> = fa.amplitudes().iter().copied().collect();
        let vb: Vec<C64> = fb.amplitudes().iter().copied().collect();
        let want = tk::Mat::from_fn(n, |i, j| {
            0.5 * va[i] * va[j].conj() + 0.5 * vb[i] * vb[j].conj()
        });
        assert!(to_tk(field.matrix()).max_abs_diff(&want) < 1e-14);
        let mass = partial_trace(&rho, &["m"]).unwrap();
        let ov = tk::coherent_overlap(a2, a);
        assert!((mass.matrix()[(0, 1)] - 0.5 * ov).norm() < 1e-12);
    }

    #[test]
    fn coherent_vacuum_and_mean_number() {
        let v = coherent_state(ZERO, 5).unwrap();
        assert_eq!(v.amplitudes()[0], ONE);
        let s = coherent_state(ONE, 20).unwrap();
        let n = s
            .expectation(&LinearOperator::number(20), &["mode"])
            .unwrap();
        assert!((n.re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_overlap_matches_gaussian_formula() {
        let a = coherent_state(ZERO, 30).unwrap();
        let b = coherent_state(c(0.0, 0.2), 30).unwrap();
        let ov = a.inner(&b).unwrap().norm();
        assert!((ov - (-0.02f64).exp()).abs() < 1e-6);
        assert!((ov - tk::coherent_overlap(ZERO, c(0.0, 0.2)).norm()).abs() < 1e-12);
    }

    #[test]
    fn coherent_cutoff_too_small_is_an_error() {
        assert!(matches!(
            coherent_state(c(3.0, 0.0), 10),
            Err(Error::Truncation { .. })
        ));
        assert!(coherent_state(ONE, 0).is_err());
    }

    #[test]
    fn leakage_matches_direct_poisson_tail() {
        for (mu, n) in [(1.0f64, 5usize), (4.0, 10), (9.0, 20)] {
            let head: f64 = (0..n)
                .map(|k| (-mu).exp() * mu.powi(k as i32) / tk::factorial(k))
                .sum();
            let leak = truncation_leakage(c(mu.sqrt(), 0.0), n);
            assert!((leak - (1.0 - head)).abs() < 1e-13, "mu {mu} n {n}");
        }
    }

    #[test]
    fn negativity_of_bell_is_half() {
        let n = negativity(&bell().to_density(), &["a"]).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
        let oracle = tk::negativity_2x2(&to_tk(bell().to_density().matrix()));
        assert!((n - oracle).abs() < 1e-12);
    }

    #[test]
    fn negativity_of_product_is_zero() {
        let s = tensor(&[plus("a"), ket("b", 1)]).unwrap();
        assert!(negativity(&s.to_density(), &["a"]).unwrap() < 1e-10);
    }

    #[test]
    fn negativity_of_branch_state_matches_oracle() {
        // phases 0, 0, 0, π/2 on |00>,|01>,|10>,|11>
        let amps = vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)];
        let s = PureState::new(amps, HilbertLayout::qubits(&["a", "b"]).unwrap()).unwrap();
        let rho = s.to_density();
        let got = negativity(&rho, &["a"]).unwrap();
        let want = tk::negativity_2x2(&to_tk(rho.matrix()));
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.5 * (PI / 4.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn ppt_classifies_standard_states() {
        let l = HilbertLayout::qubits(&["a", "b"]).unwrap();
        assert!(ppt_separable(&DensityMatrix::maximally_mixed(l.clone())).unwrap());
        assert!(!ppt_separable(&bell().to_density()).unwrap());
        // Werner p|Φ+⟩⟨Φ+| + (1-p)I/4 is PPT iff p <= 1/3.
        let werner = |p: f64| {
            DensityMatrix::mixture(&[
                (p, bell().to_density()),
                (1.0 - p, DensityMatrix::maximally_mixed(l.clone())),
            ])
            .unwrap()
        };
        assert!(ppt_separable(&werner(1.0 / 3.0)).unwrap());
        let w = werner(1.0 / 3.0);
        let pt_min = tk::min_eigenvalue(&tk::partial_transpose_2x2(&to_tk(w.matrix())));
        assert!(pt_min.abs() < 1e-12);
        assert!(!ppt_separable(&werner(0.34)).unwrap());
    }

    #[test]
    fn ppt_needs_two_qubits() {
        let l = HilbertLayout::new([("a", 2), ("b", 3)]).unwrap();
        assert!(ppt_separable(&DensityMatrix::maximally_mixed(l)).is_err());
    }

    #[test]
    fn entropy_of_product_and_bell() {
        let p = tensor(&[plus("a"), plus("b")]).unwrap();
        assert!(entanglement_entropy(&p, &["a"]).unwrap().abs() < 1e-12);
        assert!((entanglement_entropy(&bell(), &["a"]).unwrap() - 1.0).abs() < 1e-12);
        let nats = entanglement_entropy_in(&bell(), &["b"], EntropyBase::Nats).unwrap();
        assert!((nats - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_schmidt_oracle() {
        let phases = [0.0, 0.3, 0.3, 0.3 + 1.1 + 0.3];
        let amps: Vec<C64> = phases.iter().map(|&t| C64::from_polar(0.5, t)).collect();
        let s = PureState::new(amps.clone(), HilbertLayout::qubits(&["a", "b"]).unwrap()).unwrap();
        let sv = tk::singular_values_2x2([[amps[0], amps[1]], [amps[2], amps[3]]]);
        let want: f64 = sv
            .iter()
            .map(|x| x * x)
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.log2())
            .sum();
        assert!((entanglement_entropy(&s, &["a"]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        let s = PureState::unchecked(
            CVec::from_vec(vec![ONE, ONE, ZERO, ZERO]),
            HilbertLayout::qubits(&["a", "b"]).unwrap(),
        )
        .unwrap();
        assert!(entanglement_entropy(&s, &["a"]).is_err());
    }

    #[test]
    fn linear_entropy_values() {
        assert!(linear_entropy(&bell().to_density()).abs() < 1e-15);
        let mm = DensityMatrix::maximally_mixed(HilbertLayout::single("a", 2).unwrap());
        assert!((linear_entropy(&mm) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_entropy_of_field_entangled_mass_is_one_minus_overlap_squared() {
        // ξ small: 1 - |<α|α'>|^2 ≈ ξ with |α - α'|^2 = ξ.
        let xi: f64 = 1e-3;
        let n = 30;
        let fa = coherent_state(ZERO, n).unwrap();
        let fb = coherent_state(c(xi.sqrt(), 0.0), n).unwrap();
        let mut amps = Vec::new();
        amps.extend(fa.amplitudes().iter().map(|z| z * FRAC_1_SQRT_2));
        amps.extend(fb.amplitudes().iter().map(|z| z * FRAC_1_SQRT_2));
        let s = PureState::new(amps, HilbertLayout::new([("m", 2), ("f", n)]).unwrap()).unwrap();
        let r = partial_trace(&s.to_density(), &["m"]).unwrap();
        // For the equal-weight cat, Tr ρ² = ½(1 + |ov|²), so 2 S_L = 1 - |ov|².
        let sl = linear_entropy(&r);
        let ov2 = (-xi).exp();
        assert!((2.0 * sl - (1.0 - ov2)).abs() < 1e-12);
        assert!((2.0 * sl - xi).abs() < xi * xi);
    }

    #[test]
    fn fidelity_limits() {
        assert!((fidelity(&bell(), &bell()).unwrap() - 1.0).abs() < 1e-15);
        let a = tensor(&[ket("a", 0), ket("b", 0)]).unwrap();
        let b = tensor(&[ket("a", 1), ket("b", 0)]).unwrap();
        assert!(fidelity(&a, &b).unwrap() < 1e-15);
        let c0 = coherent_state(ZERO, 30).unwrap();
        let c2 = coherent_state(c(0.2, 0.0), 30).unwrap();
        assert!((fidelity(&c0, &c2).unwrap() - (-0.04f64).exp()).abs() < 1e-6);
        assert!(fidelity(&a, &c0).is_err());
    }

    #[test]
    fn mixed_fidelity_reduces_to_pure_overlap() {
        let c0 = coherent_state(c(0.1, 0.0), 20).unwrap();
        let c2 = coherent_state(c(0.0, 0.4), 20).unwrap();
        let fp = fidelity(&c0, &c2).unwrap();
        let fm = fidelity(&c0.to_density(), &c2.to_density()).unwrap();
        let fh = fidelity(&c0, &c2.to_density()).unwrap();
        assert!((fp - fm).abs() < 1e-10);
        assert!((fp - fh).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        let l = HilbertLayout::single("a", 2).unwrap();
        let bad = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]);
        assert!(DensityMatrix::new(bad, l.clone()).is_err());
        let neg = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg, l.clone()).is_err());
        assert!(DensityMatrix::new(CMat::identity(2, 2) * c(0.5, 0.0), l).is_ok());
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        assert!(partial_trace(&bell().to_density(), &[]).is_err());
    }
}
