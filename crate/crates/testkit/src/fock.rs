//! Truncated Fock-space dynamics by symmetric Trotter splitting.
//!
//! A Hamiltonian is a sum of terms that each act on one mode or are a
//! product of one operator on each of two modes. Every factor is
//! diagonalized once with the Jacobi solver, so each split step is exact for
//! its own term and the only error is the splitting error, which Richardson
//! extrapolation removes to fourth order.

use crate::mat::{hermitian_eigen, Mat};
use num_complex::Complex64 as C64;

pub fn annihilation(n: usize) -> Mat {
    Mat::from_fn(n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn number(n: usize) -> Mat {
    Mat::from_fn(n, |i, j| C64::new(if i == j { i as f64 } else { 0.0 }, 0.0))
}

/// q = (a + a†)/√2
pub fn quad_q(n: usize) -> Mat {
    let a = annihilation(n);
    let ad = a.adjoint();
    Mat::from_fn(n, |i, j| (a.get(i, j) + ad.get(i, j)) / 2f64.sqrt())
}

/// p = (a − a†)/(i√2)
pub fn quad_p(n: usize) -> Mat {
    let a = annihilation(n);
    let ad = a.adjoint();
    Mat::from_fn(n, |i, j| (a.get(i, j) - ad.get(i, j)) / C64::new(0.0, 2f64.sqrt()))
}

pub fn scaled(m: &Mat, k: f64) -> Mat {
    Mat::from_fn(m.n, |i, j| m.get(i, j) * k)
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    Mat::from_fn(a.n, |i, j| a.get(i, j) + b.get(i, j))
}

#[derive(Debug, Clone)]
pub enum Term {
    /// Hermitian operator on one mode.
    Single { mode: usize, h: Mat },
    /// coeff · A ⊗ B on two distinct modes, A and B Hermitian.
    Product {
        coeff: f64,
        mode_a: usize,
        a: Mat,
        mode_b: usize,
        b: Mat,
    },
}

enum Prepared {
    Single {
        mode: usize,
        vals: Vec<f64>,
        v: Mat,
    },
    Product {
        coeff: f64,
        mode_a: usize,
        va: (Vec<f64>, Mat),
        mode_b: usize,
        vb: (Vec<f64>, Mat),
    },
}

/// Applies a single-mode matrix to axis `k` of a row-major tensor.
pub fn apply_on_mode(state: &mut [C64], dims: &[usize], k: usize, m: &Mat) {
    let n = dims[k];
    let inner: usize = dims[k + 1..].iter().product();
    let outer: usize = dims[..k].iter().product();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (r, b) in buf.iter_mut().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for c in 0..n {
                    s += m.get(r, c) * state[base + c * inner];
                }
                *b = s;
            }
            for (r, b) in buf.iter().enumerate() {
                state[base + r * inner] = *b;
            }
        }
    }
}

fn digit(index: usize, dims: &[usize], k: usize) -> usize {
    let inner: usize = dims[k + 1..].iter().product();
    (index / inner) % dims[k]
}

pub struct Trotter {
    dims: Vec<usize>,
    terms: Vec<Prepared>,
}

impl Trotter {
    pub fn new(dims: Vec<usize>, terms: Vec<Term>) -> Self {
        let terms = terms
            .into_iter()
            .map(|t| match t {
                Term::Single { mode, h } => {
                    let (vals, v) = hermitian_eigen(&h);
                    Prepared::Single { mode, vals, v }
                }
                Term::Product {
                    coeff,
                    mode_a,
                    a,
                    mode_b,
                    b,
                } => Prepared::Product {
                    coeff,
                    mode_a,
                    va: hermitian_eigen(&a),
                    mode_b,
                    vb: hermitian_eigen(&b),
                },
            })
            .collect();
        Trotter { dims, terms }
    }

    fn exp_term(&self, t: &Prepared, state: &mut [C64], dt: f64) {
        match t {
            Prepared::Single { mode, vals, v } => {
                let d = Mat::from_fn(v.n, |i, j| {
                    if i == j {
                        C64::from_polar(1.0, -vals[i] * dt)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let u = v.mul(&d).mul(&v.adjoint());
                apply_on_mode(state, &self.dims, *mode, &u);
            }
            Prepared::Product {
                coeff,
                mode_a,
                va,
                mode_b,
                vb,
            } => {
                apply_on_mode(state, &self.dims, *mode_a, &va.1.adjoint());
                apply_on_mode(state, &self.dims, *mode_b, &vb.1.adjoint());
                for (idx, s) in state.iter_mut().enumerate() {
                    let la = va.0[digit(idx, &self.dims, *mode_a)];
                    let lb = vb.0[digit(idx, &self.dims, *mode_b)];
                    *s *= C64::from_polar(1.0, -coeff * la * lb * dt);
                }
                apply_on_mode(state, &self.dims, *mode_a, &va.1);
                apply_on_mode(state, &self.dims, *mode_b, &vb.1);
            }
        }
    }

    /// Strang splitting with `steps` equal steps up to time `t`.
    pub fn evolve(&self, psi0: &[C64], t: f64, steps: usize) -> Vec<C64> {
        let mut s = psi0.to_vec();
        let dt = t / steps as f64;
        for _ in 0..steps {
            for term in &self.terms {
                self.exp_term(term, &mut s, dt / 2.0);
            }
            for term in self.terms.iter().rev() {
                self.exp_term(term, &mut s, dt / 2.0);
            }
        }
        s
    }

    /// Richardson combination (4ψ(2n) − ψ(n))/3, renormalized.
    pub fn evolve_extrapolated(&self, psi0: &[C64], t: f64, steps: usize) -> Vec<C64> {
        let coarse = self.evolve(psi0, t, steps);
        let fine = self.evolve(psi0, t, 2 * steps);
        let mut out: Vec<C64> = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (4.0 * f - c) / 3.0)
            .collect();
        let n: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut out {
            *z /= n;
        }
        out
    }
}

pub fn vacuum(dims: &[usize]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dims.iter().product()];
    v[0] = C64::new(1.0, 0.0);
    v
}

/// ⟨ψ|A_k B_l|ψ⟩ for single-mode operators on modes k and l (k may equal l,
/// in which case A acts after B).
pub fn expect2(psi: &[C64], dims: &[usize], k: usize, a: &Mat, l: usize, b: &Mat) -> C64 {
    let mut phi = psi.to_vec();
    apply_on_mode(&mut phi, dims, l, b);
    apply_on_mode(&mut phi, dims, k, a);
    psi.iter().zip(&phi).map(|(x, y)| x.conj() * y).sum()
}

pub fn expect1(psi: &[C64], dims: &[usize], k: usize, a: &Mat) -> C64 {
    let mut phi = psi.to_vec();
    apply_on_mode(&mut phi, dims, k, a);
    psi.iter().zip(&phi).map(|(x, y)| x.conj() * y).sum()
}

/// Means and symmetrized covariance of (q₁, p₁, …, q_N, p_N).
pub fn quadrature_moments(psi: &[C64], dims: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let ops: Vec<(usize, Mat)> = dims
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| [(k, quad_q(n)), (k, quad_p(n))])
        .collect();
    let mean: Vec<f64> = ops.iter().map(|(k, o)| expect1(psi, dims, *k, o).re).collect();
    let m = ops.len();
    let mut cov = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let (ki, oi) = &ops[i];
            let (kj, oj) = &ops[j];
            let ij = expect2(psi, dims, *ki, oi, *kj, oj);
            let ji = expect2(psi, dims, *kj, oj, *ki, oi);
            cov[i][j] = 0.5 * (ij + ji).re - mean[i] * mean[j];
        }
    }
    (mean, cov)
}
