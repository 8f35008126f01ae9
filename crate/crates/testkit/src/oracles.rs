//! Brute-force oracles shared by the engine tests and the acceptance suite.

use num_complex::Complex64 as C64;

use crate::fock::{add, number, quad_p, quad_q, quadrature_moments, scaled, vacuum, Term, Trotter};
use crate::quadrature::composite;
use crate::Mat;

fn projector(n: usize, i: usize) -> Mat {
    Mat::from_fn(n, |r, c| {
        if r == i && c == i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Two masses (one four-level register, branch order 00, 01, 10, 11) and one
/// field mode under H = Σ_b P_b ⊗ [ω a†a − (λ_b a + λ_b* a†)], started in
/// |+⟩|+⟩|0⟩ and integrated by extrapolated Strang splitting.
/// Uses λa + λ*a† = √2(Re λ · q − Im λ · p).
pub fn branch_field_trotter(omega: f64, lambdas: [C64; 4], cutoff: usize, t: f64, steps: usize) -> Vec<C64> {
    let n = number(cutoff);
    let mut terms = vec![Term::Single {
        mode: 1,
        h: Mat::from_fn(cutoff, |i, j| n.get(i, j) * omega),
    }];
    for (i, lam) in lambdas.iter().enumerate() {
        terms.push(Term::Product {
            coeff: -std::f64::consts::SQRT_2 * lam.re,
            mode_a: 0,
            a: projector(4, i),
            mode_b: 1,
            b: quad_q(cutoff),
        });
        terms.push(Term::Product {
            coeff: std::f64::consts::SQRT_2 * lam.im,
            mode_a: 0,
            a: projector(4, i),
            mode_b: 1,
            b: quad_p(cutoff),
        });
    }
    let trotter = Trotter::new(vec![4, cutoff], terms);
    let mut psi0 = vec![C64::new(0.0, 0.0); 4 * cutoff];
    for i in 0..4 {
        psi0[i * cutoff] = C64::new(0.5, 0.0);
    }
    trotter.evolve_extrapolated(&psi0, t, steps)
}

fn quadrature(index: usize, cutoff: usize) -> Mat {
    if index % 2 == 0 {
        quad_q(cutoff)
    } else {
        quad_p(cutoff)
    }
}

/// Fock-space terms of H = ½ RᵀMR with R = (q₁, p₁, q₂, p₂, …).
pub fn quadratic_terms(m: &[Vec<f64>], cutoff: usize) -> Vec<Term> {
    let n = m.len();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (mi, mj) = (i / 2, j / 2);
            let v = m[i][j];
            if v == 0.0 {
                continue;
            }
            let (a, b) = (quadrature(i, cutoff), quadrature(j, cutoff));
            if mi == mj {
                let h = if i == j {
                    scaled(&a.mul(&a), 0.5 * v)
                } else {
                    scaled(&add(&a.mul(&b), &b.mul(&a)), 0.5 * v)
                };
                terms.push(Term::Single { mode: mi, h });
            } else {
                terms.push(Term::Product {
                    coeff: v,
                    mode_a: mi,
                    a,
                    mode_b: mj,
                    b,
                });
            }
        }
    }
    terms
}

/// Covariance matrix after evolving the vacuum under H = ½ RᵀMR.
pub fn quadratic_fock_covariance(m: &[Vec<f64>], cutoff: usize, t: f64, steps: usize) -> Vec<Vec<f64>> {
    let dims = vec![cutoff; m.len() / 2];
    let trotter = Trotter::new(dims.clone(), quadratic_terms(m, cutoff));
    let psi = trotter.evolve_extrapolated(&vacuum(&dims), t, steps);
    quadrature_moments(&psi, &dims).1
}

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

/// Log-negativity (natural log) of modes `modes` of a covariance matrix,
/// from the two-mode symplectic invariants.
pub fn two_mode_log_negativity(cov: &[Vec<f64>], modes: [usize; 2]) -> f64 {
    let idx = [2 * modes[0], 2 * modes[0] + 1, 2 * modes[1], 2 * modes[1] + 1];
    let v: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| cov[i][j]).collect()).collect();
    let det2 = |r: usize, c: usize| v[r][c] * v[r + 1][c + 1] - v[r][c + 1] * v[r + 1][c];
    let delta = det2(0, 0) + det2(2, 2) - 2.0 * det2(0, 2);
    let nu2 = (delta - (delta * delta - 4.0 * det(v.clone())).max(0.0).sqrt()) / 2.0;
    (-(2.0 * nu2.sqrt()).ln()).max(0.0)
}

/// 2|ρ₀₁| of a qubit after (|0⟩|δ⟩ + |1⟩|−δ⟩)/√2 with the field traced out,
/// using truncated coherent amplitudes.
pub fn branching_visibility(shift: C64, cutoff: usize) -> f64 {
    let plus: Vec<C64> = (0..cutoff).map(|n| crate::coherent_amplitude(shift, n)).collect();
    let minus: Vec<C64> = (0..cutoff).map(|n| crate::coherent_amplitude(-shift, n)).collect();
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let total = 0.5 * (norm(&plus) + norm(&minus));
    // ρ₀₁ = ½ Σ_n ψ₀(n) ψ₁(n)*
    let rho01: C64 = plus.iter().zip(&minus).map(|(a, b)| a * b.conj()).sum::<C64>() * 0.5;
    2.0 * rho01.norm() / total
}

/// T·∫₀^{k_max} g²(k)ρ(k) sin²(ckT)/(ck)² dk, split at `knots`.
pub fn rate_reference(
    c: f64,
    k_max: f64,
    t: f64,
    g: impl Fn(f64) -> f64,
    rho: impl Fn(f64) -> f64,
    knots: &[f64],
) -> f64 {
    let f = |k: f64| {
        let w = c * k;
        let s = if w == 0.0 { t } else { (w * t).sin() / w };
        g(k).powi(2) * rho(k) * s * s
    };
    let mut edges = vec![0.0];
    edges.extend(knots.iter().copied().filter(|&x| x > 0.0 && x < k_max));
    edges.push(k_max);
    t * edges.windows(2).map(|w| composite(f, w[0], w[1], 400, 16)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_small_matrices() {
        assert!((det(vec![vec![2.0, 1.0], vec![1.0, 3.0]]) - 5.0).abs() < 1e-14);
        assert!((det(vec![vec![0.0, 1.0], vec![1.0, 0.0]]) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_shift_keeps_full_visibility() {
        assert!((branching_visibility(C64::new(0.0, 0.0), 10) - 1.0).abs() < 1e-15);
        let v = branching_visibility(C64::new(0.3, 0.0), 40);
        assert!((v - (-2.0f64 * 0.09).exp()).abs() < 1e-12);
    }
}
