//! Symplectic covariance evolution against a Trotterized Fock-space
//! simulation of the same quadratic Hamiltonian.

use gie_core::cvhybrid::{
    hall_reginatto_hamiltonian, hall_reginatto_protocol, log_negativity, symplectic_evolve,
    GaussianState, QuadraticHamiltonian,
};
use gie_testkit::oracles::{quadratic_fock_covariance, two_mode_log_negativity};
use nalgebra::DMatrix;

fn fock_covariance(m: &DMatrix<f64>, cutoff: usize, t: f64, steps: usize) -> DMatrix<f64> {
    let cov = quadratic_fock_covariance(&rows(m), cutoff, t, steps);
    DMatrix::from_fn(m.nrows(), m.nrows(), |i, j| cov[i][j])
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[test]
fn generic_two_mode_hamiltonian_matches_fock() {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.2, 0.3, -0.1,
        0.2, 0.8, 0.05, 0.25,
        0.3, 0.05, 1.2, 0.1,
        -0.1, 0.25, 0.1, 0.9,
    ]);
    let t = 0.4;
    let h = QuadraticHamiltonian::quadratic(m.clone()).unwrap();
    let g = symplectic_evolve(&GaussianState::vacuum(2), &h, t).unwrap();
    let f = fock_covariance(&m, 25, t, 200);
    let diff = (g.covariance() - &f).abs().max();
    assert!(diff < 1e-4, "max covariance difference {diff:e}");
}

#[test]
fn hall_reginatto_matches_fock() {
    let (g1, g2, t) = (1.0, 1.0, 1.0);
    let (state, en) = hall_reginatto_protocol(g1, g2, t, None).unwrap();
    let m = hall_reginatto_hamiltonian(g1, g2).unwrap().matrix().clone();
    let f = fock_covariance(&m, 18, t, 100);
    let diff = (state.covariance() - &f).abs().max();
    assert!(diff < 1e-4, "max covariance difference {diff:e}");
    let fen = two_mode_log_negativity(&rows(&f), [0, 2]);
    assert!((en - fen).abs() < 1e-4, "{en} vs {fen}");
}

#[test]
fn closed_form_log_negativity_matches_two_mode_squeezing() {
    let s = GaussianState::two_mode_squeezed(0.4);
    let want = log_negativity(&s, &[0]).unwrap();
    assert!((two_mode_log_negativity(&rows(s.covariance()), [0, 1]) - want).abs() < 1e-12);
    assert!((want - 0.8).abs() < 1e-12);
}
