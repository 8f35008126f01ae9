use num_complex::Complex64 as C64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<C64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(f(i, j));
            }
        }
        Mat { n, a }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.get(i, k);
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn kron(&self, o: &Mat) -> Mat {
        let n = self.n * o.n;
        Mat::from_fn(n, |i, j| {
            self.get(i / o.n, j / o.n) * o.get(i % o.n, j % o.n)
        })
    }

    pub fn max_abs_diff(&self, o: &Mat) -> f64 {
        self.a
            .iter()
            .zip(&o.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices. Returns the
/// eigenvalues in ascending order and the eigenvectors as columns.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.n;
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let scale: f64 = a.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a.get(p, q);
                let b = z.norm();
                if b <= 1e-300 {
                    continue;
                }
                let ph = C64::from_polar(1.0, -z.arg());
                let (app, aqq) = (a.get(p, p).re, a.get(q, q).re);
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let jpp = C64::new(cs, 0.0);
                let jpq = C64::new(sn, 0.0);
                let jqp = -sn * ph;
                let jqq = cs * ph;
                for k in 0..n {
                    let (x, y) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, x * jpp + y * jqp);
                    a.set(k, q, x * jpq + y * jqq);
                    let (x, y) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, x * jpp + y * jqp);
                    v.set(k, q, x * jpq + y * jqq);
                }
                for k in 0..n {
                    let (x, y) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, jpp.conj() * x + jqp.conj() * y);
                    a.set(q, k, jpq.conj() * x + jqq.conj() * y);
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let vals = idx.iter().map(|&i| a.get(i, i).re).collect();
    let vecs = Mat::from_fn(n, |r, col| v.get(r, idx[col]));
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    hermitian_eigen(m).0
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Partial transpose of the first qubit of a 4x4 matrix, written out by
/// swapping the first-qubit indices entry by entry.
pub fn partial_transpose_2x2(m: &Mat) -> Mat {
    assert_eq!(m.n, 4);
    let mut out = Mat::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    out.set(2 * a2 + b, 2 * a + b2, m.get(2 * a + b, 2 * a2 + b2));
                }
            }
        }
    }
    out
}

pub fn negativity_2x2(m: &Mat) -> f64 {
    hermitian_eigenvalues(&partial_transpose_2x2(m))
        .iter()
        .filter(|&&x| x < 0.0)
        .map(|x| -x)
        .sum()
}

/// Singular values of a 2x2 complex matrix from the characteristic
/// polynomial of M†M.
pub fn singular_values_2x2(m: [[C64; 2]; 2]) -> [f64; 2] {
    let col = |j: usize| [m[0][j], m[1][j]];
    let dot = |x: [C64; 2], y: [C64; 2]| x[0].conj() * y[0] + x[1].conj() * y[1];
    let (c0, c1) = (col(0), col(1));
    let (p, q, r) = (dot(c0, c0).re, dot(c1, c1).re, dot(c0, c1).norm_sqr());
    let tr = p + q;
    let det = p * q - r;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    [
        ((tr + disc) / 2.0).max(0.0).sqrt(),
        ((tr - disc) / 2.0).max(0.0).sqrt(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_complex_hermitian() {
        let m = Mat::from_fn(5, |i, j| {
            let x = (i * 7 + j * 3) as f64 * 0.1;
            if i == j {
                C64::new(x, 0.0)
            } else if i < j {
                C64::new(x.sin(), x.cos())
            } else {
                let y = (j * 7 + i * 3) as f64 * 0.1;
                C64::new(y.sin(), -y.cos())
            }
        });
        let (vals, v) = hermitian_eigen(&m);
        let d = Mat::from_fn(5, |i, j| C64::new(if i == j { vals[i] } else { 0.0 }, 0.0));
        let back = v.mul(&d).mul(&v.adjoint());
        assert!(back.max_abs_diff(&m) < 1e-12);
    }
}
