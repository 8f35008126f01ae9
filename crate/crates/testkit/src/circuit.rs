//! Minimal qubit statevector simulator. Qubit 0 is the most significant bit.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub struct Circuit {
    pub n: usize,
    pub amps: Vec<C64>,
}

impl Circuit {
    pub fn zeros(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Circuit { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        Circuit { n, amps }
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub fn gate(&mut self, q: usize, g: [[C64; 2]; 2]) -> &mut Self {
        let b = self.bit(q);
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let (x, y) = (self.amps[i], self.amps[i | b]);
                self.amps[i] = g[0][0] * x + g[0][1] * y;
                self.amps[i | b] = g[1][0] * x + g[1][1] * y;
            }
        }
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.gate(q, [[s, s], [s, -s]])
    }

    /// Multiplies each basis amplitude by e^{i f(index)}.
    pub fn diagonal_phase(&mut self, f: impl Fn(usize) -> f64) -> &mut Self {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, f(i));
        }
        self
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that qubit `q` reads `value` in the computational basis.
    pub fn marginal(&self, q: usize, value: usize) -> f64 {
        let b = self.bit(q);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i & b) != 0) as usize == value)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}
