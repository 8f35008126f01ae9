//! Unit-tagged quantities with dimension checking.
//!
//! Dimensions are integer exponents of the SI base units kg, m, s and K.
//! Products and quotients always succeed; sums, differences and square roots
//! check that the dimensions allow the operation.

use std::fmt;
use std::ops::{Div, Mul};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dim {
    pub kg: i8,
    pub m: i8,
    pub s: i8,
    pub k: i8,
}

impl Dim {
    pub const fn new(kg: i8, m: i8, s: i8, k: i8) -> Self {
        Dim { kg, m, s, k }
    }

    pub const NONE: Dim = Dim::new(0, 0, 0, 0);
    pub const KG: Dim = Dim::new(1, 0, 0, 0);
    pub const M: Dim = Dim::new(0, 1, 0, 0);
    pub const M2: Dim = Dim::new(0, 2, 0, 0);
    pub const S: Dim = Dim::new(0, 0, 1, 0);
    pub const K: Dim = Dim::new(0, 0, 0, 1);
    pub const PER_S: Dim = Dim::new(0, 0, -1, 0);
    pub const M_PER_S: Dim = Dim::new(0, 1, -1, 0);
    pub const M_PER_S2: Dim = Dim::new(0, 1, -2, 0);
    pub const J: Dim = Dim::new(1, 2, -2, 0);
    pub const J_S: Dim = Dim::new(1, 2, -1, 0);
    pub const J_PER_K: Dim = Dim::new(1, 2, -2, -1);
    pub const N: Dim = Dim::new(1, 1, -2, 0);
    pub const W: Dim = Dim::new(1, 2, -3, 0);
    pub const GRAV: Dim = Dim::new(-1, 3, -2, 0);

    pub fn powi(self, n: i8) -> Dim {
        Dim::new(self.kg * n, self.m * n, self.s * n, self.k * n)
    }

    pub fn is_dimensionless(self) -> bool {
        self == Dim::NONE
    }
}

impl Mul for Dim {
    type Output = Dim;
    fn mul(self, o: Dim) -> Dim {
        Dim::new(self.kg + o.kg, self.m + o.m, self.s + o.s, self.k + o.k)
    }
}

impl Div for Dim {
    type Output = Dim;
    fn div(self, o: Dim) -> Dim {
        Dim::new(self.kg - o.kg, self.m - o.m, self.s - o.s, self.k - o.k)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        for (sym, e) in [("kg", self.kg), ("m", self.m), ("s", self.s), ("K", self.k)] {
            match e {
                0 => {}
                1 => parts.push(sym.to_string()),
                _ => parts.push(format!("{sym}^{e}")),
            }
        }
        f.write_str(&parts.join(" "))
    }
}

/// A value with its SI dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dim,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dim) -> Self {
        Quantity { value, dim }
    }

    pub const fn scalar(value: f64) -> Self {
        Quantity::new(value, Dim::NONE)
    }

    pub fn powi(self, n: i8) -> Quantity {
        Quantity::new(self.value.powi(n as i32), self.dim.powi(n))
    }

    pub fn sqrt(self) -> Result<Quantity> {
        let d = self.dim;
        if d.kg % 2 != 0 || d.m % 2 != 0 || d.s % 2 != 0 || d.k % 2 != 0 {
            return Err(Error::Units(format!("square root of [{d}]")));
        }
        Ok(Quantity::new(
            self.value.sqrt(),
            Dim::new(d.kg / 2, d.m / 2, d.s / 2, d.k / 2),
        ))
    }

    pub fn try_add(self, o: Quantity) -> Result<Quantity> {
        if self.dim != o.dim {
            return Err(Error::Units(format!("[{}] + [{}]", self.dim, o.dim)));
        }
        Ok(Quantity::new(self.value + o.value, self.dim))
    }

    pub fn try_sub(self, o: Quantity) -> Result<Quantity> {
        self.try_add(Quantity::new(-o.value, o.dim))
    }

    /// Returns the bare value after checking the dimension.
    pub fn expect(self, dim: Dim) -> Result<f64> {
        if self.dim == dim {
            Ok(self.value)
        } else {
            Err(Error::Units(format!("expected [{dim}], got [{}]", self.dim)))
        }
    }

    pub fn unit(&self) -> String {
        self.dim.to_string()
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, o: Quantity) -> Quantity {
        Quantity::new(self.value * o.value, self.dim * o.dim)
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, o: Quantity) -> Quantity {
        Quantity::new(self.value / o.value, self.dim / o.dim)
    }
}

impl Mul<f64> for Quantity {
    type Output = Quantity;
    fn mul(self, k: f64) -> Quantity {
        Quantity::new(self.value * k, self.dim)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, self.dim)
    }
}
