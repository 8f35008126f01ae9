//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{invalid, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Panel> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let s = f(mid - x) + f(mid + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over [a, b] to relative tolerance `rel_tol` (with a tiny
/// absolute floor so identically zero integrands converge).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<Integral> {
    integrate_with(f, a, b, rel_tol, 2000)
}

pub fn integrate_with(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("bounds", "integration limits must be finite"));
    }
    if !(rel_tol > 0.0) {
        return Err(invalid("rel_tol", "must be > 0"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    // Start from a few panels so oscillatory integrands are resolved.
    let start = 8;
    let mut panels = Vec::with_capacity(max_intervals);
    for i in 0..start {
        let x0 = a + (b - a) * i as f64 / start as f64;
        let x1 = a + (b - a) * (i + 1) as f64 / start as f64;
        panels.push(gk15(&f, x0, x1)?);
    }
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let scale: f64 = panels.iter().map(|p| p.value.abs()).sum();
        let target = (rel_tol * value.abs()).max(1e-300).max(1e-15 * scale);
        if error <= target {
            return Ok(Integral {
                value,
                error,
                intervals: panels.len(),
            });
        }
        if panels.len() >= max_intervals {
            return Err(Error::Quadrature { estimate: value, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature { estimate: value, error });
        }
        panels.push(gk15(&f, p.a, mid)?);
        panels.push(gk15(&f, mid, p.b)?);
    }
}
