//! Adaptive Gauss–Kronrod quadrature (15-point Kronrod / 7-point Gauss pair).
//!
//! The worst interval (largest error estimate) is bisected until the summed
//! error estimate meets `max(abs_tol, rel_tol · |integral|)`. Kronrod nodes
//! are strictly interior, so integrable endpoint singularities are never
//! evaluated directly.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

// QK15 abscissae (positive half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Kronrod panel: returns (integral, error estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut result_gauss = f_center * WG[3];
    let mut result_kronrod = f_center * WGK[7];
    let mut fv = [0.0f64; 15];
    fv[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        result_kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            // odd Kronrod indices are the embedded Gauss nodes
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let integral = result_kronrod * half;
    let err = ((result_kronrod - result_gauss) * half).abs();
    // QUADPACK-style sharpening of the raw difference
    let mean = result_kronrod * 0.5;
    let mut resasc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= half.abs();
    let scaled = if resasc != 0.0 && err != 0.0 {
        resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5))
    } else {
        err
    };
    (integral, scaled)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrate `f` over [a, b] to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    integrate_max(f, a, b, abs_tol, rel_tol, 4000)
}

pub fn integrate_max<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate: non-finite bounds"));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 1,
        });
    }
    let (v, e) = qk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total_v = v;
    let mut total_e = e;
    let mut panels = 1usize;
    // error held by panels already at floating-point resolution
    let mut stuck_error = 0.0f64;

    while total_e > abs_tol.max(rel_tol * total_v.abs()) {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            stuck_error += worst.error;
            if stuck_error > abs_tol.max(rel_tol * total_v.abs()) {
                return Err(Error::accuracy(
                    format!("integrate: stuck at f64 resolution (err {stuck_error:.3e})"),
                    panels,
                ));
            }
            continue;
        }
        let (v1, e1) = qk15(&f, worst.a, mid);
        let (v2, e2) = qk15(&f, mid, worst.b);
        total_v += v1 + v2 - worst.value;
        total_e += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        panels += 1;
        if panels > max_panels {
            return Err(Error::accuracy(
                format!("integrate: tolerance not reached (err {total_e:.3e})"),
                panels,
            ));
        }
        if !total_v.is_finite() {
            return Err(Error::numeric("integrate: non-finite integrand"));
        }
    }
    Ok(Quadrature {
        value: total_v,
        error: total_e,
        panels,
    })
}

/// ∫₀^b f(z) dz with an integrable z^{-1/2}-type singularity at 0, via the
/// substitution z = t² (the transformed integrand is smooth at the origin).
pub fn integrate_sqrt_origin<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    if b < 0.0 {
        return Err(Error::domain("integrate_sqrt_origin: negative upper bound"));
    }
    integrate(|t| 2.0 * t * f(t * t), 0.0, b.sqrt(), abs_tol, rel_tol)
}
