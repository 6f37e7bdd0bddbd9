//! One-dimensional quadrature.
//!
//! [`integrate`] is a globally adaptive Gauss-Kronrod (7/15) scheme: the
//! interval with the largest error estimate is bisected until the summed
//! estimate meets the tolerance or the evaluation budget runs out.
//! [`gauss_legendre_composite`] is a fixed composite rule for integrands that
//! are noisy or piecewise constant, where adaptivity buys nothing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
    /// Upper cutoff for improper integrals, in units of the mean lifetime.
    pub cutoff_lifetimes: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_evals: 1 << 20,
            cutoff_lifetimes: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` (with `a <= b`) to the tolerances in `spec`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("invalid integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evals: 0 });
    }
    let (value, error) = gk15(&f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if !total.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{a}, {b}]")));
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
            if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
                return Ok(Integral { value: total, error: total_err, evals });
            }
        }
        if evals + 30 > spec.max_evals {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge within {} evaluations (estimate {total}, error {total_err})",
                spec.max_evals
            )));
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        evals += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        // periodic re-sum against accumulated round-off
        if heap.len() % 512 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

const GL4_X: [f64; 2] = [0.339_981_043_584_856_26, 0.861_136_311_594_052_6];
const GL4_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_86];

/// Composite 4-point Gauss-Legendre rule on `panels` equal panels.
pub fn gauss_legendre_composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if panels == 0 || a == b {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let center = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for k in 0..2 {
            let dx = half * GL4_X[k];
            panel += GL4_W[k] * (f(center - dx) + f(center + dx));
        }
        sum += panel * half;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &spec).unwrap();
        // x^6/6 - x^3 from -1 to 2
        assert_relative_eq!(r.value, (64.0 / 6.0 - 8.0) - (1.0 / 6.0 + 1.0), epsilon = 1e-13);
        let gl = gauss_legendre_composite(|x| x.powi(7), 0.0, 1.0, 1);
        assert_relative_eq!(gl, 0.125, epsilon = 1e-14);
    }

    #[test]
    fn exponential_to_tolerance() {
        let spec = QuadratureSpec::default();
        let r = integrate(|t| (-2.0 * t).exp(), 0.0, 50.0, &spec).unwrap();
        assert_relative_eq!(r.value, 0.5 * (1.0 - (-100.0f64).exp()), max_relative = 1e-12);
    }

    #[test]
    fn zero_width_and_bad_interval() {
        let spec = QuadratureSpec::default();
        assert_eq!(integrate(|_| 1.0, 3.0, 3.0, &spec).unwrap().value, 0.0);
        assert!(integrate(|_| 1.0, 3.0, 1.0, &spec).is_err());
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let spec = QuadratureSpec {
            max_evals: 200,
            ..QuadratureSpec::default()
        };
        let err = integrate(|x| if x < 0.3 { 0.0 } else { 1.0 }, 0.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
