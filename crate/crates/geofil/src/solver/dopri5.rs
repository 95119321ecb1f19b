//! Dormand-Prince 5(4) step with the quartic dense-output interpolant.
//! Coefficients follow Hairer-Norsett-Wanner's DOPRI5; correctness is pinned
//! down by the order and interpolation tests in the solver module.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::Result;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order weights; the last row of A equals them (FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference to the embedded fourth-order solution.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub(crate) struct StepAttempt {
    pub y_new: Vec<f64>,
    /// Derivative at the step end; becomes the first stage of the next step.
    pub k_new: Vec<f64>,
    /// Scaled error norm; accept when <= 1.
    pub err_norm: f64,
    /// Dense coefficients, see [`eval_dense`].
    pub cont: [Vec<f64>; 5],
}

pub(crate) fn try_step(
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    y: &[f64],
    k1: &[f64],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<StepAttempt> {
    let n = y.len();
    let stage = |coeffs: &[(f64, &[f64])]| -> Vec<f64> {
        let mut out = y.to_vec();
        for (c, k) in coeffs {
            for i in 0..n {
                out[i] += h * c * k[i];
            }
        }
        out
    };

    let k2 = rhs(&stage(&[(A21, k1)]))?;
    let k3 = rhs(&stage(&[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(&stage(&[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs(&stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = rhs(&stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = stage(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(&y_new)?;

    let mut err_sq = 0.0;
    for i in 0..n {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        err_sq += (e / sc) * (e / sc);
    }
    let err_norm = (err_sq / n as f64).sqrt();

    let mut cont1 = Vec::with_capacity(n);
    let mut cont2 = Vec::with_capacity(n);
    let mut cont3 = Vec::with_capacity(n);
    let mut cont4 = Vec::with_capacity(n);
    for i in 0..n {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        cont1.push(ydiff);
        cont2.push(bspl);
        cont3.push(ydiff - h * k7[i] - bspl);
        cont4.push(h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
    }

    Ok(StepAttempt {
        k_new: k7,
        err_norm,
        cont: [y.to_vec(), cont1, cont2, cont3, cont4],
        y_new,
    })
}

/// Evaluate the interpolant at fraction `theta` of the step it was built on.
pub(crate) fn eval_dense(cont: &[Vec<f64>; 5], theta: f64) -> Vec<f64> {
    let th1 = 1.0 - theta;
    (0..cont[0].len())
        .map(|i| {
            cont[0][i] + theta * (cont[1][i] + th1 * (cont[2][i] + theta * (cont[3][i] + th1 * cont[4][i])))
        })
        .collect()
}

/// Crude but deterministic starting step from the scaled sizes of state and
/// derivative; the controller corrects it within a few steps.
pub(crate) fn initial_step(
    y0: &[f64],
    f0: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    span: f64,
    max_step: f64,
) -> f64 {
    let n = y0.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (y, f) in y0.iter().zip(f0) {
        let sc = abs_tol + rel_tol * y.abs();
        d0 += (y / sc) * (y / sc);
        d1 += (f / sc) * (f / sc);
    }
    d0 = (d0 / n).sqrt();
    d1 = (d1 / n).sqrt();
    let h = if d1 <= 1e-10 { 1e-3 * span } else { 0.01 * d0.max(1e-5) / d1 };
    h.min(0.1 * span).min(max_step).max(1e-12 * span)
}
