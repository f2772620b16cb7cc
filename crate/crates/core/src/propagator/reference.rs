//! Adaptive Runge–Kutta reference integrator.
//!
//! Validation oracle for the exact propagator. It integrates the same
//! augmented population + accumulator system with an embedded
//! Dormand–Prince 5(4) pair and proportional step control, sharing no
//! code with the matrix-exponential path beyond the generator itself.
//! Slow on purpose; not for production sweeps.

use crate::error::{NvError, Result};
use crate::model::{GeneratorMatrix, Vector8};
use crate::propagator::EmissionAccumulator;

const MAX_STEPS: usize = 50_000_000;

// Dormand-Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 4th-order embedded weights.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

type State10 = [f64; 10];

fn deriv(gen: &GeneratorMatrix, y: &State10) -> State10 {
    let mut dy = [0.0; 10];
    for i in 0..8 {
        let mut acc = 0.0;
        for j in 0..8 {
            acc += gen.m[(i, j)] * y[j];
        }
        dy[i] = acc;
    }
    for j in 0..8 {
        dy[8] += gen.emission_red[j] * y[j];
        dy[9] += gen.emission_ir[j] * y[j];
    }
    dy
}

fn axpy(y: &State10, h: f64, terms: &[(f64, &State10)]) -> State10 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..10 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate populations and photon accumulators over `dt_us` with local
/// error control at `rtol`/`atol`. Returns the final populations and the
/// accumulated expected counts.
pub fn integrate(
    gen: &GeneratorMatrix,
    p0: &Vector8,
    dt_us: f64,
    rtol: f64,
    atol: f64,
) -> Result<(Vector8, EmissionAccumulator)> {
    if !dt_us.is_finite() || dt_us < 0.0 {
        return Err(NvError::validation(format!(
            "reference integration duration must be >= 0, got {dt_us}"
        )));
    }
    let mut y: State10 = [0.0; 10];
    for i in 0..8 {
        y[i] = p0[i];
    }
    if dt_us == 0.0 {
        return Ok(finish(&y));
    }

    // Initial step from the generator's fastest rate.
    let rate_scale = (0..8)
        .map(|j| gen.m[(j, j)].abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut h = (0.1 / rate_scale).min(dt_us);
    let mut t = 0.0;
    let mut steps = 0usize;

    while t < dt_us {
        if steps >= MAX_STEPS {
            return Err(NvError::numeric(
                "reference integrator exceeded its step budget",
            ));
        }
        steps += 1;
        h = h.min(dt_us - t);

        let k1 = deriv(gen, &y);
        let k2 = deriv(gen, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = deriv(gen, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = deriv(gen, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = deriv(
            gen,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = deriv(
            gen,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y5 = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = deriv(gen, &y5);
        let y4 = axpy(
            &y,
            h,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );

        let mut err: f64 = 0.0;
        for i in 0..10 {
            let scale = atol + rtol * y5[i].abs().max(y[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }

        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if !(h > 0.0) || !h.is_finite() {
            return Err(NvError::numeric("reference integrator step underflow"));
        }
    }
    Ok(finish(&y))
}

fn finish(y: &State10) -> (Vector8, EmissionAccumulator) {
    let mut p = Vector8::zeros();
    for i in 0..8 {
        p[i] = y[i];
    }
    (
        p,
        EmissionAccumulator {
            red_counts: y[8],
            ir_counts: y[9],
        },
    )
}
