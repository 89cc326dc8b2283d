//! Dormand–Prince 5(4) with step-size control, for small fixed-size systems.

use std::ops::ControlFlow;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Dp5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed `|h|` at abscissa `x`.
    pub max_step: Box<dyn Fn(f64) -> f64>,
    /// Give up when `|h|` falls below this at `x`.
    pub min_step: Box<dyn Fn(f64) -> f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Reached,
    Observer,
    StepUnderflow,
}

/// Integrates `y' = f(x, y)` from `x0` towards `x_end` (either direction).
/// `observe(x, y, y')` runs after every accepted step and may break.
pub(crate) fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &Dp5Options,
    mut observe: impl FnMut(f64, &[f64; N], &[f64; N]) -> ControlFlow<()>,
) -> (f64, [f64; N], Stop) {
    let dir = (x_end - x0).signum();
    let mut x = x0;
    let mut y = y0;
    let mut k0 = f(x, &y);
    if observe(x, &y, &k0).is_break() {
        return (x, y, Stop::Observer);
    }
    let mut h = dir * (opts.max_step)(x).min((x_end - x0).abs()) * 0.1;
    loop {
        if (x_end - x) * dir <= 0.0 {
            return (x, y, Stop::Reached);
        }
        let cap = (opts.max_step)(x);
        if h.abs() > cap {
            h = dir * cap;
        }
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        if h.abs() < (opts.min_step)(x) && (x_end - x).abs() > (opts.min_step)(x) {
            return (x, y, Stop::StepUnderflow);
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y_new = y;
        for (s, ks) in k.iter().enumerate().take(6) {
            let b = A[6][s];
            for i in 0..N {
                y_new[i] += h * b * ks[i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            x += h;
            y = y_new;
            // first-same-as-last
            k0 = k[6];
            if observe(x, &y, &k0).is_break() {
                return (x, y, Stop::Observer);
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rtol: f64) -> Dp5Options {
        Dp5Options {
            rtol,
            atol: 1e-14,
            max_step: Box::new(|_| 1.0),
            min_step: Box::new(|_| 1e-14),
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let (x, y, stop) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts(1e-10),
            |_, _, _| ControlFlow::Continue(()),
        );
        assert_eq!(stop, Stop::Reached);
        assert!((x - 10.0).abs() < 1e-14);
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn backward_and_blowup() {
        // y' = y², y(1) = 1 backwards is fine; forwards blows up at x = 2
        let (_, y, stop) = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 1.0, [1.0], 0.0, &opts(1e-10), |_, _, _| ControlFlow::Continue(()));
        assert_eq!(stop, Stop::Reached);
        assert!((y[0] - 0.5).abs() < 1e-9);
        let (x, _, stop) = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            1.0,
            [1.0],
            3.0,
            &opts(1e-10),
            |_, y, _| if y[0] > 1e6 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) },
        );
        assert_eq!(stop, Stop::Observer);
        assert!((x - 2.0).abs() < 1e-5);
    }
}
