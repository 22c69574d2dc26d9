//! Fourth-order central finite differences.
//!
//! First derivatives use the five-point stencil with step
//! `cbrt(eps) * (1 + |x|)`. Second derivatives (and derivatives of
//! quantities that already carry a finite-difference error) use the larger
//! step `eps^(1/6) * (1 + |x|)`, which balances the `h^4` truncation error
//! against the `eps / h^2` roundoff of a second difference.

use nalgebra::{DMatrix, DVector};

const FIRST: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const SECOND: [(f64, f64); 5] =
    [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Forward five-point first-derivative stencil; mirror the offsets for backward.
const ONE_SIDED: [(f64, f64); 5] =
    [(0.0, -25.0 / 12.0), (1.0, 48.0 / 12.0), (2.0, -36.0 / 12.0), (3.0, 16.0 / 12.0), (4.0, -3.0 / 12.0)];

/// Offsets (in units of the step) touched by the stencils.
pub const STENCIL_REACH: f64 = 2.0;

pub fn first_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.abs())
}

pub fn second_step(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 6.0) * (1.0 + x.abs())
}

/// Values that finite-difference stencils can combine linearly.
pub trait FdValue: Sized {
    fn scaled(&self, w: f64) -> Self;
    fn add_scaled(&mut self, w: f64, other: &Self);
}

impl FdValue for f64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
}

impl FdValue for DVector<f64> {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        self.axpy(w, other, 1.0);
    }
}

impl FdValue for DMatrix<f64> {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
}

fn accumulate<T: FdValue>(acc: &mut Option<T>, w: f64, v: T) {
    match acc {
        None => *acc = Some(v.scaled(w)),
        Some(a) => a.add_scaled(w, &v),
    }
}

/// `∂f/∂x_axis` at `x` with step `h`.
pub fn partial<T, E, F>(mut f: F, x: &[f64], axis: usize, h: f64) -> Result<T, E>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T, E>,
{
    let mut y = x.to_vec();
    let mut acc = None;
    for (k, w) in FIRST {
        y[axis] = x[axis] + k * h;
        accumulate(&mut acc, w / h, f(&y)?);
    }
    Ok(acc.expect("stencil is non-empty"))
}

/// `∂f/∂x_axis` from samples on one side only: `x + k·h` for `k = 0..4`.
/// A negative `h` samples backward. Fourth order, like [`partial`].
pub fn one_sided_partial<T, E, F>(mut f: F, x: &[f64], axis: usize, h: f64) -> Result<T, E>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T, E>,
{
    let mut y = x.to_vec();
    let mut acc = None;
    for (k, w) in ONE_SIDED {
        y[axis] = x[axis] + k * h;
        accumulate(&mut acc, w / h, f(&y)?);
    }
    Ok(acc.expect("stencil is non-empty"))
}

/// `∂²f/∂x_a∂x_b` at `x` with steps `ha`, `hb`.
pub fn second_partial<T, E, F>(mut f: F, x: &[f64], a: usize, b: usize, ha: f64, hb: f64) -> Result<T, E>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T, E>,
{
    let mut y = x.to_vec();
    let mut acc = None;
    if a == b {
        for (k, w) in SECOND {
            y[a] = x[a] + k * ha;
            accumulate(&mut acc, w / (ha * ha), f(&y)?);
        }
    } else {
        for (ka, wa) in FIRST {
            for (kb, wb) in FIRST {
                y[a] = x[a] + ka * ha;
                y[b] = x[b] + kb * hb;
                accumulate(&mut acc, wa * wb / (ha * hb), f(&y)?);
            }
        }
    }
    Ok(acc.expect("stencil is non-empty"))
}

/// All first partials, one entry per axis, with the first-derivative step policy.
pub fn gradient<T, E, F>(mut f: F, x: &[f64]) -> Result<Vec<T>, E>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T, E>,
{
    (0..x.len()).map(|axis| partial(&mut f, x, axis, first_step(x[axis]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(v: f64) -> Result<f64, ()> {
        Ok(v)
    }

    #[test]
    fn first_derivative_of_sine() {
        let x = [0.7];
        let d = partial(|y: &[f64]| ok(y[0].sin()), &x, 0, first_step(0.7)).unwrap();
        assert!((d - 0.7f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn fourth_order_is_exact_on_quartics() {
        // Truncation error of the five-point stencil starts at the fifth derivative.
        let f = |y: &[f64]| ok(y[0].powi(4) - 3.0 * y[0].powi(3) + y[0]);
        let d = partial(f, &[1.3], 0, 0.1).unwrap();
        let exact = 4.0 * 1.3f64.powi(3) - 9.0 * 1.3f64.powi(2) + 1.0;
        assert!((d - exact).abs() < 1e-12);
    }

    #[test]
    fn one_sided_is_exact_on_quartics() {
        let f = |y: &[f64]| ok(y[0].powi(4) - 3.0 * y[0].powi(3) + y[0]);
        let exact = 4.0 * 1.3f64.powi(3) - 9.0 * 1.3f64.powi(2) + 1.0;
        for h in [0.05, -0.05] {
            let d = one_sided_partial(f, &[1.3], 0, h).unwrap();
            assert!((d - exact).abs() < 1e-10, "{d} vs {exact}");
        }
    }

    #[test]
    fn mixed_second_partial() {
        let f = |y: &[f64]| ok((y[0] * y[1]).exp());
        let x = [0.4, -0.3];
        let d = second_partial(f, &x, 0, 1, second_step(0.4), second_step(-0.3)).unwrap();
        let p = x[0] * x[1];
        assert!((d - (1.0 + p) * p.exp()).abs() < 1e-8);
        let dd = second_partial(f, &x, 1, 1, second_step(0.4), second_step(-0.3)).unwrap();
        assert!((dd - x[0] * x[0] * p.exp()).abs() < 1e-8);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<f64, &str> = partial(|_: &[f64]| Err("boom"), &[0.0], 0, 0.1);
        assert_eq!(r, Err("boom"));
    }
}
