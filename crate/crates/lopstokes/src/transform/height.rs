//! Height extension H(x', x_N) = F^{-1}[e^{-(1+A^2)^1/2 x_N} (lambda + K)^{-1} d_hat]
//! on x_N >= 0, extended to x_N < 0 by Lions reflection
//! sum_{j=1..4} a_j H(x', -j x_N).

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::solve::strip_zero_mode;
use super::{max_abs, TangentialGrid, Transformer};
use crate::coefficients::height::height_k;
use crate::error::{Error, Result};
use crate::lopatinski::assemble;
use crate::symbol::{FluidParams, SpectralPoint};
use crate::tolerances::Tolerances;

/// Solve sum_j a_j (-j)^k = 1, k = 0..3.
pub fn lions_coefficients() -> [f64; 4] {
    let m = Matrix4::from_fn(|k, j| (-((j + 1) as f64)).powi(k as i32));
    let a = m.lu().solve(&Vector4::repeat(1.0)).expect("Vandermonde with distinct nodes is invertible");
    [a[0], a[1], a[2], a[3]]
}

/// max_k |sum_j a_j (-j)^k - 1|.
pub fn lions_resubstitution(a: &[f64; 4]) -> f64 {
    (0..4)
        .map(|k| (a.iter().enumerate().map(|(j, aj)| aj * (-((j + 1) as f64)).powi(k)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Per-mode amplitudes c_k = (lambda + K)^{-1} d_hat and decay rates
/// s_k = (1 + A^2)^1/2.
#[derive(Clone, Debug, Serialize)]
pub struct HeightExtension {
    pub grid: TangentialGrid,
    pub lambda: C64,
    pub amplitude: Vec<C64>,
    pub rate: Vec<f64>,
    pub lions: [f64; 4],
    pub warnings: Vec<String>,
}

pub fn height_extension(
    p: &FluidParams,
    lambda: C64,
    grid: &TangentialGrid,
    d: &[C64],
    project_zero_mode: bool,
) -> Result<HeightExtension> {
    let t = Transformer::new(grid)?;
    let tol = Tolerances::default();
    let mut coeffs = vec![t.forward(d)];
    let mut warnings = Vec::new();
    strip_zero_mode(&mut coeffs, &tol, project_zero_mode, &mut warnings)?;
    let dh = &coeffs[0];
    let amplitude: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || dh[k] == C64::new(0.0, 0.0) {
                return Ok(C64::new(0.0, 0.0));
            }
            let sp = SpectralPoint::new(lambda, &grid.frequency(k))?;
            let l = assemble(p, &sp)?;
            Ok(height_k(p, &sp, &l)?.inv * dh[k])
        })
        .collect::<Result<_>>()?;
    let rate = (0..grid.len())
        .map(|k| {
            let a2: f64 = grid.frequency(k).iter().map(|x| x * x).sum();
            (1.0 + a2).sqrt()
        })
        .collect();
    Ok(HeightExtension { grid: grid.clone(), lambda, amplitude, rate, lions: lions_coefficients(), warnings })
}

impl HeightExtension {
    /// Per-mode value of the k-th x_N derivative at depth x (either side).
    fn mode_derivative(&self, i: usize, x: f64, order: i32) -> C64 {
        let (c, s) = (self.amplitude[i], self.rate[i]);
        if x >= 0.0 {
            c * (-s).powi(order) * (-s * x).exp()
        } else {
            self.lions
                .iter()
                .enumerate()
                .map(|(j, aj)| {
                    let jj = (j + 1) as f64;
                    c * (aj * (-jj).powi(order) * (-s).powi(order) * (s * jj * x).exp())
                })
                .sum()
        }
    }

    /// d^order/dx_N^order of the extended field at depth x; at x = 0 the
    /// sign of zero picks the side (-0.0 is the reflected side).
    pub fn derivative_field(&self, x: f64, order: i32) -> Result<Vec<C64>> {
        let t = Transformer::new(&self.grid)?;
        let xs = if x == 0.0 && x.is_sign_negative() { -f64::MIN_POSITIVE } else { x };
        let c: Vec<C64> = (0..self.grid.len()).map(|i| self.mode_derivative(i, xs, order)).collect();
        Ok(t.inverse(&c))
    }

    pub fn field(&self, x: f64) -> Result<Vec<C64>> {
        self.derivative_field(x, 0)
    }

    /// Interface height F^{-1}[(lambda + K)^{-1} d_hat].
    pub fn trace(&self) -> Result<Vec<C64>> {
        let t = Transformer::new(&self.grid)?;
        Ok(t.inverse(&self.amplitude))
    }

    /// max over orders 0..3 of |left - right| / max |right| at x_N = 0.
    pub fn c3_mismatch(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let right = self.derivative_field(0.0, k)?;
            let left = self.derivative_field(-0.0, k)?;
            let s = max_abs(&right);
            if s > 0.0 {
                worst = worst.max(right.iter().zip(&left).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / s);
            }
        }
        Ok(worst)
    }

    /// One-sided second-order finite differences of the sampled field on both
    /// sides of x_N = 0, orders 0..3, as a loose sanity check of the analytic
    /// derivatives. Returns the largest relative discrepancy. The reflected
    /// side carries rates up to 4s, so h must be small against 1/(4s).
    pub fn finite_difference_check(&self, h: f64) -> Result<f64> {
        // one-sided stencils of order 2 (weights for f(0), f(h), ..., f(5h))
        const W: [[f64; 6]; 4] = [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-1.5, 2.0, -0.5, 0.0, 0.0, 0.0],
            [2.0, -5.0, 4.0, -1.0, 0.0, 0.0],
            [-2.5, 9.0, -12.0, 7.0, -1.5, 0.0],
        ];
        let right: Vec<Vec<C64>> = (0..6).map(|i| self.field(i as f64 * h)).collect::<Result<_>>()?;
        let left: Vec<Vec<C64>> = (0..6).map(|i| self.field(-(i as f64) * h - f64::MIN_POSITIVE)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for (k, w) in W.iter().enumerate() {
            let exact = self.derivative_field(0.0, k as i32)?;
            let s = max_abs(&exact);
            if s == 0.0 {
                continue;
            }
            let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
            for (vals, sg) in [(&right, 1.0), (&left, sgn)] {
                for pt in 0..exact.len() {
                    let fd: C64 = w.iter().zip(vals.iter()).map(|(wi, f)| f[pt] * *wi).sum::<C64>() * (sg / h.powi(k as i32));
                    worst = worst.max((fd - exact[pt]).norm() / s);
                }
            }
        }
        Ok(worst)
    }
}

/// Error for kinematic solves below the certified cutoff.
pub fn check_cutoff(lambda: C64, lambda0: f64) -> Result<()> {
    if lambda.norm() < lambda0 {
        return Err(Error::HeightNotInvertible(lambda.norm()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::volevich::test_field;

    #[test]
    fn lions_solution() {
        let a = lions_coefficients();
        assert!(lions_resubstitution(&a) < 1e-13);
        // exact rational solution, frozen from a fraction-arithmetic solve
        for (x, e) in a.iter().zip([10.0, -20.0, 15.0, -4.0]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_c3_matching() {
        let p = FluidParams::reference();
        let grid = TangentialGrid::new(vec![6.0, 6.0], vec![16, 16]).unwrap();
        let d = test_field(&grid);
        let ext = height_extension(&p, C64::new(3.0, 1.0), &grid, &d, false).unwrap();
        let tr = ext.trace().unwrap();
        let f0 = ext.field(0.0).unwrap();
        assert!(tr.iter().zip(&f0).all(|(a, b)| (a - b).norm() <= 1e-14 * max_abs(&tr)));
        assert!(ext.c3_mismatch().unwrap() < 1e-9);
        let fd = ext.finite_difference_check(2e-4).unwrap();
        assert!(fd < 1e-2, "{fd}");
    }
}
