//! Physical-space layer on a periodic tangential box: FFT sampling, the
//! per-mode solve, Volevich-form evaluation, the height extension and the
//! kernel decay check.

pub mod height;
pub mod io;
pub mod kernel;
pub mod solve;
pub mod volevich;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box [0, L_1) x ... with n_i samples per axis (1 or 2 axes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentialGrid {
    pub box_lengths: Vec<f64>,
    pub shape: Vec<usize>,
}

impl TangentialGrid {
    pub fn new(box_lengths: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let g = TangentialGrid { box_lengths, shape };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_shape = self.shape.iter().all(|&n| n >= 16 && n.is_power_of_two());
        let ok_box = self.box_lengths.iter().all(|&l| l > 0.0 && l.is_finite());
        if !(ok_shape && ok_box && matches!(self.shape.len(), 1 | 2) && self.shape.len() == self.box_lengths.len()) {
            return Err(Error::InvalidGrid(self.shape.clone()));
        }
        Ok(())
    }

    pub fn axes(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed wavenumber for FFT index i on an axis of n points.
    pub fn signed(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Row-major multi-index of a flat index.
    pub fn index(&self, flat: usize) -> Vec<usize> {
        match self.shape[..] {
            [_] => vec![flat],
            [_, n1] => vec![flat / n1, flat % n1],
            _ => unreachable!("validated"),
        }
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        match self.shape[..] {
            [_] => idx[0],
            [_, n1] => idx[0] * n1 + idx[1],
            _ => unreachable!("validated"),
        }
    }

    pub fn wavenumbers(&self, flat: usize) -> Vec<i64> {
        self.index(flat).iter().zip(&self.shape).map(|(&i, &n)| Self::signed(i, n)).collect()
    }

    /// xi'_k = 2 pi k / L per axis.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        self.wavenumbers(flat).iter().zip(&self.box_lengths).map(|(&k, &l)| 2.0 * PI * k as f64 / l).collect()
    }

    /// Flat index of a signed wavenumber vector.
    pub fn mode_index(&self, k: &[i64]) -> usize {
        let idx: Vec<usize> = k.iter().zip(&self.shape).map(|(&k, &n)| k.rem_euclid(n as i64) as usize).collect();
        self.flat(&idx)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.index(flat).iter().zip(self.shape.iter().zip(&self.box_lengths)).map(|(&i, (&n, &l))| i as f64 * l / n as f64).collect()
    }

    /// Same box, twice the samples per axis.
    pub fn refined(&self) -> Self {
        TangentialGrid { box_lengths: self.box_lengths.clone(), shape: self.shape.iter().map(|n| 2 * n).collect() }
    }

    /// Twice the box at the same spacing.
    pub fn enlarged(&self) -> Self {
        TangentialGrid {
            box_lengths: self.box_lengths.iter().map(|l| 2.0 * l).collect(),
            shape: self.shape.iter().map(|n| 2 * n).collect(),
        }
    }

    /// Minimum-image distance of a grid point from the origin.
    pub fn periodic_radius(&self, flat: usize) -> f64 {
        self.point(flat)
            .iter()
            .zip(&self.box_lengths)
            .map(|(&x, &l)| {
                let y = if x > 0.5 * l { x - l } else { x };
                y * y
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// FFT plans for one grid; 2-D transforms go axis by axis.
pub struct Transformer {
    grid: TangentialGrid,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl Transformer {
    pub fn new(grid: &TangentialGrid) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        let fwd = grid.shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inv = grid.shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Ok(Transformer { grid: grid.clone(), fwd, inv })
    }

    pub fn grid(&self) -> &TangentialGrid {
        &self.grid
    }

    fn apply(&self, data: &mut [C64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.grid.len(), "field size must match the grid");
        match self.grid.shape[..] {
            [_] => plans[0].process(data),
            [n0, n1] => {
                plans[1].process(data); // every row, contiguous
                let mut col = vec![C64::new(0.0, 0.0); n0];
                for j in 0..n1 {
                    for i in 0..n0 {
                        col[i] = data[i * n1 + j];
                    }
                    plans[0].process(&mut col);
                    for i in 0..n0 {
                        data[i * n1 + j] = col[i];
                    }
                }
            }
            _ => unreachable!("validated"),
        }
    }

    /// Fourier coefficients c_k with f(x) = sum_k c_k e^{i xi_k . x}.
    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        let mut d = f.to_vec();
        self.apply(&mut d, &self.fwd);
        let s = 1.0 / self.grid.len() as f64;
        d.iter_mut().for_each(|v| *v *= s);
        d
    }

    /// Samples of sum_k c_k e^{i xi_k . x}.
    pub fn inverse(&self, c: &[C64]) -> Vec<C64> {
        let mut d = c.to_vec();
        self.apply(&mut d, &self.inv);
        d
    }
}

/// max |inverse(forward(f)) - f| / max |f|.
pub fn round_trip_error(t: &Transformer, f: &[C64]) -> f64 {
    let back = t.inverse(&t.forward(f));
    let scale = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

/// Plane wave amp * e^{i xi_k . x} sampled on the grid.
pub fn plane_wave(grid: &TangentialGrid, k: &[i64], amp: C64) -> Vec<C64> {
    let xi: Vec<f64> = k.iter().zip(&grid.box_lengths).map(|(&k, &l)| 2.0 * PI * k as f64 / l).collect();
    (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let ph: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            amp * C64::from_polar(1.0, ph)
        })
        .collect()
}

pub(crate) fn max_abs(f: &[C64]) -> f64 {
    f.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TangentialGrid::new(vec![1.0], vec![16]).is_ok());
        assert!(TangentialGrid::new(vec![1.0], vec![24]).is_err());
        assert!(TangentialGrid::new(vec![1.0, 1.0], vec![16, 8]).is_err());
        assert!(TangentialGrid::new(vec![1.0], vec![16, 16]).is_err());
    }

    #[test]
    fn plane_wave_hits_one_coefficient() {
        let g = TangentialGrid::new(vec![3.0, 5.0], vec![16, 32]).unwrap();
        let t = Transformer::new(&g).unwrap();
        let amp = C64::new(0.3, -1.2);
        let c = t.forward(&plane_wave(&g, &[-3, 5], amp));
        let k = g.mode_index(&[-3, 5]);
        assert!((c[k] - amp).norm() < 1e-14);
        assert_eq!(g.wavenumbers(k), vec![-3, 5]);
        let rest = c.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-14);
    }

    #[test]
    fn round_trip() {
        let g = TangentialGrid::new(vec![2.0], vec![64]).unwrap();
        let t = Transformer::new(&g).unwrap();
        let f: Vec<C64> = (0..64).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64).sqrt())).collect();
        assert!(round_trip_error(&t, &f) < 1e-13);
    }
}
