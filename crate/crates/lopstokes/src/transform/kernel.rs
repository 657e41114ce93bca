//! Decay of k(x', x_N) = F^{-1}[e^{-(1+A^2)^1/2 x_N} l(xi')] against |x|^{-N},
//! sampled on the periodic box. The continuous inverse transform is
//! approximated by the Fourier series with weight 1/|box|.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{TangentialGrid, Transformer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSymbol {
    /// l = 1
    One,
    /// l = (1 + A^2)^1/2
    Bracket,
}

impl KernelSymbol {
    fn eval(self, a2: f64) -> f64 {
        match self {
            KernelSymbol::One => 1.0,
            KernelSymbol::Bracket => (1.0 + a2).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shell {
    pub r_min: f64,
    pub r_max: f64,
    /// sup |k| over the shell
    pub sup_k: f64,
    /// sup |k| |x|^N over the shell
    pub sup_weighted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelLevel {
    pub x_n: f64,
    pub shells: Vec<Shell>,
    pub envelope: f64,
    pub sup_k: f64,
}

/// Kernel on the grid at depth x_N, with per-shell sups over |x| in dyadic
/// shells [x_N 2^j, x_N 2^{j+1}) restricted to |x'| <= L/4 (away from images).
pub fn kernel_level(symbol: KernelSymbol, grid: &TangentialGrid, x_n: f64) -> Result<KernelLevel> {
    let t = Transformer::new(grid)?;
    let vol: f64 = grid.box_lengths.iter().product();
    let n = (grid.axes() + 1) as i32;
    let c: Vec<C64> = (0..grid.len())
        .map(|k| {
            let a2: f64 = grid.frequency(k).iter().map(|x| x * x).sum();
            C64::from((-(1.0 + a2).sqrt() * x_n).exp() * symbol.eval(a2) / vol)
        })
        .collect();
    let kx = t.inverse(&c);
    let rmax = 0.25 * grid.box_lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let mut shells: Vec<Shell> = Vec::new();
    let mut lo = x_n;
    while lo < rmax.hypot(x_n) {
        shells.push(Shell { r_min: lo, r_max: 2.0 * lo, sup_k: 0.0, sup_weighted: 0.0 });
        lo *= 2.0;
    }
    let mut sup_k: f64 = 0.0;
    for (i, v) in kx.iter().enumerate() {
        let rp = grid.periodic_radius(i);
        sup_k = sup_k.max(v.norm());
        if rp > rmax {
            continue;
        }
        let r = rp.hypot(x_n);
        let j = ((r / x_n).log2().floor() as usize).min(shells.len().saturating_sub(1));
        let s = &mut shells[j];
        s.sup_k = s.sup_k.max(v.norm());
        s.sup_weighted = s.sup_weighted.max(v.norm() * r.powi(n));
    }
    let envelope = shells.iter().map(|s| s.sup_weighted).fold(0.0, f64::max);
    Ok(KernelLevel { x_n, shells, envelope, sup_k })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelDecayReport {
    pub symbol: KernelSymbol,
    pub grid: TangentialGrid,
    pub x_levels: Vec<f64>,
    pub base: Vec<KernelLevel>,
    /// max over levels of envelope ratio (larger / smaller) after refinement.
    pub refinement_drift: f64,
    /// Same after doubling the box at fixed spacing.
    pub enlargement_drift: f64,
    /// sup |k| strictly decreases from each level to the next (deeper) one.
    pub monotone_in_depth: bool,
    pub limit: f64,
}

impl KernelDecayReport {
    pub fn passed(&self) -> bool {
        self.refinement_drift < self.limit && self.enlargement_drift < self.limit && self.monotone_in_depth
    }
}

fn drift(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return f64::INFINITY;
    }
    (a / b).max(b / a)
}

/// `x_levels` should be increasing; the monotonicity check compares
/// consecutive levels.
pub fn kernel_decay_check(
    symbol: KernelSymbol,
    grid: &TangentialGrid,
    x_levels: &[f64],
    limit: f64,
) -> Result<KernelDecayReport> {
    let levels = |g: &TangentialGrid| -> Result<Vec<KernelLevel>> {
        x_levels.iter().map(|&x| kernel_level(symbol, g, x)).collect()
    };
    let base = levels(grid)?;
    let fine = levels(&grid.refined())?;
    let big = levels(&grid.enlarged())?;
    let refinement_drift = base.iter().zip(&fine).map(|(a, b)| drift(a.envelope, b.envelope)).fold(1.0, f64::max);
    let enlargement_drift = base.iter().zip(&big).map(|(a, b)| drift(a.envelope, b.envelope)).fold(1.0, f64::max);
    let monotone_in_depth = base.windows(2).all(|w| w[1].sup_k < w[0].sup_k);
    Ok(KernelDecayReport {
        symbol,
        grid: grid.clone(),
        x_levels: x_levels.to_vec(),
        base,
        refinement_drift,
        enlargement_drift,
        monotone_in_depth,
        limit,
    })
}

pub fn require_bounded(rep: &KernelDecayReport) -> Result<()> {
    if rep.passed() {
        Ok(())
    } else {
        Err(Error::EnvelopeUnbounded(rep.refinement_drift.max(rep.enlargement_drift)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_kernel_1d() {
        // N = 2, l = 1: k = x_N e^{-...}-damped Poisson kernel; |k| |x|^2 stays bounded
        let g = TangentialGrid::new(vec![40.0], vec![256]).unwrap();
        let rep = kernel_decay_check(KernelSymbol::One, &g, &[0.5, 1.0, 2.0], 2.0).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        let rep = kernel_decay_check(KernelSymbol::Bracket, &g, &[0.5, 1.0, 2.0], 2.0).unwrap();
        assert!(rep.passed(), "{rep:#?}");
    }
}
