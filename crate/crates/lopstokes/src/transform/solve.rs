//! Grid solve: forward FFT of the data, exact per-mode solution, evaluation
//! at the requested depths, inverse FFT.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{TangentialGrid, Transformer};
use crate::error::{Error, Result};
use crate::resolvent::residual::{decay_rates, default_depths, interface_residual, ode_residual};
use crate::resolvent::{assemble_profiles, BoundaryData, Mode, ProfileSolution};
use crate::symbol::{FluidParams, SpectralPoint};
use crate::tolerances::Tolerances;

/// Interface data sampled on the grid at x_N = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalData {
    pub grid: TangentialGrid,
    /// h_m(x'), m = 1..N-1.
    pub h: Vec<Vec<C64>>,
    /// H(x') in explicit mode, d(x') in kinematic mode.
    pub height: Vec<C64>,
    pub mode: Mode,
}

impl PhysicalData {
    pub fn zero(grid: &TangentialGrid, mode: Mode) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        PhysicalData { grid: grid.clone(), h: vec![z.clone(); grid.axes()], height: z, mode }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Remove a zero-frequency component instead of rejecting it.
    pub project_zero_mode: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeResidual {
    pub k: Vec<i64>,
    pub ode: f64,
    pub interface: f64,
}

/// Fields on the grid. `u_plus[l][J]` is u+_J at depth +x_levels[l],
/// `u_minus` and `pressure` are taken at -x_levels[l].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhysicalSolution {
    pub grid: TangentialGrid,
    pub lambda: C64,
    pub x_levels: Vec<f64>,
    pub u_plus: Vec<Vec<Vec<C64>>>,
    pub u_minus: Vec<Vec<Vec<C64>>>,
    pub pressure: Vec<Vec<C64>>,
    /// Interface height H(x') (derived in kinematic mode).
    pub height: Vec<C64>,
    pub mode_residuals: Vec<ModeResidual>,
    pub warnings: Vec<String>,
}

/// Zero-mode handling shared by the grid solvers. Returns the coefficient
/// arrays with the k = 0 entry cleared.
pub(crate) fn strip_zero_mode(
    coeffs: &mut [Vec<C64>],
    tol: &Tolerances,
    project: bool,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let norm: f64 = coeffs.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let zero: f64 = coeffs.iter().map(|c| c[0].norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 && zero > tol.zero_mode * norm {
        if !project {
            return Err(Error::ZeroModeData(zero / norm));
        }
        warnings.push(format!("projected out a zero-frequency component of relative size {:.3e}", zero / norm));
    }
    for c in coeffs.iter_mut() {
        c[0] = C64::new(0.0, 0.0);
    }
    Ok(())
}

pub fn solve_physical(
    p: &FluidParams,
    lambda: C64,
    data: &PhysicalData,
    x_levels: &[f64],
    opts: &SolveOptions,
) -> Result<PhysicalSolution> {
    let grid = &data.grid;
    let t = Transformer::new(grid)?;
    let tol = Tolerances::default();
    let nt = grid.axes();
    let n = nt + 1;
    if data.h.len() != nt || data.h.iter().chain(std::iter::once(&data.height)).any(|f| f.len() != grid.len()) {
        return Err(Error::InvalidGrid(grid.shape.clone()));
    }
    let mut warnings = Vec::new();
    let mut coeffs: Vec<Vec<C64>> = data.h.iter().chain(std::iter::once(&data.height)).map(|f| t.forward(f)).collect();
    strip_zero_mode(&mut coeffs, &tol, opts.project_zero_mode, &mut warnings)?;

    let per_mode: Vec<Option<(ProfileSolution, BoundaryData)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let h: Vec<C64> = (0..nt).map(|m| coeffs[m][k]).collect();
            let z = coeffs[nt][k];
            if k == 0 || (z == C64::new(0.0, 0.0) && h.iter().all(|v| *v == C64::new(0.0, 0.0))) {
                return Ok(None);
            }
            let sp = SpectralPoint::new(lambda, &grid.frequency(k))?;
            let bd = match data.mode {
                Mode::ExplicitH => BoundaryData::explicit(h, z),
                Mode::Kinematic => BoundaryData::kinematic(h, z),
            };
            Ok(Some((assemble_profiles(p, &sp, &bd)?, bd)))
        })
        .collect::<Result<_>>()?;

    let zero = C64::new(0.0, 0.0);
    let mut slowest = f64::INFINITY;
    let mut mode_residuals = Vec::new();
    let mut hc = vec![zero; grid.len()];
    for (k, m) in per_mode.iter().enumerate() {
        if let Some((sol, bd)) = m {
            let (a, b) = decay_rates(sol);
            slowest = slowest.min(a).min(b);
            hc[k] = sol.h_hat_effective;
            mode_residuals.push(ModeResidual {
                k: grid.wavenumbers(k),
                ode: ode_residual(p, sol, &default_depths(sol)),
                interface: interface_residual(p, sol, bd).max(),
            });
        }
    }
    let lmin = grid.box_lengths.iter().copied().fold(f64::INFINITY, f64::min);
    if slowest.is_finite() && lmin < 10.0 / slowest {
        warnings.push(format!(
            "box length {lmin} is below 10x the slowest decay length {:.3e}; periodic images may matter",
            1.0 / slowest
        ));
    }

    let eval_level = |x: f64| -> (Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<C64>) {
        let mut up = vec![vec![zero; grid.len()]; n];
        let mut um = vec![vec![zero; grid.len()]; n];
        let mut pc = vec![zero; grid.len()];
        for (k, m) in per_mode.iter().enumerate() {
            if let Some((sol, _)) = m {
                for j in 0..n {
                    up[j][k] = sol.plus[j].eval(x, &sol.tol);
                    um[j][k] = sol.minus[j].eval(-x, &sol.tol);
                }
                pc[k] = sol.pressure.eval(-x, &sol.tol);
            }
        }
        (
            up.iter().map(|c| t.inverse(c)).collect(),
            um.iter().map(|c| t.inverse(c)).collect(),
            t.inverse(&pc),
        )
    };
    let levels: Vec<_> = x_levels.iter().map(|&x| eval_level(x.abs())).collect();
    let mut u_plus = Vec::new();
    let mut u_minus = Vec::new();
    let mut pressure = Vec::new();
    for (a, b, c) in levels {
        u_plus.push(a);
        u_minus.push(b);
        pressure.push(c);
    }
    Ok(PhysicalSolution {
        grid: grid.clone(),
        lambda,
        x_levels: x_levels.to_vec(),
        u_plus,
        u_minus,
        pressure,
        height: t.inverse(&hc),
        mode_residuals,
        warnings,
    })
}

/// Largest deviation between the grid solve of single-mode data
/// (h, H or d) e^{i xi_k . x'} and the spectral solution at xi_k. Each field
/// is compared relative to its largest value over the interface and the
/// requested depths: deep levels of a fast mode are exponentially small, and
/// FFT round-off leaking into slower modes is only meaningful against the
/// field's own size.
pub fn single_mode_deviation(
    p: &FluidParams,
    lambda: C64,
    grid: &TangentialGrid,
    k: &[i64],
    bd: &BoundaryData,
    x_levels: &[f64],
) -> Result<f64> {
    let wave = super::plane_wave(grid, k, C64::new(1.0, 0.0));
    let scale = |a: C64| wave.iter().map(|w| w * a).collect::<Vec<_>>();
    let z = match bd.mode {
        Mode::ExplicitH => bd.big_h_hat,
        Mode::Kinematic => bd.d_hat,
    };
    let data = PhysicalData {
        grid: grid.clone(),
        h: bd.h_hat.iter().map(|&a| scale(a)).collect(),
        height: scale(z),
        mode: bd.mode,
    };
    let phys = solve_physical(p, lambda, &data, x_levels, &SolveOptions::default())?;
    let sp = SpectralPoint::new(lambda, &grid.frequency(grid.mode_index(k)))?;
    let sol = assemble_profiles(p, &sp, bd)?;
    let tol = &sol.tol;
    // amplitude of the single mode at depth x (sign chosen per phase)
    let worst_field = |fields: &[&Vec<C64>], amp: &dyn Fn(f64) -> C64| -> f64 {
        let size = x_levels.iter().map(|&x| amp(x.abs()).norm()).fold(amp(0.0).norm(), f64::max);
        let mut w: f64 = 0.0;
        for (f, &x) in fields.iter().zip(x_levels) {
            let expect = amp(x.abs());
            let d = f.iter().zip(&wave).map(|(a, e)| (a - e * expect).norm()).fold(0.0, f64::max);
            w = w.max(if size > 0.0 { d / size } else { d });
        }
        w
    };
    let hd = phys.height.iter().zip(&wave).map(|(a, e)| (a - e * sol.h_hat_effective).norm()).fold(0.0, f64::max);
    let mut worst = if sol.h_hat_effective.norm() > 0.0 { hd / sol.h_hat_effective.norm() } else { hd };
    for j in 0..sol.n() {
        let up: Vec<&Vec<C64>> = phys.u_plus.iter().map(|l| &l[j]).collect();
        let um: Vec<&Vec<C64>> = phys.u_minus.iter().map(|l| &l[j]).collect();
        worst = worst.max(worst_field(&up, &|x| sol.plus[j].eval(x, tol)));
        worst = worst.max(worst_field(&um, &|x| sol.minus[j].eval(-x, tol)));
    }
    let pr: Vec<&Vec<C64>> = phys.pressure.iter().collect();
    worst = worst.max(worst_field(&pr, &|x| sol.pressure.eval(-x, tol)));
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_data_zero_fields() {
        let p = FluidParams::reference();
        let g = TangentialGrid::new(vec![4.0, 4.0], vec![16, 16]).unwrap();
        let s = solve_physical(&p, c(1.0, 1.0), &PhysicalData::zero(&g, Mode::ExplicitH), &[0.0, 0.5], &SolveOptions::default())
            .unwrap();
        assert!(s.u_plus.iter().flatten().flatten().all(|v| *v == c(0.0, 0.0)));
        assert!(s.pressure.iter().flatten().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn single_mode_matches_spectral() {
        let p = FluidParams::reference();
        let g = TangentialGrid::new(vec![6.0, 5.0], vec![16, 16]).unwrap();
        let bd = BoundaryData::explicit(vec![c(0.4, 0.1), c(-0.2, 0.9)], c(0.3, -0.3));
        let d = single_mode_deviation(&p, c(2.0, -1.0), &g, &[2, -3], &bd, &[0.0, 0.2, 1.0]).unwrap();
        assert!(d < 1e-12, "{d}");
        let g1 = TangentialGrid::new(vec![3.0], vec![32]).unwrap();
        let bd = BoundaryData::kinematic(vec![c(0.0, 0.0)], c(1.0, 0.0));
        let d = single_mode_deviation(&p, c(5.0, 3.0), &g1, &[4], &bd, &[0.1]).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn zero_mode_rejected_or_projected() {
        let p = FluidParams::reference();
        let g = TangentialGrid::new(vec![2.0], vec![16]).unwrap();
        let mut data = PhysicalData::zero(&g, Mode::ExplicitH);
        data.h[0] = vec![c(1.0, 0.0); 16];
        let err = solve_physical(&p, c(1.0, 0.0), &data, &[0.0], &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroModeData(_)));
        let s = solve_physical(&p, c(1.0, 0.0), &data, &[0.0], &SolveOptions { project_zero_mode: true }).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(max_abs(&s.u_plus[0][0]) < 1e-15);
    }
}
