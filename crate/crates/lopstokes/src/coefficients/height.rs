//! Height symbol K closing the kinematic relation to (lambda + K) H = d, and
//! the grid search for a cutoff lambda0 beyond which lambda + K is boundedly
//! invertible.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{SymbolTable, MINUS, PLUS};
use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::lopatinski::{assemble_with_roots, omega1, LopatinskiMatrix, ScanGrid};
use crate::symbol::{char_roots, FluidParams, Sector, SpectralPoint};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightSymbol {
    pub k: C64,
    /// (lambda + K)^{-1}
    pub inv: C64,
}

pub fn height_k(p: &FluidParams, sp: &SpectralPoint, l: &LopatinskiMatrix) -> Result<HeightSymbol> {
    let k = height_k_value(p, sp, l);
    let d = sp.lambda + k;
    if !(d.norm() >= Tolerances::default().singular_det) {
        return Err(Error::HeightNotInvertible(d.norm()));
    }
    Ok(HeightSymbol { k, inv: 1.0 / d })
}

/// K from the cofactors:
/// (A^3 (rho- s- L32 - rho+ s- L22) + A^2 (rho- s+ L33 - rho+ s+ L23)) / ((rho- - rho+) det L).
pub fn height_k_value(p: &FluidParams, sp: &SpectralPoint, l: &LopatinskiMatrix) -> C64 {
    let a = sp.a();
    let (rp, rm) = (p.rho_plus(), p.rho_minus());
    let (sp_, sm) = (p.sigma_plus(), p.sigma_minus());
    let t3 = (l.cof(3, 2) * rm - l.cof(2, 2) * rp) * (sm * a * a * a);
    let t2 = (l.cof(3, 3) * rm - l.cof(2, 3) * rp) * (sp_ * a * a);
    (t3 + t2) / (l.det * p.density_jump())
}

/// Contribution of the velocity data to the kinematic relation:
/// (lambda + K) H = d + coupling(h).
pub fn kinematic_coupling(p: &FluidParams, sp: &SpectralPoint, tab: &SymbolTable, h: &[C64]) -> C64 {
    let a = sp.a();
    let bn = |ph: usize| -> C64 { h.iter().enumerate().map(|(m, v)| tab.s[ph].nm[m] * v).sum::<C64>() * a };
    (bn(MINUS) * p.rho_minus() - bn(PLUS) * p.rho_plus()) / p.density_jump()
}

/// The constant printed for the large-A slope of K. It carries no sigma
/// factor, so it equals the true slope coefficient only when sigma = 1.
pub fn omega3_printed(p: &FluidParams) -> f64 {
    let (mp, mm, nu) = (p.mu_plus(), p.mu_minus(), p.nu_plus());
    let dr = p.density_jump();
    let w = 2.0 * mp + nu;
    4.0 * mp * ((mp + mm) * nu + mp * mm) / w * (p.rho_minus() / dr).powi(2)
        + 4.0 * (mp * (mp + nu) / w + mm) * mm * (p.rho_plus() / dr).powi(2)
}

/// lim K/A as A/|lambda|^1/2 -> infinity, including the sigma factor.
pub fn slope_limit(p: &FluidParams) -> f64 {
    p.sigma() * omega3_printed(p) / omega1(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightScanReport {
    pub epsilon: f64,
    pub grid: ScanGrid,
    /// Required lower bound on |lambda + K| / (|lambda| + A).
    pub bound: f64,
    /// Grid cutoff: the bound holds for all scanned |lambda| >= lambda0 on
    /// the grid and its refinement, the suffix infimum moves by less than
    /// `drift_limit` under refinement, and no zero of lambda + K was found
    /// in the sector beyond it.
    pub lambda0: Option<f64>,
    /// Grid infimum of |lambda + K| / (|lambda| + A) over |lambda| >= lambda0
    /// (smaller of the two grids).
    pub omega4: Option<f64>,
    pub drift_limit: f64,
    /// Per-|lambda| infimum over angles and A.
    pub per_magnitude: Vec<(f64, f64)>,
    pub per_magnitude_refined: Vec<(f64, f64)>,
    /// Zeros of lambda + K (re lambda, im lambda, A) inside the sector,
    /// located by Newton iteration from the worst grid points.
    pub sector_zeros: Vec<[f64; 3]>,
    pub omega3_printed: f64,
    pub slope_limit: f64,
    /// max |K/A / slope_limit - 1| at A = 100 |lambda|^1/2 (sigma > 0 only).
    pub slope_deviation: Option<f64>,
    /// max |K| / |lambda|^1/2 over real lambda >= 1 and the A grid.
    pub k_envelope: f64,
}

fn point_k(p: &FluidParams, lam: C64, a: f64, tol: &Tolerances) -> Result<C64> {
    let sp = SpectralPoint::new(lam, &[a])?;
    let r = char_roots(p, &sp)?;
    let l = assemble_with_roots(p, &sp, &r, tol)?;
    Ok(height_k_value(p, &sp, &l))
}

struct MagnitudeRow {
    m: f64,
    worst: f64,
    lam: C64,
    a: f64,
}

fn magnitude_scan(p: &FluidParams, sector: &Sector, grid: &ScanGrid, tol: &Tolerances) -> Result<Vec<MagnitudeRow>> {
    let avals = log_grid(&grid.a);
    let angles = grid.angles(sector);
    log_grid(&grid.lambda)
        .par_iter()
        .map(|&m| {
            let mut row = MagnitudeRow { m, worst: f64::INFINITY, lam: C64::new(m, 0.0), a: avals[0] };
            for &th in &angles {
                let lam = C64::from_polar(m, th);
                for &a in &avals {
                    let v = (lam + point_k(p, lam, a, tol)?).norm() / (m + a);
                    if v < row.worst {
                        row = MagnitudeRow { m, worst: v, lam, a };
                    }
                }
            }
            Ok(row)
        })
        .collect()
}

/// Newton iteration on f(lambda) = lambda + K(lambda, A) at fixed A.
fn newton_zero(p: &FluidParams, lam0: C64, a: f64, tol: &Tolerances) -> Option<C64> {
    let f = |l: C64| point_k(p, l, a, tol).ok().map(|k| l + k);
    let mut lam = lam0;
    for _ in 0..60 {
        let v = f(lam)?;
        let h = 1e-7 * lam.norm();
        let d = (f(lam + h)? - v) / h;
        let step = v / d;
        lam -= step;
        if !lam.is_finite() || lam.norm() == 0.0 {
            return None;
        }
        if step.norm() < 1e-12 * lam.norm() {
            let v = f(lam)?;
            return (v.norm() < 1e-8 * (lam.norm() + a)).then_some(lam);
        }
    }
    None
}

/// Smallest candidate cutoff accepted by both grids (see `HeightScanReport::lambda0`).
fn stable_cutoff(
    coarse: &[(f64, f64)],
    fine: &[(f64, f64)],
    bound: f64,
    drift: f64,
    beyond: f64,
) -> Option<(f64, f64)> {
    let suffix = |rows: &[(f64, f64)], c: f64| rows.iter().filter(|r| r.0 >= c).map(|r| r.1).fold(f64::INFINITY, f64::min);
    for (i, &(m, _)) in coarse.iter().enumerate() {
        if m <= beyond {
            continue;
        }
        let (a, b) = (suffix(coarse, m), suffix(fine, m));
        if a >= bound && b >= bound && (b / a - 1.0).abs() < drift {
            return Some((if i == 0 && beyond <= 0.0 { 0.0 } else { m }, a.min(b)));
        }
    }
    None
}

pub fn scan_height(p: &FluidParams, sector: &Sector, grid: &ScanGrid, bound: f64) -> Result<HeightScanReport> {
    let tol = Tolerances::default();
    let coarse = magnitude_scan(p, sector, grid, &tol)?;
    let fine = magnitude_scan(p, sector, &grid.refined(), &tol)?;

    let mut sector_zeros: Vec<[f64; 3]> = Vec::new();
    for row in coarse.iter().chain(&fine).filter(|r| r.worst < 0.1) {
        if let Some(z) = newton_zero(p, row.lam, row.a, &tol) {
            let known = sector_zeros.iter().any(|q| (C64::new(q[0], q[1]) - z).norm() < 1e-6 * z.norm() && q[2] == row.a);
            if sector.contains(z) && !known {
                sector_zeros.push([z.re, z.im, row.a]);
            }
        }
    }
    let beyond = sector_zeros.iter().map(|q| q[0].hypot(q[1])).fold(0.0, f64::max);

    let per_magnitude: Vec<(f64, f64)> = coarse.iter().map(|r| (r.m, r.worst)).collect();
    let per_magnitude_refined: Vec<(f64, f64)> = fine.iter().map(|r| (r.m, r.worst)).collect();
    let drift_limit = tol.omega_refinement_drift;
    let (lambda0, omega4) = match stable_cutoff(&per_magnitude, &per_magnitude_refined, bound, drift_limit, beyond) {
        Some((l0, w)) => (Some(l0), Some(w)),
        None => (None, None),
    };

    let angles = grid.angles(sector);
    let slope = slope_limit(p);
    let slope_deviation = if p.sigma() > 0.0 {
        let mut dev: f64 = 0.0;
        for &th in &angles {
            for k in [-2, 0, 2] {
                let lam = C64::from_polar(10f64.powi(k), th);
                let a = 100.0 * lam.norm().sqrt();
                let kv = point_k(p, lam, a, &tol)?;
                dev = dev.max((kv / (a * slope) - 1.0).norm());
            }
        }
        Some(dev)
    } else {
        None
    };

    let mut k_envelope: f64 = 0.0;
    let avals = log_grid(&grid.a);
    for &m in log_grid(&grid.lambda).iter().filter(|&&m| m >= 1.0) {
        for &a in &avals {
            let kv = point_k(p, C64::new(m, 0.0), a, &tol)?;
            k_envelope = k_envelope.max(kv.norm() / m.sqrt());
        }
    }

    Ok(HeightScanReport {
        epsilon: sector.epsilon,
        grid: grid.clone(),
        bound,
        lambda0,
        omega4,
        drift_limit,
        per_magnitude,
        per_magnitude_refined,
        sector_zeros,
        omega3_printed: omega3_printed(p),
        slope_limit: slope,
        slope_deviation,
        k_envelope,
    })
}

pub fn find_lambda0(p: &FluidParams, sector: &Sector, grid: &ScanGrid) -> Result<f64> {
    let rep = scan_height(p, sector, grid, Tolerances::default().height_bound)?;
    rep.lambda0.ok_or(Error::NoCutoffFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::coefficient_symbols;
    use crate::lopatinski::assemble;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn omega3_reference() {
        let p = FluidParams::reference();
        assert!((omega3_printed(&p) - (16.0 + 20.0 / 3.0)).abs() < 1e-13);
        assert!((slope_limit(&p) - 68.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn k_from_cofactors_matches_s_symbols() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(0.4, -1.3), &[0.7, 0.2]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        let l = assemble(&p, &sp).unwrap();
        let tab = coefficient_symbols(&p, &sp, &r, &l);
        let a = sp.a();
        let via_s = -(tab.s[MINUS].nn * p.rho_minus() - tab.s[PLUS].nn * p.rho_plus()) * (a * a) / p.density_jump();
        let k = height_k_value(&p, &sp, &l);
        assert!((k - via_s).norm() < 1e-13 * k.norm());
    }

    #[test]
    fn slope_at_large_a() {
        let p = FluidParams::reference();
        let k = point_k(&p, c(1.0, 0.0), 1e6, &Tolerances::default()).unwrap();
        assert!((k.re / 1e6 / slope_limit(&p) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn cutoff_search() {
        let pm = [(1.0, 0.5), (2.0, 1e-4), (3.0, 0.2), (4.0, 0.1)];
        assert_eq!(stable_cutoff(&pm, &pm, 1e-3, 0.05, 0.0), Some((3.0, 0.1)));
        assert_eq!(stable_cutoff(&pm[2..], &pm[2..], 1e-3, 0.05, 0.0), Some((0.0, 0.1)));
        assert_eq!(stable_cutoff(&pm[2..], &pm[2..], 1e-3, 0.05, 3.5), Some((4.0, 0.1)));
        assert_eq!(stable_cutoff(&[(1.0, 1e-5)], &[(1.0, 1e-5)], 1e-3, 0.05, 0.0), None);
        // the refined grid sees a dip the coarse one missed
        let fine = [(1.0, 0.5), (1.5, 0.5), (2.0, 0.5), (2.5, 0.01), (3.0, 0.2), (3.5, 0.2), (4.0, 0.1)];
        assert_eq!(stable_cutoff(&[(1.0, 0.5), (2.0, 0.5), (3.0, 0.2), (4.0, 0.1)], &fine, 1e-3, 0.05, 0.0), Some((3.0, 0.1)));
    }

    #[test]
    fn damped_surface_waves_push_the_cutoff_up() {
        // lambda + K has zeros in the sector for small |lambda| (damped
        // capillary waves); the cutoff must clear them
        let p = FluidParams::reference();
        let rep = scan_height(&p, &Sector::default(), &ScanGrid::default(), 1e-3).unwrap();
        assert!(!rep.sector_zeros.is_empty());
        let l0 = rep.lambda0.unwrap();
        for z in &rep.sector_zeros {
            assert!(z[0].hypot(z[1]) < l0);
        }
        assert!(rep.omega4.unwrap() >= 1e-3);
    }
}
