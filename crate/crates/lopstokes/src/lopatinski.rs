//! The 3x3 Lopatinski matrix coupling the interface conditions to the
//! boundary amplitudes (i xi'.beta'_-, beta+_N, beta-_N), its determinant,
//! adjugate, and the grid certification of |det L| >= omega (|lambda|^1/2 + A)^4.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{log_grid, LogRange};
use crate::symbol::{char_roots, validate_params, FluidParams, RawParams, Roots, Sector, SpectralPoint};
use crate::tolerances::Tolerances;

pub type Mat3 = [[C64; 3]; 3];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Four entries (L11, L12, L21, L22) of one phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Entries {
    pub l11: C64,
    pub l12: C64,
    pub l21: C64,
    pub l22: C64,
}

impl Entries {
    pub fn det(&self) -> C64 {
        self.l11 * self.l22 - self.l12 * self.l21
    }
    pub fn as_array(&self) -> [C64; 4] {
        [self.l11, self.l12, self.l21, self.l22]
    }
    pub fn from_array(a: [C64; 4]) -> Self {
        Entries { l11: a[0], l12: a[1], l21: a[2], l22: a[3] }
    }
}

/// (A+B+ + A^2)/(rho+ lambda/(2mu+ + nu+) + A^2).
pub fn p_factor(p: &FluidParams, sp: &SpectralPoint, r: &Roots) -> C64 {
    let a2 = sp.a() * sp.a();
    (r.a_plus * r.b_plus + a2) / (sp.lambda * (p.rho_plus() / (2.0 * p.mu_plus() + p.nu_plus())) + a2)
}

/// Plus-phase entries in the P-representation; no division by A+B+ - A^2.
pub fn entries_plus(p: &FluidParams, sp: &SpectralPoint, r: &Roots) -> Entries {
    let (mu, nu) = (p.mu_plus(), p.nu_plus());
    let w = 2.0 * mu + nu;
    let pf = p_factor(p, sp, r);
    let c = mu * (mu + nu) / w;
    let a2 = sp.a() * sp.a();
    Entries {
        l11: pf * r.a_plus * c,
        l12: (2.0 - pf * ((mu + nu) / w)) * (mu * a2),
        l21: (r.a_plus / (r.a_plus + r.b_plus) * (2.0 * mu * nu / w) - mu * (nu - mu) / w) * pf,
        l22: pf * r.b_plus * c,
    }
}

/// Plus-phase entries straight from their quotient definition. Loses digits
/// as lambda -> 0; kept as a cross-check.
pub fn entries_plus_raw(p: &FluidParams, sp: &SpectralPoint, r: &Roots) -> Entries {
    let (mu, nu) = (p.mu_plus(), p.nu_plus());
    let a2 = sp.a() * sp.a();
    let (ap, bp) = (r.a_plus, r.b_plus);
    let d = ap * bp - a2;
    Entries {
        l11: ap * (bp * bp - a2) * mu / d,
        l12: (ap * bp * 2.0 - a2 - bp * bp) * (mu * a2) / d,
        l21: (ap * (bp - ap) * (2.0 * mu) - (ap * ap - a2) * (nu - mu)) / d,
        l22: bp * (ap * ap - a2) * (mu + nu) / d,
    }
}

pub fn entries_minus(p: &FluidParams, sp: &SpectralPoint, r: &Roots) -> Entries {
    let mu = p.mu_minus();
    let a = r.a_minus;
    let bma = r.b_minus_minus_a(p, sp.lambda);
    Entries {
        l11: (a + r.b_minus) * mu,
        l12: a * bma * mu,
        l21: bma * mu,
        l22: (a + r.b_minus) * r.b_minus * mu,
    }
}

/// Minus-phase entries with B- - A formed by subtraction.
pub fn entries_minus_naive(p: &FluidParams, r: &Roots) -> Entries {
    let mu = p.mu_minus();
    let a = r.a_minus;
    let bma = r.b_minus - a;
    Entries {
        l11: (a + r.b_minus) * mu,
        l12: a * bma * mu,
        l21: bma * mu,
        l22: (a + r.b_minus) * r.b_minus * mu,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LopatinskiMatrix {
    pub l_plus: Entries,
    pub l_minus: Entries,
    pub matrix: Mat3,
    pub det: C64,
    /// adj[i][j] is the cofactor with L^{-1} = adj / det.
    pub adjugate: Mat3,
}

impl LopatinskiMatrix {
    pub fn from_entries(lp: Entries, lm: Entries) -> Self {
        let matrix = [
            [lp.l11 + lm.l11, lp.l12, lm.l12],
            [lm.l21, ZERO, lm.l22],
            [-lp.l21, -lp.l22, ZERO],
        ];
        let det = lm.l22 * lp.det() + lp.l22 * lm.det();
        LopatinskiMatrix { l_plus: lp, l_minus: lm, matrix, det, adjugate: adjugate(&matrix) }
    }

    /// Cofactor with 1-based indices.
    pub fn cof(&self, i: usize, j: usize) -> C64 {
        self.adjugate[i - 1][j - 1]
    }

    pub fn inverse(&self) -> Mat3 {
        let mut inv = self.adjugate;
        for row in inv.iter_mut() {
            for v in row.iter_mut() {
                *v /= self.det;
            }
        }
        inv
    }

    /// Same matrix with one entry (phase, index 0..4 in L11, L12, L21, L22
    /// order) multiplied by `factor`. Used by the mutation probes.
    pub fn with_scaled_entry(&self, plus: bool, index: usize, factor: C64) -> Self {
        let mut lp = self.l_plus.as_array();
        let mut lm = self.l_minus.as_array();
        if plus {
            lp[index] *= factor;
        } else {
            lm[index] *= factor;
        }
        Self::from_entries(Entries::from_array(lp), Entries::from_array(lm))
    }
}

pub fn assemble(p: &FluidParams, sp: &SpectralPoint) -> Result<LopatinskiMatrix> {
    let r = char_roots(p, sp)?;
    assemble_with_roots(p, sp, &r, &Tolerances::default())
}

pub fn assemble_with_roots(
    p: &FluidParams,
    sp: &SpectralPoint,
    r: &Roots,
    tol: &Tolerances,
) -> Result<LopatinskiMatrix> {
    let m = LopatinskiMatrix::from_entries(entries_plus(p, sp, r), entries_minus(p, sp, r));
    if !(m.det.norm() >= tol.singular_det) {
        return Err(Error::SingularDetL(m.det.norm()));
    }
    Ok(m)
}

pub fn adjugate(m: &Mat3) -> Mat3 {
    let mut adj = [[ZERO; 3]; 3];
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // transpose of the cofactor matrix: minor of (j, i)
            let r: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let c: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
            *v = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    adj
}

/// Cofactor expansion along the first row.
pub fn det_direct(m: &Mat3) -> C64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_vec(a: &Mat3, x: &[C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * x[k]).sum())
}

/// Gaussian elimination with partial pivoting.
pub fn solve3(m: &Mat3, rhs: &[C64; 3]) -> Result<[C64; 3]> {
    let mut a = *m;
    let mut b = *rhs;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("nonempty");
        if a[piv][col].norm() == 0.0 {
            return Err(Error::SingularDetL(0.0));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = [ZERO; 3];
    for i in (0..3).rev() {
        let s: C64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

/// omega_1 = 8 mu+ mu- (mu+ nu+ + mu- (mu+ + nu+)) / (2 mu+ + nu+): the limit
/// of det L / A^4 as A / |lambda|^1/2 -> infinity.
pub fn omega1(p: &FluidParams) -> f64 {
    let (mp, mm, nu) = (p.mu_plus(), p.mu_minus(), p.nu_plus());
    8.0 * mp * mm * (mp * nu + mm * (mp + nu)) / (2.0 * mp + nu)
}

/// The limit of det L / lambda^2 as |lambda|^1/2 / A -> infinity.
pub fn omega2(p: &FluidParams) -> f64 {
    let (mp, mm, nu) = (p.mu_plus(), p.mu_minus(), p.nu_plus());
    let (rp, rm) = (p.rho_plus(), p.rho_minus());
    (mp * (mp + nu)).sqrt() * rp * rm + (mm * (mp + nu)).sqrt() * rp.sqrt() * rm.powf(1.5)
}

/// Scan grid: |lambda| and A log-spaced, arg lambda on the five base angles
/// {0, +-(pi-eps)/2, +-(pi-eps)} with `extra_per_gap` points inserted in each
/// of the four gaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanGrid {
    pub lambda: LogRange,
    pub a: LogRange,
    pub extra_per_gap: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            lambda: LogRange { min: 1e-4, max: 1e8, per_decade: 10 },
            a: LogRange { min: 1e-4, max: 1e8, per_decade: 10 },
            extra_per_gap: 2,
        }
    }
}

impl ScanGrid {
    pub fn angles(&self, sector: &Sector) -> Vec<f64> {
        let m = sector.max_arg();
        let base = [-m, -m / 2.0, 0.0, m / 2.0, m];
        let mut out = vec![base[0]];
        for w in base.windows(2) {
            for k in 1..=self.extra_per_gap {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / (self.extra_per_gap + 1) as f64);
            }
            out.push(w[1]);
        }
        out
    }

    /// x2 density in every direction; the refined grid contains this one.
    pub fn refined(&self) -> Self {
        ScanGrid {
            lambda: self.lambda.refined(),
            a: self.a.refined(),
            extra_per_gap: 2 * self.extra_per_gap + 1,
        }
    }

    /// All (lambda, A) pairs in the sector (lambda0 respected).
    pub fn points(&self, sector: &Sector) -> Vec<(C64, f64)> {
        let mags = log_grid(&self.lambda);
        let avals = log_grid(&self.a);
        let mut pts = Vec::with_capacity(mags.len() * avals.len() * 16);
        for th in self.angles(sector) {
            for &m in &mags {
                let lam = C64::from_polar(m, th);
                if !sector.contains(lam) {
                    continue;
                }
                for &a in &avals {
                    pts.push((lam, a));
                }
            }
        }
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub re_lambda: f64,
    pub im_lambda: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "abs_detL")]
    pub abs_det_l: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub grid: ScanGrid,
    pub epsilon: f64,
    pub n_points: usize,
    /// Empirical grid infimum of |det L| / (|lambda|^1/2 + A)^4.
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Regime thresholds: A >= r1 |lambda|^1/2 and |lambda|^1/2 >= r2 A.
    pub r1: f64,
    pub r2: f64,
    /// Largest deviations from the asymptotic forms inside those regimes.
    pub delta1: f64,
    pub delta2: f64,
    pub worst: ScanRow,
    #[serde(skip)]
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn scan_lower_bound(p: &FluidParams, sector: &Sector, grid: &ScanGrid) -> Result<ScanReport> {
    scan_lower_bound_with(p, sector, grid, 100.0, &Tolerances::default())
}

pub fn scan_lower_bound_with(
    p: &FluidParams,
    sector: &Sector,
    grid: &ScanGrid,
    regime_ratio: f64,
    tol: &Tolerances,
) -> Result<ScanReport> {
    let pts = grid.points(sector);
    if pts.is_empty() {
        return Err(Error::GridTooCoarse("scan grid has no sector points".into()));
    }
    let (w1, w2) = (omega1(p), omega2(p));
    let rows: Vec<(ScanRow, f64, f64)> = pts
        .par_iter()
        .map(|&(lam, a)| {
            let sp = SpectralPoint::new(lam, &[a])?;
            let r = char_roots(p, &sp)?;
            let m = assemble_with_roots(p, &sp, &r, tol)?;
            let s = sp.scale();
            let row = ScanRow {
                re_lambda: lam.re,
                im_lambda: lam.im,
                a,
                abs_det_l: m.det.norm(),
                ratio: m.det.norm() / s.powi(4),
            };
            let sq = lam.norm().sqrt();
            let d1 = if a >= regime_ratio * sq { (m.det / (w1 * a.powi(4)) - 1.0).norm() } else { 0.0 };
            let d2 = if sq >= regime_ratio * a { (m.det / (lam * lam * w2) - 1.0).norm() } else { 0.0 };
            Ok((row, d1, d2))
        })
        .collect::<Result<_>>()?;
    let worst = rows
        .iter()
        .map(|r| r.0)
        .min_by(|x, y| x.ratio.total_cmp(&y.ratio))
        .expect("nonempty");
    let delta1 = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let delta2 = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if !(worst.ratio > 0.0) {
        return Err(Error::NonPositiveOmega(worst.ratio));
    }
    Ok(ScanReport {
        grid: grid.clone(),
        epsilon: sector.epsilon,
        n_points: rows.len(),
        omega: worst.ratio,
        omega1: w1,
        omega2: w2,
        r1: regime_ratio,
        r2: regime_ratio,
        delta1,
        delta2,
        worst,
        rows: rows.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub ratio: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// max |det L / (omega1 A^4) - 1| with A = ratio |lambda|^1/2.
    pub deviation1: f64,
    /// max |det L / (omega2 lambda^2) - 1| with |lambda|^1/2 = ratio A.
    pub deviation2: f64,
}

impl AsymptoticReport {
    pub fn check(&self, limit: f64) -> Result<()> {
        let d = self.deviation1.max(self.deviation2);
        if d > limit {
            Err(Error::AsymptoticMismatch { deviation: d, limit })
        } else {
            Ok(())
        }
    }
}

/// Deviations from the two asymptotic forms, sampled at the edge of each
/// regime (where they are largest) over |lambda| in 1e-4..1e8 and the
/// sector's scan angles.
pub fn asymptotic_report(p: &FluidParams, sector: &Sector, ratio: f64) -> Result<AsymptoticReport> {
    let (w1, w2) = (omega1(p), omega2(p));
    let tol = Tolerances::default();
    let mut dev1: f64 = 0.0;
    let mut dev2: f64 = 0.0;
    let angles = ScanGrid::default().angles(sector);
    for k in -4..=8 {
        let mag = 10f64.powi(k);
        for &th in &angles {
            let lam = C64::from_polar(mag, th);
            for a in [ratio * mag.sqrt(), mag.sqrt() / ratio] {
                let sp = SpectralPoint::new(lam, &[a])?;
                let r = char_roots(p, &sp)?;
                let det = assemble_with_roots(p, &sp, &r, &tol)?.det;
                if a > mag.sqrt() {
                    dev1 = dev1.max((det / (w1 * a.powi(4)) - 1.0).norm());
                } else {
                    dev2 = dev2.max((det / (lam * lam * w2) - 1.0).norm());
                }
            }
        }
    }
    Ok(AsymptoticReport { ratio, omega1: w1, omega2: w2, deviation1: dev1, deviation2: dev2 })
}

/// Largest relative defects of the algebraic identities over a point set.
/// Each defect is measured against the magnitude of the products it is
/// built from, so cancellation inside det L does not inflate it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n_points: usize,
    /// det_direct(L) versus L-22 det L+ + L+22 det L-.
    pub factorization: f64,
    /// L adj(L) versus det L I.
    pub adjugate: f64,
    /// det L(s^2 lambda, s xi') versus s^4 det L(lambda, xi').
    pub homogeneity: f64,
}

impl IdentityReport {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.factorization < tol.det_factorization && self.adjugate < tol.adjugate && self.homogeneity < tol.homogeneity
    }
}

/// Sum of the magnitudes of the six products in the Leibniz expansion.
fn det_scale(m: &Mat3) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().map(|s| (m[0][s[0]] * m[1][s[1]] * m[2][s[2]]).norm()).sum()
}

fn identity_defects(p: &FluidParams, sp: &SpectralPoint, scales: &[f64], tol: &Tolerances) -> Result<[f64; 3]> {
    let m = assemble_with_roots(p, sp, &char_roots(p, sp)?, tol)?;
    let ds = det_scale(&m.matrix);
    let fact = (det_direct(&m.matrix) - m.det).norm() / ds;
    let prod = mat_mul(&m.matrix, &m.adjugate);
    let mut adj: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { m.det } else { ZERO };
            let s: f64 = (0..3).map(|k| m.matrix[i][k].norm() * m.adjugate[k][j].norm()).sum();
            if s > 0.0 {
                adj = adj.max((prod[i][j] - e).norm() / s);
            }
        }
    }
    let mut hom: f64 = 0.0;
    for &s in scales {
        let q = sp.rescaled(s);
        let ms = assemble_with_roots(p, &q, &char_roots(p, &q)?, tol)?;
        hom = hom.max((ms.det - m.det * s.powi(4)).norm() / (ds * s.powi(4)));
    }
    Ok([fact, adj, hom])
}

pub fn identity_check(
    p: &FluidParams,
    points: &[SpectralPoint],
    scales: &[f64],
    tol: &Tolerances,
) -> Result<IdentityReport> {
    let d: Vec<[f64; 3]> = points.par_iter().map(|sp| identity_defects(p, sp, scales, tol)).collect::<Result<_>>()?;
    let worst = |i: usize| d.iter().map(|x| x[i]).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(IdentityReport { n_points: d.len(), factorization: worst(0), adjugate: worst(1), homogeneity: worst(2) })
}

/// The reference set with each viscosity, and the plus phase as a whole,
/// pushed to ratios 1e3 and 1e-3 against the rest.
pub fn stress_sets() -> Vec<(String, FluidParams)> {
    let mut out = Vec::new();
    for f in [1e3, 1e-3] {
        let base = RawParams::default();
        for (name, raw) in [
            ("mu_plus", RawParams { mu_plus: f, ..base }),
            ("mu_minus", RawParams { mu_minus: f, ..base }),
            ("nu_plus", RawParams { nu_plus: f, ..base }),
            ("plus_phase", RawParams { mu_plus: f, nu_plus: f, ..base }),
        ] {
            let p = validate_params(&raw).expect("stress sets are valid");
            out.push((format!("{name}x{f:e}"), p));
        }
    }
    out
}

/// Default sector half-angle.
pub const DEFAULT_EPSILON: f64 = PI / 4.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{validate_params, RawParams};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn p_factor_example() {
        let p = validate_params(&RawParams { rho_plus: 2.0, rho_minus: 1.0, ..RawParams::default() })
            .unwrap();
        let sp = SpectralPoint::new(c(3.0, 0.0), &[1.0]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        let pf = p_factor(&p, &sp, &r);
        assert_relative_eq!(pf.re, (2.0 * 7f64.sqrt() + 1.0) / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn minus_entries_example() {
        // A = 1, B- = 2 needs rho- lambda / mu- = 3
        let p = validate_params(&RawParams { rho_minus: 3.0, ..RawParams::default() }).unwrap();
        let sp = SpectralPoint::new(c(1.0, 0.0), &[1.0]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        let lm = entries_minus(&p, &sp, &r);
        assert_relative_eq!(lm.l11.re, 3.0, max_relative = 1e-15);
        assert_relative_eq!(lm.l22.re, 6.0, max_relative = 1e-15);
    }

    #[test]
    fn l21_small_lambda_limit() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(1e-10, 0.0), &[1.0]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        let lp = entries_plus(&p, &sp, &r);
        assert_relative_eq!(lp.l21.re, 2.0 / 3.0, max_relative = 1e-9);
        let lm = entries_minus(&p, &sp, &r);
        // L-21 -> 0 like lambda
        assert_relative_eq!(lm.l21.re / 1e-10, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn matrix_layout_and_identities() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(0.3, 1.7), &[0.4, -0.9]).unwrap();
        let m = assemble(&p, &sp).unwrap();
        assert_eq!(m.matrix[1][1], ZERO);
        assert_eq!(m.matrix[2][2], ZERO);
        assert_eq!(m.matrix[2][0], -m.l_plus.l21);
        let dd = det_direct(&m.matrix);
        assert!((dd - m.det).norm() / dd.norm() < 1e-13);
        let prod = mat_mul(&m.matrix, &m.inverse());
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i][j] - e).norm() < 1e-12);
            }
        }
        // a hand-checked cofactor: L23 = L-12 L-21 - (L+11 + L-11) L-22
        let l23 = m.l_minus.l12 * m.l_minus.l21 - (m.l_plus.l11 + m.l_minus.l11) * m.l_minus.l22;
        assert!((m.cof(2, 3) - l23).norm() < 1e-13 * l23.norm());
    }

    #[test]
    fn omegas_reference() {
        let p = FluidParams::reference();
        assert_relative_eq!(omega1(&p), 8.0, max_relative = 1e-15);
        assert_relative_eq!(omega2(&p), 2.0 * 2f64.sqrt() + 4.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss_solve() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(-0.5, 2.0), &[3.0]).unwrap();
        let m = assemble(&p, &sp).unwrap();
        let b = [c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0)];
        let x = solve3(&m.matrix, &b).unwrap();
        let y = mat_vec(&m.matrix, &x);
        for k in 0..3 {
            assert!((y[k] - b[k]).norm() < 1e-13 * b[k].norm().max(1.0));
        }
    }

    #[test]
    fn angles_contain_base_and_refine_nested() {
        let s = Sector::default();
        let g = ScanGrid::default();
        let a = g.angles(&s);
        assert_eq!(a.len(), 13);
        let ar = g.refined().angles(&s);
        for th in &a {
            assert!(ar.iter().any(|t| (t - th).abs() < 1e-12));
        }
    }
}
