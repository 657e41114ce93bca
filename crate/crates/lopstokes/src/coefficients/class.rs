//! Finite-difference certification of multiplier classes.
//!
//! A symbol m(lambda, xi') has order s and type 1 when
//! |d^k_xi (tau d_tau)^l m| <= C (|lambda|^1/2 + A)^{s - |k|}, and type 2 when
//! the bound is (|lambda|^1/2 + A)^s A^{-|k|}; here |k| <= 2 and l in {0, 1}.
//! Constants are grid maxima, so the verdict asks that they stay put when the
//! grid is refined (x2 density) and widened (two more decades each way).
//! Symbols outside the claimed class have ratios that grow at the grid edges
//! and fail that comparison.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::height::height_k_value;
use crate::coefficients::{coefficient_symbols, SymbolTable, MINUS, PLUS};
use crate::error::{Error, Result};
use crate::grid::{log_grid, LogRange};
use crate::lopatinski::{assemble_with_roots, entries_minus, entries_plus, LopatinskiMatrix, ScanGrid};
use crate::symbol::{char_roots, FluidParams, Roots, Sector, SpectralPoint};
use crate::tolerances::Tolerances;

/// A vector of symbols evaluated together (they share the expensive work).
/// Evaluation is always in N = 3, xi' = (xi_1, xi_2).
pub trait SymbolFamily: Sync {
    fn names(&self) -> Vec<String>;
    fn eval(&self, lambda: C64, xi: [f64; 2], out: &mut [C64]);
}

/// A single symbol from a closure.
pub struct FnSymbol<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(C64, [f64; 2]) -> C64 + Sync> SymbolFamily for FnSymbol<F> {
    fn names(&self) -> Vec<String> {
        vec![self.name.clone()]
    }
    fn eval(&self, lambda: C64, xi: [f64; 2], out: &mut [C64]) {
        out[0] = (self.f)(lambda, xi);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub order: f64,
    /// 1 or 2
    pub kind: u8,
}

impl Claim {
    pub fn new(order: f64, kind: u8) -> Self {
        assert!(kind == 1 || kind == 2, "multiplier type is 1 or 2");
        Claim { order, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassGrid {
    pub lambda: LogRange,
    pub a: LogRange,
    /// Points inserted in each gap between the five base angles.
    pub extra_per_gap: usize,
    /// Directions of xi' (angles in the xi_1, xi_2 plane).
    pub directions: Vec<f64>,
    /// Decades added at each end when refining.
    pub widen_decades: f64,
}

impl Default for ClassGrid {
    fn default() -> Self {
        ClassGrid {
            lambda: LogRange { min: 1e-4, max: 1e8, per_decade: 2 },
            a: LogRange { min: 1e-4, max: 1e8, per_decade: 2 },
            extra_per_gap: 1,
            directions: vec![0.0, 0.7853981633974483, 1.2],
            widen_decades: 2.0,
        }
    }
}

impl ClassGrid {
    /// x2 density, two more decades each way (lambda never below `floor`).
    pub fn refined(&self, floor: f64) -> Self {
        ClassGrid {
            lambda: self.lambda.refined().extended(self.widen_decades, floor),
            a: self.a.refined().extended(self.widen_decades, 0.0),
            extra_per_gap: 2 * self.extra_per_gap + 1,
            directions: self.directions.clone(),
            widen_decades: self.widen_decades,
        }
    }

    /// Restrict |lambda| to at least `floor` (for symbols only defined beyond a cutoff).
    pub fn above(&self, floor: f64) -> Self {
        let mut g = self.clone();
        g.lambda.min = g.lambda.min.max(floor);
        g.lambda.max = g.lambda.max.max(g.lambda.min);
        g
    }

    fn points(&self, sector: &Sector) -> Vec<(C64, f64, f64)> {
        let sg = ScanGrid { lambda: self.lambda, a: self.a, extra_per_gap: self.extra_per_gap };
        let mut out = Vec::new();
        for (lam, a) in sg.points(sector) {
            for &d in &self.directions {
                out.push((lam, a, d));
            }
        }
        out
    }
}

pub const KAPPAS: [[usize; 2]; 6] = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassConstant {
    pub kappa_multi_index: String,
    pub ell: u8,
    pub constant: f64,
    pub refined_constant: f64,
    pub refinement_drift: f64,
    /// (re lambda, im lambda, A, xi' direction) of the maximizing point.
    pub at: [f64; 4],
    pub refined_at: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierClassReport {
    pub symbol: String,
    pub order: f64,
    #[serde(rename = "type")]
    pub kind: u8,
    pub constants: Vec<ClassConstant>,
    pub grid: ClassGrid,
    pub n_points: usize,
    pub n_points_refined: usize,
    pub verdict: Verdict,
}

impl MultiplierClassReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
    pub fn max_drift(&self) -> f64 {
        self.constants.iter().map(|c| c.refinement_drift.max(1.0 / c.refinement_drift)).fold(1.0, f64::max)
    }
}

/// Grid maxima of the normalized derivative ratios and the index of the
/// point attaining each: result[symbol][kappa][ell].
fn constants(
    fam: &dyn SymbolFamily,
    claims: &[Claim],
    pts: &[(C64, f64, f64)],
    step: f64,
) -> Vec<[[(f64, usize); 2]; 6]> {
    let n = claims.len();
    let zero = vec![[[(0.0f64, 0usize); 2]; 6]; n];
    let merge = |x: &mut (f64, usize), y: (f64, usize)| {
        if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
            *x = y;
        }
    };
    pts.par_iter()
        .enumerate()
        .fold(
            || zero.clone(),
            |mut acc, (i, &(lam, a, dir))| {
                let r = point_ratios(fam, claims, lam, a, dir, step);
                for s in 0..n {
                    for k in 0..6 {
                        for l in 0..2 {
                            let v = r[s][k][l];
                            merge(&mut acc[s][k][l], (if v.is_nan() { f64::INFINITY } else { v }, i));
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || zero.clone(),
            |mut x, y| {
                for s in 0..n {
                    for k in 0..6 {
                        for l in 0..2 {
                            merge(&mut x[s][k][l], y[s][k][l]);
                        }
                    }
                }
                x
            },
        )
}

/// Stencil values of m at xi + (i h, j h) for i, j in {-1, 0, 1}.
fn stencil(fam: &dyn SymbolFamily, lam: C64, xi: [f64; 2], h: f64, n: usize) -> Vec<[[C64; 3]; 3]> {
    let mut vals = vec![[[C64::new(0.0, 0.0); 3]; 3]; n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for i in 0..3 {
        for j in 0..3 {
            let x = [xi[0] + (i as f64 - 1.0) * h, xi[1] + (j as f64 - 1.0) * h];
            fam.eval(lam, x, &mut buf);
            for s in 0..n {
                vals[s][i][j] = buf[s];
            }
        }
    }
    vals
}

fn derivs(v: &[[C64; 3]; 3], h: f64) -> [C64; 6] {
    let h2 = h * h;
    [
        v[1][1],
        (v[2][1] - v[0][1]) / (2.0 * h),
        (v[1][2] - v[1][0]) / (2.0 * h),
        (v[2][1] - v[1][1] * 2.0 + v[0][1]) / h2,
        (v[2][2] - v[2][0] - v[0][2] + v[0][0]) / (4.0 * h2),
        (v[1][2] - v[1][1] * 2.0 + v[1][0]) / h2,
    ]
}

fn max_abs(v: &[[C64; 3]; 3]) -> f64 {
    v.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

fn point_ratios(
    fam: &dyn SymbolFamily,
    claims: &[Claim],
    lam: C64,
    a: f64,
    dir: f64,
    step: f64,
) -> Vec<[[f64; 2]; 6]> {
    let n = claims.len();
    let xi = [a * dir.cos(), a * dir.sin()];
    let h = step * a;
    let tau = lam.im;
    let ht = step * tau.abs().max(lam.norm());
    let base = stencil(fam, lam, xi, h, n);
    let up = stencil(fam, lam + C64::new(0.0, ht), xi, h, n);
    let dn = stencil(fam, lam - C64::new(0.0, ht), xi, h, n);
    let scale = lam.norm().sqrt() + a;
    let eps = f64::EPSILON;
    let mut out = vec![[[0.0; 2]; 6]; n];
    for s in 0..n {
        let mut tdt = [[C64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                tdt[i][j] = (up[s][i][j] - dn[s][i][j]) * (tau / (2.0 * ht));
            }
        }
        let d0 = derivs(&base[s], h);
        let d1 = derivs(&tdt, h);
        let m0 = max_abs(&base[s]);
        let m1 = max_abs(&up[s]).max(max_abs(&dn[s])) * (tau.abs() / ht) + max_abs(&tdt);
        for (k, kap) in KAPPAS.iter().enumerate() {
            let order = (kap[0] + kap[1]) as i32;
            let bound = match claims[s].kind {
                1 => scale.powf(claims[s].order - order as f64),
                _ => scale.powf(claims[s].order) * a.powi(-order),
            };
            // rounding floor of the difference quotient
            let hk = h.powi(order);
            let noise0 = 16.0 * eps * m0 / hk;
            let noise1 = 16.0 * eps * m1 / hk;
            out[s][k][0] = (d0[k].norm() - noise0).max(0.0) / bound;
            out[s][k][1] = (d1[k].norm() - noise1).max(0.0) / bound;
        }
    }
    out
}

/// Search box for `polish`: log10 |lambda|, arg lambda, log10 A.
struct SearchBox {
    lo: [f64; 3],
    hi: [f64; 3],
    /// Initial compass steps (one grid spacing per coordinate).
    step: [f64; 3],
}

impl SearchBox {
    fn new(grid: &ClassGrid, sector: &Sector) -> Self {
        let m = sector.max_arg();
        let lam_lo = grid.lambda.min.max(sector.lambda0 * (1.0 + 1e-9));
        SearchBox {
            lo: [lam_lo.log10(), -m, grid.a.min.log10()],
            hi: [grid.lambda.max.log10(), m, grid.a.max.log10()],
            step: [
                1.0 / grid.lambda.per_decade as f64,
                m / (2.0 * (grid.extra_per_gap + 1) as f64),
                1.0 / grid.a.per_decade as f64,
            ],
        }
    }
}

/// Compass search from a seed point (clamped into the box), so both grids
/// of the refinement comparison report a local supremum rather than
/// whichever samples fall nearest a sharp peak (lambda + K nearly vanishing
/// just outside the sector produces such peaks).
fn polish(
    fam: &dyn SymbolFamily,
    claims: &[Claim],
    start: (C64, f64, f64),
    idx: (usize, usize, usize),
    fd_step: f64,
    bx: &SearchBox,
) -> (f64, (C64, f64, f64)) {
    let (s, k, l) = idx;
    let dir = start.2;
    let to_pt = |u: &[f64; 3]| (C64::from_polar(10f64.powf(u[0]), u[1]), 10f64.powf(u[2]), dir);
    let eval = |u: &[f64; 3]| {
        let (lam, a, d) = to_pt(u);
        let v = point_ratios(fam, claims, lam, a, d, fd_step)[s][k][l];
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut u = [start.0.norm().log10(), start.0.arg(), start.1.log10()];
    for d in 0..3 {
        u[d] = u[d].clamp(bx.lo[d], bx.hi[d]);
    }
    let mut best = eval(&u);
    if !best.is_finite() || best == 0.0 {
        return (best, to_pt(&u));
    }
    let mut step = bx.step;
    for _ in 0..200 {
        let mut moved = false;
        for d in 0..3 {
            for sgn in [1.0, -1.0] {
                let mut v = u;
                v[d] = (v[d] + sgn * step[d]).clamp(bx.lo[d], bx.hi[d]);
                if v[d] == u[d] {
                    continue;
                }
                let f = eval(&v);
                if f > best {
                    best = f;
                    u = v;
                    moved = true;
                }
            }
        }
        if !best.is_finite() {
            break;
        }
        if !moved {
            step.iter_mut().for_each(|x| *x *= 0.5);
            if step[0] < bx.step[0] / 64.0 {
                break;
            }
        }
    }
    (best, to_pt(&u))
}

/// Certify several symbols of one family at once.
pub fn estimate_family(
    fam: &dyn SymbolFamily,
    claims: &[Claim],
    sector: &Sector,
    grid: &ClassGrid,
    tol: &Tolerances,
) -> Result<Vec<MultiplierClassReport>> {
    let names = fam.names();
    assert_eq!(names.len(), claims.len(), "one claim per symbol");
    let coarse = grid.points(sector);
    let fine_grid = grid.refined(sector.lambda0 * (1.0 + 1e-9));
    let fine = fine_grid.points(sector);
    if coarse.len() < 4 || log_grid(&grid.a).len() < 2 || log_grid(&grid.lambda).len() < 2 {
        return Err(Error::GridTooCoarse(format!("{} coarse points", coarse.len())));
    }
    let c0 = constants(fam, claims, &coarse, tol.fd_step);
    let c1 = constants(fam, claims, &fine, tol.fd_step);
    let (box0, box1) = (SearchBox::new(grid, sector), SearchBox::new(&fine_grid, sector));
    let jobs: Vec<(usize, usize, usize)> =
        (0..names.len()).flat_map(|s| (0..6).flat_map(move |k| (0..2).map(move |l| (s, k, l)))).collect();
    let polished: Vec<[(f64, (C64, f64, f64)); 2]> = jobs
        .par_iter()
        .map(|&(s, k, l)| {
            // seed each grid from both maximizers: the two grids then
            // compare the same peaks
            let ((a, ia), (b, ib)) = (c0[s][k][l], c1[s][k][l]);
            let best = |bx: &SearchBox, grid_max: (f64, (C64, f64, f64))| {
                [coarse[ia], fine[ib]]
                    .into_iter()
                    .map(|p| polish(fam, claims, p, (s, k, l), tol.fd_step, bx))
                    .chain(std::iter::once(grid_max))
                    .fold((0.0, coarse[ia]), |x, y| if y.0 > x.0 || y.0.is_nan() { y } else { x })
            };
            [best(&box0, (a, coarse[ia])), best(&box1, (b, fine[ib]))]
        })
        .collect();
    let floor = 1e-12;
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(s, name)| {
            let mut cs = Vec::new();
            let mut ok = true;
            for (k, kap) in KAPPAS.iter().enumerate() {
                for l in 0..2 {
                    let [(a, pa), (b, pb)] = polished[(s * 6 + k) * 2 + l];
                    let loc = |p: &(C64, f64, f64)| [p.0.re, p.0.im, p.1, p.2];
                    let drift = if a.is_finite() && b.is_finite() {
                        (b + floor) / (a + floor)
                    } else {
                        f64::INFINITY
                    };
                    ok &= drift < tol.class_drift && drift > 1.0 / tol.class_drift;
                    cs.push(ClassConstant {
                        kappa_multi_index: format!("{}{}", kap[0], kap[1]),
                        ell: l as u8,
                        constant: a,
                        refined_constant: b,
                        refinement_drift: drift,
                        at: loc(&pa),
                        refined_at: loc(&pb),
                    });
                }
            }
            MultiplierClassReport {
                symbol: name,
                order: claims[s].order,
                kind: claims[s].kind,
                constants: cs,
                grid: grid.clone(),
                n_points: coarse.len(),
                n_points_refined: fine.len(),
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            }
        })
        .collect())
}

pub fn estimate_class(
    fam: &dyn SymbolFamily,
    claim: Claim,
    sector: &Sector,
    grid: &ClassGrid,
) -> Result<MultiplierClassReport> {
    Ok(estimate_family(fam, &[claim], sector, grid, &Tolerances::default())?.remove(0))
}

struct Eval {
    sp: SpectralPoint,
    r: Roots,
    l: LopatinskiMatrix,
}

fn prepare(p: &FluidParams, lam: C64, xi: [f64; 2]) -> Option<Eval> {
    let sp = SpectralPoint::new(lam, &xi).ok()?;
    let r = char_roots(p, &sp).ok()?;
    let l = assemble_with_roots(p, &sp, &r, &Tolerances::default()).ok()?;
    Some(Eval { sp, r, l })
}

fn fill_nan(out: &mut [C64]) {
    out.iter_mut().for_each(|v| *v = C64::new(f64::NAN, f64::NAN));
}

/// Entries of L, (det L)^{-1}, and the product L+11 L-11.
pub struct LopatinskiFamily {
    pub p: FluidParams,
}

impl LopatinskiFamily {
    pub fn claims() -> Vec<Claim> {
        [(1.0, 1), (2.0, 1), (0.0, 1), (1.0, 1), (1.0, 2), (2.0, 2), (1.0, 2), (2.0, 2), (-4.0, 2), (2.0, 2)]
            .map(|(s, t)| Claim::new(s, t))
            .to_vec()
    }
}

impl SymbolFamily for LopatinskiFamily {
    fn names(&self) -> Vec<String> {
        ["L+11", "L+12", "L+21", "L+22", "L-11", "L-12", "L-21", "L-22", "1/detL", "L+11*L-11"]
            .map(String::from)
            .to_vec()
    }
    fn eval(&self, lam: C64, xi: [f64; 2], out: &mut [C64]) {
        let Ok(sp) = SpectralPoint::new(lam, &xi) else { return fill_nan(out) };
        let Ok(r) = char_roots(&self.p, &sp) else { return fill_nan(out) };
        let lp = entries_plus(&self.p, &sp, &r);
        let lm = entries_minus(&self.p, &sp, &r);
        let det = lm.l22 * lp.det() + lp.l22 * lm.det();
        out[..4].copy_from_slice(&lp.as_array());
        out[4..8].copy_from_slice(&lm.as_array());
        out[8] = 1.0 / det;
        out[9] = lp.l11 * lm.l11;
    }
}

/// Solution symbols P, R, S, T and the pressure symbols (N = 3, m = 1).
pub struct CoefficientFamily {
    pub p: FluidParams,
}

const COEFF_NAMES: [(&str, f64, u8); 26] = [
    ("P+_1", 0.0, 2),
    ("P+_N", 0.0, 2),
    ("P-_1", 0.0, 2),
    ("P-_N", 0.0, 2),
    ("R+_11", 0.0, 2),
    ("R+_21", 0.0, 2),
    ("R+_N1", 0.0, 2),
    ("R+_1N", 0.0, 2),
    ("R+_NN", 0.0, 2),
    ("R-_11", 0.0, 2),
    ("R-_21", 0.0, 2),
    ("R-_N1", 0.0, 2),
    ("R-_1N", 0.0, 2),
    ("R-_NN", 0.0, 2),
    ("S_11", -1.0, 2),
    ("S_21", -1.0, 2),
    ("S_1N", -1.0, 2),
    ("S+_N1", -1.0, 2),
    ("S+_NN", -1.0, 2),
    ("S-_N1", -1.0, 2),
    ("S-_NN", -1.0, 2),
    ("T+", 0.0, 1),
    ("T-", 0.0, 1),
    ("p-_1", 1.0, 2),
    ("p-_N", 1.0, 2),
    ("S_12", -1.0, 2),
];

impl CoefficientFamily {
    pub fn claims() -> Vec<Claim> {
        COEFF_NAMES.iter().map(|&(_, s, t)| Claim::new(s, t)).collect()
    }
}

fn table_values(t: &SymbolTable) -> [C64; 26] {
    let (rp, rm) = (&t.r[PLUS], &t.r[MINUS]);
    let (sp, sm) = (&t.s[PLUS], &t.s[MINUS]);
    [
        t.p_m[PLUS][0],
        t.p_n[PLUS],
        t.p_m[MINUS][0],
        t.p_n[MINUS],
        rp.jm[0][0],
        rp.jm[1][0],
        rp.nm[0],
        rp.jn[0],
        rp.nn,
        rm.jm[0][0],
        rm.jm[1][0],
        rm.nm[0],
        rm.jn[0],
        rm.nn,
        sp.jm[0][0],
        sp.jm[1][0],
        sp.jn[0],
        sp.nm[0],
        sp.nn,
        sm.nm[0],
        sm.nn,
        t.t[PLUS],
        t.t[MINUS],
        t.pressure_m[0],
        t.pressure_n,
        sp.jm[0][1],
    ]
}

impl SymbolFamily for CoefficientFamily {
    fn names(&self) -> Vec<String> {
        COEFF_NAMES.iter().map(|x| x.0.to_string()).collect()
    }
    fn eval(&self, lam: C64, xi: [f64; 2], out: &mut [C64]) {
        let Some(e) = prepare(&self.p, lam, xi) else { return fill_nan(out) };
        let t = coefficient_symbols(&self.p, &e.sp, &e.r, &e.l);
        out.copy_from_slice(&table_values(&t));
    }
}

/// Quotients by (lambda + K) that drive the height-problem operators; only
/// meaningful for |lambda| beyond a cutoff lambda0 > 0. J ranges over {1, N},
/// k = 1, both phases.
pub struct HeightQuotientFamily {
    pub p: FluidParams,
}

impl HeightQuotientFamily {
    fn listed() -> Vec<(String, f64)> {
        let mut v = vec![("p-_N/(l+K)".to_string(), 0.0)];
        for ph in ["+", "-"] {
            for j in ["1", "N"] {
                v.push((format!("A R{ph}_{j}N i xi_1/Q"), -1.0));
                v.push((format!("A{ph} A R{ph}_{j}N/Q"), -1.0));
                v.push((format!("A R{ph}_{j}N/Q"), -2.0));
                v.push((format!("A S{ph}_{j}N/Q"), -2.0));
                v.push((format!("A S{ph}_{j}N i xi_1/Q"), -2.0));
                v.push((format!("B{ph} A S{ph}_{j}N/Q"), -2.0));
            }
        }
        v
    }
    pub fn claims() -> Vec<Claim> {
        Self::listed().into_iter().map(|(_, s)| Claim::new(s, 2)).collect()
    }
}

impl SymbolFamily for HeightQuotientFamily {
    fn names(&self) -> Vec<String> {
        Self::listed().into_iter().map(|(n, _)| n).collect()
    }
    fn eval(&self, lam: C64, xi: [f64; 2], out: &mut [C64]) {
        let Some(e) = prepare(&self.p, lam, xi) else { return fill_nan(out) };
        let t = coefficient_symbols(&self.p, &e.sp, &e.r, &e.l);
        let k = height_k_value(&self.p, &e.sp, &e.l);
        let a = e.sp.a();
        let lk = lam + k;
        let q = lk * (1.0 + a * a);
        let ixi = e.sp.i_xi(0);
        out[0] = t.pressure_n / lk;
        let mut i = 1;
        for (ph, ap, b) in [(PLUS, e.r.a_plus, e.r.b_plus), (MINUS, e.r.a_minus, e.r.b_minus)] {
            for (rj, sj) in [(t.r[ph].jn[0], t.s[ph].jn[0]), (t.r[ph].nn, t.s[ph].nn)] {
                let ar = rj * a / q;
                let as_ = sj * a / q;
                out[i..i + 6].copy_from_slice(&[ar * ixi, ar * ap, ar, as_, as_ * ixi, as_ * b]);
                i += 6;
            }
        }
    }
}

/// Run the full declared class table. `lambda0` is the height cutoff used for
/// the quotient family.
pub fn certified_table(
    p: &FluidParams,
    sector: &Sector,
    lambda0: f64,
    grid: &ClassGrid,
    tol: &Tolerances,
) -> Result<Vec<MultiplierClassReport>> {
    let mut out = estimate_family(&LopatinskiFamily { p: *p }, &LopatinskiFamily::claims(), sector, grid, tol)?;
    out.extend(estimate_family(&CoefficientFamily { p: *p }, &CoefficientFamily::claims(), sector, grid, tol)?);
    let l0 = lambda0.max(f64::MIN_POSITIVE);
    let hsector = Sector { lambda0: l0, ..*sector };
    out.extend(estimate_family(
        &HeightQuotientFamily { p: *p },
        &HeightQuotientFamily::claims(),
        &hsector,
        &grid.above(l0 * 1.0000001),
        tol,
    )?);
    Ok(out)
}

/// Constants table rows for CSV output.
pub fn constants_rows(reports: &[MultiplierClassReport]) -> Vec<BTreeMap<&'static str, String>> {
    let mut rows = Vec::new();
    for r in reports {
        for c in &r.constants {
            let mut m = BTreeMap::new();
            m.insert("symbol", r.symbol.clone());
            m.insert("kappa_multi_index", c.kappa_multi_index.clone());
            m.insert("ell", c.ell.to_string());
            m.insert("constant", format!("{:e}", c.constant));
            m.insert("refinement_drift", format!("{:.6}", c.refinement_drift));
            rows.push(m);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> ClassGrid {
        ClassGrid {
            lambda: LogRange { min: 1e-2, max: 1e4, per_decade: 1 },
            a: LogRange { min: 1e-2, max: 1e4, per_decade: 1 },
            extra_per_gap: 0,
            directions: vec![0.3, 1.1],
            widen_decades: 2.0,
        }
    }

    #[test]
    fn remark_examples() {
        let s = Sector::default();
        let g = small_grid();
        let unit = FnSymbol { name: "i xi1/A".into(), f: |_l: C64, x: [f64; 2]| C64::new(0.0, x[0] / x[0].hypot(x[1])) };
        assert!(estimate_class(&unit, Claim::new(0.0, 2), &s, &g).unwrap().passed());
        let a2 = FnSymbol { name: "A^2".into(), f: |_l: C64, x: [f64; 2]| C64::new(x[0] * x[0] + x[1] * x[1], 0.0) };
        assert!(estimate_class(&a2, Claim::new(2.0, 1), &s, &g).unwrap().passed());
        let a = FnSymbol { name: "A".into(), f: |_l: C64, x: [f64; 2]| C64::new(x[0].hypot(x[1]), 0.0) };
        assert!(!estimate_class(&a, Claim::new(1.0, 1), &s, &g).unwrap().passed());
        assert!(estimate_class(&a, Claim::new(1.0, 2), &s, &g).unwrap().passed());
    }
}
