//! Exact solution of the spectral interface problem for one (lambda, xi')
//! and the checks that hold it to account: ODE residuals, interface
//! conditions, the kinematic relation and an energy identity.

pub mod energy;
pub mod fuzz;
pub mod mutation;
pub mod residual;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coefficients::height::{height_k, kinematic_coupling};
use crate::coefficients::{coefficient_symbols, solve_betas, Amplitudes};
use crate::error::Result;
use crate::lopatinski::{assemble_with_roots, LopatinskiMatrix};
use crate::profile::{Basis, Profile};
use crate::symbol::{char_roots, FluidParams, Roots, SpectralPoint};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// H supplied directly.
    ExplicitH,
    /// H = (lambda + K)^{-1} (d + velocity coupling).
    Kinematic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryData {
    pub h_hat: Vec<C64>,
    pub big_h_hat: C64,
    pub d_hat: C64,
    pub mode: Mode,
}

impl BoundaryData {
    pub fn explicit(h_hat: Vec<C64>, big_h_hat: C64) -> Self {
        BoundaryData { h_hat, big_h_hat, d_hat: C64::new(0.0, 0.0), mode: Mode::ExplicitH }
    }
    pub fn kinematic(h_hat: Vec<C64>, d_hat: C64) -> Self {
        BoundaryData { h_hat, big_h_hat: C64::new(0.0, 0.0), d_hat, mode: Mode::Kinematic }
    }
}

/// Which algebraic route produces the amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// P/R/S/T symbols from the adjugate.
    Symbols,
    /// Elimination on the 3x3 system plus trace relations.
    Direct,
}

/// Exponential-sum solution. Components are ordered tangential first, normal
/// last; `plus` lives on x_N >= 0, `minus` and `pressure` on x_N <= 0.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileSolution {
    pub sp: SpectralPoint,
    pub roots: Roots,
    pub plus: Vec<Profile>,
    pub minus: Vec<Profile>,
    pub pressure: Profile,
    pub h_hat_effective: C64,
    pub amplitudes: Amplitudes,
    #[serde(skip)]
    pub tol: Tolerances,
}

impl ProfileSolution {
    pub fn from_amplitudes(sp: &SpectralPoint, r: &Roots, amp: &Amplitudes, big_h: C64, tol: &Tolerances) -> Self {
        let n = sp.dim().n();
        let n_t = n - 1;
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for j in 0..n {
            let mut fp = Profile::zero();
            // M+ = -DivDiff(-B+, -A+)
            fp.push(-amp.alpha_scaled_plus.get(j, n_t), Basis::DivDiff(-r.b_plus, -r.a_plus));
            fp.push(amp.beta_plus.get(j, n_t), Basis::Exp(-r.b_plus));
            plus.push(fp);
            let mut fm = Profile::zero();
            fm.push(amp.alpha_scaled_minus.get(j, n_t), Basis::DivDiff(r.b_minus, r.a_minus));
            fm.push(amp.beta_minus.get(j, n_t), Basis::Exp(r.b_minus));
            minus.push(fm);
        }
        ProfileSolution {
            sp: *sp,
            roots: *r,
            plus,
            minus,
            pressure: Profile::exp(amp.gamma_minus, r.a_minus),
            h_hat_effective: big_h,
            amplitudes: *amp,
            tol: *tol,
        }
    }

    pub fn n(&self) -> usize {
        self.sp.dim().n()
    }

    /// Velocity at x_N (plus side for x >= 0, minus side for x < 0).
    pub fn velocity(&self, x: f64) -> Vec<C64> {
        let comps = if x >= 0.0 { &self.plus } else { &self.minus };
        comps.iter().map(|f| f.eval(x, &self.tol)).collect()
    }

    pub fn pressure_at(&self, x: f64) -> C64 {
        self.pressure.eval(x, &self.tol)
    }

    /// All term amplitudes, for mutation probes: (component label, term index).
    pub fn amplitude_slots(&self) -> Vec<(String, usize)> {
        let mut v = Vec::new();
        for (side, comps) in [("+", &self.plus), ("-", &self.minus)] {
            for (j, f) in comps.iter().enumerate() {
                for k in 0..f.terms.len() {
                    v.push((format!("u{side}{j}"), k));
                }
            }
        }
        for k in 0..self.pressure.terms.len() {
            v.push(("pi-".to_string(), k));
        }
        v
    }

    pub fn amplitude_mut(&mut self, label: &str, k: usize) -> &mut C64 {
        let f = if label == "pi-" {
            &mut self.pressure
        } else {
            let j: usize = label[2..].parse().expect("component index");
            if &label[1..2] == "+" {
                &mut self.plus[j]
            } else {
                &mut self.minus[j]
            }
        };
        &mut f.terms[k].amp
    }
}

/// Effective H for the given data.
pub fn effective_height(
    p: &FluidParams,
    sp: &SpectralPoint,
    l: &LopatinskiMatrix,
    tab: &crate::coefficients::SymbolTable,
    data: &BoundaryData,
) -> Result<C64> {
    Ok(match data.mode {
        Mode::ExplicitH => data.big_h_hat,
        Mode::Kinematic => {
            let hs = height_k(p, sp, l)?;
            hs.inv * (data.d_hat + kinematic_coupling(p, sp, tab, &data.h_hat))
        }
    })
}

pub fn assemble_profiles(p: &FluidParams, sp: &SpectralPoint, data: &BoundaryData) -> Result<ProfileSolution> {
    let tol = Tolerances::default();
    let r = char_roots(p, sp)?;
    let l = assemble_with_roots(p, sp, &r, &tol)?;
    assemble_with(p, sp, &r, &l, data, Route::Symbols, &tol)
}

pub fn assemble_with(
    p: &FluidParams,
    sp: &SpectralPoint,
    r: &Roots,
    l: &LopatinskiMatrix,
    data: &BoundaryData,
    route: Route,
    tol: &Tolerances,
) -> Result<ProfileSolution> {
    assert_eq!(data.h_hat.len(), sp.dim().tangential(), "h has N-1 components");
    let tab = coefficient_symbols(p, sp, r, l);
    let big_h = effective_height(p, sp, l, &tab, data)?;
    let amp = match route {
        Route::Symbols => tab.amplitudes(sp, &data.h_hat, big_h),
        Route::Direct => solve_betas(p, sp, r, l, &data.h_hat, big_h)?,
    };
    Ok(ProfileSolution::from_amplitudes(sp, r, &amp, big_h, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_data_zero_solution() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(1.0, 1.0), &[0.5, 0.5]).unwrap();
        let sol = assemble_profiles(&p, &sp, &BoundaryData::explicit(vec![c(0.0, 0.0); 2], c(0.0, 0.0))).unwrap();
        assert!(sol.plus.iter().chain(sol.minus.iter()).all(|f| f.is_zero()));
        assert!(sol.pressure.is_zero());
    }

    #[test]
    fn tangential_jump() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(0.3, -2.0), &[1.5, -0.2]).unwrap();
        let h1 = c(0.7, 0.4);
        let sol = assemble_profiles(&p, &sp, &BoundaryData::explicit(vec![h1, c(0.0, 0.0)], c(0.0, 0.0))).unwrap();
        let jump = sol.minus[0].eval(0.0, &sol.tol) - sol.plus[0].eval(0.0, &sol.tol);
        assert!((jump - h1).norm() < 1e-12 * h1.norm());
    }

    #[test]
    fn kinematic_trace() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(2.0, 1.0), &[0.8]).unwrap();
        let sol = assemble_profiles(&p, &sp, &BoundaryData::kinematic(vec![c(0.0, 0.0)], c(1.0, 0.0))).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        let l = assemble_with_roots(&p, &sp, &r, &Tolerances::default()).unwrap();
        let hs = height_k(&p, &sp, &l).unwrap();
        assert!((sol.h_hat_effective - hs.inv).norm() < 1e-15 * hs.inv.norm());
        let un = |v: Vec<C64>| v[1];
        let dr = p.density_jump();
        let lhs = sp.lambda * sol.h_hat_effective
            - (un(sol.minus.iter().map(|f| f.eval(0.0, &sol.tol)).collect()) * (p.rho_minus() / dr)
                - un(sol.velocity(0.0)) * (p.rho_plus() / dr));
        assert!((lhs - 1.0).norm() < 1e-12);
    }
}
