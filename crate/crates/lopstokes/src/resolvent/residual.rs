//! Substitution checks. Every equation is rebuilt as one exponential sum from
//! exact term-by-term derivatives, so a nonzero value is an algebra error and
//! not a discretization one. Each residual is measured against the largest
//! single term entering it.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{BoundaryData, Mode, ProfileSolution};
use crate::profile::Profile;
use crate::symbol::{FluidParams, Phase};

/// max over samples of |sum| / max |term|; 0 when every term vanishes.
fn relative(parts: &[(C64, &Profile)], xs: &[f64], sol: &ProfileSolution) -> f64 {
    let f = Profile::combination(parts);
    xs.iter()
        .map(|&x| {
            let (v, m) = f.eval_with_magnitude(x, &sol.tol);
            if m > 0.0 {
                v.norm() / m
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// 20 log-spaced depths in [1e-3, 10] / (|lambda|^1/2 + A).
pub fn default_depths(sol: &ProfileSolution) -> Vec<f64> {
    let s = sol.sp.scale();
    (0..20).map(|k| 1e-3 * 10f64.powf(4.0 * k as f64 / 19.0) / s).collect()
}

/// Largest relative residual of the five ODE families, evaluated at the
/// given positive depths (applied as +x on the plus side, -x on the minus side).
pub fn ode_residual(p: &FluidParams, sol: &ProfileSolution, depths: &[f64]) -> f64 {
    let sp = &sol.sp;
    let n = sol.n();
    let nt = n - 1;
    let r = &sol.roots;
    let (mp, mm, nu) = (p.mu_plus(), p.mu_minus(), p.nu_plus());
    let xp: Vec<f64> = depths.iter().map(|d| d.abs()).collect();
    let xm: Vec<f64> = depths.iter().map(|d| -d.abs()).collect();

    let d1p: Vec<Profile> = sol.plus.iter().map(|f| f.derivative()).collect();
    let d2p: Vec<Profile> = d1p.iter().map(|f| f.derivative()).collect();
    let d1m: Vec<Profile> = sol.minus.iter().map(|f| f.derivative()).collect();
    let d2m: Vec<Profile> = d1m.iter().map(|f| f.derivative()).collect();
    let dpi = sol.pressure.derivative();
    let bp2 = r.b_plus * r.b_plus;
    let bm2 = r.b_minus * r.b_minus;

    let mut worst: f64 = 0.0;
    // plus momentum
    for j in 0..n {
        let mut parts: Vec<(C64, &Profile)> = vec![(bp2 * mp, &sol.plus[j]), (C64::from(-mp), &d2p[j])];
        let ij = if j < nt { sp.i_xi(j) } else { C64::new(1.0, 0.0) };
        // -nu D_j (i xi'.u' + D u_N), with D_j = i xi_j or D_N
        let tang = if j < nt { &sol.plus } else { &d1p };
        for m in 0..nt {
            parts.push((-ij * sp.i_xi(m) * nu, &tang[m]));
        }
        parts.push((-ij * nu, if j < nt { &d1p[nt] } else { &d2p[nt] }));
        worst = worst.max(relative(&parts, &xp, sol));
    }
    // minus momentum
    for j in 0..n {
        let grad_pi = if j < nt { (sp.i_xi(j), &sol.pressure) } else { (C64::new(1.0, 0.0), &dpi) };
        let parts = [(bm2 * mm, &sol.minus[j]), (C64::from(-mm), &d2m[j]), grad_pi];
        worst = worst.max(relative(&parts, &xm, sol));
    }
    // incompressibility
    let mut parts: Vec<(C64, &Profile)> = (0..nt).map(|m| (sp.i_xi(m), &sol.minus[m])).collect();
    parts.push((C64::new(1.0, 0.0), &d1m[nt]));
    worst.max(relative(&parts, &xm, sol))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InterfaceResidual {
    pub tangential_stress: f64,
    pub normal_stress_minus: f64,
    pub normal_stress_plus: f64,
    pub velocity_jump: f64,
    pub divergence: f64,
    /// Only meaningful in kinematic mode; 0 otherwise.
    pub kinematic: f64,
}

impl InterfaceResidual {
    pub fn max(&self) -> f64 {
        [
            self.tangential_stress,
            self.normal_stress_minus,
            self.normal_stress_plus,
            self.velocity_jump,
            self.divergence,
            self.kinematic,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Relative residual of sum_k c_k f_k(0) + sum consts = 0, measured against
/// the largest single exponential term or constant.
fn trace_relative(parts: &[(C64, &Profile)], consts: &[C64], sol: &ProfileSolution) -> f64 {
    let (v, m) = Profile::combination(parts).eval_with_magnitude(0.0, &sol.tol);
    let v = v + consts.iter().sum::<C64>();
    let m = consts.iter().map(|c| c.norm()).fold(m, f64::max);
    if m > 0.0 {
        v.norm() / m
    } else {
        0.0
    }
}

pub fn interface_residual(p: &FluidParams, sol: &ProfileSolution, data: &BoundaryData) -> InterfaceResidual {
    let sp = &sol.sp;
    let nt = sol.n() - 1;
    let a = sp.a();
    let (mp, mm, nu) = (p.mu_plus(), p.mu_minus(), p.nu_plus());
    let hh = sol.h_hat_effective;
    let one = C64::new(1.0, 0.0);

    let dup: Vec<Profile> = sol.plus.iter().map(|f| f.derivative()).collect();
    let dum: Vec<Profile> = sol.minus.iter().map(|f| f.derivative()).collect();

    let mut out = InterfaceResidual::default();
    for m in 0..nt {
        let ix = sp.i_xi(m);
        let parts = [
            (C64::from(mm), &dum[m]),
            (ix * mm, &sol.minus[nt]),
            (C64::from(-mp), &dup[m]),
            (-ix * mp, &sol.plus[nt]),
        ];
        out.tangential_stress = out.tangential_stress.max(trace_relative(&parts, &[], sol));
        let parts = [(one, &sol.minus[m]), (-one, &sol.plus[m])];
        out.velocity_jump = out.velocity_jump.max(trace_relative(&parts, &[-data.h_hat[m]], sol));
    }
    let parts = [(C64::from(2.0 * mm), &dum[nt]), (-one, &sol.pressure)];
    out.normal_stress_minus = trace_relative(&parts, &[hh * (p.sigma_minus() * a * a)], sol);

    let mut parts = vec![(C64::from(mp + nu), &dup[nt])];
    parts.extend((0..nt).map(|m| (sp.i_xi(m) * (nu - mp), &sol.plus[m])));
    out.normal_stress_plus = trace_relative(&parts, &[hh * (p.sigma_plus() * a * a)], sol);

    let mut parts: Vec<(C64, &Profile)> = (0..nt).map(|m| (sp.i_xi(m), &sol.minus[m])).collect();
    parts.push((one, &dum[nt]));
    out.divergence = trace_relative(&parts, &[], sol);

    if data.mode == Mode::Kinematic {
        let dr = p.density_jump();
        let parts = [(C64::from(-p.rho_minus() / dr), &sol.minus[nt]), (C64::from(p.rho_plus() / dr), &sol.plus[nt])];
        out.kinematic = trace_relative(&parts, &[sp.lambda * hh, -data.d_hat], sol);
    }
    out
}

/// Slowest decay rate of all components, per phase; positive means decaying.
pub fn decay_rates(sol: &ProfileSolution) -> (f64, f64) {
    let plus = sol.plus.iter().map(|f| f.slowest_decay(Phase::Plus)).fold(f64::INFINITY, f64::min);
    let minus = sol
        .minus
        .iter()
        .chain(std::iter::once(&sol.pressure))
        .map(|f| f.slowest_decay(Phase::Minus))
        .fold(f64::INFINITY, f64::min);
    (plus, minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::{assemble_profiles, BoundaryData};
    use crate::symbol::SpectralPoint;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> (FluidParams, ProfileSolution, BoundaryData) {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(-0.4, 1.7), &[0.9, -0.6]).unwrap();
        let data = BoundaryData::explicit(vec![c(0.3, -0.8), c(-1.1, 0.2)], c(0.6, 0.5));
        let sol = assemble_profiles(&p, &sp, &data).unwrap();
        (p, sol, data)
    }

    #[test]
    fn assembled_solution_has_small_residuals() {
        let (p, sol, data) = sample();
        let xs = default_depths(&sol);
        assert!(ode_residual(&p, &sol, &xs) < 1e-10);
        let ir = interface_residual(&p, &sol, &data);
        assert!(ir.max() < 1e-11, "{ir:?}");
        let (dp, dm) = decay_rates(&sol);
        assert!(dp > 0.0 && dm > 0.0);
    }

    #[test]
    fn zero_solution_zero_residual() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(1.0, 0.0), &[1.0]).unwrap();
        let data = BoundaryData::explicit(vec![c(0.0, 0.0)], c(0.0, 0.0));
        let sol = assemble_profiles(&p, &sp, &data).unwrap();
        assert_eq!(ode_residual(&p, &sol, &default_depths(&sol)), 0.0);
        assert_eq!(interface_residual(&p, &sol, &data).max(), 0.0);
    }

    #[test]
    fn perturbed_amplitude_is_detected() {
        let (p, sol, _) = sample();
        let xs = default_depths(&sol);
        let mut bad = sol.clone();
        *bad.amplitude_mut("u+0", 0) *= 1.0 + 1e-3;
        assert!(ode_residual(&p, &bad, &xs) >= 1e-4);
    }
}
