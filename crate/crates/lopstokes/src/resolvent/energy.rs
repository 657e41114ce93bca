//! Integrated energy identity, per phase. Testing the momentum equation
//! against conj(u) and integrating by parts in x_N gives
//!
//!   rho lambda |u|^2 + sum_JK int S_JK conj(G_JK) +- sum_J S_JN(0) conj(u_J(0)) = 0
//!
//! with G_Jk = i xi_k u_J, G_JN = D u_J, the upper sign on the plus side.
//! Plus stress is mu (G + G^T) + (nu - mu) div I, minus stress is
//! mu (G + G^T) - pi I. Every integral is evaluated in closed form.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::ProfileSolution;
use crate::error::Result;
use crate::profile::{inner, Profile};
use crate::quadrature::integrate_half_line_multiscale;
use crate::symbol::{FluidParams, Phase};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PhaseEnergy {
    pub inertia: C64,
    pub dissipation: C64,
    pub flux: C64,
    /// |inertia + dissipation + flux| / max of the three magnitudes.
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBalance {
    pub plus: PhaseEnergy,
    pub minus: PhaseEnergy,
}

impl EnergyBalance {
    pub fn defect(&self) -> f64 {
        self.plus.defect.max(self.minus.defect)
    }
}

/// Gradient and stress profiles for one phase, indexed [J][K].
struct Fields {
    phase: Phase,
    w: Vec<Profile>,
    g: Vec<Vec<Profile>>,
    s: Vec<Vec<Profile>>,
    rho: f64,
}

fn fields(p: &FluidParams, sol: &ProfileSolution, phase: Phase) -> Fields {
    let sp = &sol.sp;
    let n = sol.n();
    let nt = n - 1;
    let (w, mu, rho) = match phase {
        Phase::Plus => (&sol.plus, p.mu_plus(), p.rho_plus()),
        Phase::Minus => (&sol.minus, p.mu_minus(), p.rho_minus()),
    };
    let g: Vec<Vec<Profile>> = w
        .iter()
        .map(|wj| (0..n).map(|k| if k < nt { wj.scaled(sp.i_xi(k)) } else { wj.derivative() }).collect())
        .collect();
    let div = Profile::combination(&(0..n).map(|k| (C64::new(1.0, 0.0), &g[k][k])).collect::<Vec<_>>());
    let iso = match phase {
        Phase::Plus => div.scaled(C64::from(p.nu_plus() - mu)),
        Phase::Minus => sol.pressure.scaled(C64::from(-1.0)),
    };
    let m = C64::from(mu);
    let s = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let sym = Profile::combination(&[(m, &g[j][k]), (m, &g[k][j])]);
                    if j == k {
                        sym.plus(&iso)
                    } else {
                        sym
                    }
                })
                .collect()
        })
        .collect();
    Fields { phase, w: w.clone(), g, s, rho }
}

fn phase_energy(lambda: C64, f: &Fields, sol: &ProfileSolution) -> PhaseEnergy {
    let n = f.w.len();
    let inertia: C64 = f.w.iter().map(|wj| inner(wj, wj, f.phase)).sum::<C64>() * (lambda * f.rho);
    let mut dissipation = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            dissipation += inner(&f.s[j][k], &f.g[j][k], f.phase);
        }
    }
    let sgn = match f.phase {
        Phase::Plus => 1.0,
        Phase::Minus => -1.0,
    };
    let flux: C64 =
        (0..n).map(|j| f.s[j][n - 1].eval(0.0, &sol.tol) * f.w[j].eval(0.0, &sol.tol).conj()).sum::<C64>() * sgn;
    let scale = inertia.norm().max(dissipation.norm()).max(flux.norm());
    let defect = if scale > 0.0 { (inertia + dissipation + flux).norm() / scale } else { 0.0 };
    PhaseEnergy { inertia, dissipation, flux, defect }
}

pub fn energy_balance(p: &FluidParams, sol: &ProfileSolution) -> EnergyBalance {
    let lam = sol.sp.lambda;
    EnergyBalance {
        plus: phase_energy(lam, &fields(p, sol, Phase::Plus), sol),
        minus: phase_energy(lam, &fields(p, sol, Phase::Minus), sol),
    }
}

/// Slowest and fastest decay rate over all exponents of f and g.
fn decay_range(f: &Profile, g: &Profile) -> (f64, f64) {
    let rates: Vec<f64> =
        f.terms.iter().chain(g.terms.iter()).flat_map(|t| t.basis.rates()).map(|r| r.re.abs()).collect();
    let slow = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let fast = rates.iter().copied().fold(0.0, f64::max);
    (slow, fast)
}

/// Largest disagreement between closed-form and adaptive-quadrature values of
/// the individual integrals entering the identity, each measured against the
/// Cauchy-Schwarz bound sqrt(int|f|^2 int|g|^2).
pub fn quadrature_cross_check(p: &FluidParams, sol: &ProfileSolution, rel: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for phase in [Phase::Plus, Phase::Minus] {
        let f = fields(p, sol, phase);
        let n = f.w.len();
        let mut pairs: Vec<(&Profile, &Profile)> = f.w.iter().map(|w| (w, w)).collect();
        for j in 0..n {
            for k in 0..n {
                pairs.push((&f.s[j][k], &f.g[j][k]));
            }
        }
        for (a, b) in pairs {
            let bound = (inner(a, a, phase).norm() * inner(b, b, phase).norm()).sqrt();
            if bound == 0.0 {
                continue;
            }
            let (slow, fast) = decay_range(a, b);
            let num = integrate_half_line_multiscale(
                |x| a.eval(x, &sol.tol) * b.eval(x, &sol.tol).conj(),
                phase,
                1.0 / fast,
                1.0 / slow,
                rel,
            )?;
            worst = worst.max((num - inner(a, b, phase)).norm() / bound);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::{assemble_profiles, BoundaryData};
    use crate::symbol::SpectralPoint;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_holds_and_integrals_match_quadrature() {
        let p = FluidParams::reference();
        for (lam, xi) in [(c(0.7, -2.0), vec![0.4, 1.1]), (c(-3.0, 4.0), vec![2.5])] {
            let sp = SpectralPoint::new(lam, &xi).unwrap();
            let nt = xi.len();
            let h: Vec<C64> = (0..nt).map(|m| c(1.0 - m as f64, 0.5)).collect();
            let sol = assemble_profiles(&p, &sp, &BoundaryData::explicit(h, c(-0.3, 0.8))).unwrap();
            let e = energy_balance(&p, &sol);
            assert!(e.defect() < 1e-10, "{e:?}");
            assert!(quadrature_cross_check(&p, &sol, 1e-11).unwrap() < 1e-8);
        }
    }

    #[test]
    fn zero_solution_has_zero_defect() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(2.0, 0.0), &[1.0]).unwrap();
        let sol = assemble_profiles(&p, &sp, &BoundaryData::explicit(vec![c(0.0, 0.0)], c(0.0, 0.0))).unwrap();
        let e = energy_balance(&p, &sol);
        assert_eq!(e.defect(), 0.0);
        // homogeneous data at real positive lambda: the solver returns zero betas
        assert_eq!(sol.amplitudes.beta_plus.n, c(0.0, 0.0));
        assert_eq!(sol.amplitudes.beta_minus.n, c(0.0, 0.0));
    }
}
