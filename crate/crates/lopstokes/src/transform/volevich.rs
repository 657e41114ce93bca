//! Volevich form of a boundary-trace operator. For a symbol a(xi', x_N)
//! decaying away from the interface,
//!
//!   a(x) h(0) = -int_0^{+-inf} d/dy [a(x + y) h(y)] dy,
//!
//! and splitting 1 = rho lambda / (mu B^2) - sum_k (i xi_k)^2 / B^2 rewrites
//! the right side through f3 = lambda h, f4 = lambda^1/2 grad h and
//! f5 = grad^2 h only. This module evaluates that form by quadrature as an
//! independent check on the direct trace formula; the solver never uses it.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{max_abs, TangentialGrid, Transformer};
use crate::error::Result;
use crate::profile::Profile;
use crate::quadrature::integrate_half_line_multiscale;
use crate::resolvent::{assemble_profiles, BoundaryData};
use crate::symbol::{char_roots, FluidParams, Phase, SpectralPoint};
use crate::tolerances::Tolerances;

/// A symbol a(xi', x_N) given per mode as an exponential profile in x_N.
pub trait TraceSymbol: Sync {
    fn profile(&self, sp: &SpectralPoint) -> Result<Profile>;
}

impl<F: Fn(&SpectralPoint) -> Result<Profile> + Sync> TraceSymbol for F {
    fn profile(&self, sp: &SpectralPoint) -> Result<Profile> {
        self(sp)
    }
}

/// Coefficient of h_m(0) in u+-_J (H = 0), taken from the assembled solution.
pub struct SolutionSymbol {
    pub params: FluidParams,
    pub phase: Phase,
    pub component: usize,
    pub datum: usize,
}

impl TraceSymbol for SolutionSymbol {
    fn profile(&self, sp: &SpectralPoint) -> Result<Profile> {
        let mut h = vec![C64::new(0.0, 0.0); sp.dim().tangential()];
        h[self.datum] = C64::new(1.0, 0.0);
        let sol = assemble_profiles(&self.params, sp, &BoundaryData::explicit(h, C64::new(0.0, 0.0)))?;
        Ok(match self.phase {
            Phase::Plus => sol.plus[self.component].clone(),
            Phase::Minus => sol.minus[self.component].clone(),
        })
    }
}

fn phase_constants(p: &FluidParams, phase: Phase) -> (f64, f64) {
    match phase {
        Phase::Plus => (p.rho_plus(), p.mu_plus()),
        Phase::Minus => (p.rho_minus(), p.mu_minus()),
    }
}

fn b_root(p: &FluidParams, sp: &SpectralPoint, phase: Phase) -> Result<C64> {
    let r = char_roots(p, sp)?;
    Ok(match phase {
        Phase::Plus => r.b_plus,
        Phase::Minus => r.b_minus,
    })
}

/// |rho lambda / (mu B^2) - sum_k (i xi_k)^2 / B^2 - 1|.
pub fn identity_residual(p: &FluidParams, sp: &SpectralPoint, phase: Phase) -> Result<f64> {
    let (rho, mu) = phase_constants(p, phase);
    let b2 = b_root(p, sp, phase)?.powi(2);
    let s: C64 = (0..sp.dim().tangential()).map(|k| sp.i_xi(k) * sp.i_xi(k)).sum();
    Ok((sp.lambda * rho / (b2 * mu) - s / b2 - 1.0).norm())
}

/// Data h(x', y) = g(x') phi(y) on the phase's half-space.
pub struct SeparableData<'a> {
    pub g: &'a [C64],
    pub phi: &'a Profile,
}

/// A_1[a](f3, f4, f5) at depth x (on the phase's side), by adaptive quadrature.
#[allow(clippy::too_many_arguments)]
pub fn volevich_apply(
    p: &FluidParams,
    lambda: C64,
    grid: &TangentialGrid,
    data: &SeparableData,
    symbol: &dyn TraceSymbol,
    phase: Phase,
    x: f64,
    tol: &Tolerances,
) -> Result<Vec<C64>> {
    let t = Transformer::new(grid)?;
    let gh = t.forward(data.g);
    let (rho, mu) = phase_constants(p, phase);
    let sqrt_lam = lambda.sqrt();
    let dphi = data.phi.derivative();
    let coeffs: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || gh[k] == C64::new(0.0, 0.0) {
                return Ok(C64::new(0.0, 0.0));
            }
            let sp = SpectralPoint::new(lambda, &grid.frequency(k))?;
            let b2 = b_root(p, &sp, phase)?.powi(2);
            let a = symbol.profile(&sp)?;
            let da = a.derivative();
            let nt = sp.dim().tangential();
            let g = gh[k];
            let integrand = |y: f64| {
                let (ph, dph) = (data.phi.eval(y, tol), dphi.eval(y, tol));
                let f3 = lambda * g * ph;
                let f4n = sqrt_lam * g * dph;
                let mut first = f4n * sqrt_lam * rho / (b2 * mu);
                let mut second = f3 * rho / (b2 * mu);
                for m in 0..nt {
                    let f5mn = sp.i_xi(m) * g * dph;
                    let f5mm = sp.i_xi(m) * sp.i_xi(m) * g * ph;
                    first -= sp.i_xi(m) * f5mn / b2;
                    second -= f5mm / b2;
                }
                a.eval(x + y, tol) * first + da.eval(x + y, tol) * second
            };
            let rates = a.terms.iter().chain(&data.phi.terms).flat_map(|t| t.basis.rates()).map(|r| r.re.abs());
            let (lo, hi) = rates.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
            let v = integrate_half_line_multiscale(integrand, phase, 1.0 / hi, 1.0 / lo, tol.quadrature_rel)?;
            Ok(match phase {
                Phase::Plus => -v,
                Phase::Minus => v,
            })
        })
        .collect::<Result<_>>()?;
    Ok(t.inverse(&coeffs))
}

/// F^{-1}[a(xi', x) g_hat(xi') phi(0)], the production formula.
pub fn direct_trace(
    lambda: C64,
    grid: &TangentialGrid,
    data: &SeparableData,
    symbol: &dyn TraceSymbol,
    x: f64,
    tol: &Tolerances,
) -> Result<Vec<C64>> {
    let t = Transformer::new(grid)?;
    let gh = t.forward(data.g);
    let phi0 = data.phi.eval(0.0, tol);
    let coeffs: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || gh[k] == C64::new(0.0, 0.0) {
                return Ok(C64::new(0.0, 0.0));
            }
            let sp = SpectralPoint::new(lambda, &grid.frequency(k))?;
            Ok(symbol.profile(&sp)?.eval(x, tol) * gh[k] * phi0)
        })
        .collect::<Result<_>>()?;
    Ok(t.inverse(&coeffs))
}

/// max |Volevich - direct| / max |direct| (absolute when the trace vanishes).
pub fn volevich_deviation(
    p: &FluidParams,
    lambda: C64,
    grid: &TangentialGrid,
    data: &SeparableData,
    symbol: &dyn TraceSymbol,
    phase: Phase,
    x: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let v = volevich_apply(p, lambda, grid, data, symbol, phase, x, tol)?;
    let d = direct_trace(lambda, grid, data, symbol, x, tol)?;
    let diff = v.iter().zip(&d).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let s = max_abs(&d);
    Ok(if s > 0.0 { diff / s } else { diff })
}

/// Mean-free smooth test data on the grid.
pub fn test_field(grid: &TangentialGrid) -> Vec<C64> {
    (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let mut v = C64::new(0.0, 0.0);
            for (a, (&xa, &l)) in x.iter().zip(&grid.box_lengths).enumerate() {
                let th = 2.0 * std::f64::consts::PI * xa / l;
                v += C64::new(th.cos(), 0.5 * (2.0 * th).sin()) * (1.0 + a as f64) + C64::new(0.0, 0.3 * (3.0 * th).cos());
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_decomposition() {
        let p = FluidParams::reference();
        let sp = SpectralPoint::new(c(-1.0, 3.0), &[0.7, -2.0]).unwrap();
        for ph in [Phase::Plus, Phase::Minus] {
            assert!(identity_residual(&p, &sp, ph).unwrap() < 1e-14);
        }
    }

    #[test]
    fn exponential_symbol_matches_trace() {
        let p = FluidParams::reference();
        let tol = Tolerances::default();
        let lam = c(1.5, 2.0);
        let grid = TangentialGrid::new(vec![5.0], vec![16]).unwrap();
        let g = test_field(&grid);
        let phi = Profile::exp(c(1.0, 0.0), c(-1.0, 0.0));
        let sym = |sp: &SpectralPoint| -> Result<Profile> {
            let r = char_roots(&p, sp)?;
            let t_plus = -r.b_minus * p.mu_minus() / (r.b_plus * p.mu_plus() + r.b_minus * p.mu_minus());
            Ok(Profile::exp(t_plus, -r.b_plus))
        };
        let data = SeparableData { g: &g, phi: &phi };
        let d = volevich_deviation(&p, lam, &grid, &data, &sym, Phase::Plus, 0.3, &tol).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn solution_symbol_matches_trace_minus_side() {
        let p = FluidParams::reference();
        let tol = Tolerances::default();
        let grid = TangentialGrid::new(vec![4.0, 6.0], vec![16, 16]).unwrap();
        let g = test_field(&grid);
        let phi = Profile::exp(c(1.0, 0.0), c(2.0, 0.5));
        let sym = SolutionSymbol { params: p, phase: Phase::Minus, component: 2, datum: 0 };
        let data = SeparableData { g: &g, phi: &phi };
        let d = volevich_deviation(&p, c(0.5, -1.0), &grid, &data, &sym, Phase::Minus, -0.2, &tol).unwrap();
        assert!(d < 1e-8, "{d}");
    }
}
