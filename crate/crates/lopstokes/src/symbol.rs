//! Physical parameters, the resolvent sector, characteristic roots and the
//! divided-difference Stokes kernel.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Unvalidated parameter record, as read from a config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub nu_plus: f64,
    pub sigma: f64,
}

impl Default for RawParams {
    /// The reference set used throughout the test-suite.
    fn default() -> Self {
        RawParams {
            rho_plus: 1.0,
            rho_minus: 2.0,
            mu_plus: 1.0,
            mu_minus: 1.0,
            nu_plus: 1.0,
            sigma: 1.0,
        }
    }
}

/// Validated fluid constants. The plus phase is compressible, the minus
/// phase incompressible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluidParams {
    rho_plus: f64,
    rho_minus: f64,
    mu_plus: f64,
    mu_minus: f64,
    nu_plus: f64,
    sigma: f64,
    sigma_plus: f64,
    sigma_minus: f64,
}

pub fn validate_params(raw: &RawParams) -> Result<FluidParams> {
    validate_params_with(raw, &Tolerances::default())
}

pub fn validate_params_with(raw: &RawParams, tol: &Tolerances) -> Result<FluidParams> {
    for (name, value) in [
        ("rho_plus", raw.rho_plus),
        ("rho_minus", raw.rho_minus),
        ("mu_plus", raw.mu_plus),
        ("mu_minus", raw.mu_minus),
        ("nu_plus", raw.nu_plus),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveParameter { name, value });
        }
    }
    if !(raw.sigma >= 0.0 && raw.sigma.is_finite()) {
        return Err(Error::NegativeSurfaceTension(raw.sigma));
    }
    let drho = raw.rho_minus - raw.rho_plus;
    if drho.abs() <= tol.equal_density * raw.rho_plus.max(raw.rho_minus) {
        return Err(Error::EqualDensities(raw.rho_plus));
    }
    Ok(FluidParams {
        rho_plus: raw.rho_plus,
        rho_minus: raw.rho_minus,
        mu_plus: raw.mu_plus,
        mu_minus: raw.mu_minus,
        nu_plus: raw.nu_plus,
        sigma: raw.sigma,
        sigma_plus: raw.rho_plus * raw.sigma / drho,
        sigma_minus: raw.rho_minus * raw.sigma / drho,
    })
}

impl FluidParams {
    pub fn reference() -> Self {
        validate_params(&RawParams::default()).expect("reference parameters are valid")
    }
    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }
    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }
    pub fn mu_plus(&self) -> f64 {
        self.mu_plus
    }
    pub fn mu_minus(&self) -> f64 {
        self.mu_minus
    }
    pub fn nu_plus(&self) -> f64 {
        self.nu_plus
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }
    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }
    /// rho_minus - rho_plus, nonzero by construction.
    pub fn density_jump(&self) -> f64 {
        self.rho_minus - self.rho_plus
    }
    pub fn raw(&self) -> RawParams {
        RawParams {
            rho_plus: self.rho_plus,
            rho_minus: self.rho_minus,
            mu_plus: self.mu_plus,
            mu_minus: self.mu_minus,
            nu_plus: self.nu_plus,
            sigma: self.sigma,
        }
    }
}

/// Sigma_{eps, lambda0}: nonzero lambda with |arg lambda| <= pi - eps and
/// |lambda| > lambda0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sector {
    pub epsilon: f64,
    #[serde(default)]
    pub lambda0: f64,
}

impl Default for Sector {
    fn default() -> Self {
        Sector { epsilon: PI / 4.0, lambda0: 0.0 }
    }
}

impl Sector {
    pub fn new(epsilon: f64, lambda0: f64) -> Result<Self> {
        let s = Sector { epsilon, lambda0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < PI / 2.0) {
            return Err(Error::InvalidSector(self.epsilon));
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return Err(Error::InvalidCutoff(self.lambda0));
        }
        Ok(())
    }

    /// Largest admissible |arg lambda|.
    pub fn max_arg(&self) -> f64 {
        PI - self.epsilon
    }

    pub fn contains(&self, lambda: C64) -> bool {
        sector_contains(self, lambda)
    }
}

pub fn sector_contains(s: &Sector, lambda: C64) -> bool {
    lambda != C64::new(0.0, 0.0)
        && lambda.arg().abs() <= s.max_arg()
        && lambda.norm() > s.lambda0
}

/// Spatial dimension N; the tangential variable has N - 1 components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
    pub fn tangential(self) -> usize {
        self.n() - 1
    }
}

/// One (lambda, xi') sample. Unused tangential slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub lambda: C64,
    xi: [f64; 2],
    a: f64,
    dim: Dim,
}

impl SpectralPoint {
    pub fn new(lambda: C64, xi_prime: &[f64]) -> Result<Self> {
        let (dim, xi) = match *xi_prime {
            [x] => (Dim::Two, [x, 0.0]),
            [x, y] => (Dim::Three, [x, y]),
            _ => return Err(Error::InvalidFrequency),
        };
        let a = xi[0].hypot(xi[1]);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidFrequency);
        }
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(Error::OutOfSector { re: lambda.re, im: lambda.im });
        }
        Ok(SpectralPoint { lambda, xi, a, dim })
    }

    /// Point with |xi'| = a along the unit direction at angle `theta` (N = 3),
    /// or along +xi_1 (N = 2).
    pub fn polar(lambda: C64, a: f64, theta: f64, dim: Dim) -> Result<Self> {
        match dim {
            Dim::Two => Self::new(lambda, &[a]),
            Dim::Three => Self::new(lambda, &[a * theta.cos(), a * theta.sin()]),
        }
    }

    pub fn check_in(&self, s: &Sector) -> Result<()> {
        if s.contains(self.lambda) {
            Ok(())
        } else {
            Err(Error::OutOfSector { re: self.lambda.re, im: self.lambda.im })
        }
    }

    pub fn xi_prime(&self) -> &[f64] {
        &self.xi[..self.dim.tangential()]
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn dim(&self) -> Dim {
        self.dim
    }
    pub fn gamma(&self) -> f64 {
        self.lambda.re
    }
    pub fn tau(&self) -> f64 {
        self.lambda.im
    }
    /// i xi_m / A, the type-2 normalized tangential derivative symbol.
    pub fn i_unit(&self, m: usize) -> C64 {
        C64::new(0.0, self.xi[m] / self.a)
    }
    /// i xi_m.
    pub fn i_xi(&self, m: usize) -> C64 {
        C64::new(0.0, self.xi[m])
    }
    /// (lambda, xi') -> (s^2 lambda, s xi').
    pub fn rescaled(&self, s: f64) -> Self {
        SpectralPoint {
            lambda: self.lambda * (s * s),
            xi: [self.xi[0] * s, self.xi[1] * s],
            a: self.a * s,
            dim: self.dim,
        }
    }
    /// |lambda|^{1/2} + A, the parabolic scale.
    pub fn scale(&self) -> f64 {
        self.lambda.norm().sqrt() + self.a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Roots {
    pub a_plus: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    /// A_- is A itself.
    pub a_minus: C64,
}

pub fn char_roots(p: &FluidParams, sp: &SpectralPoint) -> Result<Roots> {
    let lam = sp.lambda;
    if lam.norm() == 0.0 || (lam.im == 0.0 && lam.re < 0.0) {
        return Err(Error::OutOfSector { re: lam.re, im: lam.im });
    }
    let a2 = sp.a * sp.a;
    let root = |c: f64| (lam * c + a2).sqrt();
    Ok(Roots {
        a_plus: root(p.rho_plus / (p.mu_plus + p.nu_plus)),
        b_plus: root(p.rho_plus / p.mu_plus),
        b_minus: root(p.rho_minus / p.mu_minus),
        a_minus: C64::new(sp.a, 0.0),
    })
}

impl Roots {
    /// B+ - A+ without cancellation.
    pub fn b_plus_minus_a_plus(&self, p: &FluidParams, lambda: C64) -> C64 {
        lambda * (p.rho_plus * p.nu_plus / (p.mu_plus * (p.mu_plus + p.nu_plus)))
            / (self.a_plus + self.b_plus)
    }
    /// B- - A without cancellation.
    pub fn b_minus_minus_a(&self, p: &FluidParams, lambda: C64) -> C64 {
        lambda * (p.rho_minus / p.mu_minus) / (self.b_minus + self.a_minus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Plus,
    Minus,
}

impl Phase {
    /// Whether x_N lies in the closed half-line of this phase.
    pub fn admits(self, x: f64) -> bool {
        match self {
            Phase::Plus => x >= 0.0,
            Phase::Minus => x <= 0.0,
        }
    }
}

/// M+(x) = (e^{-B+ x} - e^{-A+ x})/(B+ - A+) for x >= 0, and
/// M-(x) = (e^{B- x} - e^{A x})/(B- - A) for x <= 0.
pub fn stokes_kernel(r: &Roots, phase: Phase, x: f64) -> Result<C64> {
    stokes_kernel_with(r, phase, x, &Tolerances::default())
}

pub fn stokes_kernel_with(r: &Roots, phase: Phase, x: f64, tol: &Tolerances) -> Result<C64> {
    if !phase.admits(x) {
        return Err(Error::WrongSign(x));
    }
    Ok(match phase {
        Phase::Plus => -divdiff(-r.b_plus, -r.a_plus, x, tol),
        Phase::Minus => divdiff(r.b_minus, r.a_minus, x, tol),
    })
}

/// (e^{px} - e^{qx})/(p - q), continuous through p = q.
///
/// Near-confluent pairs use x e^{qx} sum_n ((p-q)x)^n/(n+1)!; otherwise the
/// difference is formed through a complex expm1 so that small |(p-q)x| does
/// not cancel. Large |(p-q)x| uses the plain quotient, which is then safe.
pub fn divdiff(p: C64, q: C64, x: f64, tol: &Tolerances) -> C64 {
    if x == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let d = p - q;
    let z = d * x;
    if z.norm() > 1.0 {
        return ((p * x).exp() - (q * x).exp()) / d;
    }
    let eq = (q * x).exp();
    if d.norm() < tol.confluent_switch * (p + q).norm() {
        eq * x * phi1_series(z, tol.series_truncation)
    } else {
        eq * expm1(z) / d
    }
}

/// (e^z - 1)/z by its Taylor series; intended for |z| <= 1.
pub fn phi1_series(z: C64, trunc: f64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..60 {
        term = term * z / (n as f64 + 1.0);
        sum += term;
        if term.norm() < trunc * sum.norm() {
            break;
        }
    }
    sum
}

/// e^z - 1 without cancellation for small |z|.
pub fn expm1(z: C64) -> C64 {
    let (a, b) = (z.re, z.im);
    let s = (0.5 * b).sin();
    C64::new(a.exp_m1() * b.cos() - 2.0 * s * s, a.exp() * b.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sigma_split() {
        let p = FluidParams::reference();
        assert_eq!(p.sigma_minus(), 2.0);
        assert_eq!(p.sigma_plus(), 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        let mut raw = RawParams { rho_minus: 1.0, ..RawParams::default() };
        assert!(matches!(validate_params(&raw), Err(Error::EqualDensities(_))));
        raw = RawParams { mu_plus: 0.0, ..RawParams::default() };
        assert!(matches!(
            validate_params(&raw),
            Err(Error::NonPositiveParameter { name: "mu_plus", .. })
        ));
        raw = RawParams { sigma: -1.0, ..RawParams::default() };
        assert!(validate_params(&raw).is_err());
        raw = RawParams { rho_minus: 1.0 + 1e-14, ..RawParams::default() };
        assert!(validate_params(&raw).is_err());
    }

    #[test]
    fn sector_membership() {
        let s = Sector::new(PI / 4.0, 0.0).unwrap();
        assert!(s.contains(c(1.0, 0.0)));
        assert!(!s.contains(c(-1.0, 0.0)));
        assert!(!s.contains(c(0.0, 0.0)));
        let s2 = Sector::new(PI / 4.0, 2.0).unwrap();
        assert!(!s2.contains(c(0.0, 1.0)));
        assert!(Sector::new(1.6, 0.0).is_err());
        assert!(Sector::new(0.0, 0.0).is_err());
    }

    #[test]
    fn roots_examples() {
        let p = validate_params(&RawParams { rho_plus: 2.0, rho_minus: 1.0, ..RawParams::default() })
            .unwrap();
        let sp = SpectralPoint::new(c(3.0, 0.0), &[1.0]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        assert_relative_eq!(r.a_plus.re, 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.b_plus.re, 7f64.sqrt(), max_relative = 1e-15);

        let sp = SpectralPoint::new(c(0.0, 1.0), &[1e-8]).unwrap();
        let r = char_roots(&p, &sp).unwrap();
        assert_relative_eq!(r.b_minus.re, 0.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.b_minus.im, 0.5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn kernel_examples() {
        let r = Roots { a_plus: c(1.0, 0.0), b_plus: c(2.0, 0.0), b_minus: c(2.0, 0.0), a_minus: c(1.0, 0.0) };
        assert_eq!(stokes_kernel(&r, Phase::Plus, 0.0).unwrap(), c(0.0, 0.0));
        let m = stokes_kernel(&r, Phase::Plus, 1.0).unwrap();
        assert_relative_eq!(m.re, (-2f64).exp() - (-1f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.re, -0.2325442, max_relative = 1e-6);
        assert!(matches!(stokes_kernel(&r, Phase::Plus, -1.0), Err(Error::WrongSign(_))));
        assert!(matches!(stokes_kernel(&r, Phase::Minus, 1.0), Err(Error::WrongSign(_))));
    }

    #[test]
    fn confluent_limit() {
        let a = c(1.3, 0.4);
        let r = Roots { a_plus: a, b_plus: a * (1.0 + 1e-9), b_minus: a, a_minus: a };
        let m = stokes_kernel(&r, Phase::Plus, 1.0).unwrap();
        // 50-digit quotient with the same rounded B
        let oracle = c(-0.25101840400490843361, 0.10612887905092931816);
        assert!((m - oracle).norm() / oracle.norm() < 1e-14);
        // the limit itself differs by the first-order term (B - A)/2
        let lim = -(-a).exp();
        assert!((m - lim).norm() / lim.norm() < 1e-9);
    }
}
