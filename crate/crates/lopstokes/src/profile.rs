//! Exact x_N-profiles as finite sums of exponentials and divided-difference
//! kernels. Derivatives stay in the same span, and every pairing integral over
//! a half-line has a closed form.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::symbol::{divdiff, Phase};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Basis {
    /// e^{r x}
    Exp(C64),
    /// (e^{p x} - e^{q x}) / (p - q), evaluated stably through p = q.
    DivDiff(C64, C64),
}

impl Basis {
    pub fn eval(&self, x: f64, tol: &Tolerances) -> C64 {
        match *self {
            Basis::Exp(r) => (r * x).exp(),
            Basis::DivDiff(p, q) => divdiff(p, q, x, tol),
        }
    }

    /// Exponents occurring in this basis function.
    pub fn rates(&self) -> [C64; 2] {
        match *self {
            Basis::Exp(r) => [r, r],
            Basis::DivDiff(p, q) => [p, q],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub amp: C64,
    pub basis: Basis,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Profile {
    pub terms: Vec<Term>,
}

impl Profile {
    pub fn zero() -> Self {
        Profile { terms: Vec::new() }
    }

    pub fn exp(amp: C64, r: C64) -> Self {
        Profile { terms: vec![Term { amp, basis: Basis::Exp(r) }] }
    }

    pub fn push(&mut self, amp: C64, basis: Basis) {
        self.terms.push(Term { amp, basis });
    }

    pub fn eval(&self, x: f64, tol: &Tolerances) -> C64 {
        self.terms.iter().map(|t| t.amp * t.basis.eval(x, tol)).sum()
    }

    /// Value together with the largest single-term magnitude, the natural
    /// yardstick for cancellation in residuals.
    pub fn eval_with_magnitude(&self, x: f64, tol: &Tolerances) -> (C64, f64) {
        let mut v = C64::new(0.0, 0.0);
        let mut m: f64 = 0.0;
        for t in &self.terms {
            let tv = t.amp * t.basis.eval(x, tol);
            v += tv;
            m = m.max(tv.norm());
        }
        (v, m)
    }

    /// d/dx. Uses D e^{rx} = r e^{rx} and D DivDiff(p,q) = q DivDiff(p,q) + e^{px}.
    pub fn derivative(&self) -> Self {
        let mut out = Profile { terms: Vec::with_capacity(2 * self.terms.len()) };
        for t in &self.terms {
            match t.basis {
                Basis::Exp(r) => out.push(t.amp * r, t.basis),
                Basis::DivDiff(p, q) => {
                    out.push(t.amp * q, t.basis);
                    out.push(t.amp, Basis::Exp(p));
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        Profile { terms: self.terms.iter().map(|t| Term { amp: t.amp * c, basis: t.basis }).collect() }
    }

    pub fn plus(&self, other: &Profile) -> Self {
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        out
    }

    /// Linear combination sum_k c_k f_k.
    pub fn combination(parts: &[(C64, &Profile)]) -> Self {
        let mut out = Profile::zero();
        for (c, f) in parts {
            out.terms.extend(f.terms.iter().map(|t| Term { amp: t.amp * c, basis: t.basis }));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amp == C64::new(0.0, 0.0))
    }

    /// Largest real part of any exponent (plus side) or smallest (minus side),
    /// i.e. the slowest decay rate toward infinity.
    pub fn slowest_decay(&self, phase: Phase) -> f64 {
        let rates = self.terms.iter().flat_map(|t| t.basis.rates());
        match phase {
            Phase::Plus => rates.map(|r| -r.re).fold(f64::INFINITY, f64::min),
            Phase::Minus => rates.map(|r| r.re).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Closed-form integral over the phase's half-line of f(x) conj(g(x)) for
/// two basis functions, each decaying toward infinity.
pub fn basis_inner(f: &Basis, g: &Basis, phase: Phase) -> C64 {
    // int_0^inf e^{sx} = -1/s ; int_{-inf}^0 e^{sx} = 1/s
    let c = match phase {
        Phase::Plus => -1.0,
        Phase::Minus => 1.0,
    };
    match (*f, *g) {
        (Basis::Exp(r), Basis::Exp(t)) => c / (r + t.conj()),
        (Basis::DivDiff(p, q), Basis::Exp(t)) => {
            let t = t.conj();
            -c / ((p + t) * (q + t))
        }
        (Basis::Exp(r), Basis::DivDiff(t, u)) => {
            let (t, u) = (t.conj(), u.conj());
            -c / ((t + r) * (u + r))
        }
        (Basis::DivDiff(p, q), Basis::DivDiff(t, u)) => {
            let (t, u) = (t.conj(), u.conj());
            (p + q + t + u) * c / ((p + t) * (p + u) * (q + t) * (q + u))
        }
    }
}

/// int f conj(g) over the phase's half-line.
pub fn inner(f: &Profile, g: &Profile, phase: Phase) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for a in &f.terms {
        for b in &g.terms {
            s += a.amp * b.amp.conj() * basis_inner(&a.basis, &b.basis, phase);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_half_line;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let tol = Tolerances::default();
        let mut f = Profile::zero();
        f.push(c(0.7, -0.2), Basis::DivDiff(c(-2.0, 0.5), c(-1.1, -0.3)));
        f.push(c(-0.4, 1.0), Basis::Exp(c(-0.8, 2.0)));
        let df = f.derivative();
        let x = 0.9;
        let h = 1e-5;
        let fd = (f.eval(x + h, &tol) - f.eval(x - h, &tol)) / (2.0 * h);
        assert!((fd - df.eval(x, &tol)).norm() < 1e-9);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let tol = Tolerances::default();
        let plus = [
            Basis::Exp(c(-1.2, 0.7)),
            Basis::DivDiff(c(-2.0, 0.5), c(-1.1, -0.3)),
            Basis::DivDiff(c(-0.9, -1.5), c(-0.9 * (1.0 + 1e-7), -1.5)),
        ];
        let minus = plus.map(|b| match b {
            Basis::Exp(r) => Basis::Exp(-r),
            Basis::DivDiff(p, q) => Basis::DivDiff(-p, -q),
        });
        for (phase, set) in [(Phase::Plus, plus), (Phase::Minus, minus)] {
            for f in &set {
                for g in &set {
                    let closed = basis_inner(f, g, phase);
                    let num = integrate_half_line(
                        |x| f.eval(x, &tol) * g.eval(x, &tol).conj(),
                        phase,
                        1.0,
                        1e-12,
                    )
                    .unwrap();
                    assert!((closed - num).norm() < 1e-10 * closed.norm(), "{f:?} {g:?} {phase:?}");
                }
            }
        }
    }
}
