//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands, on finite
//! intervals and on half-lines via x = s t / (1 - t).
//!
//! Hand-rolled because the common quadrature crates are real-valued and do
//! not expose a half-line map; this is only used as an independent check of
//! closed-form integrals.

use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::symbol::Phase;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integral of f over [a, b] to relative accuracy `rel` (with an absolute
/// floor of 1e-300).
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, rel: f64) -> Result<C64> {
    integrate_abs(&f, a, b, rel, 1e-300)
}

fn integrate_abs<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, rel: f64, abs: f64) -> Result<C64> {
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    while err > rel * total.norm() && err > abs {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure(err / total.norm().max(1e-300)));
        }
        let p = heap.pop().expect("heap nonempty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
        // recompute to keep cancellation in the running sums from piling up
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.val).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(heap.iter().map(|p| p.val).sum())
}

fn half_line_map<F: Fn(f64) -> C64>(f: &F, sgn: f64, offset: f64, scale: f64) -> impl Fn(f64) -> C64 + '_ {
    move |t| {
        let u = 1.0 - t;
        let x = sgn * (offset + scale * t / u);
        let v = f(x);
        if v == C64::new(0.0, 0.0) {
            v
        } else {
            v * (scale / (u * u))
        }
    }
}

fn sign(phase: Phase) -> f64 {
    match phase {
        Phase::Plus => 1.0,
        Phase::Minus => -1.0,
    }
}

/// Integral over [0, inf) (plus) or (-inf, 0] (minus). `scale` should be the
/// decay length of the integrand.
pub fn integrate_half_line<F: Fn(f64) -> C64>(f: F, phase: Phase, scale: f64, rel: f64) -> Result<C64> {
    integrate(half_line_map(&f, sign(phase), 0.0, scale), 0.0, 1.0, rel)
}

/// Half-line integral for integrands mixing decay lengths from `l_min` to
/// `l_max`, which may be many decades apart. The depth range is cut at
/// dyadic multiples of `l_min`; each piece gets an absolute target derived
/// from a rough integral of |f| so that negligible pieces stay cheap.
pub fn integrate_half_line_multiscale<F: Fn(f64) -> C64>(
    f: F,
    phase: Phase,
    l_min: f64,
    l_max: f64,
    rel: f64,
) -> Result<C64> {
    let sgn = sign(phase);
    let mut cuts = vec![0.0];
    let mut x = l_min;
    while x < 4.0 * l_max {
        cuts.push(x);
        x *= 2.0;
    }
    let last = *cuts.last().expect("nonempty");
    let tail = half_line_map(&f, sgn, last, l_max);
    let g = |x: f64| f(sgn * x);
    let rough: f64 = cuts
        .windows(2)
        .map(|w| integrate_abs(&|x| C64::from(g(x).norm()), w[0], w[1], 1e-3, 1e-300))
        .chain(std::iter::once(integrate_abs(&|t| C64::from(tail(t).norm()), 0.0, 1.0, 1e-3, 1e-300)))
        .map(|r| r.map(|v| v.re))
        .sum::<Result<f64>>()?;
    let abs = (rel * rough / (cuts.len() as f64)).max(1e-300);
    let mut total = integrate_abs(&tail, 0.0, 1.0, rel, abs)?;
    for w in cuts.windows(2) {
        total += integrate_abs(&g, w[0], w[1], rel, abs)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| C64::new(x * x * x, x), 0.0, 2.0, 1e-14).unwrap();
        assert!((v - C64::new(4.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn half_line_exponential() {
        let s = C64::new(-2.0, 3.0);
        let v = integrate_half_line(|x| (s * x).exp(), Phase::Plus, 0.5, 1e-12).unwrap();
        assert!((v + 1.0 / s).norm() < 1e-12);
        let v = integrate_half_line(|x| (-s * x).exp(), Phase::Minus, 0.5, 1e-12).unwrap();
        assert!((v - 1.0 / (-s)).norm() < 1e-12);
    }

    #[test]
    fn widely_separated_scales() {
        let (s1, s2) = (C64::new(-1e4, 2e4), C64::new(-1e-3, 0.0));
        let exact = -1.0 / s1 - 1.0 / s2;
        let v = integrate_half_line_multiscale(|x| (s1 * x).exp() + (s2 * x).exp(), Phase::Plus, 1e-4, 1e3, 1e-12)
            .unwrap();
        assert!((v - exact).norm() < 1e-11 * exact.norm());
        let v = integrate_half_line_multiscale(|x| (-s1 * x).exp(), Phase::Minus, 1e-4, 1e3, 1e-12).unwrap();
        assert!((v - 1.0 / (-s1)).norm() < 1e-11 / s1.norm());
    }
}
