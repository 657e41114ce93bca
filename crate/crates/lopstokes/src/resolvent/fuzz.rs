//! Randomized closure test of the whole spectral solve. Sample k draws from
//! its own ChaCha8 stream, so results do not depend on thread scheduling.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{energy_balance, quadrature_cross_check};
use super::residual::{default_depths, interface_residual, ode_residual};
use super::{assemble_with, BoundaryData, Mode, Route};
use crate::error::{Error, Result};
use crate::lopatinski::assemble_with_roots;
use crate::symbol::{char_roots, Dim, FluidParams, Sector, SpectralPoint};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzConfig {
    pub seed: u64,
    pub samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// The first `quadrature_samples` samples also cross-check every energy
    /// integral against adaptive quadrature.
    pub quadrature_samples: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 20240521,
            samples: 10_000,
            lambda_min: 1e-4,
            lambda_max: 1e8,
            a_min: 1e-4,
            a_max: 1e8,
            quadrature_samples: 64,
        }
    }
}

/// Deliberate defects for checking that the suites can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of L+12 before solving.
    FlipLopatinskiSign,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzPoint {
    pub index: usize,
    pub lambda: [f64; 2],
    pub xi: Vec<f64>,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Worst {
    pub value: f64,
    pub limit: f64,
    pub point: Option<FuzzPoint>,
}

impl Worst {
    fn new(limit: f64) -> Self {
        Worst { value: 0.0, limit, point: None }
    }
    fn update(&mut self, v: f64, pt: &FuzzPoint) {
        // NaN counts as worst
        if !(v <= self.value) {
            self.value = v;
            self.point = Some(pt.clone());
        }
    }
    pub fn passed(&self) -> bool {
        self.value < self.limit
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub n_samples: usize,
    pub n_kinematic: usize,
    pub n_quadrature: usize,
    /// Samples that could not be solved (singular L or lambda + K).
    pub failures: Vec<(usize, String)>,
    pub ode: Worst,
    pub tangential_stress: Worst,
    pub normal_stress_minus: Worst,
    pub normal_stress_plus: Worst,
    pub velocity_jump: Worst,
    pub divergence: Worst,
    pub kinematic: Worst,
    pub energy: Worst,
    pub quadrature: Worst,
}

impl FuzzReport {
    pub fn categories(&self) -> [(&'static str, &Worst); 9] {
        [
            ("ode", &self.ode),
            ("tangential_stress", &self.tangential_stress),
            ("normal_stress_minus", &self.normal_stress_minus),
            ("normal_stress_plus", &self.normal_stress_plus),
            ("velocity_jump", &self.velocity_jump),
            ("divergence", &self.divergence),
            ("kinematic", &self.kinematic),
            ("energy", &self.energy),
            ("quadrature", &self.quadrature),
        ]
    }
    pub fn residuals_passed(&self) -> bool {
        self.failures.is_empty() && self.categories()[..7].iter().all(|(_, w)| w.passed())
    }
    pub fn energy_passed(&self) -> bool {
        self.failures.is_empty() && self.energy.passed() && self.quadrature.passed()
    }
    pub fn interface_passed(&self) -> bool {
        self.categories()[1..7].iter().all(|(_, w)| w.passed())
    }
}

fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..=hi.log10()))
}

/// Sample k of the corpus.
pub fn draw(cfg: &FuzzConfig, sector: &Sector, k: usize) -> (SpectralPoint, BoundaryData) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k as u64);
    let mag = log_uniform(&mut rng, cfg.lambda_min, cfg.lambda_max);
    let amax = sector.max_arg();
    let arg = rng.gen_range(-amax..=amax);
    let a = log_uniform(&mut rng, cfg.a_min, cfg.a_max);
    let dim = if rng.gen_bool(0.5) { Dim::Two } else { Dim::Three };
    let theta = rng.gen_range(0.0..2.0 * PI);
    let sp = SpectralPoint::polar(C64::from_polar(mag, arg), a, theta, dim).expect("positive magnitudes");
    let h: Vec<C64> = (0..dim.tangential()).map(|_| cn(&mut rng)).collect();
    let (hh, d) = (cn(&mut rng), cn(&mut rng));
    let data = if rng.gen_bool(0.5) { BoundaryData::explicit(h, hh) } else { BoundaryData::kinematic(h, d) };
    (sp, data)
}

struct SampleResult {
    point: FuzzPoint,
    ode: f64,
    iface: super::residual::InterfaceResidual,
    energy: f64,
    quad: Option<f64>,
}

fn run_sample(
    p: &FluidParams,
    cfg: &FuzzConfig,
    sector: &Sector,
    tol: &Tolerances,
    fault: Fault,
    k: usize,
) -> Result<SampleResult> {
    let (sp, data) = draw(cfg, sector, k);
    let r = char_roots(p, &sp)?;
    let mut l = assemble_with_roots(p, &sp, &r, tol)?;
    if fault == Fault::FlipLopatinskiSign {
        l = l.with_scaled_entry(true, 1, C64::new(-1.0, 0.0));
    }
    let sol = assemble_with(p, &sp, &r, &l, &data, Route::Symbols, tol)?;
    let quad = if k < cfg.quadrature_samples { Some(quadrature_cross_check(p, &sol, tol.quadrature_rel)?) } else { None };
    Ok(SampleResult {
        point: FuzzPoint { index: k, lambda: [sp.lambda.re, sp.lambda.im], xi: sp.xi_prime().to_vec(), mode: data.mode },
        ode: ode_residual(p, &sol, &default_depths(&sol)),
        iface: interface_residual(p, &sol, &data),
        energy: energy_balance(p, &sol).defect(),
        quad,
    })
}

pub fn run_fuzz(p: &FluidParams, sector: &Sector, cfg: &FuzzConfig, tol: &Tolerances) -> FuzzReport {
    run_fuzz_with(p, sector, cfg, tol, Fault::None)
}

pub fn run_fuzz_with(p: &FluidParams, sector: &Sector, cfg: &FuzzConfig, tol: &Tolerances, fault: Fault) -> FuzzReport {
    let results: Vec<Result<SampleResult>> =
        (0..cfg.samples).into_par_iter().map(|k| run_sample(p, cfg, sector, tol, fault, k)).collect();

    let lim = tol.fuzz_residual;
    let mut rep = FuzzReport {
        seed: cfg.seed,
        n_samples: cfg.samples,
        n_kinematic: 0,
        n_quadrature: 0,
        failures: Vec::new(),
        ode: Worst::new(lim),
        tangential_stress: Worst::new(lim),
        normal_stress_minus: Worst::new(lim),
        normal_stress_plus: Worst::new(lim),
        velocity_jump: Worst::new(lim),
        divergence: Worst::new(lim),
        kinematic: Worst::new(lim),
        energy: Worst::new(tol.energy_defect),
        quadrature: Worst::new(tol.quadrature_vs_closed),
    };
    for (k, res) in results.into_iter().enumerate() {
        let s = match res {
            Ok(s) => s,
            Err(e) => {
                rep.failures.push((k, e.to_string()));
                continue;
            }
        };
        let pt = &s.point;
        if pt.mode == Mode::Kinematic {
            rep.n_kinematic += 1;
        }
        rep.ode.update(s.ode, pt);
        rep.tangential_stress.update(s.iface.tangential_stress, pt);
        rep.normal_stress_minus.update(s.iface.normal_stress_minus, pt);
        rep.normal_stress_plus.update(s.iface.normal_stress_plus, pt);
        rep.velocity_jump.update(s.iface.velocity_jump, pt);
        rep.divergence.update(s.iface.divergence, pt);
        rep.kinematic.update(s.iface.kinematic, pt);
        rep.energy.update(s.energy, pt);
        if let Some(q) = s.quad {
            rep.n_quadrature += 1;
            rep.quadrature.update(q, pt);
        }
    }
    rep
}

/// Convenience for callers that want an error on any failed category.
pub fn require_pass(rep: &FuzzReport) -> Result<()> {
    match rep.categories().iter().find(|(_, w)| !w.passed()) {
        None if rep.failures.is_empty() => Ok(()),
        None => Err(Error::Io(format!("{} samples could not be solved", rep.failures.len()))),
        Some((name, w)) => Err(Error::Io(format!("{name}: worst {:e} exceeds {:e}", w.value, w.limit))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes_and_is_deterministic() {
        let p = FluidParams::reference();
        let cfg = FuzzConfig { samples: 200, quadrature_samples: 4, ..Default::default() };
        let tol = Tolerances::default();
        let a = run_fuzz(&p, &Sector::default(), &cfg, &tol);
        assert!(require_pass(&a).is_ok(), "{:#?}", a);
        let b = run_fuzz(&p, &Sector::default(), &cfg, &tol);
        assert_eq!(a, b);
        assert!(a.n_kinematic > 50 && a.n_kinematic < 150);
    }

    #[test]
    fn sign_flip_is_caught() {
        let p = FluidParams::reference();
        let cfg = FuzzConfig { samples: 50, quadrature_samples: 0, ..Default::default() };
        let rep = run_fuzz_with(&p, &Sector::default(), &cfg, &Tolerances::default(), Fault::FlipLopatinskiSign);
        assert!(!rep.interface_passed());
    }
}
