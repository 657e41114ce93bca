//! Mutation probes: the residual checks must notice a small error in any
//! single amplitude of the solution or in any single entry of L.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::energy::energy_balance;
use super::residual::{default_depths, interface_residual, ode_residual};
use super::{assemble_with, BoundaryData, ProfileSolution, Route};
use crate::error::Result;
use crate::lopatinski::assemble_with_roots;
use crate::symbol::{char_roots, FluidParams, SpectralPoint};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub target: String,
    /// Largest of the ODE, interface and energy residuals after mutation.
    pub response: f64,
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MutationReport {
    pub size: f64,
    pub threshold: f64,
    pub probes: Vec<Probe>,
}

impl MutationReport {
    pub fn all_detected(&self) -> bool {
        !self.probes.is_empty() && self.probes.iter().all(|p| p.detected)
    }
}

pub fn worst_residual(p: &FluidParams, sol: &ProfileSolution, data: &BoundaryData) -> f64 {
    ode_residual(p, sol, &default_depths(sol))
        .max(interface_residual(p, sol, data).max())
        .max(energy_balance(p, sol).defect())
}

fn probe_point(
    p: &FluidParams,
    sp: &SpectralPoint,
    data: &BoundaryData,
    tol: &Tolerances,
) -> Result<Vec<(String, f64)>> {
    let factor = C64::new(1.0 + tol.mutation_size, 0.0);
    let r = char_roots(p, sp)?;
    let l = assemble_with_roots(p, sp, &r, tol)?;
    let base = assemble_with(p, sp, &r, &l, data, Route::Symbols, tol)?;
    let mut out = Vec::new();
    for (label, k) in base.amplitude_slots() {
        let mut m = base.clone();
        *m.amplitude_mut(&label, k) *= factor;
        out.push((format!("amplitude {label}[{k}]"), worst_residual(p, &m, data)));
    }
    for (plus, side) in [(true, "L+"), (false, "L-")] {
        for (idx, name) in ["11", "12", "21", "22"].iter().enumerate() {
            let lm = l.with_scaled_entry(plus, idx, factor);
            let sol = assemble_with(p, sp, &r, &lm, data, Route::Symbols, tol)?;
            out.push((format!("{side}{name}"), worst_residual(p, &sol, data)));
        }
    }
    Ok(out)
}

/// Run every probe at each point; a probe's response is its largest
/// residual over the points, since the suites run at all of them.
pub fn mutation_probes(
    p: &FluidParams,
    points: &[(SpectralPoint, BoundaryData)],
    tol: &Tolerances,
) -> Result<MutationReport> {
    let mut probes: Vec<Probe> = Vec::new();
    for (sp, data) in points {
        for (target, response) in probe_point(p, sp, data, tol)? {
            match probes.iter_mut().find(|q| q.target == target) {
                Some(q) => q.response = q.response.max(response),
                None => probes.push(Probe { target, response, detected: false }),
            }
        }
    }
    for q in &mut probes {
        q.detected = q.response > tol.mutation_detect;
    }
    Ok(MutationReport { size: tol.mutation_size, threshold: tol.mutation_detect, probes })
}

/// Generic points used by the suites: balanced, inertia-dominated and
/// tension-dominated, the last one in kinematic mode.
pub fn default_probe_points() -> Vec<(SpectralPoint, BoundaryData)> {
    let c = C64::new;
    let pt = |lam: C64, xi: [f64; 2]| SpectralPoint::new(lam, &xi).expect("valid point");
    let h = vec![c(0.6, -0.4), c(-0.3, 0.9)];
    vec![
        (pt(c(0.8, 1.3), [0.9, 0.7]), BoundaryData::explicit(h.clone(), c(0.7, 0.2))),
        (pt(c(3.0, 5.0), [0.6, 0.5]), BoundaryData::explicit(h.clone(), c(-0.4, 0.5))),
        (pt(c(0.3, -0.2), [2.0, 1.5]), BoundaryData::kinematic(h, c(0.5, 0.5))),
    ]
}
