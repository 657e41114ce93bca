//! Every numeric threshold used by the library and the certification suites.
//!
//! Defaults are the thresholds the checks are held to. `scaled` widens
//! (or tightens) all pass/fail tolerances at once, which is what the CLI
//! `--tolerance-scale` flag drives; algorithmic switches are left alone.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap below which rho_plus and rho_minus count as equal.
    pub equal_density: f64,
    /// Stored sigma_plus/sigma_minus versus recomputation.
    pub sigma_recompute: f64,
    /// |B - A| < confluent_switch * |B + A| selects the series kernel.
    pub confluent_switch: f64,
    /// Series truncation: stop once a term drops below this relative size.
    pub series_truncation: f64,
    /// Re-squaring error of the characteristic roots.
    pub root_resquare: f64,
    /// Raw versus stabilized L-plus entries.
    pub raw_vs_stabilized: f64,
    /// Raw form is only trusted when |A+B+ - A^2| exceeds this times (|lambda|^1/2 + A)^2.
    pub raw_gate: f64,
    /// Cancellation-safe versus naive L-minus entries.
    pub naive_vs_safe: f64,
    pub singular_det: f64,
    pub det_factorization: f64,
    pub adjugate: f64,
    pub homogeneity: f64,
    pub omega_refinement_drift: f64,
    pub asymptotic_100: f64,
    pub asymptotic_1e4: f64,
    pub height_bound: f64,
    pub height_slope: f64,
    pub class_drift: f64,
    pub fd_step: f64,
    pub multiply_back: f64,
    pub symbol_vs_direct: f64,
    pub superposition: f64,
    pub ode_residual: f64,
    pub interface_residual: f64,
    pub fuzz_residual: f64,
    pub energy_defect: f64,
    pub quadrature_vs_closed: f64,
    pub quadrature_rel: f64,
    pub single_mode: f64,
    pub fft_round_trip: f64,
    pub volevich: f64,
    pub c3_matching: f64,
    pub lions_resubstitution: f64,
    pub kernel_drift: f64,
    pub zero_mode: f64,
    pub mutation_size: f64,
    pub mutation_detect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equal_density: 1e-12,
            sigma_recompute: 1e-15,
            confluent_switch: 1e-4,
            series_truncation: 1e-16,
            root_resquare: 1e-14,
            raw_vs_stabilized: 1e-10,
            raw_gate: 1e-8,
            naive_vs_safe: 1e-11,
            singular_det: 1e-300,
            det_factorization: 1e-13,
            adjugate: 1e-12,
            homogeneity: 1e-12,
            omega_refinement_drift: 0.05,
            asymptotic_100: 0.05,
            asymptotic_1e4: 0.005,
            height_bound: 1e-3,
            height_slope: 0.05,
            class_drift: 2.0,
            fd_step: 1e-4,
            multiply_back: 1e-12,
            symbol_vs_direct: 1e-11,
            superposition: 1e-13,
            ode_residual: 1e-10,
            interface_residual: 1e-11,
            fuzz_residual: 1e-10,
            energy_defect: 1e-10,
            quadrature_vs_closed: 1e-8,
            quadrature_rel: 1e-9,
            single_mode: 1e-12,
            fft_round_trip: 1e-13,
            volevich: 1e-8,
            c3_matching: 1e-9,
            lions_resubstitution: 1e-13,
            kernel_drift: 2.0,
            zero_mode: 1e-12,
            mutation_size: 1e-3,
            mutation_detect: 1e-4,
        }
    }
}

impl Tolerances {
    /// Multiply every pass/fail tolerance by `s`. Drift factors (which are
    /// ratios >= 1) scale as 1 + s * (d - 1).
    pub fn scaled(&self, s: f64) -> Self {
        let mut t = *self;
        for v in [
            &mut t.root_resquare,
            &mut t.raw_vs_stabilized,
            &mut t.naive_vs_safe,
            &mut t.det_factorization,
            &mut t.adjugate,
            &mut t.homogeneity,
            &mut t.omega_refinement_drift,
            &mut t.asymptotic_100,
            &mut t.asymptotic_1e4,
            &mut t.height_slope,
            &mut t.multiply_back,
            &mut t.symbol_vs_direct,
            &mut t.superposition,
            &mut t.ode_residual,
            &mut t.interface_residual,
            &mut t.fuzz_residual,
            &mut t.energy_defect,
            &mut t.quadrature_vs_closed,
            &mut t.single_mode,
            &mut t.fft_round_trip,
            &mut t.volevich,
            &mut t.c3_matching,
            &mut t.lions_resubstitution,
        ] {
            *v *= s;
        }
        t.class_drift = 1.0 + s * (t.class_drift - 1.0);
        t.kernel_drift = 1.0 + s * (t.kernel_drift - 1.0);
        t
    }
}
