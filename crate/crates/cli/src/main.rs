//! `lopstokes` command-line front end.
//!
//! Exit status: 0 when every requested check passes, 1 on I/O or internal
//! errors, 2 on usage or config errors, 3 when the physics rejects the input
//! (equal densities, |lambda| below the height cutoff, nonzero mean data),
//! and 32 + a bitmask of failed suites otherwise (see `Suite`).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use config::RunConfig;
use lopstokes::coefficients::class::certified_table;
use lopstokes::coefficients::height::scan_height;
use lopstokes::lopatinski::{asymptotic_report, scan_lower_bound_with};
use lopstokes::resolvent::fuzz::{run_fuzz_with, Fault};
use lopstokes::resolvent::Mode;
use lopstokes::symbol::validate_params_with;
use lopstokes::transform::height::check_cutoff;
use lopstokes::transform::io::{read_field_csv, write_field_csv, FieldHeader};
use lopstokes::transform::kernel::kernel_decay_check;
use lopstokes::transform::solve::{solve_physical, PhysicalData, SolveOptions};
use lopstokes::{Error, FluidParams, Sector, Tolerances};
use output::{content_hash, OutDir};

#[derive(Parser)]
#[command(name = "lopstokes", version, about = "Certify and solve the two-phase Stokes half-space resolvent problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration (all keys optional).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; LOPSTOKES_OUT takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fuzz seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fuzz sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Multiply every pass/fail tolerance.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    /// Test hook: run with a deliberate defect.
    #[arg(long, global = true, hide = true, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SignFlip,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Grid infimum of |det L| over the sector plus the asymptotic constants.
    ScanLopatinski,
    /// Height symbol bound and the cutoff lambda0.
    ScanHeight,
    /// Resolvent fuzz, energy balance, height scan and multiplier table.
    Verify,
    /// Multiplier-class table only.
    VerifyMultipliers,
    /// Solve for the fields of the data files named in [solve].
    Solve,
    /// Kernel decay envelopes on the [kernel] grids.
    KernelDecay,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ScanLopatinski => "scan-lopatinski",
            Command::ScanHeight => "scan-height",
            Command::Verify => "verify",
            Command::VerifyMultipliers => "verify-multipliers",
            Command::Solve => "solve",
            Command::KernelDecay => "kernel-decay",
        }
    }
}

/// Bits of the failure mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    OdeResidual = 1,
    InterfaceResidual = 2,
    Energy = 4,
    Multipliers = 8,
    Height = 16,
    Lopatinski = 32,
    Kernel = 64,
}

#[derive(Serialize)]
struct SuiteResult {
    suite: Suite,
    passed: bool,
    detail: String,
}

#[derive(Default, Serialize)]
struct Summary {
    command: String,
    config_hash: String,
    suites: Vec<SuiteResult>,
    notes: Vec<String>,
    /// Names relative to the output directory.
    files: Vec<String>,
}

impl Summary {
    fn record(&mut self, suite: Suite, passed: bool, detail: String) {
        self.suites.push(SuiteResult { suite, passed, detail });
    }
    fn mask(&self) -> u8 {
        self.suites.iter().filter(|s| !s.passed).fold(0, |m, s| m | s.suite as u8)
    }
}

/// Errors where the input itself is unusable for the physics.
fn rejects_input(e: &Error) -> bool {
    matches!(
        e,
        Error::EqualDensities(_)
            | Error::NonPositiveParameter { .. }
            | Error::NegativeSurfaceTension(_)
            | Error::HeightNotInvertible(_)
            | Error::ZeroModeData(_)
            | Error::OutOfSector { .. }
    )
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::HeightNotInvertible(_) => {
            Some("choose |lambda| above the cutoff reported by `lopstokes scan-height`, or solve in explicit-h mode")
        }
        Error::ZeroModeData(_) => Some("subtract the mean of each data field, or set solve.project_zero_mode = true"),
        Error::EqualDensities(_) => Some("the model needs rho_plus != rho_minus"),
        _ => None,
    }
}

struct Run {
    cfg: RunConfig,
    p: FluidParams,
    sector: Sector,
    tol: Tolerances,
    fault: Fault,
    out: OutDir,
    summary: Summary,
}

impl Run {
    fn lambda0(&self) -> lopstokes::Result<f64> {
        if self.sector.lambda0 > 0.0 {
            return Ok(self.sector.lambda0);
        }
        let rep = scan_height(&self.p, &self.sector, &self.cfg.scan, self.tol.height_bound)?;
        rep.lambda0.ok_or(Error::NoCutoffFound)
    }

    fn file<T: Serialize>(&mut self, suffix: &str, value: &T) -> anyhow::Result<()> {
        let p = self.out.write_json(suffix, value)?;
        self.summary.files.push(file_name(&p));
        Ok(())
    }

    fn csv(&mut self, suffix: &str, bytes: Vec<u8>) -> anyhow::Result<()> {
        let p = self.out.write_bytes(suffix, &bytes)?;
        self.summary.files.push(file_name(&p));
        Ok(())
    }

    fn scan_lopatinski(&mut self) -> anyhow::Result<()> {
        let tol = self.tol;
        match scan_lower_bound_with(&self.p, &self.sector, &self.cfg.scan, 100.0, &tol) {
            Ok(rep) => {
                let a100 = asymptotic_report(&self.p, &self.sector, 100.0)?;
                let a1e4 = asymptotic_report(&self.p, &self.sector, 1e4)?;
                let d100 = a100.deviation1.max(a100.deviation2);
                let d1e4 = a1e4.deviation1.max(a1e4.deviation2);
                let ok = rep.omega > 0.0 && d100 <= tol.asymptotic_100 && d1e4 <= tol.asymptotic_1e4;
                let detail = format!(
                    "omega = {:.4e} over {} points; asymptotic deviation {:.3}% at ratio 100, {:.4}% at ratio 1e4",
                    rep.omega,
                    rep.n_points,
                    100.0 * d100,
                    100.0 * d1e4
                );
                let mut buf = Vec::new();
                rep.write_csv(&mut buf)?;
                self.csv(".csv", buf)?;
                #[derive(Serialize)]
                struct Out<'a, S, A> {
                    scan: &'a S,
                    asymptotic: [&'a A; 2],
                }
                self.file(".json", &Out { scan: &rep, asymptotic: [&a100, &a1e4] })?;
                self.summary.record(Suite::Lopatinski, ok, detail);
            }
            Err(e @ Error::NonPositiveOmega(_)) => self.summary.record(Suite::Lopatinski, false, e.to_string()),
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }

    fn scan_height(&mut self) -> anyhow::Result<f64> {
        let rep = scan_height(&self.p, &self.sector, &self.cfg.scan, self.tol.height_bound)?;
        let slope_ok = match rep.slope_deviation {
            Some(d) => d < self.tol.height_slope,
            None => true,
        };
        let ok = rep.lambda0.is_some() && rep.omega4.is_some_and(|w| w > 0.0) && slope_ok;
        let detail = format!(
            "lambda0 = {}, omega4 = {}, {} sector zeros of lambda + K, slope deviation {}",
            rep.lambda0.map_or("none".into(), |l| format!("{l:.4e}")),
            rep.omega4.map_or("none".into(), |w| format!("{w:.4e}")),
            rep.sector_zeros.len(),
            rep.slope_deviation.map_or("n/a (sigma = 0)".into(), |d| format!("{:.3}%", 100.0 * d)),
        );
        let mut buf = b"abs_lambda,inf_ratio,inf_ratio_refined\n".to_vec();
        for ((m, a), (_, b)) in rep.per_magnitude.iter().zip(&rep.per_magnitude_refined) {
            buf.extend(format!("{m:e},{a:e},{b:e}\n").bytes());
        }
        self.csv("-height.csv", buf)?;
        self.file("-height.json", &rep)?;
        self.summary.record(Suite::Height, ok, detail);
        Ok(rep.lambda0.unwrap_or(0.0))
    }

    fn multipliers(&mut self, lambda0: f64) -> anyhow::Result<()> {
        let reps = certified_table(&self.p, &self.sector, lambda0, &self.cfg.classes, &self.tol)?;
        let failed: Vec<&str> = reps.iter().filter(|r| !r.passed()).map(|r| r.symbol.as_str()).collect();
        let drift = reps.iter().map(|r| r.max_drift()).fold(1.0, f64::max);
        let ok = failed.is_empty() && drift < self.tol.class_drift;
        let detail = format!("{} symbols, max drift {drift:.3}, failed {failed:?}", reps.len());
        let mut buf = b"symbol,order,type,kappa,ell,constant,refined_constant,drift\n".to_vec();
        for r in &reps {
            for c in &r.constants {
                buf.extend(
                    format!(
                        "{},{},{},{},{},{:e},{:e},{}\n",
                        r.symbol, r.order, r.kind, c.kappa_multi_index, c.ell, c.constant, c.refined_constant, c.refinement_drift
                    )
                    .bytes(),
                );
            }
        }
        self.csv("-multipliers.csv", buf)?;
        self.file("-multipliers.json", &reps)?;
        self.summary.record(Suite::Multipliers, ok, detail);
        Ok(())
    }

    fn verify(&mut self) -> anyhow::Result<()> {
        let rep = run_fuzz_with(&self.p, &self.sector, &self.cfg.fuzz, &self.tol, self.fault);
        let cats = rep.categories();
        let line = |range: std::ops::Range<usize>| {
            cats[range].iter().map(|(n, w)| format!("{n} {:.2e}/{:.0e}", w.value, w.limit)).collect::<Vec<_>>().join(", ")
        };
        let unsolved = if rep.failures.is_empty() { String::new() } else { format!("; {} unsolved", rep.failures.len()) };
        self.summary.record(
            Suite::OdeResidual,
            rep.failures.is_empty() && cats[0].1.passed(),
            format!("{} samples: {}{unsolved}", rep.n_samples, line(0..1)),
        );
        self.summary.record(Suite::InterfaceResidual, rep.interface_passed(), line(1..7));
        self.summary.record(Suite::Energy, rep.energy_passed(), format!("{} ({} quadrature samples)", line(7..9), rep.n_quadrature));
        let full = lopstokes::resolvent::fuzz::FuzzConfig::default().samples;
        if rep.n_samples < full {
            self.summary.notes.push(format!("reduced coverage: {} fuzz samples (full suite uses {full})", rep.n_samples));
        }
        self.file("-fuzz.json", &rep)?;
        let l0 = self.scan_height()?;
        let l0 = if self.sector.lambda0 > 0.0 { self.sector.lambda0 } else { l0 };
        self.multipliers(l0)
    }

    fn kernel(&mut self) -> anyhow::Result<()> {
        let k = self.cfg.kernel.clone();
        let mut reps = Vec::new();
        for sym in &k.symbols {
            for g in &k.grids {
                reps.push(kernel_decay_check(*sym, &g.grid()?, &k.x_levels, self.tol.kernel_drift)?);
            }
        }
        let ok = reps.iter().all(|r| r.passed());
        let drift = reps.iter().map(|r| r.refinement_drift.max(r.enlargement_drift)).fold(1.0, f64::max);
        self.file(".json", &reps)?;
        self.summary.record(Suite::Kernel, ok, format!("{} envelopes, max drift {drift:.3} (limit {})", reps.len(), self.tol.kernel_drift));
        Ok(())
    }

    fn solve(&mut self) -> anyhow::Result<()> {
        let s = self.cfg.solve.clone();
        let grid = s.grid.grid()?;
        let lambda = C64::new(s.lambda[0], s.lambda[1]);
        if !self.sector.contains(lambda) {
            return Err(Error::OutOfSector { re: lambda.re, im: lambda.im }.into());
        }
        if s.mode == Mode::Kinematic {
            let l0 = self.lambda0()?;
            check_cutoff(lambda, l0)?;
        }
        let mut data = PhysicalData::zero(&grid, s.mode);
        if s.h.len() > grid.axes() {
            anyhow::bail!("solve.h lists {} files but the grid has {} tangential axes", s.h.len(), grid.axes());
        }
        for (m, path) in s.h.iter().enumerate() {
            data.h[m] = read_field_csv(&grid, path)?;
        }
        if let Some(path) = &s.height {
            data.height = read_field_csv(&grid, path)?;
        }
        let opts = SolveOptions { project_zero_mode: s.project_zero_mode };
        let sol = solve_physical(&self.p, lambda, &data, &s.x_levels, &opts)?;
        let header = FieldHeader {
            name: "solve".into(),
            grid: grid.clone(),
            x_levels: s.x_levels.clone(),
            lambda: s.lambda,
            params: self.cfg.params.raw(),
        };
        self.file("-header.json", &header)?;
        let n = grid.axes() + 1;
        for j in 0..n {
            for (side, f) in [("plus", &sol.u_plus), ("minus", &sol.u_minus)] {
                let levels: Vec<_> = f.iter().map(|l| l[j].clone()).collect();
                let mut buf = Vec::new();
                write_field_csv(&grid, &levels, &mut buf)?;
                self.csv(&format!("-u_{side}_{}.csv", j + 1), buf)?;
            }
        }
        let mut buf = Vec::new();
        write_field_csv(&grid, &sol.pressure, &mut buf)?;
        self.csv("-pressure_minus.csv", buf)?;
        let mut buf = Vec::new();
        write_field_csv(&grid, std::slice::from_ref(&sol.height), &mut buf)?;
        self.csv("-height.csv", buf)?;
        #[derive(Serialize)]
        struct Sidecar<'a> {
            modes: &'a [lopstokes::transform::solve::ModeResidual],
            worst_ode: f64,
            worst_interface: f64,
            warnings: &'a [String],
        }
        let worst_ode = sol.mode_residuals.iter().map(|r| r.ode).fold(0.0, f64::max);
        let worst_interface = sol.mode_residuals.iter().map(|r| r.interface).fold(0.0, f64::max);
        self.file("-residuals.json", &Sidecar { modes: &sol.mode_residuals, worst_ode, worst_interface, warnings: &sol.warnings })?;
        self.summary.notes.extend(sol.warnings.iter().cloned());
        self.summary.record(
            Suite::OdeResidual,
            worst_ode < self.tol.ode_residual,
            format!("{} modes, worst ODE residual {worst_ode:.2e}", sol.mode_residuals.len()),
        );
        self.summary.record(
            Suite::InterfaceResidual,
            worst_interface < self.tol.interface_residual,
            format!("worst interface residual {worst_interface:.2e}"),
        );
        Ok(())
    }
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn setup(cli: &Cli) -> anyhow::Result<Run> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.fuzz.seed = s;
    }
    if let Some(n) = cli.samples {
        anyhow::ensure!(n > 0, "--samples must be positive");
        cfg.fuzz.samples = n;
        cfg.fuzz.quadrature_samples = cfg.fuzz.quadrature_samples.min(n);
    }
    if let Some(s) = cli.tolerance_scale {
        anyhow::ensure!(s > 0.0 && s.is_finite(), "--tolerance-scale must be positive");
        cfg.tolerances = cfg.tolerances.scaled(s);
    }
    let out_dir = std::env::var_os("LOPSTOKES_OUT")
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("lopstokes-out"));
    // the output location does not change results, so it stays out of the hash
    cfg.output_dir = None;
    let fault = match cli.inject_fault {
        Some(FaultArg::SignFlip) => Fault::FlipLopatinskiSign,
        None => Fault::None,
    };
    #[derive(Serialize)]
    struct Keyed<'a> {
        config: &'a RunConfig,
        fault: bool,
    }
    let hash = content_hash(&Keyed { config: &cfg, fault: fault != Fault::None });
    let out = OutDir::new(out_dir, cli.command.name(), &hash)?;
    let sector = cfg.sector()?;
    let tol = cfg.tolerances;
    let p = validate_params_with(&cfg.params.raw(), &tol)?;
    let summary = Summary { command: cli.command.name().into(), config_hash: hash, ..Summary::default() };
    Ok(Run { cfg, p, sector, tol, fault, out, summary })
}

fn execute(cli: &Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting thread pool")?;
    }
    let mut run = setup(cli)?;
    match cli.command {
        Command::ScanLopatinski => run.scan_lopatinski()?,
        Command::ScanHeight => {
            run.scan_height()?;
        }
        Command::Verify => run.verify()?,
        Command::VerifyMultipliers => {
            let l0 = run.lambda0()?;
            run.multipliers(l0)?;
        }
        Command::Solve => run.solve()?,
        Command::KernelDecay => run.kernel()?,
    }
    let mask = run.summary.mask();
    for s in &run.summary.suites {
        println!("{} {:?}: {}", if s.passed { "PASS" } else { "FAIL" }, s.suite, s.detail);
    }
    for n in &run.summary.notes {
        println!("note: {n}");
    }
    let path = run.out.path("-summary.json");
    run.summary.files.sort();
    run.out.write_json("-summary.json", &run.summary)?;
    println!("summary: {}", path.display());
    Ok(if mask == 0 { 0 } else { 32 + mask })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(le) = e.downcast_ref::<Error>() {
                if let Some(h) = hint(le) {
                    eprintln!("hint: {h}");
                }
                if rejects_input(le) {
                    return ExitCode::from(3);
                }
                if matches!(le, Error::InvalidSector(_) | Error::InvalidCutoff(_) | Error::InvalidGrid(_)) {
                    return ExitCode::from(2);
                }
                return ExitCode::from(1);
            }
            if e.chain().any(|c| c.is::<toml::de::Error>()) || e.to_string().starts_with("in config") {
                return ExitCode::from(2);
            }
            ExitCode::from(1)
        }
    }
}
