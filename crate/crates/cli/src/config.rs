//! Run configuration, read from TOML. Every section and every key is
//! optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use lopstokes::coefficients::class::ClassGrid;
use lopstokes::lopatinski::ScanGrid;
use lopstokes::resolvent::fuzz::FuzzConfig;
use lopstokes::resolvent::Mode;
use lopstokes::transform::kernel::KernelSymbol;
use lopstokes::transform::TangentialGrid;
use lopstokes::{RawParams, Sector, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub nu_plus: f64,
    pub sigma: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let r = RawParams::default();
        ParamsSection {
            rho_plus: r.rho_plus,
            rho_minus: r.rho_minus,
            mu_plus: r.mu_plus,
            mu_minus: r.mu_minus,
            nu_plus: r.nu_plus,
            sigma: r.sigma,
        }
    }
}

impl ParamsSection {
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

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorSection {
    pub epsilon: f64,
    /// 0 means "compute with the height scan" wherever a cutoff is needed.
    pub lambda0: f64,
}

impl Default for SectorSection {
    fn default() -> Self {
        let s = Sector::default();
        SectorSection { epsilon: s.epsilon, lambda0: s.lambda0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "box")]
    pub box_lengths: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSection {
    pub fn grid(&self) -> lopstokes::Result<TangentialGrid> {
        TangentialGrid::new(self.box_lengths.clone(), self.shape.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub symbols: Vec<KernelSymbol>,
    pub grids: Vec<GridSection>,
    pub x_levels: Vec<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            symbols: vec![KernelSymbol::One, KernelSymbol::Bracket],
            grids: vec![
                GridSection { box_lengths: vec![40.0], shape: vec![256] },
                GridSection { box_lengths: vec![24.0, 24.0], shape: vec![64, 64] },
            ],
            x_levels: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// [re, im]
    pub lambda: [f64; 2],
    pub grid: GridSection,
    pub x_levels: Vec<f64>,
    pub mode: Mode,
    /// CSV files for h_1..h_{N-1}; relative paths resolve against the
    /// config file. Missing entries are zero.
    pub h: Vec<PathBuf>,
    /// CSV file for H (explicit mode) or d (kinematic mode).
    pub height: Option<PathBuf>,
    pub project_zero_mode: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            lambda: [1.0, 0.0],
            grid: GridSection { box_lengths: vec![20.0, 20.0], shape: vec![32, 32] },
            x_levels: vec![0.0, 0.5, 1.0],
            mode: Mode::ExplicitH,
            h: Vec::new(),
            height: None,
            project_zero_mode: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub sector: SectorSection,
    pub scan: ScanGrid,
    pub classes: ClassGrid,
    pub fuzz: FuzzConfig,
    pub kernel: KernelSection,
    pub solve: SolveSection,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in cfg.solve.h.iter_mut().chain(cfg.solve.height.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Shape checks that do not need the physics; parameter validation
    /// (equal densities and the like) happens when a command runs.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.sector().context("[sector]")?;
        for (name, r) in [("scan.lambda", &self.scan.lambda), ("scan.a", &self.scan.a), ("classes.lambda", &self.classes.lambda), ("classes.a", &self.classes.a)] {
            if !(r.min > 0.0 && r.max >= r.min && r.per_decade > 0) {
                bail!("{name}: need 0 < min <= max and per_decade > 0");
            }
        }
        if self.fuzz.samples == 0 {
            bail!("fuzz.samples must be positive");
        }
        self.solve.grid.grid().context("[solve.grid]")?;
        for g in &self.kernel.grids {
            g.grid().context("[kernel.grids]")?;
        }
        if self.kernel.x_levels.iter().any(|x| !(*x > 0.0)) || self.kernel.x_levels.windows(2).any(|w| w[1] <= w[0]) {
            bail!("kernel.x_levels must be positive and increasing");
        }
        Ok(())
    }

    pub fn sector(&self) -> lopstokes::Result<Sector> {
        Sector::new(self.sector.epsilon, self.sector.lambda0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = RunConfig::parse("[params]\nsigma = 0.5\n[fuzz]\nsamples = 10\n").unwrap();
        assert_eq!(c.params.sigma, 0.5);
        assert_eq!(c.params.rho_minus, 2.0);
        assert_eq!(c.fuzz.samples, 10);
    }

    #[test]
    fn rejects_unknown_keys_and_wide_sectors() {
        let e = RunConfig::parse("[params]\nrho = 1.0\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"), "{e:#}");
        assert!(RunConfig::parse("[sector]\nepsilon = 1.6\n").is_err());
    }
}
