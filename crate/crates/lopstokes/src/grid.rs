use serde::{Deserialize, Serialize};

/// Log-spaced range: min * 10^(k / per_decade) for k = 0.. up to max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl LogRange {
    pub fn refined(&self) -> Self {
        LogRange { per_decade: self.per_decade * 2, ..*self }
    }

    /// Widen by `decades` on both ends. The lower end stops at the last
    /// lattice point not below `floor`, so the old points stay on the grid.
    pub fn extended(&self, decades: f64, floor: f64) -> Self {
        let f = 10f64.powf(decades);
        let min = if self.min / f >= floor {
            self.min / f
        } else {
            let k = ((self.min / floor).log10() * self.per_decade as f64 + 1e-9).floor().max(0.0);
            self.min * 10f64.powf(-k / self.per_decade as f64)
        };
        LogRange { min, max: self.max * f, per_decade: self.per_decade }
    }
}

pub fn log_grid(r: &LogRange) -> Vec<f64> {
    assert!(r.min > 0.0 && r.max >= r.min && r.per_decade > 0, "invalid log range {r:?}");
    let l0 = r.min.log10();
    let n = ((r.max.log10() - l0) * r.per_decade as f64 + 1e-9).floor() as usize;
    (0..=n).map(|k| 10f64.powf(l0 + k as f64 / r.per_decade as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_count() {
        let g = log_grid(&LogRange { min: 1e-4, max: 1e8, per_decade: 10 });
        assert_eq!(g.len(), 121);
        assert!((g[0] - 1e-4).abs() < 1e-19);
        assert!((g[120] / 1e8 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extension_respects_floor_and_nests() {
        let r = LogRange { min: 32.0, max: 1e4, per_decade: 4 };
        let e = r.extended(2.0, 31.9);
        assert_eq!(e.min, 32.0);
        let e = r.extended(2.0, 10.0);
        assert!(e.min >= 10.0 && e.min < 10.0 * 10f64.powf(0.25));
        let g = log_grid(&e);
        assert!(g.iter().any(|y| (y / 32.0 - 1.0).abs() < 1e-12));
    }

    #[test]
    fn refinement_nests() {
        let r = LogRange { min: 1e-2, max: 1e2, per_decade: 3 };
        let a = log_grid(&r);
        let b = log_grid(&r.refined());
        for x in a {
            assert!(b.iter().any(|y| (y / x - 1.0).abs() < 1e-12));
        }
    }
}
