//! Run configuration. Every field has a built-in default, so an empty TOML
//! file is a valid configuration; `pseudotor config --print-defaults` dumps
//! the full set.

use std::path::{Path, PathBuf};

use pseudotor_core::dynamics::{IntegralPair, Provenance, SymbolFunction};
use pseudotor_core::fibration::{flag_line, make_height, BaseMorseFunction, HeightMode, TorusResolution};
use pseudotor_core::{ProjectivePoint, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub integrals: IntegralsConfig,
    pub height: HeightConfig,
    pub fibers: FiberConfig,
    pub tolerances: ToleranceConfig,
    pub isotopy: IsotopyConfig,
    pub sampling: SamplingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20240917,
            out_dir: PathBuf::from("out"),
            integrals: IntegralsConfig::default(),
            height: HeightConfig::default(),
            fibers: FiberConfig::default(),
            tolerances: ToleranceConfig::default(),
            isotopy: IsotopyConfig::default(),
            sampling: SamplingConfig::default(),
        }
    }
}

/// Eigenvalue triples of the two diagonal integrals. `balance`, when given,
/// must equal the sums `lx_i + ly_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralsConfig {
    pub f1_x: [f64; 3],
    pub f1_y: [f64; 3],
    pub f2_x: [f64; 3],
    pub f2_y: [f64; 3],
    pub balance: Option<[f64; 2]>,
}

impl Default for IntegralsConfig {
    fn default() -> Self {
        IntegralsConfig {
            f1_x: [0.0, 1.0, 2.0],
            f1_y: [2.0, 1.0, 0.0],
            f2_x: [0.0, 1.0, 3.0],
            f2_y: [3.0, 2.0, 0.0],
            balance: Some([2.0, 3.0]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Mobius,
    Symbol,
}

impl From<ModeName> for HeightMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Mobius => HeightMode::Mobius,
            ModeName::Symbol => HeightMode::Symbol,
        }
    }
}

/// Base Morse function on the line `{ w0 + w1 + w2 = 0 }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeightConfig {
    pub mode: ModeName,
    pub max_point: [f64; 3],
    pub min_point: [f64; 3],
    /// Mode used by the specialty check.
    pub specialty_mode: ModeName,
}

impl Default for HeightConfig {
    fn default() -> Self {
        HeightConfig { mode: ModeName::Mobius, max_point: [0.0, 1.0, -1.0], min_point: [1.0, 0.0, -1.0], specialty_mode: ModeName::Symbol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberConfig {
    pub levels: Vec<f64>,
    pub labels: Vec<[f64; 2]>,
    pub loop_points: usize,
    pub angle1: usize,
    pub angle2: usize,
}

impl Default for FiberConfig {
    fn default() -> Self {
        let r = TorusResolution::default();
        FiberConfig {
            levels: vec![-0.6, -0.2, 0.3, 0.7],
            labels: vec![[2.0, 3.2], [1.8, 2.6], [2.5, 3.7]],
            loop_points: r.loop_points,
            angle1: r.angle1,
            angle2: r.angle2,
        }
    }
}

impl FiberConfig {
    pub fn resolution(&self) -> TorusResolution {
        TorusResolution { loop_points: self.loop_points, angle1: self.angle1, angle2: self.angle2 }
    }

    /// All `(level, c1, c2)` combinations.
    pub fn grid(&self) -> Vec<(f64, f64, f64)> {
        self.levels.iter().flat_map(|l| self.labels.iter().map(move |c| (*l, c[0], c[1]))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub flag_tol: f64,
    pub ode_tol: f64,
    pub min_step: f64,
    pub rank_tol: f64,
    pub zero_tol: f64,
    pub phase_tol: f64,
    pub collapse_exclusion: f64,
    pub divisor_exclusion: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        ToleranceConfig {
            flag_tol: t.flag_tol,
            ode_tol: t.ode_tol,
            min_step: t.min_step,
            rank_tol: t.rank_tol,
            zero_tol: t.zero_tol,
            phase_tol: t.phase_tol,
            collapse_exclusion: t.collapse_exclusion,
            divisor_exclusion: t.divisor_exclusion,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsotopyKindName {
    SurfaceTracking,
    Pullback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsotopyConfig {
    pub r1: f64,
    pub r2: f64,
    pub kind: IsotopyKindName,
    pub level: f64,
    pub label: [f64; 2],
    /// Number of torus points carried through the isotopy.
    pub points: usize,
}

impl Default for IsotopyConfig {
    fn default() -> Self {
        IsotopyConfig { r1: 0.2, r2: 0.1, kind: IsotopyKindName::SurfaceTracking, level: 0.3, label: [2.0, 3.2], points: 24 }
    }
}

/// Sample counts of the statistical checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub flags: usize,
    pub compat_flags: usize,
    pub connection_flags: usize,
    pub frobenius_flags: usize,
    pub moment_samples: usize,
    pub diagonal_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            flags: 1000,
            compat_flags: 100,
            connection_flags: 100,
            frobenius_flags: 20,
            moment_samples: 1000,
            diagonal_samples: 10_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.core_tolerances().is_valid() {
            return Err(CliError::Config("tolerances must be positive and finite".into()));
        }
        if !(self.isotopy.r1 > self.isotopy.r2 && self.isotopy.r2 > 0.0) {
            return Err(CliError::Config("isotopy radii must satisfy r1 > r2 > 0".into()));
        }
        let f = &self.fibers;
        if f.loop_points < 2 || f.angle1 < 1 || f.angle2 < 1 {
            return Err(CliError::Config("torus resolution too small".into()));
        }
        Ok(())
    }

    pub fn core_tolerances(&self) -> Tolerances {
        let t = &self.tolerances;
        Tolerances {
            flag_tol: t.flag_tol,
            ode_tol: t.ode_tol,
            min_step: t.min_step,
            rank_tol: t.rank_tol,
            zero_tol: t.zero_tol,
            phase_tol: t.phase_tol,
            collapse_exclusion: t.collapse_exclusion,
            divisor_exclusion: t.divisor_exclusion,
        }
    }

    /// The configured integrals; unbalanced triples are accepted (unchecked)
    /// so that the tangency check can report them as failures.
    pub fn integrals(&self) -> Result<IntegralPair, CliError> {
        let c = &self.integrals;
        match IntegralPair::from_eigenvalues(c.f1_x, c.f1_y, c.f2_x, c.f2_y, Provenance::Config) {
            Ok(ip) => {
                if let Some(b) = c.balance {
                    let (b1, b2) = ip.balance_constants().expect("balanced");
                    if (b1 - b[0]).abs() > 1e-12 || (b2 - b[1]).abs() > 1e-12 {
                        return Err(CliError::Config(format!("balance constants are ({b1}, {b2}), config says ({}, {})", b[0], b[1])));
                    }
                }
                Ok(ip)
            }
            Err(pseudotor_core::Error::InvalidParameter(m)) if m.contains("balance") => {
                Ok(IntegralPair::unchecked(SymbolFunction::diagonal(c.f1_x, c.f1_y), SymbolFunction::diagonal(c.f2_x, c.f2_y)))
            }
            Err(e) => Err(CliError::Core(e)),
        }
    }

    pub fn height_in(&self, mode: ModeName) -> Result<BaseMorseFunction, CliError> {
        let a = ProjectivePoint::from_real(self.height.max_point[0], self.height.max_point[1], self.height.max_point[2])?;
        let b = ProjectivePoint::from_real(self.height.min_point[0], self.height.min_point[1], self.height.min_point[2])?;
        Ok(make_height(&a, &b, mode.into(), &flag_line())?)
    }

    pub fn height(&self) -> Result<BaseMorseFunction, CliError> {
        self.height_in(self.height.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let back = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(RunConfig::parse("").unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("[isotopy]\nr1 = 0.1\nr2 = 0.2\n").is_err());
        assert!(RunConfig::parse("[tolerances]\node_tol = -1.0\n").is_err());
        assert!(RunConfig::parse("colour = 3\n").is_err());
        let c = RunConfig::parse("[integrals]\nbalance = [2.0, 4.0]\n").unwrap();
        assert!(c.integrals().is_err());
    }

    #[test]
    fn unbalanced_integrals_are_kept() {
        let c = RunConfig::parse("[integrals]\nf1_y = [2.0, 1.0, 0.5]\nbalance = []\n");
        // An empty array is not a valid pair.
        assert!(c.is_err());
        let c = RunConfig::parse("[integrals]\nf1_y = [2.0, 1.0, 0.5]\n").unwrap();
        let mut c = c;
        c.integrals.balance = None;
        assert!(!c.integrals().unwrap().f1.is_balanced());
    }
}
