//! Run configuration: one JSON document covering the instance, the
//! topology, the experiment grids, solver tolerances, and output layout.
//! Unknown keys are rejected everywhere so typos fail loudly instead of
//! silently reverting to defaults.

use std::path::{Path, PathBuf};

use cohest_core::instances::InstanceSpec;
use cohest_core::solver::Tolerances;
use cohest_core::topology::Topology;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub instance: InstanceSpec,
    pub topology: TopologySpec,
    pub experiment: ExperimentConfig,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
}

impl Config {
    /// Loads a config file, or the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Semantic checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.experiment.tradeoff;
        if !(t.power_min > 0.0) || !(t.power_max >= t.power_min) {
            return Err(CliError::Config(format!(
                "tradeoff power range [{}, {}] must be positive and ordered",
                t.power_min, t.power_max
            )));
        }
        if t.points == 0 {
            return Err(CliError::Config("tradeoff grid needs at least one point".into()));
        }
        let ps = &self.experiment.power_savings;
        if ps.n == 0 || ps.seeds == 0 || ps.radii.count == 0 {
            return Err(CliError::Config(
                "power-savings experiment needs nodes, seeds, and radii".into(),
            ));
        }
        if ps.correlations.is_empty() || ps.prior_vars.is_empty() {
            return Err(CliError::Config(
                "power-savings experiment needs at least one correlation and prior variance"
                    .into(),
            ));
        }
        if !(0.0..=1.0).contains(&ps.target_mix) {
            return Err(CliError::Config(format!(
                "target_mix must lie in [0, 1], got {}",
                ps.target_mix
            )));
        }
        if !(ps.radii.start >= 0.0) || !(ps.radii.stop >= ps.radii.start) {
            return Err(CliError::Config(format!(
                "radii range [{}, {}] must be nonnegative and ordered",
                ps.radii.start, ps.radii.stop
            )));
        }
        Ok(())
    }
}

/// Which collaboration pattern to build over the instance's sensors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    #[default]
    Distributed,
    FullyConnected,
    Cycle {
        k: usize,
    },
    /// Geometric links between nodes within `radius` of each other.
    Geometric {
        radius: f64,
    },
    /// Explicit 0/1 adjacency rows.
    Explicit {
        adjacency: Vec<Vec<u8>>,
    },
}

impl TopologySpec {
    pub fn resolve(&self, positions: &[[f64; 2]]) -> cohest_core::Result<Topology> {
        let n = positions.len();
        match self {
            TopologySpec::Distributed => Topology::distributed(n),
            TopologySpec::FullyConnected => Topology::fully_connected(n),
            TopologySpec::Cycle { k } => Topology::cycle(n, *k),
            TopologySpec::Geometric { radius } => Topology::random_geometric(positions, *radius),
            TopologySpec::Explicit { adjacency } => {
                if adjacency.len() != n || adjacency.iter().any(|row| row.len() != n) {
                    return Err(cohest_core::Error::DimensionMismatch {
                        context: "explicit adjacency",
                        expected: n,
                        got: adjacency.len(),
                    });
                }
                Topology::from_adjacency(n, |i, j| adjacency[i][j] != 0)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub tradeoff: TradeoffConfig,
    pub power_savings: PowerSavingsConfig,
}

/// Log-spaced power grid for the tradeoff sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TradeoffConfig {
    pub power_min: f64,
    pub power_max: f64,
    pub points: usize,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            power_min: 1e-3,
            power_max: 1e3,
            points: 25,
        }
    }
}

impl TradeoffConfig {
    pub fn power_grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.power_min];
        }
        let ratio = self.power_max / self.power_min;
        (0..self.points)
            .map(|i| self.power_min * ratio.powf(i as f64 / (self.points - 1) as f64))
            .collect()
    }
}

/// Inclusive linear grid of geometric radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiiSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for RadiiSpec {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.5,
            count: 16,
        }
    }
}

impl RadiiSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

/// The geometric-collaboration experiment: how much transmit power do
/// growing collaboration radii save at a fixed distortion target, compared
/// to no collaboration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSavingsConfig {
    pub n: usize,
    pub sigma2: f64,
    pub observation_gain: f64,
    pub mac_noise_var: f64,
    /// Spatial correlation bases of the exponential covariance.
    pub correlations: Vec<f64>,
    pub prior_vars: Vec<f64>,
    pub radii: RadiiSpec,
    /// Independent instance draws per (correlation, prior) cell; instance
    /// seeds run from the base seed upward.
    pub seeds: u64,
    /// Distortion target as a mix between the centralized floor (0) and
    /// the prior variance (1).
    pub target_mix: f64,
}

impl Default for PowerSavingsConfig {
    fn default() -> Self {
        Self {
            n: 50,
            sigma2: 0.5,
            observation_gain: 1.0,
            mac_noise_var: 1.0,
            correlations: vec![1e-3, 1e-7],
            prior_vars: vec![1.0, 2.0],
            radii: RadiiSpec::default(),
            seeds: 20,
            target_mix: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub root_rel_width: f64,
    pub newton_steps: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            root_rel_width: t.root_rel_width,
            newton_steps: t.newton_steps,
        }
    }
}

impl ToleranceConfig {
    pub fn to_solver(&self) -> Tolerances {
        Tolerances {
            root_rel_width: self.root_rel_width,
            newton_steps: self.newton_steps,
            ..Tolerances::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: Config = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_fail_parsing() {
        assert!(serde_json::from_str::<Config>(r#"{"experiments": {}}"#).is_err());
        assert!(
            serde_json::from_str::<Config>(r#"{"experiment": {"tradeoff": {"pts": 3}}}"#)
                .is_err()
        );
    }

    #[test]
    fn partial_configs_fill_in_defaults() {
        let cfg: Config =
            serde_json::from_str(r#"{"experiment": {"tradeoff": {"points": 3}}}"#).unwrap();
        assert_eq!(cfg.experiment.tradeoff.points, 3);
        assert_eq!(cfg.experiment.tradeoff.power_min, 1e-3);
        assert_eq!(cfg.instance, InstanceSpec::default());
    }

    #[test]
    fn grids_hit_their_endpoints() {
        let grid = TradeoffConfig::default().power_grid();
        assert_eq!(grid.len(), 25);
        assert!((grid[0] - 1e-3).abs() < 1e-18);
        assert!((grid[24] - 1e3).abs() < 1e-9);

        let radii = RadiiSpec::default().values();
        assert_eq!(radii.len(), 16);
        assert_eq!(radii[0], 0.0);
        assert!((radii[15] - 1.5).abs() < 1e-12);
        assert!((radii[3] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn semantic_validation_catches_bad_ranges() {
        let mut cfg = Config::default();
        cfg.experiment.tradeoff.power_min = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = Config::default();
        cfg.experiment.power_savings.target_mix = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn explicit_topology_is_validated_against_positions() {
        let spec = TopologySpec::Explicit {
            adjacency: vec![vec![1, 0], vec![1, 1]],
        };
        let positions = [[0.1, 0.1], [0.2, 0.2]];
        let topo = spec.resolve(&positions).unwrap();
        assert!(topo.contains(1, 0));
        assert!(!topo.contains(0, 1));

        let wrong = TopologySpec::Explicit {
            adjacency: vec![vec![1]],
        };
        assert!(wrong.resolve(&positions).is_err());
    }
}
