use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use netlearn::asymptotics::{DivergenceProxy, LayeredProfile, ParamSchedule};
use netlearn::game::DEFAULT_ENUMERATION_BUDGET;
use netlearn::montecarlo::SimulationConfig;
use netlearn::network::make_society;
use netlearn::{DirectedNetwork, GameParams, Society, SocietyKind, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Where a single network comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSource {
    File { file: PathBuf },
    Generated { generator: SocietyKind, n: usize },
    Inline(DirectedNetwork),
}

/// Where a society comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SocietySource {
    File { file: PathBuf },
    Generated { kind: SocietyKind, sizes: Vec<usize> },
    Inline(Society),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Least equilibrium by iterated best response from all-zero exits.
    #[default]
    Bottom,
    /// Greatest equilibrium by iterated best response from maximal exits.
    Top,
    /// Both extremal equilibria.
    Both,
    /// Every equilibrium, by brute force.
    Enumerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub method: SolverChoice,
    #[serde(default = "default_budget")]
    pub budget: u128,
}

fn default_budget() -> u128 {
    DEFAULT_ENUMERATION_BUDGET
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { method: SolverChoice::default(), budget: default_budget() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Number of leading Monte Carlo trials written to `trace.csv`.
    #[serde(default)]
    pub trace_trials: u64,
}

/// One experiment, as read from the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub society: Option<SocietySource>,
    pub params: GameParams,
    /// `psi` per population size; keys are sizes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub psi_overrides: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<SimulationConfig>,
    #[serde(default)]
    pub proxy: DivergenceProxy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<LayeredProfile>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A config together with the sources it pulled in.
pub struct Loaded {
    pub config: ExperimentConfig,
    /// Members to work on: the one network, or every society member.
    pub society: Society,
    pub from_society: bool,
    pub schedule: ParamSchedule,
    /// The config file bytes, hashed into the manifest.
    pub raw: Vec<u8>,
}

impl Loaded {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        self.config.tolerances.ok_or_else(|| CliError::Config("this subcommand needs \"tolerances\" in the config".into()))
    }

    pub fn require_society(&self, what: &str) -> Result<(), CliError> {
        if self.from_society {
            Ok(())
        } else {
            Err(CliError::Config(format!("{what} needs a \"society\" rather than a single \"network\"")))
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

fn resolve(base: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        base.join(file)
    }
}

fn single_network(source: &NetworkSource, base: &Path) -> Result<DirectedNetwork, CliError> {
    Ok(match source {
        NetworkSource::File { file } => read_json(&resolve(base, file))?,
        NetworkSource::Generated { generator, n } => make_society(*generator, &[*n])?.networks()[0].clone(),
        NetworkSource::Inline(net) => net.clone(),
    })
}

fn society(source: &SocietySource, base: &Path) -> Result<Society, CliError> {
    Ok(match source {
        SocietySource::File { file } => read_json(&resolve(base, file))?,
        SocietySource::Generated { kind, sizes } => make_society(*kind, sizes)?,
        SocietySource::Inline(s) => s.clone(),
    })
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let raw = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_slice(&raw).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (society, from_society) = match (&config.network, &config.society) {
        (Some(net), None) => {
            let net = single_network(net, base)?;
            (Society::from_networks(SocietyKind::Custom, vec![net])?, false)
        }
        (None, Some(soc)) => (society(soc, base)?, true),
        _ => return Err(CliError::Config("give exactly one of \"network\" and \"society\"".into())),
    };
    let schedule = ParamSchedule { base: config.params, psi_by_n: config.psi_overrides.clone() };
    for &n in schedule.psi_by_n.keys() {
        if !society.sizes().contains(&n) {
            return Err(CliError::Config(format!("psi override for n={n} matches no network size")));
        }
        schedule.at(n)?;
    }
    Ok(Loaded { config, society, from_society, schedule, raw })
}
