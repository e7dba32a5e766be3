//! JSON run configuration. `run` flags and `run --config` both end up here.

use std::fs;
use std::path::{Path, PathBuf};

use dimer::qcore::SystemParams;
use dimer::scenarios::{preset, Preset, RunOptions, Scenario, Sweep, ZenoSweep};
use dimer::{NamedState, Observable, RhsVariant, SweepParam};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rhs {
    Derived,
    Published,
}

impl From<Rhs> for RhsVariant {
    fn from(r: Rhs) -> Self {
        match r {
            Rhs::Derived => RhsVariant::Derived,
            Rhs::Published => RhsVariant::Published,
        }
    }
}

/// Parameters of a scenario defined entirely in the config, SI units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub name: String,
    pub initial: String,
    pub omega0: f64,
    #[serde(default)]
    pub delta_l: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Omega", default)]
    pub omega: f64,
    pub gamma: f64,
    pub driven: bool,
    pub horizon: f64,
    pub samples: usize,
}

/// Per-parameter replacements applied on top of the chosen scenario.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_l: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

impl Overrides {
    fn pairs(&self) -> [(SweepParam, Option<f64>); 6] {
        [
            (SweepParam::Omega0, self.omega0),
            (SweepParam::DeltaL, self.delta_l),
            (SweepParam::J, self.j),
            (SweepParam::Omega, self.omega),
            (SweepParam::Gamma, self.gamma),
            (SweepParam::Horizon, self.horizon),
        ]
    }

    pub fn is_empty(&self) -> bool {
        self.pairs().iter().all(|(_, v)| v.is_none())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// `param=v1,v2,...`; values are SI numbers.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let (param, list) =
            text.split_once('=').ok_or_else(|| CliError::Usage(format!("--sweep expects param=v1,v2,..., got `{text}`")))?;
        let param = param.trim().parse::<SweepParam>()?.name().to_string();
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad sweep value `{v}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(CliError::Usage("--sweep needs at least one value".into()));
        }
        Ok(Self { param, values })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomScenario>,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<String>>,
    pub rhs: Rhs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoom: Option<Zoom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

/// A sub-window of the horizon, sampled on its own grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zoom {
    pub start: f64,
    pub duration: f64,
}

/// What a config resolves to. `sweep` names the axis the runs vary along,
/// if there is one.
pub enum Job {
    Trajectories { runs: Vec<Scenario<f64>>, sweep: Option<Sweep<f64>> },
    Zeno(ZenoSweep<f64>),
}

impl RunConfig {
    pub fn for_scenario(name: &str, out: impl Into<PathBuf>) -> Self {
        let defaults = RunOptions::<f64>::default();
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: Some(name.to_string()),
            custom: None,
            overrides: Overrides::default(),
            rel_tol: defaults.rel_tol,
            abs_tol: defaults.abs_tol,
            out: out.into(),
            observables: None,
            rhs: Rhs::Derived,
            sweep: None,
            zoom: None,
            jobs: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Other(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.scenario.is_some() == self.custom.is_some() {
            return Err(CliError::Usage("exactly one of `scenario` and `custom` must be set".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("jobs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn options(&self) -> RunOptions<f64> {
        RunOptions { variant: self.rhs.into(), rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_step: None }
    }

    pub fn resolve(&self) -> Result<Job, CliError> {
        self.validate()?;
        let base = match (&self.scenario, &self.custom) {
            (Some(name), None) => match preset::<f64>(name)? {
                Preset::Trajectory(s) => s,
                Preset::Zeno(z) => return self.resolve_zeno(z),
            },
            (None, Some(c)) => custom_scenario(c)?,
            _ => unreachable!("validated"),
        };
        let mut s = base;
        for (param, value) in self.overrides.pairs() {
            if let Some(v) = value {
                s = s.with_param(param, v)?;
            }
        }
        if let Some(names) = &self.observables {
            s.observables = names.iter().map(|n| n.parse::<Observable>()).collect::<Result<_, _>>()?;
        }
        if let Some(sw) = &self.sweep {
            s.sweep = Some(Sweep { param: sw.param.parse()?, values: sw.values.clone() });
        }
        if let Some(z) = self.zoom {
            s = s.zoomed(z.start, z.duration)?;
        }
        s.validate()?;
        Ok(Job::Trajectories { runs: s.expand()?, sweep: s.sweep.clone() })
    }

    fn resolve_zeno(&self, mut z: ZenoSweep<f64>) -> Result<Job, CliError> {
        if self.sweep.is_some() || self.observables.is_some() || self.zoom.is_some() {
            return Err(CliError::Usage(format!("`{}` takes no sweep, zoom or observable selection", z.name)));
        }
        let o = &self.overrides;
        if o.delta_l.is_some() || o.omega.is_some() {
            return Err(CliError::Usage("the Zeno sweep is undriven; delta_l and Omega do not apply".into()));
        }
        z.params.omega0 = o.omega0.unwrap_or(z.params.omega0);
        z.params.j = o.j.unwrap_or(z.params.j);
        z.params.gamma = o.gamma.unwrap_or(z.params.gamma);
        z.total = o.horizon.unwrap_or(z.total);
        z.params.validate()?;
        Ok(Job::Zeno(z))
    }
}

fn custom_scenario(c: &CustomScenario) -> Result<Scenario<f64>, CliError> {
    let initial: NamedState = c.initial.parse()?;
    let params = if c.driven {
        SystemParams::driven(c.omega0, c.delta_l, c.j, c.omega, c.gamma)
    } else {
        if c.omega != 0.0 || c.delta_l != 0.0 {
            return Err(CliError::Usage("an undriven custom scenario needs Omega = 0 and delta_l = 0".into()));
        }
        SystemParams::free(c.omega0, c.j, c.gamma)
    };
    let observables = if c.driven {
        Observable::ALL.iter().copied().filter(|o| !o.frame_dependent()).collect()
    } else {
        Observable::ALL.to_vec()
    };
    let s = Scenario {
        name: c.name.clone(),
        initial,
        params,
        horizon: c.horizon,
        samples: c.samples,
        window_start: 0.0,
        observables,
        field_off: None,
        sweep: None,
    };
    s.validate()?;
    Ok(s)
}
