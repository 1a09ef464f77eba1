//! TOML run configuration.
//!
//! ```toml
//! system = "eqnsm"          # eqnsm | nsmo | species
//! t_end = 0.5
//!
//! [grid]
//! d = 2
//! n = 64
//!
//! [params]                  # mu, sigma, c, eps, s, s_prime
//! eps = 0.1
//!
//! [ladder]                  # sweeps only
//! eps = [0.1, 0.05, 0.025, 0.0125]
//! direct_limit = true
//!
//! [initial]
//! seed = 7
//! energy = 0.01
//! current = "zero"          # zero | ohm
//! recipe = { kind = "random-solenoidal", kmax = 8.0, decay = 2.0 }
//!
//! [stepper]                 # dt, scheme, cfl_safety, m, layer_dt0, layer_steps, ...
//! dt = 5e-4
//!
//! [diagnostics]
//! k0s = [2, 4]
//! weight = true
//! ```
//!
//! Every table and key is optional; omitted values take the defaults shown by
//! [`RunSpec::default`].

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::integrator::StepperConfig;
use crate::spectral::{build_grid, Grid};
use crate::systems::{Params, SystemKind};

/// Which system a run integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemChoice {
    Eqnsm,
    Nsmo,
    /// The two-species form; integrated through its exact bulk equivalent.
    Species,
}

impl SystemChoice {
    pub fn kind(self) -> SystemKind {
        match self {
            SystemChoice::Nsmo => SystemKind::Nsmo,
            SystemChoice::Eqnsm | SystemChoice::Species => SystemKind::Eqnsm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { d: 2, n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSpec {
    pub eps: Vec<f64>,
    /// Also integrate the limit system from the shared data.
    pub direct_limit: bool,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            eps: vec![0.1, 0.05, 0.025, 0.0125],
            direct_limit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Split indices for tails and the current-tendency integral.
    pub k0s: Vec<i32>,
    /// Track energies weighted by an envelope built from the initial data.
    pub weight: bool,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            k0s: vec![2, 4],
            weight: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub system: SystemChoice,
    pub t_end: f64,
    pub grid: GridSpec,
    pub params: Params,
    pub ladder: Option<LadderSpec>,
    pub initial: InitialData,
    pub stepper: StepperConfig,
    pub diagnostics: DiagnosticsSpec,
    pub out: Option<PathBuf>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            system: SystemChoice::Eqnsm,
            t_end: 0.5,
            grid: GridSpec::default(),
            params: Params::default(),
            ladder: None,
            initial: InitialData::default(),
            stepper: StepperConfig::default(),
            diagnostics: DiagnosticsSpec::default(),
            out: None,
        }
    }
}

impl RunSpec {
    pub fn grid(&self) -> Result<Grid> {
        build_grid(self.grid.d, self.grid.n)
    }

    /// Checks every precondition that can fail before compute starts.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.d != 2 && g.d != 3 {
            return Err(Error::config("grid.d", format!("must be 2 or 3, got {}", g.d)));
        }
        if g.n % 2 != 0 || g.n < 8 {
            return Err(Error::config("grid.n", format!("must be even and at least 8, got {}", g.n)));
        }
        self.params.validate()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be nonnegative, got {}", self.t_end)));
        }
        let grid = self.grid()?;
        self.stepper.validate(&grid)?;
        if let Some(k) = self.diagnostics.k0s.iter().find(|&&k| k < -1) {
            return Err(Error::config("diagnostics.k0s", format!("split index {k} < -1")));
        }
        if let Some(l) = &self.ladder {
            if l.eps.is_empty() {
                return Err(Error::config("ladder.eps", "must not be empty"));
            }
            for (i, &e) in l.eps.iter().enumerate() {
                if !(e > 0.0 && e <= 1.0) {
                    return Err(Error::config("ladder.eps", format!("entry {i} = {e} must lie in (0, 1]")));
                }
            }
            if let Some(w) = l.eps.windows(2).find(|w| w[1] >= w[0]) {
                return Err(Error::config(
                    "ladder.eps",
                    format!("must be strictly decreasing, but {} follows {}", w[1], w[0]),
                ));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let spec: RunSpec = toml::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn empty_document_gives_defaults() {
        let s = parse_config("").unwrap();
        assert_eq!(s, RunSpec::default());
        assert_eq!((s.grid.d, s.grid.n), (2, 64));
        assert_eq!((s.params.s, s.params.s_prime, s.params.c), (1.6, 1.6, 1.0));
        assert_eq!((s.params.mu, s.params.sigma), (0.1, 1.0));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut s = RunSpec::default();
        s.ladder = Some(LadderSpec::default());
        s.stepper.layer_dt0 = Some(1e-6);
        s.diagnostics.weight = true;
        let back = parse_config(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn preconditions_are_named() {
        let e = parse_config("[params]\ns = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("s > 3/2"), "{e}");
        assert_eq!(field_of(parse_config("[params]\neps = 1.5\n").unwrap_err()), "eps");
        assert_eq!(field_of(parse_config("[grid]\nn = 63\n").unwrap_err()), "grid.n");
        assert_eq!(field_of(parse_config("[ladder]\neps = [0.1, 0.2]\n").unwrap_err()), "ladder.eps");
        assert_eq!(field_of(parse_config("[ladder]\neps = [0.5, 2.0]\n").unwrap_err()), "ladder.eps");
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        assert!(matches!(parse_config("[params]\nnu = 0.1\n"), Err(Error::TomlDe(_))));
        assert!(matches!(parse_config("tend = 1.0\n"), Err(Error::TomlDe(_))));
        assert!(matches!(parse_config("system = \"mhd\"\n"), Err(Error::TomlDe(_))));
    }

    #[test]
    fn recipes_parse() {
        let s = parse_config(
            "[initial]\nrecipe = { kind = \"maxwell-mode\", xi = [1, 2, 0] }\ncurrent = \"ohm\"\n",
        )
        .unwrap();
        assert_eq!(s.initial.recipe, crate::initial::Recipe::MaxwellMode { xi: [1, 2, 0] });
    }
}
