//! TOML run configuration.
//!
//! Sections: `[model]`, `[surface_tensions]`, `[numerics]`, `[mobilities]`,
//! `[initial]`, and the study sections `[cusp_sweep]` and `[compare]`.
//! Every key is optional except the three surface tensions; unknown keys are
//! rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coefficients::Consistency;
use crate::energy::PotentialMode;
use crate::experiments::{CompareSetup, CuspSetup};
use crate::params::{
    validate, Mobilities, ModelKind, ModelSpec, NumericalParams, PotentialParams, SurfaceTensions, ValidationReport,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(ValidationReport),
    #[error("invalid configuration: {0}")]
    Other(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    #[default]
    Degenerate,
    DegenerateMatching,
    NonDegenerate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientName {
    #[default]
    Consistent,
    Inconsistent,
}

impl From<CoefficientName> for Consistency {
    fn from(c: CoefficientName) -> Self {
        match c {
            CoefficientName::Consistent => Consistency::Consistent,
            CoefficientName::Inconsistent => Consistency::Inconsistent,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialName {
    Natural,
    #[default]
    Consistent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: KindName,
    /// Degenerate model only.
    pub coefficients: CoefficientName,
    /// Concentration energies only.
    pub potential: PotentialName,
    /// Cubic cross weights; defaults to the capillary coefficients.
    pub cross_weights: Option<[f64; 3]>,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionSection {
    pub sigma12: f64,
    pub sigma13: f64,
    pub sigma23: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub epsilon: f64,
    /// Defaults to `3 + epsilon`.
    pub alpha: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub equilibrium_tol: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Defaults to a model-dependent multiple of `max sigma / epsilon`.
    pub stabilization: Option<f64>,
    pub output_every: usize,
    pub max_halvings: u32,
    pub blowup_threshold: f64,
    pub dealias: bool,
    /// Treat reaching `t_end` before equilibrium as a failure.
    pub require_equilibrium: bool,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = NumericalParams::<f64>::with_epsilon(0.05);
        Self {
            epsilon: n.epsilon,
            alpha: None,
            dt: n.dt,
            t_end: n.t_end,
            equilibrium_tol: n.equilibrium_tol,
            nx: n.nx,
            ny: n.ny,
            lx: n.lx,
            ly: n.ly,
            stabilization: None,
            output_every: n.output_every,
            max_halvings: n.max_halvings,
            blowup_threshold: n.blowup_threshold,
            dealias: false,
            require_equilibrium: false,
        }
    }
}

impl NumericsSection {
    pub fn params(&self) -> NumericalParams<f64> {
        NumericalParams {
            epsilon: self.epsilon,
            alpha: self.alpha.unwrap_or(3.0 + self.epsilon),
            dt: self.dt,
            t_end: self.t_end,
            equilibrium_tol: self.equilibrium_tol,
            nx: self.nx,
            ny: self.ny,
            lx: self.lx,
            ly: self.ly,
            stabilization: self.stabilization,
            output_every: self.output_every,
            max_halvings: self.max_halvings,
            blowup_threshold: self.blowup_threshold,
            dealias: self.dealias,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilitySection {
    pub m1: f64,
    pub m2: f64,
    pub m0: f64,
}

impl Default for MobilitySection {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            m0: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialShape {
    /// Disk of phase 3 on a flat interface between phases 1 and 2.
    #[default]
    Disk,
    /// Two flat interfaces between phases 1 and 2, third phase absent.
    Strip,
    /// Smooth random labels.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub shape: InitialShape,
    pub seed: u64,
    /// Strip only: size of the perturbation of `psi = 1`.
    pub perturbation: f64,
    pub interface_y: f64,
    pub disk_center: [f64; 2],
    pub disk_radius: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            shape: InitialShape::Disk,
            seed: 7,
            perturbation: 1e-3,
            interface_y: 0.5,
            disk_center: [0.5, 0.5],
            disk_radius: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CuspSweepSection {
    pub ratios: Vec<f64>,
    pub coefficients: CoefficientName,
    /// Interface widths for the robustness table; empty to skip it.
    pub epsilons: Vec<f64>,
    /// Ratio at which the robustness table is computed.
    pub robustness_ratio: f64,
}

impl Default for CuspSweepSection {
    fn default() -> Self {
        Self {
            ratios: vec![1.5, 2.0, 3.0, 4.0],
            coefficients: CoefficientName::Inconsistent,
            epsilons: Vec::new(),
            robustness_ratio: 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Label model with the concentration energy vs the concentration model.
    #[default]
    Matching,
    /// Label model with consistent coefficients vs the concentration model.
    Consistent,
    /// The concentration model against itself.
    Identical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub pairing: Pairing,
    /// Grid override for the second model (must match to be valid).
    pub second_nx: Option<usize>,
    pub second_ny: Option<usize>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            pairing: Pairing::Matching,
            second_nx: None,
            second_ny: None,
        }
    }
}

/// A whole configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: ModelSection,
    pub surface_tensions: TensionSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub mobilities: MobilitySection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub cusp_sweep: CuspSweepSection,
    #[serde(default)]
    pub compare: CompareSection,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The configuration with every default filled in, as TOML.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn sigmas(&self) -> SurfaceTensions<f64> {
        let s = &self.surface_tensions;
        SurfaceTensions::new(s.sigma12, s.sigma13, s.sigma23)
    }

    fn potential(&self) -> PotentialMode<f64> {
        match self.model.potential {
            PotentialName::Natural => PotentialMode::Natural,
            PotentialName::Consistent => PotentialMode::Consistent(PotentialParams {
                sigma: self
                    .model
                    .cross_weights
                    .unwrap_or_else(|| self.sigmas().capillary_raw()),
                lambda: self.model.lambda,
            }),
        }
    }

    /// The single-run model, validated.
    pub fn model_spec(&self) -> Result<ModelSpec<f64>, ConfigError> {
        let kind = match self.model.kind {
            KindName::Degenerate => ModelKind::Degenerate(self.model.coefficients.into()),
            KindName::DegenerateMatching => ModelKind::DegenerateMatching(self.potential()),
            KindName::NonDegenerate => ModelKind::NonDegenerate(self.potential()),
        };
        let m = &self.mobilities;
        let spec = ModelSpec {
            kind,
            sigmas: self.sigmas(),
            numerics: self.numerics.params(),
            mobilities: Mobilities::new(m.m1, m.m2, m.m0),
        };
        let report = validate(&spec);
        if report.is_valid() {
            Ok(spec)
        } else {
            Err(ConfigError::Invalid(report))
        }
    }

    /// Nucleation setup at the configured `epsilon`; the ratio sets
    /// `sigma12` while `sigma13 = sigma23 = 1`.
    pub fn cusp_setup(&self) -> Result<CuspSetup<f64>, ConfigError> {
        let n = self.numerics.params();
        let setup = CuspSetup {
            numerics: n,
            alpha_offset: self.numerics.alpha.map(|a| a - 3.0 - n.epsilon),
            mobilities: Mobilities::new(self.mobilities.m1, self.mobilities.m2, self.mobilities.m0),
            perturbation: self.initial.perturbation,
            seed: self.initial.seed,
            require_equilibrium: self.numerics.require_equilibrium,
        };
        let sweep = &self.cusp_sweep;
        if sweep.ratios.is_empty() {
            return Err(ConfigError::Other("cusp_sweep.ratios is empty".into()));
        }
        let consistency: Consistency = sweep.coefficients.into();
        for &r in sweep.ratios.iter().chain(std::iter::once(&sweep.robustness_ratio)) {
            let report = validate(&setup.spec(r, consistency));
            if !report.is_valid() {
                return Err(ConfigError::Invalid(report));
            }
        }
        if sweep.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(ConfigError::Other("cusp_sweep.epsilons must be positive".into()));
        }
        Ok(setup)
    }

    /// The comparison setup and the two model specs.
    pub fn compare_setup(&self) -> Result<(CompareSetup<f64>, ModelSpec<f64>, ModelSpec<f64>), ConfigError> {
        let i = &self.initial;
        let setup = CompareSetup {
            numerics: self.numerics.params(),
            m0: self.mobilities.m0,
            interface_y: i.interface_y,
            disk_center: (i.disk_center[0], i.disk_center[1]),
            disk_radius: i.disk_radius,
        };
        let first_check = validate(&setup.concentration_spec());
        if !first_check.is_valid() {
            return Err(ConfigError::Invalid(first_check));
        }
        let first = match self.compare.pairing {
            Pairing::Matching => setup.matching_spec(),
            Pairing::Consistent => setup.consistent_spec(),
            Pairing::Identical => setup.concentration_spec(),
        };
        let mut second = setup.concentration_spec();
        if let Some(nx) = self.compare.second_nx {
            second.numerics.nx = nx;
        }
        if let Some(ny) = self.compare.second_ny {
            second.numerics.ny = ny;
        }
        for s in [&first, &second] {
            let report = validate(s);
            if !report.is_valid() {
                return Err(ConfigError::Invalid(report));
            }
        }
        if (first.numerics.nx, first.numerics.ny) != (second.numerics.nx, second.numerics.ny) {
            return Err(ConfigError::Other(format!(
                "compared models must share a grid: {}x{} vs {}x{}",
                first.numerics.nx, first.numerics.ny, second.numerics.nx, second.numerics.ny
            )));
        }
        Ok((setup, first, second))
    }
}
