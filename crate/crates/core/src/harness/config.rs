//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderSpec, Distribution, InteractionSpec};
use crate::error::{MsaError, Result};
use crate::estimators::{EnergyWindow, PairEvent, Quantifier};
use crate::geometry::{Segment, Site2, SubSquare};
use crate::msa::{CountMode, DistantRule, MsaParams};
use crate::operators::{Site, Statistics};
use crate::system::{System, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out when the command line names the experiment.
    #[serde(default)]
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub disorder: DisorderConfig,
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub msa: MsaConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub law: Law,
    /// Cauchy scale.
    pub scale: Option<f64>,
    /// Gaussian standard deviation.
    pub sigma: Option<f64>,
    pub g: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_t_max() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Cauchy,
    Gaussian,
}

impl DisorderConfig {
    pub fn distribution(&self) -> Result<Distribution> {
        let d = match (self.law, self.scale, self.sigma) {
            (Law::Cauchy, Some(scale), None) => Distribution::Cauchy { scale },
            (Law::Gaussian, None, Some(sigma)) => Distribution::Gaussian { sigma },
            (Law::Cauchy, _, _) => return Err(MsaError::Config("cauchy disorder takes `scale` only".into())),
            (Law::Gaussian, _, _) => return Err(MsaError::Config("gaussian disorder takes `sigma` only".into())),
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionConfig {
    pub d: u32,
    /// Values `U` at `x1 - x2 = 0..=d`; overrides `strength`.
    pub profile: Option<Vec<f64>>,
    /// Constant value on the strip.
    pub strength: f64,
    pub statistics: Statistics,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { d: 0, profile: None, strength: 0.0, statistics: Statistics::Fermionic }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeKind {
    Segment,
    Square,
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub kind: VolumeKind,
    /// Centre: one coordinate for segments, two otherwise.
    pub center: Vec<i64>,
    pub radius: i64,
    /// Second square of a pair.
    pub center2: Option<[i64; 2]>,
    pub radius2: Option<i64>,
    /// Conditioned segments `[a, b]`.
    pub frozen: Vec<[i64; 2]>,
    /// Site `u` for propagators and Green's functions; defaults to the centre.
    pub site: Option<Vec<i64>>,
    /// Second site `y` of a Green's function.
    pub target: Option<Vec<i64>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            kind: VolumeKind::Segment,
            center: vec![0],
            radius: 2,
            center2: None,
            radius2: None,
            frozen: Vec::new(),
            site: None,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MsaConfig {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub l0: u64,
    pub m0: f64,
    pub k_max: usize,
    /// Mass used by classifiers.
    pub m: f64,
    /// Mass of the tunneling test on segments.
    pub m_tunnel: f64,
    /// Radius of tunneling segments and of counted sub-squares.
    pub l_small: i64,
    /// Scale whose `L^{-2p}` is the pair target.
    pub l_target: Option<u64>,
    pub count_mode: CountMode,
    pub distant_rule: DistantRule,
    /// Threshold of the near-resonant site scan.
    pub tau: Option<f64>,
}

impl Default for MsaConfig {
    fn default() -> Self {
        let d = MsaParams::default();
        Self {
            p: d.p,
            q: d.q,
            alpha: d.alpha,
            beta: d.beta,
            l0: 256,
            m0: 4.0,
            k_max: 20,
            m: 2.0,
            m_tunnel: 2.0,
            l_small: 1,
            l_target: None,
            count_mode: CountMode::DiagonalPairwiseDistant,
            distant_rule: DistantRule::EightL,
            tau: None,
        }
    }
}

impl MsaConfig {
    pub fn params(&self) -> MsaParams {
        MsaParams { p: self.p, q: self.q, alpha: self.alpha, beta: self.beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyRule {
    Fixed,
    /// Eigenvalue of the second square nearest `energy`, a function of the
    /// conditioned values only.
    FrozenEigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Fixed,
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n: u64,
    pub n_outer: u64,
    pub n_inner: u64,
    pub n_paths: u64,
    pub energy: f64,
    /// Energy interval for pair events and random energies; defaults to the
    /// single point `energy`.
    pub e_lo: Option<f64>,
    pub e_hi: Option<f64>,
    pub e_spacing: Option<f64>,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub quantifier: Quantifier,
    pub event: PairEvent,
    pub energy_rule: EnergyRule,
    pub path_mode: PathMode,
    /// Radius range of the mass fit.
    pub fit: [f64; 2],
    /// Bin edges of the spectral measure: `[lo, hi, bins]`.
    pub bins: Option<(f64, f64, usize)>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            n_outer: 10,
            n_inner: 1000,
            n_paths: 100_000,
            energy: 0.0,
            e_lo: None,
            e_hi: None,
            e_spacing: None,
            r: vec![0.01],
            t: vec![0.1],
            quantifier: Quantifier::ExistsE,
            event: PairEvent::BothSingular,
            energy_rule: EnergyRule::Fixed,
            path_mode: PathMode::Averaged,
            fit: [1.0, 6.0],
            bins: None,
        }
    }
}

impl SamplingConfig {
    pub fn energy_window(&self) -> EnergyWindow {
        EnergyWindow {
            lo: self.e_lo.unwrap_or(self.energy),
            hi: self.e_hi.unwrap_or(self.energy),
            spacing: self.e_spacing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    #[serde(rename = "jsonl", alias = "json-lines")]
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: OutputFormat,
    /// Where `build` writes the matrix dump.
    pub dump: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: None, format: OutputFormat::Csv, dump: None }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| MsaError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MsaError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.system(self.seed)?.validate()?;
        self.msa.params().validate()?;
        self.volume()?;
        self.second_square()?;
        self.frozen()?;
        Ok(())
    }

    pub fn interaction(&self) -> Result<InteractionSpec> {
        let i = &self.interaction;
        match &i.profile {
            Some(p) => InteractionSpec::new(i.d, p.clone()),
            None => Ok(InteractionSpec::constant(i.d, i.strength)),
        }
    }

    /// System whose disorder is keyed by `master_seed`.
    pub fn system(&self, master_seed: u64) -> Result<System> {
        let mut disorder = DisorderSpec::new(self.disorder.distribution()?, self.disorder.g, master_seed);
        disorder.t_max = self.disorder.t_max;
        disorder.validate()?;
        Ok(System::new(disorder, self.interaction()?, self.interaction.statistics))
    }

    pub fn volume(&self) -> Result<Volume> {
        let g = &self.geometry;
        match g.kind {
            VolumeKind::Segment => match g.center.as_slice() {
                [c] => Ok(Volume::Segment { window: Segment::centered(*c, g.radius)? }),
                _ => Err(MsaError::Config("segment centre takes one coordinate".into())),
            },
            VolumeKind::Square => Ok(Volume::Square { square: self.square()? }),
            VolumeKind::Product => {
                let c = self.center2d()?;
                Ok(Volume::Product {
                    a: Segment::centered(c.x1, g.radius)?,
                    b: Segment::centered(c.x2, g.radius)?,
                })
            }
        }
    }

    fn center2d(&self) -> Result<Site2> {
        match self.geometry.center.as_slice() {
            [a, b] => Ok(Site2::new(*a, *b)),
            _ => Err(MsaError::Config("two-particle centre takes two coordinates".into())),
        }
    }

    pub fn square(&self) -> Result<SubSquare> {
        SubSquare::centered(self.center2d()?, self.geometry.radius)
    }

    pub fn second_square(&self) -> Result<Option<SubSquare>> {
        match self.geometry.center2 {
            Some([a, b]) => {
                let r = self.geometry.radius2.unwrap_or(self.geometry.radius);
                Ok(Some(SubSquare::centered(Site2::new(a, b), r)?))
            }
            None => Ok(None),
        }
    }

    pub fn frozen(&self) -> Result<Vec<Segment>> {
        self.geometry.frozen.iter().map(|[a, b]| Segment::new(*a, *b)).collect()
    }

    fn to_site(&self, coords: &[i64]) -> Result<Site> {
        match (self.geometry.kind, coords) {
            (VolumeKind::Segment, [x]) => Ok(Site::Line(*x)),
            (VolumeKind::Square | VolumeKind::Product, [a, b]) => Ok(Site::plane(*a, *b)),
            _ => Err(MsaError::Config(format!("site {coords:?} does not match the volume kind"))),
        }
    }

    pub fn site(&self) -> Result<Site> {
        self.to_site(self.geometry.site.as_deref().unwrap_or(&self.geometry.center))
    }

    pub fn target(&self) -> Result<Site> {
        match &self.geometry.target {
            Some(t) => self.to_site(t),
            None => self.site(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
experiment = "wegner"
seed = 7

[disorder]
law = "cauchy"
scale = 1.0
g = 5.0

[geometry]
kind = "square"
center = [30, 5]
radius = 3
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.disorder.distribution().unwrap(), Distribution::Cauchy { scale: 1.0 });
        assert_eq!(cfg.sampling.n, 1000);
        assert_eq!(cfg.msa.params(), MsaParams::default());
        assert!(matches!(cfg.volume().unwrap(), Volume::Square { .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("radius = 3", "radius = 3\ncolour = 1");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(MsaError::Config(_))));
        let bad = format!("{MINIMAL}\n[sampling]\nsamples = 3\n");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(MsaError::Config(_))));
    }

    #[test]
    fn invalid_sections_are_rejected() {
        let bad = MINIMAL.replace("scale = 1.0", "scale = -1.0");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let bad = MINIMAL.replace("scale = 1.0", "sigma = 1.0");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(MsaError::Config(_))));
        let bad = MINIMAL.replace("center = [30, 5]", "center = [30]");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let bad = format!("{MINIMAL}\n[interaction]\nd = 2\nprofile = [1.0]\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn msa_section_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml(&format!("{MINIMAL}\n[msa]\nbeta = 0.25\nl0 = 64\n")).unwrap();
        assert_eq!(cfg.msa.params().beta, 0.25);
        assert_eq!(cfg.msa.l0, 64);
    }
}
