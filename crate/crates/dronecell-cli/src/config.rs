//! Strict experiment configs: TOML in, unknown keys rejected, every error
//! names the offending key. The seed never lives in a file; it arrives on
//! the command line so no run can pick one up implicitly.

use crate::error::CliError;
use dronecell::dist::ScalarDistribution;
use dronecell::mobility::MobilityModelSpec;
use dronecell::rate::ChannelParams;
use dronecell::validate::ValidationConfig;
use serde::{Deserialize, Serialize};

/// The experiment selector, spelled exactly as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KindTag {
    #[serde(rename = "displacement-dist")]
    DisplacementDist,
    #[serde(rename = "density-profile")]
    DensityProfile,
    #[serde(rename = "theorem1-check")]
    OrderingCheck,
    #[serde(rename = "average-rate")]
    AverageRate,
    #[serde(rename = "session-rate")]
    SessionRate,
    #[serde(rename = "validate-all")]
    ValidateAll,
}

impl KindTag {
    pub fn token(self) -> &'static str {
        match self {
            KindTag::DisplacementDist => "displacement-dist",
            KindTag::DensityProfile => "density-profile",
            KindTag::OrderingCheck => "theorem1-check",
            KindTag::AverageRate => "average-rate",
            KindTag::SessionRate => "session-rate",
            KindTag::ValidateAll => "validate-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Sl,
    Rs,
    Rw,
    Rwp,
}

impl ModelName {
    pub fn token(self) -> &'static str {
        match self {
            ModelName::Sl => "sl",
            ModelName::Rs => "rs",
            ModelName::Rw => "rw",
            ModelName::Rwp => "rwp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Rayleigh,
    Exponential,
}

/// A scalar law given by its mean, the way the scenario tables quote them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub law: LawKind,
    /// Mean of the law: meters for flights, seconds for hovers.
    pub mean: f64,
}

impl LawConfig {
    fn build(&self, path: &str) -> Result<ScalarDistribution, CliError> {
        if !(self.mean.is_finite() && self.mean > 0.0) {
            return Err(CliError::Usage(format!(
                "{path}.mean: must be positive and finite, got {}",
                self.mean
            )));
        }
        let law = match self.law {
            LawKind::Rayleigh => ScalarDistribution::rayleigh_from_mean(self.mean),
            LawKind::Exponential => ScalarDistribution::exponential(self.mean),
        };
        law.map_err(|e| CliError::Usage(format!("{path}: {e}")))
    }
}

fn default_speed() -> f64 {
    12.5
}

fn default_flight() -> LawConfig {
    LawConfig { law: LawKind::Rayleigh, mean: 500.0 }
}

fn default_hover() -> Option<LawConfig> {
    Some(LawConfig { law: LawKind::Exponential, mean: 5.0 })
}

fn all_models() -> Vec<ModelName> {
    vec![ModelName::Sl, ModelName::Rs, ModelName::Rw, ModelName::Rwp]
}

/// Shared mobility scenario. Defaults reproduce the headline setup:
/// v = 12.5 m/s, Rayleigh flights with mean 500 m, exponential hovers
/// with mean 5 s, all four models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    /// m/s.
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default = "all_models")]
    pub models: Vec<ModelName>,
    #[serde(default = "default_flight")]
    pub flight: LawConfig,
    /// Required whenever `models` includes "rwp". A config that omits the
    /// whole mobility table gets the scenario hover law; one that spells
    /// the table out must also spell out the hover law it relies on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hover: Option<LawConfig>,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            speed: default_speed(),
            models: all_models(),
            flight: default_flight(),
            hover: default_hover(),
        }
    }
}

impl MobilityConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(CliError::Usage(format!(
                "mobility.speed: must be positive and finite, got {}",
                self.speed
            )));
        }
        if self.models.is_empty() {
            return Err(CliError::Usage("mobility.models: must name at least one model".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].contains(m) {
                return Err(CliError::Usage(format!(
                    "mobility.models: \"{}\" listed twice",
                    m.token()
                )));
            }
        }
        self.flight.build("mobility.flight")?;
        if self.models.contains(&ModelName::Rwp) {
            match &self.hover {
                None => {
                    return Err(CliError::Usage(
                        "mobility.hover: required when models include \"rwp\"".into(),
                    ))
                }
                Some(h) => {
                    h.build("mobility.hover")?;
                }
            }
        }
        Ok(())
    }

    pub fn flight_law(&self) -> Result<ScalarDistribution, CliError> {
        self.flight.build("mobility.flight")
    }

    /// The hover law, or the scenario default when no model needs one.
    pub fn hover_law(&self) -> Result<ScalarDistribution, CliError> {
        match &self.hover {
            Some(h) => h.build("mobility.hover"),
            None => default_hover().unwrap().build("mobility.hover"),
        }
    }

    pub fn build_models(&self) -> Result<Vec<(ModelName, MobilityModelSpec)>, CliError> {
        let flight = self.flight_law()?;
        self.models
            .iter()
            .map(|&name| {
                let spec = match name {
                    ModelName::Sl => MobilityModelSpec::straight_line(self.speed),
                    ModelName::Rs => MobilityModelSpec::random_stop(self.speed, flight.clone()),
                    ModelName::Rw => MobilityModelSpec::random_walk(self.speed, flight.clone()),
                    ModelName::Rwp => MobilityModelSpec::random_waypoint(
                        self.speed,
                        flight.clone(),
                        self.hover_law()?,
                    ),
                };
                Ok((name, spec.map_err(|e| CliError::Usage(format!("mobility: {e}")))?))
            })
            .collect()
    }
}

fn default_altitude() -> f64 {
    100.0
}

fn default_alpha() -> f64 {
    3.0
}

fn default_shape() -> u32 {
    1
}

fn default_power() -> f64 {
    1.0
}

/// Channel geometry and fading. Defaults: h = 100 m, alpha = 3, Rayleigh
/// fading (shape 1) on both links, unit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Drone altitude above the user plane, m.
    pub altitude: f64,
    /// Path-loss exponent; must exceed 2 for the interference integral to
    /// converge.
    pub alpha: f64,
    /// Nakagami shape of the serving link.
    pub serving_shape: u32,
    /// Nakagami shape of the interfering links.
    pub interferer_shape: u32,
    /// Common transmit power, W.
    pub power: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            altitude: default_altitude(),
            alpha: default_alpha(),
            serving_shape: default_shape(),
            interferer_shape: default_shape(),
            power: default_power(),
        }
    }
}

impl ChannelConfig {
    pub fn build(&self) -> Result<ChannelParams, CliError> {
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(CliError::Usage(format!(
                "channel.alpha: must exceed 2 for the interference integral to converge, got {}",
                self.alpha
            )));
        }
        ChannelParams::new(
            self.altitude,
            self.alpha,
            self.serving_shape,
            self.interferer_shape,
            self.power,
        )
        .map_err(|e| CliError::Usage(format!("channel: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceName {
    /// Nearest drone at every instant.
    Uim,
    /// Drone fixed at association.
    Udm,
}

fn default_service() -> ServiceName {
    ServiceName::Udm
}

impl ServiceName {
    pub fn to_model(self) -> dronecell::density::ServiceModel {
        match self {
            ServiceName::Uim => dronecell::density::ServiceModel::Uim,
            ServiceName::Udm => dronecell::density::ServiceModel::Udm,
        }
    }
}

fn check_grid(path: &str, xs: &[f64], allow_zero: bool) -> Result<(), CliError> {
    if xs.is_empty() {
        return Err(CliError::Usage(format!("{path}: must not be empty")));
    }
    let ok = xs.iter().all(|x| x.is_finite() && (*x > 0.0 || (allow_zero && *x == 0.0)));
    if !ok {
        return Err(CliError::Usage(format!(
            "{path}: entries must be finite and positive, got {xs:?}"
        )));
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Usage(format!(
            "{path}: entries must be strictly increasing, got {xs:?}"
        )));
    }
    Ok(())
}

fn check_count(path: &str, n: u32, floor: u32) -> Result<(), CliError> {
    if n < floor {
        return Err(CliError::Usage(format!("{path}: need at least {floor}, got {n}")));
    }
    Ok(())
}

fn check_positive(path: &str, x: f64) -> Result<(), CliError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Usage(format!("{path}: must be positive and finite, got {x}")));
    }
    Ok(())
}

fn default_trajectories() -> u32 {
    100_000
}

fn default_displacement_bins() -> usize {
    60
}

/// Net-displacement law versus sampled trajectories, one table per
/// (model, time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementDistConfig {
    pub kind: KindTag,
    /// Travel times, s.
    pub times: Vec<f64>,
    #[serde(default = "default_trajectories")]
    pub trajectories: u32,
    #[serde(default = "default_displacement_bins")]
    pub bins: usize,
    #[serde(default)]
    pub mobility: MobilityConfig,
}

impl DisplacementDistConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.mobility.validate()?;
        if self.mobility.models.contains(&ModelName::Sl) {
            return Err(CliError::Usage(
                "mobility.models: straight-line displacement is the point mass at v*t; \
                 displacement-dist supports rs, rw, rwp"
                    .into(),
            ));
        }
        check_grid("times", &self.times, false)?;
        check_count("trajectories", self.trajectories, 100)?;
        if self.bins < 4 {
            return Err(CliError::Usage(format!("bins: need at least 4, got {}", self.bins)));
        }
        Ok(())
    }
}

fn default_profile_lambda0() -> f64 {
    1e-3
}

fn default_realizations() -> u32 {
    20_000
}

fn default_profile_bins() -> usize {
    50
}

fn default_initial_distance() -> f64 {
    500.0
}

/// Analytic interferer intensity under pinned service against the
/// brute-force displaced-process histogram, one table per (model, time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityProfileConfig {
    pub kind: KindTag,
    /// Serving distance at association, m.
    #[serde(default = "default_initial_distance")]
    pub initial_distance: f64,
    /// Ambient intensity of the sampled field, per m^2. The tables are
    /// normalized by it, so it only sets the Monte Carlo noise floor.
    #[serde(default = "default_profile_lambda0")]
    pub lambda0: f64,
    /// Times since association, s.
    pub times: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: u32,
    #[serde(default = "default_profile_bins")]
    pub bins: usize,
    #[serde(default)]
    pub mobility: MobilityConfig,
}

impl DensityProfileConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.mobility.validate()?;
        if !(self.initial_distance.is_finite() && self.initial_distance >= 0.0) {
            return Err(CliError::Usage(format!(
                "initial_distance: must be nonnegative and finite, got {}",
                self.initial_distance
            )));
        }
        check_positive("lambda0", self.lambda0)?;
        check_grid("times", &self.times, false)?;
        check_count("realizations", self.realizations, 1)?;
        if self.bins < 4 {
            return Err(CliError::Usage(format!("bins: need at least 4, got {}", self.bins)));
        }
        Ok(())
    }
}

fn default_rate_lambda0() -> f64 {
    1e-6
}

fn default_ordering_distances() -> Vec<f64> {
    vec![250.0, 500.0, 1000.0]
}

/// Expected interferer counts over the reachable disc, straight-line
/// flight against every other model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingCheckConfig {
    pub kind: KindTag,
    /// Serving distances at association, m.
    #[serde(default = "default_ordering_distances")]
    pub initial_distances: Vec<f64>,
    /// Times since association, s.
    pub times: Vec<f64>,
    /// Ambient intensity, per m^2; a pure scale on the reported measures.
    #[serde(default = "default_rate_lambda0")]
    pub lambda0: f64,
    #[serde(default)]
    pub mobility: MobilityConfig,
}

impl OrderingCheckConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.mobility.validate()?;
        if !self.mobility.models.contains(&ModelName::Sl) || self.mobility.models.len() < 2 {
            return Err(CliError::Usage(
                "mobility.models: the ordering table compares \"sl\" against at least one \
                 other model; include \"sl\" and one more"
                    .into(),
            ));
        }
        check_grid("initial_distances", &self.initial_distances, false)?;
        check_grid("times", &self.times, false)?;
        check_positive("lambda0", self.lambda0)
    }
}

/// Ergodic rate R(t) per model over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageRateConfig {
    pub kind: KindTag,
    /// Times since association, s.
    pub times: Vec<f64>,
    #[serde(default = "default_service")]
    pub service: ServiceName,
    /// Interferer field intensity, per m^2.
    #[serde(default = "default_rate_lambda0")]
    pub lambda0: f64,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub mobility: MobilityConfig,
}

impl AverageRateConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.mobility.validate()?;
        self.channel.build()?;
        check_positive("lambda0", self.lambda0)?;
        check_grid("times", &self.times, true)
    }
}

/// Session-averaged rate SR(T) per model over a grid of session lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRateConfig {
    pub kind: KindTag,
    /// Session lengths, s.
    pub session_lengths: Vec<f64>,
    #[serde(default = "default_service")]
    pub service: ServiceName,
    /// Interferer field intensity, per m^2.
    #[serde(default = "default_rate_lambda0")]
    pub lambda0: f64,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub mobility: MobilityConfig,
}

impl SessionRateConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.mobility.validate()?;
        self.channel.build()?;
        check_positive("lambda0", self.lambda0)?;
        check_grid("session_lengths", &self.session_lengths, false)
    }
}

/// Scale knobs for the full validation sweep. The physical scenario is
/// pinned inside the checks; only sample counts and grids are tunable, so
/// a thinned config still exercises identical gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub displacement_samples: u32,
    pub displacement_times: Vec<f64>,
    pub fit_time: f64,
    pub density_realizations: u32,
    pub density_times: Vec<f64>,
    pub density_bins: usize,
    pub closure_samples: u32,
    pub dispersion_realizations: u32,
    pub ordering_initial_distances: Vec<f64>,
    pub ordering_times: Vec<f64>,
    pub rate_times: Vec<f64>,
    pub rate_realizations: u32,
    pub rate_window: f64,
    pub session_length: f64,
}

impl ScaleConfig {
    pub fn to_validation(&self, seed: u64) -> ValidationConfig {
        ValidationConfig {
            seed,
            displacement_samples: self.displacement_samples,
            displacement_times: self.displacement_times.clone(),
            fit_time: self.fit_time,
            density_realizations: self.density_realizations,
            density_times: self.density_times.clone(),
            density_bins: self.density_bins,
            closure_samples: self.closure_samples,
            dispersion_realizations: self.dispersion_realizations,
            ordering_u0: self.ordering_initial_distances.clone(),
            ordering_times: self.ordering_times.clone(),
            rate_times: self.rate_times.clone(),
            rate_realizations: self.rate_realizations,
            rate_window: self.rate_window,
            session_length: self.session_length,
        }
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        let v = ValidationConfig::default();
        Self {
            displacement_samples: v.displacement_samples,
            displacement_times: v.displacement_times,
            fit_time: v.fit_time,
            density_realizations: v.density_realizations,
            density_times: v.density_times,
            density_bins: v.density_bins,
            closure_samples: v.closure_samples,
            dispersion_realizations: v.dispersion_realizations,
            ordering_initial_distances: v.ordering_u0,
            ordering_times: v.ordering_times,
            rate_times: v.rate_times,
            rate_realizations: v.rate_realizations,
            rate_window: v.rate_window,
            session_length: v.session_length,
        }
    }
}

/// Every analytic law against its oracle, reported as a pass/fail table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateAllConfig {
    pub kind: KindTag,
    #[serde(default)]
    pub scale: ScaleConfig,
}

impl ValidateAllConfig {
    fn validate(&self) -> Result<(), CliError> {
        // The seed does not affect structural validity.
        self.scale
            .to_validation(0)
            .validate()
            .map_err(|e| CliError::Usage(format!("scale: {e}")))
    }
}

/// One parsed experiment file.
#[derive(Debug, Clone, PartialEq)]
pub enum FileConfig {
    DisplacementDist(DisplacementDistConfig),
    DensityProfile(DensityProfileConfig),
    OrderingCheck(OrderingCheckConfig),
    AverageRate(AverageRateConfig),
    SessionRate(SessionRateConfig),
    ValidateAll(ValidateAllConfig),
}

/// First pass over a document: just the selector, everything else ignored
/// until the kind-specific parse applies its strict schema.
#[derive(Deserialize)]
struct KindProbe {
    kind: KindTag,
}

fn parse_strict<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

impl FileConfig {
    pub fn kind(&self) -> KindTag {
        match self {
            FileConfig::DisplacementDist(c) => c.kind,
            FileConfig::DensityProfile(c) => c.kind,
            FileConfig::OrderingCheck(c) => c.kind,
            FileConfig::AverageRate(c) => c.kind,
            FileConfig::SessionRate(c) => c.kind,
            FileConfig::ValidateAll(c) => c.kind,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let probe: KindProbe =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        Ok(match probe.kind {
            KindTag::DisplacementDist => FileConfig::DisplacementDist(parse_strict(text)?),
            KindTag::DensityProfile => FileConfig::DensityProfile(parse_strict(text)?),
            KindTag::OrderingCheck => FileConfig::OrderingCheck(parse_strict(text)?),
            KindTag::AverageRate => FileConfig::AverageRate(parse_strict(text)?),
            KindTag::SessionRate => FileConfig::SessionRate(parse_strict(text)?),
            KindTag::ValidateAll => FileConfig::ValidateAll(parse_strict(text)?),
        })
    }

    pub fn emit(&self) -> Result<String, CliError> {
        let emitted = match self {
            FileConfig::DisplacementDist(c) => toml::to_string_pretty(c),
            FileConfig::DensityProfile(c) => toml::to_string_pretty(c),
            FileConfig::OrderingCheck(c) => toml::to_string_pretty(c),
            FileConfig::AverageRate(c) => toml::to_string_pretty(c),
            FileConfig::SessionRate(c) => toml::to_string_pretty(c),
            FileConfig::ValidateAll(c) => toml::to_string_pretty(c),
        };
        emitted.map_err(|e| CliError::Usage(format!("config serialization: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            FileConfig::DisplacementDist(c) => c.validate(),
            FileConfig::DensityProfile(c) => c.validate(),
            FileConfig::OrderingCheck(c) => c.validate(),
            FileConfig::AverageRate(c) => c.validate(),
            FileConfig::SessionRate(c) => c.validate(),
            FileConfig::ValidateAll(c) => c.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(kind: &str, extra: &str) -> String {
        format!("kind = \"{kind}\"\n{extra}\n")
    }

    #[test]
    fn minimal_docs_parse_with_scenario_defaults() {
        let cfg = FileConfig::parse(&minimal("average-rate", "times = [0.0, 40.0]")).unwrap();
        cfg.validate().unwrap();
        let FileConfig::AverageRate(c) = cfg else { panic!("wrong kind") };
        assert_eq!(c.lambda0, 1e-6);
        assert_eq!(c.channel.alpha, 3.0);
        assert_eq!(c.channel.altitude, 100.0);
        assert_eq!(c.mobility.speed, 12.5);
        assert_eq!(c.mobility.models.len(), 4);
        assert_eq!(c.service, ServiceName::Udm);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = FileConfig::parse(&minimal("average-rate", "times = [1.0]\nfoo = 3"))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("foo"), "error should name the key: {msg}");

        let err = FileConfig::parse(&minimal(
            "density-profile",
            "times = [20.0]\n[mobility]\nspead = 2.0",
        ))
        .unwrap_err();
        assert!(err.to_string().contains("spead"), "{err}");
    }

    #[test]
    fn missing_kind_is_an_error() {
        let err = FileConfig::parse("times = [1.0]\n").unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
    }

    #[test]
    fn small_alpha_is_rejected_with_the_key_path() {
        let text = minimal("average-rate", "times = [1.0]\n[channel]\nalpha = 1.5");
        let cfg = FileConfig::parse(&text).unwrap();
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("channel.alpha") && msg.contains("must exceed 2"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let cfg = FileConfig::parse(&minimal("average-rate", "times = []")).unwrap();
        assert!(cfg.validate().is_err());

        let cfg = FileConfig::parse(&minimal("session-rate", "session_lengths = [30.0, 30.0]"))
            .unwrap();
        assert!(cfg.validate().is_err());

        // Rates are defined at t = 0; session lengths are durations and
        // must be strictly positive.
        let cfg = FileConfig::parse(&minimal("session-rate", "session_lengths = [0.0, 30.0]"))
            .unwrap();
        assert!(cfg.validate().is_err());
        let cfg = FileConfig::parse(&minimal("average-rate", "times = [0.0, 30.0]")).unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn displacement_dist_rejects_the_degenerate_model() {
        let text = minimal(
            "displacement-dist",
            "times = [50.0]\n[mobility]\nmodels = [\"sl\", \"rw\"]",
        );
        let err = FileConfig::parse(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("point mass"), "{err}");
    }

    #[test]
    fn waypoint_model_requires_a_hover_law() {
        let text = minimal(
            "displacement-dist",
            "times = [50.0]\n[mobility]\nmodels = [\"rwp\"]\nhover = {}",
        );
        // An empty inline hover table is missing its fields.
        assert!(FileConfig::parse(&text).is_err());

        let text = minimal(
            "average-rate",
            "times = [1.0]\n[mobility]\nmodels = [\"rwp\"]\nflight = { law = \"rayleigh\", mean = 500.0 }",
        );
        let cfg = FileConfig::parse(&text).unwrap();
        let FileConfig::AverageRate(ref c) = cfg else { panic!() };
        assert!(c.mobility.hover.is_none());
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("mobility.hover"), "{err}");
    }

    #[test]
    fn kind_mismatch_is_visible_to_the_caller() {
        let cfg = FileConfig::parse(&minimal("average-rate", "times = [1.0]")).unwrap();
        assert_eq!(cfg.kind(), KindTag::AverageRate);
        assert_eq!(cfg.kind().token(), "average-rate");
    }

    #[test]
    fn every_kind_round_trips_through_emit() {
        let docs = [
            minimal("displacement-dist", "times = [50.0, 100.0]\nbins = 24"),
            minimal("density-profile", "times = [20.0]\nrealizations = 500"),
            minimal("theorem1-check", "times = [10.0, 40.0]"),
            minimal("average-rate", "times = [0.0, 20.0]\nservice = \"uim\""),
            minimal("session-rate", "session_lengths = [30.0]\n[channel]\nalpha = 3.5"),
            minimal("validate-all", ""),
        ];
        for doc in docs {
            let cfg = FileConfig::parse(&doc).unwrap();
            let emitted = cfg.emit().unwrap();
            let reparsed = FileConfig::parse(&emitted).unwrap();
            assert_eq!(cfg, reparsed, "round-trip changed the config:\n{emitted}");
        }
    }

    #[test]
    fn validate_all_scale_defaults_match_the_library() {
        let cfg = FileConfig::parse(&minimal("validate-all", "")).unwrap();
        cfg.validate().unwrap();
        let FileConfig::ValidateAll(c) = cfg else { panic!() };
        assert_eq!(c.scale.to_validation(7), ValidationConfig::default());
    }
}
