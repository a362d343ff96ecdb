//! Experiment configuration: a single JSON document with strict schema
//! (unknown keys rejected, errors carry the field path), defaults for
//! everything, and a canonical serialization so identical experiments
//! hash and diff identically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::FRAC_1_SQRT_2;

use qw_core::defects::DetectionMethod;
use qw_core::lattice::{
    assemble_coin_field, Boundary, CoinField, DefectSpec, Mat2, ModelParams, PerturbationSpec,
    State, Window,
};
use qw_core::spectra::{ClassifyTolerances, SpectralBoundary};

use crate::errors::{CliError, Result};

/// Complex scalar as `[re, im]` in JSON.
pub type ComplexPair = [f64; 2];
/// Spin-space vector: `[component0, component1]`.
pub type Spinor = [ComplexPair; 2];

pub fn complex(pair: ComplexPair) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn default_p() -> f64 {
    FRAC_1_SQRT_2
}

fn default_theta_step() -> f64 {
    0.01
}

fn default_exclusion() -> f64 {
    0.05
}

fn default_circle() -> f64 {
    1e-6
}

fn default_localization() -> f64 {
    0.99
}

fn default_radius() -> usize {
    10
}

fn default_stability() -> f64 {
    1e-6
}

fn default_floor() -> f64 {
    1e-3
}

fn default_l() -> i64 {
    60
}

fn default_steps() -> usize {
    100
}

fn default_dir() -> String {
    "out".to_string()
}

fn default_formats() -> Vec<FormatChoice> {
    vec![FormatChoice::Csv, FormatChoice::Json, FormatChoice::Svg]
}

fn default_spinor() -> Spinor {
    [[FRAC_1_SQRT_2, 0.0], [0.0, FRAC_1_SQRT_2]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            p: default_p(),
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSection {
    pub centers: Vec<i64>,
    #[serde(default)]
    pub beta_prime: f64,
    #[serde(default)]
    pub gamma_prime: f64,
}

/// Replace the coin at one site with an explicit matrix (row-major
/// `a b / c d`). This is how transparent patches are expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinOverrideSection {
    pub site: i64,
    pub a: ComplexPair,
    pub b: ComplexPair,
    pub c: ComplexPair,
    pub d: ComplexPair,
}

impl CoinOverrideSection {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            complex(self.a),
            complex(self.b),
            complex(self.c),
            complex(self.d),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmptySection {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialSection {
    pub amplitude: f64,
    pub rate: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSection {
    None(EmptySection),
    Exponential(ExponentialSection),
}

impl Default for PerturbationSection {
    fn default() -> Self {
        PerturbationSection::None(EmptySection {})
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    pub l: i64,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection { l: default_l() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    Periodic,
    Truncate,
    Padded,
}

impl BoundaryChoice {
    pub fn to_evolution(self) -> Boundary {
        match self {
            BoundaryChoice::Periodic => Boundary::Periodic,
            BoundaryChoice::Truncate => Boundary::Truncate,
            BoundaryChoice::Padded => Boundary::Padded,
        }
    }

    pub fn to_spectral(self) -> Option<SpectralBoundary> {
        match self {
            BoundaryChoice::Periodic => Some(SpectralBoundary::Periodic),
            BoundaryChoice::Truncate => Some(SpectralBoundary::Truncate),
            BoundaryChoice::Padded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SiteDeltaSection {
    pub site: i64,
    pub spinor: Spinor,
}

impl Default for SiteDeltaSection {
    fn default() -> Self {
        SiteDeltaSection {
            site: 0,
            spinor: default_spinor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformOnSetSection {
    pub sites: Vec<i64>,
    pub spinor: Spinor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub lo: i64,
    pub amplitudes: Vec<Spinor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialStateSection {
    SiteDelta(SiteDeltaSection),
    UniformOnSet(UniformOnSetSection),
    Custom(CustomSection),
}

impl Default for InitialStateSection {
    fn default() -> Self {
        InitialStateSection::SiteDelta(SiteDeltaSection::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub circle: f64,
    pub threshold_radius: f64,
    /// Band-edge tolerance for the gap-discrete label; when absent the
    /// boundary-appropriate default applies (tight for periodic, loose
    /// for hard truncation).
    pub band_edge: Option<f64>,
    pub localization: f64,
    pub radius: usize,
}

impl Default for ClassifySection {
    fn default() -> Self {
        ClassifySection {
            circle: default_circle(),
            threshold_radius: default_exclusion(),
            band_edge: None,
            localization: default_localization(),
            radius: default_radius(),
        }
    }
}

impl ClassifySection {
    pub fn to_core(&self, boundary: SpectralBoundary) -> ClassifyTolerances {
        let mut t = ClassifyTolerances::for_boundary(boundary);
        t.circle = self.circle;
        t.threshold_radius = self.threshold_radius;
        if let Some(edge) = self.band_edge {
            t.band_edge = edge;
        }
        t.localization = self.localization;
        t.radius = self.radius;
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    CompactKernel,
    SpectralLocalization,
}

impl MethodChoice {
    pub fn to_core(self) -> DetectionMethod {
        match self {
            MethodChoice::CompactKernel => DetectionMethod::CompactKernel,
            MethodChoice::SpectralLocalization => DetectionMethod::SpectralLocalization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectSection {
    pub method: MethodChoice,
    pub theta_step: f64,
    pub threshold_exclusion: f64,
    /// Kernel-search support `[lo, hi]`; defaults to `[-L, L]`.
    pub support: Option<[i64; 2]>,
    /// Truncation half-width for the spectral route; defaults to `window.l`.
    pub half_width: Option<i64>,
    pub stability_tol: f64,
    /// Known defect phase; when absent it is taken from `defects.gamma_prime`
    /// so planted-defect experiments test the exact candidate eigenvalues.
    pub defect_phase: Option<f64>,
}

impl Default for DetectSection {
    fn default() -> Self {
        DetectSection {
            method: MethodChoice::CompactKernel,
            theta_step: default_theta_step(),
            threshold_exclusion: default_exclusion(),
            support: None,
            half_width: None,
            stability_tol: default_stability(),
            defect_phase: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesSection {
    pub classify: ClassifySection,
    pub detect: DetectSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatChoice {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub formats: Vec<FormatChoice>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

impl OutputSection {
    pub fn wants(&self, format: FormatChoice) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub defects: Option<DefectSection>,
    pub coin_overrides: Vec<CoinOverrideSection>,
    pub perturbation: PerturbationSection,
    pub window: WindowSection,
    /// Absent means "subcommand default": periodic for spectra, padded
    /// for evolution.
    pub boundary: Option<BoundaryChoice>,
    pub initial_state: InitialStateSection,
    pub steps: usize,
    pub tolerances: TolerancesSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSection::default(),
            defects: None,
            coin_overrides: Vec::new(),
            perturbation: PerturbationSection::default(),
            window: WindowSection::default(),
            boundary: None,
            initial_state: InitialStateSection::default(),
            steps: default_steps(),
            tolerances: TolerancesSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Strict parse: full document consumed, unknown keys rejected, every
/// schema error reported with its JSON path, then range validation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        }
    })?;
    de.end()
        .map_err(|e| CliError::schema(".", format!("trailing content: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical form: pretty JSON with every field present (defaults made
/// explicit). Re-parsing and re-serializing reproduces it byte for byte.
pub fn canonical_json(cfg: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}

/// Hash of the experiment content: the canonical config with the output
/// section normalized away, so the same experiment written to a different
/// directory (or with different formats) produces identical artifacts.
pub fn config_sha256(cfg: &ExperimentConfig) -> String {
    let mut physics = cfg.clone();
    physics.output = OutputSection::default();
    hex::encode(Sha256::digest(canonical_json(&physics).as_bytes()))
}

/// Command-line overrides, applied after parsing and before validation.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub window: Option<i64>,
    pub boundary: Option<BoundaryChoice>,
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) {
    if let Some(dir) = &ov.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = ov.seed {
        if let PerturbationSection::Exponential(e) = &mut cfg.perturbation {
            e.seed = seed;
        }
    }
    if let Some(l) = ov.window {
        cfg.window.l = l;
    }
    if let Some(b) = ov.boundary {
        cfg.boundary = Some(b);
    }
}

fn finite(value: f64, path: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(CliError::range(path, "must be a finite number"))
    }
}

fn finite_pair(pair: ComplexPair, path: &str) -> Result<()> {
    finite(pair[0], path)?;
    finite(pair[1], path)
}

fn distinct_sorted(sites: &[i64]) -> bool {
    sites.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        finite(self.model.p, "model.p")?;
        if !(self.model.p > 0.0 && self.model.p <= 1.0) {
            return Err(CliError::range(
                "model.p",
                format!("must lie in (0, 1], got {}", self.model.p),
            ));
        }
        finite(self.model.alpha, "model.alpha")?;
        finite(self.model.beta, "model.beta")?;
        finite(self.model.gamma, "model.gamma")?;

        if let Some(d) = &self.defects {
            if d.centers.is_empty() {
                return Err(CliError::range("defects.centers", "must not be empty"));
            }
            let mut sorted = d.centers.clone();
            sorted.sort_unstable();
            if !distinct_sorted(&sorted) {
                return Err(CliError::range("defects.centers", "sites must be distinct"));
            }
            finite(d.beta_prime, "defects.beta_prime")?;
            finite(d.gamma_prime, "defects.gamma_prime")?;
        }

        for (i, o) in self.coin_overrides.iter().enumerate() {
            let path = format!("coin_overrides[{i}]");
            for pair in [o.a, o.b, o.c, o.d] {
                finite_pair(pair, &path)?;
            }
            let defect = o.matrix().unitarity_defect();
            if defect > 1e-8 {
                return Err(CliError::range(
                    &path,
                    format!("matrix is not unitary (defect {defect:.2e}); the walk would not conserve probability"),
                ));
            }
        }

        if let PerturbationSection::Exponential(e) = &self.perturbation {
            finite(e.amplitude, "perturbation.amplitude")?;
            if e.amplitude < 0.0 {
                return Err(CliError::range("perturbation.amplitude", "must be >= 0"));
            }
            finite(e.rate, "perturbation.rate")?;
            if e.rate <= 0.0 {
                return Err(CliError::range("perturbation.rate", "must be > 0"));
            }
            finite(e.floor, "perturbation.floor")?;
            if e.floor < 0.0 {
                return Err(CliError::range("perturbation.floor", "must be >= 0"));
            }
        }

        if self.window.l < 1 {
            return Err(CliError::range("window.l", "must be >= 1"));
        }

        match &self.initial_state {
            InitialStateSection::SiteDelta(s) => {
                finite_pair(s.spinor[0], "initial_state.spinor")?;
                finite_pair(s.spinor[1], "initial_state.spinor")?;
            }
            InitialStateSection::UniformOnSet(s) => {
                if s.sites.is_empty() {
                    return Err(CliError::range("initial_state.sites", "must not be empty"));
                }
                let mut sorted = s.sites.clone();
                sorted.sort_unstable();
                if !distinct_sorted(&sorted) {
                    return Err(CliError::range(
                        "initial_state.sites",
                        "sites must be distinct",
                    ));
                }
                finite_pair(s.spinor[0], "initial_state.spinor")?;
                finite_pair(s.spinor[1], "initial_state.spinor")?;
            }
            InitialStateSection::Custom(s) => {
                if s.amplitudes.is_empty() {
                    return Err(CliError::range(
                        "initial_state.amplitudes",
                        "must not be empty",
                    ));
                }
                for (i, spinor) in s.amplitudes.iter().enumerate() {
                    let path = format!("initial_state.amplitudes[{i}]");
                    finite_pair(spinor[0], &path)?;
                    finite_pair(spinor[1], &path)?;
                }
            }
        }

        let t = &self.tolerances.classify;
        if !(t.circle > 0.0 && t.circle.is_finite()) {
            return Err(CliError::range("tolerances.classify.circle", "must be > 0"));
        }
        if !(t.threshold_radius >= 0.0 && t.threshold_radius.is_finite()) {
            return Err(CliError::range(
                "tolerances.classify.threshold_radius",
                "must be >= 0",
            ));
        }
        if let Some(edge) = t.band_edge {
            if !(edge > 0.0 && edge.is_finite()) {
                return Err(CliError::range(
                    "tolerances.classify.band_edge",
                    "must be > 0",
                ));
            }
        }
        if !(t.localization > 0.0 && t.localization <= 1.0) {
            return Err(CliError::range(
                "tolerances.classify.localization",
                "must lie in (0, 1]",
            ));
        }

        let d = &self.tolerances.detect;
        if !(d.theta_step > 0.0 && d.theta_step.is_finite()) {
            return Err(CliError::range("tolerances.detect.theta_step", "must be > 0"));
        }
        if !(d.threshold_exclusion >= 0.0 && d.threshold_exclusion.is_finite()) {
            return Err(CliError::range(
                "tolerances.detect.threshold_exclusion",
                "must be >= 0",
            ));
        }
        if let Some([lo, hi]) = d.support {
            if lo > hi {
                return Err(CliError::range(
                    "tolerances.detect.support",
                    "lo must be <= hi",
                ));
            }
        }
        if let Some(h) = d.half_width {
            if h < 1 {
                return Err(CliError::range(
                    "tolerances.detect.half_width",
                    "must be >= 1",
                ));
            }
        }
        if !(d.stability_tol > 0.0 && d.stability_tol.is_finite()) {
            return Err(CliError::range(
                "tolerances.detect.stability_tol",
                "must be > 0",
            ));
        }
        if let Some(phase) = d.defect_phase {
            finite(phase, "tolerances.detect.defect_phase")?;
        }

        if self.output.dir.is_empty() {
            return Err(CliError::range("output.dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(
            self.model.p,
            self.model.alpha,
            self.model.beta,
            self.model.gamma,
        )?)
    }

    pub fn defect_spec(&self) -> Result<Option<DefectSpec>> {
        match &self.defects {
            None => Ok(None),
            Some(d) => Ok(Some(DefectSpec::new(
                d.centers.clone(),
                d.beta_prime,
                d.gamma_prime,
            )?)),
        }
    }

    pub fn perturbation_spec(&self) -> PerturbationSpec {
        match &self.perturbation {
            PerturbationSection::None(_) => PerturbationSpec::None,
            PerturbationSection::Exponential(e) => PerturbationSpec::Exponential {
                amplitude: e.amplitude,
                rate: e.rate,
                floor: e.floor,
                seed: e.seed,
            },
        }
    }

    /// Assemble the full coin field on `window`: bulk + defects +
    /// perturbation, then explicit per-site overrides.
    pub fn coin_field(&self, window: Window) -> Result<CoinField> {
        let params = self.model_params()?;
        let spec = self.defect_spec()?;
        let mut field = assemble_coin_field(
            &params,
            spec.as_ref(),
            &self.perturbation_spec(),
            window,
        )?;
        for o in &self.coin_overrides {
            field = field.with_override(&[o.site], o.matrix())?;
        }
        Ok(field)
    }

    /// Materialize and normalize the initial state. Zero states are a
    /// range error; anything else is rescaled to unit norm.
    pub fn initial_state(&self) -> Result<State> {
        let state = match &self.initial_state {
            InitialStateSection::SiteDelta(s) => State::point(
                s.site,
                [complex(s.spinor[0]), complex(s.spinor[1])],
            ),
            InitialStateSection::UniformOnSet(s) => {
                let lo = *s.sites.iter().min().expect("validated nonempty");
                let hi = *s.sites.iter().max().expect("validated nonempty");
                // windows are at least two sites wide; pad singletons
                let mut state = State::zero(Window::new(lo.min(hi - 1), hi)?);
                for &x in &s.sites {
                    state.set(x, [complex(s.spinor[0]), complex(s.spinor[1])])?;
                }
                state
            }
            InitialStateSection::Custom(s) => {
                let hi = s.lo + s.amplitudes.len() as i64 - 1;
                let mut state = State::zero(Window::new(s.lo.min(hi - 1), hi)?);
                for (i, spinor) in s.amplitudes.iter().enumerate() {
                    state.set(
                        s.lo + i as i64,
                        [complex(spinor[0]), complex(spinor[1])],
                    )?;
                }
                state
            }
        };
        if state.norm() <= 0.0 {
            return Err(CliError::range("initial_state", "state must be nonzero"));
        }
        Ok(state.normalized()?)
    }

    /// The truncation window `[-L, L]`.
    pub fn lattice_window(&self) -> Result<Window> {
        Ok(Window::centered(self.window.l)?)
    }

    /// Boundary for matrix spectra: periodic unless overridden; padded is
    /// rejected (no finite matrix to diagonalize).
    pub fn spectral_boundary(&self) -> Result<SpectralBoundary> {
        match self.boundary {
            None => Ok(SpectralBoundary::Periodic),
            Some(choice) => choice.to_spectral().ok_or_else(|| {
                CliError::range(
                    "boundary",
                    "padded boundary has no finite truncation matrix; use periodic or truncate",
                )
            }),
        }
    }

    /// Boundary for time evolution: padded unless overridden.
    pub fn evolution_boundary(&self) -> Boundary {
        self.boundary
            .map(BoundaryChoice::to_evolution)
            .unwrap_or(Boundary::Padded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert!((cfg.model.p - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(cfg.defects.is_none());
        assert_eq!(cfg.window.l, 60);
        assert_eq!(cfg.steps, 100);
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let err = parse_config(r#"{"model": {"p": 0.5, "pp": 1}}"#).unwrap_err();
        match err {
            CliError::Schema { path, message } => {
                assert_eq!(path, "model.pp");
                assert!(message.contains("unknown field"), "{message}");
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn out_of_range_p_names_the_field() {
        let err = parse_config(r#"{"model": {"p": 1.5}}"#).unwrap_err();
        match err {
            CliError::Range { path, .. } => assert_eq!(path, "model.p"),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn canonical_form_round_trips_byte_identically() {
        let text = r#"{
            "model": {"p": 0.7071067811865476},
            "defects": {"centers": [0, 1]},
            "perturbation": {"kind": "exponential", "amplitude": 0.05, "rate": 1.0, "seed": 7},
            "initial_state": {"kind": "uniform_on_set", "sites": [-1, 0, 1],
                              "spinor": [[0.4082482904638631, 0.0], [0.0, 0.4082482904638631]]}
        }"#;
        let cfg = parse_config(text).unwrap();
        let canonical = canonical_json(&cfg);
        let reparsed = parse_config(&canonical).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(canonical, canonical_json(&reparsed));
    }

    #[test]
    fn nonunitary_override_is_rejected() {
        let err = parse_config(
            r#"{"coin_overrides": [{"site": 0, "a": [2.0, 0.0], "b": [0.0, 0.0],
                                     "c": [0.0, 0.0], "d": [1.0, 0.0]}]}"#,
        )
        .unwrap_err();
        match err {
            CliError::Range { path, .. } => assert_eq!(path, "coin_overrides[0]"),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn seed_override_reaches_the_perturbation() {
        let mut cfg = parse_config(
            r#"{"perturbation": {"kind": "exponential", "amplitude": 0.1, "rate": 1.0, "seed": 1}}"#,
        )
        .unwrap();
        apply_overrides(
            &mut cfg,
            &Overrides {
                seed: Some(99),
                ..Overrides::default()
            },
        );
        match &cfg.perturbation {
            PerturbationSection::Exponential(e) => assert_eq!(e.seed, 99),
            other => panic!("wrong perturbation {other:?}"),
        }
    }
}
