//! Experiment configuration: one TOML file, strict keys, dotted overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sqzsim::fit::{FitOptions, FitParams};
use sqzsim::homodyne::{AnalyzerMode, AnalyzerSettings, DetectionChain, LoPhase, Source};
use sqzsim::lock::{LockConfig, TapSweepSpec};
use sqzsim::noise_model::{dephased_noise, ideal_noise};
use sqzsim::rng::derive_seed;
use sqzsim::{BudgetInputs, OpaParams, PhaseFluctuation, QuadratureNoise, WaveguideSpec};

use crate::error::{CliError, CliResult};

/// Operating point in lab units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpaSection {
    pub alpha_pct_per_w: f64,
    /// Total effective loss, fraction.
    pub loss: f64,
    pub pump_mw: f64,
    pub theta_tilde_mrad: f64,
}

impl Default for OpaSection {
    fn default() -> Self {
        Self {
            alpha_pct_per_w: 906.0,
            loss: 0.08,
            pump_mw: 640.0,
            theta_tilde_mrad: 9.0,
        }
    }
}

impl OpaSection {
    pub fn params(&self) -> CliResult<OpaParams> {
        Ok(OpaParams::new(
            self.alpha_pct_per_w / 100.0,
            self.loss,
            self.pump_mw * 1e-3,
        )?)
    }

    pub fn phase(&self) -> CliResult<PhaseFluctuation> {
        Ok(PhaseFluctuation::new(self.theta_tilde_mrad * 1e-3)?)
    }

    pub fn fit_params(&self) -> FitParams {
        FitParams::new(self.alpha_pct_per_w / 100.0, self.loss, self.theta_tilde_mrad * 1e-3)
    }

    /// Dephased quadrature variances at the configured pump.
    pub fn measured_noise(&self) -> CliResult<QuadratureNoise> {
        Ok(dephased_noise(ideal_noise(&self.params()?)?, self.phase()?))
    }
}

/// Waveguide geometry. The SHG efficiency comes from `[opa]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveguideSection {
    pub length_cm: f64,
    pub prop_loss_db_per_cm: f64,
}

impl Default for WaveguideSection {
    fn default() -> Self {
        let w = WaveguideSpec::default();
        Self {
            length_cm: w.length_cm,
            prop_loss_db_per_cm: w.prop_loss_db_per_cm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub optics: f64,
    pub photodiode: f64,
    /// Total to decompose; `[opa] loss` when absent.
    pub total: Option<f64>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let b = BudgetInputs::default();
        Self {
            optics: b.optics,
            photodiode: b.photodiode,
            total: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Squeezed,
    AntiSqueezed,
    Scan,
    Shot,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceReference {
    Absolute,
    ShotNoise,
    CircuitSubtracted,
}

/// What the homodyne commands measure and for how long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionSection {
    pub source: SourceKind,
    pub probe_tone: bool,
    /// LO phase at t = 0 for `scan`, rad.
    pub scan_start: f64,
    pub scan_rate: f64,
    /// Length of a scanned trace. The squeezed dip is only tens of mrad
    /// wide, so the scan has to be slow against the VBW time constant.
    pub scan_duration: f64,
    /// Seconds of signal per trace.
    pub duration: f64,
    pub reference: TraceReference,
    /// Length of the raw time series written by `synth`.
    pub synth_samples: usize,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        Self {
            source: SourceKind::Squeezed,
            probe_tone: false,
            scan_start: -std::f64::consts::FRAC_PI_4,
            scan_rate: 5.0,
            scan_duration: 0.5,
            duration: 0.05,
            reference: TraceReference::ShotNoise,
            synth_samples: 1 << 16,
        }
    }
}

impl AcquisitionSection {
    pub fn duration_of(&self, kind: SourceKind) -> f64 {
        if kind == SourceKind::Scan {
            self.scan_duration
        } else {
            self.duration
        }
    }

    pub fn source(&self, kind: SourceKind, noise: QuadratureNoise) -> Source {
        let homodyne = |lo_phase| Source::Homodyne {
            noise,
            lo_phase,
            probe_tone: self.probe_tone,
        };
        match kind {
            SourceKind::Squeezed => homodyne(LoPhase::Constant { theta: 0.0 }),
            SourceKind::AntiSqueezed => homodyne(LoPhase::Constant {
                theta: std::f64::consts::FRAC_PI_2,
            }),
            SourceKind::Scan => homodyne(LoPhase::Scan {
                start: self.scan_start,
                rate: self.scan_rate,
            }),
            SourceKind::Shot => Source::shot(),
            SourceKind::Dark => Source::Dark,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockSimSection {
    pub duration: f64,
}

impl Default for LockSimSection {
    fn default() -> Self {
        Self { duration: 1.0 }
    }
}

/// Synthetic pump sweep used by `reproduce`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub pumps_mw: Vec<f64>,
    /// Gaussian noise added to each dB level.
    pub noise_db: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            pumps_mw: vec![
                40.0, 80.0, 120.0, 160.0, 240.0, 320.0, 400.0, 480.0, 560.0, 640.0, 720.0, 800.0, 900.0, 1000.0,
            ],
            noise_db: 0.07,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// Aligned table.
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Root seed. Every module seed is derived from it.
    pub seed: u64,
    pub opa: OpaSection,
    pub waveguide: WaveguideSection,
    pub budget: BudgetSection,
    pub chain: DetectionChain,
    pub lock: LockConfig,
    pub lock_sim: LockSimSection,
    pub tap_sweep: TapSweepSpec,
    pub acquisition: AcquisitionSection,
    pub zero_span: AnalyzerSettings,
    pub sweep: AnalyzerSettings,
    pub fit: FitOptions,
    pub dataset: DatasetSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            opa: OpaSection::default(),
            waveguide: WaveguideSection::default(),
            budget: BudgetSection::default(),
            chain: DetectionChain::default(),
            lock: LockConfig::default(),
            lock_sim: LockSimSection::default(),
            tap_sweep: TapSweepSpec::default(),
            acquisition: AcquisitionSection::default(),
            zero_span: AnalyzerSettings::default(),
            sweep: AnalyzerSettings {
                points: 241,
                ..AnalyzerSettings::sweep(0.5e6, 120.5e6)
            },
            fit: FitOptions::default(),
            dataset: DatasetSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parse `value` as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Apply one `a.b.c=value` override, creating intermediate tables.
pub fn apply_override(root: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override `{spec}` has an empty key")));
    }
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut table = root;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{spec}`: `{k}` is not a table")))?;
    }
    table.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Deep-merge `top` into `base`. A table with a `kind` tag is an enum
/// variant and replaces the base value whole, so switching variants does not
/// inherit the old variant's fields.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) if !t.contains_key("kind") => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Load `path` over the defaults, apply overrides and validate.
    ///
    /// Everything is merged as raw TOML before deserialisation, so a
    /// misspelled key fails the same way whether it came from the file or
    /// the command line.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut table = toml::Table::try_from(Self::default()).expect("defaults serialise");
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let file =
                toml::from_str::<toml::Table>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            merge(&mut table, file);
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let text = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.opa.params()?;
        self.opa.phase()?;
        self.waveguide_spec().validate()?;
        self.budget_inputs().waveguide.validate()?;
        self.chain.validate()?;
        self.lock.validate()?;
        if !(self.lock_sim.duration > 0.0) {
            return Err(CliError::Config("lock_sim.duration must be > 0".into()));
        }
        if self.tap_sweep.tap_ratios.is_empty() || !(self.tap_sweep.duration > 0.0) {
            return Err(CliError::Config(
                "tap_sweep needs at least one tap ratio and a positive duration".into(),
            ));
        }
        if !(self.acquisition.duration > 0.0)
            || !(self.acquisition.scan_duration > 0.0)
            || self.acquisition.synth_samples == 0
        {
            return Err(CliError::Config(
                "acquisition durations and synth_samples must be > 0".into(),
            ));
        }
        if !matches!(self.zero_span.mode, AnalyzerMode::ZeroSpan { .. }) {
            return Err(CliError::Config("[zero_span] needs mode.kind = \"zero_span\"".into()));
        }
        if !matches!(self.sweep.mode, AnalyzerMode::Sweep { .. }) {
            return Err(CliError::Config("[sweep] needs mode.kind = \"sweep\"".into()));
        }
        self.zero_span.validate(self.chain.sample_rate)?;
        self.sweep.validate(self.chain.sample_rate)?;
        if self.dataset.pumps_mw.iter().any(|p| !(*p > 0.0)) || !(self.dataset.noise_db >= 0.0) {
            return Err(CliError::Config(
                "dataset.pumps_mw must be positive and dataset.noise_db >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Apply command-line `--seed`, then push derived seeds into the modules.
    pub fn with_root_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.lock.seed = derive_seed(self.seed, "lock");
        self.chain.seed = derive_seed(self.seed, "homodyne");
        self
    }

    pub fn waveguide_spec(&self) -> WaveguideSpec {
        WaveguideSpec {
            length_cm: self.waveguide.length_cm,
            prop_loss_db_per_cm: self.waveguide.prop_loss_db_per_cm,
            alpha: self.opa.alpha_pct_per_w / 100.0,
        }
    }

    pub fn budget_inputs(&self) -> BudgetInputs {
        BudgetInputs {
            waveguide: self.waveguide_spec(),
            pump_power: self.opa.pump_mw * 1e-3,
            optics: self.budget.optics,
            photodiode: self.budget.photodiode,
            circuit_clearance_db: self.chain.circuit_clearance_db,
            total: self.budget.total.unwrap_or(self.opa.loss),
        }
    }

    /// Canonical TOML of the fully resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
