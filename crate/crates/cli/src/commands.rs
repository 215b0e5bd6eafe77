//! One function per subcommand. Each returns the report printed on stdout;
//! data products go to the output directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use sqzsim::fit::{fit_sweep, synthesize_sweep, FitResult, SweepPoint};
use sqzsim::homodyne::{
    envelope_extrema, measure_sweep, measure_zero_span, normalize, subtract_circuit_noise, synth_timeseries,
    AnalyzerSettings, DetectionChain, Source, Trace,
};
use sqzsim::lock::{simulate_lock, tap_tradeoff_sweep, TapPoint};
use sqzsim::loss_budget::compose_losses;
use sqzsim::noise_model::{dephased_noise, ideal_noise};
use sqzsim::rng::{derive_seed, stream};
use sqzsim::{LossBudget, PhaseFluctuation};

use crate::config::{ExperimentConfig, SourceKind, TraceReference};
use crate::error::{CliError, CliResult};
use crate::output::{db, mrad, pct, round, sha256_hex, write_trace, Artifacts, Report, Table};

pub struct Context {
    pub cfg: ExperimentConfig,
    /// Explicit output directory, from `--out-dir` or `[output] dir`.
    pub out_dir: Option<PathBuf>,
}

impl Context {
    fn artifacts(&self, fallback: &str) -> CliResult<Artifacts> {
        Artifacts::new(self.out_dir.as_deref().unwrap_or(Path::new(fallback)))
    }
}

fn files_json(art: &Artifacts) -> Value {
    json!({ "dir": art.dir().display().to_string(), "files": art.names() })
}

// eval

fn eval_report(cfg: &ExperimentConfig, pumps_mw: &[f64]) -> CliResult<Report> {
    let opa = cfg.opa.params()?;
    let phase = cfg.opa.phase()?;
    let mut table = Table::new(&[
        "pump_mW",
        "squeezing_dB",
        "anti_squeezing_dB",
        "ideal_squeezing_dB",
        "ideal_anti_squeezing_dB",
    ]);
    let mut points = Vec::new();
    for &p in pumps_mw {
        let ideal = ideal_noise(&opa.with_pump_power(p * 1e-3))?;
        let meas = dephased_noise(ideal, phase);
        let row = [-meas.sq_db(), meas.anti_db(), -ideal.sq_db(), ideal.anti_db()];
        table.push(
            std::iter::once(format!("{p}"))
                .chain(row.iter().map(|v| db(*v)))
                .collect(),
        );
        points.push(json!({
            "pump_mW": p,
            "squeezing_dB": round(row[0], 2),
            "anti_squeezing_dB": round(row[1], 2),
            "ideal_squeezing_dB": round(row[2], 2),
            "ideal_anti_squeezing_dB": round(row[3], 2),
        }));
    }
    Ok(Report {
        table,
        json: json!({
            "alpha_pct_per_w": cfg.opa.alpha_pct_per_w,
            "loss_pct": round(100.0 * cfg.opa.loss, 2),
            "theta_tilde_mrad": round(cfg.opa.theta_tilde_mrad, 2),
            "points": points,
        }),
    })
}

pub fn eval(ctx: &Context, pumps_mw: &[f64]) -> CliResult<Report> {
    let pumps = if pumps_mw.is_empty() {
        vec![ctx.cfg.opa.pump_mw]
    } else {
        pumps_mw.to_vec()
    };
    let report = eval_report(&ctx.cfg, &pumps)?;
    if ctx.out_dir.is_some() {
        let mut art = ctx.artifacts(".")?;
        art.write_table("eval.csv", &report.table)?;
        art.write_json("eval.json", &report.json)?;
    }
    Ok(report)
}

// budget

fn budget_report(cfg: &ExperimentConfig) -> CliResult<Report> {
    let inputs = cfg.budget_inputs();
    let b = LossBudget::build(&inputs)?;
    let mut table = Table::new(&["item", "loss_pct"]);
    let mut parts = serde_json::Map::new();
    for (name, v) in b.rows() {
        table.push(vec![name.to_string(), pct(v)]);
        parts.insert(format!("{name}_pct"), json!(round(100.0 * v, 2)));
    }
    table.push(vec![
        "mode_mismatch_subtractive".into(),
        pct(b.mode_mismatch_subtractive),
    ]);
    parts.insert(
        "mode_mismatch_subtractive_pct".into(),
        json!(round(100.0 * b.mode_mismatch_subtractive, 2)),
    );
    Ok(Report {
        table,
        json: json!({ "budget": parts, "inputs": inputs }),
    })
}

pub fn budget(ctx: &Context) -> CliResult<Report> {
    let report = budget_report(&ctx.cfg)?;
    if ctx.out_dir.is_some() {
        let mut art = ctx.artifacts(".")?;
        art.write_table("budget.csv", &report.table)?;
        art.write_json("budget.json", &report.json)?;
    }
    Ok(report)
}

// fit

#[derive(Debug, Deserialize)]
struct DataRow {
    #[serde(rename = "pump_mW")]
    pump_mw: f64,
    #[serde(rename = "squeezing_dB")]
    squeezing_db: f64,
    #[serde(rename = "anti_dB")]
    anti_db: f64,
    #[serde(rename = "sigma_dB", default)]
    sigma_db: Option<f64>,
}

/// Pump-sweep CSV: `pump_mW, squeezing_dB, anti_dB[, sigma_dB]`, squeezing
/// as a positive magnitude.
pub fn read_sweep_csv(path: &Path) -> CliResult<Vec<SweepPoint>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<DataRow>().enumerate() {
        let r = row.map_err(|e| CliError::Data(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        out.push(SweepPoint {
            pump_power: r.pump_mw * 1e-3,
            squeezing_db: r.squeezing_db,
            anti_squeezing_db: r.anti_db,
            sigma_db: r.sigma_db,
        });
    }
    Ok(out)
}

fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(&["pump_mW", "squeezing_dB", "anti_dB"]);
    for p in points {
        t.push(vec![
            format!("{}", round(p.pump_power * 1e3, 6)),
            db(p.squeezing_db),
            db(p.anti_squeezing_db),
        ]);
    }
    t
}

fn model_curve(fit: &FitResult, max_pump: f64) -> CliResult<Table> {
    let params = fit.params();
    let mut t = Table::new(&["pump_mW", "squeezing_dB", "anti_dB"]);
    let n = 200;
    for i in 0..=n {
        let p = max_pump * i as f64 / n as f64;
        let (s, a) = params.levels_db(p)?;
        t.push(vec![format!("{:.2}", p * 1e3), format!("{s:.4}"), format!("{a:.4}")]);
    }
    Ok(t)
}

fn fit_summary(fit: &FitResult) -> Value {
    let u = fit.uncertainty;
    json!({
        "alpha_per_w": round(fit.alpha, 4),
        "alpha_pct_per_w": round(100.0 * fit.alpha, 1),
        "loss_pct": round(100.0 * fit.loss, 2),
        "theta_tilde_mrad": round(1e3 * fit.theta_tilde, 2),
        "alpha_pct_per_w_err": u.map(|u| round(100.0 * u.alpha, 1)),
        "loss_pct_err": u.map(|u| round(100.0 * u.loss, 2)),
        "theta_tilde_mrad_err": u.map(|u| round(1e3 * u.theta_tilde, 2)),
        "residual_rms_dB": round(fit.residual_rms, 3),
        "converged": fit.diagnostics.converged,
        "warnings": fit.warnings,
    })
}

fn fit_table(fit: &FitResult) -> Table {
    let u = fit.uncertainty;
    let err = |f: &dyn Fn(&sqzsim::fit::Uncertainty) -> String| u.as_ref().map_or_else(String::new, f);
    let mut t = Table::new(&["parameter", "value", "std_err", "unit"]);
    t.push(vec![
        "alpha".into(),
        format!("{:.1}", 100.0 * fit.alpha),
        err(&|u| format!("{:.1}", 100.0 * u.alpha)),
        "%/W".into(),
    ]);
    t.push(vec!["loss".into(), pct(fit.loss), err(&|u| pct(u.loss)), "%".into()]);
    t.push(vec![
        "theta_tilde".into(),
        mrad(fit.theta_tilde),
        err(&|u| mrad(u.theta_tilde)),
        "mrad".into(),
    ]);
    t.push(vec![
        "residual_rms".into(),
        format!("{:.3}", fit.residual_rms),
        String::new(),
        "dB".into(),
    ]);
    t
}

/// Fit `points`, write `{stem}.json` and `{stem}_model.csv`.
fn fit_and_write(
    cfg: &ExperimentConfig,
    points: &[SweepPoint],
    art: &mut Artifacts,
    stem: &str,
) -> CliResult<FitResult> {
    let fit = fit_sweep(points, &cfg.fit)?;
    let max_pump = points.iter().map(|p| p.pump_power).fold(0.0, f64::max) * 1.5;
    art.write_json(
        &format!("{stem}.json"),
        &json!({ "summary": fit_summary(&fit), "result": fit }),
    )?;
    art.write_table(&format!("{stem}_model.csv"), &model_curve(&fit, max_pump)?)?;
    Ok(fit)
}

pub fn fit(ctx: &Context, data: &Path) -> CliResult<Report> {
    let points = read_sweep_csv(data)?;
    let mut art = ctx.artifacts("out")?;
    let fit = fit_and_write(&ctx.cfg, &points, &mut art, "fit")?;
    let mut json = fit_summary(&fit);
    json["output"] = files_json(&art);
    Ok(Report {
        table: fit_table(&fit),
        json,
    })
}

// lock-sim / tap-sweep

pub fn lock_sim(ctx: &Context) -> CliResult<Report> {
    let cfg = &ctx.cfg;
    let r = simulate_lock(&cfg.lock, cfg.lock_sim.duration)?;
    let opa = cfg.opa.params()?;
    let loss = compose_losses(&[opa.loss, r.extra_squeezing_loss])?;
    let noise = dephased_noise(
        ideal_noise(&opa.with_loss(loss))?,
        PhaseFluctuation::new(r.residual_theta_std)?,
    );
    let snr_db = 10.0 * r.error_signal_snr.log10();

    let mut art = ctx.artifacts("out")?;
    let mut trace = Table::new(&["time_s", "theta_mrad", "error"]);
    for (i, (th, e)) in r.phase_trace.iter().zip(&r.error_trace).enumerate() {
        trace.push(vec![
            format!("{:.6}", i as f64 * r.trace_dt),
            format!("{:.4}", 1e3 * th),
            format!("{e:.6e}"),
        ]);
    }
    art.write_table("lock_trace.csv", &trace)?;
    let summary = json!({
        "method": r.method,
        "theta_tilde_mrad": round(1e3 * r.residual_theta_std, 2),
        "theta_mean_mrad": round(1e3 * r.residual_theta_mean, 2),
        "error_snr_dB": round(snr_db, 2),
        "tap_loss_pct": round(100.0 * r.extra_squeezing_loss, 2),
        "total_loss_pct": round(100.0 * loss, 2),
        "squeezing_dB": round(-noise.sq_db(), 2),
        "samples": r.samples,
        "settled_samples": r.settled_samples,
        "seed": cfg.lock.seed,
    });
    art.write_json("lock_sim.json", &summary)?;

    let mut table = Table::new(&["quantity", "value", "unit"]);
    for (q, v, u) in [
        ("method", r.method.label().to_string(), ""),
        ("theta_tilde", mrad(r.residual_theta_std), "mrad"),
        ("theta_mean", mrad(r.residual_theta_mean), "mrad"),
        ("error_snr", db(snr_db), "dB"),
        ("tap_loss", pct(r.extra_squeezing_loss), "%"),
        ("squeezing", db(-noise.sq_db()), "dB"),
    ] {
        table.push(vec![q.into(), v, u.into()]);
    }
    let mut json = summary;
    json["output"] = files_json(&art);
    Ok(Report { table, json })
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map_or_else(String::new, f)
}

fn tap_sweep_tables(points: &[TapPoint], reference: &TapPoint) -> (Table, Table) {
    let mut csv = Table::new(&["tap_ratio", "theta_std_mrad", "squeezing_dB"]);
    let mut shown = Table::new(&["method", "tap_ratio", "theta_std_mrad", "squeezing_dB"]);
    for p in points {
        let row = vec![
            format!("{}", p.tap_ratio),
            opt(p.theta_std, mrad),
            opt(p.squeezing_db, db),
        ];
        shown.push(
            std::iter::once(p.method.label().to_string())
                .chain(row.iter().cloned())
                .collect(),
        );
        csv.push(row);
    }
    shown.push(vec![
        reference.method.label().into(),
        format!("{}", reference.tap_ratio),
        opt(reference.theta_std, mrad),
        opt(reference.squeezing_db, db),
    ]);
    (csv, shown)
}

fn tap_sweep_run(cfg: &ExperimentConfig, art: &mut Artifacts) -> CliResult<(Table, Value)> {
    let sweep = tap_tradeoff_sweep(&cfg.lock, &cfg.tap_sweep, &cfg.opa.params()?)?;
    let (csv, shown) = tap_sweep_tables(&sweep.conventional, &sweep.phase_detection);
    art.write_table("tap_sweep.csv", &csv)?;
    let best = sweep.best_conventional().cloned();
    let summary = json!({
        "phase_detection": {
            "theta_std_mrad": sweep.phase_detection.theta_std.map(|t| round(1e3 * t, 2)),
            "squeezing_dB": sweep.phase_detection.squeezing_db.map(|s| round(s, 2)),
        },
        "best_conventional": best.as_ref().map(|b| json!({
            "tap_ratio": b.tap_ratio,
            "theta_std_mrad": b.theta_std.map(|t| round(1e3 * t, 2)),
            "squeezing_dB": b.squeezing_db.map(|s| round(s, 2)),
        })),
        "points": sweep,
        "seed": cfg.lock.seed,
    });
    art.write_json("tap_sweep.json", &summary)?;
    Ok((shown, summary))
}

pub fn tap_sweep(ctx: &Context) -> CliResult<Report> {
    let mut art = ctx.artifacts("out")?;
    let (table, mut json) = tap_sweep_run(&ctx.cfg, &mut art)?;
    json["output"] = files_json(&art);
    Ok(Report { table, json })
}

// homodyne

pub fn synth(ctx: &Context) -> CliResult<Report> {
    let cfg = &ctx.cfg;
    let acq = &cfg.acquisition;
    let source = acq.source(acq.source, cfg.opa.measured_noise()?);
    let n = acq.synth_samples;
    let fs = cfg.chain.sample_rate;
    let mut x = synth_timeseries(source, &cfg.chain, n as f64 / fs)?;
    x.truncate(n);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;

    let mut art = ctx.artifacts("out")?;
    let mut t = Table::new(&["time_s", "value"]);
    for (i, v) in x.iter().enumerate() {
        t.push(vec![format!("{:.12}", i as f64 / fs), format!("{v:.6}")]);
    }
    art.write_table("synth.csv", &t)?;
    let meta = json!({
        "source": source,
        "samples": x.len(),
        "sample_rate": fs,
        "seed": cfg.chain.seed,
        "mean": mean,
        "variance": var,
        "chain": cfg.chain,
    });
    art.write_json("synth.json", &meta)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["samples".into(), x.len().to_string()]);
    table.push(vec!["variance".into(), format!("{var:.4}")]);
    table.push(vec!["variance_dB".into(), db(10.0 * var.log10())]);
    let mut json = meta;
    json["output"] = files_json(&art);
    Ok(Report { table, json })
}

#[derive(Clone, Copy)]
enum Analyzer {
    ZeroSpan,
    Sweep,
}

fn measure(
    kind: Analyzer,
    source: Source,
    chain: &DetectionChain,
    settings: &AnalyzerSettings,
    duration: f64,
) -> CliResult<Trace> {
    Ok(match kind {
        Analyzer::ZeroSpan => measure_zero_span(source, chain, settings, duration)?,
        Analyzer::Sweep => measure_sweep(source, chain, settings, duration)?,
    })
}

/// Shot and dark references use their own seed so that a shot-noise signal
/// is not normalised against its own realisation.
fn reference_chain(chain: &DetectionChain) -> DetectionChain {
    DetectionChain {
        seed: derive_seed(chain.seed, "reference"),
        ..chain.clone()
    }
}

struct References {
    shot: Option<Trace>,
    dark: Option<Trace>,
}

fn measure_references(
    cfg: &ExperimentConfig,
    kind: Analyzer,
    settings: &AnalyzerSettings,
    d: f64,
    need_dark: bool,
) -> CliResult<References> {
    let chain = reference_chain(&cfg.chain);
    std::thread::scope(|s| {
        let dark = need_dark.then(|| s.spawn(|| measure(kind, Source::Dark, &chain, settings, d)));
        let shot = measure(kind, Source::shot(), &chain, settings, d)?;
        let dark = dark.map(|h| h.join().expect("dark trace thread")).transpose()?;
        Ok(References { shot: Some(shot), dark })
    })
}

fn refer(signal: &Trace, refs: &References, reference: TraceReference) -> CliResult<Trace> {
    Ok(match reference {
        TraceReference::Absolute => signal.clone(),
        TraceReference::ShotNoise => normalize(signal, refs.shot.as_ref().expect("shot measured"))?,
        TraceReference::CircuitSubtracted => subtract_circuit_noise(
            signal,
            refs.dark.as_ref().expect("dark measured"),
            refs.shot.as_ref().expect("shot measured"),
        )?,
    })
}

fn acquire(ctx: &Context, kind: Analyzer, stem: &str) -> CliResult<Report> {
    let cfg = &ctx.cfg;
    let acq = &cfg.acquisition;
    let settings = match kind {
        Analyzer::ZeroSpan => cfg.zero_span,
        Analyzer::Sweep => cfg.sweep,
    };
    let source = acq.source(acq.source, cfg.opa.measured_noise()?);
    let duration = match kind {
        Analyzer::ZeroSpan => acq.duration_of(acq.source),
        Analyzer::Sweep => acq.duration,
    };
    let (signal, refs) = std::thread::scope(|s| {
        let refs = s.spawn(|| match acq.reference {
            TraceReference::Absolute => Ok(References { shot: None, dark: None }),
            r => measure_references(cfg, kind, &settings, duration, r == TraceReference::CircuitSubtracted),
        });
        let signal = measure(kind, source, &cfg.chain, &settings, duration);
        (signal, refs.join().expect("reference thread"))
    });
    let trace = refer(&signal?, &refs?, acq.reference)?;

    let mut art = ctx.artifacts("out")?;
    let extra = json!({ "source": source, "duration": duration });
    write_trace(&mut art, stem, &trace, extra)?;

    let min = trace.level_db.iter().copied().fold(f64::INFINITY, f64::min);
    let max = trace.level_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["points".into(), trace.len().to_string()]);
    table.push(vec!["mean_dB".into(), db(trace.mean_db())]);
    table.push(vec!["std_dB".into(), format!("{:.3}", trace.std_db())]);
    table.push(vec!["min_dB".into(), db(min)]);
    table.push(vec!["max_dB".into(), db(max)]);
    let json = json!({
        "source": acq.source,
        "reference": trace.reference,
        "points": trace.len(),
        "mean_dB": round(trace.mean_db(), 2),
        "std_dB": round(trace.std_db(), 3),
        "min_dB": round(min, 2),
        "max_dB": round(max, 2),
        "seed": trace.seed,
        "output": files_json(&art),
    });
    Ok(Report { table, json })
}

pub fn zero_span(ctx: &Context) -> CliResult<Report> {
    acquire(ctx, Analyzer::ZeroSpan, "zero_span")
}

pub fn sweep(ctx: &Context) -> CliResult<Report> {
    acquire(ctx, Analyzer::Sweep, "sweep")
}

// reproduce

fn run_dir(base: &Path) -> CliResult<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = base.join(&stamp);
    let mut k = 2;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{k}"));
        k += 1;
    }
    Ok(dir)
}

/// Zero-span traces at the operating point: squeezed, anti-squeezed and a
/// scanned LO phase, all against shot noise.
fn reproduce_zero_span(cfg: &ExperimentConfig, art: &mut Artifacts) -> CliResult<Value> {
    let acq = &cfg.acquisition;
    let noise = cfg.opa.measured_noise()?;
    let kinds = [
        SourceKind::Shot,
        SourceKind::Squeezed,
        SourceKind::AntiSqueezed,
        SourceKind::Scan,
    ];
    let settings = cfg.zero_span;
    let (traces, refs) = std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&k| {
                let src = acq.source(k, noise);
                s.spawn(move || measure(Analyzer::ZeroSpan, src, &cfg.chain, &settings, acq.duration_of(k)))
            })
            .collect();
        let refs = measure_references(cfg, Analyzer::ZeroSpan, &settings, acq.duration, false);
        let traces: Vec<_> = handles.into_iter().map(|h| h.join().expect("trace thread")).collect();
        (traces, refs)
    });
    let refs = refs?;
    let mut out = serde_json::Map::new();
    for (k, t) in kinds.iter().zip(traces) {
        let t = refer(&t?, &refs, TraceReference::ShotNoise)?;
        let name = serde_json::to_value(k)
            .expect("kind")
            .as_str()
            .expect("string")
            .to_string();
        let mut extra = json!({ "source": acq.source(*k, noise), "duration": acq.duration_of(*k) });
        let mut summary = json!({ "mean_dB": round(t.mean_db(), 2) });
        if *k == SourceKind::Scan {
            let (lo, hi) = envelope_extrema(&t, 3.min(t.len()))?;
            extra["envelope_dB"] = json!([round(lo, 2), round(hi, 2)]);
            summary = json!({ "envelope_dB": [round(lo, 2), round(hi, 2)] });
        }
        write_trace(art, &format!("zero_span_{name}"), &t, extra)?;
        out.insert(name, summary);
    }
    Ok(Value::Object(out))
}

/// Swept spectra with the probe tone: raw relative and circuit-corrected.
fn reproduce_sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> CliResult<Value> {
    let acq = &cfg.acquisition;
    let settings = cfg.sweep;
    let source = Source::locked(cfg.opa.measured_noise()?, true);
    let (signal, refs) = std::thread::scope(|s| {
        let h = s.spawn(|| measure(Analyzer::Sweep, source, &cfg.chain, &settings, acq.duration));
        let refs = measure_references(cfg, Analyzer::Sweep, &settings, acq.duration, true);
        (h.join().expect("sweep thread"), refs)
    });
    let (signal, refs) = (signal?, refs?);
    let rel = refer(&signal, &refs, TraceReference::ShotNoise)?;
    let corr = refer(&signal, &refs, TraceReference::CircuitSubtracted)?;
    let dark = refer(
        refs.dark.as_ref().expect("dark measured"),
        &refs,
        TraceReference::ShotNoise,
    )?;
    let extra = json!({ "source": source, "duration": acq.duration });
    write_trace(art, "sweep_squeezed", &rel, extra.clone())?;
    write_trace(art, "sweep_squeezed_corrected", &corr, extra)?;
    write_trace(
        art,
        "sweep_circuit",
        &dark,
        json!({ "source": Source::Dark, "duration": acq.duration }),
    )?;
    let at = |t: &Trace, f: f64| t.level_near(f).map(|v| round(v, 2));
    Ok(json!({
        "tone_dB": at(&rel, cfg.chain.probe_tone.freq),
        "squeezing_3MHz_dB": at(&rel, 3e6),
        "squeezing_100MHz_dB": at(&rel, 100e6),
        "corrected_100MHz_dB": at(&corr, 100e6),
    }))
}

/// Synthetic pump sweep at the configured operating point, and its fit.
fn reproduce_fit(cfg: &ExperimentConfig, art: &mut Artifacts) -> CliResult<Value> {
    let pumps: Vec<f64> = cfg.dataset.pumps_mw.iter().map(|p| p * 1e-3).collect();
    let mut rng = stream(cfg.seed, "dataset");
    let points = synthesize_sweep(&cfg.opa.fit_params(), &pumps, cfg.dataset.noise_db, &mut rng)?;
    art.write_table("pump_sweep.csv", &sweep_table(&points))?;
    let rounded = read_sweep_csv(&art.dir().join("pump_sweep.csv"))?;
    let fit = fit_and_write(cfg, &rounded, art, "pump_sweep_fit")?;
    Ok(fit_summary(&fit))
}

pub fn reproduce(ctx: &Context) -> CliResult<Report> {
    let cfg = &ctx.cfg;
    let base = ctx.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let mut art = Artifacts::new(&run_dir(&base)?)?;

    let config_text = cfg.to_toml();
    art.write("config.toml", config_text.as_bytes())?;

    let eval = eval_report(cfg, &[cfg.opa.pump_mw])?;
    art.write_table("eval.csv", &eval.table)?;
    art.write_json("eval.json", &eval.json)?;
    let budget = budget_report(cfg)?;
    art.write_table("budget.csv", &budget.table)?;
    art.write_json("budget.json", &budget.json)?;
    let (_, taps) = tap_sweep_run(cfg, &mut art)?;
    let zs = reproduce_zero_span(cfg, &mut art)?;
    let sw = reproduce_sweep(cfg, &mut art)?;
    let fit = reproduce_fit(cfg, &mut art)?;

    let headline = json!({
        "eval": eval.json["points"][0],
        "budget": budget.json["budget"],
        "phase_detection": taps["phase_detection"],
        "best_conventional": taps["best_conventional"],
        "zero_span": zs,
        "sweep": sw,
        "fit": fit,
    });
    art.write_json("summary.json", &headline)?;
    let manifest = json!({
        "created_utc": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config_sha256": sha256_hex(config_text.as_bytes()),
        "files": art.hashes(),
    });
    let manifest_path = art.write_json("manifest.json", &manifest)?;

    let mut table = Table::new(&["quantity", "value", "unit"]);
    let e = &eval.json["points"][0];
    let v = |x: &Value| match x {
        Value::Null => String::new(),
        x => x.to_string(),
    };
    for (q, val, u) in [
        ("squeezing", v(&e["squeezing_dB"]), "dB"),
        ("anti_squeezing", v(&e["anti_squeezing_dB"]), "dB"),
        ("mode_mismatch", v(&budget.json["budget"]["mode_mismatch_pct"]), "%"),
        (
            "theta_tilde_phase_detection",
            v(&taps["phase_detection"]["theta_std_mrad"]),
            "mrad",
        ),
        (
            "theta_tilde_best_tap",
            v(&taps["best_conventional"]["theta_std_mrad"]),
            "mrad",
        ),
        ("fit_alpha", v(&fit["alpha_pct_per_w"]), "%/W"),
        ("fit_loss", v(&fit["loss_pct"]), "%"),
        ("fit_theta_tilde", v(&fit["theta_tilde_mrad"]), "mrad"),
    ] {
        table.push(vec![q.into(), val, u.into()]);
    }
    table.push(vec!["run_dir".into(), art.dir().display().to_string(), String::new()]);
    let mut json = headline;
    json["manifest"] = json!(manifest_path.display().to_string());
    json["output"] = files_json(&art);
    Ok(Report { table, json })
}
