use super::trace::{Axis, Reference, Trace};
use crate::error::{Error, Result};

fn require_absolute(t: &Trace, what: &str) -> Result<()> {
    if t.reference != Reference::Absolute {
        return Err(Error::Config(format!("{what} trace must be in absolute units")));
    }
    if t.is_empty() {
        return Err(Error::Config(format!("{what} trace is empty")));
    }
    Ok(())
}

fn require_same_grid(a: &Trace, b: &Trace) -> Result<()> {
    if a.axis != b.axis || a.abscissa.len() != b.abscissa.len() {
        return Err(Error::Config("traces do not share an abscissa grid".into()));
    }
    if a.axis == Axis::Frequency && a.abscissa.iter().zip(&b.abscissa).any(|(x, y)| x != y) {
        return Err(Error::Config("traces do not share an abscissa grid".into()));
    }
    Ok(())
}

fn lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-point reference levels: per bin for sweeps, the trace mean for zero
/// span, whose samples are not paired in time with the signal's.
fn reference_levels(signal: &Trace, reference: &Trace) -> Vec<f64> {
    match signal.axis {
        Axis::Frequency => reference.level_db.clone(),
        Axis::Time => vec![reference.mean_db(); signal.len()],
    }
}

/// Refer an absolute trace to the shot-noise trace taken through the same
/// pipeline: per bin for sweeps, against the shot-trace mean for zero span.
pub fn normalize(signal: &Trace, shot: &Trace) -> Result<Trace> {
    require_absolute(signal, "signal")?;
    require_absolute(shot, "shot")?;
    if signal.axis != shot.axis {
        return Err(Error::Config("signal and shot traces have different axes".into()));
    }
    if signal.axis == Axis::Frequency {
        require_same_grid(signal, shot)?;
    }
    let refs = reference_levels(signal, shot);
    Ok(Trace {
        level_db: signal.level_db.iter().zip(&refs).map(|(s, n)| s - n).collect(),
        reference: Reference::ShotNoise,
        ..signal.clone()
    })
}

/// `10·log10((S − C) / (N − C))` per point.
///
/// Sweeps subtract bin by bin. For zero-span traces the circuit and shot
/// traces are reduced to their mean level first.
pub fn subtract_circuit_noise(signal: &Trace, circuit: &Trace, shot: &Trace) -> Result<Trace> {
    require_absolute(signal, "signal")?;
    require_absolute(circuit, "circuit")?;
    require_absolute(shot, "shot")?;
    if signal.axis == Axis::Frequency {
        require_same_grid(signal, circuit)?;
        require_same_grid(signal, shot)?;
    } else if circuit.axis != Axis::Time || shot.axis != Axis::Time {
        return Err(Error::Config(
            "signal, circuit and shot traces have different axes".into(),
        ));
    }
    let c = reference_levels(signal, circuit);
    let n = reference_levels(signal, shot);
    let mut level_db = Vec::with_capacity(signal.len());
    for i in 0..signal.len() {
        let cl = lin(c[i]);
        let num = lin(signal.level_db[i]) - cl;
        let den = lin(n[i]) - cl;
        if !(den > 0.0) || !(num > 0.0) {
            return Err(Error::Bin {
                index: i,
                abscissa: signal.abscissa[i],
            });
        }
        level_db.push(10.0 * (num / den).log10());
    }
    Ok(Trace {
        level_db,
        reference: Reference::ShotNoiseCircuitSubtracted,
        ..signal.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::trace::AnalyzerSettings;

    fn spectrum(levels: &[f64]) -> Trace {
        Trace {
            axis: Axis::Frequency,
            abscissa: (0..levels.len()).map(|i| 1e6 * (i + 1) as f64).collect(),
            level_db: levels.to_vec(),
            reference: Reference::Absolute,
            settings: AnalyzerSettings::sweep(1e6, 1e6 * levels.len() as f64),
            sample_rate: 1e8,
            seed: None,
        }
    }

    #[test]
    fn zero_circuit_is_plain_normalisation() {
        let s = spectrum(&[-10.0, -3.0, 5.0]);
        let n = spectrum(&[0.0, 1.0, 2.0]);
        let c = spectrum(&[-400.0; 3]);
        let a = subtract_circuit_noise(&s, &c, &n).unwrap();
        let b = normalize(&s, &n).unwrap();
        for (x, y) in a.level_db.iter().zip(&b.level_db) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(a.reference, Reference::ShotNoiseCircuitSubtracted);
    }

    #[test]
    fn shot_level_signal_is_zero() {
        let n = spectrum(&[0.0, 1.0, 2.0]);
        let c = spectrum(&[-20.0, -15.0, -10.0]);
        let a = subtract_circuit_noise(&n, &c, &n).unwrap();
        assert!(a.level_db.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hand_computed_bin() {
        // S = 0.1 + 0.01, N = 1 + 0.01, C = 0.01 -> 0.1 exactly.
        let s = spectrum(&[10.0 * 0.11f64.log10()]);
        let n = spectrum(&[10.0 * 1.01f64.log10()]);
        let c = spectrum(&[-20.0]);
        let a = subtract_circuit_noise(&s, &c, &n).unwrap();
        assert!((a.level_db[0] + 10.0).abs() < 1e-12);
    }

    #[test]
    fn exhausted_clearance_is_a_bin_error() {
        let s = spectrum(&[0.0, 0.0]);
        let n = spectrum(&[0.0, 0.0]);
        let c = spectrum(&[-10.0, 0.0]);
        match subtract_circuit_noise(&s, &c, &n) {
            Err(Error::Bin { index, abscissa }) => {
                assert_eq!(index, 1);
                assert_eq!(abscissa, 2e6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_a_config_error() {
        let s = spectrum(&[0.0, 0.0]);
        let mut n = spectrum(&[0.0, 0.0]);
        n.abscissa[1] += 1.0;
        assert!(matches!(normalize(&s, &n), Err(Error::Config(_))));
        assert!(matches!(subtract_circuit_noise(&s, &s, &n), Err(Error::Config(_))));
        let short = spectrum(&[0.0]);
        assert!(matches!(normalize(&s, &short), Err(Error::Config(_))));
    }

    #[test]
    fn normalised_input_is_rejected() {
        let s = spectrum(&[0.0]);
        let n = normalize(&s, &s).unwrap();
        assert!(normalize(&n, &s).is_err());
    }
}
