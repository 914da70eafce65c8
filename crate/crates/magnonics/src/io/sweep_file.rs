//! The sweep file container: a self-describing plain-text format with a
//! metadata header followed by the axes and the amplitude (and optional
//! phase) matrix in row-major order, rows = frequency.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every value bit-exactly.
//!
//! ```text
//! magnonics-sweep v1
//! temperature_k 0.055
//! power_dbm -140
//! attenuation_db -75
//! freq_unit Hz
//! current_unit A
//! amplitude_unit linear
//! n_freq 1001
//! n_current 41
//! phase present
//! tag label sweep00
//! note baseline interpolated for 3 rows
//! [freq]
//! ...
//! [current]
//! ...
//! [amplitude]
//! ...
//! [phase]
//! ...
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Result, SweepFileError};
use crate::sweep::{Grid2, Sweep, SweepMeta};

const MAGIC: &str = "magnonics-sweep";
const VERSION: &str = "v1";

/// Write a sweep to `path` in the text container format.
pub fn save_sweep(sweep: &Sweep, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(SweepFileError::Io)?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| crate::error::Error::SweepFile(SweepFileError::Io(e));

    writeln!(w, "{MAGIC} {VERSION}").map_err(io_err)?;
    writeln!(w, "temperature_k {}", sweep.meta.temperature_k).map_err(io_err)?;
    writeln!(w, "power_dbm {}", sweep.meta.power_dbm).map_err(io_err)?;
    writeln!(w, "attenuation_db {}", sweep.meta.attenuation_db).map_err(io_err)?;
    writeln!(w, "freq_unit Hz").map_err(io_err)?;
    writeln!(w, "current_unit A").map_err(io_err)?;
    writeln!(w, "amplitude_unit linear").map_err(io_err)?;
    writeln!(w, "n_freq {}", sweep.n_freq()).map_err(io_err)?;
    writeln!(w, "n_current {}", sweep.n_current()).map_err(io_err)?;
    writeln!(
        w,
        "phase {}",
        if sweep.phase().is_some() {
            "present"
        } else {
            "absent"
        }
    )
    .map_err(io_err)?;
    for (k, v) in &sweep.meta.tags {
        writeln!(w, "tag {k} {v}").map_err(io_err)?;
    }
    for note in &sweep.meta.notes {
        writeln!(w, "note {note}").map_err(io_err)?;
    }
    writeln!(w, "[freq]").map_err(io_err)?;
    for f in sweep.freq_hz() {
        writeln!(w, "{f}").map_err(io_err)?;
    }
    writeln!(w, "[current]").map_err(io_err)?;
    for i in sweep.current_a() {
        writeln!(w, "{i}").map_err(io_err)?;
    }
    let write_grid = |w: &mut BufWriter<fs::File>, grid: &Grid2| -> std::io::Result<()> {
        for r in 0..grid.n_rows() {
            let row = grid.row(r);
            let mut line = String::with_capacity(row.len() * 20);
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    line.push(' ');
                }
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    };
    writeln!(w, "[amplitude]").map_err(io_err)?;
    write_grid(&mut w, sweep.amplitude()).map_err(io_err)?;
    if let Some(phase) = sweep.phase() {
        writeln!(w, "[phase]").map_err(io_err)?;
        write_grid(&mut w, phase).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

fn header_err(msg: impl Into<String>) -> SweepFileError {
    SweepFileError::MalformedHeader(msg.into())
}

fn parse_f64(s: &str, what: &str) -> std::result::Result<f64, SweepFileError> {
    s.parse::<f64>()
        .map_err(|_| header_err(format!("cannot parse {what}: '{s}'")))
}

/// Read a sweep from the text container, validating every declared length,
/// the units, and the sweep invariants.
pub fn load_sweep(path: &Path) -> Result<Sweep> {
    let text = fs::read_to_string(path).map_err(SweepFileError::Io)?;
    let mut lines = text.lines().peekable();

    let first = lines
        .next()
        .ok_or_else(|| header_err("empty file"))?
        .trim();
    let mut magic_parts = first.split_whitespace();
    if magic_parts.next() != Some(MAGIC) {
        return Err(header_err(format!("missing '{MAGIC}' magic line")).into());
    }
    let version = magic_parts.next().unwrap_or("");
    if version != VERSION {
        return Err(SweepFileError::UnknownVersion(version.to_string()).into());
    }

    let mut temperature_k: Option<f64> = None;
    let mut power_dbm: Option<f64> = None;
    let mut attenuation_db: Option<f64> = None;
    let mut n_freq: Option<usize> = None;
    let mut n_current: Option<usize> = None;
    let mut freq_unit: Option<String> = None;
    let mut current_unit: Option<String> = None;
    let mut amplitude_unit: Option<String> = None;
    let mut has_phase: Option<bool> = None;
    let mut tags = BTreeMap::new();
    let mut notes = Vec::new();

    // Header lines until the first section marker.
    while let Some(&line) = lines.peek() {
        let line = line.trim();
        if line.starts_with('[') {
            break;
        }
        lines.next();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "temperature_k" => temperature_k = Some(parse_f64(rest, "temperature_k")?),
            "power_dbm" => power_dbm = Some(parse_f64(rest, "power_dbm")?),
            "attenuation_db" => attenuation_db = Some(parse_f64(rest, "attenuation_db")?),
            "n_freq" => {
                n_freq = Some(rest.parse().map_err(|_| {
                    header_err(format!("cannot parse n_freq: '{rest}'"))
                })?)
            }
            "n_current" => {
                n_current = Some(rest.parse().map_err(|_| {
                    header_err(format!("cannot parse n_current: '{rest}'"))
                })?)
            }
            "freq_unit" => freq_unit = Some(rest.to_string()),
            "current_unit" => current_unit = Some(rest.to_string()),
            "amplitude_unit" => amplitude_unit = Some(rest.to_string()),
            "phase" => {
                has_phase = Some(match rest {
                    "present" => true,
                    "absent" => false,
                    other => {
                        return Err(
                            header_err(format!("phase must be present/absent, got '{other}'"))
                                .into(),
                        )
                    }
                })
            }
            "tag" => {
                let (k, v) = rest
                    .split_once(' ')
                    .ok_or_else(|| header_err(format!("tag without value: '{rest}'")))?;
                tags.insert(k.to_string(), v.to_string());
            }
            "note" => notes.push(rest.to_string()),
            other => return Err(header_err(format!("unknown header field '{other}'")).into()),
        }
    }

    let temperature_k = temperature_k.ok_or_else(|| header_err("missing temperature_k"))?;
    let power_dbm = power_dbm.ok_or_else(|| header_err("missing power_dbm"))?;
    let attenuation_db = attenuation_db.ok_or_else(|| header_err("missing attenuation_db"))?;
    let n_freq = n_freq.ok_or_else(|| header_err("missing n_freq"))?;
    let n_current = n_current.ok_or_else(|| header_err("missing n_current"))?;
    let has_phase = has_phase.ok_or_else(|| header_err("missing phase field"))?;
    for (unit, expect, name) in [
        (freq_unit, "Hz", "freq_unit"),
        (current_unit, "A", "current_unit"),
        (amplitude_unit, "linear", "amplitude_unit"),
    ] {
        match unit {
            Some(u) if u == expect => {}
            Some(u) => {
                return Err(header_err(format!("{name} must be '{expect}', got '{u}'")).into())
            }
            None => return Err(header_err(format!("missing mandatory {name}")).into()),
        }
    }

    let expect_section = |lines: &mut std::iter::Peekable<std::str::Lines>,
                          name: &str|
     -> std::result::Result<(), SweepFileError> {
        match lines.next().map(str::trim) {
            Some(s) if s == format!("[{name}]") => Ok(()),
            Some(s) => Err(header_err(format!("expected [{name}] section, found '{s}'"))),
            None => Err(SweepFileError::LengthMismatch(format!(
                "file ends before [{name}] section"
            ))),
        }
    };

    let read_axis = |lines: &mut std::iter::Peekable<std::str::Lines>,
                     n: usize,
                     what: &str|
     -> std::result::Result<Vec<f64>, SweepFileError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| {
                SweepFileError::LengthMismatch(format!(
                    "{what}: declared {n} values, file ended at {}",
                    out.len()
                ))
            })?;
            out.push(parse_f64(line.trim(), what)?);
        }
        Ok(out)
    };

    expect_section(&mut lines, "freq")?;
    let freq_hz = read_axis(&mut lines, n_freq, "freq axis")?;
    expect_section(&mut lines, "current")?;
    let current_a = read_axis(&mut lines, n_current, "current axis")?;

    let read_grid = |lines: &mut std::iter::Peekable<std::str::Lines>,
                     what: &str|
     -> std::result::Result<Grid2, SweepFileError> {
        let mut rows = Vec::with_capacity(n_freq);
        for r in 0..n_freq {
            let line = lines.next().ok_or_else(|| {
                SweepFileError::LengthMismatch(format!(
                    "{what}: declared {n_freq} rows, file ended at {r}"
                ))
            })?;
            let row: std::result::Result<Vec<f64>, _> = line
                .split_whitespace()
                .map(|tok| parse_f64(tok, what))
                .collect();
            let row = row?;
            if row.len() != n_current {
                return Err(SweepFileError::LengthMismatch(format!(
                    "{what} row {r}: {} values, declared {n_current}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        Grid2::from_rows(rows)
            .map_err(|e| SweepFileError::LengthMismatch(format!("{what}: {e}")))
    };

    expect_section(&mut lines, "amplitude")?;
    let amplitude = read_grid(&mut lines, "amplitude")?;
    let phase = if has_phase {
        expect_section(&mut lines, "phase")?;
        Some(read_grid(&mut lines, "phase")?)
    } else {
        None
    };
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(SweepFileError::LengthMismatch(
            "trailing data after the declared payload".into(),
        )
        .into());
    }

    // Sorted-axis failures get their distinct error before the general
    // invariant validation.
    if !freq_hz.windows(2).all(|w| w[1] > w[0]) {
        return Err(SweepFileError::UnsortedAxis("frequency").into());
    }
    let increasing = current_a.windows(2).all(|w| w[1] > w[0]);
    let decreasing = current_a.windows(2).all(|w| w[1] < w[0]);
    if current_a.len() > 1 && !increasing && !decreasing {
        return Err(SweepFileError::UnsortedAxis("current").into());
    }

    let mut meta = SweepMeta::new(temperature_k, power_dbm, attenuation_db);
    meta.tags = tags;
    meta.notes = notes;
    Sweep::new(freq_hz, current_a, amplitude, phase, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use crate::error::Error;
    use crate::physics::{CavityParams, DispersionCal};
    use crate::synth::{generate_sweep, Background, KappaMLaw, TruthSpec};

    fn sample_sweep(with_phase: bool) -> Sweep {
        let omega_r = hz_to_angular(5.23902e9);
        let omega_m0 = hz_to_angular(4.9817e9);
        let truth = TruthSpec {
            cav: CavityParams::from_quality_factors(omega_r, 7125.0, 5439.0).unwrap(),
            cal: DispersionCal::new(
                omega_r,
                omega_m0,
                (omega_r - omega_m0) / 2.09,
                hz_to_angular(10.39e6),
            )
            .unwrap(),
            kappa_m_law: KappaMLaw::Constant(hz_to_angular(1.82e6)),
            background: Background {
                poly: vec![0.9, 0.05],
                ripple: None,
            },
            noise_sigma: 0.01,
            seed: 13,
            emit_phase: with_phase,
        };
        let f: Vec<f64> = (0..64)
            .map(|k| 5.23902e9 - 20e6 + 40e6 * k as f64 / 63.0)
            .collect();
        let i: Vec<f64> = (0..9).map(|k| 2.05 + 0.01 * k as f64).collect();
        let mut meta = SweepMeta::new(0.055, -140.0, -75.0);
        meta.tags.insert("label".into(), "roundtrip".into());
        meta.notes.push("synthetic sample".into());
        generate_sweep(&truth, &f, &i, meta).unwrap()
    }

    #[test]
    fn save_load_is_bit_exact() {
        let dir = std::env::temp_dir().join("magnonics_io_test_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        for (name, with_phase) in [("plain.sweep", false), ("phase.sweep", true)] {
            let sweep = sample_sweep(with_phase);
            let path = dir.join(name);
            save_sweep(&sweep, &path).unwrap();
            let loaded = load_sweep(&path).unwrap();
            assert_eq!(loaded.freq_hz(), sweep.freq_hz());
            assert_eq!(loaded.current_a(), sweep.current_a());
            assert_eq!(loaded.amplitude().data(), sweep.amplitude().data());
            assert_eq!(
                loaded.phase().map(|p| p.data().to_vec()),
                sweep.phase().map(|p| p.data().to_vec())
            );
            assert_eq!(loaded.meta, sweep.meta);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    fn write_and_load(content: &str) -> Result<Sweep> {
        let dir = std::env::temp_dir().join("magnonics_io_test_errors");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("case_{:016x}.sweep", {
            let mut h: u64 = 0xcbf29ce484222325;
            for b in content.as_bytes() {
                h ^= *b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
            h
        }));
        std::fs::write(&path, content).unwrap();
        let out = load_sweep(&path);
        std::fs::remove_file(&path).ok();
        out
    }

    const VALID: &str = "magnonics-sweep v1\ntemperature_k 0.05\npower_dbm -140\nattenuation_db -75\nfreq_unit Hz\ncurrent_unit A\namplitude_unit linear\nn_freq 3\nn_current 2\nphase absent\n[freq]\n1e9\n2e9\n3e9\n[current]\n0.1\n0.2\n[amplitude]\n1 1\n0.5 0.6\n1 1\n";

    #[test]
    fn valid_minimal_file_parses() {
        let sweep = write_and_load(VALID).unwrap();
        assert_eq!(sweep.n_freq(), 3);
        assert_eq!(sweep.n_current(), 2);
    }

    #[test]
    fn unknown_version_is_its_own_error() {
        let bad = VALID.replace("magnonics-sweep v1", "magnonics-sweep v9");
        match write_and_load(&bad) {
            Err(Error::SweepFile(SweepFileError::UnknownVersion(v))) => assert_eq!(v, "v9"),
            other => panic!("expected UnknownVersion, got {other:?}"),
        }
    }

    #[test]
    fn missing_unit_is_a_malformed_header() {
        let bad = VALID.replace("amplitude_unit linear\n", "");
        match write_and_load(&bad) {
            Err(Error::SweepFile(SweepFileError::MalformedHeader(_))) => {}
            other => panic!("expected MalformedHeader, got {other:?}"),
        }
    }

    #[test]
    fn wrong_row_count_is_a_length_mismatch() {
        let bad = VALID.replace("1 1\n0.5 0.6\n1 1\n", "1 1\n0.5 0.6\n");
        match write_and_load(&bad) {
            Err(Error::SweepFile(SweepFileError::LengthMismatch(_))) => {}
            other => panic!("expected LengthMismatch, got {other:?}"),
        }
    }

    #[test]
    fn wrong_column_count_is_a_length_mismatch() {
        let bad = VALID.replace("0.5 0.6\n", "0.5 0.6 0.7\n");
        match write_and_load(&bad) {
            Err(Error::SweepFile(SweepFileError::LengthMismatch(_))) => {}
            other => panic!("expected LengthMismatch, got {other:?}"),
        }
    }

    #[test]
    fn unsorted_axis_is_its_own_error() {
        let bad = VALID.replace("[freq]\n1e9\n2e9\n3e9\n", "[freq]\n1e9\n3e9\n2e9\n");
        match write_and_load(&bad) {
            Err(Error::SweepFile(SweepFileError::UnsortedAxis(axis))) => {
                assert_eq!(axis, "frequency")
            }
            other => panic!("expected UnsortedAxis, got {other:?}"),
        }
    }

    #[test]
    fn generated_sweep_survives_the_container_and_its_invariants() {
        let dir = std::env::temp_dir().join("magnonics_io_test_generated");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("generated.sweep");
        let sweep = sample_sweep(true);
        save_sweep(&sweep, &path).unwrap();
        // load_sweep re-validates all Sweep invariants on construction.
        let loaded = load_sweep(&path).unwrap();
        assert!(loaded.amplitude().data().iter().all(|&v| v >= 0.0));
        std::fs::remove_dir_all(&dir).ok();
    }
}
