//! Fixed-step power samples and the ptrace file format: a whitespace
//! separated header of block names followed by one row of watts per step.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PowerTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSamples {
    pub names: Vec<String>,
    pub dt_seconds: f64,
    /// `rows[step][component]`, watts averaged over the step.
    pub rows: Vec<Vec<f64>>,
}

/// Sidecar written next to a ptrace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtraceMeta {
    pub dt_seconds: f64,
    pub base_clock_hz: f64,
    pub steps: usize,
}

impl PowerSamples {
    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn energy(&self) -> f64 {
        self.rows.iter().flatten().sum::<f64>() * self.dt_seconds
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Mean power per component over all steps.
    pub fn average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.names.len()];
        for row in &self.rows {
            for (a, p) in avg.iter_mut().zip(row) {
                *a += p;
            }
        }
        let n = self.rows.len().max(1) as f64;
        avg.iter_mut().for_each(|a| *a /= n);
        avg
    }

    pub fn to_text(&self) -> String {
        let mut out = self.names.join("\t");
        out.push('\n');
        for row in &self.rows {
            for (i, p) in row.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                write!(out, "{p}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_str(text: &str, dt_seconds: f64, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty ptrace".into()))?;
        let names: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines {
            let row = line
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| err(n + 1, format!("`{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != names.len() {
                return Err(err(
                    n + 1,
                    format!("{} values for {} columns", row.len(), names.len()),
                ));
            }
            rows.push(row);
        }
        Ok(PowerSamples {
            names,
            dt_seconds,
            rows,
        })
    }
}

/// Energy-conserving resampling onto steps of `dt_seconds`: each step holds
/// the energy falling inside it divided by `dt_seconds`.
pub fn resample(trace: &PowerTrace, dt_seconds: f64) -> Result<PowerSamples> {
    if !(dt_seconds > 0.0 && dt_seconds.is_finite()) {
        return Err(Error::invalid("resampling step", format!("dt must be positive, got {dt_seconds}")));
    }
    let tb = trace.seconds_per_cycle;
    let span = trace.duration as f64 * tb / dt_seconds;
    let steps = ((span - 1e-9).ceil() as usize).max(1);
    let mut rows = vec![vec![0.0; trace.components.len()]; steps];
    for (c, comp) in trace.components.iter().enumerate() {
        for seg in &comp.segments {
            let (t0, t1) = (seg.start as f64 * tb, seg.end as f64 * tb);
            let first = ((t0 / dt_seconds).floor() as usize).min(steps - 1);
            let last = (((t1 / dt_seconds).ceil() as usize).max(first + 1)).min(steps);
            for (k, row) in rows.iter_mut().enumerate().take(last).skip(first) {
                let lo = t0.max(k as f64 * dt_seconds);
                let hi = if k + 1 == steps {
                    t1
                } else {
                    t1.min((k + 1) as f64 * dt_seconds)
                };
                if hi > lo {
                    row[c] += seg.power * (hi - lo);
                }
            }
        }
    }
    for row in &mut rows {
        row.iter_mut().for_each(|e| *e /= dt_seconds);
    }
    Ok(PowerSamples {
        names: trace.components.iter().map(|c| c.name.clone()).collect(),
        dt_seconds,
        rows,
    })
}

pub fn meta_path(ptrace: &Path) -> PathBuf {
    let mut name = ptrace.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Resamples `trace` and writes the ptrace plus its `.meta` sidecar.
pub fn export_ptrace(trace: &PowerTrace, dt_seconds: f64, path: &Path) -> Result<PowerSamples> {
    let samples = resample(trace, dt_seconds)?;
    write_samples(&samples, (1.0 / trace.seconds_per_cycle).round(), path)?;
    Ok(samples)
}

pub fn write_samples(samples: &PowerSamples, base_clock_hz: f64, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, samples.to_text().as_bytes())?;
    let meta = PtraceMeta {
        dt_seconds: samples.dt_seconds,
        base_clock_hz,
        steps: samples.steps(),
    };
    crate::io::write_atomic(
        &meta_path(path),
        toml::to_string(&meta).expect("meta serializes").as_bytes(),
    )
}

/// Reads a ptrace and its sidecar.
pub fn read_ptrace(path: &Path) -> Result<(PowerSamples, PtraceMeta)> {
    let meta_file = meta_path(path);
    let meta: PtraceMeta = toml::from_str(&crate::io::read_to_string(&meta_file)?).map_err(|e| {
        Error::Parse {
            path: meta_file.clone(),
            message: e.to_string(),
        }
    })?;
    let samples = PowerSamples::parse_str(&crate::io::read_to_string(path)?, meta.dt_seconds, path)?;
    Ok((samples, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::{ComponentTrace, Granularity, Segment};

    fn constant(power: f64, duration: u64) -> PowerTrace {
        PowerTrace {
            seconds_per_cycle: 1e-9,
            duration,
            granularity: Granularity::Pixel,
            components: vec![ComponentTrace {
                name: "blk".into(),
                segments: vec![Segment::new(0, duration, power)],
            }],
        }
    }

    #[test]
    fn constant_trace_resamples_flat() {
        for dt in [1e-9, 7e-9, 1e-6] {
            let s = resample(&constant(2e-3, 5000), dt).unwrap();
            // all full steps carry exactly the constant; a trailing partial step less
            for row in &s.rows[..s.rows.len() - 1] {
                assert!((row[0] - 0.002).abs() < 1e-15, "{dt}: {}", row[0]);
            }
        }
        let s = resample(&constant(2e-3, 5000), 1e-6).unwrap();
        assert_eq!(s.steps(), 5);
        for line in s.to_text().lines().skip(1) {
            let v: f64 = line.parse().unwrap();
            assert!((v - 0.002).abs() < 1e-15, "{line}");
        }
    }

    #[test]
    fn single_step_is_the_average() {
        let mut t = constant(2e-3, 100);
        t.components[0].segments = vec![Segment::new(0, 50, 4e-3)];
        let s = resample(&t, 100e-9).unwrap();
        assert_eq!(s.steps(), 1);
        assert!((s.rows[0][0] - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_dt_rejected() {
        assert!(resample(&constant(1.0, 10), 0.0).is_err());
        assert!(resample(&constant(1.0, 10), -1.0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ptrace");
        let samples = export_ptrace(&constant(1.234567e-3, 3300), 1e-6, &path).unwrap();
        let (again, meta) = read_ptrace(&path).unwrap();
        assert_eq!(samples, again);
        assert_eq!(meta.steps, 4);
        assert_eq!(meta.base_clock_hz, 1e9);
    }
}
