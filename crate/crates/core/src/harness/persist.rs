//! Versioned JSON run records with a sibling curve CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DephasingCurve, RunConfig};
use crate::error::{Error, Result};
use crate::units::s_to_us;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub code_version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub timing: Timing,
    pub curve: DephasingCurve,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Sibling CSV of a record path.
pub fn csv_path(record: &Path) -> PathBuf {
    record.with_extension("csv")
}

/// Writes `t_us,M,R,D,D_err`.
pub fn write_curve_csv(curve: &DephasingCurve, path: &Path) -> Result<()> {
    let mut out = String::from("t_us,M,R,D,D_err\n");
    for k in 0..curve.times.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s_to_us(curve.times[k]),
            curve.m_abs[k],
            curve.r_rms[k],
            curve.d[k],
            curve.d_err[k]
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Writes the JSON record to `path` and the curve CSV next to it. Returns the CSV path.
pub fn persist_run(cfg: &RunConfig, curve: &DephasingCurve, timing: &Timing, path: &Path) -> Result<PathBuf> {
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        timing: *timing,
        curve: curve.clone(),
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| Error::Schema(e.to_string()))?;
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(json.as_bytes()).map_err(io_err(path))?;
    f.write_all(b"\n").map_err(io_err(path))?;
    let csv = csv_path(path);
    write_curve_csv(curve, &csv)?;
    Ok(csv)
}

/// Reads a record written by [`persist_run`].
pub fn load_run(path: &Path) -> Result<(RunConfig, DephasingCurve)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "record has schema version {v}, this build reads {SCHEMA_VERSION}"
            )))
        }
        None => return Err(Error::Schema("record has no schema_version".into())),
    }
    let record: RunRecord = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    Ok((record.config, record.curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::tests::small_config;
    use crate::harness::run_experiment_with;
    use crate::units::mhz_to_rad_s;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let cfg = small_config(mhz_to_rad_s(2.0));
        let (curve, timing) = run_experiment_with(&cfg, Some(2)).unwrap();
        let csv = persist_run(&cfg, &curve, &timing, &path).unwrap();
        let (cfg2, curve2) = load_run(&path).unwrap();
        assert_eq!(cfg2, cfg);
        assert_eq!(curve2, curve);
        let bits = |c: &DephasingCurve| c.d.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&curve2), bits(&curve));
        let text = fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().next(), Some("t_us,M,R,D,D_err"));
        assert_eq!(text.lines().count(), curve.times.len() + 1);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let cfg = small_config(0.0);
        let (curve, timing) = run_experiment_with(&cfg, Some(1)).unwrap();
        persist_run(&cfg, &curve, &timing, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(load_run(&path), Err(Error::Schema(_))));
        assert!(matches!(load_run(&dir.path().join("missing.json")), Err(Error::Io { .. })));
    }
}
