//! CSV and text renderings of experiment results, plus atomic file writes.
//!
//! Floats use Rust's shortest round-trip formatting so identical runs give
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::StepRecord;

use super::fit::{FitResult, TransitionPoint, TRANSITION_SLOPE};
use super::scan::ScanResult;
use super::table::Table1Row;

/// Version tag written next to every output set.
pub const SCHEMA_VERSION: &str = "skqd-output/1";

pub const SCAN_COLUMNS: [&str; 9] = ["l0", "E0", "E0_exact", "rel_dev", "P", "dimK", "dimH", "k_used", "seed"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_string<R: Serialize>(header: Option<&[&str]>, rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(header.is_none()).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One row per grid point. Missing values are empty fields.
pub fn scan_csv(scan: &ScanResult) -> Result<String> {
    let rows = scan.points.iter().map(|p| {
        [
            p.l0.to_string(),
            opt(p.energy),
            opt(p.energy_exact),
            opt(p.rel_dev()),
            opt(p.particle_number),
            if p.error.is_some() { String::new() } else { p.dim_subspace.to_string() },
            p.dim_sector.to_string(),
            opt(p.k_used),
            opt(scan.seed),
        ]
    });
    csv_string(Some(&SCAN_COLUMNS), rows)
}

/// `N,l0c,sigma` rows.
pub fn points_csv(points: &[TransitionPoint]) -> Result<String> {
    let rows = points.iter().map(|p| (p.n_sites, p.l0c, p.sigma));
    csv_string(Some(&["N", "l0c", "sigma"]), rows)
}

pub fn table1_csv(rows: &[Table1Row]) -> Result<String> {
    let header = [
        "N", "k_max", "mean_rel_dev", "max_rel_dev", "dimK", "dimH", "dim_ratio", "seed", "dt", "shots",
    ];
    let rows = rows.iter().map(|r| {
        (
            r.n_sites,
            r.k_max,
            r.mean_rel_dev,
            r.max_rel_dev,
            r.dim_subspace,
            r.dim_sector,
            r.dim_ratio,
            r.seed,
            r.dt,
            r.shots,
        )
    });
    csv_string(Some(&header), rows)
}

/// Subspace growth per Trotter step.
pub fn dimension_csv(steps: &[StepRecord]) -> Result<String> {
    let rows = steps.iter().map(|s| {
        [
            s.k.to_string(),
            s.dim.to_string(),
            s.new_strings.to_string(),
            s.kept_shots.to_string(),
            opt(s.energy),
            s.accepted.to_string(),
        ]
    });
    csv_string(Some(&["k", "dim", "new_strings", "kept_shots", "E0", "accepted"]), rows)
}

/// Key-value report of the finite-size fit.
pub fn fit_report(fit: &FitResult) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("schema = {SCHEMA_VERSION:?}"));
    line(format!(
        "model = \"l0c(N) = {} * (m/g + a/sqrt(N) + b/N + c/N^2) / (1 - 1/N) + 1/2\"",
        TRANSITION_SLOPE
    ));
    line(format!("mass_ratio = {}", fit.mass_ratio));
    line(format!("points = {}", fit.points.len()));
    line(format!("dof = {}", fit.dof));
    line(format!("weighted = {}", fit.weighted));
    line(format!("residual_norm = {}", fit.residual_norm));
    line(String::new());
    line("[parameters]".into());
    line(format!("a = {}", fit.params.a));
    line(format!("b = {}", fit.params.b));
    line(format!("c = {}", fit.params.c));
    line(String::new());
    line("[uncertainties]".into());
    line(format!("a = {}", fit.errors.a));
    line(format!("b = {}", fit.errors.b));
    line(format!("c = {}", fit.errors.c));
    line(String::new());
    line("[covariance]".into());
    for (name, row) in ["a", "b", "c"].iter().zip(&fit.covariance) {
        line(format!("{name} = [{}, {}, {}]", row[0], row[1], row[2]));
    }
    line(String::new());
    line("[data]".into());
    for p in &fit.points {
        line(format!("N{} = {{ l0c = {}, sigma = {} }}", p.n_sites, p.l0c, p.sigma));
    }
    out
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::Io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::fit::{fit_l0c_model, model_l0c, MassShift};
    use crate::experiments::scan::scan_exact;
    use crate::hamiltonian::SchwingerParams;
    use crate::krylov::DEFAULT_MEMORY_BUDGET;

    #[test]
    fn exact_scan_csv_shape() {
        let params = SchwingerParams::standard(4, 0.0).unwrap();
        let grid = crate::experiments::GridSpec::default().points().unwrap();
        let scan = scan_exact(&params, &grid, DEFAULT_MEMORY_BUDGET).unwrap();
        let csv = scan_csv(&scan).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 42);
        assert_eq!(lines[0], "l0,E0,E0_exact,rel_dev,P,dimK,dimH,k_used,seed");
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], "0");
        assert_eq!(fields[2], "");
        assert_eq!(fields[5], "6");
        assert_eq!(fields[6], "6");
        let e0: f64 = fields[1].parse().unwrap();
        assert_eq!(e0, scan.points[0].energy.unwrap());
    }

    #[test]
    fn fit_report_sections() {
        let shift = MassShift { a: 6.5, b: -17.0, c: 246.0 };
        let pts: Vec<TransitionPoint> = [8, 10, 12, 14]
            .iter()
            .map(|&n| TransitionPoint { n_sites: n, l0c: model_l0c(n, 10.0, &shift), sigma: 0.01 })
            .collect();
        let report = fit_report(&fit_l0c_model(&pts, 10.0).unwrap());
        for section in ["[parameters]", "[uncertainties]", "[covariance]", "[data]"] {
            assert!(report.contains(section));
        }
        assert!(points_csv(&pts).unwrap().starts_with("N,l0c,sigma\n8,"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
