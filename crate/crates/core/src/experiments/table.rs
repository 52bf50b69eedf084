//! Per-size summary: `k_max`, mean relative energy deviation over the
//! background-field grid and the subspace-to-sector dimension ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SchwingerParams;
use crate::krylov::{SimulatedShots, SkqdConfig, SkqdSession};

use super::scan::{linspace, scan_exact, scan_skqd, ScanResult};

/// Grid used for the mean deviation: 21 points on `[0, 2]`.
pub fn table1_grid() -> Vec<f64> {
    linspace(0.0, 2.0, 21).expect("static grid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub params: SchwingerParams,
    pub skqd: SkqdConfig,
    pub grid: Vec<f64>,
}

impl Table1Config {
    /// Default model at `n_sites` with the given SKQD settings and grid.
    pub fn standard(n_sites: usize, skqd: SkqdConfig) -> Result<Self> {
        Ok(Self {
            params: SchwingerParams::standard(n_sites, 0.0)?,
            skqd,
            grid: table1_grid(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n_sites: usize,
    /// Largest accepted Trotter step over the grid.
    pub k_max: usize,
    pub mean_rel_dev: f64,
    pub max_rel_dev: f64,
    /// Largest subspace dimension over the grid.
    pub dim_subspace: usize,
    pub dim_sector: u64,
    pub dim_ratio: f64,
    pub seed: u64,
    pub dt: f64,
    pub shots: u64,
}

/// Summarizes an SKQD scan that already carries exact energies.
pub fn table1_row(skqd: &ScanResult, config: &SkqdConfig) -> Result<Table1Row> {
    if skqd.failures() > 0 {
        return Err(Error::InvalidParams(format!(
            "{} of {} grid points failed",
            skqd.failures(),
            skqd.points.len()
        )));
    }
    let mean_rel_dev = skqd
        .mean_rel_dev()
        .ok_or_else(|| Error::InvalidParams("scan has no exact reference energies".into()))?;
    let k_max = skqd.points.iter().filter_map(|p| p.k_used).max().unwrap_or(0);
    let dim_subspace = skqd.points.iter().map(|p| p.dim_subspace).max().unwrap_or(0);
    let dim_sector = skqd.points[0].dim_sector;
    Ok(Table1Row {
        n_sites: skqd.n_sites(),
        k_max,
        mean_rel_dev,
        max_rel_dev: skqd.max_rel_dev().unwrap_or(mean_rel_dev),
        dim_subspace,
        dim_sector,
        dim_ratio: dim_subspace as f64 / dim_sector as f64,
        seed: config.seed,
        dt: config.dt,
        shots: config.shots,
    })
}

/// Simulated SKQD scan against an exact scan for one configuration.
pub fn table1_entry(config: &Table1Config, budget_bytes: u64) -> Result<(Table1Row, ScanResult)> {
    let exact = scan_exact(&config.params, &config.grid, budget_bytes)?;
    let mut source = SimulatedShots::new(config.params.n_sites, &config.skqd)?;
    let mut session = SkqdSession::new(&config.skqd, &mut source)?;
    let mut skqd = scan_skqd(&config.params, &config.grid, &mut session)?;
    skqd.attach_exact(&exact)?;
    Ok((table1_row(&skqd, &config.skqd)?, skqd))
}

/// One row per configuration, in order.
pub fn table1_report(configs: &[Table1Config], budget_bytes: u64) -> Result<Vec<Table1Row>> {
    configs
        .iter()
        .map(|c| table1_entry(c, budget_bytes).map(|(row, _)| row))
        .collect()
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

/// `0.0021` becomes `2.1·10⁻³`.
pub fn format_sci(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let mut exponent = value.abs().log10().floor() as i32;
    let mut mantissa = value / 10f64.powi(exponent);
    // Rounding can carry the mantissa to 10.
    if format!("{:.*}", digits, mantissa.abs()).starts_with("10") {
        exponent += 1;
        mantissa /= 10.0;
    }
    if exponent == 0 {
        return format!("{:.*}", digits, mantissa);
    }
    let mut s = format!("{:.*}·10", digits, mantissa);
    if exponent < 0 {
        s.push('⁻');
    }
    s.extend(
        exponent
            .unsigned_abs()
            .to_string()
            .bytes()
            .map(|d| SUPERSCRIPTS[(d - b'0') as usize]),
    );
    s
}

/// Plain-text table with one line per size.
pub fn format_table1(rows: &[Table1Row]) -> String {
    let mut out = String::from("   N  k_max  mean rel. dev.  dimK/dimH   dimK      dimH  seed\n");
    for r in rows {
        out.push_str(&format!(
            "{:>4}  {:>5}  {:<14}  {:>9.2}  {:>5}  {:>8}  {}\n",
            r.n_sites,
            r.k_max,
            format_sci(r.mean_rel_dev, 1),
            r.dim_ratio,
            r.dim_subspace,
            r.dim_sector,
            r.seed
        ));
    }
    out
}
