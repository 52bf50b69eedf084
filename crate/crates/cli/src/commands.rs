use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use skqd::experiments::svg::{self, Figure, Mark, Panel, Series};
use skqd::experiments::{
    detect_l0c, exact_l0c, fit_l0c_model, fit_report, format_table1, model_l0c, points_csv, scan_csv, scan_exact,
    scan_skqd, skqd_l0c, table1_csv, table1_entry, table1_grid, write_atomic, dimension_csv, GridSpec, ScanResult,
    Table1Config, Table1Row, TransitionPoint, SCHEMA_VERSION,
};
use skqd::hamiltonian::SchwingerParams;
use skqd::krylov::{check_exact_feasible, ReplayShots, ShotSource, SimulatedShots, SkqdSession, DEFAULT_MEMORY_BUDGET};
use skqd::sampling::{ingest_counts, postselect};
use skqd::sector::sector_dimension;
use skqd::{Error, Result};

use crate::config::{Format, Method, RunConfig};

/// Output directory that records every file it writes.
struct OutputSet {
    dir: PathBuf,
    command: &'static str,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'a str,
    command: &'a str,
    seed: u64,
    files: &'a [String],
}

impl OutputSet {
    fn create(cfg: &RunConfig, command: &'static str) -> Result<Self> {
        fs::create_dir_all(&cfg.output.dir)?;
        Ok(Self {
            dir: cfg.output.dir.clone(),
            command,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes the resolved config and the manifest.
    fn finish(mut self, cfg: &RunConfig) -> Result<()> {
        let config = format!("# skqd {}\n{}", self.command, cfg.to_toml());
        self.write("config.toml", &config)?;
        let manifest = Manifest {
            schema: SCHEMA_VERSION,
            command: self.command,
            seed: cfg.run.seed,
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.into()))?;
        text.push('\n');
        write_atomic(&self.dir.join("manifest.json"), text.as_bytes())?;
        eprintln!("wrote {} files to {}", self.files.len() + 1, self.dir.display());
        Ok(())
    }
}

fn write_scan(out: &mut OutputSet, cfg: &RunConfig, scan: &ScanResult, exact: Option<&ScanResult>) -> Result<()> {
    out.write("scan.csv", &scan_csv(scan)?)?;
    if cfg.wants(Format::Svg) {
        out.write("energy.svg", &svg::energy_figure(scan))?;
        out.write("particle_number.svg", &svg::particle_number_figure(scan, exact))?;
    }
    Ok(())
}

fn params_at(cfg: &RunConfig, n_sites: usize) -> Result<SchwingerParams> {
    let mut model = cfg.model.clone();
    model.n_sites = n_sites;
    model.params()
}

pub fn cmd_exact(mut cfg: RunConfig) -> Result<()> {
    let params = cfg.model.params()?;
    check_exact_feasible(params.n_sites, DEFAULT_MEMORY_BUDGET)?;
    let grid = cfg.grid_points(GridSpec::default())?;
    eprintln!("N = {}, dim H = {}", params.n_sites, sector_dimension(params.n_sites));
    let scan = scan_exact(&params, &grid, DEFAULT_MEMORY_BUDGET)?;
    let mut out = OutputSet::create(&cfg, "exact")?;
    write_scan(&mut out, &cfg, &scan, None)?;
    if cfg.wants(Format::Json) {
        out.write_json("scan.json", &scan)?;
    }
    report_failures(&scan);
    out.finish(&cfg)
}

#[derive(Serialize)]
struct RunRecord<'a> {
    schema: &'a str,
    config: &'a RunConfig,
    counts_files: Vec<String>,
    /// `(k, dim)` of the accumulated subspace per sampled step.
    dimensions: Vec<(usize, usize)>,
    scan: &'a ScanResult,
}

pub fn cmd_skqd(mut cfg: RunConfig, counts_files: &[PathBuf], with_exact: bool) -> Result<()> {
    let params = cfg.model.params()?;
    let grid = cfg.grid_points(GridSpec::default())?;
    let mut source: Box<dyn ShotSource> = if counts_files.is_empty() {
        Box::new(SimulatedShots::new(params.n_sites, &cfg.run)?)
    } else {
        let batches = counts_files.iter().map(ingest_counts).collect::<Result<Vec<_>>>()?;
        Box::new(ReplayShots::new(batches)?)
    };
    if source.n_sites() != params.n_sites {
        return Err(Error::SizeMismatch {
            expected: params.n_sites,
            found: source.n_sites(),
        });
    }
    eprintln!("N = {}, dim H = {}", params.n_sites, sector_dimension(params.n_sites));
    let mut session = SkqdSession::new(&cfg.run, source.as_mut())?;
    let mut scan = scan_skqd(&params, &grid, &mut session)?;
    let dims: Vec<usize> = session.steps().dims().to_vec();
    drop(session);

    let exact = if with_exact {
        match check_exact_feasible(params.n_sites, DEFAULT_MEMORY_BUDGET) {
            Ok(()) => {
                let exact = scan_exact(&params, &grid, DEFAULT_MEMORY_BUDGET)?;
                scan.attach_exact(&exact)?;
                Some(exact)
            }
            Err(e) => {
                eprintln!("skipping exact reference: {e}");
                None
            }
        }
    } else {
        None
    };

    let mut out = OutputSet::create(&cfg, "skqd")?;
    write_scan(&mut out, &cfg, &scan, exact.as_ref())?;
    let deepest = scan.points.iter().filter(|p| p.error.is_none()).max_by_key(|p| p.steps.len());
    if let Some(p) = deepest {
        out.write("dimension.csv", &dimension_csv(&p.steps)?)?;
        if cfg.wants(Format::Svg) {
            out.write("dimension.svg", &svg::dimension_figure(params.n_sites, &p.steps, p.dim_sector))?;
        }
    }
    let record = RunRecord {
        schema: SCHEMA_VERSION,
        config: &cfg,
        counts_files: counts_files.iter().map(|p| p.display().to_string()).collect(),
        dimensions: dims.iter().enumerate().map(|(i, &d)| (i + 1, d)).collect(),
        scan: &scan,
    };
    out.write_json("run.json", &record)?;

    let k_max = scan.points.iter().filter_map(|p| p.k_used).max().unwrap_or(0);
    let dim = scan.points.iter().map(|p| p.dim_subspace).max().unwrap_or(0);
    eprintln!(
        "k_max = {k_max}, dim K = {dim}, dim K / dim H = {:.4}",
        dim as f64 / sector_dimension(params.n_sites) as f64
    );
    if let Some(d) = scan.mean_rel_dev() {
        eprintln!("mean relative deviation = {d:e}, max = {:e}", scan.max_rel_dev().unwrap_or(d));
    }
    report_failures(&scan);
    out.finish(&cfg)
}

fn report_failures(scan: &ScanResult) {
    for p in scan.points.iter().filter(|p| p.error.is_some()) {
        eprintln!("l0 = {}: {}", p.l0, p.error.as_deref().unwrap_or_default());
    }
}

#[derive(Serialize)]
struct TransitionRecord {
    n_sites: usize,
    l0c: f64,
    sigma: f64,
    coarse_l0c: f64,
    coarse_sigma: f64,
}

pub fn cmd_scan_fit(mut cfg: RunConfig) -> Result<()> {
    if cfg.model.x.is_some() {
        return Err(Error::InvalidParams(
            "scan-fit compares sizes at fixed volume; set `volume` instead of `x`".into(),
        ));
    }
    if cfg.sweep.sizes.is_empty() {
        return Err(Error::InvalidParams("no sizes given".into()));
    }
    let grid = cfg.grid_points(GridSpec::default())?;
    let mut out = OutputSet::create(&cfg, "scan-fit")?;
    let mut points = Vec::new();
    let mut records = Vec::new();
    for &n in &cfg.sweep.sizes {
        let params = params_at(&cfg, n)?;
        let (scan, t) = match cfg.sweep.method {
            Method::Exact => exact_l0c(&params, &grid, cfg.sweep.refine_rounds, DEFAULT_MEMORY_BUDGET)?,
            Method::Skqd => {
                let mut source = SimulatedShots::new(n, &cfg.run)?;
                let mut session = SkqdSession::new(&cfg.run, &mut source)?;
                skqd_l0c(&params, &grid, cfg.sweep.refine_rounds, &mut session)?
            }
        };
        let coarse = detect_l0c(&scan)?;
        eprintln!("N = {n}: l0,c = {} +- {}", t.l0c, t.sigma);
        out.write(&format!("scan_N{n}.csv"), &scan_csv(&scan)?)?;
        points.push(TransitionPoint {
            n_sites: n,
            l0c: t.l0c,
            sigma: t.sigma,
        });
        records.push(TransitionRecord {
            n_sites: n,
            l0c: t.l0c,
            sigma: t.sigma,
            coarse_l0c: coarse.l0c,
            coarse_sigma: coarse.sigma,
        });
    }
    out.write("points.csv", &points_csv(&points)?)?;
    if cfg.wants(Format::Json) {
        out.write_json("transitions.json", &records)?;
    }
    let fit = match fit_l0c_model(&points, cfg.model.mass_ratio) {
        Ok(fit) => fit,
        Err(e) => {
            out.finish(&cfg)?;
            return Err(e);
        }
    };
    eprintln!(
        "a = {} +- {}, b = {} +- {}, c = {} +- {}",
        fit.params.a, fit.errors.a, fit.params.b, fit.errors.b, fit.params.c, fit.errors.c
    );
    out.write("fit.txt", &fit_report(&fit))?;
    if cfg.wants(Format::Json) {
        out.write_json("fit.json", &fit)?;
    }
    if cfg.wants(Format::Svg) {
        let data = points.iter().map(|p| (p.n_sites as f64, p.l0c)).collect();
        let (lo, hi) = (cfg.sweep.sizes.iter().min().unwrap(), cfg.sweep.sizes.iter().max().unwrap());
        let curve = (*lo..=*hi)
            .step_by(2)
            .map(|n| (n as f64, model_l0c(n, cfg.model.mass_ratio, &fit.params)))
            .collect();
        let fig = Figure::new("Transition point")
            .with(
                Panel::new("N", "l0,c")
                    .with(Series::new("fit", curve, "black", Mark::Line))
                    .with(Series::new(cfg.sweep.method_name(), data, "#d62728", Mark::Dots)),
            )
            .render();
        out.write("transition.svg", &fig)?;
    }
    out.finish(&cfg)
}

pub fn cmd_table1(mut cfg: RunConfig) -> Result<()> {
    if cfg.sweep.sizes.is_empty() {
        return Err(Error::InvalidParams("no sizes given".into()));
    }
    let default_grid = GridSpec::new(0.0, 2.0, table1_grid().len())?;
    let grid = cfg.grid_points(default_grid)?;
    let seeds = if cfg.sweep.seeds.is_empty() {
        vec![cfg.run.seed]
    } else {
        cfg.sweep.seeds.clone()
    };
    let mut out = OutputSet::create(&cfg, "table1")?;
    let mut rows: Vec<Table1Row> = Vec::new();
    for &n in &cfg.sweep.sizes {
        check_exact_feasible(n, DEFAULT_MEMORY_BUDGET)?;
        for &seed in &seeds {
            let mut skqd = cfg.run.clone();
            skqd.seed = seed;
            let entry = Table1Config {
                params: params_at(&cfg, n)?,
                skqd,
                grid: grid.clone(),
            };
            let (row, scan) = table1_entry(&entry, DEFAULT_MEMORY_BUDGET)?;
            eprint!("{}", format_table1(std::slice::from_ref(&row)).lines().nth(1).unwrap_or_default());
            eprintln!();
            out.write(&format!("scan_N{n}_seed{seed}.csv"), &scan_csv(&scan)?)?;
            rows.push(row);
        }
    }
    let table = format_table1(&rows);
    print!("{table}");
    out.write("table1.txt", &table)?;
    out.write("table1.csv", &table1_csv(&rows)?)?;
    if cfg.wants(Format::Json) {
        out.write_json("table1.json", &rows)?;
    }
    if cfg.wants(Format::Svg) {
        out.write("dim_ratio.svg", &svg::dim_ratio_figure(&rows))?;
    }
    out.finish(&cfg)
}

/// Parses counts files and prints what survives post-selection.
pub fn cmd_ingest_check(files: &[PathBuf], p_min: f64, n_sites: Option<usize>) -> Result<()> {
    for path in files {
        check_one(path, p_min, n_sites)?;
    }
    Ok(())
}

fn check_one(path: &Path, p_min: f64, n_sites: Option<usize>) -> Result<()> {
    let counts = ingest_counts(path)?;
    if let Some(n) = n_sites {
        if counts.n_sites != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: counts.n_sites,
            });
        }
    }
    let kept = postselect(&counts, p_min)?;
    println!(
        "{}: N={} shots={} recorded={} distinct={} kept={} (p_min = {p_min})",
        path.display(),
        counts.n_sites,
        counts.n_shots,
        counts.total(),
        counts.len(),
        kept.len()
    );
    for (b, c) in &kept.counts {
        println!("  {b} {c} {:.6}", *c as f64 / counts.n_shots as f64);
    }
    Ok(())
}
