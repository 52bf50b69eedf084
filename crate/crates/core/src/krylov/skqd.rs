//! The adaptive SKQD loop.
//!
//! Trotter step `k = 1, 2, ...` evolves the reference state once more, samples
//! it, post-selects, and adds the surviving strings to the subspace. The
//! projected Hamiltonian is then diagonalized. Step `k` is accepted when its
//! energy improves on the last accepted one by a relative amount above the
//! threshold `c`; the loop stops after `patience` consecutive rejections. The
//! reported result is the last accepted step.
//!
//! Sampling does not depend on `l0`, so a scan samples each step once into a
//! [`SampledSteps`] cache and every grid point runs its own stopping decision
//! over the shared steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::evolution::{reference_state, ReferenceState, SectorState, TrotterCircuit};
use crate::hamiltonian::SchwingerParams;
use crate::observables::expected_particle_number;
use crate::sampling::{postselect, sample_stream, NoiseSpec, ShotCounts};
use crate::sector::sector_dimension;

use super::basis::SubspaceBasis;
use super::projected::project;
use super::solver::{dense_ground_state, lanczos_ground_state, GroundState, LanczosOptions, DENSE_LIMIT};

/// How the stopping decision treats a grid of background fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingMode {
    /// Every `l0` stops on its own energy sequence.
    #[default]
    PerL0,
    /// One decision for the whole grid: a step is accepted when any grid
    /// point improves by more than `c`, and all points share `k_max`.
    Shared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkqdConfig {
    pub dt: f64,
    pub shots: u64,
    pub seed: u64,
    pub p_min: f64,
    /// Relative improvement `c` a step must exceed to be accepted.
    pub threshold: f64,
    pub patience: usize,
    pub max_steps: usize,
    pub reference: ReferenceState,
    pub noise: NoiseSpec,
    pub stopping: StoppingMode,
}

impl Default for SkqdConfig {
    fn default() -> Self {
        Self {
            dt: 0.2,
            shots: 1000,
            seed: 0,
            p_min: 0.0,
            threshold: 1e-2,
            patience: 3,
            max_steps: 60,
            reference: ReferenceState::Alternating10,
            noise: NoiseSpec::ideal(),
            stopping: StoppingMode::PerL0,
        }
    }
}

impl SkqdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !self.dt.is_finite() {
            return bad(format!("dt must be finite, got {}", self.dt));
        }
        if self.shots == 0 {
            return bad("shots must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.p_min) {
            return bad(format!("p_min must be in [0, 1), got {}", self.p_min));
        }
        if !(self.threshold > 0.0) {
            return bad(format!("threshold c must be > 0, got {}", self.threshold));
        }
        if self.patience == 0 {
            return bad("patience must be >= 1".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1".into());
        }
        self.noise.validate()
    }
}

/// Supplier of raw shot counts, one batch per Trotter step.
pub trait ShotSource {
    fn n_sites(&self) -> usize;

    /// Counts for step `k`, requested in order `1, 2, ...`. `None` means the
    /// source has no more steps.
    fn step_counts(&mut self, k: usize) -> Result<Option<ShotCounts>>;
}

/// Sector-restricted simulation of the Trotter circuits.
pub struct SimulatedShots {
    circuit: TrotterCircuit,
    state: SectorState,
    steps_applied: usize,
    dt: f64,
    shots: u64,
    seed: u64,
    noise: NoiseSpec,
}

impl SimulatedShots {
    pub fn new(n_sites: usize, config: &SkqdConfig) -> Result<Self> {
        config.validate()?;
        let state = reference_state(config.reference, n_sites)?;
        let circuit = TrotterCircuit::new(state.basis().clone());
        Ok(Self {
            circuit,
            state,
            steps_applied: 0,
            dt: config.dt,
            shots: config.shots,
            seed: config.seed,
            noise: config.noise,
        })
    }

    /// `U(dt)^k |psi0⟩` for the most recently requested step.
    pub fn state(&self) -> &SectorState {
        &self.state
    }
}

impl ShotSource for SimulatedShots {
    fn n_sites(&self) -> usize {
        self.state.basis().n_sites()
    }

    fn step_counts(&mut self, k: usize) -> Result<Option<ShotCounts>> {
        if k < self.steps_applied {
            return Err(Error::InvalidParams(format!(
                "step {k} requested after step {}",
                self.steps_applied
            )));
        }
        while self.steps_applied < k {
            self.circuit.step(&mut self.state, self.dt);
            self.steps_applied += 1;
        }
        sample_stream(&self.state, self.shots, self.seed, k as u64, self.noise).map(Some)
    }
}

/// Pre-recorded counts, the `k`-th batch feeding step `k`.
#[derive(Clone, Debug)]
pub struct ReplayShots {
    n_sites: usize,
    steps: Vec<ShotCounts>,
}

impl ReplayShots {
    pub fn new(steps: Vec<ShotCounts>) -> Result<Self> {
        let n_sites = steps
            .first()
            .map(|c| c.n_sites)
            .ok_or_else(|| Error::InvalidParams("replay needs at least one counts batch".into()))?;
        if let Some(bad) = steps.iter().find(|c| c.n_sites != n_sites) {
            return Err(Error::SizeMismatch {
                expected: n_sites,
                found: bad.n_sites,
            });
        }
        Ok(Self { n_sites, steps })
    }
}

impl ShotSource for ReplayShots {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn step_counts(&mut self, k: usize) -> Result<Option<ShotCounts>> {
        Ok(k.checked_sub(1).and_then(|i| self.steps.get(i)).cloned())
    }
}

/// Post-selected steps drawn so far, accumulated into one insertion-ordered
/// basis. The subspace after step `k` is its first `dims[k - 1]` entries.
pub struct SampledSteps<'a> {
    source: &'a mut dyn ShotSource,
    p_min: f64,
    max_steps: usize,
    basis: SubspaceBasis,
    dims: Vec<usize>,
    new_strings: Vec<usize>,
    kept_shots: Vec<u64>,
    exhausted: bool,
}

impl<'a> SampledSteps<'a> {
    pub fn new(source: &'a mut dyn ShotSource, p_min: f64, max_steps: usize) -> Result<Self> {
        let basis = SubspaceBasis::new(source.n_sites())?;
        Ok(Self {
            source,
            p_min,
            max_steps,
            basis,
            dims: Vec::new(),
            new_strings: Vec::new(),
            kept_shots: Vec::new(),
            exhausted: false,
        })
    }

    pub fn available(&self) -> usize {
        self.dims.len()
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    /// Subspace dimension after each sampled step.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Draws steps until `k` are available or the source runs out.
    pub fn ensure(&mut self, k: usize) -> Result<()> {
        let k = k.min(self.max_steps);
        while !self.exhausted && self.dims.len() < k {
            let step = self.dims.len() + 1;
            match self.source.step_counts(step)? {
                None => self.exhausted = true,
                Some(raw) => {
                    let kept = postselect(&raw, self.p_min)?;
                    let added = self.basis.extend(&kept, step)?;
                    self.dims.push(self.basis.dim());
                    self.new_strings.push(added);
                    self.kept_shots.push(kept.total());
                }
            }
        }
        if self.dims.len() >= self.max_steps {
            self.exhausted = true;
        }
        Ok(())
    }

    fn snapshot(&self) -> StepsView<'_> {
        StepsView {
            basis: &self.basis,
            dims: &self.dims,
            new_strings: &self.new_strings,
            kept_shots: &self.kept_shots,
            exhausted: self.exhausted,
        }
    }
}

#[derive(Clone, Copy)]
struct StepsView<'s> {
    basis: &'s SubspaceBasis,
    dims: &'s [usize],
    new_strings: &'s [usize],
    kept_shots: &'s [u64],
    exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub dim: usize,
    pub new_strings: usize,
    pub kept_shots: u64,
    /// `None` when nothing had survived post-selection yet.
    pub energy: Option<f64>,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisAmplitude {
    pub bitstring: Bitstring,
    pub amplitude: f64,
    pub first_step: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkqdResult {
    pub params: SchwingerParams,
    pub steps: Vec<StepRecord>,
    /// Last accepted step.
    pub k_max: usize,
    pub energy: f64,
    pub particle_number: f64,
    pub dim: usize,
    pub dim_sector: u64,
    pub gap: Option<f64>,
    pub degenerate: bool,
    #[serde(skip)]
    pub basis: SubspaceBasis,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

impl SkqdResult {
    pub fn dim_ratio(&self) -> f64 {
        self.dim as f64 / self.dim_sector as f64
    }

    pub fn ground_state(&self) -> Vec<BasisAmplitude> {
        self.basis
            .iter()
            .zip(&self.vector)
            .enumerate()
            .map(|(i, (b, &amplitude))| BasisAmplitude {
                bitstring: b,
                amplitude,
                first_step: self.basis.provenance(i).unwrap_or(0),
            })
            .collect()
    }

    /// Dimension after every sampled step, accepted or not.
    pub fn dimension_trace(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.k, s.dim)).collect()
    }
}

/// Sampled steps plus run settings, reusable across many background fields.
pub struct SkqdSession<'a> {
    config: SkqdConfig,
    steps: SampledSteps<'a>,
}

impl<'a> SkqdSession<'a> {
    pub fn new(config: &SkqdConfig, source: &'a mut dyn ShotSource) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config: config.clone(),
            steps: SampledSteps::new(source, config.p_min, config.max_steps)?,
        })
    }

    pub fn config(&self) -> &SkqdConfig {
        &self.config
    }

    pub fn steps(&self) -> &SampledSteps<'a> {
        &self.steps
    }

    pub fn run(&mut self, params: &SchwingerParams) -> Result<SkqdResult> {
        self.run_grid(params, &[params.l0])?.pop().expect("one grid point")
    }

    /// One result per grid point; failures are reported per point.
    pub fn run_grid(&mut self, params: &SchwingerParams, grid: &[f64]) -> Result<Vec<Result<SkqdResult>>> {
        params.validate()?;
        if self.steps.basis.n_sites() != params.n_sites {
            return Err(Error::SizeMismatch {
                expected: params.n_sites,
                found: self.steps.basis.n_sites(),
            });
        }
        if grid.is_empty() {
            return Err(Error::InvalidParams("l0 grid is empty".into()));
        }
        match self.config.stopping {
            StoppingMode::PerL0 => per_l0(params, grid, &self.config, &mut self.steps),
            StoppingMode::Shared => shared(params, grid, &self.config, &mut self.steps),
        }
    }
}

/// One SKQD run at `params.l0`.
pub fn run_skqd(params: &SchwingerParams, config: &SkqdConfig, source: &mut dyn ShotSource) -> Result<SkqdResult> {
    SkqdSession::new(config, source)?.run(params)
}

/// SKQD over a grid of background fields sharing one sampled step sequence.
pub fn run_skqd_grid(
    params: &SchwingerParams,
    grid: &[f64],
    config: &SkqdConfig,
    source: &mut dyn ShotSource,
) -> Result<Vec<Result<SkqdResult>>> {
    SkqdSession::new(config, source)?.run_grid(params, grid)
}

enum Outcome {
    Done(Result<SkqdResult>),
    NeedMore(usize),
}

fn per_l0(
    params: &SchwingerParams,
    grid: &[f64],
    config: &SkqdConfig,
    steps: &mut SampledSteps<'_>,
) -> Result<Vec<Result<SkqdResult>>> {
    let mut results: Vec<Option<Result<SkqdResult>>> = (0..grid.len()).map(|_| None).collect();
    let mut want = config.patience + 2;
    loop {
        steps.ensure(want)?;
        let view = steps.snapshot();
        let pending: Vec<usize> = (0..grid.len()).filter(|&i| results[i].is_none()).collect();
        let outcomes: Vec<(usize, Outcome)> = pending
            .par_iter()
            .map(|&i| (i, stopping_run(&params.with_l0(grid[i]), config, view)))
            .collect();
        let mut need = 0;
        for (i, outcome) in outcomes {
            match outcome {
                Outcome::Done(r) => results[i] = Some(r),
                Outcome::NeedMore(k) => need = need.max(k),
            }
        }
        if need == 0 {
            return Ok(results.into_iter().map(|r| r.expect("all points finished")).collect());
        }
        want = need.max(2 * steps.available());
    }
}

fn solve(hp: &super::projected::ProjectedHamiltonian) -> Result<GroundState> {
    if hp.dim() <= DENSE_LIMIT {
        dense_ground_state(hp)
    } else {
        lanczos_ground_state(hp, &LanczosOptions::default(), None)
    }
}

struct Accepted {
    k: usize,
    dim: usize,
    state: GroundState,
}

fn improves(energy: f64, reference: f64, threshold: f64) -> bool {
    if reference == 0.0 {
        energy != 0.0
    } else {
        (energy - reference).abs() / reference.abs() > threshold
    }
}

fn stopping_run(params: &SchwingerParams, config: &SkqdConfig, view: StepsView<'_>) -> Outcome {
    let mut records = Vec::new();
    let mut accepted: Option<Accepted> = None;
    let mut last: Option<(usize, GroundState)> = None;
    let mut misses = 0;
    for k in 1..=config.max_steps {
        if k > view.dims.len() {
            if view.exhausted {
                break;
            }
            return Outcome::NeedMore(k);
        }
        let dim = view.dims[k - 1];
        let mut record = StepRecord {
            k,
            dim,
            new_strings: view.new_strings[k - 1],
            kept_shots: view.kept_shots[k - 1],
            energy: None,
            accepted: false,
        };
        if dim > 0 {
            let state = match &last {
                Some((d, s)) if *d == dim => s.clone(),
                _ => {
                    let hp = match project(params, &view.basis.truncated(dim)) {
                        Ok(hp) => hp,
                        Err(e) => return Outcome::Done(Err(e)),
                    };
                    match solve(&hp) {
                        Ok(s) => s,
                        Err(e) => return Outcome::Done(Err(e)),
                    }
                }
            };
            record.energy = Some(state.energy);
            record.accepted = match &accepted {
                None => true,
                Some(a) => improves(state.energy, a.state.energy, config.threshold),
            };
            if record.accepted {
                accepted = Some(Accepted {
                    k,
                    dim,
                    state: state.clone(),
                });
            }
            last = Some((dim, state));
        }
        let was_accepted = record.accepted;
        records.push(record);
        if was_accepted {
            misses = 0;
        } else if accepted.is_some() {
            misses += 1;
            if misses >= config.patience {
                break;
            }
        }
    }
    Outcome::Done(finish(params, records, accepted, view.basis))
}

fn finish(
    params: &SchwingerParams,
    steps: Vec<StepRecord>,
    accepted: Option<Accepted>,
    basis: &SubspaceBasis,
) -> Result<SkqdResult> {
    let Accepted { k, dim, state } = accepted.ok_or_else(|| {
        Error::EmptySubspace("no sampled string survived post-selection".into())
    })?;
    let basis = basis.truncated(dim);
    let particle_number = expected_particle_number(&basis, &state.vector)?;
    Ok(SkqdResult {
        params: *params,
        steps,
        k_max: k,
        energy: state.energy,
        particle_number,
        dim,
        dim_sector: sector_dimension(params.n_sites),
        gap: state.gap,
        degenerate: state.is_degenerate(),
        basis,
        vector: state.vector,
    })
}

fn shared(
    params: &SchwingerParams,
    grid: &[f64],
    config: &SkqdConfig,
    steps: &mut SampledSteps<'_>,
) -> Result<Vec<Result<SkqdResult>>> {
    let n = grid.len();
    let mut records: Vec<Vec<StepRecord>> = vec![Vec::new(); n];
    let mut accepted: Vec<Option<Accepted>> = (0..n).map(|_| None).collect();
    let mut last: Vec<Option<(usize, GroundState)>> = (0..n).map(|_| None).collect();
    let mut failures: Vec<Option<Error>> = (0..n).map(|_| None).collect();
    let mut have_baseline = false;
    let mut misses = 0;

    for k in 1..=config.max_steps {
        steps.ensure(k)?;
        if k > steps.available() {
            break;
        }
        let view = steps.snapshot();
        let dim = view.dims[k - 1];
        let solved: Vec<Option<Result<GroundState>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if dim == 0 || failures[i].is_some() {
                    return None;
                }
                if let Some((d, s)) = &last[i] {
                    if *d == dim {
                        return Some(Ok(s.clone()));
                    }
                }
                let p = params.with_l0(grid[i]);
                Some(project(&p, &view.basis.truncated(dim)).and_then(|hp| solve(&hp)))
            })
            .collect();

        let mut step_accepted = dim > 0 && !have_baseline;
        for (i, s) in solved.iter().enumerate() {
            if let (Some(Ok(s)), Some(a)) = (s, &accepted[i]) {
                step_accepted |= improves(s.energy, a.state.energy, config.threshold);
            }
        }
        for (i, s) in solved.into_iter().enumerate() {
            let mut record = StepRecord {
                k,
                dim,
                new_strings: view.new_strings[k - 1],
                kept_shots: view.kept_shots[k - 1],
                energy: None,
                accepted: false,
            };
            match s {
                Some(Ok(state)) => {
                    record.energy = Some(state.energy);
                    record.accepted = step_accepted;
                    if step_accepted {
                        accepted[i] = Some(Accepted {
                            k,
                            dim,
                            state: state.clone(),
                        });
                    }
                    last[i] = Some((dim, state));
                }
                Some(Err(e)) => failures[i] = Some(e),
                None => {}
            }
            records[i].push(record);
        }
        if step_accepted {
            have_baseline = true;
            misses = 0;
        } else if have_baseline {
            misses += 1;
            if misses >= config.patience {
                break;
            }
        }
    }

    let basis = steps.basis().clone();
    Ok(records
        .into_iter()
        .zip(accepted)
        .zip(failures)
        .enumerate()
        .map(|(i, ((recs, acc), fail))| match fail {
            Some(e) => Err(e),
            None => finish(&params.with_l0(grid[i]), recs, acc, &basis),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::exact::exact_ground_state;
    use crate::sampling::CountsOrigin;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn hardware() -> ShotCounts {
        ShotCounts::from_pairs(
            4,
            400,
            [(bs("0110"), 4), (bs("1001"), 12), (bs("0101"), 40), (bs("0011"), 168)],
            CountsOrigin::Ingested { file: "hardware".into() },
        )
        .unwrap()
    }

    fn n4_config() -> SkqdConfig {
        SkqdConfig {
            dt: 0.77,
            shots: 400,
            p_min: 0.05,
            reference: ReferenceState::Custom(bs("0011")),
            max_steps: 1,
            ..Default::default()
        }
    }

    #[test]
    fn hardware_replay_gives_two_string_basis() {
        let params = SchwingerParams::standard(4, 0.0).unwrap();
        let mut source = ReplayShots::new(vec![hardware()]).unwrap();
        let result = run_skqd(&params, &n4_config(), &mut source).unwrap();
        assert_eq!(result.basis.strings(), vec![bs("0101"), bs("0011")]);
        assert_eq!(result.k_max, 1);
        let exact = exact_ground_state(&params).unwrap().energy();
        assert!(result.energy >= exact - 1e-12);
        assert!((result.energy - exact).abs() / exact.abs() < 1e-3);
    }

    #[test]
    fn simulated_n4_matches_replay_support() {
        let params = SchwingerParams::standard(4, 1.0).unwrap();
        let config = SkqdConfig { seed: 3, ..n4_config() };
        let mut source = SimulatedShots::new(4, &config).unwrap();
        let result = run_skqd(&params, &config, &mut source).unwrap();
        let mut strings = result.basis.strings();
        strings.sort();
        assert_eq!(strings, vec![bs("0011"), bs("0101")]);
    }

    #[test]
    fn huge_threshold_keeps_first_basis() {
        let params = SchwingerParams::standard(8, 0.5).unwrap();
        let config = SkqdConfig {
            threshold: 1e9,
            patience: 2,
            seed: 5,
            ..Default::default()
        };
        let mut source = SimulatedShots::new(8, &config).unwrap();
        let result = run_skqd(&params, &config, &mut source).unwrap();
        assert_eq!(result.k_max, 1);
        assert_eq!(result.steps.len(), 3);
        assert_eq!(result.dim, result.steps[0].dim);
        assert!(result.steps.iter().skip(1).all(|s| !s.accepted));
    }

    #[test]
    fn accepted_energies_do_not_increase() {
        let params = SchwingerParams::standard(10, 0.8).unwrap();
        let config = SkqdConfig {
            threshold: 1e-4,
            seed: 9,
            ..Default::default()
        };
        let mut source = SimulatedShots::new(10, &config).unwrap();
        let result = run_skqd(&params, &config, &mut source).unwrap();
        let energies: Vec<f64> = result.steps.iter().filter(|s| s.accepted).filter_map(|s| s.energy).collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let dims: Vec<usize> = result.steps.iter().map(|s| s.dim).collect();
        assert!(dims.windows(2).all(|w| w[1] >= w[0]));
        let exact = exact_ground_state(&params).unwrap().energy();
        assert!(result.energy >= exact - 1e-9);
    }

    #[test]
    fn grid_matches_independent_runs() {
        let params = SchwingerParams::standard(8, 0.0).unwrap();
        let config = SkqdConfig { seed: 21, ..Default::default() };
        let grid = [0.0, 0.7, 1.4];
        let mut source = SimulatedShots::new(8, &config).unwrap();
        let scan = run_skqd_grid(&params, &grid, &config, &mut source).unwrap();
        for (l0, r) in grid.iter().zip(scan) {
            let mut fresh = SimulatedShots::new(8, &config).unwrap();
            let single = run_skqd(&params.with_l0(*l0), &config, &mut fresh).unwrap();
            let r = r.unwrap();
            assert_eq!(r.energy, single.energy);
            assert_eq!(r.k_max, single.k_max);
        }
    }

    #[test]
    fn shared_mode_uses_common_k_max() {
        let params = SchwingerParams::standard(8, 0.0).unwrap();
        let config = SkqdConfig {
            seed: 21,
            stopping: StoppingMode::Shared,
            ..Default::default()
        };
        let mut source = SimulatedShots::new(8, &config).unwrap();
        let scan: Vec<SkqdResult> = run_skqd_grid(&params, &[0.0, 1.0, 2.0], &config, &mut source)
            .unwrap()
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        assert!(scan.iter().all(|r| r.k_max == scan[0].k_max && r.dim == scan[0].dim));
    }

    #[test]
    fn replay_runs_out_gracefully() {
        let params = SchwingerParams::standard(4, 0.0).unwrap();
        let config = SkqdConfig {
            max_steps: 10,
            ..n4_config()
        };
        let mut source = ReplayShots::new(vec![hardware(), hardware()]).unwrap();
        let result = run_skqd(&params, &config, &mut source).unwrap();
        assert_eq!(result.steps.len(), 2);
    }

    #[test]
    fn everything_filtered_is_an_error() {
        let params = SchwingerParams::standard(4, 0.0).unwrap();
        let config = SkqdConfig {
            p_min: 0.9,
            ..n4_config()
        };
        let mut source = ReplayShots::new(vec![hardware()]).unwrap();
        assert!(matches!(run_skqd(&params, &config, &mut source), Err(Error::EmptySubspace(_))));
    }
}
