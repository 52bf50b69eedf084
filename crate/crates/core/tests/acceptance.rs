//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! N = 18 and N = 20 summary-table runs are skipped unless `SKQD_EXTENDED=1`.

mod common;

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skqd::evolution::{evolve, reference_state};
use skqd::experiments::{
    exact_l0c, fit_l0c_model, linspace, model_l0c, scan_exact, scan_skqd, skqd_l0c, table1_entry, MassShift,
    Table1Config, Transition, TransitionPoint,
};
use skqd::hamiltonian::{build_pauli_terms, dense_from_pauli_terms, diagonal_energy, hopping_neighbors};
use skqd::krylov::{
    dense_ground_state, exact_ground_state, ground_state, lanczos_ground_state, project, run_skqd_grid,
    LanczosOptions, ReplayShots, ShotSource, SimulatedShots, SkqdSession, DEFAULT_MEMORY_BUDGET,
};
use skqd::sampling::{CountsOrigin, NoiseSpec};
use skqd::sector::SectorBasis;
use skqd::{Bitstring, ReferenceState, SchwingerParams, ShotCounts, SkqdConfig, SubspaceBasis};

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn deterministic_runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn bs(s: &str) -> Bitstring {
    s.parse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Refinement rounds bringing the 41-point grid spacing of 0.05 below 1e-3.
const REFINE_ROUNDS: usize = 6;

fn grid41() -> Vec<f64> {
    linspace(0.0, 2.0, 41).unwrap()
}

// 1. Matrix elements agree with the dense Pauli expansion.
fn oracle_equivalence() -> Check {
    let worst = Cell::new(0.0f64);
    let mut runner = deterministic_runner(20);
    for n in [2usize, 4, 6, 8] {
        let strategy = (0.001f64..2.0, 0.0f64..20.0, -3.0f64..3.0, 0.0f64..200.0);
        let result = runner.run(&strategy, |(x, m, l0, penalty)| {
            let params = SchwingerParams::new(n, x, m, l0, penalty).unwrap();
            let dense = dense_from_pauli_terms(&build_pauli_terms(&params).unwrap(), n).unwrap();
            let dim = 1usize << n;
            let mut sparse = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            for col in 0..dim {
                let b = Bitstring::new(col as u64, n).unwrap();
                sparse[(col, col)] += diagonal_energy(b, &params);
                for (to, v) in hopping_neighbors(b, &params) {
                    sparse[(to.bits() as usize, col)] += v;
                }
            }
            let diff = (&sparse - &dense).abs().max();
            worst.set(worst.get().max(diff));
            prop_assert!(diff <= 1e-12, "N={n}: max |diff| = {diff:e}");
            Ok(())
        });
        if let Err(e) = result {
            return Check::new(false, format!("{e}"));
        }
    }
    Check::new(true, format!("80 draws, max |diff| = {:.1e} (tol 1e-12)", worst.get()))
}

fn hardware_counts() -> ShotCounts {
    ShotCounts::from_pairs(
        4,
        400,
        [(bs("0110"), 4), (bs("1001"), 12), (bs("0101"), 40), (bs("0011"), 168)],
        CountsOrigin::Ingested {
            file: "hardware".into(),
        },
    )
    .unwrap()
}

// 2. Four sites, two-string basis.
fn four_site_reproduction() -> Check {
    let params = SchwingerParams::standard(4, 0.0).unwrap();
    let grid = grid41();
    let exact = scan_exact(&params, &grid, DEFAULT_MEMORY_BUDGET).unwrap();
    let config = SkqdConfig {
        dt: 0.77,
        shots: 400,
        p_min: 0.05,
        max_steps: 1,
        reference: ReferenceState::Custom(bs("0011")),
        ..Default::default()
    };
    let two = vec![bs("0011"), bs("0101")];
    let mut detail = Vec::new();
    let mut pass = true;
    let mut replay = ReplayShots::new(vec![hardware_counts()]).unwrap();
    let mut simulated = SimulatedShots::new(4, &config).unwrap();
    let sources: [(&str, &mut dyn ShotSource); 2] = [("replay", &mut replay), ("simulated", &mut simulated)];
    for (name, source) in sources {
        let mut session = SkqdSession::new(&config, source).unwrap();
        let mut basis = session.run(&params).unwrap().basis.strings();
        basis.sort();
        let mut scan = scan_skqd(&params, &grid, &mut session).unwrap();
        scan.attach_exact(&exact).unwrap();
        let max_dev = scan.max_rel_dev().unwrap();
        let p: Vec<f64> = scan.points.iter().map(|p| p.particle_number.unwrap()).collect();
        let monotone = p.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        let shape = p[0] < 0.1 && p[p.len() - 1] > 1.9 && monotone;
        pass &= basis == two && max_dev <= 1e-5 && shape;
        detail.push(format!(
            "{name}: basis {} max rel dev {max_dev:.2e} (tol 1e-5), <P>(0) = {:.2e}, <P>(2) = {:.2e}",
            if basis == two { "{0011,0101}" } else { "WRONG" },
            p[0],
            p[p.len() - 1]
        ));
    }
    let exact_p2 = exact.points.last().unwrap().particle_number.unwrap();
    detail.push(format!("exact <P>(2) = {exact_p2:.2e}"));
    Check::new(pass, detail.join("; "))
}

fn table_rows(sizes: &[(usize, f64, u64, f64, f64)], seeds: &[u64], limit_per_n: Duration) -> Check {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(n, dt, shots, paper_ratio, ratio_tol) in sizes {
        let start = Instant::now();
        for &seed in seeds {
            let skqd = SkqdConfig {
                dt,
                shots,
                seed,
                ..Default::default()
            };
            let config = Table1Config::standard(n, skqd).unwrap();
            match table1_entry(&config, DEFAULT_MEMORY_BUDGET) {
                Ok((row, _)) => {
                    let ok = row.mean_rel_dev <= 5e-3 && (row.dim_ratio - paper_ratio).abs() <= ratio_tol;
                    pass &= ok;
                    detail.push(format!(
                        "N={n} seed {seed}: k_max {} dev {:.2e} ratio {:.3} (want <= 5e-3, {paper_ratio} +- {ratio_tol})",
                        row.k_max, row.mean_rel_dev, row.dim_ratio
                    ));
                }
                Err(e) => {
                    pass = false;
                    detail.push(format!("N={n} seed {seed}: {e}"));
                }
            }
        }
        let took = start.elapsed();
        pass &= took <= limit_per_n;
        detail.push(format!(
            "N={n} took {:.0} s (limit {:.0} s)",
            took.as_secs_f64(),
            limit_per_n.as_secs_f64()
        ));
    }
    Check::new(pass, detail.join("; "))
}

// 3. Summary-table regression at desk scale.
fn table_desk_scale() -> Check {
    table_rows(&[(14, 0.2, 1000, 0.35, 0.10), (16, 0.2, 1000, 0.31, 0.10)], &[0, 1, 2], Duration::from_secs(300))
}

fn table_extended() -> Check {
    table_rows(&[(18, 0.3, 1000, 0.19, 0.07), (20, 0.3, 10000, 0.19, 0.07)], &[0, 1, 2], Duration::from_secs(1800))
}

// 4. Variational bound, monotone growth and solver agreement.
fn variational_invariants() -> Check {
    let mut runner = deterministic_runner(24);
    let worst_solver = Cell::new(0.0f64);
    let strategy = (prop::sample::select(vec![4usize, 6, 8, 10]), 0.0f64..2.0, any::<u64>());
    let result = runner.run(&strategy, |(n, l0, seed)| {
        let params = SchwingerParams::standard(n, l0).unwrap();
        let exact = exact_ground_state(&params).unwrap().energy();
        let mut strings: Vec<Bitstring> = SectorBasis::zero_charge(n).unwrap().iter().collect();
        strings.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let dim = strings.len();
        let mut sizes = vec![1, 2, 4, dim / 8, dim / 4, dim / 2, dim];
        sizes.retain(|&d| d >= 1);
        sizes.sort_unstable();
        sizes.dedup();
        let mut previous = f64::INFINITY;
        for d in sizes {
            let basis = SubspaceBasis::from_strings(n, strings[..d].iter().copied(), 1).unwrap();
            let hp = project(&params, &basis).unwrap();
            let e = ground_state(&hp).unwrap().energy;
            prop_assert!(e <= previous + 1e-9, "N={n} d={d}: {e} > {previous}");
            prop_assert!(e >= exact - 1e-9, "N={n} d={d}: {e} below exact {exact}");
            if d >= 2 {
                let dense = dense_ground_state(&hp).unwrap().energy;
                let lanczos = lanczos_ground_state(&hp, &LanczosOptions::default(), None).unwrap().energy;
                let r = rel(lanczos, dense);
                worst_solver.set(worst_solver.get().max(r));
                prop_assert!(r <= 1e-9, "N={n} d={d}: Lanczos {lanczos} vs dense {dense}");
            }
            previous = e;
        }
        Ok(())
    });
    match result {
        Ok(()) => Check::new(
            true,
            format!(
                "24 random nested bases, Lanczos/dense max rel diff {:.1e} (tol 1e-9)",
                worst_solver.get()
            ),
        ),
        Err(e) => Check::new(false, format!("{e}")),
    }
}

// 5. Norm, weight conservation and the full-space cross-check.
fn evolution_invariants() -> Check {
    let mut drift = 0.0f64;
    for n in [10usize, 12] {
        let psi = reference_state(ReferenceState::Alternating10, n).unwrap();
        let out = evolve(&psi, 0.2, 100);
        drift = drift.max((out.norm_sqr() - 1.0).abs());
    }
    let mut max_diff = 0.0f64;
    let mut leakage = 0.0f64;
    for n in [2usize, 4, 6, 8] {
        for dt in [0.2, 0.77] {
            let u = common::full_trotter_step(n, dt);
            for kind in [ReferenceState::Alternating10, ReferenceState::MassGround] {
                let psi0 = reference_state(kind, n).unwrap();
                let mut full = common::embed(&psi0);
                for k in 1..=8 {
                    full = &u * full;
                    let sector = evolve(&psi0, dt, k);
                    let mut inside = vec![false; 1 << n];
                    for (b, a) in sector.basis().iter().zip(sector.amplitudes()) {
                        inside[b.bits() as usize] = true;
                        max_diff = max_diff.max((full[b.bits() as usize] - a).norm());
                    }
                    let out: f64 = (0..1usize << n).filter(|&i| !inside[i]).map(|i| full[i].norm_sqr()).sum();
                    leakage = leakage.max(out);
                }
            }
        }
    }
    let pass = drift < 1e-8 && max_diff <= 1e-10 && leakage < 1e-20;
    Check::new(
        pass,
        format!(
            "norm drift {drift:.1e} (tol 1e-8), full-space max |diff| {max_diff:.1e} (tol 1e-10), \
             out-of-sector weight {leakage:.1e}"
        ),
    )
}

/// Exact transitions shared by criteria 6 and 7.
fn exact_transition(n: usize) -> Transition {
    let params = SchwingerParams::standard(n, 0.0).unwrap();
    exact_l0c(&params, &grid41(), REFINE_ROUNDS, DEFAULT_MEMORY_BUDGET).unwrap().1
}

// 6. Exact and SKQD transition points; trend in N.
fn transition_detection(exact: &mut Vec<(usize, Transition)>) -> Check {
    for n in [8usize, 10, 12, 14, 16] {
        exact.push((n, exact_transition(n)));
    }
    let l0c: Vec<f64> = exact.iter().map(|(_, t)| t.l0c).collect();
    let decreasing = l0c.windows(2).all(|w| w[1] < w[0]);
    let exact14 = exact.iter().find(|(n, _)| *n == 14).unwrap().1;

    let params = SchwingerParams::standard(14, 0.0).unwrap();
    let config = SkqdConfig::default();
    let mut source = SimulatedShots::new(14, &config).unwrap();
    let mut session = SkqdSession::new(&config, &mut source).unwrap();
    let skqd14 = match skqd_l0c(&params, &grid41(), REFINE_ROUNDS, &mut session) {
        Ok((_, t)) => t,
        Err(e) => return Check::new(false, format!("SKQD detection failed: {e}")),
    };
    let diff = (skqd14.l0c - exact14.l0c).abs();
    let spacing = exact14.spacing();
    let pass = decreasing && diff <= spacing && spacing / exact14.l0c <= 1e-3;
    Check::new(
        pass,
        format!(
            "N=14 exact {:.5} SKQD {:.5}, |diff| {diff:.2e} vs spacing {spacing:.2e} ({:.1e} relative); \
             exact l0c(8..16) = {:?} {}",
            exact14.l0c,
            skqd14.l0c,
            spacing / exact14.l0c,
            l0c.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            if decreasing { "decreasing" } else { "NOT decreasing" }
        ),
    )
}

// 7. Finite-size fit.
fn finite_size_fit(exact: &[(usize, Transition)]) -> Check {
    let generator = MassShift {
        a: 6.5,
        b: -17.0,
        c: 246.0,
    };
    let synthetic: Vec<TransitionPoint> = (4..=15)
        .map(|h| {
            let n = 2 * h;
            TransitionPoint {
                n_sites: n,
                l0c: model_l0c(n, 10.0, &generator),
                sigma: 1e-3,
            }
        })
        .collect();
    let fit = fit_l0c_model(&synthetic, 10.0).unwrap();
    let recovery = (fit.params.a - 6.5)
        .abs()
        .max((fit.params.b + 17.0).abs())
        .max((fit.params.c - 246.0).abs());

    let mut points: Vec<TransitionPoint> = exact
        .iter()
        .map(|&(n, t)| TransitionPoint {
            n_sites: n,
            l0c: t.l0c,
            sigma: t.sigma,
        })
        .collect();
    for n in [18usize, 20] {
        let t = exact_transition(n);
        points.push(TransitionPoint {
            n_sites: n,
            l0c: t.l0c,
            sigma: t.sigma,
        });
    }
    let real = match fit_l0c_model(&points, 10.0) {
        Ok(f) => f,
        Err(e) => return Check::new(false, format!("exact-pipeline fit failed: {e}")),
    };
    let finite = real.covariance.iter().flatten().all(|v| v.is_finite());
    let similar = |v: f64, paper: f64| v.signum() == paper.signum() && (0.1..=10.0).contains(&(v / paper));
    let shape = similar(real.params.a, 6.5) && similar(real.params.b, -17.0) && similar(real.params.c, 246.0);
    Check::new(
        recovery <= 1e-8 && finite && shape,
        format!(
            "synthetic recovery error {recovery:.1e} (tol 1e-8); exact N=8..20 fit a = {:.3} +- {:.3}, \
             b = {:.3} +- {:.3}, c = {:.3} +- {:.3}, residual {:.2e} (reference 6.5, -17, 246)",
            real.params.a, real.errors.a, real.params.b, real.errors.b, real.params.c, real.errors.c, real.residual_norm
        ),
    )
}

fn step_batches(n: usize, config: &SkqdConfig, steps: usize) -> Vec<ShotCounts> {
    let mut source = SimulatedShots::new(n, config).unwrap();
    (1..=steps).map(|k| source.step_counts(k).unwrap().unwrap()).collect()
}

// 8. Energies depend only on the surviving support.
fn noise_irrelevance() -> Check {
    let n = 8;
    let params = SchwingerParams::standard(n, 0.0).unwrap();
    let grid = [0.0, 0.5, 1.0, 1.5, 2.0];
    let exact: Vec<f64> = grid
        .iter()
        .map(|&l0| exact_ground_state(&params.with_l0(l0)).unwrap().energy())
        .collect();
    let steps = 30;
    // Fixed step budget, so the comparison isolates the sampled support.
    let ideal_cfg = SkqdConfig {
        max_steps: steps,
        patience: steps,
        ..Default::default()
    };
    let ideal = step_batches(n, &ideal_cfg, steps);
    let run = |batches: Vec<ShotCounts>, cfg: &SkqdConfig| {
        let mut src = ReplayShots::new(batches).unwrap();
        run_skqd_grid(&params, &grid, cfg, &mut src)
            .unwrap()
            .into_iter()
            .map(|r| r.unwrap())
            .collect::<Vec<_>>()
    };
    let reference = run(ideal.clone(), &ideal_cfg);
    let ideal_dev = reference.iter().zip(&exact).map(|(r, e)| rel(r.energy, *e)).fold(0.0, f64::max);

    let mut same_support_diff = 0.0f64;
    let mut noisy_dev = 0.0f64;
    let mut detail = Vec::new();
    for p in [0.01, 0.02, 0.05] {
        let noisy_cfg = SkqdConfig {
            noise: NoiseSpec::bitflip(p).unwrap(),
            ..ideal_cfg.clone()
        };
        let noisy = step_batches(n, &noisy_cfg, steps);
        // Ideal support, noisy multiplicities.
        let reweighted: Vec<ShotCounts> = ideal
            .iter()
            .zip(&noisy)
            .map(|(i, z)| {
                let pairs: Vec<(Bitstring, u64)> = i.support().map(|b| (b, z.counts.get(&b).copied().unwrap_or(1))).collect();
                ShotCounts::from_pairs(n, i.n_shots.max(pairs.iter().map(|x| x.1).sum()), pairs, CountsOrigin::Merged)
                    .unwrap()
            })
            .collect();
        for (a, b) in run(reweighted, &ideal_cfg).iter().zip(&reference) {
            same_support_diff = same_support_diff.max((a.energy - b.energy).abs());
        }
        let results = run(noisy, &noisy_cfg);
        let dev = results.iter().zip(&exact).map(|(r, e)| rel(r.energy, *e)).fold(0.0, f64::max);
        noisy_dev = noisy_dev.max(dev);
        detail.push(format!(
            "p={p}: dim {} vs ideal {}, max dev {dev:.1e}",
            results[0].dim, reference[0].dim
        ));
    }
    Check::new(
        same_support_diff < 1e-9 && noisy_dev <= 1e-2,
        format!(
            "same-support |dE| {same_support_diff:.1e} (tol 1e-9); ideal max rel dev {ideal_dev:.1e}; \
             noisy max rel dev {noisy_dev:.1e} (tol 1e-2); {}",
            detail.join(", ")
        ),
    )
}

fn run_criterion(id: &str, name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let check = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Check::new(false, format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = check.pass && in_time;
    println!(
        "criterion {id} [{name}]: {} ({:.1} s of {:.0} s{}) {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64(),
        if in_time { "" } else { ", over time" },
        check.detail
    );
    pass
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let sec = Duration::from_secs;
    let mut all = true;
    all &= run_criterion("1", "oracle equivalence", sec(10), oracle_equivalence);
    all &= run_criterion("2", "four-site two-string basis", sec(5), four_site_reproduction);
    all &= run_criterion("3", "summary table N=14,16", min(10), table_desk_scale);
    if std::env::var("SKQD_EXTENDED").is_ok_and(|v| v == "1") {
        all &= run_criterion("3x", "summary table N=18,20", min(30), table_extended);
    } else {
        println!("criterion 3x [summary table N=18,20]: SKIP (set SKQD_EXTENDED=1)");
    }
    all &= run_criterion("4", "variational invariants", sec(30), variational_invariants);
    all &= run_criterion("5", "evolution invariants", sec(30), evolution_invariants);
    let mut exact = Vec::new();
    all &= run_criterion("6", "transition detection", min(10), || transition_detection(&mut exact));
    all &= run_criterion("7", "finite-size fit", min(15), || finite_size_fit(&exact));
    all &= run_criterion("8", "noise irrelevance", min(2), noise_irrelevance);
    if !all {
        std::process::exit(1);
    }
}
