//! End-to-end acceptance suite.  Each test covers one numbered criterion
//! and prints a single `criterion N: PASS`/`FAIL` line; expensive runs are
//! shared through lazy statics so the suite stays within a modest wall-time
//! budget regardless of test ordering.

use std::sync::LazyLock;

use num_complex::Complex64;

use klind_core::analysis::{fit_diagonal_slope, FitRange};
use klind_core::dynamics::{
    default_time_grid, direct_evolution_oracle, evolve, saturation_value, IntegratorControls,
    Trajectory,
};
use klind_core::experiment::{
    build_system, execute, DissipationConfig, ExperimentConfig, IntegrationConfig,
    IterationConfig, ModelConfig, OutputConfig, SectorConfig, SeedSpec,
};
use klind_core::krylov_iter::{
    bilanczos, effective_tridiagonal, stability_check, IterationOptions, TridiagonalData,
};
use klind_core::liouville::{SuperOperator, SuperVector};

const SAT_WINDOW: f64 = 0.2;

fn report(criterion: usize, failures: &[String], detail: &str) {
    if failures.is_empty() {
        println!("criterion {criterion}: PASS ({detail})");
    } else {
        println!("criterion {criterion}: FAIL ({})", failures.join("; "));
        panic!("criterion {criterion} failed: {}", failures.join("; "));
    }
}

fn tfim(n: usize, g: f64, h: f64, alpha: f64, gamma: f64) -> ExperimentConfig {
    ExperimentConfig {
        n_sites: n,
        model: ModelConfig::Tfim { g, h },
        dissipation: DissipationConfig { alpha, gamma },
        sector: None,
        initial_operator: None,
        iteration: IterationConfig::default(),
        integration: IntegrationConfig::default(),
        outputs: OutputConfig::default(),
    }
}

// ---------------------------------------------------------------------
// Shared heavy runs
// ---------------------------------------------------------------------

struct ClosedRun {
    tri: TridiagonalData,
    lanczos_b: Vec<f64>,
    traj: Trajectory,
}

/// Reference Hermitian Lanczos with full reorthogonalization, used to
/// cross-check the two-sided recursion on closed systems.
fn hermitian_lanczos(gen: &SuperOperator, seed: &SuperVector, steps: usize) -> Vec<f64> {
    let dim = gen.dim();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let mut basis: Vec<Vec<Complex64>> = vec![seed.data.clone()];
    let mut betas = Vec::new();
    let mut scale = 0.0f64;
    for k in 0..steps {
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        gen.apply_into(&basis[k], &mut w);
        let alpha = dot(&basis[k], &w);
        for (wi, vi) in w.iter_mut().zip(&basis[k]) {
            *wi -= alpha * vi;
        }
        if k > 0 {
            let beta_prev = betas[k - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= beta_prev * vi;
            }
        }
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let beta = dot(&w, &w).re.sqrt();
        scale = scale.max(beta);
        if beta < 1e-10 * scale.max(1.0) {
            break;
        }
        for wi in w.iter_mut() {
            *wi /= beta;
        }
        betas.push(beta);
        basis.push(w);
    }
    betas
}

fn closed_run(g: f64, h: f64) -> ClosedRun {
    let cfg = tfim(6, g, h, 0.0, 0.0);
    let system = build_system(&cfg).expect("closed system");
    let opts = IterationOptions {
        max_steps: 4200,
        breakdown_tol: 1e-6,
        ..IterationOptions::default()
    };
    let (tri, _) = bilanczos(&system.generator, &system.seed, &opts).expect("closed recursion");
    let lanczos_b = hermitian_lanczos(&system.generator, &system.seed, tri.b.len().min(600));
    let eff = effective_tridiagonal(&tri, 1e-6).expect("closed effective coefficients");
    let grid = default_time_grid(500.0, 2000);
    let traj = evolve(&eff, &grid, &IntegratorControls::default()).expect("closed trajectory");
    ClosedRun {
        tri,
        lanczos_b,
        traj,
    }
}

static CLOSED_INT: LazyLock<ClosedRun> = LazyLock::new(|| closed_run(1.0, 0.0));
static CLOSED_CHAOTIC: LazyLock<ClosedRun> = LazyLock::new(|| closed_run(-1.05, 0.5));

struct OpenRun {
    regime: &'static str,
    axis: &'static str,
    strength: f64,
    tri: TridiagonalData,
    biortho: f64,
    max_real: f64,
    eta: f64,
}

/// The sixteen slope runs: four gamma values and four alpha values for
/// each parameter set.  Truncated at 40 coefficients, which covers the
/// initial growth window on both axes while staying well clear of the
/// near-breakdown region where the recursion loses the structure
/// identities (the closed integrable Krylov space is exhausted near n=63,
/// and chaotic runs develop bond near-collapses past n~35).
///
/// The fit windows are frozen per dissipation axis after inspecting where
/// the diagonal staircase saturates: bulk dephasing levels off near n=21,
/// boundary damping (delayed onset) near n=15.
static TABLE1: LazyLock<Vec<OpenRun>> = LazyLock::new(|| {
    let mut runs = Vec::new();
    for (regime, g, h) in [("int", 1.0, 0.0), ("chaotic", -1.05, 0.5)] {
        for (axis, strengths) in [("gamma", [0.01, 0.05, 0.10, 0.15]), ("alpha", [0.01, 0.05, 0.10, 0.15])] {
            for &s in &strengths {
                let (alpha, gamma) = if axis == "alpha" { (s, 0.0) } else { (0.0, s) };
                let cfg = tfim(6, g, h, alpha, gamma);
                let system = build_system(&cfg).expect("open system");
                let opts = IterationOptions {
                    max_steps: 40,
                    store_bases: true,
                    ..IterationOptions::default()
                };
                let (tri, bases) =
                    bilanczos(&system.generator, &system.seed, &opts).expect("open recursion");
                let biortho = bases.expect("bases").bi_orthonormality_residual();
                let eff = effective_tridiagonal(&tri, 1e-8).expect("effective coefficients");
                let max_real = stability_check(&eff).expect("stability").max_real_part;
                let abs_a: Vec<f64> = tri.a.iter().map(|v| v.norm()).collect();
                let window = if axis == "gamma" { 22 } else { 16 };
                let fit = fit_diagonal_slope(&abs_a, FitRange::Explicit(0, window))
                    .expect("slope fit");
                runs.push(OpenRun {
                    regime,
                    axis,
                    strength: s,
                    tri,
                    biortho,
                    max_real,
                    eta: fit.eta,
                });
            }
        }
    }
    runs
});

struct OpenTrajectory {
    traj: Trajectory,
    max_real: f64,
}

fn open_trajectory(g: f64, h: f64) -> OpenTrajectory {
    let mut cfg = tfim(6, g, h, 0.01, 0.01);
    cfg.iteration.max_steps = 1500;
    let result = execute(&cfg).expect("open trajectory run");
    OpenTrajectory {
        traj: result.trajectory.expect("trajectory"),
        max_real: result.summary.stability_max_real.expect("open run"),
    }
}

static OPEN_INT: LazyLock<OpenTrajectory> = LazyLock::new(|| open_trajectory(1.0, 0.0));
static OPEN_CHAOTIC: LazyLock<OpenTrajectory> = LazyLock::new(|| open_trajectory(-1.05, 0.5));

fn xxz_sector_run(epsilon: f64) -> (f64, Trajectory) {
    let cfg = ExperimentConfig {
        n_sites: 8,
        model: ModelConfig::Xxz {
            j: 1.0,
            j_zz: 1.0,
            epsilon,
            defect_site: None,
        },
        dissipation: DissipationConfig {
            alpha: 0.01,
            gamma: 0.01,
        },
        sector: Some(SectorConfig { s: 1.0, parity: 1 }),
        initial_operator: Some(SeedSpec::Pair { sites: (2, 7) }),
        iteration: IterationConfig {
            max_steps: 1500,
            breakdown_tol: 1e-6,
            reorth: true,
            store_bases: true,
        },
        integration: IntegrationConfig::default(),
        outputs: OutputConfig::default(),
    };
    let result = execute(&cfg).expect("xxz sector run");
    (
        result.summary.parity_leakage.expect("sector leakage"),
        result.trajectory.expect("trajectory"),
    )
}

static XXZ_RUNS: LazyLock<Vec<(f64, f64, Trajectory)>> = LazyLock::new(|| {
    [0.0, 0.5]
        .iter()
        .map(|&eps| {
            let (leak, traj) = xxz_sector_run(eps);
            (eps, leak, traj)
        })
        .collect()
});

fn boundary_only(n: usize, max_steps: usize) -> TridiagonalData {
    let mut cfg = tfim(n, -1.05, 0.5, 0.1, 0.0);
    cfg.iteration.max_steps = max_steps;
    cfg.outputs.skip_trajectory = true;
    let system = build_system(&cfg).expect("boundary system");
    let opts = IterationOptions {
        max_steps,
        ..IterationOptions::default()
    };
    bilanczos(&system.generator, &system.seed, &opts)
        .expect("boundary recursion")
        .0
}

// ---------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------

#[test]
fn criterion_01_closed_recursion_matches_hermitian_lanczos() {
    let mut failures = Vec::new();
    for (label, run) in [("integrable", &*CLOSED_INT), ("chaotic", &*CLOSED_CHAOTIC)] {
        let max_a = run.tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if max_a >= 1e-8 {
            failures.push(format!("{label}: max|a_n| = {max_a:.3e}"));
        }
        let mut worst = 0.0f64;
        for (b, beta) in run.tri.b.iter().zip(&run.lanczos_b) {
            worst = worst.max((b.norm() - beta).abs() / beta);
        }
        if worst >= 1e-8 {
            failures.push(format!("{label}: b_n relative deviation {worst:.3e}"));
        }
    }
    report(1, &failures, "closed diagonals vanish, b_n matches Lanczos");
}

#[test]
fn criterion_02_chaotic_closed_krylov_dimension() {
    let k = CLOSED_CHAOTIC.tri.krylov_dim;
    let mut failures = Vec::new();
    if !(3500..=4033).contains(&k) {
        failures.push(format!("K = {k} outside [3500, 4033]"));
    }
    report(2, &failures, &format!("K = {k}"));
}

#[test]
fn criterion_03_closed_saturation_distinguishes_regimes() {
    let mut failures = Vec::new();
    let sat = |run: &ClosedRun| {
        saturation_value(&run.traj.t_grid, &run.traj.k_raw, SAT_WINDOW).expect("saturation")
    };
    let sat_c = sat(&CLOSED_CHAOTIC);
    let sat_i = sat(&CLOSED_INT);
    let half_c = CLOSED_CHAOTIC.tri.krylov_dim as f64 / 2.0;
    let half_i = CLOSED_INT.tri.krylov_dim as f64 / 2.0;
    if (sat_c - half_c).abs() > 0.1 * half_c {
        failures.push(format!("chaotic saturation {sat_c:.1} vs K/2 = {half_c:.1}"));
    }
    if sat_i > 0.9 * half_i {
        failures.push(format!(
            "integrable saturation {sat_i:.1} not >=10% below K/2 = {half_i:.1}"
        ));
    }
    report(
        3,
        &failures,
        &format!("chaotic {sat_c:.1}/{half_c:.1}, integrable {sat_i:.1}/{half_i:.1}"),
    );
}

#[test]
fn criterion_04_open_structure_identities() {
    let mut failures = Vec::new();
    for run in TABLE1.iter() {
        let tag = format!("{} {}={}", run.regime, run.axis, run.strength);
        // c_n is stored as a real number, so Im(c_n) = 0 holds exactly by
        // construction; what remains to check is positivity.
        if run.tri.c.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            failures.push(format!("{tag}: non-positive c_n"));
        }
        let bond = run
            .tri
            .b
            .iter()
            .zip(&run.tri.c)
            .map(|(b, &c)| (b.norm() - c).abs() / c)
            .fold(0.0f64, f64::max);
        if bond > 1e-8 {
            failures.push(format!("{tag}: | |b|-|c| |/|c| = {bond:.3e}"));
        }
        let max_a = run.tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let re_a = run.tri.a.iter().map(|v| v.re.abs()).fold(0.0f64, f64::max);
        if re_a > 1e-8 * max_a {
            failures.push(format!("{tag}: max|Re a| = {re_a:.3e}, max|a| = {max_a:.3e}"));
        }
        if run.biortho > 1e-8 {
            failures.push(format!("{tag}: bi-orthonormality residual {:.3e}", run.biortho));
        }
    }
    report(4, &failures, "16 open runs satisfy structure identities");
}

#[test]
fn criterion_05_eta_values_and_ordering() {
    let expected: &[(&str, &str, [f64; 4])] = &[
        ("int", "gamma", [0.0026, 0.0130, 0.0261, 0.0391]),
        ("chaotic", "gamma", [0.0028, 0.0142, 0.0284, 0.0425]),
        ("int", "alpha", [0.0020, 0.0101, 0.0203, 0.0305]),
        ("chaotic", "alpha", [0.0019, 0.0096, 0.0192, 0.0289]),
    ];
    let mut failures = Vec::new();
    for (regime, axis, values) in expected {
        let etas: Vec<f64> = TABLE1
            .iter()
            .filter(|r| r.regime == *regime && r.axis == *axis)
            .map(|r| r.eta)
            .collect();
        assert_eq!(etas.len(), 4);
        for (eta, want) in etas.iter().zip(values) {
            if (eta - want).abs() > 0.15 * want {
                failures.push(format!(
                    "{regime}/{axis}: eta = {eta:.4} vs expected {want:.4}"
                ));
            }
        }
        if !etas.windows(2).all(|w| w[1] > w[0]) {
            failures.push(format!("{regime}/{axis}: eta not monotone: {etas:?}"));
        }
    }
    report(5, &failures, "all 16 slopes within 15%, monotone in strength");
}

#[test]
fn criterion_06_eta_linear_in_dissipation() {
    let mut failures = Vec::new();
    for regime in ["int", "chaotic"] {
        for axis in ["gamma", "alpha"] {
            let pts: Vec<(f64, f64)> = TABLE1
                .iter()
                .filter(|r| r.regime == regime && r.axis == axis)
                .map(|r| (r.strength, r.eta))
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
            let r2 = sxy * sxy / (sxx * syy);
            if r2 < 0.99 {
                failures.push(format!("{regime}/{axis}: r^2 = {r2:.4}"));
            }
        }
    }
    report(6, &failures, "eta linear in both dissipation strengths");
}

#[test]
fn criterion_07_oracle_equivalence_small_systems() {
    let mut failures = Vec::new();
    let controls = IntegratorControls::default();

    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
    };
    let check = |cfg: &ExperimentConfig, t_max: f64, tag: &str, failures: &mut Vec<String>| {
        let system = build_system(cfg).expect("small system");
        let opts = IterationOptions {
            breakdown_tol: 1e-6,
            store_bases: true,
            ..IterationOptions::default()
        };
        let (tri, bases) =
            bilanczos(&system.generator, &system.seed, &opts).expect("small recursion");
        let eff = effective_tridiagonal(&tri, 1e-6).expect("small effective");
        let grid = default_time_grid(t_max, 400);
        let chain = evolve(&eff, &grid, &controls).expect("chain");
        let direct = direct_evolution_oracle(
            &system.generator,
            &system.seed,
            &bases.expect("bases"),
            &grid,
            &controls,
        )
        .expect("oracle");
        let dp = sup(&chain.p, &direct.p);
        let dko = sup(&chain.k_o, &direct.k_o);
        if dp > 1e-6 || dko > 1e-6 {
            failures.push(format!("{tag}: dP = {dp:.3e}, dK_o = {dko:.3e}"));
        }
        chain
    };

    check(&tfim(1, 1.0, 0.0, 0.0, 0.0), 10.0, "closed N=1", &mut failures);
    check(&tfim(2, 1.0, 0.0, 0.0, 0.0), 20.0, "closed N=2", &mut failures);
    check(&tfim(2, -1.05, 0.5, 0.2, 0.05), 20.0, "open N=2", &mut failures);

    // Single-site dephasing: sigma^x seed under a sigma^z jump.
    let gamma = 0.25;
    let mut deph = tfim(1, 0.0, 0.0, 0.0, gamma);
    deph.initial_operator = Some(SeedSpec::Site {
        site: 1,
        axis: "x".into(),
    });
    let chain = check(&deph, 5.0, "dephasing N=1", &mut failures);
    let p_dev = chain
        .t_grid
        .iter()
        .zip(&chain.p)
        .map(|(&t, &p)| (p - (-4.0 * gamma * t).exp()).abs())
        .fold(0.0f64, f64::max);
    if p_dev > 1e-8 {
        failures.push(format!("dephasing: |P - exp(-4 gamma t)| = {p_dev:.3e}"));
    }

    // Single-site precession: K_o = sin^2(2t) for a sigma^z seed under
    // H = g sigma^x with g = 1.
    let closed = check(&tfim(1, 1.0, 0.0, 0.0, 0.0), 10.0, "precession N=1", &mut failures);
    let k_dev = closed
        .t_grid
        .iter()
        .zip(&closed.k_o)
        .map(|(&t, &k)| (k - (2.0 * t).sin().powi(2)).abs())
        .fold(0.0f64, f64::max);
    if k_dev > 1e-8 {
        failures.push(format!("precession: |K_o - sin^2(2t)| = {k_dev:.3e}"));
    }

    report(7, &failures, "chain dynamics match direct evolution and analytics");
}

#[test]
fn criterion_08_open_spectra_stable_and_p_monotone() {
    let mut failures = Vec::new();
    for run in TABLE1.iter() {
        if run.max_real > 1e-10 {
            failures.push(format!(
                "{} {}={}: max Re = {:.3e}",
                run.regime, run.axis, run.strength, run.max_real
            ));
        }
    }
    for (label, run) in [("integrable", &*OPEN_INT), ("chaotic", &*OPEN_CHAOTIC)] {
        if run.max_real > 1e-10 {
            failures.push(format!("{label} trajectory run: max Re = {:.3e}", run.max_real));
        }
        let increase = run
            .traj
            .p
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        if increase > 1e-10 {
            failures.push(format!("{label}: P increases by {increase:.3e}"));
        }
    }
    report(8, &failures, "all open spectra damped, P non-increasing");
}

#[test]
fn criterion_09_open_regimes_share_plateau_differ_early() {
    let mut failures = Vec::new();
    let plateau = |run: &OpenTrajectory| {
        saturation_value(&run.traj.t_grid, &run.traj.k_o, SAT_WINDOW).expect("plateau")
    };
    let peak = |run: &OpenTrajectory| run.traj.k_o.iter().copied().fold(0.0f64, f64::max);
    let (pl_i, pl_c) = (plateau(&OPEN_INT), plateau(&OPEN_CHAOTIC));
    let (pk_i, pk_c) = (peak(&OPEN_INT), peak(&OPEN_CHAOTIC));
    if (pl_i - pl_c).abs() > 0.1 * pl_c.max(pl_i) {
        failures.push(format!("plateaus differ: {pl_i:.2} vs {pl_c:.2}"));
    }
    if (pk_i - pk_c).abs() < 0.2 * pk_c.max(pk_i) {
        failures.push(format!("early peaks too close: {pk_i:.2} vs {pk_c:.2}"));
    }
    report(
        9,
        &failures,
        &format!("plateaus {pl_i:.1}/{pl_c:.1}, peaks {pk_i:.1}/{pk_c:.1}"),
    );
}

#[test]
fn criterion_10_xxz_sector_leakage_and_plateau() {
    let mut failures = Vec::new();
    let mut plateaus = Vec::new();
    for (eps, leak, traj) in XXZ_RUNS.iter() {
        if *leak >= 1e-10 {
            failures.push(format!("epsilon = {eps}: parity leakage {leak:.3e}"));
        }
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, SAT_WINDOW).expect("plateau");
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        if peak <= 1.05 * plateau {
            failures.push(format!(
                "epsilon = {eps}: no growth-decay shape (peak {peak:.2}, plateau {plateau:.2})"
            ));
        }
        plateaus.push(plateau);
    }
    if (plateaus[0] - plateaus[1]).abs() > 0.1 * plateaus[0].max(plateaus[1]) {
        failures.push(format!(
            "plateaus not common: {:.2} vs {:.2}",
            plateaus[0], plateaus[1]
        ));
    }
    report(
        10,
        &failures,
        &format!("leakage < 1e-10, plateaus {:.1}/{:.1}", plateaus[0], plateaus[1]),
    );
}

fn onset_index(tri: &TridiagonalData) -> usize {
    let max_a = tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    tri.a
        .iter()
        .position(|v| v.norm() > 1e-8 * max_a)
        .expect("nonzero diagonal")
}

#[test]
fn criterion_11_boundary_dissipation_onset_and_seed_weight() {
    let mut failures = Vec::new();
    let onsets: Vec<usize> = [(4usize, 600), (6, 600), (8, 200)]
        .iter()
        .map(|&(n, steps)| onset_index(&boundary_only(n, steps)))
        .collect();
    if !(onsets[0] < onsets[1] && onsets[1] < onsets[2]) {
        failures.push(format!("onset indices not increasing with N: {onsets:?}"));
    }

    // Boundary-only decay starts earlier for a wider seed.
    let decay_time = |seed: SeedSpec| {
        let mut cfg = tfim(6, -1.05, 0.5, 0.1, 0.0);
        cfg.initial_operator = Some(seed);
        cfg.iteration.max_steps = 600;
        cfg.integration.t_max = 200.0;
        cfg.integration.grid_points = 500;
        let traj = execute(&cfg).expect("weight run").trajectory.expect("trajectory");
        traj.t_grid
            .iter()
            .zip(&traj.p)
            .find(|(_, &p)| p < 0.9)
            .map(|(&t, _)| t)
            .expect("P never crossed 0.9")
    };
    let t1 = decay_time(SeedSpec::Site {
        site: 3,
        axis: "z".into(),
    });
    let t3 = decay_time(SeedSpec::String {
        factors: vec![(2, "z".into()), (3, "z".into()), (4, "z".into())],
    });
    if t3 >= t1 {
        failures.push(format!("weight-3 seed decays at t = {t3:.2}, weight-1 at {t1:.2}"));
    }
    report(
        11,
        &failures,
        &format!("onsets {onsets:?}, decay times w3 = {t3:.2} < w1 = {t1:.2}"),
    );
}

#[test]
fn criterion_12_support_wall_ordering() {
    // Boundary-only dissipation on the integrable chain, where the
    // full-size class transiently dominates right after the wall is hit.
    let mut cfg = tfim(6, 1.0, 0.0, 0.1, 0.0);
    cfg.iteration.max_steps = 50;
    cfg.iteration.store_bases = true;
    cfg.outputs.support_profiles = true;
    cfg.outputs.skip_trajectory = true;
    let result = execute(&cfg).expect("wall run");
    let wall = result.summary.wall.expect("wall detection");
    let mut failures = Vec::new();
    match (wall.n1, wall.n2) {
        (Some(n1), Some(n2)) if n1 <= n2 => {}
        (n1, n2) => failures.push(format!("wall steps n1 = {n1:?}, n2 = {n2:?}")),
    }
    report(
        12,
        &failures,
        &format!("n1 = {:?}, n2 = {:?}", wall.n1, wall.n2),
    );
}
