//! Declarative experiment runner: model -> Lindbladian -> two-sided
//! recursion -> chain dynamics -> analysis, with every knob recorded in a
//! manifest so a run is reproducible from its artifacts alone.
//!
//! A config names a model (transverse-field Ising or XXZ with a defect),
//! the dissipation strengths, an initial operator, and the iteration and
//! integration controls.  Sector runs (XXZ only) project the Hamiltonian,
//! the jump operators, and the seed into a total-S^z magnetization block
//! before vectorizing; the block is ordered with reflection-even states
//! first so parity leakage of the Krylov vectors is a simple off-block
//! weight.  The jump set is only reflection-covariant as a whole, so the
//! run uses the full magnetization block rather than a parity block, and
//! parity conservation is verified a posteriori instead of imposed.
//!
//! Artifacts per run: coefficients.csv (recursion coefficients),
//! trajectory.csv (t, P, K_raw, K_o), fits.json (slope fit of |a_n| where
//! applicable), run-manifest.json (config + versions + tolerances +
//! termination), and optionally the full amplitude dump.  Sweeps fan a
//! base config across one scalar axis with a bounded worker pool and write
//! a consolidated comparison table.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    detect_wall_steps, fit_diagonal_slope, support_profile, FitRange, SlopeFit, SupportProfile,
    WallSteps, WALL_THRESHOLD,
};
use crate::dynamics::{
    default_time_grid, evolve, saturation_value, write_amplitudes_csv, write_trajectory_csv,
    IntegratorControls, Trajectory, DEFAULT_GRID_POINTS, DEFAULT_T_MAX,
};
use crate::error::{Error, Result};
use crate::krylov_iter::{
    bilanczos, effective_tridiagonal, stability_check, write_coefficients_csv, IterationOptions,
    KrylovBases, TerminationReason, TridiagonalData, DEFAULT_BREAKDOWN_TOL, PROPERTY_TOL,
};
use crate::liouville::{build_lindbladian, vectorize, SuperOperator, SuperVector};
use crate::spin_algebra::{
    build_magnetization_basis, build_pauli_operator, build_tfim_hamiltonian,
    build_tfim_jump_operators, build_xxz_hamiltonian, build_xxz_jump_operators, project_to_sector,
    PauliAxis, PauliString, SectorBasis, SpinOperator,
};

/// Fraction of the grid averaged for plateau values.
pub const SATURATION_WINDOW: f64 = 0.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Tfim {
        g: f64,
        h: f64,
    },
    Xxz {
        j: f64,
        j_zz: f64,
        epsilon: f64,
        /// Defaults to the middle site; even chains symmetrize the defect
        /// over the two middle sites so reflection parity survives.
        #[serde(default)]
        defect_site: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DissipationConfig {
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectorConfig {
    /// Total-S^z eigenvalue of the block.
    pub s: f64,
    /// Reflection parity the run is expected to conserve.
    pub parity: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeedSpec {
    /// A single Pauli factor.
    Site { site: usize, axis: String },
    /// A product of Pauli factors.
    String { factors: Vec<(usize, String)> },
    /// S_i^z + S_j^z (the reflection-even spin pair used by sector runs).
    Pair { sites: (usize, usize) },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationConfig {
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_breakdown_tol")]
    pub breakdown_tol: f64,
    #[serde(default = "default_true")]
    pub reorth: bool,
    #[serde(default)]
    pub store_bases: bool,
}

fn default_max_steps() -> usize {
    100_000
}
fn default_breakdown_tol() -> f64 {
    DEFAULT_BREAKDOWN_TOL
}
fn default_true() -> bool {
    true
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_steps: default_max_steps(),
            breakdown_tol: default_breakdown_tol(),
            reorth: true,
            store_bases: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrationConfig {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}
fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_atol() -> f64 {
    1e-12
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            t_max: default_t_max(),
            grid_points: default_grid_points(),
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct OutputConfig {
    /// Also dump the full amplitude table (large).
    #[serde(default)]
    pub amplitudes: bool,
    /// Skip the ODE integration (coefficients only).
    #[serde(default)]
    pub skip_trajectory: bool,
    /// Compute support profiles of the Krylov basis (needs store_bases and
    /// a full-space run).
    #[serde(default)]
    pub support_profiles: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_sites: usize,
    pub model: ModelConfig,
    pub dissipation: DissipationConfig,
    #[serde(default)]
    pub sector: Option<SectorConfig>,
    #[serde(default)]
    pub initial_operator: Option<SeedSpec>,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.model, ModelConfig::Tfim { .. }) && self.sector.is_some() {
            return Err(Error::InvalidConfig(
                "sector runs are only defined for the xxz model (the Ising \
                 transverse field does not conserve total S^z)"
                    .into(),
            ));
        }
        if let Some(sec) = &self.sector {
            if sec.parity != 1 && sec.parity != -1 {
                return Err(Error::InvalidConfig(format!(
                    "parity must be +1 or -1, got {}",
                    sec.parity
                )));
            }
        }
        if self.dissipation.alpha < 0.0 || self.dissipation.gamma < 0.0 {
            return Err(Error::InvalidConfig(
                "dissipation strengths must be non-negative".into(),
            ));
        }
        if self.integration.grid_points < 16 || self.integration.t_max <= 1.0 {
            return Err(Error::InvalidConfig(
                "integration grid needs t_max > 1 and at least 16 points".into(),
            ));
        }
        Ok(())
    }

    /// Middle-site convention for the default seed.
    pub fn default_seed_site(&self) -> usize {
        self.n_sites.div_ceil(2)
    }
}

fn parse_axis(axis: &str) -> Result<PauliAxis> {
    match axis {
        "x" | "X" => Ok(PauliAxis::X),
        "y" | "Y" => Ok(PauliAxis::Y),
        "z" | "Z" => Ok(PauliAxis::Z),
        other => Err(Error::InvalidConfig(format!(
            "unknown Pauli axis {other:?} (expected x, y, or z)"
        ))),
    }
}

/// Everything needed to iterate: the generator, the normalized seed, and
/// the optional sector frame.
pub struct BuiltSystem {
    pub generator: SuperOperator,
    pub seed: SuperVector,
    pub sector_basis: Option<SectorBasis>,
    pub hilbert_dim: usize,
}

fn build_seed_operator(config: &ExperimentConfig) -> Result<SpinOperator> {
    let n = config.n_sites;
    let one = Complex64::new(1.0, 0.0);
    let spec = config.initial_operator.clone().unwrap_or(SeedSpec::Site {
        site: config.default_seed_site(),
        axis: "z".into(),
    });
    match spec {
        SeedSpec::Site { site, axis } => build_pauli_operator(
            &PauliString::new(n, one).with_factor(site, parse_axis(&axis)?),
        ),
        SeedSpec::String { factors } => {
            let mut s = PauliString::new(n, one);
            for (site, axis) in &factors {
                s = s.with_factor(*site, parse_axis(axis)?);
            }
            build_pauli_operator(&s)
        }
        SeedSpec::Pair { sites } => {
            let half = Complex64::new(0.5, 0.0);
            let a = build_pauli_operator(
                &PauliString::new(n, half).with_factor(sites.0, PauliAxis::Z),
            )?;
            let b = build_pauli_operator(
                &PauliString::new(n, half).with_factor(sites.1, PauliAxis::Z),
            )?;
            a.add(&b)
        }
    }
}

fn build_hamiltonian(config: &ExperimentConfig) -> Result<SpinOperator> {
    match &config.model {
        ModelConfig::Tfim { g, h } => build_tfim_hamiltonian(config.n_sites, *g, *h),
        ModelConfig::Xxz {
            j,
            j_zz,
            epsilon,
            defect_site,
        } => {
            let n = config.n_sites;
            match defect_site {
                Some(site) => build_xxz_hamiltonian(n, *j, *j_zz, *epsilon, *site),
                None if n % 2 == 1 => {
                    build_xxz_hamiltonian(n, *j, *j_zz, *epsilon, n.div_ceil(2))
                }
                None => {
                    // Even chain: split the defect over both middle sites so
                    // it commutes with the reflection.
                    let ham = build_xxz_hamiltonian(n, *j, *j_zz, epsilon / 2.0, n / 2)?;
                    let extra = build_pauli_operator(
                        &PauliString::new(n, Complex64::new(epsilon / 4.0, 0.0))
                            .with_factor(n / 2 + 1, PauliAxis::Z),
                    )?;
                    ham.add(&extra)
                }
            }
        }
    }
}

fn build_jumps(config: &ExperimentConfig) -> Result<Vec<SpinOperator>> {
    let DissipationConfig { alpha, gamma } = config.dissipation;
    if alpha == 0.0 && gamma == 0.0 {
        return Ok(Vec::new());
    }
    match &config.model {
        ModelConfig::Tfim { .. } => build_tfim_jump_operators(config.n_sites, alpha, gamma),
        ModelConfig::Xxz { .. } => build_xxz_jump_operators(config.n_sites, alpha, gamma),
    }
}

/// Builds the superoperator and the normalized seed vector described by
/// the config, projecting everything into the sector block when one is
/// requested.
pub fn build_system(config: &ExperimentConfig) -> Result<BuiltSystem> {
    config.validate()?;
    let mut ham = build_hamiltonian(config)?;
    let mut jumps = build_jumps(config)?;
    let mut seed_op = build_seed_operator(config)?;

    let sector_basis = match &config.sector {
        Some(sec) => {
            let basis = build_magnetization_basis(config.n_sites, sec.s)?;
            ham = project_to_sector(&ham, &basis)?;
            jumps = jumps
                .iter()
                .map(|j| project_to_sector(j, &basis))
                .collect::<Result<Vec<_>>>()?;
            seed_op = project_to_sector(&seed_op, &basis)?;
            Some(basis)
        }
        None => None,
    };

    let hilbert_dim = ham.dim;
    let generator = build_lindbladian(&ham, &jumps)?;
    let mut seed = vectorize(&seed_op);
    seed.normalize()?;
    Ok(BuiltSystem {
        generator,
        seed,
        sector_basis,
        hilbert_dim,
    })
}

/// Weight of a sector supervector on components connecting the two parity
/// blocks (zero when the evolution conserves reflection parity).
pub fn parity_leakage(v: &[Complex64], dim: usize, even_block: usize) -> f64 {
    let mut leak = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            if (i < even_block) != (j < even_block) {
                leak += v[i + dim * j].norm_sqr();
            }
        }
    }
    leak
}

fn max_parity_leakage(bases: &KrylovBases, dim: usize, even_block: usize) -> f64 {
    let mut worst = 0.0f64;
    for col in bases.p.columns() {
        let v: Vec<Complex64> = col.to_vec();
        let norm_sqr: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        worst = worst.max(parity_leakage(&v, dim, even_block) / norm_sqr.max(1e-300));
    }
    worst
}

/// Condensed numbers carried into sweeps, consolidated tables, and tests.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub krylov_dim: usize,
    pub termination: String,
    pub serious_breakdown: bool,
    pub biortho_residual: Option<f64>,
    pub parity_leakage: Option<f64>,
    pub stability_max_real: Option<f64>,
    pub slope: Option<SlopeFit>,
    pub saturation_k_o: Option<f64>,
    pub wall: Option<WallSteps>,
}

/// Full in-memory result of a run.
pub struct RunResult {
    pub tridiagonal: TridiagonalData,
    pub bases: Option<KrylovBases>,
    pub trajectory: Option<Trajectory>,
    pub profiles: Option<Vec<SupportProfile>>,
    pub summary: RunSummary,
}

fn termination_name(t: &TerminationReason) -> String {
    match t {
        TerminationReason::Breakdown => "breakdown".into(),
        TerminationReason::MaxSteps => "max_steps".into(),
        TerminationReason::DimensionBound => "dimension_bound".into(),
    }
}

/// Runs the full pipeline in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunResult> {
    let system = build_system(config)?;
    let opts = IterationOptions {
        max_steps: config.iteration.max_steps,
        breakdown_tol: config.iteration.breakdown_tol,
        reorth: config.iteration.reorth,
        store_bases: config.iteration.store_bases
            || config.sector.is_some()
            || config.outputs.support_profiles,
        ..IterationOptions::default()
    };
    let (tri, bases) = bilanczos(&system.generator, &system.seed, &opts)?;

    let open = !(config.dissipation.alpha == 0.0 && config.dissipation.gamma == 0.0);
    let biortho_residual = bases.as_ref().map(|b| b.bi_orthonormality_residual());

    let leakage = match (&system.sector_basis, &bases) {
        (Some(_), Some(b)) => {
            let even = crate::spin_algebra::parity_block_size(
                config.n_sites,
                config.sector.as_ref().unwrap().s,
            )?;
            Some(max_parity_leakage(b, system.hilbert_dim, even))
        }
        _ => None,
    };

    let eff = effective_tridiagonal(&tri, PROPERTY_TOL)?;
    let stability = if open {
        Some(stability_check(&eff)?)
    } else {
        None
    };

    let trajectory = if config.outputs.skip_trajectory {
        None
    } else {
        let grid = default_time_grid(config.integration.t_max, config.integration.grid_points);
        let controls = IntegratorControls {
            rtol: config.integration.rtol,
            atol: config.integration.atol,
            ..IntegratorControls::default()
        };
        Some(evolve(&eff, &grid, &controls)?)
    };

    let slope = if open && tri.a.len() >= 10 {
        let abs_a: Vec<f64> = tri.a.iter().map(|v| v.norm()).collect();
        fit_diagonal_slope(&abs_a, FitRange::Auto).ok()
    } else {
        None
    };

    let saturation_k_o = trajectory
        .as_ref()
        .and_then(|t| saturation_value(&t.t_grid, &t.k_o, SATURATION_WINDOW).ok());

    let profiles = if config.outputs.support_profiles && config.sector.is_none() {
        bases.as_ref().map(|b| {
            b.p.columns()
                .into_iter()
                .map(|col| {
                    let v = SuperVector {
                        hilbert_dim: system.hilbert_dim,
                        data: col.to_vec(),
                    };
                    support_profile(&v, config.n_sites)
                })
                .collect::<Result<Vec<_>>>()
        })
    } else {
        None
    };
    let profiles = match profiles {
        Some(p) => Some(p?),
        None => None,
    };
    let wall = profiles
        .as_ref()
        .map(|p| detect_wall_steps(p, WALL_THRESHOLD));

    let summary = RunSummary {
        krylov_dim: tri.krylov_dim,
        termination: termination_name(&tri.termination),
        serious_breakdown: tri.diagnostics.serious_breakdown,
        biortho_residual,
        parity_leakage: leakage,
        stability_max_real: stability.as_ref().map(|s| s.max_real_part),
        slope,
        saturation_k_o,
        wall,
    };
    Ok(RunResult {
        tridiagonal: tri,
        bases,
        trajectory,
        profiles,
        summary,
    })
}

fn config_metadata(config: &ExperimentConfig, summary: &RunSummary) -> Vec<(String, String)> {
    vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("n_sites".into(), config.n_sites.to_string()),
        ("alpha".into(), config.dissipation.alpha.to_string()),
        ("gamma".into(), config.dissipation.gamma.to_string()),
        ("krylov_dim".into(), summary.krylov_dim.to_string()),
        ("termination".into(), summary.termination.clone()),
    ]
}

/// Runs the pipeline and writes the artifact set into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let result = execute(config)?;
    fs::create_dir_all(out_dir)?;

    let coeff = fs::File::create(out_dir.join("coefficients.csv"))?;
    write_coefficients_csv(
        &result.tridiagonal,
        &config_metadata(config, &result.summary),
        coeff,
    )?;

    if let Some(traj) = &result.trajectory {
        write_trajectory_csv(&out_dir.join("trajectory.csv"), traj)?;
        if config.outputs.amplitudes {
            write_amplitudes_csv(&out_dir.join("amplitudes.csv"), traj)?;
        }
    }

    let fits = serde_json::json!({
        "slope": result.summary.slope,
        "saturation_k_o": result.summary.saturation_k_o,
        "saturation_window": SATURATION_WINDOW,
        "wall": result.summary.wall,
    });
    fs::write(
        out_dir.join("fits.json"),
        serde_json::to_string_pretty(&fits).expect("fits serialization"),
    )?;

    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "tolerances": {
            "breakdown_tol": config.iteration.breakdown_tol,
            "property_tol": PROPERTY_TOL,
            "rtol": config.integration.rtol,
            "atol": config.integration.atol,
        },
        "termination_reason": result.summary.termination,
        "summary": result.summary,
    });
    fs::write(
        out_dir.join("run-manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )?;
    Ok(result.summary)
}

/// Scalar sweep axes.
pub fn set_axis(config: &mut ExperimentConfig, axis: &str, value: f64) -> Result<()> {
    match (axis, &mut config.model) {
        ("alpha", _) => config.dissipation.alpha = value,
        ("gamma", _) => config.dissipation.gamma = value,
        ("g", ModelConfig::Tfim { g, .. }) => *g = value,
        ("h", ModelConfig::Tfim { h, .. }) => *h = value,
        ("epsilon", ModelConfig::Xxz { epsilon, .. }) => *epsilon = value,
        ("t_max", _) => config.integration.t_max = value,
        (other, _) => {
            return Err(Error::InvalidConfig(format!(
                "unknown or non-scalar sweep axis {other:?} for this model"
            )))
        }
    }
    Ok(())
}

/// Runs one config per value concurrently (at most `workers` at a time)
/// and writes a consolidated comparison CSV beside the per-value run
/// directories.
pub fn sweep(
    base: &ExperimentConfig,
    axis: &str,
    values: &[f64],
    workers: usize,
    out_dir: &Path,
) -> Result<Vec<RunSummary>> {
    // Fail on a bad axis before spawning anything.
    let mut probe = base.clone();
    if let Some(&v) = values.first() {
        set_axis(&mut probe, axis, v)?;
    } else {
        set_axis(&mut probe, axis, 0.0)?;
    }
    fs::create_dir_all(out_dir)?;

    let jobs: Vec<(usize, ExperimentConfig, PathBuf)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = base.clone();
            set_axis(&mut cfg, axis, v).expect("validated axis");
            let dir = out_dir.join(format!("{axis}-{v}"));
            (i, cfg, dir)
        })
        .collect();

    let results: Mutex<Vec<Option<Result<RunSummary>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(jobs.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (_, cfg, dir) = &jobs[i];
                let r = run(cfg, dir);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });

    let collected: Vec<Result<RunSummary>> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("job completed"))
        .collect();
    let mut summaries = Vec::with_capacity(collected.len());
    for r in collected {
        summaries.push(r?);
    }

    let mut table = String::from(
        "axis,value,krylov_dim,termination,eta,r_squared,saturation_k_o\n",
    );
    for (v, s) in values.iter().zip(&summaries) {
        let (eta, r2) = s
            .slope
            .as_ref()
            .map(|f| (f.eta.to_string(), f.r_squared.to_string()))
            .unwrap_or_else(|| (String::new(), String::new()));
        let sat = s
            .saturation_k_o
            .map(|x| x.to_string())
            .unwrap_or_default();
        table.push_str(&format!(
            "{axis},{v},{},{},{eta},{r2},{sat}\n",
            s.krylov_dim, s.termination
        ));
    }
    fs::write(out_dir.join("sweep.csv"), table)?;
    Ok(summaries)
}

fn tfim_config(n: usize, g: f64, h: f64, alpha: f64, gamma: f64) -> ExperimentConfig {
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

/// Named reproduction presets; each returns (subdirectory, config) pairs.
pub fn preset(name: &str) -> Result<Vec<(String, ExperimentConfig)>> {
    let mut runs = Vec::new();
    match name {
        // Closed-system coefficient sequences and K(t) for both parameter
        // sets.
        "fig1-closed-tfim" => {
            for (label, g, h) in [("integrable", 1.0, 0.0), ("chaotic", -1.05, 0.5)] {
                let mut cfg = tfim_config(6, g, h, 0.0, 0.0);
                cfg.iteration.breakdown_tol = 1e-6;
                runs.push((label.to_string(), cfg));
            }
        }
        // The 16 slope runs: 4 gamma values and 4 alpha values, integrable
        // and chaotic each.
        "table1" => {
            for (reg, g, h) in [("int", 1.0, 0.0), ("chaotic", -1.05, 0.5)] {
                for &gamma in &[0.01, 0.05, 0.10, 0.15] {
                    let mut cfg = tfim_config(6, g, h, 0.0, gamma);
                    cfg.iteration.max_steps = 800;
                    cfg.outputs.skip_trajectory = true;
                    runs.push((format!("{reg}-gamma-{gamma}"), cfg));
                }
                for &alpha in &[0.01, 0.05, 0.10, 0.15] {
                    let mut cfg = tfim_config(6, g, h, alpha, 0.0);
                    cfg.iteration.max_steps = 800;
                    cfg.outputs.skip_trajectory = true;
                    runs.push((format!("{reg}-alpha-{alpha}"), cfg));
                }
            }
        }
        // Integrable vs chaotic open trajectories at equal weak dissipation.
        "fig3-open-saturation" => {
            for (label, g, h) in [("integrable", 1.0, 0.0), ("chaotic", -1.05, 0.5)] {
                let mut cfg = tfim_config(6, g, h, 0.01, 0.01);
                cfg.iteration.max_steps = 1500;
                runs.push((label.to_string(), cfg));
            }
        }
        // Sector-projected XXZ with and without the integrability-breaking
        // defect (desk-scale stand-in for the paper's larger chain).
        "xxz-sector" => {
            for &epsilon in &[0.0, 0.5] {
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
                runs.push((format!("epsilon-{epsilon}"), cfg));
            }
        }
        // Boundary-only dissipation across sizes: finite-size onset of the
        // diagonal growth.
        "finite-size" => {
            for &n in &[4usize, 6, 8] {
                let mut cfg = tfim_config(n, -1.05, 0.5, 0.1, 0.0);
                cfg.iteration.max_steps = if n >= 8 { 200 } else { 600 };
                cfg.outputs.skip_trajectory = n >= 8;
                runs.push((format!("n-{n}"), cfg));
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?} (available: fig1-closed-tfim, table1, \
                 fig3-open-saturation, xxz-sector, finite-size)"
            )))
        }
    }
    Ok(runs)
}

/// Runs every member of a preset sequentially and consolidates the slope
/// table when one applies.
pub fn run_preset(name: &str, out_dir: &Path, workers: usize) -> Result<Vec<RunSummary>> {
    let members = preset(name)?;
    fs::create_dir_all(out_dir)?;

    let results: Mutex<Vec<Option<Result<RunSummary>>>> =
        Mutex::new((0..members.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(members.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= members.len() {
                    break;
                }
                let (label, cfg) = &members[i];
                let r = run(cfg, &out_dir.join(label));
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let collected: Vec<Result<RunSummary>> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("job completed"))
        .collect();
    let mut summaries = Vec::with_capacity(collected.len());
    for r in collected {
        summaries.push(r?);
    }

    let mut table = String::from("run,alpha,gamma,krylov_dim,eta,r_squared\n");
    for ((label, cfg), s) in members.iter().zip(&summaries) {
        let (eta, r2) = s
            .slope
            .as_ref()
            .map(|f| (f.eta.to_string(), f.r_squared.to_string()))
            .unwrap_or_default();
        table.push_str(&format!(
            "{label},{},{},{},{eta},{r2}\n",
            cfg.dissipation.alpha, cfg.dissipation.gamma, s.krylov_dim
        ));
    }
    fs::write(out_dir.join("summary.csv"), table)?;
    Ok(summaries)
}
