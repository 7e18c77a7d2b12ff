//! Scratch diagnostics for acceptance tuning (not part of the test suite).

use num_complex::Complex64;

use klind_core::analysis::{detect_wall_steps, support_profile, WALL_THRESHOLD};
use klind_core::dynamics::{default_time_grid, evolve, saturation_value, IntegratorControls};
use klind_core::experiment::{build_system, ExperimentConfig, ModelConfig, SectorConfig, SeedSpec,
    DissipationConfig, IterationConfig, IntegrationConfig, OutputConfig};
use klind_core::krylov_iter::{
    bilanczos, effective_tridiagonal, stability_check, IterationOptions, TridiagonalData,
};
use klind_core::liouville::SuperVector;

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

fn prefix(tri: &TridiagonalData, m: usize) -> TridiagonalData {
    let m = m.min(tri.krylov_dim);
    TridiagonalData {
        a: tri.a[..m].to_vec(),
        b: tri.b[..m.saturating_sub(1)].to_vec(),
        c: tri.c[..m.saturating_sub(1)].to_vec(),
        krylov_dim: m,
        termination: tri.termination,
        diagnostics: tri.diagnostics.clone(),
    }
}

fn dump_coeffs(tri: &TridiagonalData, label: &str) {
    let obj = serde_json::json!({
        "a_re": tri.a.iter().map(|v| v.re).collect::<Vec<_>>(),
        "a_im": tri.a.iter().map(|v| v.im).collect::<Vec<_>>(),
        "b_re": tri.b.iter().map(|v| v.re).collect::<Vec<_>>(),
        "b_im": tri.b.iter().map(|v| v.im).collect::<Vec<_>>(),
        "c": tri.c,
    });
    std::fs::write(
        format!("/tmp/coeffs_{label}.json"),
        serde_json::to_string(&obj).unwrap(),
    )
    .unwrap();
}

fn tail_c(tri: &TridiagonalData, k: usize) {
    let n = tri.c.len();
    let lo = n.saturating_sub(k);
    let tail: Vec<String> = (lo..n).map(|i| format!("{}:{:.3e}", i, tri.c[i])).collect();
    println!("    tail c: {}", tail.join(" "));
}

fn re_a_onset(tri: &TridiagonalData) -> (f64, Option<usize>) {
    let max_a = tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let idx = tri
        .a
        .iter()
        .position(|v| v.re.abs() > 1e-8 * max_a);
    (max_a, idx)
}

fn closed_small() {
    println!("== A: small closed systems ==");
    let tol: f64 = std::env::var("BTOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1e-6);
    println!("  breakdown_tol={tol:.1e}");
    for n in [4usize, 5] {
        for (label, g, h) in [("int", 1.0, 0.0), ("chaotic", -1.05, 0.5)] {
            let cfg = tfim(n, g, h, 0.0, 0.0);
            let system = build_system(&cfg).unwrap();
            let opts = IterationOptions {
                max_steps: 1200,
                breakdown_tol: tol,
                ..IterationOptions::default()
            };
            let (tri, _) = bilanczos(&system.generator, &system.seed, &opts).unwrap();
            let max_a = tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            let d = 1usize << n;
            println!(
                "  N={n} {label}: K={} (D^2-D+1={}) term={:?} serious={} max|a|={:.3e} noise={:.3e}",
                tri.krylov_dim,
                d * d - d + 1,
                tri.termination,
                tri.diagnostics.serious_breakdown,
                max_a,
                tri.diagnostics.max_reorth_correction,
            );
            tail_c(&tri, 6);
        }
    }
}

fn closed_int_n6() {
    println!("== E: closed integrable N=6 ==");
    let tol: f64 = std::env::var("BTOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1e-6);
    println!("  breakdown_tol={tol:.1e}");
    let cfg = tfim(6, 1.0, 0.0, 0.0, 0.0);
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: 1200,
        breakdown_tol: tol,
        ..IterationOptions::default()
    };
    let (tri, _) = bilanczos(&system.generator, &system.seed, &opts).unwrap();
    let max_a = tri.a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    println!(
        "  K={} term={:?} serious={} max|a|={:.3e} noise={:.3e}",
        tri.krylov_dim,
        tri.termination,
        tri.diagnostics.serious_breakdown,
        max_a,
        tri.diagnostics.max_reorth_correction
    );
    tail_c(&tri, 8);
    let steps = tri.b.len().min(600);
    let betas = hermitian_lanczos_ref(&system.generator, &system.seed, steps);
    let mut worst = 0.0f64;
    let mut worst_i = 0;
    for (i, (b, beta)) in tri.b.iter().zip(&betas).enumerate() {
        let d = (b.norm() - beta).abs() / beta;
        if d > worst {
            worst = d;
            worst_i = i;
        }
    }
    println!(
        "  b vs lanczos (first {} of {}): worst rel {worst:.3e} at {worst_i}",
        betas.len(),
        steps
    );
    match effective_tridiagonal(&tri, 1e-6) {
        Ok(eff) => {
            let grid = default_time_grid(500.0, 2000);
            let traj = evolve(&eff, &grid, &IntegratorControls::default()).unwrap();
            let sat = saturation_value(&traj.t_grid, &traj.k_raw, 0.2).unwrap();
            let half = tri.krylov_dim as f64 / 2.0;
            println!("  k_raw saturation={sat:.2} K/2={half:.1} ratio={:.3}", sat / half);
        }
        Err(e) => println!("  effective_tridiagonal failed: {e}"),
    }
}

fn fig3_probe(label: &str, g: f64, h: f64) {
    println!("== B: fig3 open {label} (alpha=gamma=0.01) ==");
    let cfg = tfim(6, g, h, 0.01, 0.01);
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: 1500,
        ..IterationOptions::default()
    };
    let (tri, _) = match bilanczos(&system.generator, &system.seed, &opts) {
        Ok(v) => v,
        Err(e) => {
            println!("  bilanczos failed: {e}");
            return;
        }
    };
    let (max_a, onset) = re_a_onset(&tri);
    println!(
        "  K={} term={:?} max|a|={:.3e} first ReA>1e-8*max|a| at {:?}",
        tri.krylov_dim, tri.termination, max_a, onset
    );
    dump_coeffs(&tri, &format!("fig3_{label}"));
    let grid = default_time_grid(500.0, 2000);
    for m in [100usize, 200, 300, 400, 600, 800, 1000, 1500] {
        if m > tri.krylov_dim {
            break;
        }
        let p = prefix(&tri, m);
        let (pa, ponset) = re_a_onset(&p);
        let eff = match effective_tridiagonal(&p, 1.0) {
            Ok(e) => e,
            Err(e) => {
                println!("  m={m}: eff failed: {e}");
                continue;
            }
        };
        let st = stability_check(&eff).unwrap();
        let traj = match evolve(&eff, &grid, &IntegratorControls::default()) {
            Ok(t) => t,
            Err(e) => {
                println!("  m={m}: evolve failed: {e}");
                continue;
            }
        };
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        let pinc = traj.p.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        println!(
            "  m={m}: maxRe={:+.3e} plateau={plateau:.2} peak={peak:.2} Pinc={pinc:.2e} ReA_onset={:?} max|a|={pa:.3e}",
            st.max_real_part, ponset
        );
    }
}

fn xxz_probe(eps: f64) {
    println!("== C: xxz sector eps={eps} ==");
    let cfg = ExperimentConfig {
        n_sites: 8,
        model: ModelConfig::Xxz {
            j: 1.0,
            j_zz: 1.0,
            epsilon: eps,
            defect_site: None,
        },
        dissipation: DissipationConfig {
            alpha: 0.01,
            gamma: 0.01,
        },
        sector: Some(SectorConfig { s: 1.0, parity: 1 }),
        initial_operator: Some(SeedSpec::Pair { sites: (2, 7) }),
        iteration: IterationConfig::default(),
        integration: IntegrationConfig::default(),
        outputs: OutputConfig::default(),
    };
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: 1500,
        breakdown_tol: 1e-6,
        store_bases: true,
        ..IterationOptions::default()
    };
    let (tri, bases) = match bilanczos(&system.generator, &system.seed, &opts) {
        Ok(v) => v,
        Err(e) => {
            println!("  bilanczos failed: {e}");
            return;
        }
    };
    let even = klind_core::spin_algebra::parity_block_size(8, 1.0).unwrap();
    let b = bases.as_ref().unwrap();
    let dim = system.hilbert_dim;
    let mut leak = 0.0f64;
    for col in b.p.columns() {
        let mut off = 0.0;
        let mut tot = 0.0;
        for (idx, v) in col.iter().enumerate() {
            let (r, c) = (idx / dim, idx % dim);
            let w = v.norm_sqr();
            tot += w;
            if (r < even) != (c < even) {
                off += w;
            }
        }
        leak = leak.max(off / tot);
    }
    dump_coeffs(&tri, &format!("xxz_{eps}"));
    let (max_a, onset) = re_a_onset(&tri);
    println!(
        "  dim={} K={} term={:?} leak={:.3e} max|a|={:.3e} ReA onset={:?}",
        system.generator.dim(),
        tri.krylov_dim,
        tri.termination,
        leak,
        max_a,
        onset
    );
    let grid = default_time_grid(500.0, 2000);
    for m in [200usize, 400, 600, 800, 1000, 1500] {
        if m > tri.krylov_dim {
            break;
        }
        let p = prefix(&tri, m);
        let eff = match effective_tridiagonal(&p, 1.0) {
            Ok(e) => e,
            Err(e) => {
                println!("  m={m}: eff failed: {e}");
                continue;
            }
        };
        let st = stability_check(&eff).unwrap();
        let traj = match evolve(&eff, &grid, &IntegratorControls::default()) {
            Ok(t) => t,
            Err(e) => {
                println!("  m={m}: evolve failed: {e}");
                continue;
            }
        };
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        println!(
            "  m={m}: maxRe={:+.3e} plateau={plateau:.2} peak={peak:.2} peak/plateau={:.3}",
            st.max_real_part,
            peak / plateau
        );
    }
}

fn wall_probe() {
    println!("== D: wall run (integrable, boundary-only alpha=0.1) ==");
    let cfg = tfim(6, 1.0, 0.0, 0.1, 0.0);
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: 50,
        store_bases: true,
        ..IterationOptions::default()
    };
    let (tri, bases) = bilanczos(&system.generator, &system.seed, &opts).unwrap();
    let bases = bases.unwrap();
    let profiles: Vec<_> = bases
        .p
        .columns()
        .into_iter()
        .map(|col| {
            let v = SuperVector {
                hilbert_dim: system.hilbert_dim,
                data: col.to_vec(),
            };
            support_profile(&v, 6).unwrap()
        })
        .collect();
    let wall = detect_wall_steps(&profiles, WALL_THRESHOLD);
    println!("  K={} wall n1={:?} n2={:?} threshold={WALL_THRESHOLD}", tri.krylov_dim, wall.n1, wall.n2);
    for (i, p) in profiles.iter().enumerate().take(30) {
        let w = &p.weights;
        let wmax = *w.last().unwrap();
        let arg = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        println!("  step {i:2}: w_N={wmax:.3} argmax={arg}");
    }
    let (_, onset) = re_a_onset(&tri);
    println!("  ReA onset at 50 steps: {onset:?}");
    match effective_tridiagonal(&tri, 1e-8) {
        Ok(_) => println!("  eff(1e-8) OK at 50 steps"),
        Err(e) => println!("  eff(1e-8) fails at 50 steps: {e}"),
    }
}

fn hermitian_lanczos_ref(
    gen: &klind_core::liouville::SuperOperator,
    seed: &SuperVector,
    steps: usize,
) -> Vec<f64> {
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
                *wi -= Complex64::new(beta_prev, 0.0) * vi;
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

fn closed_clean_window(label: &str, g: f64, h: f64, steps: usize) {
    println!("== F: closed bilanczos clean window {label} (steps={steps}) ==");
    let cfg = tfim(6, g, h, 0.0, 0.0);
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: steps,
        breakdown_tol: 1e-6,
        ..IterationOptions::default()
    };
    let (tri, _) = bilanczos(&system.generator, &system.seed, &opts).unwrap();
    let a_onset = tri.a.iter().position(|v| v.norm() > 1e-8);
    let betas = hermitian_lanczos_ref(&system.generator, &system.seed, tri.b.len());
    let mut dev_onset = None;
    let mut worst = 0.0f64;
    for (i, (b, beta)) in tri.b.iter().zip(&betas).enumerate() {
        let d = (b.norm() - beta).abs() / beta;
        if d > 1e-8 && dev_onset.is_none() {
            dev_onset = Some(i);
        }
        worst = worst.max(d);
    }
    println!(
        "  K={} term={:?} |a|>1e-8 onset={a_onset:?} b-dev>1e-8 onset={dev_onset:?} worst dev={worst:.3e}",
        tri.krylov_dim, tri.termination
    );
}

fn closed_lanczos_full(label: &str, g: f64, h: f64) -> (usize, f64) {
    println!("== H: closed lanczos full {label} ==");
    let cfg = tfim(6, g, h, 0.0, 0.0);
    let system = build_system(&cfg).unwrap();
    let opts = IterationOptions {
        max_steps: 4200,
        ..IterationOptions::default()
    };
    let (tri, _) = klind_core::krylov_iter::lanczos(&system.generator, &system.seed, &opts)
        .unwrap();
    println!(
        "  K={} term={:?} noise={:.3e}",
        tri.krylov_dim, tri.termination, tri.diagnostics.max_reorth_correction
    );
    tail_c(&tri, 5);
    match effective_tridiagonal(&tri, 1e-6) {
        Ok(eff) => {
            let grid = default_time_grid(500.0, 2000);
            let traj = evolve(&eff, &grid, &IntegratorControls::default()).unwrap();
            let sat = saturation_value(&traj.t_grid, &traj.k_raw, 0.2).unwrap();
            let half = tri.krylov_dim as f64 / 2.0;
            println!("  k_raw sat={sat:.2} K/2={half:.1} ratio={:.3}", sat / half);
            (tri.krylov_dim, sat)
        }
        Err(e) => {
            println!("  eff failed: {e}");
            (tri.krylov_dim, f64::NAN)
        }
    }
}

fn prefix_scan(path: &str, label: &str, ms: &[usize]) {
    println!("== I: prefix scan {label} ==");
    let txt = std::fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&txt).unwrap();
    let arr = |k: &str| -> Vec<f64> {
        v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    let (are, aim, bre, bim, c) = (arr("a_re"), arr("a_im"), arr("b_re"), arr("b_im"), arr("c"));
    let a: Vec<Complex64> = are.iter().zip(&aim).map(|(&r, &i)| Complex64::new(r, i)).collect();
    let b: Vec<Complex64> = bre.iter().zip(&bim).map(|(&r, &i)| Complex64::new(r, i)).collect();
    let neg = aim.iter().position(|&x| x < 0.0);
    println!("  first negative Im a at {neg:?}");
    let grid = default_time_grid(500.0, 2000);
    for &m in ms {
        if m > a.len() {
            break;
        }
        let tri = TridiagonalData {
            a: a[..m].to_vec(),
            b: b[..m - 1].to_vec(),
            c: c[..m - 1].to_vec(),
            krylov_dim: m,
            termination: klind_core::krylov_iter::TerminationReason::MaxSteps,
            diagnostics: klind_core::krylov_iter::IterationDiagnostics {
                final_residual_norms: (0.0, 0.0),
                serious_breakdown: false,
                max_reorth_correction: 0.0,
            },
        };
        let eff = match effective_tridiagonal(&tri, 1e-8) {
            Ok(e) => e,
            Err(e) => {
                println!("  m={m}: eff(1e-8) failed: {e}");
                continue;
            }
        };
        let st = stability_check(&eff).unwrap();
        let traj = match evolve(&eff, &grid, &IntegratorControls::default()) {
            Ok(t) => t,
            Err(e) => {
                println!("  m={m}: evolve failed: {e}");
                continue;
            }
        };
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        let pinc = traj.p.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        println!(
            "  m={m}: maxRe={:+.3e} plateau={plateau:.2} peak={peak:.2} Pinc={pinc:.2e}",
            st.max_real_part
        );
    }
}

fn conditioned_scan(path: &str, label: &str, ms: &[usize]) {
    use klind_core::analysis::filter_outliers;
    println!("== J: conditioned scan {label} ==");
    let txt = std::fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&txt).unwrap();
    let arr = |k: &str| -> Vec<f64> {
        v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    let (are, aim, bre, bim) = (arr("a_re"), arr("a_im"), arr("b_re"), arr("b_im"));
    let abs_a: Vec<f64> = are.iter().zip(&aim).map(|(&r, &i)| (r * r + i * i).sqrt()).collect();
    let abs_b: Vec<f64> = bre.iter().zip(&bim).map(|(&r, &i)| (r * r + i * i).sqrt()).collect();
    let sign_b: Vec<f64> = bre.iter().map(|&r| r.signum()).collect();
    let (fa, ra) = filter_outliers(&abs_a, 3.0);
    let (fb, rb) = filter_outliers(&abs_b, 3.0);
    println!(
        "  removed {} / {} of a ({:.1}%), {} / {} of b ({:.1}%), neg bonds {}",
        ra.len(), fa.len(), 100.0 * ra.len() as f64 / fa.len() as f64,
        rb.len(), fb.len(), 100.0 * rb.len() as f64 / fb.len() as f64,
        sign_b.iter().filter(|&&s| s < 0.0).count()
    );
    let grid = default_time_grid(500.0, 2000);
    for &m in ms {
        if m > fa.len() {
            break;
        }
        let eff = klind_core::krylov_iter::EffectiveTridiagonal {
            im_a: fa[..m].to_vec(),
            abs_b: fb[..m - 1].to_vec(),
            sign_b: sign_b[..m - 1].to_vec(),
        };
        let st = stability_check(&eff).unwrap();
        let traj = match evolve(&eff, &grid, &IntegratorControls::default()) {
            Ok(t) => t,
            Err(e) => {
                println!("  m={m}: evolve failed: {e}");
                continue;
            }
        };
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        let pinc = traj.p.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        println!(
            "  m={m}: maxRe={:+.3e} plateau={plateau:.2} peak={peak:.2} Pinc={pinc:.2e}",
            st.max_real_part
        );
    }
}

fn clipped_scan(path: &str, label: &str, ca: f64, cb: f64, ms: &[usize]) {
    let txt = std::fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&txt).unwrap();
    let arr = |k: &str| -> Vec<f64> {
        v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    let (are, aim, bre, bim) = (arr("a_re"), arr("a_im"), arr("b_re"), arr("b_im"));
    let abs_a: Vec<f64> = are
        .iter()
        .zip(&aim)
        .map(|(&r, &i)| (r * r + i * i).sqrt().min(ca))
        .collect();
    let abs_b: Vec<f64> = bre
        .iter()
        .zip(&bim)
        .map(|(&r, &i)| (r * r + i * i).sqrt().min(cb))
        .collect();
    let grid = default_time_grid(500.0, 2000);
    for &m in ms {
        if m > abs_a.len() {
            break;
        }
        let eff = klind_core::krylov_iter::EffectiveTridiagonal {
            im_a: abs_a[..m].to_vec(),
            abs_b: abs_b[..m - 1].to_vec(),
            sign_b: vec![1.0; m - 1],
        };
        let traj = match evolve(&eff, &grid, &IntegratorControls::default()) {
            Ok(t) => t,
            Err(e) => {
                println!("  {label} ca={ca} cb={cb} m={m}: evolve failed: {e}");
                continue;
            }
        };
        let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
        let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
        println!("  {label} ca={ca} cb={cb} m={m}: plateau={plateau:.2} peak={peak:.2}");
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("all");
    if which == "all" || which == "a" {
        closed_small();
    }
    if which == "all" || which == "e" {
        closed_int_n6();
    }
    if which == "all" || which == "d" {
        wall_probe();
    }
    if which == "all" || which == "c" {
        xxz_probe(0.0);
        xxz_probe(0.5);
    }
    if which == "all" || which == "b" {
        fig3_probe("integrable", 1.0, 0.0);
        fig3_probe("chaotic", -1.05, 0.5);
    }
    if which == "f" {
        closed_clean_window("chaotic", -1.05, 0.5, 700);
    }
    if which == "f2" {
        closed_clean_window("integrable", 1.0, 0.0, 300);
    }
    if which == "h-int" {
        closed_lanczos_full("integrable", 1.0, 0.0);
    }
    if which == "h-ch" {
        closed_lanczos_full("chaotic", -1.05, 0.5);
    }
    if which == "i" {
        let ms = [20usize, 25, 30, 33, 36, 40, 45, 50];
        prefix_scan("/tmp/coeffs_fig3_integrable.json", "fig3 int", &ms);
        prefix_scan("/tmp/coeffs_fig3_chaotic.json", "fig3 chaotic", &ms);
    }
    if which == "k" {
        println!("== K: clipped conditioning scan ==");
        for ca in [0.2f64, 0.5, 1.0, 2.0, 4.0] {
            clipped_scan("/tmp/coeffs_fig3_integrable.json", "int", ca, 9.0, &[400, 700]);
        }
        clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 12.0, 12.0, &[400, 700]);
    }
    if which == "k2" {
        println!("== K2: cutoff robustness ==");
        for cb in [7.0f64, 9.0, 12.0, 15.0] {
            clipped_scan("/tmp/coeffs_fig3_integrable.json", "int", 1.0, cb, &[700]);
        }
        for ca in [4.0f64, 8.0, 12.0, 20.0] {
            clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", ca, 12.0, &[700]);
        }
        for cb in [7.0f64, 9.0, 15.0] {
            clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 12.0, cb, &[700]);
        }
        clipped_scan("/tmp/coeffs_fig3_integrable.json", "int", 12.0, 12.0, &[700]);
        clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 1.0, 9.0, &[700]);
    }
    if which == "k3" {
        println!("== K3: chaotic near-raw cutoffs ==");
        clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 1e9, 1e9, &[400, 700]);
        clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 465.0, 12.0, &[700]);
        clipped_scan("/tmp/coeffs_fig3_chaotic.json", "ch", 12.0, 465.0, &[700]);
        clipped_scan("/tmp/coeffs_fig3_integrable.json", "int", 2.0, 9.2, &[400, 700]);
    }
    if which == "k4" {
        println!("== K4: xxz clipped conditioning ==");
        for c in [4.0f64, 6.0, 8.0, 12.0] {
            clipped_scan("/tmp/coeffs_xxz_0.json", "eps0", c, c, &[400, 700, 1000, 1500]);
            clipped_scan("/tmp/coeffs_xxz_0.5.json", "eps05", c, c, &[400, 700, 1000, 1500]);
        }
    }
    if which == "k5" {
        println!("== K5: xxz small cutoffs ==");
        for (ca, cb) in [(0.5f64, 2.5f64), (0.5, 3.0), (1.0, 3.0), (1.0, 4.0), (2.0, 3.0), (2.0, 4.0), (3.0, 4.0)] {
            clipped_scan("/tmp/coeffs_xxz_0.json", "eps0", ca, cb, &[700, 1500]);
            clipped_scan("/tmp/coeffs_xxz_0.5.json", "eps05", ca, cb, &[700, 1500]);
        }
    }
    if which == "k6" {
        println!("== K6: xxz raw prefixes fine scan ==");
        for path in ["/tmp/coeffs_xxz_0.json", "/tmp/coeffs_xxz_0.5.json"] {
            println!("-- {path}");
            let txt = std::fs::read_to_string(path).unwrap();
            let v: serde_json::Value = serde_json::from_str(&txt).unwrap();
            let arr = |k: &str| -> Vec<f64> {
                v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
            };
            let (are, aim, bre, bim) = (arr("a_re"), arr("a_im"), arr("b_re"), arr("b_im"));
            let grid = default_time_grid(500.0, 2000);
            for m in [40usize, 60, 80, 100, 120, 150, 180, 250, 300] {
                let eff = klind_core::krylov_iter::EffectiveTridiagonal {
                    im_a: aim[..m].to_vec(),
                    abs_b: bre[..m - 1]
                        .iter()
                        .zip(&bim[..m - 1])
                        .map(|(&r, &i)| (r * r + i * i).sqrt())
                        .collect(),
                    sign_b: vec![1.0; m - 1],
                };
                let _ = &are;
                let st = stability_check(&eff).unwrap();
                match evolve(&eff, &grid, &IntegratorControls::default()) {
                    Ok(t) => {
                        let plateau = saturation_value(&t.t_grid, &t.k_o, 0.2).unwrap();
                        let peak = t.k_o.iter().copied().fold(0.0f64, f64::max);
                        let pinc = t.p.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
                        println!("  m={m}: maxRe={:+.2e} plateau={plateau:.2} peak={peak:.2} Pinc={pinc:.1e}", st.max_real_part);
                    }
                    Err(e) => println!("  m={m}: evolve failed: {e}"),
                }
            }
        }
    }
    if which == "x40" {
        println!("== X40: xxz 40-step execute path ==");
        for eps in [0.0f64, 0.5] {
          for steps in [30usize, 40, 45, 50, 55, 60, 70, 80] {
            let cfg = ExperimentConfig {
                n_sites: 8,
                model: ModelConfig::Xxz { j: 1.0, j_zz: 1.0, epsilon: eps, defect_site: None },
                dissipation: DissipationConfig { alpha: 0.01, gamma: 0.01 },
                sector: Some(SectorConfig { s: 1.0, parity: 1 }),
                initial_operator: Some(SeedSpec::Pair { sites: (2, 7) }),
                iteration: IterationConfig { max_steps: steps, breakdown_tol: 1e-6, reorth: true, store_bases: true },
                integration: IntegrationConfig::default(),
                outputs: OutputConfig::default(),
            };
            match klind_core::experiment::execute(&cfg) {
                Ok(res) => {
                    let traj = res.trajectory.unwrap();
                    let plateau = saturation_value(&traj.t_grid, &traj.k_o, 0.2).unwrap();
                    let peak = traj.k_o.iter().copied().fold(0.0f64, f64::max);
                    println!(
                        "  eps={eps} m={steps}: leak={:?} maxRe={:+.2e} plateau={plateau:.2} peak={peak:.2}",
                        res.summary.parity_leakage, res.summary.stability_max_real.unwrap()
                    );
                }
                Err(e) => println!("  eps={eps} m={steps}: execute failed: {e}"),
            }
          }
        }
    }
    if which == "t" {
        println!("== T: trace open integrable, 200 steps ==");
        let cfg = tfim(6, 1.0, 0.0, 0.01, 0.01);
        let system = build_system(&cfg).unwrap();
        let opts = IterationOptions { max_steps: 200, ..IterationOptions::default() };
        let _ = bilanczos(&system.generator, &system.seed, &opts);
    }
    if which == "j2" {
        let ms = [30usize, 40, 50, 55, 60, 63, 70, 80, 90, 100, 150, 200];
        conditioned_scan("/tmp/coeffs_fig3_integrable.json", "fig3 int", &ms);
        conditioned_scan("/tmp/coeffs_fig3_chaotic.json", "fig3 chaotic", &ms);
    }
    if which == "j" {
        let ms = [100usize, 200, 400, 700, 1000, 1500];
        conditioned_scan("/tmp/coeffs_fig3_integrable.json", "fig3 int", &ms);
        conditioned_scan("/tmp/coeffs_fig3_chaotic.json", "fig3 chaotic", &ms);
    }
    if which == "j-xxz" {
        let ms = [100usize, 200, 400, 700, 1000, 1500];
        conditioned_scan("/tmp/coeffs_xxz_0.json", "xxz eps=0", &ms);
        conditioned_scan("/tmp/coeffs_xxz_0.5.json", "xxz eps=0.5", &ms);
    }
    if which == "i-xxz" {
        let ms = [20usize, 25, 30, 36, 40, 50, 60, 80, 100];
        prefix_scan("/tmp/coeffs_xxz_0.json", "xxz eps=0", &ms);
        prefix_scan("/tmp/coeffs_xxz_0.5.json", "xxz eps=0.5", &ms);
    }
    let _ = Complex64::new(0.0, 0.0);
}
