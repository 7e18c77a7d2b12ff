//! Krylov-space operator dynamics.
//!
//! Once the generator has been reduced to its effective tridiagonal form,
//! the Heisenberg evolution of the seed operator collapses to a
//! one-dimensional hopping problem on the Krylov chain.  Expanding
//! O(t) = sum_n i^n phi_n(t) |p_n> and absorbing the i^n phases turns the
//! equation of motion dO/dt = i L_o O into a real linear system
//!
//! ```text
//! dphi_n/dt = |b_n| phi_{n-1} - |b_{n+1}| phi_{n+1} - Im(a_n) phi_n,
//! ```
//!
//! i.e. dPhi/dt = S Phi with S an antisymmetric hopping matrix plus the
//! (generally negative-semidefinite) diagonal -Im(a_n).  The hopping part
//! transports amplitude ballistically down the chain; the diagonal drains
//! total probability.  Three observables summarize a trajectory:
//!
//! * P(t) = sum_n |phi_n|^2, the probability of still finding the operator
//!   anywhere on the chain (identically 1 for closed systems);
//! * K_raw(t) = sum_n n |phi_n|^2, the mean position on the chain
//!   (the Krylov complexity);
//! * K_o(t) = K_raw / P, the complexity of the surviving, renormalized
//!   operator, which is the meaningful growth measure once dissipation
//!   removes weight non-uniformly along the chain.
//!
//! The integrator is an adaptive Dormand-Prince 5(4) pair.  The chain
//! generator has entries of order the local bandwidth, so the problem is
//! non-stiff at the sizes treated here and an explicit pair with tight
//! tolerances (rtol 1e-9, atol 1e-12) resolves the observables far below
//! the accuracy of the coefficients feeding it.
//!
//! A direct-evolution oracle integrates the seed under the full
//! superoperator, with no tridiagonal truncation, and projects onto the
//! two-sided Krylov bases with the matching i^{-n} phases.  On any system
//! small enough for the guard it must reproduce `evolve` to integrator
//! accuracy, which pins down every sign and phase convention above.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::krylov_iter::{EffectiveTridiagonal, KrylovBases};
use crate::liouville::{SuperOperator, SuperVector};

/// Largest superoperator dimension the direct oracle will integrate.
pub const ORACLE_MAX_DIM: usize = 1024;

/// Probability below which K_o = K_raw / P stops being meaningful.
pub const PROBABILITY_FLOOR: f64 = 1e-280;

/// Default number of grid points for experiment trajectories.
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Default trajectory horizon (coupling = 1 units).
pub const DEFAULT_T_MAX: f64 = 500.0;

/// Adaptive step-size controls for the embedded Runge-Kutta pair.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorControls {
    pub rtol: f64,
    pub atol: f64,
    /// Cap on accepted + rejected steps per grid segment.
    pub max_steps_per_segment: usize,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps_per_segment: 100_000,
        }
    }
}

/// A Krylov-chain trajectory sampled on a fixed time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t_grid: Vec<f64>,
    /// Amplitudes phi_n(t), shape (timesteps, K).
    pub phi: Array2<Complex64>,
    /// Total probability P(t).
    pub p: Vec<f64>,
    /// Unnormalized complexity K(t) = sum n |phi_n|^2.
    pub k_raw: Vec<f64>,
    /// Normalized complexity K_o(t) = K(t) / P(t).
    pub k_o: Vec<f64>,
    /// First grid index where P dropped below the underflow floor, making
    /// K_o unreliable from there onward.
    pub unreliable_from: Option<usize>,
}

impl Trajectory {
    fn from_amplitudes(t_grid: Vec<f64>, phi: Array2<Complex64>) -> Trajectory {
        let steps = phi.nrows();
        let mut p = Vec::with_capacity(steps);
        let mut k_raw = Vec::with_capacity(steps);
        let mut k_o = Vec::with_capacity(steps);
        let mut unreliable_from = None;
        for (i, row) in phi.rows().into_iter().enumerate() {
            let mut prob = 0.0;
            let mut pos = 0.0;
            for (n, v) in row.iter().enumerate() {
                let w = v.norm_sqr();
                prob += w;
                pos += n as f64 * w;
            }
            if prob < PROBABILITY_FLOOR && unreliable_from.is_none() {
                unreliable_from = Some(i);
            }
            p.push(prob);
            k_raw.push(pos);
            k_o.push(if prob > 0.0 { pos / prob } else { 0.0 });
        }
        Trajectory {
            t_grid,
            phi,
            p,
            k_raw,
            k_o,
            unreliable_from,
        }
    }

    pub fn krylov_dim(&self) -> usize {
        self.phi.ncols()
    }
}

/// Total probability series P(t).
pub fn probability(traj: &Trajectory) -> &[f64] {
    &traj.p
}

/// Unnormalized Krylov complexity series K(t).
pub fn k_complexity(traj: &Trajectory) -> &[f64] {
    &traj.k_raw
}

/// Normalized Krylov complexity series K_o(t) = K(t)/P(t).
pub fn normalized_k_complexity(traj: &Trajectory) -> &[f64] {
    &traj.k_o
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidConfig("time grid is empty".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "time grid must start at 0, got {}",
            t_grid[0]
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// The default experiment grid: linear spacing up to t = 1 so the early
/// quadratic growth is resolved, then logarithmic out to t_max where the
/// plateaus live.
pub fn default_time_grid(t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_max > 1.0 && points >= 16);
    let n_lin = points / 10;
    let n_log = points - n_lin;
    let mut grid = Vec::with_capacity(points);
    for i in 0..n_lin {
        grid.push(i as f64 / n_lin as f64);
    }
    let ratio = t_max.ln();
    for i in 0..n_log {
        grid.push((ratio * i as f64 / (n_log - 1) as f64).exp());
    }
    grid
}

/// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (row 7 of A is the FSAL property: b == a[6]).
const DP_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the 5th- and embedded 4th-order weights.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates dy/dt = f(t, y) from each grid point to the next with an
/// adaptive DP5(4) pair, recording y at every grid point.  The state is a
/// flat real vector; complex systems interleave (re, im).
fn integrate_on_grid<F>(
    mut f: F,
    y0: Vec<f64>,
    t_grid: &[f64],
    controls: &IntegratorControls,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut y = y0;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y.clone());

    let mut k = vec![vec![0.0f64; dim]; 7];
    let mut stage = vec![0.0f64; dim];
    let mut y5 = vec![0.0f64; dim];
    f(t_grid[0], &y, &mut k[0]);
    let mut fsal_valid = true;

    // Initial step guess; refined by the controller immediately.
    let mut h = (t_grid[1] - t_grid[0]).min(1e-3);

    for seg in 0..t_grid.len() - 1 {
        let t_end = t_grid[seg + 1];
        let mut t = t_grid[seg];
        let mut steps = 0usize;
        while t < t_end {
            if !fsal_valid {
                f(t, &y, &mut k[0]);
                fsal_valid = true;
            }
            let h_try = h.min(t_end - t);
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = DP_A[s][j];
                        if a != 0.0 {
                            acc += a * kj[i];
                        }
                    }
                    stage[i] = y[i] + h_try * acc;
                }
                f(t + DP_C[s] * h_try, &stage, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut acc5 = 0.0;
                let mut acce = 0.0;
                for j in 0..7 {
                    acc5 += DP_B[j] * k[j][i];
                    acce += DP_E[j] * k[j][i];
                }
                y5[i] = y[i] + h_try * acc5;
                let scale = controls.atol + controls.rtol * y[i].abs().max(y5[i].abs());
                let e = h_try * acce / scale;
                err += e * e;
            }
            err = (err / dim as f64).sqrt();

            if err <= 1.0 {
                t += h_try;
                std::mem::swap(&mut y, &mut y5);
                // FSAL: stage 7 of an accepted step is f at the new point.
                k.swap(0, 6);
            } else {
                fsal_valid = false;
            }
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_try * factor).max(f64::MIN_POSITIVE);
            steps += 1;
            if steps > controls.max_steps_per_segment || h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegratorFailure { t });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Builds the real chain generator S and integrates dPhi/dt = S Phi from
/// Phi(0) = e_0 over the grid.
pub fn evolve(
    eff: &EffectiveTridiagonal,
    t_grid: &[f64],
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    let k_dim = eff.im_a.len();
    if k_dim == 0 {
        return Err(Error::InvalidConfig("empty tridiagonal".into()));
    }
    let im_a = eff.im_a.clone();
    let abs_b = eff.abs_b.clone();
    let signed_b: Vec<f64> = (0..eff.abs_b.len()).map(|n| eff.signed_b(n)).collect();
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        for n in 0..y.len() {
            let mut v = -im_a[n] * y[n];
            if n > 0 {
                // The subdiagonal c_n is positive by construction.
                v += abs_b[n - 1] * y[n - 1];
            }
            if n + 1 < y.len() {
                v -= signed_b[n] * y[n + 1];
            }
            dy[n] = v;
        }
    };
    let mut y0 = vec![0.0f64; k_dim];
    y0[0] = 1.0;
    let states = integrate_on_grid(rhs, y0, t_grid, controls)?;

    let mut phi = Array2::zeros((t_grid.len(), k_dim));
    for (i, state) in states.iter().enumerate() {
        for (n, &v) in state.iter().enumerate() {
            phi[[i, n]] = Complex64::new(v, 0.0);
        }
    }
    Ok(Trajectory::from_amplitudes(t_grid.to_vec(), phi))
}

/// Evolves the seed under the full generator, dv/dt = i L_o v, and projects
/// onto the two-sided bases with the i^{-n} phase convention, so the result
/// is directly comparable with `evolve`.
pub fn direct_evolution_oracle(
    generator: &SuperOperator,
    seed: &SuperVector,
    bases: &KrylovBases,
    t_grid: &[f64],
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    let dim = generator.dim();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::OracleGuard {
            dim,
            max_dim: ORACLE_MAX_DIM,
        });
    }
    if seed.len() != dim || bases.q.nrows() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: seed.len().max(bases.q.nrows()),
        });
    }
    let k_dim = bases.q.ncols();

    // Real view of the complex state: y[2i] = Re v_i, y[2i+1] = Im v_i.
    let mut y0 = vec![0.0f64; 2 * dim];
    for (i, v) in seed.data.iter().enumerate() {
        y0[2 * i] = v.re;
        y0[2 * i + 1] = v.im;
    }
    let mut vbuf = vec![Complex64::new(0.0, 0.0); dim];
    let mut lbuf = vec![Complex64::new(0.0, 0.0); dim];
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        for i in 0..dim {
            vbuf[i] = Complex64::new(y[2 * i], y[2 * i + 1]);
        }
        generator.apply_into(&vbuf, &mut lbuf);
        for i in 0..dim {
            // d v / dt = i (L v)
            dy[2 * i] = -lbuf[i].im;
            dy[2 * i + 1] = lbuf[i].re;
        }
    };
    let states = integrate_on_grid(rhs, y0, t_grid, controls)?;

    // i^{-n} cycle: 1, -i, -1, i.
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let mut phi = Array2::zeros((t_grid.len(), k_dim));
    for (i, state) in states.iter().enumerate() {
        for n in 0..k_dim {
            let mut inner = Complex64::new(0.0, 0.0);
            for (r, q) in bases.q.column(n).iter().enumerate() {
                inner += q.conj() * Complex64::new(state[2 * r], state[2 * r + 1]);
            }
            phi[[i, n]] = phase[n % 4] * inner;
        }
    }
    Ok(Trajectory::from_amplitudes(t_grid.to_vec(), phi))
}

/// Time average of the series over the trailing `window_fraction` of the
/// grid, trapezoid-weighted so log-spaced grids average correctly.
pub fn saturation_value(t_grid: &[f64], series: &[f64], window_fraction: f64) -> Result<f64> {
    if t_grid.len() != series.len() {
        return Err(Error::DimensionMismatch {
            left: t_grid.len(),
            right: series.len(),
        });
    }
    if !(0.0..=1.0).contains(&window_fraction) || t_grid.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let t_end = *t_grid.last().unwrap();
    let t_start = t_end - window_fraction * (t_end - t_grid[0]);
    let first = t_grid.iter().position(|&t| t >= t_start).unwrap();
    if first + 1 >= t_grid.len() {
        return Err(Error::EmptyWindow);
    }
    let mut integral = 0.0;
    for i in first..t_grid.len() - 1 {
        integral += 0.5 * (series[i] + series[i + 1]) * (t_grid[i + 1] - t_grid[i]);
    }
    Ok(integral / (t_end - t_grid[first]))
}

/// Worst relative violation of the dissipation identity
/// dP/dt = -2 sum_n Im(a_n) |phi_n|^2, estimated by central differences on
/// interior grid points.  The scale is the largest |dP/dt| on the grid.
/// Sign-flipped bonds break the antisymmetry of the hopping part and add
/// 2 (c_n - b_n) Re(phi_{n-1} phi_n*) per bond; that term vanishes in the
/// generic all-positive case.
pub fn dissipation_identity_residual(traj: &Trajectory, eff: &EffectiveTridiagonal) -> f64 {
    let n_t = traj.t_grid.len();
    if n_t < 3 {
        return 0.0;
    }
    let mut rhs = vec![0.0f64; n_t];
    for i in 0..n_t {
        let mut v = 0.0;
        for (n, &im_a) in eff.im_a.iter().enumerate() {
            v -= 2.0 * im_a * traj.phi[[i, n]].norm_sqr();
        }
        for n in 0..eff.abs_b.len() {
            let gap = eff.abs_b[n] - eff.signed_b(n);
            if gap != 0.0 {
                v += 2.0 * gap * (traj.phi[[i, n]] * traj.phi[[i, n + 1]].conj()).re;
            }
        }
        rhs[i] = v;
    }
    let scale = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let mut worst = 0.0f64;
    for i in 1..n_t - 1 {
        // Central difference on a possibly non-uniform grid.
        let h1 = traj.t_grid[i] - traj.t_grid[i - 1];
        let h2 = traj.t_grid[i + 1] - traj.t_grid[i];
        let dp = (traj.p[i + 1] - traj.p[i]) * h1 / (h2 * (h1 + h2))
            + (traj.p[i] - traj.p[i - 1]) * h2 / (h1 * (h1 + h2));
        worst = worst.max((dp - rhs[i]).abs() / scale);
    }
    worst
}

/// Writes t, P, K_raw, K_o rows.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::new();
    out.push_str("t,p,k_raw,k_o\n");
    for i in 0..traj.t_grid.len() {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e}",
            traj.t_grid[i], traj.p[i], traj.k_raw[i], traj.k_o[i]
        )
        .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Full amplitude dump (large: timesteps x K rows), gated behind a flag at
/// the experiment layer.
pub fn write_amplitudes_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::new();
    out.push_str("t,n,re_phi,im_phi\n");
    for i in 0..traj.t_grid.len() {
        for n in 0..traj.krylov_dim() {
            let v = traj.phi[[i, n]];
            writeln!(out, "{:.17e},{},{:.17e},{:.17e}", traj.t_grid[i], n, v.re, v.im)
                .expect("string write");
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
