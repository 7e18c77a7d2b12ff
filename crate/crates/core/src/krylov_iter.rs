//! Krylov-space tridiagonalization of Liouville-space generators.
//!
//! For a Hermitian generator the standard Lanczos iteration produces an
//! orthonormal basis and real recurrence coefficients. Dissipation makes the
//! generator non-Hermitian, so the iteration is replaced by a two-sided
//! (bi-)Lanczos recursion that builds a pair of bases {p_n}, {q_n} that are
//! bi-orthonormal, <q_m|p_n> = delta_mn, and reduce the generator to a
//! complex tridiagonal matrix with diagonal a_n, superdiagonal b_n and real
//! non-negative subdiagonal c_n. Full two-sided re-orthogonalization is
//! applied at every step; without it the recursion loses bi-orthogonality
//! after a few tens of steps at any useful precision.

use ndarray::linalg::{general_mat_mul, general_mat_vec_mul};
use ndarray::{s, Array1, Array2, ArrayView2, ShapeBuilder};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{SuperOperator, SuperVector};
use crate::sparse::CsMat;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative breakdown threshold on the subdiagonal coefficient.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-8;

/// Default cap on basis storage.
pub const DEFAULT_MEMORY_CAP: usize = 3_500_000_000;

/// Tolerance on the Euclidean norm of the seed vector.
const SEED_NORM_TOL: f64 = 1e-10;

/// A re-orthogonalization pass is repeated when it cancelled more than half
/// of the vector norm (the classical twice-is-enough criterion).
const REORTH_REPEAT_FACTOR: f64 = 0.5;

/// When re-orthogonalization removes all but this fraction of the residual
/// norm, the residual was pure rounding noise inside the existing span and
/// the invariant subspace is exhausted. In exact arithmetic the three-term
/// recurrence leaves nothing for the projection to remove, so a genuine
/// (even tiny) new direction never triggers this.
const REORTH_COLLAPSE_TOL: f64 = 1e-6;

/// The norm removed by re-orthogonalization measures the rounding noise the
/// recurrence injects into each new direction. A coupling coefficient below
/// this multiple of the observed noise floor is indistinguishable from
/// noise, so the iteration stops there instead of amplifying it into ghost
/// directions outside the true invariant subspace.
const NOISE_FLOOR_FACTOR: f64 = 10.0;

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Subdiagonal coefficient fell below the breakdown threshold: the
    /// Krylov space is exhausted (or a serious breakdown occurred, see the
    /// diagnostics).
    Breakdown,
    /// The configured step budget ran out.
    MaxSteps,
    /// The iteration spanned the whole vector space.
    DimensionBound,
}

/// Numerical health indicators collected during the iteration.
#[derive(Debug, Clone)]
pub struct IterationDiagnostics {
    /// Norms of the final residual pair (r, s) at termination.
    pub final_residual_norms: (f64, f64),
    /// True when the pair overlap <r|s> vanished while neither residual
    /// norm did: the two Krylov spaces continue but their pairing fails.
    pub serious_breakdown: bool,
    /// Largest norm removed from a residual by re-orthogonalization; an
    /// estimate of the rounding-noise floor of the recurrence.
    pub max_reorth_correction: f64,
}

/// Tridiagonal reduction of the generator: a_n on the diagonal (length K),
/// b_n on the superdiagonal and c_n on the subdiagonal (length K - 1, with
/// c_n real and non-negative by construction).
#[derive(Debug, Clone)]
pub struct TridiagonalData {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub c: Vec<f64>,
    pub krylov_dim: usize,
    pub termination: TerminationReason,
    pub diagnostics: IterationDiagnostics,
}

impl TridiagonalData {
    /// Dense K x K tridiagonal matrix with a on the diagonal, b above and
    /// c below.
    pub fn to_dense(&self) -> Array2<Complex64> {
        let k = self.krylov_dim;
        let mut t = Array2::zeros((k, k));
        for n in 0..k {
            t[[n, n]] = self.a[n];
        }
        for n in 0..k.saturating_sub(1) {
            t[[n, n + 1]] = self.b[n];
            t[[n + 1, n]] = Complex64::new(self.c[n], 0.0);
        }
        t
    }
}

/// The bi-orthonormal basis pair, columns p_n and q_n.
#[derive(Debug, Clone)]
pub struct KrylovBases {
    pub p: Array2<Complex64>,
    pub q: Array2<Complex64>,
}

impl KrylovBases {
    /// Largest entry of Q^H P - I, computed blockwise.
    pub fn bi_orthonormality_residual(&self) -> f64 {
        let k = self.p.ncols();
        let mut worst = 0.0f64;
        let block = 256usize;
        let mut start = 0;
        while start < k {
            let end = (start + block).min(k);
            let pc = self.p.slice(s![.., start..end]).mapv(|v| v.conj());
            let mut g = Array2::zeros((k, end - start));
            general_mat_mul(ONE, &self.q.t(), &pc, ZERO, &mut g);
            for ((m, jj), v) in g.indexed_iter() {
                let expect = if m == start + jj { ONE } else { ZERO };
                worst = worst.max((v.conj() - expect).norm());
            }
            start = end;
        }
        worst
    }
}

/// Knobs shared by the iteration variants.
#[derive(Debug, Clone)]
pub struct IterationOptions {
    /// Maximum number of recursion steps (the basis holds up to
    /// max_steps + 1 vectors).
    pub max_steps: usize,
    /// Relative breakdown threshold on c_n.
    pub breakdown_tol: f64,
    /// Re-orthogonalize against all previous vectors at every step.
    pub reorth: bool,
    /// Return the bases with the result.
    pub store_bases: bool,
    /// Hard cap on basis storage in bytes.
    pub memory_cap_bytes: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            max_steps: 100_000,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
            reorth: true,
            store_bases: false,
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Hard upper bound on the Krylov dimension generated by any operator seed
/// on a d-dimensional Hilbert space: the traceless part of the operator
/// space has dimension d^2 - 1, and one extra direction can be picked up by
/// the identity component.
pub fn krylov_dimension_bound(hilbert_dim: usize) -> usize {
    hilbert_dim * hilbert_dim - hilbert_dim + 1
}

fn vec_norm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn conj_dot(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn check_seed(seed: &SuperVector, dim: usize) -> Result<Array1<Complex64>> {
    if seed.len() != dim {
        return Err(Error::DimensionMismatch {
            left: seed.len(),
            right: dim,
        });
    }
    let norm = seed.norm();
    if (norm - 1.0).abs() > SEED_NORM_TOL {
        return Err(Error::SeedNotNormalized { norm });
    }
    Ok(seed.as_array())
}

fn check_memory(dim: usize, max_cols: usize, n_bases: usize, cap: usize) -> Result<()> {
    let estimate = n_bases * max_cols * dim * std::mem::size_of::<Complex64>();
    if estimate > cap {
        return Err(Error::MemoryBudget {
            estimate_bytes: estimate,
            cap_bytes: cap,
        });
    }
    Ok(())
}

/// Overlaps h = B^H v using BLAS gemv: B^H v = conj(B^T conj(v)).
fn conj_overlaps(basis: &ArrayView2<Complex64>, v: &Array1<Complex64>) -> Array1<Complex64> {
    let vc = v.mapv(|x| x.conj());
    let mut h = Array1::zeros(basis.ncols());
    general_mat_vec_mul(ONE, &basis.t(), &vc, ZERO, &mut h);
    h.mapv_inplace(|x| x.conj());
    h
}

/// v -= B h.
fn subtract_combination(
    basis: &ArrayView2<Complex64>,
    h: &Array1<Complex64>,
    v: &mut Array1<Complex64>,
) {
    general_mat_vec_mul(-ONE, basis, h, ONE, v);
}

/// Removes from v its bi-orthogonal projection onto span(basis), measured
/// against the dual family: v -= basis * (dual^H v). The pass is repeated
/// when it cancelled most of the vector, which signals that the first pass
/// lost accuracy to rounding. Returns the norm of the first-pass correction
/// (the in-span rounding content of v).
fn dgks_project(
    basis: &ArrayView2<Complex64>,
    dual: &ArrayView2<Complex64>,
    v: &mut Array1<Complex64>,
) -> f64 {
    let mut first_correction = 0.0f64;
    for pass in 0..2 {
        let before = vec_norm(v);
        if before < 1e-300 {
            break;
        }
        let h = conj_overlaps(dual, v);
        let h_norm = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        subtract_combination(basis, &h, v);
        if pass == 0 {
            first_correction = h_norm;
        }
        if vec_norm(v) >= REORTH_REPEAT_FACTOR * before {
            break;
        }
    }
    first_correction
}

/// Bilinear variant of [`dgks_project`]: v -= basis * (dual^T v).
fn dgks_project_bilinear(
    basis: &ArrayView2<Complex64>,
    dual: &ArrayView2<Complex64>,
    v: &mut Array1<Complex64>,
) -> f64 {
    let mut first_correction = 0.0f64;
    for pass in 0..2 {
        let before = vec_norm(v);
        if before < 1e-300 {
            break;
        }
        let mut h = Array1::zeros(dual.ncols());
        general_mat_vec_mul(ONE, &dual.t(), v, ZERO, &mut h);
        let h_norm = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        subtract_combination(basis, &h, v);
        if pass == 0 {
            first_correction = h_norm;
        }
        if vec_norm(v) >= REORTH_REPEAT_FACTOR * before {
            break;
        }
    }
    first_correction
}

/// Standard Lanczos iteration for Hermitian generators: orthonormal basis,
/// real diagonal a_n, and b_n = c_n = beta_n > 0.
pub fn lanczos(
    gen: &SuperOperator,
    seed: &SuperVector,
    opts: &IterationOptions,
) -> Result<(TridiagonalData, Option<KrylovBases>)> {
    let dev = gen.mat.hermiticity_deviation();
    if dev > 1e-12 * gen.mat.max_abs().max(1.0) {
        return Err(Error::GeneratorNotHermitian);
    }
    let dim = gen.dim();
    let v0 = check_seed(seed, dim)?;
    let max_cols = (opts.max_steps + 1).min(dim);
    check_memory(dim, max_cols, 1, opts.memory_cap_bytes)?;

    let mut basis = Array2::<Complex64>::zeros((dim, max_cols).f());
    basis.column_mut(0).assign(&v0);

    let mut a: Vec<Complex64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut r = Array1::<Complex64>::zeros(dim);
    let mut cur = v0;
    let mut beta_max = 0.0f64;
    let mut noise_floor = 0.0f64;
    let mut prev: Option<Array1<Complex64>> = None;
    let mut termination = TerminationReason::MaxSteps;
    let mut final_r_norm = 0.0;

    for j in 0..max_cols {
        gen.apply_into(cur.as_slice().unwrap(), r.as_slice_mut().unwrap());
        let aj = conj_dot(&cur, &r);
        a.push(aj);
        r.zip_mut_with(&cur, |x, v| *x -= aj * v);
        if let Some(p) = &prev {
            let bj = Complex64::new(beta[j - 1], 0.0);
            r.zip_mut_with(p, |x, v| *x -= bj * v);
        }
        let before = vec_norm(&r);
        if opts.reorth {
            let span = basis.slice(s![.., ..=j]);
            noise_floor = noise_floor.max(dgks_project(&span, &span, &mut r));
        }
        let bnext = vec_norm(&r);
        final_r_norm = bnext;
        beta_max = beta_max.max(bnext);
        if bnext <= opts.breakdown_tol * beta_max.max(1.0)
            || bnext <= NOISE_FLOOR_FACTOR * noise_floor
            || (opts.reorth && bnext <= REORTH_COLLAPSE_TOL * before)
        {
            termination = TerminationReason::Breakdown;
            break;
        }
        if j + 1 == max_cols {
            termination = if max_cols == dim {
                TerminationReason::DimensionBound
            } else {
                TerminationReason::MaxSteps
            };
            break;
        }
        beta.push(bnext);
        let inv = Complex64::new(1.0 / bnext, 0.0);
        prev = Some(cur);
        cur = r.mapv(|x| x * inv);
        basis.column_mut(j + 1).assign(&cur);
    }

    let k = a.len();
    let tri = TridiagonalData {
        a,
        b: beta.iter().map(|&b| Complex64::new(b, 0.0)).collect(),
        c: beta,
        krylov_dim: k,
        termination,
        diagnostics: IterationDiagnostics {
            final_residual_norms: (final_r_norm, final_r_norm),
            serious_breakdown: false,
            max_reorth_correction: noise_floor,
        },
    };
    let bases = if opts.store_bases {
        let p = basis.slice(s![.., ..k]).to_owned();
        Some(KrylovBases { q: p.clone(), p })
    } else {
        None
    };
    Ok((tri, bases))
}

/// Two-sided Lanczos iteration for non-Hermitian generators.
///
/// Starting from p_0 = q_0 = seed, each step computes the pair overlap
/// omega_j = <r_{j-1}|s_{j-1}> of the current residuals, splits it as
/// c_j = sqrt(|omega_j|) and b_j = conj(omega_j)/c_j, normalizes
/// p_j = r_{j-1}/c_j and q_j = s_{j-1}/conj(b_j), re-orthogonalizes each new
/// vector against the opposite basis, and advances both three-term
/// recursions with r_j = L p_j - a_j p_j - b_j p_{j-1} and
/// s_j = L^dag q_j - conj(a_j) q_j - c_j q_{j-1}, where a_j = <q_j|L p_j>.
pub fn bilanczos(
    gen: &SuperOperator,
    seed: &SuperVector,
    opts: &IterationOptions,
) -> Result<(TridiagonalData, Option<KrylovBases>)> {
    let dim = gen.dim();
    let v0 = check_seed(seed, dim)?;
    let max_cols = (opts.max_steps + 1).min(dim);
    check_memory(dim, max_cols, 2, opts.memory_cap_bytes)?;
    let gen_adj = gen.adjoint();

    let mut basis_p = Array2::<Complex64>::zeros((dim, max_cols).f());
    let mut basis_q = Array2::<Complex64>::zeros((dim, max_cols).f());
    basis_p.column_mut(0).assign(&v0);
    basis_q.column_mut(0).assign(&v0);

    let mut a: Vec<Complex64> = Vec::new();
    let mut b: Vec<Complex64> = Vec::new();
    let mut c: Vec<f64> = Vec::new();

    // Residual pair; after step j they hold r_j and s_j.
    let mut r = Array1::<Complex64>::zeros(dim);
    let mut s = Array1::<Complex64>::zeros(dim);
    let mut work = Array1::<Complex64>::zeros(dim);

    // a_0 and the initial residuals.
    {
        let p0 = basis_p.column(0).to_owned();
        gen.apply_into(p0.as_slice().unwrap(), work.as_slice_mut().unwrap());
        let a0 = conj_dot(&p0, &work);
        a.push(a0);
        r.assign(&work);
        r.zip_mut_with(&p0, |x, v| *x -= a0 * v);
        gen_adj.apply_into(p0.as_slice().unwrap(), work.as_slice_mut().unwrap());
        s.assign(&work);
        let a0c = a0.conj();
        s.zip_mut_with(&p0, |x, v| *x -= a0c * v);
    }

    let mut c_max = 0.0f64;
    let mut termination = TerminationReason::MaxSteps;
    let mut serious_breakdown = false;
    let mut max_correction = 0.0f64;
    let mut final_norms = (vec_norm(&r), vec_norm(&s));

    for j in 1..max_cols + 1 {
        // Clean the residual pair against the whole history before
        // normalizing it: near Krylov exhaustion the residual is dominated
        // by components inside the existing span, and normalizing first
        // would amplify pure rounding noise.
        let before = (vec_norm(&r), vec_norm(&s));
        if opts.reorth {
            let span_p = basis_p.slice(s![.., ..j]);
            let span_q = basis_q.slice(s![.., ..j]);
            max_correction = max_correction.max(dgks_project(&span_p, &span_q, &mut r));
            max_correction = max_correction.max(dgks_project(&span_q, &span_p, &mut s));
        }
        let omega = conj_dot(&r, &s);
        let cj = omega.norm().sqrt();
        c_max = c_max.max(cj);
        final_norms = (vec_norm(&r), vec_norm(&s));
        let tol_eff = opts.breakdown_tol * c_max.max(1.0);
        if std::env::var_os("KLIND_TRACE").is_some() {
            eprintln!(
                "trace j={j} before=({:.3e},{:.3e}) after=({:.3e},{:.3e}) cj={cj:.3e} corr={max_correction:.3e}",
                before.0, before.1, final_norms.0, final_norms.1
            );
        }
        let collapsed = opts.reorth
            && (final_norms.0 <= REORTH_COLLAPSE_TOL * before.0
                || final_norms.1 <= REORTH_COLLAPSE_TOL * before.1
                || final_norms.0.min(final_norms.1)
                    <= NOISE_FLOOR_FACTOR * max_correction);
        if collapsed {
            termination = TerminationReason::Breakdown;
            break;
        }
        if cj <= tol_eff {
            termination = TerminationReason::Breakdown;
            // The pairing failed while the spaces kept growing.
            serious_breakdown = final_norms.0.min(final_norms.1) > 100.0 * tol_eff;
            break;
        }
        if j == max_cols {
            termination = if max_cols == dim {
                TerminationReason::DimensionBound
            } else {
                TerminationReason::MaxSteps
            };
            break;
        }
        let bj = omega.conj() / cj;
        let pj = r.mapv(|x| x / cj);
        // <q_j|p_j> = conj(omega) / (b_j c_j) = 1 exactly.
        let bj_conj_inv = ONE / bj.conj();
        let qj = s.mapv(|x| x * bj_conj_inv);

        if opts.reorth {
            // Cheap spot check of bi-orthogonality against the previous
            // pair; systematic drift here means the projections above are
            // no longer effective.
            let q_prev = basis_q.column(j - 1).to_owned();
            let p_prev = basis_p.column(j - 1).to_owned();
            let residual = conj_dot(&q_prev, &pj)
                .norm()
                .max(conj_dot(&qj, &p_prev).norm());
            if residual > 1e-6 {
                return Err(Error::ReorthFailure { step: j, residual });
            }
        }

        basis_p.column_mut(j).assign(&pj);
        basis_q.column_mut(j).assign(&qj);
        b.push(bj);
        c.push(cj);

        gen.apply_into(pj.as_slice().unwrap(), work.as_slice_mut().unwrap());
        let aj = conj_dot(&qj, &work);
        a.push(aj);
        r.assign(&work);
        r.zip_mut_with(&pj, |x, v| *x -= aj * v);
        {
            let p_prev = basis_p.column(j - 1);
            r.iter_mut()
                .zip(p_prev.iter())
                .for_each(|(x, v)| *x -= bj * v);
        }
        gen_adj.apply_into(qj.as_slice().unwrap(), work.as_slice_mut().unwrap());
        let ajc = aj.conj();
        s.assign(&work);
        s.zip_mut_with(&qj, |x, v| *x -= ajc * v);
        {
            let q_prev = basis_q.column(j - 1);
            let cjc = Complex64::new(cj, 0.0);
            s.iter_mut()
                .zip(q_prev.iter())
                .for_each(|(x, v)| *x -= cjc * v);
        }
    }

    let k = a.len();
    let tri = TridiagonalData {
        a,
        b,
        c,
        krylov_dim: k,
        termination,
        diagnostics: IterationDiagnostics {
            final_residual_norms: final_norms,
            serious_breakdown,
            max_reorth_correction: max_correction,
        },
    };
    let bases = if opts.store_bases {
        Some(KrylovBases {
            p: basis_p.slice(s![.., ..k]).to_owned(),
            q: basis_q.slice(s![.., ..k]).to_owned(),
        })
    } else {
        None
    };
    Ok((tri, bases))
}

/// Two-sided Lanczos in state space (Appendix-style): the left sequence is
/// built from un-conjugated row vectors, so the reduction works for a
/// general complex matrix with w_m p_n = delta_mn bilinear pairing. The
/// subdiagonal carries the residual norm and the superdiagonal the bilinear
/// overlap of the left residual with the new right vector.
pub fn bilanczos_state(
    mat: &CsMat,
    seed: &[Complex64],
    opts: &IterationOptions,
) -> Result<(TridiagonalData, Option<KrylovBases>)> {
    let dim = mat.nrows();
    if seed.len() != dim {
        return Err(Error::DimensionMismatch {
            left: seed.len(),
            right: dim,
        });
    }
    let norm = seed.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::SeedAnnihilated);
    }
    let max_cols = (opts.max_steps + 1).min(dim);
    check_memory(dim, max_cols, 2, opts.memory_cap_bytes)?;
    let mat_t = mat.transpose();

    let mut basis_p = Array2::<Complex64>::zeros((dim, max_cols).f());
    let mut basis_w = Array2::<Complex64>::zeros((dim, max_cols).f());
    let inv = Complex64::new(1.0 / norm, 0.0);
    let v0: Array1<Complex64> = Array1::from_iter(seed.iter().map(|&x| x * inv));
    basis_p.column_mut(0).assign(&v0);
    basis_w.column_mut(0).assign(&v0);

    // Bilinear pairing a . b without conjugation.
    let bilinear_dot = |a: &Array1<Complex64>, b: &Array1<Complex64>| -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    };

    let mut a: Vec<Complex64> = Vec::new();
    let mut b: Vec<Complex64> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    let mut r = Array1::<Complex64>::zeros(dim);
    let mut sw = Array1::<Complex64>::zeros(dim);
    let mut work = Array1::<Complex64>::zeros(dim);

    {
        let p0 = basis_p.column(0).to_owned();
        mat.matvec_into(p0.as_slice().unwrap(), work.as_slice_mut().unwrap());
        let a0 = bilinear_dot(&p0, &work);
        a.push(a0);
        r.assign(&work);
        r.zip_mut_with(&p0, |x, v| *x -= a0 * v);
        mat_t.matvec_into(p0.as_slice().unwrap(), work.as_slice_mut().unwrap());
        sw.assign(&work);
        sw.zip_mut_with(&p0, |x, v| *x -= a0 * v);
    }

    let mut c_max = 0.0f64;
    let mut termination = TerminationReason::MaxSteps;
    let mut serious_breakdown = false;
    let mut max_correction = 0.0f64;
    let mut final_norms = (vec_norm(&r), vec_norm(&sw));

    for j in 1..max_cols + 1 {
        let before = (vec_norm(&r), vec_norm(&sw));
        if opts.reorth {
            let span_p = basis_p.slice(s![.., ..j]);
            let span_w = basis_w.slice(s![.., ..j]);
            max_correction =
                max_correction.max(dgks_project_bilinear(&span_p, &span_w, &mut r));
            max_correction =
                max_correction.max(dgks_project_bilinear(&span_w, &span_p, &mut sw));
        }
        let cj = vec_norm(&r);
        c_max = c_max.max(cj);
        final_norms = (cj, vec_norm(&sw));
        let tol_eff = opts.breakdown_tol * c_max.max(1.0);
        let collapsed = opts.reorth
            && (final_norms.0 <= REORTH_COLLAPSE_TOL * before.0
                || final_norms.1 <= REORTH_COLLAPSE_TOL * before.1
                || final_norms.0.min(final_norms.1)
                    <= NOISE_FLOOR_FACTOR * max_correction);
        if cj <= tol_eff || collapsed {
            termination = TerminationReason::Breakdown;
            break;
        }
        if j == max_cols {
            termination = if max_cols == dim {
                TerminationReason::DimensionBound
            } else {
                TerminationReason::MaxSteps
            };
            break;
        }
        let inv_c = Complex64::new(1.0 / cj, 0.0);
        let pj = r.mapv(|x| x * inv_c);
        let bj = bilinear_dot(&sw, &pj);
        if bj.norm() <= tol_eff * final_norms.1.max(1.0) {
            // Left residual bilinearly orthogonal to the new right vector.
            termination = TerminationReason::Breakdown;
            serious_breakdown = final_norms.1 > 100.0 * tol_eff;
            break;
        }
        // w_j p_j = (sw . r) / (b_j c_j) = 1 exactly.
        let inv_b = ONE / bj;
        let wj = sw.mapv(|x| x * inv_b);

        basis_p.column_mut(j).assign(&pj);
        basis_w.column_mut(j).assign(&wj);
        b.push(bj);
        c.push(cj);

        mat.matvec_into(pj.as_slice().unwrap(), work.as_slice_mut().unwrap());
        let aj = bilinear_dot(&wj, &work);
        a.push(aj);
        r.assign(&work);
        r.zip_mut_with(&pj, |x, v| *x -= aj * v);
        {
            let p_prev = basis_p.column(j - 1);
            r.iter_mut()
                .zip(p_prev.iter())
                .for_each(|(x, v)| *x -= bj * v);
        }
        mat_t.matvec_into(wj.as_slice().unwrap(), work.as_slice_mut().unwrap());
        sw.assign(&work);
        sw.zip_mut_with(&wj, |x, v| *x -= aj * v);
        {
            let w_prev = basis_w.column(j - 1);
            let cjc = Complex64::new(cj, 0.0);
            sw.iter_mut()
                .zip(w_prev.iter())
                .for_each(|(x, v)| *x -= cjc * v);
        }
    }

    let k = a.len();
    let tri = TridiagonalData {
        a,
        b,
        c,
        krylov_dim: k,
        termination,
        diagnostics: IterationDiagnostics {
            final_residual_norms: final_norms,
            serious_breakdown,
            max_reorth_correction: max_correction,
        },
    };
    let bases = if opts.store_bases {
        Some(KrylovBases {
            p: basis_p.slice(s![.., ..k]).to_owned(),
            q: basis_w.slice(s![.., ..k]).to_owned(),
        })
    } else {
        None
    };
    Ok((tri, bases))
}

/// Hessenberg reduction from the Arnoldi iteration (orthonormal basis,
/// modified Gram-Schmidt), used as an independent cross-check of the
/// two-sided recursion on small systems.
#[derive(Debug, Clone)]
pub struct HessenbergData {
    /// (krylov_dim + 1) x krylov_dim extended Hessenberg matrix when the
    /// iteration stopped on the step budget; square on breakdown.
    pub h: Array2<Complex64>,
    pub krylov_dim: usize,
    pub termination: TerminationReason,
}

pub fn arnoldi(
    gen: &SuperOperator,
    seed: &SuperVector,
    opts: &IterationOptions,
) -> Result<(HessenbergData, Array2<Complex64>)> {
    let dim = gen.dim();
    let v0 = check_seed(seed, dim)?;
    let max_cols = (opts.max_steps + 1).min(dim);
    check_memory(dim, max_cols, 1, opts.memory_cap_bytes)?;
    let mut basis = Array2::<Complex64>::zeros((dim, max_cols).f());
    basis.column_mut(0).assign(&v0);
    let mut h = Array2::<Complex64>::zeros((max_cols + 1, max_cols));
    let mut k = max_cols;
    let mut termination = TerminationReason::MaxSteps;
    let mut w = Array1::<Complex64>::zeros(dim);
    let mut h_max = 0.0f64;
    for j in 0..max_cols {
        let vj = basis.column(j).to_owned();
        gen.apply_into(vj.as_slice().unwrap(), w.as_slice_mut().unwrap());
        for i in 0..=j {
            let vi = basis.column(i);
            let hij: Complex64 = vi.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
            h[[i, j]] = hij;
            w.iter_mut().zip(vi.iter()).for_each(|(x, v)| *x -= hij * v);
        }
        let nrm = vec_norm(&w);
        h[[j + 1, j]] = Complex64::new(nrm, 0.0);
        h_max = h_max.max(nrm);
        if nrm <= opts.breakdown_tol * h_max.max(1.0) {
            k = j + 1;
            termination = TerminationReason::Breakdown;
            break;
        }
        if j + 1 < max_cols {
            let inv = Complex64::new(1.0 / nrm, 0.0);
            basis.column_mut(j + 1).assign(&w.mapv(|x| x * inv));
        } else if max_cols == dim {
            termination = TerminationReason::DimensionBound;
        }
    }
    let hess = HessenbergData {
        h: h.slice(s![..k + 1, ..k]).to_owned(),
        krylov_dim: k,
        termination,
    };
    Ok((hess, basis.slice(s![.., ..k]).to_owned()))
}

/// Real coefficients entering the Krylov-space equation of motion:
/// the decay rates im_a_n = Im(a_n) and hopping amplitudes abs_b_n = |b_n|.
/// The subdiagonal c_n is positive by construction, but the pairing
/// <r|s> occasionally comes out negative, which flips the superdiagonal
/// partner to b_n = -c_n; the product b_n c_n is invariant under diagonal
/// rescaling, so the flip is physical and must be kept for the chain
/// evolution to reproduce the full generator.  sign_b records it.
#[derive(Debug, Clone)]
pub struct EffectiveTridiagonal {
    pub im_a: Vec<f64>,
    pub abs_b: Vec<f64>,
    pub sign_b: Vec<f64>,
}

impl EffectiveTridiagonal {
    /// All-positive couplings (the generic dissipative case).
    pub fn new(im_a: Vec<f64>, abs_b: Vec<f64>) -> EffectiveTridiagonal {
        let sign_b = vec![1.0; abs_b.len()];
        EffectiveTridiagonal {
            im_a,
            abs_b,
            sign_b,
        }
    }

    /// Signed superdiagonal coupling b_n.
    pub fn signed_b(&self, n: usize) -> f64 {
        self.sign_b[n] * self.abs_b[n]
    }
}

/// Residuals of the structural properties that the two-sided reduction of a
/// dissipative generator must satisfy.
#[derive(Debug, Clone)]
pub struct PropertyResiduals {
    /// Worst relative ||b_n| - c_n| / c_n.
    pub max_bc_mismatch: f64,
    /// Worst |Re a_n| relative to the coefficient scale.
    pub max_re_a: f64,
    /// max(|a_n|, |b_n|) used to normalize the diagonal check.
    pub scale: f64,
}

pub fn property_residuals(tri: &TridiagonalData) -> PropertyResiduals {
    let scale = tri
        .a
        .iter()
        .map(|v| v.norm())
        .chain(tri.b.iter().map(|v| v.norm()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let max_bc_mismatch = tri
        .b
        .iter()
        .zip(&tri.c)
        .map(|(b, &c)| (b.norm() - c).abs() / c.max(1e-300))
        .fold(0.0f64, f64::max);
    let max_re_a = tri.a.iter().map(|v| v.re.abs()).fold(0.0f64, f64::max) / scale;
    PropertyResiduals {
        max_bc_mismatch,
        max_re_a,
        scale,
    }
}

/// Default tolerance on the structural properties of the reduction.
pub const PROPERTY_TOL: f64 = 1e-8;

/// Extracts the real coefficients of the Krylov-space equation of motion,
/// verifying that the superdiagonal magnitudes match the subdiagonal and
/// that the diagonal is purely imaginary (both hold exactly in arithmetic
/// without rounding for a dissipative generator built from a Hermitian
/// Hamiltonian).
pub fn effective_tridiagonal(tri: &TridiagonalData, tol: f64) -> Result<EffectiveTridiagonal> {
    let res = property_residuals(tri);
    if res.max_bc_mismatch > tol {
        let index = tri
            .b
            .iter()
            .zip(&tri.c)
            .enumerate()
            .max_by(|(_, (b1, c1)), (_, (b2, c2))| {
                let r1 = (b1.norm() - *c1).abs() / c1.max(1e-300);
                let r2 = (b2.norm() - *c2).abs() / c2.max(1e-300);
                r1.partial_cmp(&r2).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::PropertyViolation {
            index,
            what: "superdiagonal magnitude differs from subdiagonal",
            residual: res.max_bc_mismatch,
        });
    }
    if res.max_re_a > tol {
        let index = tri
            .a
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.re.abs().partial_cmp(&y.re.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::PropertyViolation {
            index,
            what: "diagonal coefficient has a real part",
            residual: res.max_re_a,
        });
    }
    // A phase on b_n other than +-1 would make the chain equation complex;
    // it cannot arise from a Hermitian Hamiltonian with Hermitian-pairable
    // jumps, so treat it as corruption.
    for (n, b) in tri.b.iter().enumerate() {
        if b.im.abs() > tol * res.scale {
            return Err(Error::PropertyViolation {
                index: n,
                what: "superdiagonal coupling has an imaginary part",
                residual: b.im.abs() / res.scale,
            });
        }
    }
    Ok(EffectiveTridiagonal {
        im_a: tri.a.iter().map(|v| v.im).collect(),
        abs_b: tri.b.iter().map(|v| v.norm()).collect(),
        sign_b: tri.b.iter().map(|v| v.re.signum()).collect(),
    })
}

/// Spectral stability of the Krylov-space equation of motion. The dense
/// real generator has -Im(a_n) on the diagonal and an antisymmetric hopping
/// part on sign-positive bonds, so all its eigenvalues lie in the closed
/// left half-plane whenever every Im(a_n) >= 0 and no bond is flipped; this
/// check catches coefficient corruption.
#[derive(Debug, Clone)]
pub struct KrylovStability {
    pub max_real_part: f64,
    pub pass: bool,
}

/// Tolerance on the largest admissible eigenvalue real part.
pub const KRYLOV_STABILITY_TOL: f64 = 1e-10;

pub fn stability_check(eff: &EffectiveTridiagonal) -> Result<KrylovStability> {
    use ndarray_linalg::Eig;
    let k = eff.im_a.len();
    let mut s = Array2::<f64>::zeros((k, k));
    for n in 0..k {
        s[[n, n]] = -eff.im_a[n];
    }
    for n in 0..k.saturating_sub(1) {
        s[[n + 1, n]] = eff.abs_b[n];
        s[[n, n + 1]] = -eff.signed_b(n);
    }
    let (vals, _) = s
        .eig()
        .map_err(|e| Error::Backend(format!("eigendecomposition failed: {e}")))?;
    let max_real_part = vals.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(KrylovStability {
        max_real_part,
        pass: max_real_part <= KRYLOV_STABILITY_TOL,
    })
}

/// Writes the recurrence coefficients as CSV with `# key=value` metadata
/// lines, one row per step: n, re_a, im_a, re_b, im_b, c (couplings b_n and
/// c_n appear on the row of the vector they feed, so row 0 leaves them
/// empty).
pub fn write_coefficients_csv<W: std::io::Write>(
    tri: &TridiagonalData,
    metadata: &[(String, String)],
    mut w: W,
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "# krylov_dim={}", tri.krylov_dim)?;
    writeln!(w, "# termination={:?}", tri.termination)?;
    writeln!(w, "n,re_a,im_a,re_b,im_b,c")?;
    for n in 0..tri.krylov_dim {
        if n == 0 {
            writeln!(w, "0,{:.17e},{:.17e},,,", tri.a[0].re, tri.a[0].im)?;
        } else {
            writeln!(
                w,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                n,
                tri.a[n].re,
                tri.a[n].im,
                tri.b[n - 1].re,
                tri.b[n - 1].im,
                tri.c[n - 1]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{build_lindbladian, build_liouvillian, vectorize};
    use crate::spin_algebra::{
        build_pauli_operator, build_tfim_hamiltonian, build_tfim_jump_operators, BasisTag,
        PauliAxis, PauliString, SpinOperator,
    };
    use approx::assert_abs_diff_eq;

    fn normalized_seed(op: &SpinOperator) -> SuperVector {
        let mut v = vectorize(op);
        v.normalize().unwrap();
        v
    }

    fn pauli(n: usize, site: usize, axis: PauliAxis) -> SpinOperator {
        build_pauli_operator(&PauliString::new(n, ONE).with_factor(site, axis)).unwrap()
    }

    #[test]
    fn dimension_bound_values() {
        assert_eq!(krylov_dimension_bound(1), 1);
        assert_eq!(krylov_dimension_bound(64), 4033);
        assert_eq!(krylov_dimension_bound(256), 65281);
    }

    #[test]
    fn lanczos_single_site_x_field() {
        // H = -sigma^x, seed sigma^z: the commutator algebra closes on
        // {sigma^z, sigma^y} with a single coupling beta_1 = 2.
        let h = build_tfim_hamiltonian(1, 1.0, 0.0).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = normalized_seed(&pauli(1, 1, PauliAxis::Z));
        let (tri, _) = lanczos(&gen, &seed, &IterationOptions::default()).unwrap();
        assert_eq!(tri.krylov_dim, 2);
        assert_eq!(tri.termination, TerminationReason::Breakdown);
        assert!(tri.a.iter().all(|a| a.norm() < 1e-12));
        assert_abs_diff_eq!(tri.c[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lanczos_rejects_non_hermitian_generator() {
        let h = build_tfim_hamiltonian(1, 1.0, 0.0).unwrap();
        let jumps = build_tfim_jump_operators(1, 0.1, 0.0).unwrap();
        let gen = build_lindbladian(&h, &jumps).unwrap();
        let seed = normalized_seed(&pauli(1, 1, PauliAxis::Z));
        assert!(matches!(
            lanczos(&gen, &seed, &IterationOptions::default()),
            Err(Error::GeneratorNotHermitian)
        ));
    }

    #[test]
    fn seed_must_be_normalized() {
        let h = build_tfim_hamiltonian(1, 1.0, 0.0).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = vectorize(&pauli(1, 1, PauliAxis::Z));
        assert!(matches!(
            bilanczos(&gen, &seed, &IterationOptions::default()),
            Err(Error::SeedNotNormalized { .. })
        ));
    }

    #[test]
    fn identity_seed_terminates_immediately() {
        let h = build_tfim_hamiltonian(2, 1.0, 0.0).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let id = SpinOperator::identity(4, BasisTag::FullSpace { n_sites: 2 });
        let seed = normalized_seed(&id);
        let (tri, _) = bilanczos(&gen, &seed, &IterationOptions::default()).unwrap();
        assert_eq!(tri.krylov_dim, 1);
        assert!(tri.a[0].norm() < 1e-12);
        assert_eq!(tri.termination, TerminationReason::Breakdown);
        assert!(!tri.diagnostics.serious_breakdown);
    }

    #[test]
    fn dephasing_eigenoperator_seed() {
        // Seed sigma^x is an eigenoperator of pure dephasing: K = 1 with
        // a_0 = 2 i gamma.
        let gamma: f64 = 0.35;
        let h = SpinOperator::zeros(2, BasisTag::FullSpace { n_sites: 1 });
        let l = pauli(1, 1, PauliAxis::Z).scale(Complex64::new(gamma.sqrt(), 0.0));
        let gen = build_lindbladian(&h, &[l]).unwrap();
        let seed = normalized_seed(&pauli(1, 1, PauliAxis::X));
        let (tri, _) = bilanczos(&gen, &seed, &IterationOptions::default()).unwrap();
        assert_eq!(tri.krylov_dim, 1);
        assert_abs_diff_eq!(tri.a[0].re, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(tri.a[0].im, 2.0 * gamma, epsilon = 1e-13);
    }

    #[test]
    fn closed_system_reduces_to_lanczos() {
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = normalized_seed(&pauli(3, 2, PauliAxis::Z));
        // The reflection-even operator sector is exhausted after 33 steps;
        // a threshold looser than the rounding-noise floor keeps either
        // iteration from wandering into ghost directions there.
        let opts = IterationOptions {
            breakdown_tol: 1e-6,
            ..IterationOptions::default()
        };
        let (lz, _) = lanczos(&gen, &seed, &opts).unwrap();
        let (bl, _) = bilanczos(&gen, &seed, &opts).unwrap();
        assert_eq!(lz.krylov_dim, bl.krylov_dim);
        let max_a = bl.a.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
        assert!(max_a < 1e-8, "closed-system diagonal magnitude {max_a}");
        for (c_b, c_l) in bl.c.iter().zip(&lz.c) {
            assert!((c_b - c_l).abs() <= 1e-8 * c_l.abs());
        }
        for (b, &c) in bl.b.iter().zip(&bl.c) {
            assert!((b.norm() - c).abs() <= 1e-10 * c);
        }
    }

    #[test]
    fn bases_are_biorthonormal_and_reconstruct_generator() {
        let h = build_tfim_hamiltonian(2, -1.05, 0.5).unwrap();
        let jumps = build_tfim_jump_operators(2, 0.05, 0.02).unwrap();
        let gen = build_lindbladian(&h, &jumps).unwrap();
        let seed = normalized_seed(&pauli(2, 1, PauliAxis::Z));
        let opts = IterationOptions {
            store_bases: true,
            ..IterationOptions::default()
        };
        let (tri, bases) = bilanczos(&gen, &seed, &opts).unwrap();
        let bases = bases.unwrap();
        assert!(bases.bi_orthonormality_residual() < 1e-10);

        // T = Q^H L P reproduced entrywise, including zero off-tridiagonal.
        let k = tri.krylov_dim;
        let dense = gen.to_dense();
        let lp = dense.dot(&bases.p);
        let qc = bases.q.mapv(|v| v.conj());
        let t = qc.t().dot(&lp);
        let expect = tri.to_dense();
        for m in 0..k {
            for n in 0..k {
                assert!(
                    (t[[m, n]] - expect[[m, n]]).norm() < 1e-9,
                    "entry ({m},{n}): {} vs {}",
                    t[[m, n]],
                    expect[[m, n]]
                );
            }
        }
    }

    #[test]
    fn arnoldi_matches_bilanczos_spectrum() {
        use ndarray_linalg::Eig;
        // On a system small enough for dense checks, the Ritz values of the
        // full-dimension Arnoldi reduction must agree with the eigenvalues
        // of the two-sided reduction restricted to the same Krylov space.
        let h = build_tfim_hamiltonian(1, 1.0, 0.3).unwrap();
        let jumps = build_tfim_jump_operators(1, 0.1, 0.05).unwrap();
        let gen = build_lindbladian(&h, &jumps).unwrap();
        let seed = normalized_seed(&pauli(1, 1, PauliAxis::Z));
        let opts = IterationOptions::default();
        let (hess, _) = arnoldi(&gen, &seed, &opts).unwrap();
        let (tri, _) = bilanczos(&gen, &seed, &opts).unwrap();
        assert_eq!(hess.krylov_dim, tri.krylov_dim);
        let k = tri.krylov_dim;
        let hm = hess.h.slice(s![..k, ..k]).to_owned();
        let (mut ev_h, _) = hm.eig().unwrap();
        let (mut ev_t, _) = tri.to_dense().eig().unwrap();
        let key = |v: &Complex64| (v.re, v.im);
        ev_h.as_slice_mut()
            .unwrap()
            .sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        ev_t.as_slice_mut()
            .unwrap()
            .sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (x, y) in ev_h.iter().zip(ev_t.iter()) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn state_space_two_by_two() {
        // A = [[0, 1], [0.5, 0]] with seed e_0: one step gives residual
        // norm 1/2 below and bilinear overlap 1 above, reconstructing A
        // exactly with eigenvalues +/- sqrt(1/2).
        let a = CsMat::from_triplets(
            2,
            2,
            vec![(0, 1, ONE), (1, 0, Complex64::new(0.5, 0.0))],
            0.0,
        );
        let seed = [ONE, ZERO];
        let (tri, _) = bilanczos_state(&a, &seed, &IterationOptions::default()).unwrap();
        assert_eq!(tri.krylov_dim, 2);
        assert!(tri.a[0].norm() < 1e-14);
        assert!(tri.a[1].norm() < 1e-14);
        assert_abs_diff_eq!(tri.b[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(tri.b[0].im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(tri.c[0], 0.5, epsilon = 1e-14);
        use ndarray_linalg::Eig;
        let (ev, _) = tri.to_dense().eig().unwrap();
        let mut res: Vec<f64> = ev.iter().map(|v| v.re).collect();
        res.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_abs_diff_eq!(res[0], -(0.5f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(res[1], (0.5f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn state_space_matches_operator_space_for_hermitian() {
        // For a Hermitian matrix and a real seed the bilinear recursion
        // coincides with ordinary Lanczos: real a, b = c.
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let dim = 8;
        let mut seed = vec![ZERO; dim];
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        seed.iter_mut().for_each(|v| *v = amp);
        let (tri, bases) = bilanczos_state(
            &h.mat,
            &seed,
            &IterationOptions {
                store_bases: true,
                ..IterationOptions::default()
            },
        )
        .unwrap();
        for a in &tri.a {
            assert!(a.im.abs() < 1e-10);
        }
        for (b, &c) in tri.b.iter().zip(&tri.c) {
            assert!((b - Complex64::new(c, 0.0)).norm() < 1e-10);
        }
        // Left and right bases coincide in this limit.
        let bases = bases.unwrap();
        let diff = (&bases.p - &bases.q).iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        assert!(diff < 1e-8);
    }

    #[test]
    fn effective_coefficients_and_stability() {
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let jumps = build_tfim_jump_operators(3, 0.05, 0.05).unwrap();
        let gen = build_lindbladian(&h, &jumps).unwrap();
        // A reflection-asymmetric seed spans both parity sectors; the
        // symmetric choice hits a mid-run near-breakdown (pair overlap
        // collapse) that the plain two-sided recursion cannot traverse.
        let seed = normalized_seed(&pauli(3, 1, PauliAxis::Z));
        // Truncate well before exhaustion: past the exact Krylov dimension
        // the recursion picks up rounding-noise directions whose spurious
        // coefficients poison the (highly non-normal) eigenproblem.
        let opts = IterationOptions {
            max_steps: 40,
            breakdown_tol: 1e-6,
            ..IterationOptions::default()
        };
        let (tri, _) = bilanczos(&gen, &seed, &opts).unwrap();
        let eff = effective_tridiagonal(&tri, PROPERTY_TOL).unwrap();
        // Individual Im(a_n) may dip negative; the spectrum must still sit
        // in the closed left half-plane.
        assert!(eff.im_a.iter().any(|&x| x < 0.0));
        let stab = stability_check(&eff).unwrap();
        assert!(stab.pass, "max real part {}", stab.max_real_part);
    }

    #[test]
    fn effective_rejects_corrupted_coefficients() {
        let tri = TridiagonalData {
            a: vec![Complex64::new(0.5, 0.1), Complex64::new(0.0, 0.2)],
            b: vec![Complex64::new(1.0, 0.0)],
            c: vec![1.0],
            krylov_dim: 2,
            termination: TerminationReason::MaxSteps,
            diagnostics: IterationDiagnostics {
                final_residual_norms: (0.0, 0.0),
                serious_breakdown: false,
                max_reorth_correction: 0.0,
            },
        };
        assert!(matches!(
            effective_tridiagonal(&tri, PROPERTY_TOL),
            Err(Error::PropertyViolation { index: 0, .. })
        ));
    }

    #[test]
    fn max_steps_termination() {
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = normalized_seed(&pauli(3, 2, PauliAxis::Z));
        let opts = IterationOptions {
            max_steps: 5,
            ..IterationOptions::default()
        };
        let (tri, _) = bilanczos(&gen, &seed, &opts).unwrap();
        assert_eq!(tri.krylov_dim, 6);
        assert_eq!(tri.termination, TerminationReason::MaxSteps);
    }

    #[test]
    fn memory_budget_guard() {
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = normalized_seed(&pauli(3, 2, PauliAxis::Z));
        let opts = IterationOptions {
            memory_cap_bytes: 1024,
            ..IterationOptions::default()
        };
        assert!(matches!(
            bilanczos(&gen, &seed, &opts),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn coefficients_csv_shape() {
        let h = build_tfim_hamiltonian(1, 1.0, 0.0).unwrap();
        let gen = build_liouvillian(&h).unwrap();
        let seed = normalized_seed(&pauli(1, 1, PauliAxis::Z));
        let (tri, _) = bilanczos(&gen, &seed, &IterationOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_coefficients_csv(&tri, &[("model".into(), "tfim".into())], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# model=tfim"));
        assert!(lines.iter().any(|l| l.starts_with("n,re_a")));
        assert_eq!(
            lines.iter().filter(|l| !l.starts_with('#')).count(),
            1 + tri.krylov_dim
        );
    }
}
