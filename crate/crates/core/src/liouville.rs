//! Vectorized (Liouville-space) representation of operator dynamics.
//!
//! Operators on a d-dimensional Hilbert space become supervectors of length
//! d^2 by column stacking, vec(A X B) = (B^T (x) A) vec(X). Heisenberg-picture
//! evolution of an observable O is generated by the adjoint master-equation
//! superoperator
//!
//!   L_o[O] = [H, O] - i sum_k ( L_k^dag O L_k - (1/2){L_k^dag L_k, O} ),
//!
//! so that O(t) = exp(i L_o t) O. For empty jump sets L_o is Hermitian in
//! the trace inner product; dissipation makes it genuinely non-Hermitian.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CsMat;
use crate::spin_algebra::SpinOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on the Hermiticity of the Hamiltonian fed to the builders,
/// relative to its largest entry.
const HERMITICITY_TOL: f64 = 1e-12;

/// A vectorized operator: element (i, j) of the d x d matrix sits at
/// component i + d*j.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperVector {
    pub hilbert_dim: usize,
    pub data: Vec<Complex64>,
}

impl SuperVector {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean inner product <self|other> with conjugation on `self`.
    pub fn dot(&self, other: &SuperVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Rescales to unit Euclidean norm; errors if the vector is numerically
    /// zero.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::SeedAnnihilated);
        }
        let inv = Complex64::new(1.0 / n, 0.0);
        self.scale(inv);
        Ok(n)
    }

    pub fn as_array(&self) -> Array1<Complex64> {
        Array1::from_vec(self.data.clone())
    }
}

/// Column-stacks a sparse operator into a supervector.
pub fn vectorize(op: &SpinOperator) -> SuperVector {
    let d = op.dim;
    let mut data = vec![ZERO; d * d];
    for (i, j, v) in op.mat.iter() {
        data[i + d * j] = v;
    }
    SuperVector {
        hilbert_dim: d,
        data,
    }
}

/// Inverse of [`vectorize`]; the length must be a perfect square.
pub fn devectorize(vec: &SuperVector) -> Result<CsMat> {
    let len = vec.len();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len {
        return Err(Error::NotPerfectSquare { len });
    }
    let mut triplets = Vec::new();
    for j in 0..d {
        for i in 0..d {
            let v = vec.data[i + d * j];
            if v != ZERO {
                triplets.push((i, j, v));
            }
        }
    }
    Ok(CsMat::from_triplets(d, d, triplets, 0.0))
}

/// Sparse superoperator acting on supervectors.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    /// Hilbert-space dimension d; the matrix is d^2 x d^2.
    pub hilbert_dim: usize,
    pub mat: CsMat,
    /// True when built without jump operators (commutator part only).
    pub hermitian: bool,
}

impl SuperOperator {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &SuperVector) -> Result<SuperVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: v.len(),
                right: self.dim(),
            });
        }
        Ok(SuperVector {
            hilbert_dim: v.hilbert_dim,
            data: self.mat.matvec(&v.data),
        })
    }

    /// In-place matrix-vector product on raw slices (hot path for the
    /// Krylov iteration).
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.mat.matvec_into(v, out);
    }

    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            hilbert_dim: self.hilbert_dim,
            mat: self.mat.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.mat.to_dense()
    }
}

fn check_hermitian(h: &SpinOperator) -> Result<()> {
    let dev = h.hermiticity_deviation();
    let scale = h.mat.max_abs().max(1.0);
    if dev > HERMITICITY_TOL * scale {
        return Err(Error::NonHermitian { deviation: dev });
    }
    Ok(())
}

/// Commutator superoperator [H, .] = I (x) H - H^T (x) I.
pub fn build_liouvillian(h: &SpinOperator) -> Result<SuperOperator> {
    check_hermitian(h)?;
    let d = h.dim;
    let id = CsMat::identity(d);
    let left = id.kron(&h.mat);
    let right = h.mat.transpose().kron(&id);
    let mat = left.add(&right.scale(Complex64::new(-1.0, 0.0)))?;
    Ok(SuperOperator {
        hilbert_dim: d,
        mat,
        hermitian: true,
    })
}

/// Adjoint-equation generator: the commutator part of [`build_liouvillian`]
/// plus -i sum_k [ L_k^T (x) L_k^dag - (1/2)( I (x) M_k + M_k^T (x) I ) ]
/// with M_k = L_k^dag L_k.
pub fn build_lindbladian(h: &SpinOperator, jumps: &[SpinOperator]) -> Result<SuperOperator> {
    let base = build_liouvillian(h)?;
    if jumps.is_empty() {
        return Ok(base);
    }
    let d = h.dim;
    let id = CsMat::identity(d);
    let mut mat = base.mat;
    let minus_i = Complex64::new(0.0, -1.0);
    let half_i = Complex64::new(0.0, 0.5);
    for l in jumps {
        if l.dim != d {
            return Err(Error::DimensionMismatch {
                left: l.dim,
                right: d,
            });
        }
        let l_adj = l.mat.adjoint();
        let sandwich = l.mat.transpose().kron(&l_adj);
        mat = mat.add(&sandwich.scale(minus_i))?;
        let m = l_adj.matmul(&l.mat)?;
        mat = mat.add(&id.kron(&m).scale(half_i))?;
        mat = mat.add(&m.transpose().kron(&id).scale(half_i))?;
    }
    Ok(SuperOperator {
        hilbert_dim: d,
        mat,
        hermitian: false,
    })
}

/// Outcome of the dense spectrum check on i L_o.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Largest real part among the eigenvalues of i L_o.
    pub max_real_part: f64,
    /// True when the spectrum is symmetric under complex conjugation.
    pub conjugate_pairs: bool,
    pub eigenvalues: Vec<Complex64>,
    pub pass: bool,
}

/// Tolerance on the largest admissible real part of spec(i L_o).
pub const STABILITY_TOL: f64 = 1e-10;

/// Largest superoperator dimension admitted to the dense spectrum check.
pub const SPECTRUM_MAX_DIM: usize = 4096;

/// Dense eigendecomposition of i L_o. Physical generators have all
/// eigenvalues in the closed left half-plane (decaying modes) and a spectrum
/// symmetric under conjugation.
pub fn generator_spectrum_check(gen: &SuperOperator) -> Result<StabilityReport> {
    use ndarray_linalg::Eig;
    let n = gen.dim();
    if n > SPECTRUM_MAX_DIM {
        return Err(Error::SpectrumGuard {
            dim: n,
            max_dim: SPECTRUM_MAX_DIM,
        });
    }
    let mut dense = gen.to_dense();
    dense.mapv_inplace(|v| Complex64::new(0.0, 1.0) * v);
    let (vals, _) = dense
        .eig()
        .map_err(|e| Error::Backend(format!("eigendecomposition failed: {e}")))?;
    let eigenvalues: Vec<Complex64> = vals.to_vec();
    let max_real_part = eigenvalues
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    // Pair each eigenvalue with a conjugate partner.
    let scale = eigenvalues
        .iter()
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    let tol = 1e-8 * scale;
    let conjugate_pairs = eigenvalues.iter().all(|v| {
        eigenvalues
            .iter()
            .any(|w| (w - v.conj()).norm() <= tol)
    });
    Ok(StabilityReport {
        max_real_part,
        conjugate_pairs,
        pass: max_real_part <= STABILITY_TOL,
        eigenvalues,
    })
}

/// Writes the superoperator as `row col re im` triplet lines.
pub fn export_triplets<W: std::io::Write>(gen: &SuperOperator, mut w: W) -> Result<()> {
    writeln!(w, "# dim {} hilbert_dim {}", gen.dim(), gen.hilbert_dim)?;
    for (r, c, v) in gen.mat.iter() {
        writeln!(w, "{} {} {:.17e} {:.17e}", r, c, v.re, v.im)?;
    }
    Ok(())
}
