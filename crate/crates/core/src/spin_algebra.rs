//! Spin-chain operator builders on the 2^N Hilbert space.
//!
//! Sites are numbered 1..=N. In the computational basis, site 1 occupies the
//! most significant bit of the basis index and a cleared bit means spin up,
//! so `sigma_z` on a single site is diag(+1, -1). All builders return sparse
//! matrices; Pauli strings have exactly one stored entry per row.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::{CsMat, DROP_TOL};

/// Hard guard on the chain length: 2^14 = 16384 is the largest Hilbert
/// dimension whose superoperator representation still fits desk memory.
pub const MAX_SITES: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-site Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    /// Matrix element [row_bit][col_bit]; a cleared bit is spin up.
    fn element(self, row_bit: usize, col_bit: usize) -> Complex64 {
        match self {
            PauliAxis::I => {
                if row_bit == col_bit {
                    ONE
                } else {
                    ZERO
                }
            }
            PauliAxis::X => {
                if row_bit != col_bit {
                    ONE
                } else {
                    ZERO
                }
            }
            PauliAxis::Y => match (row_bit, col_bit) {
                (0, 1) => Complex64::new(0.0, -1.0),
                (1, 0) => Complex64::new(0.0, 1.0),
                _ => ZERO,
            },
            PauliAxis::Z => match row_bit {
                0 => ONE,
                _ => -ONE,
            },
        }
    }

    fn flips(self) -> bool {
        matches!(self, PauliAxis::X | PauliAxis::Y)
    }
}

/// A scaled tensor product of single-site Pauli factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub n_sites: usize,
    pub factors: Vec<PauliAxis>,
    pub coefficient: Complex64,
}

impl PauliString {
    pub fn new(n_sites: usize, coefficient: Complex64) -> Self {
        PauliString {
            n_sites,
            factors: vec![PauliAxis::I; n_sites],
            coefficient,
        }
    }

    /// Sets the factor at a 1-based site.
    pub fn with_factor(mut self, site: usize, axis: PauliAxis) -> Self {
        self.factors[site - 1] = axis;
        self
    }

    /// Sites carrying a non-identity factor (1-based).
    pub fn support(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| **f != PauliAxis::I)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.factors.iter().filter(|f| **f != PauliAxis::I).count()
    }
}

/// Basis label for a [`SpinOperator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisTag {
    FullSpace { n_sites: usize },
    /// Simultaneous eigenspace of total S^z and site reflection.
    Sector { twice_s: i32, parity: i8 },
    /// Eigenspace of total S^z only (both parities), used for open-system
    /// sector runs whose jump operators are only reflection-covariant as a
    /// set, not one by one.
    Magnetization { twice_s: i32 },
}

/// Sparse complex operator, either on the full 2^N space or on a sector.
#[derive(Debug, Clone)]
pub struct SpinOperator {
    pub dim: usize,
    pub mat: CsMat,
    pub basis: BasisTag,
}

impl SpinOperator {
    pub fn from_mat(mat: CsMat, basis: BasisTag) -> Self {
        let dim = mat.nrows();
        SpinOperator { dim, mat, basis }
    }

    pub fn zeros(dim: usize, basis: BasisTag) -> Self {
        SpinOperator {
            dim,
            mat: CsMat::zeros(dim, dim),
            basis,
        }
    }

    pub fn identity(dim: usize, basis: BasisTag) -> Self {
        SpinOperator {
            dim,
            mat: CsMat::identity(dim),
            basis,
        }
    }

    pub fn add(&self, other: &SpinOperator) -> Result<SpinOperator> {
        Ok(SpinOperator {
            dim: self.dim,
            mat: self.mat.add(&other.mat)?,
            basis: self.basis,
        })
    }

    pub fn scale(&self, s: Complex64) -> SpinOperator {
        SpinOperator {
            dim: self.dim,
            mat: self.mat.scale(s),
            basis: self.basis,
        }
    }

    pub fn adjoint(&self) -> SpinOperator {
        SpinOperator {
            dim: self.dim,
            mat: self.mat.adjoint(),
            basis: self.basis,
        }
    }

    pub fn matmul(&self, other: &SpinOperator) -> Result<SpinOperator> {
        Ok(SpinOperator {
            dim: self.dim,
            mat: self.mat.matmul(&other.mat)?,
            basis: self.basis,
        })
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.mat.hermiticity_deviation()
    }

    /// Frobenius norm under the trace-normalized inner product.
    pub fn frobenius_norm(&self) -> f64 {
        frobenius_inner(self, self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }
}

fn guard_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::TooManySites {
            n_sites,
            max_sites: MAX_SITES,
        });
    }
    Ok(())
}

fn guard_site_index(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    Ok(())
}

/// Bit of 1-based `site` in basis index `state` (site 1 is most significant).
#[inline]
fn site_bit(state: usize, site: usize, n_sites: usize) -> usize {
    (state >> (n_sites - site)) & 1
}

/// Tensor product of the per-site factors, scaled by the coefficient.
pub fn build_pauli_operator(spec: &PauliString) -> Result<SpinOperator> {
    guard_sites(spec.n_sites)?;
    if spec.factors.len() != spec.n_sites {
        return Err(Error::InvalidConfig(format!(
            "pauli string carries {} factors for {} sites",
            spec.factors.len(),
            spec.n_sites
        )));
    }
    let n = spec.n_sites;
    let dim = 1usize << n;
    let mut flip_mask = 0usize;
    for (i, f) in spec.factors.iter().enumerate() {
        if f.flips() {
            flip_mask |= 1 << (n - 1 - i);
        }
    }
    let mut triplets = Vec::with_capacity(dim);
    for r in 0..dim {
        let c = r ^ flip_mask;
        let mut v = spec.coefficient;
        for (i, f) in spec.factors.iter().enumerate() {
            let site = i + 1;
            v *= f.element(site_bit(r, site, n), site_bit(c, site, n));
        }
        if v != ZERO {
            triplets.push((r, c, v));
        }
    }
    Ok(SpinOperator::from_mat(
        CsMat::from_triplets(dim, dim, triplets, 0.0),
        BasisTag::FullSpace { n_sites: n },
    ))
}

fn single_site(n: usize, site: usize, axis: PauliAxis, coeff: Complex64) -> Result<SpinOperator> {
    guard_site_index(site, n)?;
    build_pauli_operator(&PauliString::new(n, coeff).with_factor(site, axis))
}

/// sigma^+ = (sigma^x + i sigma^y)/2 on one site.
pub fn sigma_plus(n_sites: usize, site: usize) -> Result<SpinOperator> {
    let x = single_site(n_sites, site, PauliAxis::X, Complex64::new(0.5, 0.0))?;
    let y = single_site(n_sites, site, PauliAxis::Y, Complex64::new(0.0, 0.5))?;
    x.add(&y)
}

/// sigma^- = (sigma^x - i sigma^y)/2 on one site.
pub fn sigma_minus(n_sites: usize, site: usize) -> Result<SpinOperator> {
    let x = single_site(n_sites, site, PauliAxis::X, Complex64::new(0.5, 0.0))?;
    let y = single_site(n_sites, site, PauliAxis::Y, Complex64::new(0.0, -0.5))?;
    x.add(&y)
}

/// H = -sum_j sigma^z_j sigma^z_{j+1} - g sum_j sigma^x_j - h sum_j sigma^z_j
/// on an open chain.
pub fn build_tfim_hamiltonian(n_sites: usize, g: f64, h: f64) -> Result<SpinOperator> {
    guard_sites(n_sites)?;
    let dim = 1usize << n_sites;
    let mut ham = SpinOperator::zeros(dim, BasisTag::FullSpace { n_sites });
    for j in 1..n_sites {
        let zz = build_pauli_operator(
            &PauliString::new(n_sites, -ONE)
                .with_factor(j, PauliAxis::Z)
                .with_factor(j + 1, PauliAxis::Z),
        )?;
        ham = ham.add(&zz)?;
    }
    for j in 1..=n_sites {
        if g != 0.0 {
            ham = ham.add(&single_site(n_sites, j, PauliAxis::X, Complex64::new(-g, 0.0))?)?;
        }
        if h != 0.0 {
            ham = ham.add(&single_site(n_sites, j, PauliAxis::Z, Complex64::new(-h, 0.0))?)?;
        }
    }
    Ok(ham)
}

/// XXZ chain with spin operators S^a = sigma^a / 2 and a single-site defect
/// epsilon * S^z at `defect_site`:
/// H = sum_i J (S^x_i S^x_{i+1} + S^y_i S^y_{i+1}) + J_zz S^z_i S^z_{i+1}
///     + epsilon S^z_{defect}.
pub fn build_xxz_hamiltonian(
    n_sites: usize,
    j: f64,
    j_zz: f64,
    epsilon: f64,
    defect_site: usize,
) -> Result<SpinOperator> {
    guard_sites(n_sites)?;
    if n_sites < 2 {
        return Err(Error::TooManySites {
            n_sites,
            max_sites: MAX_SITES,
        });
    }
    guard_site_index(defect_site, n_sites)?;
    let dim = 1usize << n_sites;
    let mut ham = SpinOperator::zeros(dim, BasisTag::FullSpace { n_sites });
    let quarter = Complex64::new(0.25, 0.0);
    for i in 1..n_sites {
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let coupling = match axis {
                PauliAxis::Z => j_zz,
                _ => j,
            };
            if coupling == 0.0 {
                continue;
            }
            let term = build_pauli_operator(
                &PauliString::new(n_sites, quarter * coupling)
                    .with_factor(i, axis)
                    .with_factor(i + 1, axis),
            )?;
            ham = ham.add(&term)?;
        }
    }
    if epsilon != 0.0 {
        ham = ham.add(&single_site(
            n_sites,
            defect_site,
            PauliAxis::Z,
            Complex64::new(epsilon / 2.0, 0.0),
        )?)?;
    }
    Ok(ham)
}

fn guard_coupling(name: &'static str, value: f64) -> Result<()> {
    if value < 0.0 {
        return Err(Error::NegativeCoupling { name, value });
    }
    Ok(())
}

/// Boundary amplitude damping sqrt(alpha) sigma^{+/-} at sites 1 and N plus
/// bulk dephasing sqrt(gamma) sigma^z_i on every site. Zero-coefficient
/// operators are omitted.
pub fn build_tfim_jump_operators(
    n_sites: usize,
    alpha: f64,
    gamma: f64,
) -> Result<Vec<SpinOperator>> {
    guard_sites(n_sites)?;
    guard_coupling("alpha", alpha)?;
    guard_coupling("gamma", gamma)?;
    let mut jumps = Vec::new();
    if alpha > 0.0 {
        let amp = Complex64::new(alpha.sqrt(), 0.0);
        for site in [1, n_sites] {
            jumps.push(sigma_plus(n_sites, site)?.scale(amp));
            jumps.push(sigma_minus(n_sites, site)?.scale(amp));
        }
        if n_sites == 1 {
            // Sites 1 and N coincide; keep only one boundary pair.
            jumps.truncate(2);
        }
    }
    if gamma > 0.0 {
        let amp = Complex64::new(gamma.sqrt(), 0.0);
        for site in 1..=n_sites {
            jumps.push(single_site(n_sites, site, PauliAxis::Z, amp)?);
        }
    }
    Ok(jumps)
}

/// Magnetization-preserving boundary operators
/// L_1 = sqrt(alpha) (sigma^x_1 sigma^x_2 + sigma^y_1 sigma^y_2) and its
/// mirror at the far end, plus the same bulk dephasing as the TFIM case.
pub fn build_xxz_jump_operators(
    n_sites: usize,
    alpha: f64,
    gamma: f64,
) -> Result<Vec<SpinOperator>> {
    guard_sites(n_sites)?;
    if n_sites < 3 {
        return Err(Error::InvalidConfig(format!(
            "XXZ jump operators need at least 3 sites, got {n_sites}"
        )));
    }
    guard_coupling("alpha", alpha)?;
    guard_coupling("gamma", gamma)?;
    let mut jumps = Vec::new();
    if alpha > 0.0 {
        let amp = Complex64::new(alpha.sqrt(), 0.0);
        for (a, b) in [(1, 2), (n_sites - 1, n_sites)] {
            let xx = build_pauli_operator(
                &PauliString::new(n_sites, amp)
                    .with_factor(a, PauliAxis::X)
                    .with_factor(b, PauliAxis::X),
            )?;
            let yy = build_pauli_operator(
                &PauliString::new(n_sites, amp)
                    .with_factor(a, PauliAxis::Y)
                    .with_factor(b, PauliAxis::Y),
            )?;
            jumps.push(xx.add(&yy)?);
        }
    }
    if gamma > 0.0 {
        let amp = Complex64::new(gamma.sqrt(), 0.0);
        for site in 1..=n_sites {
            jumps.push(single_site(n_sites, site, PauliAxis::Z, amp)?);
        }
    }
    Ok(jumps)
}

/// Total spin operator S = sum_i S^z_i (diagonal).
pub fn total_sz_operator(n_sites: usize) -> Result<SpinOperator> {
    guard_sites(n_sites)?;
    let dim = 1usize << n_sites;
    let triplets = (0..dim)
        .map(|r| {
            let up = n_sites - (r.count_ones() as usize);
            let twice_s = up as i64 - r.count_ones() as i64;
            (r, r, Complex64::new(twice_s as f64 / 2.0, 0.0))
        })
        .collect();
    Ok(SpinOperator::from_mat(
        CsMat::from_triplets(dim, dim, triplets, 0.0),
        BasisTag::FullSpace { n_sites },
    ))
}

/// Reflects the 1-based site order: site i <-> site N+1-i.
fn reflect_state(state: usize, n_sites: usize) -> usize {
    let mut out = 0usize;
    for i in 0..n_sites {
        if (state >> i) & 1 == 1 {
            out |= 1 << (n_sites - 1 - i);
        }
    }
    out
}

/// Site-reflection (parity) operator as a permutation matrix.
pub fn reflection_operator(n_sites: usize) -> Result<SpinOperator> {
    guard_sites(n_sites)?;
    let dim = 1usize << n_sites;
    let triplets = (0..dim)
        .map(|r| (r, reflect_state(r, n_sites), ONE))
        .collect();
    Ok(SpinOperator::from_mat(
        CsMat::from_triplets(dim, dim, triplets, 0.0),
        BasisTag::FullSpace { n_sites },
    ))
}

/// A sector basis vector as a sparse combination of computational basis
/// states; at most two states appear for reflection-symmetrized vectors.
pub type SectorVector = Vec<(usize, f64)>;

/// Orthonormal basis of a simultaneous eigenspace of total S^z (eigenvalue S)
/// and, when `parity` is set, site reflection (eigenvalue +/-1).
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub n_sites: usize,
    pub twice_s: i32,
    pub parity: Option<i8>,
    pub vectors: Vec<SectorVector>,
}

impl SectorBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    pub fn tag(&self) -> BasisTag {
        match self.parity {
            Some(p) => BasisTag::Sector {
                twice_s: self.twice_s,
                parity: p,
            },
            None => BasisTag::Magnetization {
                twice_s: self.twice_s,
            },
        }
    }
}

fn checked_twice_s(n_sites: usize, s: f64) -> Result<i32> {
    let twice = 2.0 * s;
    if (twice - twice.round()).abs() > 1e-9 {
        return Err(Error::IncompatibleSector { s, n_sites });
    }
    let twice = twice.round() as i64;
    // n_up = N/2 + S must be an integer in 0..=N.
    let twice_n_up = n_sites as i64 + twice;
    if twice_n_up % 2 != 0 || twice_n_up < 0 || twice_n_up > 2 * n_sites as i64 {
        return Err(Error::IncompatibleSector { s, n_sites });
    }
    Ok(twice as i32)
}

/// Basis of the (S, P) sector. Reflection-related pairs are combined as
/// (|s> +/- |reflected s>)/sqrt(2); self-symmetric states only enter P = +1.
pub fn build_sector_basis(n_sites: usize, s: f64, parity: i8) -> Result<SectorBasis> {
    guard_sites(n_sites)?;
    if parity != 1 && parity != -1 {
        return Err(Error::InvalidConfig(format!("parity must be +1 or -1, got {parity}")));
    }
    let twice_s = checked_twice_s(n_sites, s)?;
    let n_up = ((n_sites as i64 + twice_s as i64) / 2) as u32;
    let dim = 1usize << n_sites;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut vectors = Vec::new();
    for state in 0..dim {
        // A cleared bit is spin up.
        if n_sites as u32 - state.count_ones() != n_up {
            continue;
        }
        let mirror = reflect_state(state, n_sites);
        if mirror == state {
            if parity == 1 {
                vectors.push(vec![(state, 1.0)]);
            }
        } else if state < mirror {
            vectors.push(vec![
                (state, inv_sqrt2),
                (mirror, parity as f64 * inv_sqrt2),
            ]);
        }
    }
    Ok(SectorBasis {
        n_sites,
        twice_s,
        parity: Some(parity),
        vectors,
    })
}

/// Basis of the full magnetization sector (both parities). Ordered with all
/// P = +1 vectors first so parity block structure is visible downstream.
pub fn build_magnetization_basis(n_sites: usize, s: f64) -> Result<SectorBasis> {
    let plus = build_sector_basis(n_sites, s, 1)?;
    let minus = build_sector_basis(n_sites, s, -1)?;
    let mut vectors = plus.vectors;
    vectors.extend(minus.vectors);
    Ok(SectorBasis {
        n_sites,
        twice_s: plus.twice_s,
        parity: None,
        vectors,
    })
}

/// Number of P = +1 vectors leading a [`build_magnetization_basis`] ordering.
pub fn parity_block_size(n_sites: usize, s: f64) -> Result<usize> {
    Ok(build_sector_basis(n_sites, s, 1)?.dimension())
}

fn commutator_deviation_with_diagonal(op: &CsMat, diag: &[f64]) -> f64 {
    // [Op, D]_{rc} = Op_{rc} (D_c - D_r) for diagonal D.
    let mut dev = 0.0f64;
    for (r, c, v) in op.iter() {
        dev = dev.max((v * (diag[c] - diag[r])).norm());
    }
    dev
}

fn commutator_deviation_with_permutation(op: &CsMat, perm: &[usize]) -> f64 {
    // (Op P)_{rc} = Op_{r, perm(c)}, (P Op)_{rc} = Op_{perm(r), c} for an
    // involutive permutation P.
    let mut dev = 0.0f64;
    let n = op.nrows();
    for r in 0..n {
        let (cols, vals) = op.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            // Entry (r, perm(c)) of Op*P is v; compare against P*Op there.
            dev = dev.max((v - op.get(perm[r], perm[c])).norm());
        }
    }
    dev
}

const SYMMETRY_TOL: f64 = 1e-10;

/// Max elementwise magnitude of [op, total S^z].
pub fn total_sz_commutator_deviation(op: &SpinOperator, n_sites: usize) -> f64 {
    let dim = 1usize << n_sites;
    let diag: Vec<f64> = (0..dim)
        .map(|r| (n_sites as f64 - 2.0 * r.count_ones() as f64) / 2.0)
        .collect();
    commutator_deviation_with_diagonal(&op.mat, &diag)
}

/// Max elementwise magnitude of [op, site reflection].
pub fn reflection_commutator_deviation(op: &SpinOperator, n_sites: usize) -> f64 {
    let dim = 1usize << n_sites;
    let perm: Vec<usize> = (0..dim).map(|r| reflect_state(r, n_sites)).collect();
    commutator_deviation_with_permutation(&op.mat, &perm)
}

/// Restricts a full-space operator to a sector basis. The operator must
/// commute with total S^z, and with reflection when the basis fixes parity.
pub fn project_to_sector(op: &SpinOperator, basis: &SectorBasis) -> Result<SpinOperator> {
    let full_dim = 1usize << basis.n_sites;
    if op.dim != full_dim {
        return Err(Error::DimensionMismatch {
            left: op.dim,
            right: full_dim,
        });
    }
    let scale = op.mat.max_abs().max(1.0);
    let s_dev = total_sz_commutator_deviation(op, basis.n_sites);
    if s_dev > SYMMETRY_TOL * scale {
        return Err(Error::SymmetryViolation {
            symmetry: "total S^z",
            norm: s_dev,
        });
    }
    if basis.parity.is_some() {
        let p_dev = reflection_commutator_deviation(op, basis.n_sites);
        if p_dev > SYMMETRY_TOL * scale {
            return Err(Error::SymmetryViolation {
                symmetry: "site reflection",
                norm: p_dev,
            });
        }
    }
    let d = basis.dimension();
    // Columns of op are rows of the transpose.
    let op_t = op.mat.transpose();
    let mut triplets = Vec::new();
    for (n, vn) in basis.vectors.iter().enumerate() {
        // w = Op v_n, sparse over the states reachable from v_n.
        let mut w: Vec<(usize, Complex64)> = Vec::new();
        for &(k, amp) in vn {
            let (rows, vals) = op_t.row(k);
            for (&i, &v) in rows.iter().zip(vals) {
                w.push((i, v * amp));
            }
        }
        for (m, vm) in basis.vectors.iter().enumerate() {
            let mut acc = ZERO;
            for &(i, amp) in vm {
                for &(k, wv) in &w {
                    if k == i {
                        acc += amp * wv;
                    }
                }
            }
            if acc.norm() > DROP_TOL {
                triplets.push((m, n, acc));
            }
        }
    }
    Ok(SpinOperator::from_mat(
        CsMat::from_triplets(d, d, triplets, 0.0),
        basis.tag(),
    ))
}

/// Leakage of `op` out of the sector: norm of (1 - Pi) Op v over all basis
/// vectors v, where Pi projects onto the sector span.
pub fn sector_leakage(op: &SpinOperator, basis: &SectorBasis) -> f64 {
    let op_t = op.mat.transpose();
    let mut in_span = vec![false; op.dim];
    for v in &basis.vectors {
        for &(i, _) in v {
            in_span[i] = true;
        }
    }
    // States of the right magnetization but of the parity not in the basis
    // still count as leakage, so track exact span membership per vector
    // rather than per state when parity is fixed.
    let mut worst: f64 = 0.0;
    for vn in &basis.vectors {
        let mut w = vec![ZERO; op.dim];
        for &(k, amp) in vn {
            let (rows, vals) = op_t.row(k);
            for (&i, &v) in rows.iter().zip(vals) {
                w[i] += v * amp;
            }
        }
        // Remove components along every basis vector, then measure the rest.
        for vm in &basis.vectors {
            let overlap: Complex64 = vm.iter().map(|&(i, a)| w[i] * a).sum();
            for &(i, a) in vm {
                w[i] -= overlap * a;
            }
        }
        let leak: f64 = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(leak);
    }
    worst
}

/// Infinite-temperature inner product: trace(A^dag B) / trace(1).
pub fn frobenius_inner(a: &SpinOperator, b: &SpinOperator) -> Result<Complex64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let mut acc = ZERO;
    for r in 0..a.dim {
        let (ca, va) = a.mat.row(r);
        let (cb, vb) = b.mat.row(r);
        let (mut i, mut j) = (0, 0);
        while i < ca.len() && j < cb.len() {
            match ca[i].cmp(&cb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va[i].conj() * vb[j];
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok(acc / a.dim as f64)
}

/// Expands an operator in the Pauli-string basis: coefficients
/// c_P = trace(P^dag O) / 2^N over all 4^N strings. Zero coefficients are
/// skipped.
pub fn pauli_decompose(op: &SpinOperator, n_sites: usize, tol: f64) -> Result<Vec<PauliString>> {
    guard_sites(n_sites)?;
    let dim = 1usize << n_sites;
    if op.dim != dim {
        return Err(Error::DimensionMismatch {
            left: op.dim,
            right: dim,
        });
    }
    let mut out = Vec::new();
    let axes = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    for code in 0..(1usize << (2 * n_sites)) {
        let mut factors = Vec::with_capacity(n_sites);
        let mut flip_mask = 0usize;
        for i in 0..n_sites {
            let axis = axes[(code >> (2 * i)) & 3];
            if axis.flips() {
                flip_mask |= 1 << (n_sites - 1 - i);
            }
            factors.push(axis);
        }
        // trace(P^dag O) = sum_r conj(P[r, c_r]) O[r, c_r] with c_r = r ^ flip.
        let mut acc = ZERO;
        for r in 0..dim {
            let c = r ^ flip_mask;
            let o = op.mat.get(r, c);
            if o == ZERO {
                continue;
            }
            let mut p = ONE;
            for (i, f) in factors.iter().enumerate() {
                let site = i + 1;
                p *= f.element(site_bit(r, site, n_sites), site_bit(c, site, n_sites));
            }
            acc += p.conj() * o;
        }
        let coeff = acc / dim as f64;
        if coeff.norm() > tol {
            out.push(PauliString {
                n_sites,
                factors,
                coefficient: coeff,
            });
        }
    }
    Ok(out)
}

/// Re-sums a Pauli decomposition back into a sparse operator.
pub fn pauli_resum(strings: &[PauliString], n_sites: usize) -> Result<SpinOperator> {
    let dim = 1usize << n_sites;
    let mut acc = SpinOperator::zeros(dim, BasisTag::FullSpace { n_sites });
    for s in strings {
        acc = acc.add(&build_pauli_operator(s)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_z_single_site() {
        let op = build_pauli_operator(&PauliString::new(1, ONE).with_factor(1, PauliAxis::Z))
            .unwrap();
        assert_eq!(op.mat.get(0, 0), ONE);
        assert_eq!(op.mat.get(1, 1), -ONE);
        assert_eq!(op.mat.nnz(), 2);
    }

    #[test]
    fn pauli_z_mid_chain_traceless() {
        let op = build_pauli_operator(&PauliString::new(6, ONE).with_factor(3, PauliAxis::Z))
            .unwrap();
        assert_eq!(op.dim, 64);
        assert_eq!(op.mat.nnz(), 64);
        assert_abs_diff_eq!(op.mat.trace().norm(), 0.0, epsilon = 1e-14);
        for (r, c, v) in op.mat.iter() {
            assert_eq!(r, c);
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn xx_two_sites_antidiagonal() {
        // Explicit 4x4 tensor product: X (x) X is the antidiagonal of ones.
        let op = build_pauli_operator(
            &PauliString::new(2, ONE)
                .with_factor(1, PauliAxis::X)
                .with_factor(2, PauliAxis::X),
        )
        .unwrap();
        assert_eq!(op.mat.nnz(), 4);
        for r in 0..4 {
            assert_eq!(op.mat.get(r, 3 - r), ONE);
        }
    }

    #[test]
    fn site_out_of_range() {
        assert!(matches!(
            sigma_plus(4, 5),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(matches!(
            build_pauli_operator(&PauliString::new(15, ONE)),
            Err(Error::TooManySites { .. })
        ));
    }

    #[test]
    fn tfim_single_site_is_minus_sigma_x() {
        let h = build_tfim_hamiltonian(1, 1.0, 0.0).unwrap();
        assert_eq!(h.mat.get(0, 1), -ONE);
        assert_eq!(h.mat.get(1, 0), -ONE);
        assert_eq!(h.mat.get(0, 0), ZERO);
    }

    #[test]
    fn tfim_hermitian_traceless() {
        let h = build_tfim_hamiltonian(5, -1.05, 0.5).unwrap();
        assert!(h.hermiticity_deviation() < 1e-12);
        assert!(h.mat.trace().norm() < 1e-12);
    }

    #[test]
    fn tfim_two_site_spectrum() {
        use ndarray_linalg::Eigh;
        // Dense diagonalization oracle for the 4x4 integrable point.
        let h = build_tfim_hamiltonian(2, 1.0, 0.0).unwrap();
        let dense = h.mat.to_dense();
        let (vals, _) = dense.eigh(ndarray_linalg::UPLO::Lower).unwrap();
        let mut vals: Vec<f64> = vals.to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-5.0f64.sqrt(), -1.0, 1.0, 5.0f64.sqrt()];
        for (v, e) in vals.iter().zip(expected) {
            assert_abs_diff_eq!(v, &e, epsilon = 1e-12);
        }
    }

    #[test]
    fn xxz_symmetries() {
        let h = build_xxz_hamiltonian(5, 1.0, 1.0, 0.0, 3).unwrap();
        assert!(total_sz_commutator_deviation(&h, 5) < 1e-12);
        assert!(reflection_commutator_deviation(&h, 5) < 1e-12);
        assert!(h.hermiticity_deviation() < 1e-12);
        assert!(h.mat.trace().norm() < 1e-12);
    }

    #[test]
    fn xxz_two_site_heisenberg_spectrum() {
        use ndarray_linalg::Eigh;
        let h = build_xxz_hamiltonian(2, 1.0, 1.0, 0.0, 1).unwrap();
        let (vals, _) = h.mat.to_dense().eigh(ndarray_linalg::UPLO::Lower).unwrap();
        let mut vals: Vec<f64> = vals.to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-0.75, 0.25, 0.25, 0.25];
        for (v, e) in vals.iter().zip(expected) {
            assert_abs_diff_eq!(v, &e, epsilon = 1e-12);
        }
    }

    #[test]
    fn xxz_defect_out_of_range() {
        assert!(matches!(
            build_xxz_hamiltonian(4, 1.0, 1.0, 0.5, 9),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn tfim_jumps_counts_and_norms() {
        assert!(build_tfim_jump_operators(6, 0.0, 0.0).unwrap().is_empty());

        let boundary = build_tfim_jump_operators(6, 0.1, 0.0).unwrap();
        assert_eq!(boundary.len(), 4);
        for l in &boundary {
            // trace(L^dag L)/2^N = alpha/2 for sqrt(alpha) sigma^{+/-}.
            let norm = frobenius_inner(l, l).unwrap().re;
            assert_abs_diff_eq!(norm, 0.05, epsilon = 1e-13);
        }

        let bulk = build_tfim_jump_operators(6, 0.0, 0.01).unwrap();
        assert_eq!(bulk.len(), 6);

        assert!(matches!(
            build_tfim_jump_operators(6, -0.1, 0.0),
            Err(Error::NegativeCoupling { .. })
        ));
    }

    #[test]
    fn xxz_jumps_preserve_magnetization_and_mirror_each_other() {
        let jumps = build_xxz_jump_operators(4, 0.05, 0.0).unwrap();
        assert_eq!(jumps.len(), 2);
        for l in &jumps {
            assert!(total_sz_commutator_deviation(l, 4) < 1e-12);
        }
        // Reflection maps L_1 to L_N: the set is reflection covariant.
        let p = reflection_operator(4).unwrap();
        let reflected = p.matmul(&jumps[0]).unwrap().matmul(&p).unwrap();
        let diff = reflected.add(&jumps[1].scale(-ONE)).unwrap();
        assert!(diff.mat.max_abs() < 1e-12);
        // L_1 acts trivially on sites 3 and 4.
        for s in pauli_decompose(&jumps[0], 4, 1e-12).unwrap() {
            assert!(s.support().iter().all(|&site| site <= 2));
        }
    }

    #[test]
    fn sector_dimensions_two_sites() {
        assert_eq!(build_magnetization_basis(2, 0.0).unwrap().dimension(), 2);
        assert_eq!(build_sector_basis(2, 0.0, 1).unwrap().dimension(), 1);
        assert_eq!(build_sector_basis(2, 0.0, -1).unwrap().dimension(), 1);
        assert_eq!(build_sector_basis(2, 1.0, 1).unwrap().dimension(), 1);
        assert_eq!(build_sector_basis(2, 1.0, -1).unwrap().dimension(), 0);
        assert!(matches!(
            build_sector_basis(2, 0.5, 1),
            Err(Error::IncompatibleSector { .. })
        ));
    }

    #[test]
    fn sector_vectors_are_eigenvectors() {
        let basis = build_sector_basis(4, 1.0, -1).unwrap();
        let s_op = total_sz_operator(4).unwrap();
        let p_op = reflection_operator(4).unwrap();
        for v in &basis.vectors {
            for &(state, amp) in v {
                // S^z eigenvalue 1 on every component.
                assert_abs_diff_eq!(s_op.mat.get(state, state).re, 1.0, epsilon = 1e-14);
                // Reflection maps the component onto the paired one with -1.
                let mirror = v
                    .iter()
                    .find(|&&(m, _)| m == p_op.mat.row(state).0[0])
                    .unwrap();
                assert_abs_diff_eq!(mirror.1, -amp, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn projection_heisenberg_two_sites() {
        let h = build_xxz_hamiltonian(2, 1.0, 1.0, 0.0, 1).unwrap();
        let plus = build_sector_basis(2, 0.0, 1).unwrap();
        let minus = build_sector_basis(2, 0.0, -1).unwrap();
        let hp = project_to_sector(&h, &plus).unwrap();
        let hm = project_to_sector(&h, &minus).unwrap();
        assert_abs_diff_eq!(hp.mat.get(0, 0).re, 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(hm.mat.get(0, 0).re, -0.75, epsilon = 1e-13);
    }

    #[test]
    fn projection_rejects_symmetry_violation() {
        let sz1 = build_pauli_operator(&PauliString::new(3, ONE).with_factor(1, PauliAxis::Z))
            .unwrap();
        let basis = build_sector_basis(3, 0.5, 1).unwrap();
        match project_to_sector(&sz1, &basis) {
            Err(Error::SymmetryViolation { symmetry, .. }) => {
                assert_eq!(symmetry, "site reflection")
            }
            other => panic!("expected symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn projection_identity() {
        let basis = build_sector_basis(4, 0.0, 1).unwrap();
        let id = SpinOperator::identity(16, BasisTag::FullSpace { n_sites: 4 });
        let proj = project_to_sector(&id, &basis).unwrap();
        for m in 0..basis.dimension() {
            for n in 0..basis.dimension() {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(proj.mat.get(m, n).re, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sector_closure_leakage() {
        let h = build_xxz_hamiltonian(6, 1.0, 0.5, 0.0, 3).unwrap();
        let basis = build_sector_basis(6, 1.0, 1).unwrap();
        assert!(sector_leakage(&h, &basis) < 1e-10);
    }

    #[test]
    fn frobenius_pauli_orthonormality() {
        let z = build_pauli_operator(&PauliString::new(1, ONE).with_factor(1, PauliAxis::Z))
            .unwrap();
        let x = build_pauli_operator(&PauliString::new(1, ONE).with_factor(1, PauliAxis::X))
            .unwrap();
        assert_abs_diff_eq!(frobenius_inner(&z, &z).unwrap().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(frobenius_inner(&z, &x).unwrap().norm(), 0.0, epsilon = 1e-14);
        let z3 = build_pauli_operator(&PauliString::new(6, ONE).with_factor(3, PauliAxis::Z))
            .unwrap();
        assert_abs_diff_eq!(frobenius_inner(&z3, &z3).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn decompose_and_resum_roundtrip() {
        let h = build_tfim_hamiltonian(3, -1.05, 0.5).unwrap();
        let strings = pauli_decompose(&h, 3, 1e-13).unwrap();
        let back = pauli_resum(&strings, 3).unwrap();
        let diff = back.add(&h.scale(-ONE)).unwrap();
        assert!(diff.mat.max_abs() < 1e-12);
    }
}
