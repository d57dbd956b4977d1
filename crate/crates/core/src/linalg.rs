//! Dense complex linear algebra for small (≤ 32-dimensional) quantum systems.
//!
//! Everything spectral goes through [`eigh`]: the matrix exponential,
//! condition number, spectral norm and null spaces are all read off one
//! eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Eigenvalues with magnitude at most `ZERO_TOL · ‖H‖` count as zero.
pub const ZERO_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;
const MAX_EIGEN_SWEEPS: usize = 10_000;

pub(crate) fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A square complex matrix certified equal to its conjugate transpose.
///
/// Construction checks `max |M − M†| ≤ 1e-12 · (1 + max |M|)` and then
/// stores the exactly Hermitian part `(M + M†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let adjoint = m.adjoint();
        let deviation = max_abs(&(&m - &adjoint));
        if deviation > HERMITIAN_TOL * (1.0 + max_abs(&m)) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator((m + adjoint).scale(0.5)))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator(ComplexMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = ComplexVector::from_iterator(diag.len(), diag.iter().map(|&x| cplx(x, 0.0)));
        HermitianOperator(ComplexMatrix::from_diagonal(&d))
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(psi: &QuantumState) -> Self {
        let v = psi.amplitudes();
        HermitianOperator(v * v.adjoint())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianOperator(self.0.scale(factor))
    }

    /// Real linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        HermitianOperator(self.0.scale(a) + other.0.scale(b))
    }

    pub fn kron(&self, other: &Self) -> Self {
        HermitianOperator(kron(&self.0, &other.0))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn apply(&self, psi: &ComplexVector) -> ComplexVector {
        &self.0 * psi
    }
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// Indices of eigenvalues that are zero under the global threshold.
    pub fn null_indices(&self) -> Vec<usize> {
        let cutoff = ZERO_TOL * self.spectral_norm();
        (0..self.dim())
            .filter(|&k| self.values[k].abs() <= cutoff)
            .collect()
    }

    /// `V · diag(f(λ)) · V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let w = f(l);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-iHt}` from the stored decomposition.
    pub fn evolution(&self, t: f64) -> ComplexMatrix {
        self.map_spectrum(|l| Complex64::from_polar(1.0, -l * t))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| cplx(l, 0.0))
    }
}

/// Rotates `v` so its first component of magnitude above `1e-10` is real
/// and positive.
fn fix_phase_first(v: &mut ComplexVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let rot = z.conj() / z.norm();
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}

fn first_nonzero(v: &ComplexVector) -> usize {
    v.iter().position(|z| z.norm() > 1e-10).unwrap_or(v.len())
}

/// Hermitian eigendecomposition with deterministic output.
///
/// Eigenvalues are ascending. Each eigenvector has its first nonzero
/// component rotated to the positive real axis; eigenvalues that tie to
/// within `1e-12 · (1 + ‖H‖)` are ordered by the index of that component.
pub fn eigh(h: &HermitianOperator) -> Result<EigenSystem> {
    let dim = h.dim();
    if dim == 0 {
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, MAX_EIGEN_SWEEPS).ok_or(
        Error::EigenConvergence {
            dim,
            max_iter: MAX_EIGEN_SWEEPS,
        },
    )?;
    let mut pairs: Vec<(f64, ComplexVector)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, col)| {
            let mut v = col.into_owned();
            fix_phase_first(&mut v);
            (l, v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let norm = pairs.iter().fold(0.0f64, |acc, p| acc.max(p.0.abs()));
    let tie = 1e-12 * (1.0 + norm);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= tie {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| first_nonzero(&p.1));
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let columns: Vec<ComplexVector> = pairs.into_iter().map(|p| p.1).collect();
    Ok(EigenSystem {
        values,
        vectors: ComplexMatrix::from_columns(&columns),
    })
}

/// Standard Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `e^{-iHt} = V · diag(e^{-iλt}) · V†`
pub fn expm_unitary(h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    Ok(eigh(h)?.evolution(t))
}

pub fn spectral_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(eigh(h)?.spectral_norm())
}

/// `κ = max|λ| / min|λ|`, failing when the smallest magnitude is below
/// `ZERO_TOL` relative to the spectral norm.
pub fn condition_number(h: &HermitianOperator) -> Result<f64> {
    condition_number_of(&eigh(h)?)
}

pub(crate) fn condition_number_of(eig: &EigenSystem) -> Result<f64> {
    let norm = eig.spectral_norm();
    let min_abs = eig
        .values
        .iter()
        .fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
    if eig.dim() == 0 || norm == 0.0 || min_abs <= ZERO_TOL * norm {
        return Err(Error::Singular { min_abs, norm });
    }
    Ok(norm / min_abs)
}

/// A unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(ComplexVector);

impl QuantumState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(QuantumState(amplitudes))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(QuantumState(v.unscale(norm)))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(ComplexVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| cplx(x, 0.0)),
        ))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[k] = cplx(1.0, 0.0);
        QuantumState(v)
    }

    /// `|+⟩ = (|0⟩ + |1⟩)/√2`
    pub fn plus() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState(ComplexVector::from_vec(vec![cplx(a, 0.0), cplx(a, 0.0)]))
    }

    /// `|−⟩ = (|0⟩ − |1⟩)/√2`
    pub fn minus() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState(ComplexVector::from_vec(vec![cplx(a, 0.0), cplx(-a, 0.0)]))
    }

    /// Wraps amplitudes already known to be normalized (e.g. a unitary image).
    pub(crate) fn from_unitary_image(v: ComplexVector) -> Self {
        QuantumState(v)
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.0
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn kron(&self, other: &QuantumState) -> QuantumState {
        QuantumState(self.0.kronecker(&other.0))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(HermitianOperator::projector(self))
    }
}

/// A unit-trace positive semidefinite Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    /// Certifies trace 1 and eigenvalues ≥ −1e-10.
    pub fn new(h: HermitianOperator) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let min = eigh(&h)?.values.first().copied().unwrap_or(0.0);
        if min < -NORM_TOL {
            return Err(Error::NotDensity(format!("eigenvalue {min:e} is negative")));
        }
        Ok(DensityMatrix(h))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    pub(crate) fn from_hermitian_unchecked(h: HermitianOperator) -> Self {
        DensityMatrix(h)
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn expectation_in(&self, psi: &QuantumState) -> f64 {
        psi.amplitudes()
            .dotc(&(self.matrix() * psi.amplitudes()))
            .re
    }
}

/// Reduced density matrix over the subsystems listed in `keep`
/// (0-based indices into `dims`, most significant subsystem first).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: total,
        });
    }
    let mut keep_mask = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: k + 1,
            });
        }
        keep_mask[k] = true;
    }
    let kept_dim: usize = dims
        .iter()
        .zip(&keep_mask)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();

    // Split a full index into (kept index, traced index).
    let split = |mut idx: usize| -> (usize, usize) {
        let (mut kept, mut traced) = (0, 0);
        let (mut kept_stride, mut traced_stride) = (1, 1);
        for (d, &k) in dims.iter().zip(&keep_mask).rev() {
            let digit = idx % d;
            idx /= d;
            if k {
                kept += digit * kept_stride;
                kept_stride *= d;
            } else {
                traced += digit * traced_stride;
                traced_stride *= d;
            }
        }
        (kept, traced)
    };
    let parts: Vec<(usize, usize)> = (0..total).map(split).collect();

    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (r, &(kr, tr)) in parts.iter().enumerate() {
        for (c, &(kc, tc)) in parts.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += m[(r, c)];
            }
        }
    }
    Ok(DensityMatrix(HermitianOperator::new(out)?))
}

/// Applies `P` to `ψ` and renormalizes, returning the outcome probability
/// `‖Pψ‖²`.
pub fn project_postselect(
    psi: &QuantumState,
    projector: &HermitianOperator,
) -> Result<(QuantumState, f64)> {
    if projector.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: projector.dim(),
        });
    }
    let p = projector.matrix();
    let deviation = max_abs(&(p * p - p));
    if deviation > NORM_TOL {
        return Err(Error::NotIdempotent { deviation });
    }
    let projected = p * psi.amplitudes();
    let probability = projected.norm_squared();
    if probability < 1e-14 {
        return Err(Error::ZeroProbability { probability });
    }
    Ok((
        QuantumState(projected.unscale(probability.sqrt())),
        probability.min(1.0),
    ))
}
