//! Problem instances and the two interpolating Hamiltonians.
//!
//! With `|b̄⟩ = |+⟩⊗|b⟩` and `A(s) = (1−s)·Z⊗I + s·X⊗A`:
//!
//! * `H(s) = A(s)² − A(s)|b̄⟩⟨b̄|A(s)` is positive semidefinite with a single
//!   zero mode that moves from `|−⟩⊗|b⟩` at `s = 0` to `|+⟩⊗|x⟩` at `s = 1`.
//! * `H′(s) = σ⁺⊗A(s)P⊥ + σ⁻⊗P⊥A(s)` with `P⊥ = I − |b̄⟩⟨b̄|` has spectrum
//!   `{0, 0, ±√γ_k}` where `γ_k` are the nonzero eigenvalues of `H(s)`.
//!
//! Both assume `‖A‖ = 1`, which [`normalize_instance`] enforces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number_of, cplx, eigh, ComplexMatrix, ComplexVector, EigenSystem, HermitianOperator,
    QuantumState, ZERO_TOL,
};
use crate::schedule::Algorithm;

/// A normalized linear system `A x = b` bound to one algorithm.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    a_raw: HermitianOperator,
    a: HermitianOperator,
    a_eigen: EigenSystem,
    b: QuantumState,
    b_bar: QuantumState,
    kappa: f64,
    kappa_overridden: bool,
    scale: f64,
    b_rescaled: bool,
    algorithm: Algorithm,
}

/// Summary of normalization that is recorded alongside results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub dim: usize,
    pub algorithm: Algorithm,
    pub kappa: f64,
    pub kappa_overridden: bool,
    pub scale: f64,
    pub b_rescaled: bool,
}

/// Rescales `A` to unit spectral norm and `b` to unit length.
///
/// The scale factor `‖A_raw‖` is kept; the normalized solution direction is
/// unchanged because `A⁻¹b ∝ A_raw⁻¹b`.
pub fn normalize_instance(
    a_raw: HermitianOperator,
    b: ComplexVector,
    algorithm: Algorithm,
) -> Result<ProblemInstance> {
    if a_raw.dim() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a_raw.dim(),
            found: b.len(),
        });
    }
    let raw_eigen = eigh(&a_raw)?;
    let kappa = condition_number_of(&raw_eigen)?;
    let scale = raw_eigen.spectral_norm();
    let a = a_raw.scale(1.0 / scale);
    let a_eigen = EigenSystem {
        values: raw_eigen.values.iter().map(|l| l / scale).collect(),
        vectors: raw_eigen.vectors,
    };
    let b_norm = b.norm();
    let b = QuantumState::normalized(b)?;
    let b_bar = embed_b(&b);
    Ok(ProblemInstance {
        a_raw,
        a,
        a_eigen,
        b,
        b_bar,
        kappa,
        kappa_overridden: false,
        scale,
        b_rescaled: (b_norm - 1.0).abs() > 1e-10,
        algorithm,
    })
}

impl ProblemInstance {
    /// Replaces the computed condition number, which drives the schedule.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if kappa.is_nan() || kappa < 1.0 {
            return Err(Error::InvalidKappa(kappa));
        }
        self.kappa = kappa;
        self.kappa_overridden = true;
        Ok(self)
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn a_raw(&self) -> &HermitianOperator {
        &self.a_raw
    }

    pub fn a(&self) -> &HermitianOperator {
        &self.a
    }

    /// Eigendecomposition of the normalized `A`.
    pub fn a_eigen(&self) -> &EigenSystem {
        &self.a_eigen
    }

    pub fn b(&self) -> &QuantumState {
        &self.b
    }

    /// `|b̄⟩ = |+⟩⊗|b⟩`
    pub fn b_bar(&self) -> &QuantumState {
        &self.b_bar
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn b_rescaled(&self) -> bool {
        self.b_rescaled
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// Dimension `N` of the linear system.
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// Dimension of the register the algorithm evolves: `2N` or `4N`.
    pub fn register_dim(&self) -> usize {
        match self.algorithm {
            Algorithm::One => 2 * self.dim(),
            Algorithm::Two => 4 * self.dim(),
        }
    }

    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            dim: self.dim(),
            algorithm: self.algorithm,
            kappa: self.kappa,
            kappa_overridden: self.kappa_overridden,
            scale: self.scale,
            b_rescaled: self.b_rescaled,
        }
    }

    /// The Hamiltonian the instance's algorithm evolves under at `s`.
    pub fn hamiltonian(&self, s: f64) -> Result<HermitianOperator> {
        match self.algorithm {
            Algorithm::One => h_of_s(s, self),
            Algorithm::Two => hprime_of_s(s, self),
        }
    }

    /// Null-space dimension of [`ProblemInstance::hamiltonian`].
    pub fn expected_nullity(&self) -> usize {
        match self.algorithm {
            Algorithm::One => 1,
            Algorithm::Two => 2,
        }
    }
}

/// `|+⟩⊗|b⟩`
pub fn embed_b(b: &QuantumState) -> QuantumState {
    QuantumState::plus().kron(b)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain {
            what: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Block form of `(1−s)·Z⊗I + s·X⊗A`: `[[(1−s)I, sA], [sA, −(1−s)I]]`.
fn a_of_s_matrix(s: f64, inst: &ProblemInstance) -> ComplexMatrix {
    let n = inst.dim();
    let a = inst.a.matrix();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = cplx(1.0 - s, 0.0);
        m[(n + i, n + i)] = cplx(s - 1.0, 0.0);
    }
    m.view_mut((0, n), (n, n)).copy_from(&a.scale(s));
    m.view_mut((n, 0), (n, n)).copy_from(&a.scale(s));
    m
}

/// `A(s) = (1−s)·Z⊗I + s·X⊗A`
pub fn a_of_s(s: f64, inst: &ProblemInstance) -> Result<HermitianOperator> {
    check_s(s)?;
    HermitianOperator::new(a_of_s_matrix(s, inst))
}

/// `H(s) = A(s)² − A(s)|b̄⟩⟨b̄|A(s)`
pub fn h_of_s(s: f64, inst: &ProblemInstance) -> Result<HermitianOperator> {
    check_s(s)?;
    let a = a_of_s_matrix(s, inst);
    let w = &a * inst.b_bar.amplitudes();
    HermitianOperator::new(&a * &a - &w * w.adjoint())
}

/// `H′(s) = σ⁺⊗A(s)P⊥ + σ⁻⊗P⊥A(s)`, with `σ⁺ = |0⟩⟨1|`.
pub fn hprime_of_s(s: f64, inst: &ProblemInstance) -> Result<HermitianOperator> {
    check_s(s)?;
    let a = a_of_s_matrix(s, inst);
    let d = a.nrows();
    let bb = inst.b_bar.amplitudes();
    let p_perp = ComplexMatrix::identity(d, d) - bb * bb.adjoint();
    let upper = &a * &p_perp;
    let lower = upper.adjoint();
    let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, d), (d, d)).copy_from(&upper);
    m.view_mut((d, 0), (d, d)).copy_from(&lower);
    HermitianOperator::new(m)
}

/// Starting state: `|−⟩⊗|b⟩`, preceded by an ancilla `|0⟩` for algorithm 2.
pub fn initial_state(inst: &ProblemInstance) -> QuantumState {
    let minus_b = QuantumState::minus().kron(&inst.b);
    match inst.algorithm {
        Algorithm::One => minus_b,
        Algorithm::Two => QuantumState::basis(2, 0).kron(&minus_b),
    }
}

/// Zero-energy eigenspace of a Hamiltonian and its distance to the rest of
/// the spectrum.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    /// Mean of the eigenvalues classified as zero.
    pub energy: f64,
    /// Orthonormal basis as columns.
    pub basis: ComplexMatrix,
    /// Smallest nonzero |eigenvalue|.
    pub gap: f64,
}

impl GroundSpace {
    pub fn nullity(&self) -> usize {
        self.basis.ncols()
    }

    /// Population `‖Π ψ‖²` of the null space.
    pub fn population(&self, psi: &ComplexVector) -> f64 {
        (self.basis.adjoint() * psi).norm_squared()
    }

    /// `tr(Π ρ)`
    pub fn population_mixed(&self, rho: &ComplexMatrix) -> f64 {
        (self.basis.adjoint() * rho * &self.basis).trace().re
    }
}

pub fn ground_space(h: &HermitianOperator, expected_nullity: usize) -> Result<GroundSpace> {
    ground_space_of(&eigh(h)?, expected_nullity)
}

/// [`ground_space`] from an already computed decomposition.
pub fn ground_space_of(eig: &EigenSystem, expected_nullity: usize) -> Result<GroundSpace> {
    let null = eig.null_indices();
    if null.len() != expected_nullity {
        return Err(Error::NullityMismatch {
            expected: expected_nullity,
            found: null.len(),
        });
    }
    let cutoff = ZERO_TOL * eig.spectral_norm();
    let gap = eig
        .values
        .iter()
        .map(|l| l.abs())
        .filter(|&l| l > cutoff)
        .fold(f64::INFINITY, f64::min);
    let columns: Vec<ComplexVector> = null.iter().map(|&k| eig.vector(k)).collect();
    let energy = null.iter().map(|&k| eig.values[k]).sum::<f64>() / null.len().max(1) as f64;
    Ok(GroundSpace {
        energy,
        basis: ComplexMatrix::from_columns(&columns),
        gap,
    })
}
