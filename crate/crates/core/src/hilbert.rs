//! Tensor-product Hilbert spaces over truncated bosonic modes and two-level
//! systems, with dense operator algebra.
//!
//! Basis ordering is fixed so that serialized operators are portable: the
//! subsystems are ordered (mode 0, mode 1, ..., qubit 0, qubit 1, ...) and the
//! Fock index of mode 0 varies fastest as the linear basis index increments.
//! For a qubit, index 0 is the ground state |g> and index 1 the excited
//! state |e>; `sigma_z |g> = -|g>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncated tensor-product space: a list of Fock-truncated bosonic modes
/// followed by two-level systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
    n_qubits: usize,
    total_dim: usize,
}

impl HilbertSpace {
    /// Build a space from per-mode Fock truncations and a qubit count.
    ///
    /// Every mode needs at least two Fock states; a space with no subsystems
    /// at all is rejected.
    pub fn new(mode_dims: Vec<usize>, n_qubits: usize) -> Result<Self> {
        if mode_dims.is_empty() && n_qubits == 0 {
            return Err(Error::InvalidSpace(
                "no modes and no qubits requested".into(),
            ));
        }
        if let Some(&d) = mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!(
                "mode truncation {d} < 2 is not a usable bosonic mode"
            )));
        }
        let total_dim = mode_dims.iter().product::<usize>() * (1usize << n_qubits);
        Ok(Self {
            mode_dims,
            n_qubits,
            total_dim,
        })
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of subsystem `k` in the fixed ordering (modes, then qubits).
    fn subsystem_dim(&self, k: usize) -> usize {
        if k < self.mode_dims.len() {
            self.mode_dims[k]
        } else {
            2
        }
    }

    /// Stride of subsystem `k`: subsystem 0 is fastest-varying.
    fn stride(&self, k: usize) -> usize {
        (0..k).map(|j| self.subsystem_dim(j)).product()
    }

    /// Embed a local operator acting on subsystem `k` into the full space
    /// (identity on every other factor).
    fn embed_local(&self, k: usize, local: &DMatrix<Complex64>) -> OperatorMatrix {
        let d = self.subsystem_dim(k);
        debug_assert_eq!(local.nrows(), d);
        let stride = self.stride(k);
        let outer = self.total_dim / (stride * d);
        let mut elements = DMatrix::<Complex64>::zeros(self.total_dim, self.total_dim);
        for hi in 0..outer {
            let base_hi = hi * stride * d;
            for r in 0..d {
                for c in 0..d {
                    let v = local[(r, c)];
                    if v == Complex64::ZERO {
                        continue;
                    }
                    for lo in 0..stride {
                        elements[(base_hi + stride * r + lo, base_hi + stride * c + lo)] = v;
                    }
                }
            }
        }
        OperatorMatrix {
            space: self.clone(),
            elements,
        }
    }

    /// Annihilation operator of one mode, `<n-1| a |n> = sqrt(n)`.
    pub fn annihilation_op(&self, mode: usize) -> Result<OperatorMatrix> {
        if mode >= self.n_modes() {
            return Err(Error::IndexOutOfRange {
                what: "mode",
                index: mode,
                limit: self.n_modes(),
            });
        }
        let d = self.mode_dims[mode];
        let mut local = DMatrix::<Complex64>::zeros(d, d);
        for n in 1..d {
            local[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        Ok(self.embed_local(mode, &local))
    }

    /// Creation operator of one mode.
    pub fn creation_op(&self, mode: usize) -> Result<OperatorMatrix> {
        Ok(self.annihilation_op(mode)?.adjoint())
    }

    /// Number operator `a†a` of one mode.
    pub fn number_op(&self, mode: usize) -> Result<OperatorMatrix> {
        if mode >= self.n_modes() {
            return Err(Error::IndexOutOfRange {
                what: "mode",
                index: mode,
                limit: self.n_modes(),
            });
        }
        let d = self.mode_dims[mode];
        let mut local = DMatrix::<Complex64>::zeros(d, d);
        for n in 0..d {
            local[(n, n)] = Complex64::new(n as f64, 0.0);
        }
        Ok(self.embed_local(mode, &local))
    }

    /// Quadrature `a + a†` of one mode.
    pub fn quadrature_op(&self, mode: usize) -> Result<OperatorMatrix> {
        let a = self.annihilation_op(mode)?;
        a.add(&a.adjoint())
    }

    /// Pauli or ladder operator of one qubit. `sigma_- |e> = |g>` and
    /// `sigma_± = (sigma_x ± i sigma_y) / 2`.
    pub fn pauli_op(&self, qubit: usize, axis: Pauli) -> Result<OperatorMatrix> {
        if qubit >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                what: "qubit",
                index: qubit,
                limit: self.n_qubits,
            });
        }
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::I;
        // basis (|g>, |e>)
        let local = match axis {
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, i, -i, z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[-one, z, z, one]),
            Pauli::Plus => DMatrix::from_row_slice(2, 2, &[z, z, one, z]),
            Pauli::Minus => DMatrix::from_row_slice(2, 2, &[z, one, z, z]),
        };
        Ok(self.embed_local(self.n_modes() + qubit, &local))
    }
}

/// Pauli axes and ladder variants for [`HilbertSpace::pauli_op`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Dense operator on a [`HilbertSpace`]. Immutable after construction; all
/// combinators return new values.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    elements: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(space: &HilbertSpace) -> Self {
        Self {
            space: space.clone(),
            elements: DMatrix::zeros(space.total_dim(), space.total_dim()),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        Self {
            space: space.clone(),
            elements: DMatrix::identity(space.total_dim(), space.total_dim()),
        }
    }

    /// Wrap an explicit matrix, checking its dimension against the space.
    pub fn from_elements(space: &HilbertSpace, elements: DMatrix<Complex64>) -> Result<Self> {
        if elements.nrows() != space.total_dim() || elements.ncols() != space.total_dim() {
            return Err(Error::Validation(format!(
                "matrix is {}x{} but the space has dimension {}",
                elements.nrows(),
                elements.ncols(),
                space.total_dim()
            )));
        }
        Ok(Self {
            space: space.clone(),
            elements,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            elements: self.elements.adjoint(),
        }
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let f: Complex64 = factor.into();
        Self {
            space: self.space.clone(),
            elements: &self.elements * f,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            space: self.space.clone(),
            elements: &self.elements + &other.elements,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            space: self.space.clone(),
            elements: &self.elements * &other.elements,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.space != state.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: &self.elements * &state.amplitudes,
        })
    }

    /// `<state| self |state>`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        state.inner(&self.apply(state)?)
    }

    /// Largest element-wise deviation from `self = self†`.
    pub fn max_deviation_from_hermitian(&self) -> f64 {
        let n = self.elements.nrows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_deviation_from_hermitian() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.elements.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.elements.norm()
    }
}

/// Pure state on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Computational basis state with the given linear index.
    pub fn basis(space: &HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return Err(Error::IndexOutOfRange {
                what: "basis state",
                index,
                limit: space.total_dim(),
            });
        }
        let mut amplitudes = DVector::zeros(space.total_dim());
        amplitudes[index] = Complex64::ONE;
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn from_amplitudes(space: &HilbertSpace, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::Validation(format!(
                "amplitude vector has length {} but the space has dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Rescale to unit norm; the zero vector cannot be normalized.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        self.amplitudes /= Complex64::new(n, 0.0);
        Ok(self)
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}
