//! Dressed positive- and negative-frequency operators in the eigenbasis.
//!
//! For a Hermitian system operator O and eigenstates |E_k> (ascending), the
//! positive-frequency part keeps only energy-lowering transitions,
//!
//! ```text
//! x⁺ = Σ_j Σ_{E_k < E_j} x_{kj} |E_k><E_j|,
//! x_{kj} = sqrt(χ(ω_{j,k})) <E_k| O |E_j>,   ω_{j,k} = E_j - E_k,
//! ```
//!
//! with χ(ω) = 2π g²(ω) ρ(ω) the detector response. Transitions inside a
//! degenerate cluster (|E_j - E_k| ≤ degeneracy tolerance) belong to neither
//! frequency part and are excluded, so applying x⁺ to the ground state gives
//! the zero vector by construction: a detector coupled through O sees
//! nothing in the ground state, however strongly the system is hybridized.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::spectrum::EigenSystem;

/// Detector response χ(ω) = 2π g²(ω) ρ(ω) as a named model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorResponse {
    /// Frequency-independent response χ(ω) = chi0.
    Flat { chi0: f64 },
    /// χ(ω) = chi0 · ω / omega_ref.
    Ohmic { chi0: f64, omega_ref: f64 },
    /// Piecewise-linear interpolation of (ω_i, χ_i) samples; evaluation
    /// outside the tabulated range is an error rather than an extrapolation.
    Tabulated { points: Vec<(f64, f64)> },
}

impl DetectorResponse {
    pub fn flat(chi0: f64) -> Result<Self> {
        if !chi0.is_finite() || chi0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "chi0 must be non-negative, got {chi0}"
            )));
        }
        Ok(Self::Flat { chi0 })
    }

    pub fn ohmic(chi0: f64, omega_ref: f64) -> Result<Self> {
        if !chi0.is_finite() || chi0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "chi0 must be non-negative, got {chi0}"
            )));
        }
        if !omega_ref.is_finite() || omega_ref <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_ref must be positive, got {omega_ref}"
            )));
        }
        Ok(Self::Ohmic { chi0, omega_ref })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "a tabulated response needs at least two points".into(),
            ));
        }
        if let Some((omega, chi)) = points
            .iter()
            .find(|(omega, chi)| !omega.is_finite() || !chi.is_finite() || *chi < 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "invalid table entry (omega = {omega}, chi = {chi})"
            )));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "tabulated frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self::Tabulated { points })
    }

    /// χ(ω) at a transition frequency ω > 0.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        match self {
            Self::Flat { chi0 } => Ok(*chi0),
            Self::Ohmic { chi0, omega_ref } => Ok(chi0 * omega / omega_ref),
            Self::Tabulated { points } => {
                let lo = points.first().unwrap().0;
                let hi = points.last().unwrap().0;
                if omega < lo || omega > hi {
                    return Err(Error::ResponseOutOfRange { omega, lo, hi });
                }
                let j = points.partition_point(|&(w, _)| w <= omega).min(points.len() - 1);
                let (w0, c0) = points[j - 1];
                let (w1, c1) = points[j];
                Ok(c0 + (c1 - c0) * (omega - w0) / (w1 - w0))
            }
        }
    }

    /// Short human-readable descriptor for report provenance.
    pub fn describe(&self) -> String {
        match self {
            Self::Flat { chi0 } => format!("flat(chi0={chi0})"),
            Self::Ohmic { chi0, omega_ref } => format!("ohmic(chi0={chi0}, omega_ref={omega_ref})"),
            Self::Tabulated { points } => format!("tabulated({} points)", points.len()),
        }
    }
}

/// How the transition matrix elements are weighted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Weighting {
    /// sqrt(χ(ω)) per transition.
    Response(DetectorResponse),
    /// No weight (χ ≡ 1); multiply rates by χ externally for a wide-band
    /// detector.
    Unweighted,
    /// i·ω per transition: the electric-field operator derived from a vector
    /// potential in velocity-form dipole coupling.
    TransitionFrequency,
}

impl Weighting {
    pub fn describe(&self) -> String {
        match self {
            Self::Response(r) => r.describe(),
            Self::Unweighted => "unweighted".into(),
            Self::TransitionFrequency => "transition-frequency".into(),
        }
    }
}

/// Which frequency component a [`DressedOperator`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyPart {
    /// Energy-lowering transitions only (annihilation-like).
    Positive,
    /// Energy-raising transitions only (the adjoint).
    Negative,
}

/// A frequency component of a system operator, expressed in the eigenbasis
/// of the interacting Hamiltonian.
#[derive(Clone, Debug)]
pub struct DressedOperator {
    eigen: Arc<EigenSystem>,
    matrix: DMatrix<Complex64>,
    weighting: Weighting,
    part: FrequencyPart,
}

fn per_transition<F>(es: &EigenSystem, op_eigen: &DMatrix<Complex64>, weight: F) -> Result<DMatrix<Complex64>>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let dim = es.dim();
    let tol = es.degeneracy_tol();
    let energies = es.energies();
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            let omega = energies[j] - energies[k]; // transition j -> k lowers by omega
            if omega > tol {
                out[(k, j)] = weight(omega)? * op_eigen[(k, j)];
            }
        }
    }
    Ok(out)
}

fn validate_hermitian(op: &OperatorMatrix) -> Result<()> {
    let dev = op.max_deviation_from_hermitian();
    if dev > 1e-12 * op.max_abs().max(1.0) {
        return Err(Error::NonHermitian { max_dev: dev });
    }
    Ok(())
}

/// Positive-frequency component of `op`, weighted per transition by
/// `sqrt(χ(ω))`. `op` must be Hermitian (the split O = O⁺ + O⁻ presumes it).
pub fn positive_frequency_op(
    es: &Arc<EigenSystem>,
    op: &OperatorMatrix,
    response: &DetectorResponse,
) -> Result<DressedOperator> {
    validate_hermitian(op)?;
    let op_eigen = es.to_eigenbasis(op)?;
    let matrix = per_transition(es, &op_eigen, |omega| {
        let chi = response.evaluate(omega)?;
        if chi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "response is negative at omega = {omega}"
            )));
        }
        Ok(Complex64::new(chi.sqrt(), 0.0))
    })?;
    Ok(DressedOperator {
        eigen: Arc::clone(es),
        matrix,
        weighting: Weighting::Response(response.clone()),
        part: FrequencyPart::Positive,
    })
}

/// Unweighted positive-frequency component (χ ≡ 1): `O⁺ = Σ_{E_j < E_i}
/// O_{ji} |E_j><E_i|`. Wide-band rates are χ·<O⁻O⁺> with the constant χ
/// applied by the caller.
pub fn wideband_positive_op(es: &Arc<EigenSystem>, op: &OperatorMatrix) -> Result<DressedOperator> {
    validate_hermitian(op)?;
    let op_eigen = es.to_eigenbasis(op)?;
    let matrix = per_transition(es, &op_eigen, |_| Ok(Complex64::ONE))?;
    Ok(DressedOperator {
        eigen: Arc::clone(es),
        matrix,
        weighting: Weighting::Unweighted,
        part: FrequencyPart::Positive,
    })
}

/// Positive-frequency electric-field operator built from a vector-potential
/// component: matrix elements `i·ω_{j,k}·<E_k|A|E_j>` on energy-lowering
/// transitions. The overall phase is fixed so the bare-mode limit reproduces
/// `E⁺ ∝ +i·ω₀·A₀₁·a`; only |·|² enters any rate, so the phase is
/// unobservable.
pub fn frequency_weighted_positive_op(
    es: &Arc<EigenSystem>,
    vector_potential: &OperatorMatrix,
) -> Result<DressedOperator> {
    validate_hermitian(vector_potential)?;
    let op_eigen = es.to_eigenbasis(vector_potential)?;
    let matrix = per_transition(es, &op_eigen, |omega| Ok(Complex64::new(0.0, omega)))?;
    Ok(DressedOperator {
        eigen: Arc::clone(es),
        matrix,
        weighting: Weighting::TransitionFrequency,
        part: FrequencyPart::Positive,
    })
}

impl DressedOperator {
    pub fn eigensystem(&self) -> &Arc<EigenSystem> {
        &self.eigen
    }

    /// Matrix in the eigenbasis (row = final state, column = initial state).
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn part(&self) -> FrequencyPart {
        self.part
    }

    /// The negative-frequency partner `x⁻ = (x⁺)†` (and back).
    pub fn adjoint(&self) -> Self {
        Self {
            eigen: Arc::clone(&self.eigen),
            matrix: self.matrix.adjoint(),
            weighting: self.weighting.clone(),
            part: match self.part {
                FrequencyPart::Positive => FrequencyPart::Negative,
                FrequencyPart::Negative => FrequencyPart::Positive,
            },
        }
    }

    /// Apply to a vector of eigenbasis amplitudes.
    pub fn apply_eigen(&self, amplitudes: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if amplitudes.len() != self.dim() {
            return Err(Error::Validation(
                "amplitude vector length does not match the eigenbasis".into(),
            ));
        }
        Ok(&self.matrix * amplitudes)
    }

    /// `<E_i| x⁻ x⁺ |E_i>` = Σ_k |x_{ki}|², the total lowering weight out of
    /// eigenstate `i`. Exactly zero for the ground state by construction.
    pub fn transition_weight(&self, initial: usize) -> Result<f64> {
        if initial >= self.dim() {
            return Err(Error::IndexOutOfRange {
                what: "eigenstate",
                index: initial,
                limit: self.dim(),
            });
        }
        if self.part != FrequencyPart::Positive {
            return Err(Error::InvalidParameter(
                "transition weight is defined for the positive-frequency part".into(),
            ));
        }
        Ok(self
            .matrix
            .column(initial)
            .iter()
            .map(|z| z.norm_sqr())
            .sum())
    }

    /// View in the bare basis, `V x V†` — for inspection; rates contract in
    /// the eigenbasis.
    pub fn to_bare_basis(&self) -> DMatrix<Complex64> {
        self.eigen.states() * &self.matrix * self.eigen.states().adjoint()
    }

    /// Serialize together with the eigensystem it lives in.
    pub fn write_to<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        self.eigen.write_to(&mut w)?;
        let meta = serde_json::to_vec(&(&self.weighting, &self.part))
            .map_err(|e| Error::Serialization(e.to_string()))?;
        w.write_all(&(meta.len() as u64).to_le_bytes())?;
        w.write_all(&meta)?;
        for z in self.matrix.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: std::io::Read>(mut r: R) -> Result<Self> {
        let eigen = Arc::new(EigenSystem::read_from(&mut r)?);
        let mut len_buf = [0u8; 8];
        r.read_exact(&mut len_buf)?;
        let meta_len = u64::from_le_bytes(len_buf) as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let (weighting, part): (Weighting, FrequencyPart) =
            serde_json::from_slice(&meta).map_err(|e| Error::Serialization(e.to_string()))?;
        let dim = eigen.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            for row in 0..dim {
                let mut re = [0u8; 8];
                let mut im = [0u8; 8];
                r.read_exact(&mut re)?;
                r.read_exact(&mut im)?;
                matrix[(row, c)] = Complex64::new(f64::from_le_bytes(re), f64::from_le_bytes(im));
            }
        }
        Ok(Self {
            eigen,
            matrix,
            weighting,
            part,
        })
    }
}
