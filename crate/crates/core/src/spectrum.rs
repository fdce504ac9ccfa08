//! Hermitian eigendecomposition with fixed ordering, degeneracy and phase
//! conventions, parity labeling, truncation-convergence certification, and a
//! binary eigendata format for reuse across runs.
//!
//! Conventions (all deterministic, so serialized eigendata are reproducible
//! bit-for-bit across runs on one platform):
//! - eigenvalues ascending; clusters closer than the degeneracy tolerance are
//!   snapped to their mean energy,
//! - within a degenerate cluster, states are ordered by parity label (+1
//!   first) and then by the index of their largest-magnitude amplitude,
//! - each eigenvector's global phase is fixed so its largest-magnitude
//!   component is real and positive.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, OperatorMatrix, StateVector};
use crate::models::ModelSystem;

/// Relative degeneracy clustering width, in units of the model's
/// characteristic frequency.
pub const DEGENERACY_TOL_RELATIVE: f64 = 1e-9;

/// Max eigen-residual: `‖H v_k - E_k v_k‖₂ ≤ RESIDUAL_TOL · ‖H‖_F`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Orthonormality tolerance: `|<v_j|v_k> - δ_jk| ≤ ORTHONORMALITY_TOL`.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Minimum parity purity `|<v|Π|v>|` required for a label.
pub const PARITY_PURITY_MIN: f64 = 0.999;

/// Eigendecomposition of a model Hamiltonian: ascending energies, orthonormal
/// eigenvector columns, optional ±1 parity labels.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    space: HilbertSpace,
    energies: DVector<f64>,
    states: DMatrix<Complex64>,
    parity: Option<Vec<i8>>,
    degeneracy_tol: f64,
}

impl EigenSystem {
    /// Assemble from raw parts, validating ordering and orthonormality.
    /// (The eigen-residual can only be checked against the Hamiltonian and is
    /// the responsibility of [`diagonalize`].)
    pub fn from_parts(
        space: HilbertSpace,
        energies: DVector<f64>,
        states: DMatrix<Complex64>,
        parity: Option<Vec<i8>>,
        degeneracy_tol: f64,
    ) -> Result<Self> {
        let dim = space.total_dim();
        if energies.len() != dim || states.nrows() != dim || states.ncols() != dim {
            return Err(Error::Validation(
                "eigendata dimensions do not match the space".into(),
            ));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Validation("non-finite eigenvalue".into()));
        }
        if energies.as_slice().windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation("energies are not non-decreasing".into()));
        }
        if let Some(p) = &parity {
            if p.len() != dim {
                return Err(Error::Validation("parity label length mismatch".into()));
            }
        }
        if !degeneracy_tol.is_finite() || degeneracy_tol <= 0.0 {
            return Err(Error::Validation(
                "degeneracy tolerance must be positive".into(),
            ));
        }
        let gram = states.adjoint() * &states;
        let mut dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - Complex64::new(expected, 0.0)).norm());
            }
        }
        if dev > ORTHONORMALITY_TOL {
            return Err(Error::Validation(format!(
                "eigenvectors are not orthonormal (max deviation {dev:.3e})"
            )));
        }
        Ok(Self {
            space,
            energies,
            states,
            parity,
            degeneracy_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn energies(&self) -> &[f64] {
        self.energies.as_slice()
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    /// Eigenvectors as columns, in the bare basis.
    pub fn states(&self) -> &DMatrix<Complex64> {
        &self.states
    }

    pub fn state(&self, k: usize) -> Result<StateVector> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange {
                what: "eigenstate",
                index: k,
                limit: self.dim(),
            });
        }
        StateVector::from_amplitudes(&self.space, self.states.column(k).into_owned())
    }

    pub fn parity(&self) -> Option<&[i8]> {
        self.parity.as_deref()
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    /// Ranges of equal-energy (within the degeneracy tolerance) clusters.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        cluster_ranges(self.energies.as_slice(), self.degeneracy_tol)
    }

    /// Matrix of `op` in the eigenbasis, `V† O V`.
    pub fn to_eigenbasis(&self, op: &OperatorMatrix) -> Result<DMatrix<Complex64>> {
        if op.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.states.adjoint() * op.elements() * &self.states)
    }

    /// `<E_k| op |E_k>`.
    pub fn expectation(&self, op: &OperatorMatrix, k: usize) -> Result<Complex64> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange {
                what: "eigenstate",
                index: k,
                limit: self.dim(),
            });
        }
        if op.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let v = self.states.column(k);
        Ok(v.dotc(&(op.elements() * v)))
    }

    /// Rebuild `V E V†`; matches the diagonalized Hamiltonian up to the
    /// solver residual.
    pub fn reconstruct_hamiltonian(&self) -> OperatorMatrix {
        let dim = self.dim();
        let mut scaled = self.states.clone();
        for k in 0..dim {
            let e = Complex64::new(self.energies[k], 0.0);
            for i in 0..dim {
                scaled[(i, k)] *= e;
            }
        }
        let h = &scaled * self.states.adjoint();
        OperatorMatrix::from_elements(&self.space, h).expect("square by construction")
    }
}

fn cluster_ranges(energies: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for k in 1..=energies.len() {
        if k == energies.len() || energies[k] - energies[k - 1] > tol {
            ranges.push(start..k);
            start = k;
        }
    }
    ranges
}

/// Diagonalize a model Hamiltonian with the module's ordering, degeneracy,
/// parity and phase conventions. The degeneracy tolerance is
/// [`DEGENERACY_TOL_RELATIVE`] times the model's characteristic frequency.
pub fn diagonalize(model: &ModelSystem) -> Result<EigenSystem> {
    let tol = DEGENERACY_TOL_RELATIVE * model.characteristic_frequency();
    diagonalize_operator(model.hamiltonian(), tol, model.parity_op())
}

/// Diagonalize an arbitrary Hermitian operator with an explicit degeneracy
/// tolerance and optional parity operator for resolving degenerate clusters.
pub fn diagonalize_operator(
    op: &OperatorMatrix,
    degeneracy_tol: f64,
    parity_op: Option<&OperatorMatrix>,
) -> Result<EigenSystem> {
    let scale = op.max_abs().max(1.0);
    let dev = op.max_deviation_from_hermitian();
    if dev > 1e-12 * scale {
        return Err(Error::NonHermitian { max_dev: dev });
    }
    if !degeneracy_tol.is_finite() || degeneracy_tol <= 0.0 {
        return Err(Error::InvalidParameter(
            "degeneracy tolerance must be positive".into(),
        ));
    }
    let dim = op.dim();
    let se = op.elements().clone().symmetric_eigen();

    // ascending energy order
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let mut energies = DVector::from_fn(dim, |k, _| se.eigenvalues[order[k]]);
    let mut states = DMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        states.set_column(k, &se.eigenvectors.column(src));
    }

    // snap degenerate clusters to their mean energy so that transition
    // frequencies inside a cluster are exactly zero downstream
    let clusters = cluster_ranges(energies.as_slice(), degeneracy_tol);
    for cl in &clusters {
        if cl.len() > 1 {
            let mean = energies.as_slice()[cl.clone()].iter().sum::<f64>() / cl.len() as f64;
            for k in cl.clone() {
                energies[k] = mean;
            }
        }
    }

    let parity = match parity_op {
        Some(pi) => Some(resolve_parity(&mut states, &clusters, pi)?),
        None => None,
    };
    fix_phases(&mut states);

    // residual and orthonormality certification
    let h_frob = op.frobenius_norm();
    let residual = op.elements() * &states
        - &states * DMatrix::from_diagonal(&energies.map(|e| Complex64::new(e, 0.0)));
    let max_residual = (0..dim)
        .map(|k| residual.column(k).norm())
        .fold(0.0, f64::max);
    if max_residual > RESIDUAL_TOL * h_frob {
        return Err(Error::Eigensolver(format!(
            "residual {max_residual:.3e} exceeds {RESIDUAL_TOL:.1e} * ‖H‖_F = {:.3e}",
            RESIDUAL_TOL * h_frob
        )));
    }

    let es = EigenSystem::from_parts(
        op.space().clone(),
        energies,
        states,
        parity,
        degeneracy_tol,
    )?;
    Ok(es)
}

/// Rotate each degenerate cluster into the parity eigenbasis, order members
/// (+1 first, then by index of largest amplitude) and return the labels.
fn resolve_parity(
    states: &mut DMatrix<Complex64>,
    clusters: &[std::ops::Range<usize>],
    parity_op: &OperatorMatrix,
) -> Result<Vec<i8>> {
    let dim = states.nrows();
    let mut labels = vec![0i8; dim];
    for cl in clusters {
        if cl.len() == 1 {
            let k = cl.start;
            let v = states.column(k);
            let p = v.dotc(&(parity_op.elements() * v)).re;
            if p.abs() < PARITY_PURITY_MIN {
                return Err(Error::Eigensolver(format!(
                    "eigenstate {k} has mixed parity (<Π> = {p:.6}) outside any degenerate \
                     cluster; the parity operator does not commute with the Hamiltonian"
                )));
            }
            labels[k] = if p > 0.0 { 1 } else { -1 };
            continue;
        }
        // project Π into the cluster and diagonalize the small block
        let sub = states.columns(cl.start, cl.len()).into_owned();
        let block = sub.adjoint() * parity_op.elements() * &sub;
        let se = block.symmetric_eigen();
        let rotated = &sub * &se.eigenvectors;

        // order: parity +1 first, then index of largest-magnitude amplitude
        let mut members: Vec<(i8, usize, usize)> = (0..cl.len())
            .map(|m| {
                let p = se.eigenvalues[m];
                let col = rotated.column(m);
                let argmax = (0..dim)
                    .max_by(|&i, &j| col[i].norm().partial_cmp(&col[j].norm()).unwrap())
                    .unwrap_or(0);
                let label = if p > 0.0 { 1i8 } else { -1i8 };
                (label, argmax, m)
            })
            .collect();
        members.sort_by_key(|&(label, argmax, _)| (-label, argmax));

        for (slot, &(label, _, m)) in members.iter().enumerate() {
            let k = cl.start + slot;
            states.set_column(k, &rotated.column(m));
            let v = states.column(k);
            let p = v.dotc(&(parity_op.elements() * v)).re;
            if p.abs() < PARITY_PURITY_MIN {
                return Err(Error::Eigensolver(format!(
                    "degenerate cluster at index {k} could not be parity-resolved \
                     (<Π> = {p:.6})"
                )));
            }
            labels[k] = label;
        }
    }
    Ok(labels)
}

/// Fix each column's global phase: largest-magnitude component real positive.
fn fix_phases(states: &mut DMatrix<Complex64>) {
    let dim = states.nrows();
    for k in 0..states.ncols() {
        let col = states.column(k);
        let argmax = (0..dim)
            .max_by(|&i, &j| col[i].norm().partial_cmp(&col[j].norm()).unwrap())
            .unwrap_or(0);
        let z = col[argmax];
        let n = z.norm();
        if n > 0.0 {
            let phase = z.conj() / n;
            for i in 0..dim {
                states[(i, k)] *= phase;
            }
            // kill the residual imaginary dust on the anchor component
            states[(argmax, k)] = Complex64::new(states[(argmax, k)].re, 0.0);
        }
    }
}

/// Re-resolve parity labels of an existing eigensystem, re-mixing degenerate
/// clusters in the parity eigenbasis where needed. Checks that the parity
/// operator does not connect distinct energy clusters (the eigenbasis
/// expression of commuting with the Hamiltonian). Updates `es` in place and
/// returns the labels.
pub fn parity_labels(es: &mut EigenSystem, parity_op: &OperatorMatrix) -> Result<Vec<i8>> {
    if parity_op.space() != es.space() {
        return Err(Error::SpaceMismatch);
    }
    let clusters = es.clusters();
    let pi_eig = es.to_eigenbasis(parity_op)?;
    for (a, ca) in clusters.iter().enumerate() {
        for (b, cb) in clusters.iter().enumerate() {
            if a == b {
                continue;
            }
            for i in ca.clone() {
                for j in cb.clone() {
                    if pi_eig[(i, j)].norm() > 1e-8 {
                        return Err(Error::Validation(format!(
                            "parity operator connects eigenstates {i} and {j} with distinct \
                             energies; it does not commute with the Hamiltonian"
                        )));
                    }
                }
            }
        }
    }
    let labels = resolve_parity(&mut es.states, &clusters, parity_op)?;
    fix_phases(&mut es.states);
    es.parity = Some(labels.clone());
    Ok(labels)
}

/// Result of a truncation-doubling convergence sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Truncations actually diagonalized.
    pub truncations: Vec<usize>,
    /// Max relative drift of the tracked levels for each successive pair.
    pub pair_drifts: Vec<f64>,
    /// Per-level relative drift of the last tested pair.
    pub level_drifts: Vec<f64>,
    pub converged: bool,
    /// Smallest truncation whose tracked levels are stable under doubling.
    pub recommended: Option<usize>,
    pub levels: usize,
    pub tolerance: f64,
    /// Dimension cap that stopped the sweep, if it did.
    pub max_total_dim: usize,
}

impl ConvergenceReport {
    pub fn max_drift(&self) -> Option<f64> {
        self.pair_drifts.last().copied()
    }
}

/// Double the Fock truncation until the lowest `levels` energies drift by
/// less than `tol` between successive doublings, or the model dimension
/// would exceed `max_total_dim`.
///
/// Drift is `|E_k(2n) - E_k(n)| / max(|E_k(2n)|, f_char)` with `f_char` the
/// model's characteristic frequency. Hitting the cap yields a non-converged
/// report, not an error.
pub fn convergence_check(
    builder: impl Fn(usize) -> Result<ModelSystem>,
    base_truncation: usize,
    levels: usize,
    tol: f64,
    max_total_dim: usize,
) -> Result<ConvergenceReport> {
    if base_truncation < 4 {
        return Err(Error::InvalidParameter(format!(
            "base truncation must be at least 4, got {base_truncation}"
        )));
    }
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be positive".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(
            "convergence tolerance must be positive".into(),
        ));
    }

    let mut report = ConvergenceReport {
        truncations: Vec::new(),
        pair_drifts: Vec::new(),
        level_drifts: Vec::new(),
        converged: false,
        recommended: None,
        levels,
        tolerance: tol,
        max_total_dim,
    };

    let model = builder(base_truncation)?;
    if model.space().total_dim() > max_total_dim {
        return Ok(report); // cannot even test the base truncation
    }
    let f_char = model.characteristic_frequency();
    let mut prev = diagonalize(&model)?.energies().to_vec();
    report.truncations.push(base_truncation);

    let mut n = base_truncation;
    loop {
        let next = 2 * n;
        let model = builder(next)?;
        if model.space().total_dim() > max_total_dim {
            return Ok(report);
        }
        let cur = diagonalize(&model)?.energies().to_vec();
        let tracked = levels.min(prev.len()).min(cur.len());
        let level_drifts: Vec<f64> = (0..tracked)
            .map(|k| (cur[k] - prev[k]).abs() / cur[k].abs().max(f_char))
            .collect();
        let drift = level_drifts.iter().copied().fold(0.0, f64::max);
        report.truncations.push(next);
        report.pair_drifts.push(drift);
        report.level_drifts = level_drifts;
        if drift < tol {
            report.converged = true;
            report.recommended = Some(n);
            return Ok(report);
        }
        prev = cur;
        n = next;
    }
}

// ---------------------------------------------------------------------------
// Binary eigendata format
//
// Little-endian layout:
//   magic        8 bytes   b"PDEVD001"
//   n_modes      u64, then one u64 per mode truncation
//   n_qubits     u64
//   dim          u64
//   degeneracy_tol f64
//   parity flag  u8 (0 or 1)
//   energies     dim × f64
//   states       dim*dim × (re f64, im f64), column-major
//   parity       dim × i8 (only if flag = 1)
// ---------------------------------------------------------------------------

const EIGEN_MAGIC: &[u8; 8] = b"PDEVD001";

impl EigenSystem {
    /// Serialize to the binary eigendata format documented in this module.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(EIGEN_MAGIC)?;
        w.write_all(&(self.space.n_modes() as u64).to_le_bytes())?;
        for &d in self.space.mode_dims() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&(self.space.n_qubits() as u64).to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&self.degeneracy_tol.to_le_bytes())?;
        w.write_all(&[u8::from(self.parity.is_some())])?;
        for e in self.energies.iter() {
            w.write_all(&e.to_le_bytes())?;
        }
        for z in self.states.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        if let Some(p) = &self.parity {
            let bytes: Vec<u8> = p.iter().map(|&x| x as u8).collect();
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    /// Read back eigendata written by [`EigenSystem::write_to`], re-running
    /// the structural validation.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            Ok(u64::from_le_bytes(buf))
        }
        fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            Ok(f64::from_le_bytes(buf))
        }

        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != EIGEN_MAGIC {
            return Err(Error::Serialization(
                "not an eigendata file (bad magic)".into(),
            ));
        }
        let n_modes = read_u64(&mut r)? as usize;
        let mut mode_dims = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            mode_dims.push(read_u64(&mut r)? as usize);
        }
        let n_qubits = read_u64(&mut r)? as usize;
        let space = HilbertSpace::new(mode_dims, n_qubits)?;
        let dim = read_u64(&mut r)? as usize;
        if dim != space.total_dim() {
            return Err(Error::Serialization(format!(
                "recorded dimension {dim} does not match the space ({})",
                space.total_dim()
            )));
        }
        let degeneracy_tol = read_f64(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;

        let mut energies = DVector::zeros(dim);
        for k in 0..dim {
            energies[k] = read_f64(&mut r)?;
        }
        let mut states = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            for row in 0..dim {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                states[(row, c)] = Complex64::new(re, im);
            }
        }
        let parity = if flag[0] == 1 {
            let mut bytes = vec![0u8; dim];
            r.read_exact(&mut bytes)?;
            Some(bytes.into_iter().map(|b| b as i8).collect())
        } else {
            None
        };
        Self::from_parts(space, energies, states, parity, degeneracy_tol)
    }
}
