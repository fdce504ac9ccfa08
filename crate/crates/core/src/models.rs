//! Model Hamiltonians: quantum Rabi, Jaynes-Cummings, and a multimode
//! "black-box" circuit with flux coupling to an external absorber.
//!
//! All frequencies are angular and `ħ = 1`; the library itself is
//! unit-agnostic. Sign convention: `sigma_z |e> = +|e>`, so the bare atom
//! ground energy is `-omega_a / 2`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, OperatorMatrix, Pauli};

/// Element-wise Hermiticity tolerance for constructed Hamiltonians,
/// relative to the largest element magnitude.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A Hamiltonian together with its named coupling operators, optional
/// excitation-parity operator and the parameters it was built from.
#[derive(Clone, Debug)]
pub struct ModelSystem {
    space: HilbertSpace,
    hamiltonian: OperatorMatrix,
    coupling_ops: BTreeMap<String, OperatorMatrix>,
    parity_op: Option<OperatorMatrix>,
    params: BTreeMap<String, f64>,
    kind: String,
}

impl ModelSystem {
    fn new(
        kind: &str,
        hamiltonian: OperatorMatrix,
        coupling_ops: BTreeMap<String, OperatorMatrix>,
        parity_op: Option<OperatorMatrix>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let scale = hamiltonian.max_abs().max(1.0);
        let dev = hamiltonian.max_deviation_from_hermitian();
        if dev > HERMITICITY_TOL * scale {
            return Err(Error::NonHermitian { max_dev: dev });
        }
        for (name, op) in &coupling_ops {
            if op.space() != hamiltonian.space() {
                return Err(Error::Validation(format!(
                    "coupling operator '{name}' lives on a different space"
                )));
            }
        }
        Ok(Self {
            space: hamiltonian.space().clone(),
            hamiltonian,
            coupling_ops,
            parity_op,
            params,
            kind: kind.to_string(),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn parity_op(&self) -> Option<&OperatorMatrix> {
        self.parity_op.as_ref()
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn coupling_names(&self) -> impl Iterator<Item = &str> {
        self.coupling_ops.keys().map(|s| s.as_str())
    }

    /// Look up a registered coupling operator by name.
    pub fn coupling_operator(&self, name: &str) -> Result<&OperatorMatrix> {
        self.coupling_ops
            .get(name)
            .ok_or_else(|| Error::UnknownOperator(name.to_string()))
    }

    /// Frequency scale used for degeneracy clustering and convergence
    /// normalization: omega0 for the single-mode models, the smallest mode
    /// frequency for circuits.
    pub fn characteristic_frequency(&self) -> f64 {
        self.params
            .get("characteristic_frequency")
            .copied()
            .unwrap_or(1.0)
    }
}

/// Diagonal excitation-parity operator exp[iπ(Σ a†a + Σ σ+σ-)] as a ±1
/// matrix in the bare basis.
fn parity_matrix(space: &HilbertSpace) -> OperatorMatrix {
    let dim = space.total_dim();
    let mut elements = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        let mut rest = i;
        let mut excitations = 0usize;
        for &d in space.mode_dims() {
            excitations += rest % d;
            rest /= d;
        }
        for _ in 0..space.n_qubits() {
            excitations += rest % 2;
            rest /= 2;
        }
        let sign = if excitations.is_multiple_of(2) { 1.0 } else { -1.0 };
        elements[(i, i)] = Complex64::new(sign, 0.0);
    }
    OperatorMatrix::from_elements(space, elements).expect("square by construction")
}

fn check_single_mode_params(omega0: f64, omega_a: f64, g: f64, n_fock: usize) -> Result<()> {
    if !omega0.is_finite() || omega0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    if !omega_a.is_finite() || omega_a < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "omega_a must be non-negative, got {omega_a}"
        )));
    }
    if !g.is_finite() || g < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "g must be non-negative, got {g}"
        )));
    }
    if n_fock < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_fock must be at least 2, got {n_fock}"
        )));
    }
    Ok(())
}

fn single_mode_params(omega0: f64, omega_a: f64, g: f64, n_fock: usize) -> BTreeMap<String, f64> {
    let mut params = BTreeMap::new();
    params.insert("omega0".into(), omega0);
    params.insert("omega_a".into(), omega_a);
    params.insert("g".into(), g);
    params.insert("n_fock".into(), n_fock as f64);
    params.insert("characteristic_frequency".into(), omega0);
    params
}

/// Quantum Rabi model:
/// `H = omega0 a†a + (omega_a/2) sigma_z + g sigma_x (a + a†)`.
///
/// Registers the coupling operators `"quadrature"` (a + a†) and
/// `"photon_number"` (a†a), and the excitation-parity operator, which
/// commutes with the Hamiltonian.
pub fn build_rabi(omega0: f64, omega_a: f64, g: f64, n_fock: usize) -> Result<ModelSystem> {
    check_single_mode_params(omega0, omega_a, g, n_fock)?;
    let space = HilbertSpace::new(vec![n_fock], 1)?;
    let number = space.number_op(0)?;
    let quadrature = space.quadrature_op(0)?;
    let sz = space.pauli_op(0, Pauli::Z)?;
    let sx = space.pauli_op(0, Pauli::X)?;

    let h = number
        .scale(omega0)
        .add(&sz.scale(0.5 * omega_a))?
        .add(&sx.mul(&quadrature)?.scale(g))?;

    let mut coupling_ops = BTreeMap::new();
    coupling_ops.insert("quadrature".to_string(), quadrature);
    coupling_ops.insert("photon_number".to_string(), number);

    ModelSystem::new(
        "rabi",
        h,
        coupling_ops,
        Some(parity_matrix(&space)),
        single_mode_params(omega0, omega_a, g, n_fock),
    )
}

/// Jaynes-Cummings model (Rabi without counter-rotating terms):
/// `H = omega0 a†a + (omega_a/2) sigma_z + g (sigma_- a† + sigma_+ a)`.
///
/// Block-diagonal in the total excitation number; its ground state is the
/// bare `|g, 0>` for every coupling strength.
pub fn build_jc(omega0: f64, omega_a: f64, g: f64, n_fock: usize) -> Result<ModelSystem> {
    check_single_mode_params(omega0, omega_a, g, n_fock)?;
    let space = HilbertSpace::new(vec![n_fock], 1)?;
    let a = space.annihilation_op(0)?;
    let number = space.number_op(0)?;
    let quadrature = space.quadrature_op(0)?;
    let sz = space.pauli_op(0, Pauli::Z)?;
    let sp = space.pauli_op(0, Pauli::Plus)?;
    let sm = space.pauli_op(0, Pauli::Minus)?;

    let exchange = sm.mul(&a.adjoint())?.add(&sp.mul(&a)?)?;
    let h = number
        .scale(omega0)
        .add(&sz.scale(0.5 * omega_a))?
        .add(&exchange.scale(g))?;

    let mut coupling_ops = BTreeMap::new();
    coupling_ops.insert("quadrature".to_string(), quadrature);
    coupling_ops.insert("photon_number".to_string(), number);

    ModelSystem::new(
        "jc",
        h,
        coupling_ops,
        Some(parity_matrix(&space)),
        single_mode_params(omega0, omega_a, g, n_fock),
    )
}

/// One bosonic mode of a circuit: frequency, zero-point flux amplitude and
/// Fock truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitMode {
    pub frequency: f64,
    pub flux_zpf: f64,
    pub n_fock: usize,
}

/// A two-level artificial atom and its coupling amplitudes (per Pauli axis)
/// to the total flux operator of the circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitQubit {
    pub frequency: f64,
    #[serde(default)]
    pub coupling_x: f64,
    #[serde(default)]
    pub coupling_y: f64,
    #[serde(default)]
    pub coupling_z: f64,
}

/// Extra bilinear Hamiltonian term `strength * A * B` between two named
/// operators of the circuit. Valid names: `"flux"`, `"mode{m}.quadrature"`,
/// `"mode{m}.number"`, `"qubit{q}.sx" / ".sy" / ".sz"`.
///
/// The quadratic flux self-term that an inductive detector coupling induces
/// can be kept in the system Hamiltonian as `("flux", "flux", 1/(2 L_c))`;
/// omitting it reproduces the option of neglecting the quadratic terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InternalCoupling {
    pub op_a: String,
    pub op_b: String,
    pub strength: f64,
}

/// Declarative description of a "black-box" circuit: modes, qubits and
/// internal bilinear couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub modes: Vec<CircuitMode>,
    #[serde(default)]
    pub qubits: Vec<CircuitQubit>,
    #[serde(default)]
    pub couplings: Vec<InternalCoupling>,
}

impl CircuitSpec {
    fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParameter(
                "a circuit needs at least one mode".into(),
            ));
        }
        for (m, mode) in self.modes.iter().enumerate() {
            if !mode.frequency.is_finite() || mode.frequency <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "mode {m}: frequency must be positive, got {}",
                    mode.frequency
                )));
            }
            if mode.n_fock < 2 {
                return Err(Error::InvalidParameter(format!(
                    "mode {m}: truncation must be at least 2, got {}",
                    mode.n_fock
                )));
            }
            if !mode.flux_zpf.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "mode {m}: flux_zpf must be finite"
                )));
            }
        }
        for (q, qubit) in self.qubits.iter().enumerate() {
            if !qubit.frequency.is_finite() || qubit.frequency <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q}: frequency must be positive, got {}",
                    qubit.frequency
                )));
            }
        }
        Ok(())
    }

    /// Copy of this circuit description with every mode truncation rescaled
    /// by `target / self.modes[0].n_fock`, for convergence sweeps.
    pub fn with_base_truncation(&self, target: usize) -> Self {
        let base = self.modes[0].n_fock.max(1);
        let mut spec = self.clone();
        for mode in &mut spec.modes {
            let scaled = (mode.n_fock * target + base / 2) / base;
            mode.n_fock = scaled.max(2);
        }
        spec
    }
}

/// Build ModelSystem for a [`CircuitSpec`].
///
/// The flux operator `Φ = Σ_m Φ_zpf^(m) (a_m + a_m†)` is registered as the
/// coupling operator `"flux"`; it is the system operator seen by an
/// inductively coupled absorber. Also registered: `"photon_number"`
/// (total Σ a†a) and `"mode{m}.quadrature"` for each mode.
pub fn build_circuit(spec: &CircuitSpec) -> Result<ModelSystem> {
    spec.validate()?;
    let space = HilbertSpace::new(
        spec.modes.iter().map(|m| m.n_fock).collect(),
        spec.qubits.len(),
    )?;

    // named operator registry for internal couplings
    let mut registry: BTreeMap<String, OperatorMatrix> = BTreeMap::new();
    let mut flux = OperatorMatrix::zeros(&space);
    let mut total_number = OperatorMatrix::zeros(&space);
    for (m, mode) in spec.modes.iter().enumerate() {
        let quad = space.quadrature_op(m)?;
        let number = space.number_op(m)?;
        flux = flux.add(&quad.scale(mode.flux_zpf))?;
        total_number = total_number.add(&number)?;
        registry.insert(format!("mode{m}.quadrature"), quad);
        registry.insert(format!("mode{m}.number"), number);
    }
    for q in 0..spec.qubits.len() {
        registry.insert(format!("qubit{q}.sx"), space.pauli_op(q, Pauli::X)?);
        registry.insert(format!("qubit{q}.sy"), space.pauli_op(q, Pauli::Y)?);
        registry.insert(format!("qubit{q}.sz"), space.pauli_op(q, Pauli::Z)?);
    }
    registry.insert("flux".to_string(), flux.clone());

    // bare Hamiltonian
    let mut h = OperatorMatrix::zeros(&space);
    for (m, mode) in spec.modes.iter().enumerate() {
        h = h.add(&registry[&format!("mode{m}.number")].scale(mode.frequency))?;
    }
    for (q, qubit) in spec.qubits.iter().enumerate() {
        h = h.add(&registry[&format!("qubit{q}.sz")].scale(0.5 * qubit.frequency))?;
    }

    // qubit-flux couplings
    for (q, qubit) in spec.qubits.iter().enumerate() {
        for (axis, amp) in [
            ("sx", qubit.coupling_x),
            ("sy", qubit.coupling_y),
            ("sz", qubit.coupling_z),
        ] {
            if amp != 0.0 {
                let pauli = &registry[&format!("qubit{q}.{axis}")];
                h = h.add(&pauli.mul(&flux)?.scale(amp))?;
            }
        }
    }

    // internal bilinear terms
    for coupling in &spec.couplings {
        let a = registry
            .get(&coupling.op_a)
            .ok_or_else(|| Error::UnknownOperator(coupling.op_a.clone()))?;
        let b = registry
            .get(&coupling.op_b)
            .ok_or_else(|| Error::UnknownOperator(coupling.op_b.clone()))?;
        h = h.add(&a.mul(b)?.scale(coupling.strength))?;
    }

    let mut coupling_ops = BTreeMap::new();
    coupling_ops.insert("flux".to_string(), flux);
    coupling_ops.insert("photon_number".to_string(), total_number);
    for (m, _) in spec.modes.iter().enumerate() {
        let key = format!("mode{m}.quadrature");
        coupling_ops.insert(key.clone(), registry[&key].clone());
    }

    // keep the parity operator only when it actually commutes (sz-axis flux
    // couplings break it, for instance)
    let parity = parity_matrix(&space);
    let scale = h.max_abs().max(1.0);
    let parity_op = match h.commutator(&parity) {
        Ok(comm) if comm.max_abs() <= HERMITICITY_TOL * scale => Some(parity),
        _ => None,
    };

    let mut params = BTreeMap::new();
    let f_min = spec
        .modes
        .iter()
        .map(|m| m.frequency)
        .fold(f64::INFINITY, f64::min);
    params.insert("characteristic_frequency".into(), f_min);
    for (m, mode) in spec.modes.iter().enumerate() {
        params.insert(format!("mode{m}.frequency"), mode.frequency);
        params.insert(format!("mode{m}.flux_zpf"), mode.flux_zpf);
        params.insert(format!("mode{m}.n_fock"), mode.n_fock as f64);
    }
    for (q, qubit) in spec.qubits.iter().enumerate() {
        params.insert(format!("qubit{q}.frequency"), qubit.frequency);
        params.insert(format!("qubit{q}.coupling_x"), qubit.coupling_x);
        params.insert(format!("qubit{q}.coupling_y"), qubit.coupling_y);
        params.insert(format!("qubit{q}.coupling_z"), qubit.coupling_z);
    }

    ModelSystem::new("circuit", h, coupling_ops, parity_op, params)
}
