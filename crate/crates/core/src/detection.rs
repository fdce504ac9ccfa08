//! Detection observables built on dressed operators.
//!
//! The wide-band excitation rate of an absorber coupled through a system
//! operator is the initial-state expectation of `x⁻x⁺`; for eigenstate
//! `|E_i>` that is `Σ_k |x_{ki}|²`. Narrow-band detectors see the Fourier
//! transform of the two-time correlation `<O⁻(t) O⁺(t+τ)>`, which collapses
//! in the eigenbasis onto Lorentzian-broadened lines at the transition
//! frequencies — no time propagation is needed. Sharp energy-conserving
//! lines are represented by unit-area Lorentzians of half-width `eta`, so
//! every broadened result is reported together with its `eta`.
//!
//! The short-time absorption probability follows first-order perturbation
//! theory: an absorber mode at `ω_n` with coupling `g_n` is excited while a
//! bare quantum of the system operator disappears,
//!
//! ```text
//! P(t) = Σ_{n,k} |g_n <E_k| A |E_i>|² · F²(t, ω_n + E_k - E_i),
//! F(t, ω) = sin(ωt/2) / (ω/2),
//! ```
//!
//! where `A` is the bare lowering channel the absorber taps (the mode
//! annihilation operator in the single-mode models). At long times F² turns
//! into an energy-conserving line and the same matrix elements give the
//! golden-rule rate.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dressed::{DressedOperator, FrequencyPart, Weighting};
use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::spectrum::EigenSystem;

use std::f64::consts::PI;

/// Unit-area Lorentzian of half-width `eta` centered at zero.
fn lorentzian(x: f64, eta: f64) -> f64 {
    (eta / PI) / (x * x + eta * eta)
}

/// sinc-type line shape `F(t, ω) = sin(ωt/2)/(ω/2)`, with `F(t, 0) = t`.
fn line_shape(t: f64, omega: f64) -> f64 {
    if omega.abs() < 1e-14 {
        t
    } else {
        (0.5 * omega * t).sin() / (0.5 * omega)
    }
}

fn check_positive_part(op: &DressedOperator, what: &str) -> Result<()> {
    if op.part() != FrequencyPart::Positive {
        return Err(Error::InvalidParameter(format!(
            "{what} expects a positive-frequency operator"
        )));
    }
    Ok(())
}

/// Wide-band golden-rule rate `<E_i| x⁻x⁺ |E_i> = Σ_k |x_{ki}|²`.
///
/// For the ground state this is a structural zero — the positive-frequency
/// operator has no matrix elements out of it at all — not merely a small
/// number.
pub fn wideband_rate(xplus: &DressedOperator, initial: usize) -> Result<f64> {
    check_positive_part(xplus, "wideband_rate")?;
    xplus.transition_weight(initial)
}

/// Populations of an eigenbasis-diagonal mixed state `ρ = Σ_j P_j |j><j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    populations: Vec<f64>,
}

impl MixedState {
    /// Validate `P_j ≥ 0` and `Σ P_j = 1` (to 1e-10).
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::Validation("empty population vector".into()));
        }
        if populations.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::Validation(
                "populations must be finite and non-negative".into(),
            ));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "populations sum to {total}, expected 1"
            )));
        }
        Ok(Self { populations })
    }

    /// Thermal populations `P_j ∝ exp(-(E_j - E_0)/temperature)` over the
    /// truncated spectrum.
    pub fn thermal(es: &EigenSystem, temperature: f64) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        let e0 = es.energy(0);
        let weights: Vec<f64> = es
            .energies()
            .iter()
            .map(|e| (-(e - e0) / temperature).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| w / z).collect())
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }
}

/// Rate for a mixed initial state: `Tr[ρ x⁻x⁺] = Σ_j P_j <E_j|x⁻x⁺|E_j>`,
/// linear in the populations.
pub fn mixed_rate(state: &MixedState, xplus: &DressedOperator) -> Result<f64> {
    check_positive_part(xplus, "mixed_rate")?;
    if state.populations.len() != xplus.dim() {
        return Err(Error::Validation(format!(
            "population vector has length {} but the eigenbasis has dimension {}",
            state.populations.len(),
            xplus.dim()
        )));
    }
    let mut rate = 0.0;
    for (j, &p) in state.populations.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        rate += p * xplus.transition_weight(j)?;
    }
    Ok(rate)
}

/// Dipole detection rate `Σ_{αβ} d_α d_β <E_i| E_α⁻ E_β⁺ |E_i>` for 1–3
/// cartesian electric-field components built by
/// [`crate::dressed::frequency_weighted_positive_op`] on one eigensystem.
/// Equals `‖Σ_α d_α E_α⁺ |E_i>‖²`, so it is real and non-negative.
pub fn dipole_rate(
    components: &[&DressedOperator],
    dipole: &[f64],
    initial: usize,
) -> Result<f64> {
    if components.is_empty() || components.len() > 3 {
        return Err(Error::InvalidParameter(format!(
            "expected 1 to 3 field components, got {}",
            components.len()
        )));
    }
    if dipole.len() != components.len() {
        return Err(Error::InvalidParameter(format!(
            "dipole has {} components but {} field operators were given",
            dipole.len(),
            components.len()
        )));
    }
    let first = components[0];
    check_positive_part(first, "dipole_rate")?;
    if initial >= first.dim() {
        return Err(Error::IndexOutOfRange {
            what: "eigenstate",
            index: initial,
            limit: first.dim(),
        });
    }
    for c in components {
        check_positive_part(c, "dipole_rate")?;
        if *c.weighting() != Weighting::TransitionFrequency {
            return Err(Error::InvalidParameter(
                "dipole_rate expects frequency-weighted field components".into(),
            ));
        }
        if !std::sync::Arc::ptr_eq(c.eigensystem(), first.eigensystem())
            && c.eigensystem().energies() != first.eigensystem().energies()
        {
            return Err(Error::Validation(
                "field components live in different eigensystems".into(),
            ));
        }
    }
    let dim = first.dim();
    let mut combined = DVector::<Complex64>::zeros(dim);
    for (c, &d) in components.iter().zip(dipole) {
        if d == 0.0 {
            continue;
        }
        let column = c.matrix().column(initial);
        combined += column * Complex64::new(d, 0.0);
    }
    Ok(combined.norm_squared())
}

/// One spectral line of a narrow-band scan: center frequency and the full
/// integrated weight `2π g² |O⁺_{ki}|²` it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPeak {
    pub frequency: f64,
    pub weight: f64,
}

/// Narrow-band detector response over a frequency grid, with the underlying
/// line list for analytic integration.
#[derive(Clone, Debug)]
pub struct NarrowbandSpectrum {
    pub omega: Vec<f64>,
    pub rate: Vec<f64>,
    pub peaks: Vec<SpectralPeak>,
    pub eta: f64,
    pub coupling: f64,
}

impl NarrowbandSpectrum {
    /// Integrate the spectrum analytically over `range` (the whole real line
    /// when `None`), using the Lorentzian antiderivative per line rather
    /// than quadrature of the grid samples.
    pub fn analytic_integral(&self, range: Option<(f64, f64)>) -> f64 {
        match range {
            None => self.peaks.iter().map(|p| p.weight).sum(),
            Some((a, b)) => {
                let cdf = |x: f64, x0: f64| ((x - x0) / self.eta).atan() / PI;
                self.peaks
                    .iter()
                    .map(|p| p.weight * (cdf(b, p.frequency) - cdf(a, p.frequency)))
                    .sum()
            }
        }
    }
}

/// Narrow-band detection spectrum from eigenstate `initial`:
///
/// `dW/dt(ω_d) = 2π g² Σ_k |O⁺_{ki}|² ℓ_eta(ω_d - (E_i - E_k))`
///
/// with `ℓ_eta` a unit-area Lorentzian standing in for the sharp
/// energy-conservation line. `oplus` must be the unweighted positive part
/// (the detector is characterized by its coupling `g` here, not by a
/// response model). The two-time correlation behind this expression is
/// evaluated analytically in the eigenbasis; no time grid is involved.
pub fn narrowband_spectrum(
    oplus: &DressedOperator,
    initial: usize,
    coupling: f64,
    omega_grid: &[f64],
    eta: f64,
) -> Result<NarrowbandSpectrum> {
    check_positive_part(oplus, "narrowband_spectrum")?;
    if *oplus.weighting() != Weighting::Unweighted {
        return Err(Error::InvalidParameter(
            "narrowband_spectrum expects the unweighted positive-frequency operator".into(),
        ));
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "broadening eta must be positive, got {eta}"
        )));
    }
    if initial >= oplus.dim() {
        return Err(Error::IndexOutOfRange {
            what: "eigenstate",
            index: initial,
            limit: oplus.dim(),
        });
    }
    if omega_grid.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidParameter(
            "detector frequency grid must be positive and finite".into(),
        ));
    }

    let es = oplus.eigensystem();
    let energies = es.energies();
    let g2 = coupling * coupling;
    let mut peaks = Vec::new();
    for k in 0..oplus.dim() {
        let omega_ik = energies[initial] - energies[k];
        if omega_ik > es.degeneracy_tol() {
            let w = 2.0 * PI * g2 * oplus.matrix()[(k, initial)].norm_sqr();
            peaks.push(SpectralPeak {
                frequency: omega_ik,
                weight: w,
            });
        }
    }
    let rate: Vec<f64> = omega_grid
        .iter()
        .map(|&wd| {
            peaks
                .iter()
                .map(|p| p.weight * lorentzian(wd - p.frequency, eta))
                .sum()
        })
        .collect();
    Ok(NarrowbandSpectrum {
        omega: omega_grid.to_vec(),
        rate,
        peaks,
        eta,
        coupling,
    })
}

/// A set of discrete absorber modes (frequency, coupling rate).
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorberMode {
    pub frequency: f64,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbsorberModeSet {
    modes: Vec<AbsorberMode>,
}

impl AbsorberModeSet {
    pub fn new(modes: Vec<AbsorberMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter(
                "absorber mode set must not be empty".into(),
            ));
        }
        for (n, m) in modes.iter().enumerate() {
            if !m.frequency.is_finite() || m.frequency <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "absorber mode {n}: frequency must be positive, got {}",
                    m.frequency
                )));
            }
            if !m.coupling.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "absorber mode {n}: coupling must be finite"
                )));
            }
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[AbsorberMode] {
        &self.modes
    }

    /// Largest `ω_n + E_k - E_i` over modes and final states with nonzero
    /// weight; sets the time scale below which `P(t) ∝ t²`.
    pub fn max_transition_frequency(&self, es: &EigenSystem, initial: usize) -> f64 {
        let energies = es.energies();
        let e_top = energies[es.dim() - 1];
        self.modes
            .iter()
            .map(|m| m.frequency + e_top - energies[initial])
            .fold(0.0, f64::max)
    }
}

/// Eigenbasis column `<E_k| op |E_i>` for all k.
fn eigenbasis_column(
    es: &EigenSystem,
    op: &OperatorMatrix,
    initial: usize,
) -> Result<DVector<Complex64>> {
    if initial >= es.dim() {
        return Err(Error::IndexOutOfRange {
            what: "eigenstate",
            index: initial,
            limit: es.dim(),
        });
    }
    if op.space() != es.space() {
        return Err(Error::SpaceMismatch);
    }
    let v = es.states().column(initial);
    let applied = op.elements() * v;
    Ok(es.states().adjoint() * applied)
}

/// First-order probability that some absorber mode is excited after time `t`
/// while a quantum of the bare channel `absorption_op` leaves the system.
///
/// For the single-mode models `absorption_op` is the annihilation operator
/// `a`; its matrix elements out of an interacting ground state are nonzero
/// whenever that state hosts bare excitations, while within the
/// rotating-wave approximation the ground state is bare and the probability
/// vanishes identically. `P(0) = 0`, and for `t·ω ≪ 1` the probability grows
/// as `Σ|W|² t²`.
pub fn shorttime_probability(
    es: &EigenSystem,
    absorption_op: &OperatorMatrix,
    absorbers: &AbsorberModeSet,
    initial: usize,
    t: f64,
) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let column = eigenbasis_column(es, absorption_op, initial)?;
    let energies = es.energies();
    let e_i = energies[initial];
    let mut p = 0.0;
    for mode in absorbers.modes() {
        let g2 = mode.coupling * mode.coupling;
        if g2 == 0.0 {
            continue;
        }
        for k in 0..es.dim() {
            let w2 = column[k].norm_sqr();
            if w2 == 0.0 {
                continue;
            }
            let omega = mode.frequency + energies[k] - e_i;
            let f = line_shape(t, omega);
            p += g2 * w2 * f * f;
        }
    }
    Ok(p)
}

/// Long-time golden-rule limit of the same process:
/// `2π Σ_{n,k} |W^(n)_{k,i}|² ℓ_eta(ω_n + E_k - E_i)`.
///
/// From the ground state every `ω_n + E_k - E_0 ≥ ω_n > 0`, so the rate is
/// O(eta) and vanishes in the sharp-line limit: the bare quanta dressing the
/// ground state never produce a long-time detector click.
pub fn longtime_rate(
    es: &EigenSystem,
    absorption_op: &OperatorMatrix,
    absorbers: &AbsorberModeSet,
    initial: usize,
    eta: f64,
) -> Result<f64> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "broadening eta must be positive, got {eta}"
        )));
    }
    let column = eigenbasis_column(es, absorption_op, initial)?;
    let energies = es.energies();
    let e_i = energies[initial];
    let mut rate = 0.0;
    for mode in absorbers.modes() {
        let g2 = mode.coupling * mode.coupling;
        for k in 0..es.dim() {
            let w2 = column[k].norm_sqr();
            if w2 == 0.0 {
                continue;
            }
            let omega = mode.frequency + energies[k] - e_i;
            rate += 2.0 * PI * g2 * w2 * lorentzian(omega, eta);
        }
    }
    Ok(rate)
}

/// Expectation `<E_state| op |E_state>` of a Hermitian observable — with
/// `op = a†a` this is the bare photon number, the quantity that wrongly
/// suggests the interacting ground state were detectable.
pub fn bare_photon_number(
    es: &EigenSystem,
    number_op: &OperatorMatrix,
    state: usize,
) -> Result<f64> {
    let dev = number_op.max_deviation_from_hermitian();
    if dev > 1e-12 * number_op.max_abs().max(1.0) {
        return Err(Error::NonHermitian { max_dev: dev });
    }
    Ok(es.expectation(number_op, state)?.re)
}
