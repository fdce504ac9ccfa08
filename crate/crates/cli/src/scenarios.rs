//! Scenario runners: each composes model building, the convergence gate,
//! diagonalization and detection observables into `DetectionReport`s.

use std::collections::BTreeMap;
use std::sync::Arc;

use photodetect::detection::{
    bare_photon_number, longtime_rate, narrowband_spectrum, shorttime_probability, wideband_rate,
    AbsorberMode, AbsorberModeSet,
};
use photodetect::dressed::{positive_frequency_op, wideband_positive_op};
use photodetect::hilbert::OperatorMatrix;
use photodetect::models::{build_circuit, build_jc, build_rabi, ModelSystem};
use photodetect::report::{
    AxisSpec, ConvergenceSummary, DetectionReport, ModelDescriptor, Provenance, QuantityKind,
    Series, REPORT_SCHEMA_VERSION,
};
use photodetect::spectrum::{convergence_check, diagonalize, ConvergenceReport, EigenSystem};
use rayon::prelude::*;

use crate::config::{ModelSpec, ScenarioConfig};
use crate::CliError;

/// Everything a scenario run produces.
pub struct RunOutput {
    pub reports: Vec<DetectionReport>,
    pub convergence: Option<ConvergenceReport>,
    pub eigensystem: Option<EigenSystem>,
}

fn numerical(e: photodetect::Error) -> CliError {
    CliError::Failure(e.to_string())
}

/// Model construction errors at run time trace back to config values.
fn config_side(e: photodetect::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl ModelSpec {
    /// Base Fock truncation the config requests (first mode for circuits).
    pub fn base_truncation(&self) -> usize {
        match self {
            ModelSpec::Rabi { n_fock, .. } | ModelSpec::Jc { n_fock, .. } => *n_fock,
            ModelSpec::Circuit(spec) => spec.modes[0].n_fock,
        }
    }

    /// Hilbert-space dimension at the requested truncation, known without
    /// building anything — index validation happens before any eigensolve.
    pub fn dimension(&self) -> usize {
        match self {
            ModelSpec::Rabi { n_fock, .. } | ModelSpec::Jc { n_fock, .. } => 2 * n_fock,
            ModelSpec::Circuit(spec) => {
                spec.modes.iter().map(|m| m.n_fock).product::<usize>()
                    * (1usize << spec.qubits.len())
            }
        }
    }

    /// Build at an explicit base truncation (other circuit modes scale
    /// proportionally).
    pub fn build_at(&self, truncation: usize) -> photodetect::Result<ModelSystem> {
        match self {
            ModelSpec::Rabi {
                omega0,
                omega_a,
                g,
                n_fock: _,
            } => build_rabi(*omega0, *omega_a, *g, truncation),
            ModelSpec::Jc {
                omega0,
                omega_a,
                g,
                n_fock: _,
            } => build_jc(*omega0, *omega_a, *g, truncation),
            ModelSpec::Circuit(spec) => build_circuit(&spec.with_base_truncation(truncation)),
        }
    }

    pub fn build(&self) -> photodetect::Result<ModelSystem> {
        self.build_at(self.base_truncation())
    }

    fn with_coupling(&self, g_new: f64) -> Result<Self, CliError> {
        match self.clone() {
            ModelSpec::Rabi {
                omega0,
                omega_a,
                n_fock,
                ..
            } => Ok(ModelSpec::Rabi {
                omega0,
                omega_a,
                g: g_new,
                n_fock,
            }),
            ModelSpec::Jc {
                omega0,
                omega_a,
                n_fock,
                ..
            } => Ok(ModelSpec::Jc {
                omega0,
                omega_a,
                g: g_new,
                n_fock,
            }),
            ModelSpec::Circuit(_) => Err(CliError::Config(
                "coupling sweeps need a rabi or jc model".into(),
            )),
        }
    }
}

/// The system operator an absorber couples through: the quadrature for the
/// single-mode models, the flux for circuits.
fn detector_coupling_op(model: &ModelSystem) -> photodetect::Result<OperatorMatrix> {
    let name = match model.kind() {
        "circuit" => "flux",
        _ => "quadrature",
    };
    Ok(model.coupling_operator(name)?.clone())
}

/// The bare lowering channel of the same coupling: `a` for the single-mode
/// models, `Σ_m Φ_zpf^(m) a_m` for circuits.
fn absorption_op(model: &ModelSystem) -> photodetect::Result<OperatorMatrix> {
    let space = model.space();
    match model.kind() {
        "circuit" => {
            let mut op = OperatorMatrix::zeros(space);
            for m in 0..space.n_modes() {
                let zpf = model
                    .params()
                    .get(&format!("mode{m}.flux_zpf"))
                    .copied()
                    .unwrap_or(1.0);
                op = op.add(&space.annihilation_op(m)?.scale(zpf))?;
            }
            Ok(op)
        }
        _ => space.annihilation_op(0),
    }
}

fn truncations(model: &ModelSystem) -> Vec<usize> {
    model.space().mode_dims().to_vec()
}

fn descriptor(model: &ModelSystem) -> ModelDescriptor {
    ModelDescriptor {
        kind: model.kind().to_string(),
        params: model.params().clone(),
    }
}

struct Gate {
    requested: usize,
    report: ConvergenceReport,
    warnings: Vec<String>,
}

impl Gate {
    fn certified(&self) -> bool {
        self.report.converged && self.report.recommended == Some(self.requested)
    }

    fn summary(&self) -> ConvergenceSummary {
        ConvergenceSummary {
            requested: self.requested,
            certified: self.certified(),
            converged: self.report.converged,
            recommended: self.report.recommended,
            max_drift: self.report.max_drift(),
            tolerance: self.report.tolerance,
            levels: self.report.levels,
        }
    }
}

/// Certify the requested truncation by one doubling (refusing or warning
/// when it fails, depending on `allow_unconverged`).
fn convergence_gate(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<Gate, CliError> {
    let base = spec.base_truncation();
    let conv = &config.convergence;
    let report = convergence_check(
        |n| spec.build_at(n),
        base,
        conv.levels,
        conv.tol,
        conv.max_dim,
    )
    .map_err(numerical)?;
    let certified = report.converged && report.recommended == Some(base);
    if certified {
        return Ok(Gate {
            requested: base,
            report,
            warnings: vec![],
        });
    }
    let message = match report.recommended {
        Some(n) => format!(
            "truncation {base} is not converged (drift {:.3e} > tol {:.1e}); recommended \
             truncation: {n}",
            report.pair_drifts.first().copied().unwrap_or(f64::NAN),
            report.tolerance
        ),
        None => format!(
            "truncation {base} did not converge within the dimension cap {}; raise \
             convergence.max_dim or loosen convergence.tol",
            report.max_total_dim
        ),
    };
    if allow_unconverged {
        Ok(Gate {
            requested: base,
            report,
            warnings: vec![format!("running unconverged: {message}")],
        })
    } else {
        Err(CliError::Convergence {
            message,
            report: Box::new(report),
        })
    }
}

fn provenance(
    model: &ModelSystem,
    es: &EigenSystem,
    eta: Option<f64>,
    response: Option<String>,
    gate: &Gate,
    extra_warnings: Vec<String>,
) -> Provenance {
    let mut warnings = gate.warnings.clone();
    warnings.extend(extra_warnings);
    Provenance {
        library_version: photodetect::VERSION.to_string(),
        truncation: truncations(model),
        degeneracy_tol: es.degeneracy_tol(),
        eta,
        response,
        convergence: Some(gate.summary()),
        warnings,
    }
}

pub fn run(
    config: &ScenarioConfig,
    scenario: &str,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    if config.scenario.name != scenario {
        return Err(CliError::Config(format!(
            "config declares scenario '{}' but '{scenario}' was requested",
            config.scenario.name
        )));
    }
    let spec = config.model_spec()?;
    match scenario {
        "spectrum-check" => spectrum_check(config, &spec),
        "ground-test" => ground_test(config, &spec, allow_unconverged),
        "sweep" => sweep(config, &spec, allow_unconverged),
        "narrowband" => narrowband(config, &spec, allow_unconverged),
        "shorttime" => shorttime(config, &spec, allow_unconverged),
        "jc-vs-rabi" => jc_vs_rabi(config, &spec, allow_unconverged),
        other => Err(CliError::Config(format!("unknown scenario '{other}'"))),
    }
}

fn spectrum_check(config: &ScenarioConfig, spec: &ModelSpec) -> Result<RunOutput, CliError> {
    let conv = &config.convergence;
    let report = convergence_check(
        |n| spec.build_at(n),
        spec.base_truncation(),
        conv.levels,
        conv.tol,
        conv.max_dim,
    )
    .map_err(numerical)?;
    Ok(RunOutput {
        reports: vec![],
        convergence: Some(report),
        eigensystem: None,
    })
}

fn ground_test(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    if config.scenario.states == Some(0) {
        return Err(CliError::Config("scenario.states must be positive".into()));
    }
    let gate = convergence_gate(config, spec, allow_unconverged)?;
    let model = spec.build().map_err(config_side)?;
    let es = Arc::new(diagonalize(&model).map_err(numerical)?);
    let response = config.detector_response()?;
    let coupling = detector_coupling_op(&model).map_err(numerical)?;
    let xplus = positive_frequency_op(&es, &coupling, &response).map_err(numerical)?;
    let nop = model.coupling_operator("photon_number").map_err(numerical)?;

    let n_states = config.scenario.states.unwrap_or(4).min(es.dim());
    let grid: Vec<f64> = (0..n_states).map(|k| k as f64).collect();
    let mut nbar = Vec::with_capacity(n_states);
    let mut rates = Vec::with_capacity(n_states);
    for k in 0..n_states {
        nbar.push(bare_photon_number(&es, nop, k).map_err(numerical)?);
        rates.push(wideband_rate(&xplus, k).map_err(numerical)?);
    }

    let mut photon_summary = BTreeMap::new();
    photon_summary.insert("bare_photon_number_ground".to_string(), nbar[0]);
    let mut rate_summary = BTreeMap::new();
    rate_summary.insert("wideband_rate_ground".to_string(), rates[0]);
    rate_summary.insert("ground_energy".to_string(), es.energy(0));
    if es.dim() > 1 {
        rate_summary.insert("first_gap".to_string(), es.energy(1) - es.energy(0));
    }

    let prov = provenance(
        &model,
        &es,
        None,
        Some(response.describe()),
        &gate,
        vec![],
    );
    let reports = vec![
        DetectionReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: "ground-test".into(),
            name: "photon-number".into(),
            model: descriptor(&model),
            quantity: QuantityKind::Rate,
            abscissa: AxisSpec::new("eigenstate", "index"),
            value: AxisSpec::new("bare_photon_number", "dimensionless"),
            grid: grid.clone(),
            series: vec![Series {
                label: "bare_photon_number".into(),
                values: nbar,
            }],
            summary: photon_summary,
            provenance: prov.clone(),
        },
        DetectionReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: "ground-test".into(),
            name: "rates".into(),
            model: descriptor(&model),
            quantity: QuantityKind::Rate,
            abscissa: AxisSpec::new("eigenstate", "index"),
            value: AxisSpec::new("wideband_rate", "angular frequency (hbar=1)"),
            grid,
            series: vec![Series {
                label: "wideband_rate".into(),
                values: rates,
            }],
            summary: rate_summary,
            provenance: prov,
        },
    ];
    for r in &reports {
        r.validate().map_err(numerical)?;
    }
    Ok(RunOutput {
        reports,
        convergence: Some(gate.report),
        eigensystem: Some(Arc::try_unwrap(es).unwrap_or_else(|arc| (*arc).clone())),
    })
}

fn sweep(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    let g_grid = config
        .scenario
        .g_grid
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario 'sweep' requires scenario.g_grid".into()))?
        .expand("g_grid")?;
    if g_grid.iter().any(|&g| g < 0.0) {
        return Err(CliError::Config("scenario.g_grid must be non-negative".into()));
    }

    // certify at the strongest coupling of the sweep: it needs the largest basis
    let worst_g = g_grid.iter().cloned().fold(0.0, f64::max);
    let worst = spec.with_coupling(worst_g)?;
    let gate = convergence_gate(config, &worst, allow_unconverged)?;

    let response = config.detector_response()?;
    let points: Vec<(f64, f64)> = g_grid
        .par_iter()
        .map(|&g| -> Result<(f64, f64), CliError> {
            let model = spec.with_coupling(g)?.build().map_err(config_side)?;
            let es = Arc::new(diagonalize(&model).map_err(numerical)?);
            let coupling = detector_coupling_op(&model).map_err(numerical)?;
            let xplus = positive_frequency_op(&es, &coupling, &response).map_err(numerical)?;
            let nop = model.coupling_operator("photon_number").map_err(numerical)?;
            let nbar0 = bare_photon_number(&es, nop, 0).map_err(numerical)?;
            let rate0 = wideband_rate(&xplus, 0).map_err(numerical)?;
            Ok((nbar0, rate0))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let model = spec.with_coupling(worst_g)?.build().map_err(config_side)?;
    let es = diagonalize(&model).map_err(numerical)?;
    let prov = provenance(
        &model,
        &es,
        None,
        Some(response.describe()),
        &gate,
        vec![],
    );

    let nbar: Vec<f64> = points.iter().map(|p| p.0).collect();
    let rates: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut photon_summary = BTreeMap::new();
    photon_summary.insert(
        "max_bare_photon_number_ground".into(),
        nbar.iter().cloned().fold(0.0, f64::max),
    );
    let mut rate_summary = BTreeMap::new();
    rate_summary.insert(
        "max_wideband_rate_ground".into(),
        rates.iter().cloned().fold(0.0, f64::max),
    );

    let reports = vec![
        DetectionReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: "sweep".into(),
            name: "photon-number".into(),
            model: descriptor(&model),
            quantity: QuantityKind::Rate,
            abscissa: AxisSpec::new("g", "angular frequency (hbar=1)"),
            value: AxisSpec::new("bare_photon_number_ground", "dimensionless"),
            grid: g_grid.clone(),
            series: vec![Series {
                label: "bare_photon_number_ground".into(),
                values: nbar,
            }],
            summary: photon_summary,
            provenance: prov.clone(),
        },
        DetectionReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: "sweep".into(),
            name: "rates".into(),
            model: descriptor(&model),
            quantity: QuantityKind::Rate,
            abscissa: AxisSpec::new("g", "angular frequency (hbar=1)"),
            value: AxisSpec::new("wideband_rate_ground", "angular frequency (hbar=1)"),
            grid: g_grid,
            series: vec![Series {
                label: "wideband_rate_ground".into(),
                values: rates,
            }],
            summary: rate_summary,
            provenance: prov,
        },
    ];
    for r in &reports {
        r.validate().map_err(numerical)?;
    }
    Ok(RunOutput {
        reports,
        convergence: Some(gate.report),
        eigensystem: None,
    })
}

fn narrowband(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    let s = &config.scenario;
    let initial = s
        .initial
        .ok_or_else(|| CliError::Config("scenario 'narrowband' requires scenario.initial".into()))?;
    let g_det = s.detector_coupling.ok_or_else(|| {
        CliError::Config("scenario 'narrowband' requires scenario.detector_coupling".into())
    })?;
    let omega_grid = s
        .omega_d_grid
        .as_ref()
        .ok_or_else(|| {
            CliError::Config("scenario 'narrowband' requires scenario.omega_d_grid".into())
        })?
        .expand("omega_d_grid")?;

    if initial >= spec.dimension() {
        return Err(CliError::Config(format!(
            "scenario.initial = {initial} exceeds the basis dimension {}",
            spec.dimension()
        )));
    }
    let gate = convergence_gate(config, spec, allow_unconverged)?;
    let model = spec.build().map_err(config_side)?;
    let es = Arc::new(diagonalize(&model).map_err(numerical)?);
    let eta = s.eta.unwrap_or(0.01 * model.characteristic_frequency());
    let coupling = detector_coupling_op(&model).map_err(numerical)?;
    let oplus = wideband_positive_op(&es, &coupling).map_err(numerical)?;
    let spectrum =
        narrowband_spectrum(&oplus, initial, g_det, &omega_grid, eta).map_err(|e| match e {
            photodetect::Error::InvalidParameter(_) => config_side(e),
            other => numerical(other),
        })?;

    // merge lines that share a (snapped) transition frequency
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut sorted = spectrum.peaks.clone();
    sorted.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
    for p in sorted {
        match merged.last_mut() {
            Some((f, w)) if *f == p.frequency => *w += p.weight,
            _ => merged.push((p.frequency, p.weight)),
        }
    }

    let integral = spectrum.analytic_integral(None);
    let product = oplus.adjoint().matrix() * oplus.matrix();
    let sum_rule_rhs = 2.0 * std::f64::consts::PI * g_det * g_det * product[(initial, initial)].re;

    let mut summary = BTreeMap::new();
    summary.insert("integral_full_line".into(), integral);
    summary.insert("sum_rule_contraction".into(), sum_rule_rhs);
    summary.insert("initial_energy".into(), es.energy(initial));

    let prov = provenance(&model, &es, Some(eta), None, &gate, vec![]);
    let mut reports = vec![DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: "narrowband".into(),
        name: "spectrum".into(),
        model: descriptor(&model),
        quantity: QuantityKind::Spectrum,
        abscissa: AxisSpec::new("omega_d", "angular frequency (hbar=1)"),
        value: AxisSpec::new("rate", "angular frequency (hbar=1)"),
        grid: spectrum.omega.clone(),
        series: vec![Series {
            label: "rate".into(),
            values: spectrum.rate.clone(),
        }],
        summary,
        provenance: prov.clone(),
    }];
    reports.push(DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: "narrowband".into(),
        name: "peaks".into(),
        model: descriptor(&model),
        quantity: QuantityKind::Spectrum,
        abscissa: AxisSpec::new("transition_frequency", "angular frequency (hbar=1)"),
        value: AxisSpec::new("integrated_weight", "angular frequency (hbar=1)"),
        grid: merged.iter().map(|p| p.0).collect(),
        series: vec![Series {
            label: "integrated_weight".into(),
            values: merged.iter().map(|p| p.1).collect(),
        }],
        summary: BTreeMap::new(),
        provenance: prov,
    });
    for r in &reports {
        r.validate().map_err(numerical)?;
    }
    Ok(RunOutput {
        reports,
        convergence: Some(gate.report),
        eigensystem: Some(Arc::try_unwrap(es).unwrap_or_else(|arc| (*arc).clone())),
    })
}

fn parse_absorbers(raw: &[[f64; 2]]) -> Result<AbsorberModeSet, CliError> {
    AbsorberModeSet::new(
        raw.iter()
            .map(|&[frequency, coupling]| AbsorberMode {
                frequency,
                coupling,
            })
            .collect(),
    )
    .map_err(|e| CliError::Config(format!("scenario.absorbers: {e}")))
}

/// Least-squares slope and intercept of ln(y) against ln(x).
fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Some((slope, intercept))
}

struct ShorttimeCurve {
    probabilities: Vec<f64>,
    prefactor_direct: f64,
    slope: Option<f64>,
    prefactor_fit: Option<f64>,
}

fn shorttime_curve(
    model: &ModelSystem,
    es: &EigenSystem,
    absorbers: &AbsorberModeSet,
    initial: usize,
    t_grid: &[f64],
) -> Result<ShorttimeCurve, CliError> {
    let a_op = absorption_op(model).map_err(numerical)?;
    let probabilities: Vec<f64> = t_grid
        .iter()
        .map(|&t| shorttime_probability(es, &a_op, absorbers, initial, t))
        .collect::<photodetect::Result<_>>()
        .map_err(|e| match e {
            photodetect::Error::InvalidParameter(_) => CliError::Config(e.to_string()),
            other => numerical(other),
        })?;

    // Σ_{n,k} |g_n <E_k|A|E_i>|² = (Σ g_n²) <E_i|A†A|E_i> by completeness
    let g2_total: f64 = absorbers.modes().iter().map(|m| m.coupling * m.coupling).sum();
    let ata = a_op.adjoint().mul(&a_op).map_err(numerical)?;
    let prefactor_direct = g2_total
        * es.expectation(&ata, initial)
            .map_err(numerical)?
            .re;

    // fit P ~ C t^slope over the early-time window t·ω_max ∈ [1e-4, 1e-2]
    let omega_max = absorbers.max_transition_frequency(es, initial);
    let window: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(&probabilities)
        .filter(|(&t, _)| {
            let x = t * omega_max;
            (1e-4..=1e-2).contains(&x)
        })
        .map(|(&t, &p)| (t, p))
        .collect();
    let (slope, prefactor_fit) = match loglog_fit(
        &window.iter().map(|p| p.0).collect::<Vec<_>>(),
        &window.iter().map(|p| p.1).collect::<Vec<_>>(),
    ) {
        Some((slope, intercept)) => (Some(slope), Some(intercept.exp())),
        None => (None, None),
    };
    Ok(ShorttimeCurve {
        probabilities,
        prefactor_direct,
        slope,
        prefactor_fit,
    })
}

fn shorttime(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    let s = &config.scenario;
    let t_grid = s
        .t_grid
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario 'shorttime' requires scenario.t_grid".into()))?
        .expand("t_grid")?;
    if t_grid.iter().any(|&t| t < 0.0) {
        return Err(CliError::Config("scenario.t_grid must be non-negative".into()));
    }
    let absorbers = parse_absorbers(s.absorbers.as_ref().ok_or_else(|| {
        CliError::Config("scenario 'shorttime' requires scenario.absorbers".into())
    })?)?;
    let initial = s.initial.unwrap_or(0);
    if initial >= spec.dimension() {
        return Err(CliError::Config(format!(
            "scenario.initial = {initial} exceeds the basis dimension {}",
            spec.dimension()
        )));
    }

    let gate = convergence_gate(config, spec, allow_unconverged)?;
    let model = spec.build().map_err(config_side)?;
    let es = diagonalize(&model).map_err(numerical)?;
    let curve = shorttime_curve(&model, &es, &absorbers, initial, &t_grid)?;

    let max_p = curve.probabilities.iter().cloned().fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if max_p > 0.1 {
        warnings.push(format!(
            "P(t) reaches {max_p:.3}: first-order perturbation theory is untrustworthy above 0.1"
        ));
    }

    // the long-time side of the same experiment: the golden-rule rate at the
    // reported line width
    let eta = s.eta.unwrap_or(0.01 * model.characteristic_frequency());
    let a_op = absorption_op(&model).map_err(numerical)?;
    let late_rate = longtime_rate(&es, &a_op, &absorbers, initial, eta).map_err(numerical)?;

    let mut summary = BTreeMap::new();
    summary.insert("prefactor_direct_sum".into(), curve.prefactor_direct);
    summary.insert("longtime_rate".into(), late_rate);
    if let Some(slope) = curve.slope {
        summary.insert("early_time_slope".into(), slope);
    }
    if let Some(c) = curve.prefactor_fit {
        summary.insert("prefactor_fit".into(), c);
    }

    let prov = provenance(&model, &es, Some(eta), None, &gate, warnings);
    let report = DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: "shorttime".into(),
        name: "probability".into(),
        model: descriptor(&model),
        quantity: QuantityKind::TimeSeries,
        abscissa: AxisSpec::new("t", "1/angular frequency (hbar=1)"),
        value: AxisSpec::new("probability", "dimensionless"),
        grid: t_grid,
        series: vec![Series {
            label: "probability".into(),
            values: curve.probabilities,
        }],
        summary,
        provenance: prov,
    };
    report.validate().map_err(numerical)?;
    Ok(RunOutput {
        reports: vec![report],
        convergence: Some(gate.report),
        eigensystem: Some(es),
    })
}

fn jc_vs_rabi(
    config: &ScenarioConfig,
    spec: &ModelSpec,
    allow_unconverged: bool,
) -> Result<RunOutput, CliError> {
    let s = &config.scenario;
    let t_grid = s
        .t_grid
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario 'jc-vs-rabi' requires scenario.t_grid".into()))?
        .expand("t_grid")?;
    if t_grid.iter().any(|&t| t < 0.0) {
        return Err(CliError::Config("scenario.t_grid must be non-negative".into()));
    }
    let absorbers = parse_absorbers(s.absorbers.as_ref().ok_or_else(|| {
        CliError::Config("scenario 'jc-vs-rabi' requires scenario.absorbers".into())
    })?)?;
    let initial = s.initial.unwrap_or(0);
    if initial >= spec.dimension() {
        return Err(CliError::Config(format!(
            "scenario.initial = {initial} exceeds the basis dimension {}",
            spec.dimension()
        )));
    }

    let (omega0, omega_a, g, n_fock) = match *spec {
        ModelSpec::Rabi {
            omega0,
            omega_a,
            g,
            n_fock,
        }
        | ModelSpec::Jc {
            omega0,
            omega_a,
            g,
            n_fock,
        } => (omega0, omega_a, g, n_fock),
        ModelSpec::Circuit(_) => {
            return Err(CliError::Config(
                "scenario 'jc-vs-rabi' needs a rabi or jc model block".into(),
            ))
        }
    };
    let rabi_spec = ModelSpec::Rabi {
        omega0,
        omega_a,
        g,
        n_fock,
    };
    // the full model is the harder one to converge; one gate covers both
    let gate = convergence_gate(config, &rabi_spec, allow_unconverged)?;

    let response = config.detector_response()?;
    let mut curves = Vec::new();
    let mut summary = BTreeMap::new();
    let mut rabi_model_for_report = None;
    for label in ["rabi", "jc"] {
        let model = match label {
            "rabi" => build_rabi(omega0, omega_a, g, n_fock),
            _ => build_jc(omega0, omega_a, g, n_fock),
        }
        .map_err(config_side)?;
        let es = Arc::new(diagonalize(&model).map_err(numerical)?);
        let curve = shorttime_curve(&model, &es, &absorbers, initial, &t_grid)?;
        let coupling = detector_coupling_op(&model).map_err(numerical)?;
        let xplus = positive_frequency_op(&es, &coupling, &response).map_err(numerical)?;
        let nop = model.coupling_operator("photon_number").map_err(numerical)?;
        summary.insert(
            format!("bare_photon_number_ground_{label}"),
            bare_photon_number(&es, nop, 0).map_err(numerical)?,
        );
        summary.insert(
            format!("wideband_rate_ground_{label}"),
            wideband_rate(&xplus, 0).map_err(numerical)?,
        );
        summary.insert(
            format!("shorttime_prefactor_{label}"),
            curve.prefactor_direct,
        );
        curves.push(Series {
            label: format!("{label}_probability"),
            values: curve.probabilities,
        });
        if label == "rabi" {
            rabi_model_for_report = Some((model, es));
        }
    }

    let (model, es) = rabi_model_for_report.expect("rabi branch ran");
    let prov = provenance(
        &model,
        &es,
        None,
        Some(response.describe()),
        &gate,
        vec![],
    );
    let report = DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: "jc-vs-rabi".into(),
        name: "shorttime-comparison".into(),
        model: descriptor(&model),
        quantity: QuantityKind::TimeSeries,
        abscissa: AxisSpec::new("t", "1/angular frequency (hbar=1)"),
        value: AxisSpec::new("probability", "dimensionless"),
        grid: t_grid,
        series: curves,
        summary,
        provenance: prov,
    };
    report.validate().map_err(numerical)?;
    Ok(RunOutput {
        reports: vec![report],
        convergence: Some(gate.report),
        eigensystem: None,
    })
}
