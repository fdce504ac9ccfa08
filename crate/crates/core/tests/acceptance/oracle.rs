//! Brute-force reference implementations used to freeze expected values.
//!
//! Everything here is deliberately independent of the library: matrices are
//! plain `Vec<Vec<f64>>` in a qubit-major basis ordering (index = q * n_fock + n,
//! opposite to the library's mode-major ordering), and the eigensolver is a
//! cyclic Jacobi iteration rather than a tridiagonalization method. Agreement
//! between the two routes is therefore a real cross-check, not a tautology.

// index juggling mirrors the sweep algorithm; iterator form would obscure it
#![allow(clippy::needless_range_loop)]

/// Dense real symmetric matrix as rows.
pub type Mat = Vec<Vec<f64>>;

fn zeros(dim: usize) -> Mat {
    vec![vec![0.0; dim]; dim]
}

/// Quantum Rabi Hamiltonian in the bare qubit-major basis:
/// index i = q * n_fock + n with q = 0 (ground), 1 (excited).
/// H = w0 a†a + (wa/2) σz + g σx (a + a†), σz|g> = -|g>.
pub fn rabi_matrix(w0: f64, wa: f64, g: f64, n_fock: usize) -> Mat {
    let dim = 2 * n_fock;
    let mut h = zeros(dim);
    let idx = |q: usize, n: usize| q * n_fock + n;
    for q in 0..2 {
        let sz = if q == 1 { 1.0 } else { -1.0 };
        for n in 0..n_fock {
            h[idx(q, n)][idx(q, n)] = w0 * n as f64 + 0.5 * wa * sz;
            // g σx (a + a†): flips q, shifts n by ±1
            if n + 1 < n_fock {
                let amp = g * ((n + 1) as f64).sqrt();
                h[idx(1 - q, n + 1)][idx(q, n)] += amp;
            }
            if n > 0 {
                let amp = g * (n as f64).sqrt();
                h[idx(1 - q, n - 1)][idx(q, n)] += amp;
            }
        }
    }
    h
}

/// Jaynes-Cummings Hamiltonian, same basis conventions as `rabi_matrix`.
/// H = w0 a†a + (wa/2) σz + g (σ- a† + σ+ a).
pub fn jc_matrix(w0: f64, wa: f64, g: f64, n_fock: usize) -> Mat {
    let dim = 2 * n_fock;
    let mut h = zeros(dim);
    let idx = |q: usize, n: usize| q * n_fock + n;
    for q in 0..2 {
        let sz = if q == 1 { 1.0 } else { -1.0 };
        for n in 0..n_fock {
            h[idx(q, n)][idx(q, n)] = w0 * n as f64 + 0.5 * wa * sz;
        }
    }
    // σ- a† |e, n> = sqrt(n+1) |g, n+1>, plus the Hermitian conjugate
    for n in 0..n_fock - 1 {
        let amp = g * ((n + 1) as f64).sqrt();
        h[idx(0, n + 1)][idx(1, n)] += amp;
        h[idx(1, n)][idx(0, n + 1)] += amp;
    }
    h
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
/// Returns (eigenvalues ascending, eigenvectors as columns: vecs[k][i]).
pub fn jacobi_eigh(mut a: Mat) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = zeros(n);
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let tol = 1e-14 * frob.max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p][q].abs());
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let energies: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i][k]).collect())
        .collect();
    (energies, vectors)
}

/// Apply (a + a†) to a state vector in the qubit-major basis.
pub fn apply_quadrature(n_fock: usize, state: &[f64]) -> Vec<f64> {
    let dim = 2 * n_fock;
    let mut out = vec![0.0; dim];
    let idx = |q: usize, n: usize| q * n_fock + n;
    for q in 0..2 {
        for n in 0..n_fock {
            let amp = state[idx(q, n)];
            if amp == 0.0 {
                continue;
            }
            if n > 0 {
                out[idx(q, n - 1)] += (n as f64).sqrt() * amp; // a
            }
            if n + 1 < n_fock {
                out[idx(q, n + 1)] += ((n + 1) as f64).sqrt() * amp; // a†
            }
        }
    }
    out
}

/// Apply the bare annihilation operator a.
pub fn apply_annihilation(n_fock: usize, state: &[f64]) -> Vec<f64> {
    let dim = 2 * n_fock;
    let mut out = vec![0.0; dim];
    let idx = |q: usize, n: usize| q * n_fock + n;
    for q in 0..2 {
        for n in 1..n_fock {
            out[idx(q, n - 1)] += (n as f64).sqrt() * state[idx(q, n)];
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// <state| a†a |state> in the qubit-major basis.
pub fn photon_number(n_fock: usize, state: &[f64]) -> f64 {
    let idx = |q: usize, n: usize| q * n_fock + n;
    let mut acc = 0.0;
    for q in 0..2 {
        for n in 0..n_fock {
            acc += n as f64 * state[idx(q, n)] * state[idx(q, n)];
        }
    }
    acc
}

/// <state| Π |state> with Π = (-1)^(a†a + σ+σ-).
pub fn parity_expectation(n_fock: usize, state: &[f64]) -> f64 {
    let idx = |q: usize, n: usize| q * n_fock + n;
    let mut acc = 0.0;
    for q in 0..2 {
        for n in 0..n_fock {
            let sign = if (n + q) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * state[idx(q, n)] * state[idx(q, n)];
        }
    }
    acc
}

/// Flat-response wide-band rate from eigenstate `initial`:
/// Σ_{k: E_k < E_i - eps} |<E_k| (a+a†) |E_i>|².
pub fn wideband_rate_quadrature(
    n_fock: usize,
    energies: &[f64],
    vectors: &[Vec<f64>],
    initial: usize,
    eps: f64,
) -> f64 {
    let applied = apply_quadrature(n_fock, &vectors[initial]);
    let mut rate = 0.0;
    for (k, vk) in vectors.iter().enumerate() {
        if energies[initial] - energies[k] > eps {
            let amp = dot(vk, &applied);
            rate += amp * amp;
        }
    }
    rate
}

/// Thermal mixture rate: populations P_j ∝ exp(-E_j / temperature) over the
/// full truncated spectrum.
pub fn thermal_rate_quadrature(
    n_fock: usize,
    energies: &[f64],
    vectors: &[Vec<f64>],
    temperature: f64,
    eps: f64,
) -> f64 {
    let e0 = energies[0];
    let weights: Vec<f64> = energies
        .iter()
        .map(|e| (-(e - e0) / temperature).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let mut rate = 0.0;
    for j in 0..energies.len() {
        let p = weights[j] / z;
        if p < 1e-18 {
            continue;
        }
        rate += p * wideband_rate_quadrature(n_fock, energies, vectors, j, eps);
    }
    rate
}

/// Doubling convergence loop matching the library's definition:
/// drift_k = |E_k(2n) - E_k(n)| / max(|E_k(2n)|, f_char), f_char = 1 here.
/// Returns (truncations tested, per-pair max drifts, recommended truncation).
pub fn convergence_loop(
    w0: f64,
    wa: f64,
    g: f64,
    base: usize,
    levels: usize,
    tol: f64,
    max_dim: usize,
) -> (Vec<usize>, Vec<f64>, Option<usize>) {
    let mut truncations = vec![base];
    let mut drifts = Vec::new();
    let mut prev = jacobi_eigh(rabi_matrix(w0, wa, g, base)).0;
    let mut n = base;
    loop {
        let next_n = 2 * n;
        if 2 * next_n > max_dim {
            return (truncations, drifts, None);
        }
        let cur = jacobi_eigh(rabi_matrix(w0, wa, g, next_n)).0;
        let m = levels.min(prev.len()).min(cur.len());
        let drift = (0..m)
            .map(|k| (cur[k] - prev[k]).abs() / cur[k].abs().max(1.0))
            .fold(0.0, f64::max);
        truncations.push(next_n);
        drifts.push(drift);
        if drift < tol {
            return (truncations, drifts, Some(n));
        }
        prev = cur;
        n = next_n;
    }
}
