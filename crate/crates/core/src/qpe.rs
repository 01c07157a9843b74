//! Dense quantum Fourier transform and textbook phase estimation.
//!
//! The ancilla register is treated as one integer index, so the inverse
//! transform is applied as the full `F_N†` matrix action and outcome `k`
//! directly labels the phase estimate `k/2^m` — the bit-reversal swap network
//! of the qubit-level circuit is already folded in.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::caps;
use crate::linalg::{self, CVec, ComplexMatrix};
use crate::tol;

#[derive(Debug, Error)]
pub enum QpeError {
    #[error("{0} qubits exceeds the dense transform cap of {1}")]
    TooManyQubits(usize, usize),
    #[error("input is not an eigenvector (residual {0:.3e})")]
    NotAnEigenvector(f64),
    #[error("operator is not unitary within {0:e}")]
    NotUnitary(f64),
    #[error("failure probability must lie strictly inside (0,1), got {0}")]
    InvalidFailureProbability(f64),
    #[error("state has wrong dimension: got {0}, expected {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Dense Fourier matrix `F_N` with entries `ω^{jk}/√N`, `ω = e^{2πi/N}`,
/// `N = 2^n`. `qft(1)` is the Hadamard matrix.
pub fn qft(n_qubits: usize) -> Result<ComplexMatrix, QpeError> {
    if n_qubits > caps::MAX_QFT_QUBITS {
        return Err(QpeError::TooManyQubits(n_qubits, caps::MAX_QFT_QUBITS));
    }
    let n = 1usize << n_qubits;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::from_polar(scale, TAU * (j as f64) * (k as f64) / n as f64)
    }))
}

/// Exact outcome distribution of an `m`-bit phase estimation; outcome `k`
/// estimates the phase as `k/2^m` (as a fraction of a full turn).
#[derive(Debug, Clone)]
pub struct PhaseEstimate {
    m_bits: usize,
    probs: Vec<f64>,
}

impl PhaseEstimate {
    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn outcome_phase(&self, k: usize) -> f64 {
        k as f64 / self.probs.len() as f64
    }

    pub fn most_likely(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap()
    }

    /// Total probability of outcomes within circular distance `radius` of
    /// `phase` (both as fractions of a turn).
    pub fn prob_within(&self, phase: f64, radius: f64) -> f64 {
        let n = self.probs.len() as f64;
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let d = (*k as f64 / n - phase).rem_euclid(1.0);
                d.min(1.0 - d) <= radius + 1e-15
            })
            .map(|(_, p)| p)
            .sum()
    }
}

/// Ancilla count for `t` accurate bits at failure probability `p_f`:
/// `m = t + ⌈log₂(1/2 + 1/(2·p_f))⌉`.
pub fn ancilla_bits_for(t_bits: usize, p_f: f64) -> Result<usize, QpeError> {
    if !(p_f > 0.0 && p_f < 1.0) {
        return Err(QpeError::InvalidFailureProbability(p_f));
    }
    let pad = (0.5 + 1.0 / (2.0 * p_f)).log2().ceil() as usize;
    Ok(t_bits + pad)
}

fn check_unitary(u: &ComplexMatrix) -> Result<(), QpeError> {
    if !u.is_unitary(tol::UNITARITY_TOL)? {
        return Err(QpeError::NotUnitary(tol::UNITARITY_TOL));
    }
    Ok(())
}

/// Kickback amplitudes for an exact eigenvector: the ancilla register after
/// the controlled powers is `Σ_j μ^j |j⟩ / √M`, computed term by term.
fn eigen_kickback(mu: Complex64, m_bits: usize) -> CVec {
    let m = 1usize << m_bits;
    let scale = 1.0 / (m as f64).sqrt();
    let mut anc = Vec::with_capacity(m);
    let mut cur = Complex64::new(scale, 0.0);
    for _ in 0..m {
        anc.push(cur);
        cur *= mu;
    }
    anc
}

/// Inverse Fourier transform of an ancilla vector, applied as the dense
/// `F†` action without materializing the matrix.
fn inverse_qft_vec(anc: &[Complex64]) -> CVec {
    let m = anc.len();
    let scale = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|k| {
            let mut acc = Complex64::default();
            for (j, &a) in anc.iter().enumerate() {
                acc += a * Complex64::from_polar(1.0, -TAU * (j as f64) * (k as f64) / m as f64);
            }
            acc * scale
        })
        .collect()
}

/// Strict phase estimation: `eigenstate` must be an eigenvector of `U` within
/// [`tol::EIGENVECTOR_TOL`]. The outcome distribution of the standard circuit
/// (controlled powers followed by the inverse transform) is returned exactly;
/// a dyadic eigenphase `k/2^m` yields outcome `k` with probability 1.
pub fn phase_estimate(
    u: &ComplexMatrix,
    eigenstate: &[Complex64],
    m_bits: usize,
) -> Result<PhaseEstimate, QpeError> {
    if m_bits > caps::MAX_QFT_QUBITS {
        return Err(QpeError::TooManyQubits(m_bits, caps::MAX_QFT_QUBITS));
    }
    if eigenstate.len() != u.rows() {
        return Err(QpeError::DimensionMismatch(eigenstate.len(), u.rows()));
    }
    check_unitary(u)?;
    let applied = u.matvec(eigenstate);
    let mu = linalg::inner(eigenstate, &applied);
    let residual: f64 = applied
        .iter()
        .zip(eigenstate)
        .map(|(a, e)| (a - mu * e).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > tol::EIGENVECTOR_TOL {
        return Err(QpeError::NotAnEigenvector(residual));
    }
    let anc = inverse_qft_vec(&eigen_kickback(mu, m_bits));
    let probs = anc.iter().map(|z| z.norm_sqr()).collect();
    Ok(PhaseEstimate { m_bits, probs })
}

/// Permissive phase estimation for arbitrary input states: the outcome
/// distribution is the mixture of the eigencomponent distributions, obtained
/// by simulating the joint ancilla ⊗ system circuit.
pub fn phase_estimate_mixture(
    u: &ComplexMatrix,
    state: &[Complex64],
    m_bits: usize,
) -> Result<PhaseEstimate, QpeError> {
    let joint = qpe_joint_state(u, state, m_bits)?;
    let dim = state.len();
    let probs = joint
        .chunks(dim)
        .map(|block| block.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    Ok(PhaseEstimate { m_bits, probs })
}

/// Run the full circuit on ancilla ⊗ system, returning the joint state as
/// `2^m` contiguous system blocks. Controlled powers `U^{2^b}` come from
/// repeated squaring of the dense operator.
fn qpe_joint_state(
    u: &ComplexMatrix,
    state: &[Complex64],
    m_bits: usize,
) -> Result<CVec, QpeError> {
    if m_bits > caps::MAX_QFT_QUBITS {
        return Err(QpeError::TooManyQubits(m_bits, caps::MAX_QFT_QUBITS));
    }
    let dim = state.len();
    if dim != u.rows() {
        return Err(QpeError::DimensionMismatch(dim, u.rows()));
    }
    check_unitary(u)?;
    let m = 1usize << m_bits;
    let scale = 1.0 / (m as f64).sqrt();
    let mut joint: Vec<CVec> = (0..m)
        .map(|_| state.iter().map(|z| z * scale).collect())
        .collect();
    let mut power = u.clone();
    for b in 0..m_bits {
        for (j, block) in joint.iter_mut().enumerate() {
            if (j >> b) & 1 == 1 {
                *block = power.matvec(block);
            }
        }
        if b + 1 < m_bits {
            power = power.matmul(&power)?;
        }
    }
    // Inverse transform over the ancilla index, one system block at a time.
    let mut out = vec![Complex64::default(); m * dim];
    for k in 0..m {
        let row = &mut out[k * dim..(k + 1) * dim];
        for (j, block) in joint.iter().enumerate() {
            let w = Complex64::from_polar(scale, -TAU * (j as f64) * (k as f64) / m as f64);
            for (o, v) in row.iter_mut().zip(block) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// Sample one measurement of the ancilla register and collapse the system:
/// returns the outcome `k` and the renormalized post-measurement system state.
pub fn qpe_sample_and_collapse(
    u: &ComplexMatrix,
    state: &[Complex64],
    m_bits: usize,
    rng: &mut impl Rng,
) -> Result<(usize, CVec), QpeError> {
    let dim = state.len();
    let joint = qpe_joint_state(u, state, m_bits)?;
    let m = 1usize << m_bits;
    let mut masses = Vec::with_capacity(m);
    let mut total = 0.0;
    for k in 0..m {
        let mass: f64 = joint[k * dim..(k + 1) * dim].iter().map(|z| z.norm_sqr()).sum();
        total += mass;
        masses.push(mass);
    }
    let draw: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = m - 1;
    for (k, &mass) in masses.iter().enumerate() {
        acc += mass;
        if draw < acc {
            outcome = k;
            break;
        }
    }
    let mut collapsed: CVec = joint[outcome * dim..(outcome + 1) * dim].to_vec();
    linalg::normalize(&mut collapsed);
    Ok((outcome, collapsed))
}
