//! Grover search and amplitude amplification as exact statevector
//! computations: the plain rotation pair, the monotone π/3 recursion, and the
//! Chebyshev fixed-point sequence with its generalized phase angles.
//!
//! Oracles and diffusion operators are built as explicit dense reflection
//! matrices; nothing is compiled to gates.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::caps;
use crate::linalg::{self, CVec, ComplexMatrix, RealMatrix};
use crate::tol;

#[derive(Debug, Error)]
pub enum AmplitudeError {
    #[error("marked set must satisfy 0 < |M| < N (got |M| = {m}, N = {n})")]
    InvalidMarkedSet { m: usize, n: usize },
    #[error("marked index {0} out of range for {1} states")]
    MarkedOutOfRange(usize, usize),
    #[error("preparer must be unitary within {0:e}")]
    NotUnitary(f64),
    #[error("sequence length L must be odd and ≥ 1, got {0}")]
    EvenLength(u64),
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("recursion depth {0} exceeds cap {1} (operator count 3^m)")]
    DepthTooLarge(u32, u32),
    #[error("chebyshev continuation needs |x| ≥ 1, got {0}")]
    BelowContinuationRange(f64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

// ---------------------------------------------------------------------------
// Search instances and Grover iteration
// ---------------------------------------------------------------------------

/// Unstructured search over `2^n` items with a marked subset.
#[derive(Debug, Clone)]
pub struct SearchInstance {
    n_qubits: usize,
    marked: BTreeSet<usize>,
}

impl SearchInstance {
    pub fn new(n_qubits: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self, AmplitudeError> {
        let n = 1usize << n_qubits;
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if let Some(&bad) = marked.iter().find(|&&m| m >= n) {
            return Err(AmplitudeError::MarkedOutOfRange(bad, n));
        }
        if marked.is_empty() || marked.len() >= n {
            return Err(AmplitudeError::InvalidMarkedSet { m: marked.len(), n });
        }
        Ok(Self { n_qubits, marked })
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    /// Rotation half-angle `θ = arcsin √(M/N)`.
    pub fn theta(&self) -> f64 {
        (self.marked.len() as f64 / self.num_states() as f64).sqrt().asin()
    }
}

/// Dense phase oracle: −1 on marked items.
fn oracle_matrix(inst: &SearchInstance) -> RealMatrix {
    let n = inst.num_states();
    RealMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if inst.marked.contains(&i) {
            -1.0
        } else {
            1.0
        }
    })
}

/// Dense diffusion `1 − 2|u⟩⟨u|` about the uniform state.
fn diffusion_matrix(n: usize) -> RealMatrix {
    let two_over_n = 2.0 / n as f64;
    RealMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - two_over_n
    })
}

/// Success probability on the marked set after each of `0, 1, …, t_max` Grover
/// rounds, from the uniform start.
pub fn grover_success_curve(inst: &SearchInstance, t_max: u64) -> Vec<f64> {
    let n = inst.num_states();
    let oracle = oracle_matrix(inst);
    let diffusion = diffusion_matrix(n);
    let mut state = vec![1.0 / (n as f64).sqrt(); n];
    let mass = |v: &[f64]| inst.marked.iter().map(|&m| v[m] * v[m]).sum::<f64>();
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(mass(&state));
    for _ in 0..t_max {
        state = diffusion.matvec(&oracle.matvec(&state));
        out.push(mass(&state));
    }
    out
}

/// Marked-set probability after `t` Grover rounds; equals `sin²((2t+1)θ)`.
pub fn grover_success_probability(inst: &SearchInstance, t: u64) -> f64 {
    *grover_success_curve(inst, t).last().unwrap()
}

/// Round count maximizing the success probability, found by scanning integers
/// near `(π/4)√(N/M) − 1/2` (ties break toward fewer rounds).
pub fn optimal_iterations(n: u64, m: u64) -> Result<u64, AmplitudeError> {
    if m == 0 || m >= n {
        return Err(AmplitudeError::InvalidMarkedSet { m: m as usize, n: n as usize });
    }
    let theta = ((m as f64 / n as f64).sqrt()).asin();
    let guess = (PI / (4.0 * theta) - 0.5).max(0.0);
    let center = guess.round() as i64;
    let p = |t: i64| ((2 * t + 1) as f64 * theta).sin().powi(2);
    let mut best_t = 0i64;
    let mut best_p = p(0);
    for t in (center - 2).max(0)..=center + 2 {
        let pt = p(t);
        if pt > best_p + 1e-12 {
            best_p = pt;
            best_t = t;
        }
    }
    Ok(best_t as u64)
}

// ---------------------------------------------------------------------------
// Amplitude amplification
// ---------------------------------------------------------------------------

/// A unitary preparer together with the target projector it is amplified
/// against. The start state is `A` applied to basis state 0, and
/// `λ = ‖Π_t A|0⟩‖²` is the one-shot success probability.
#[derive(Debug, Clone)]
pub struct AmplitudeProcess {
    a: ComplexMatrix,
    target: Vec<bool>,
    lambda: f64,
}

impl AmplitudeProcess {
    pub fn new(a: ComplexMatrix, target: Vec<bool>) -> Result<Self, AmplitudeError> {
        if !a.is_unitary(tol::UNITARITY_TOL)? {
            return Err(AmplitudeError::NotUnitary(tol::UNITARITY_TOL));
        }
        assert_eq!(target.len(), a.rows(), "target mask length mismatch");
        let prepared = a.matvec(&basis_state(a.rows(), 0));
        let lambda = masked_mass(&prepared, &target);
        Ok(Self { a, target, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    fn prepared_state(&self) -> CVec {
        self.a.matvec(&basis_state(self.dim(), 0))
    }

    /// `1 − (1 − e^{iφ})|0⟩⟨0|`: phase reflection about the start basis state.
    fn start_reflection(&self, phase: f64) -> ComplexMatrix {
        let mut r = ComplexMatrix::identity(self.dim());
        let f = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase);
        r.set(0, 0, r.get(0, 0) - f);
        r
    }

    /// `1 − (1 − e^{iφ})|s⟩⟨s|`: phase reflection about the prepared state.
    fn prepared_reflection(&self, phase: f64) -> ComplexMatrix {
        let s = self.prepared_state();
        let f = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase);
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::default() };
            d - f * s[i] * s[j].conj()
        })
    }

    /// `1 − (1 − e^{iφ})Π_t`: phase reflection about the target subspace.
    fn target_reflection(&self, phase: f64) -> ComplexMatrix {
        let f = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase);
        let n = self.dim();
        let mut r = ComplexMatrix::identity(n);
        for i in 0..n {
            if self.target[i] {
                r.set(i, i, r.get(i, i) - f);
            }
        }
        r
    }

    pub fn target_mass(&self, state: &[Complex64]) -> f64 {
        masked_mass(state, &self.target)
    }
}

fn basis_state(n: usize, idx: usize) -> CVec {
    let mut v = vec![Complex64::default(); n];
    v[idx] = Complex64::new(1.0, 0.0);
    v
}

fn masked_mass(state: &[Complex64], mask: &[bool]) -> f64 {
    state.iter().zip(mask).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum()
}

/// The amplification operator `Q = −A R_s A† R_t` as a dense matrix, with
/// `R_s = 2|0⟩⟨0| − 1` about the start basis state and `R_t = 2Π_t − 1`.
fn amplification_operator(p: &AmplitudeProcess) -> Result<ComplexMatrix, AmplitudeError> {
    // Phase-π reflections give 1 − 2P; Q wants 2P − 1, hence the global −1
    // soaks into the sign below.
    let r_s = p.start_reflection(PI).scale(Complex64::new(-1.0, 0.0));
    let r_t = p.target_reflection(PI).scale(Complex64::new(-1.0, 0.0));
    let q = p
        .a
        .matmul(&r_s)?
        .matmul(&p.a.adjoint())?
        .matmul(&r_t)?
        .scale(Complex64::new(-1.0, 0.0));
    Ok(q)
}

/// Apply `Q^rounds` to the prepared state; the returned success probability is
/// `sin²((2·rounds+1)θ)` with `sin θ = √λ`.
pub fn amplitude_amplification(
    p: &AmplitudeProcess,
    rounds: u64,
) -> Result<(CVec, f64), AmplitudeError> {
    let q = amplification_operator(p)?;
    let mut state = p.prepared_state();
    for _ in 0..rounds {
        state = q.matvec(&state);
    }
    let success = p.target_mass(&state);
    Ok((state, success))
}

/// Monotone amplification by the phase-π/3 recursion
/// `U_{m+1} = U_m R_s U_m† R_t U_m`, `U_0 = A`.
///
/// Each level triples the error exponent, so the success probability at depth
/// `m` is `1 − (1 − λ)^{3^m}` at a cost of `3^m` preparer applications. (The
/// exponent compounds per level; counted in oracle calls `q` it reads
/// `1 − ε^{2q+1}`.)
pub fn pi_over_3_amplify(
    p: &AmplitudeProcess,
    depth: u32,
) -> Result<(CVec, f64), AmplitudeError> {
    if depth > caps::MAX_PI3_DEPTH {
        return Err(AmplitudeError::DepthTooLarge(depth, caps::MAX_PI3_DEPTH));
    }
    let r_s = p.start_reflection(PI / 3.0);
    let r_t = p.target_reflection(PI / 3.0);
    let mut u = p.a.clone();
    for _ in 0..depth {
        u = u.matmul(&r_s)?.matmul(&u.adjoint())?.matmul(&r_t)?.matmul(&u)?;
    }
    let state = u.matvec(&basis_state(p.dim(), 0));
    let success = p.target_mass(&state);
    Ok((state, success))
}

// ---------------------------------------------------------------------------
// Chebyshev fixed-point sequence
// ---------------------------------------------------------------------------

/// First-kind Chebyshev polynomial `T_L` by the three-term recurrence, with
/// hyperbolic continuation `sign(x)^L · cosh(L·arccosh|x|)` for `|x| > 1`.
pub fn chebyshev_t(order: u64, x: f64) -> f64 {
    if x.abs() > 1.0 {
        let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
        return sign * (order as f64 * x.abs().acosh()).cosh();
    }
    match order {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for _ in 2..=order {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Fractional-order continuation `T_ν(x) = cosh(ν·arccosh x)` for `x ≥ 1`,
/// needed to evaluate `T_{1/L}(1/δ)`.
pub fn chebyshev_t_fractional(order: f64, x: f64) -> Result<f64, AmplitudeError> {
    if x < 1.0 {
        return Err(AmplitudeError::BelowContinuationRange(x));
    }
    Ok((order * x.acosh()).cosh())
}

/// Inverse cotangent with range (0, π), matching the angle formula's branch.
fn acot(x: f64) -> f64 {
    PI / 2.0 - x.atan()
}

/// Phase-angle pairs `(α_j, β_j)` for the length-`L` fixed-point sequence:
/// `α_j = −β_{l−j+1} = 2·acot(tan(2πj/L)·√(1−γ²))` with
/// `γ⁻¹ = T_{1/L}(1/δ)` and `l = (L−1)/2`.
///
/// At `δ = 1` every angle is ±π and the sequence reduces to plain Grover
/// rotations; in the `δ → 0` limit with `L = 3` it reproduces the π/3 step.
pub fn fixed_point_angles(l_steps: u64, delta: f64) -> Result<Vec<(f64, f64)>, AmplitudeError> {
    if l_steps.is_multiple_of(2) || l_steps == 0 {
        return Err(AmplitudeError::EvenLength(l_steps));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(AmplitudeError::InvalidDelta(delta));
    }
    let l = ((l_steps - 1) / 2) as usize;
    let gamma_inv = chebyshev_t_fractional(1.0 / l_steps as f64, 1.0 / delta)?;
    let gamma = 1.0 / gamma_inv;
    let root = (1.0 - gamma * gamma).max(0.0).sqrt();
    let alphas: Vec<f64> = (1..=l)
        .map(|j| 2.0 * acot((2.0 * PI * j as f64 / l_steps as f64).tan() * root))
        .collect();
    Ok((0..l).map(|j| (alphas[j], -alphas[l - 1 - j])).collect())
}

/// Run the length-`L` fixed-point sequence
/// `Q = G(α_l, β_l) ⋯ G(α_1, β_1)` with `G(α, β) = −S_s(α) S_t(β)` on the
/// prepared state. The success probability equals
/// `P_L = 1 − δ² T_L²(T_{1/L}(1/δ)·√(1−λ))`, and is at least `1 − δ²`
/// whenever `λ ≥ w = 1 − T_{1/L}(1/δ)⁻²`.
///
/// The target reflection applies its phase with the opposite sign,
/// `S_t(β) = 1 − (1 − e^{−iβ})Π_t`; combined with the `α_j = −β_{l−j+1}`
/// antisymmetry this makes the sequence palindromic, which is what produces
/// the Chebyshev response. At `δ = 1` both conventions coincide (every angle
/// is ±π) and the sequence is the plain Grover product.
pub fn fixed_point_amplify(
    p: &AmplitudeProcess,
    l_steps: u64,
    delta: f64,
) -> Result<(CVec, f64), AmplitudeError> {
    let angles = fixed_point_angles(l_steps, delta)?;
    let mut state = p.prepared_state();
    for &(alpha, beta) in &angles {
        let s_t = p.target_reflection(-beta);
        let s_s = p.prepared_reflection(alpha);
        state = s_t.matvec(&state);
        state = s_s.matvec(&state);
        for z in state.iter_mut() {
            *z = -*z;
        }
    }
    let success = p.target_mass(&state);
    Ok((state, success))
}

/// The success probability the fixed-point sequence is guaranteed to produce.
pub fn fixed_point_success_formula(
    l_steps: u64,
    delta: f64,
    lambda: f64,
) -> Result<f64, AmplitudeError> {
    let gamma_inv = chebyshev_t_fractional(1.0 / l_steps as f64, 1.0 / delta)?;
    let t = chebyshev_t(l_steps, gamma_inv * (1.0 - lambda).sqrt());
    Ok(1.0 - delta * delta * t * t)
}

/// Smallest overlap `w` for which the `1 − δ²` floor is guaranteed.
pub fn fixed_point_width(l_steps: u64, delta: f64) -> Result<f64, AmplitudeError> {
    let gamma_inv = chebyshev_t_fractional(1.0 / l_steps as f64, 1.0 / delta)?;
    Ok(1.0 - 1.0 / (gamma_inv * gamma_inv))
}

/// Dense operator of the full fixed-point sequence (used to compare against
/// the plain Grover product at `δ = 1`).
pub fn fixed_point_operator(
    p: &AmplitudeProcess,
    l_steps: u64,
    delta: f64,
) -> Result<ComplexMatrix, AmplitudeError> {
    let angles = fixed_point_angles(l_steps, delta)?;
    let mut q = ComplexMatrix::identity(p.dim());
    for &(alpha, beta) in &angles {
        let g = p
            .prepared_reflection(alpha)
            .matmul(&p.target_reflection(-beta))?
            .scale(Complex64::new(-1.0, 0.0));
        q = g.matmul(&q)?;
    }
    Ok(q)
}
