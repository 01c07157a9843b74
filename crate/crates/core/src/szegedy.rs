//! Bipartite-space walk operators for reversible Markov chains: the
//! double-reflection walk, its single-reflection variant used for fast
//! forwarding, the discriminant spectral correspondence, quantum fast
//! forwarding of chain powers, block-encoded sums of unitaries, and the
//! swap-test detection loop.
//!
//! The walk lives on the doubled space of dimension `d²` indexed by
//! `(x, y) = x·d + y`. The isometry `T` embeds the chain's base space as
//! `|x⟩ ↦ |x⟩ ⊗ Σ_y √p_xy |y⟩`; the projector onto its range is the
//! "A subspace", so states on A are plain `d`-vectors throughout.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::caps;
use crate::linalg::{self, CVec, ComplexMatrix, RealMatrix};
use crate::markov::{self, MarkovChain, StationaryDistribution};
use crate::tol;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("walk space {0} exceeds cap {1}")]
    TooLarge(usize, usize),
    #[error("chain must be symmetric for detection, asymmetry {0:.3e}")]
    NotSymmetric(f64),
    #[error("eps must be positive, got {0}")]
    InvalidEps(f64),
    #[error("failure probability must lie in (0,1), got {0}")]
    InvalidFailureProbability(f64),
    #[error("marked fraction {got:.3e} is below the promised eps {eps:.3e}")]
    MarkedFractionTooSmall { got: f64, eps: f64 },
    #[error("tau {0} exceeds t {1}")]
    TauTooLarge(usize, u64),
    #[error("coefficient list must be nonempty with a positive entry")]
    EmptyCoefficients,
    #[error("negative coefficient {0}")]
    NegativeCoefficient(f64),
    #[error("success amplitude is zero; output state undefined")]
    ZeroSuccessBranch,
    #[error("state has wrong dimension: got {0}, expected {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Markov(#[from] markov::MarkovError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

// ---------------------------------------------------------------------------
// Walk construction
// ---------------------------------------------------------------------------

/// Raw walk matrices for any row-stochastic transition matrix; reversibility
/// is not assumed here. The reflection about the isometry range is applied
/// block-by-block, so assembly is O(d⁴) rather than O(d⁶).
struct WalkMatrices {
    isometry: RealMatrix,
    walk: RealMatrix,
    walk_qff: RealMatrix,
}

fn sqrt_rows(p: &RealMatrix) -> RealMatrix {
    RealMatrix::from_fn(p.rows(), p.cols(), |x, y| p.get(x, y).sqrt())
}

/// out[x·d + y] = in[y·d + x]
fn apply_swap(d: usize, v: &[f64], out: &mut [f64]) {
    for x in 0..d {
        for y in 0..d {
            out[x * d + y] = v[y * d + x];
        }
    }
}

/// Reflection `2TT† − 1` about the isometry range, exploiting that `TT†` is
/// block diagonal over the first index.
fn apply_ref_a(roots: &RealMatrix, v: &mut [f64]) {
    let d = roots.rows();
    for x in 0..d {
        let block = &mut v[x * d..(x + 1) * d];
        let alpha = roots.row(x);
        let proj: f64 = alpha.iter().zip(block.iter()).map(|(a, b)| a * b).sum();
        for (b, a) in block.iter_mut().zip(alpha) {
            *b = 2.0 * proj * a - *b;
        }
    }
}

fn build_walk_matrices(p: &RealMatrix) -> Result<WalkMatrices, WalkError> {
    let d = p.rows();
    let dd = d * d;
    if dd > caps::walk_space_cap() {
        return Err(WalkError::TooLarge(dd, caps::walk_space_cap()));
    }
    let roots = sqrt_rows(p);
    let isometry = RealMatrix::from_fn(dd, d, |i, x| {
        if i / d == x {
            roots.get(x, i % d)
        } else {
            0.0
        }
    });
    let mut walk = RealMatrix::zeros(dd, dd);
    let mut walk_qff = RealMatrix::zeros(dd, dd);
    let mut col = vec![0.0; dd];
    let mut tmp = vec![0.0; dd];
    for j in 0..dd {
        // W_qff = (2TT† − 1)·S  — swap first, then reflect.
        col.fill(0.0);
        col[j] = 1.0;
        apply_swap(d, &col, &mut tmp);
        apply_ref_a(&roots, &mut tmp);
        walk_qff.set_col(j, &tmp);
        // W = R_B R_A = (S R_A S) R_A — reflect, swap, reflect, swap back.
        col.fill(0.0);
        col[j] = 1.0;
        apply_ref_a(&roots, &mut col);
        apply_swap(d, &col, &mut tmp);
        apply_ref_a(&roots, &mut tmp);
        apply_swap(d, &tmp, &mut col);
        walk.set_col(j, &col);
    }
    Ok(WalkMatrices { isometry, walk, walk_qff })
}

/// The walk operators attached to a reversible ergodic chain.
#[derive(Debug, Clone)]
pub struct SzegedyWalk {
    dim_base: usize,
    walk: RealMatrix,
    walk_qff: RealMatrix,
    isometry: RealMatrix,
    discriminant: RealMatrix,
    pi: StationaryDistribution,
}

/// Build the bipartite walk for a reversible ergodic chain and attach its
/// discriminant. On the invariant subspace spanned by the isometry range and
/// its swap image, the walk rotates each eigenplane by `2φ_j` with
/// `cos φ_j = λ_j` running over the discriminant spectrum.
pub fn build_szegedy_walk(chain: &MarkovChain) -> Result<SzegedyWalk, WalkError> {
    let pi = markov::stationary_distribution(chain)?;
    if !markov::check_detailed_balance(chain, &pi, tol::REVERSIBILITY_TOL) {
        return Err(WalkError::Markov(markov::MarkovError::NotReversible(f64::NAN)));
    }
    let discriminant = markov::discriminant(chain, &pi)?;
    let m = build_walk_matrices(chain.matrix())?;
    Ok(SzegedyWalk {
        dim_base: chain.dim(),
        walk: m.walk,
        walk_qff: m.walk_qff,
        isometry: m.isometry,
        discriminant,
        pi,
    })
}

impl SzegedyWalk {
    #[inline]
    pub fn dim_base(&self) -> usize {
        self.dim_base
    }

    #[inline]
    pub fn dim_walk(&self) -> usize {
        self.dim_base * self.dim_base
    }

    /// The double-reflection walk operator on the doubled space.
    pub fn walk_operator(&self) -> &RealMatrix {
        &self.walk
    }

    /// The single-reflection variant `(2Π_A − 1)·S` used for fast forwarding.
    pub fn walk_operator_qff(&self) -> &RealMatrix {
        &self.walk_qff
    }

    /// The `d² × d` embedding `|x⟩ ↦ |x⟩ ⊗ Σ_y √p_xy |y⟩`.
    pub fn isometry(&self) -> &RealMatrix {
        &self.isometry
    }

    pub fn discriminant(&self) -> &RealMatrix {
        &self.discriminant
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.pi
    }

    /// Embed a base-space vector into the doubled space through the isometry.
    pub fn embed(&self, psi: &[f64]) -> Vec<f64> {
        assert_eq!(psi.len(), self.dim_base);
        self.isometry.matvec(psi)
    }

    /// Project a doubled-space vector back onto base-space coordinates.
    pub fn project_a(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim_walk());
        self.isometry.transpose().matvec(v)
    }

    /// The coherent stationary state `Σ_x √π_x |x⟩|p_x⟩`, fixed by the walk.
    pub fn stationary_state(&self) -> Vec<f64> {
        let amps: Vec<f64> = self.pi.probs().iter().map(|&p| p.sqrt()).collect();
        self.embed(&amps)
    }

    /// Phase gap `Δ = 2·arccos|λ₂|` from the discriminant spectrum; always at
    /// least `2√δ` for the classical gap δ.
    pub fn phase_gap(&self) -> f64 {
        let eig = linalg::symmetric_eig(&self.discriminant).expect("discriminant is symmetric");
        let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let second = if mags.len() > 1 { mags[1].min(1.0) } else { 0.0 };
        2.0 * second.acos()
    }

    /// Cosines of the walk's eigenphases restricted to the invariant subspace
    /// (isometry range + its swap image), via the symmetric part of the
    /// restricted operator. Since the spectrum of an orthogonal matrix is
    /// closed under conjugation, this multiset pins it down completely.
    pub fn eigenphase_cosines_on_ab(&self) -> Result<Vec<f64>, WalkError> {
        let d = self.dim_base;
        let dd = d * d;
        // Orthonormal basis of span{T, ST} by Gram-Schmidt over 2d columns.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let push = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>| {
            let mut w = v;
            for b in basis.iter() {
                let c = linalg::inner_real(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let n = linalg::norm_real(&w);
            if n > 1e-9 {
                for wi in w.iter_mut() {
                    *wi /= n;
                }
                basis.push(w);
            }
        };
        for x in 0..d {
            push(self.isometry.col(x), &mut basis);
        }
        for x in 0..d {
            let col = self.isometry.col(x);
            let mut swapped = vec![0.0; dd];
            apply_swap(d, &col, &mut swapped);
            push(swapped, &mut basis);
        }
        let k = basis.len();
        let mut restricted = RealMatrix::zeros(k, k);
        for (j, b) in basis.iter().enumerate() {
            let wb = self.walk.matvec(b);
            for (i, a) in basis.iter().enumerate() {
                restricted.set(i, j, linalg::inner_real(a, &wb));
            }
        }
        let sym = RealMatrix::from_fn(k, k, |i, j| {
            0.5 * (restricted.get(i, j) + restricted.get(j, i))
        });
        Ok(linalg::symmetric_eig(&sym)?.eigenvalues)
    }
}

// ---------------------------------------------------------------------------
// Quantum fast forwarding
// ---------------------------------------------------------------------------

/// Chebyshev weights of `cos^t`: `p_l = 2^{1−t}·C(t, (t−l)/2)` for `l > 0`
/// with `l ≡ t (mod 2)`, and `p_0 = 2^{−t}·C(t, t/2)` for even `t`; zero
/// otherwise. Over full support (`tau = t`) the weights sum to 1.
pub fn qff_coefficients(t: u64, tau: usize) -> Result<Vec<f64>, WalkError> {
    if tau as u64 > t {
        return Err(WalkError::TauTooLarge(tau, t));
    }
    // Binomial mass via log-gamma-free multiplicative updates stays exact
    // enough for the t ≤ thousands this engine targets.
    let mut out = vec![0.0; tau + 1];
    for (l, slot) in out.iter_mut().enumerate() {
        let l_u = l as u64;
        if !(t - l_u).is_multiple_of(2) {
            continue;
        }
        let k = (t - l_u) / 2;
        let mut log_p = -(t as f64) * std::f64::consts::LN_2;
        for i in 0..k {
            log_p += ((t - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        let mut p = log_p.exp();
        if l > 0 {
            p *= 2.0;
        }
        *slot = p;
    }
    Ok(out)
}

/// Truncation order `τ = ⌈√(C·t)⌉` with `C = 2·ln(2/ε)`.
pub fn qff_truncation_order(t: u64, eps: f64) -> usize {
    let c = 2.0 * (2.0 / eps).ln();
    ((c * t as f64).sqrt().ceil() as usize).min(t as usize)
}

/// Approximate the action of the `t`-th discriminant power on a base-space
/// state by the truncated Chebyshev combination of walk powers.
///
/// Returns the normalized surviving component on the A subspace and the
/// probability of landing there; `output·√success` is within `eps` of
/// `D^t ψ` in norm when the truncation order comes from
/// [`qff_truncation_order`].
pub fn quantum_fast_forward(
    walk: &SzegedyWalk,
    psi: &[Complex64],
    t: u64,
    eps: f64,
) -> Result<(CVec, f64), WalkError> {
    if eps <= 0.0 {
        return Err(WalkError::InvalidEps(eps));
    }
    if psi.len() != walk.dim_base() {
        return Err(WalkError::DimensionMismatch(psi.len(), walk.dim_base()));
    }
    let tau = qff_truncation_order(t, eps);
    let coeffs = qff_coefficients(t, tau)?;
    // On A coordinates the walk powers act as Chebyshev polynomials of the
    // discriminant, so the combination is a three-term recurrence in d dims.
    let d = walk.dim_base();
    let dc = walk.discriminant().to_complex();
    let mut acc = vec![Complex64::default(); d];
    let mut prev: CVec = psi.to_vec();
    let mut cur = dc.matvec(psi);
    for (l, &p) in coeffs.iter().enumerate() {
        let term = match l {
            0 => &prev,
            1 => &cur,
            _ => {
                let next: CVec = dc
                    .matvec(&cur)
                    .iter()
                    .zip(&prev)
                    .map(|(a, b)| 2.0 * a - b)
                    .collect();
                prev = std::mem::replace(&mut cur, next);
                &cur
            }
        };
        if p != 0.0 {
            for (a, v) in acc.iter_mut().zip(term) {
                *a += p * v;
            }
        }
    }
    let success = acc.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if success == 0.0 {
        return Err(WalkError::ZeroSuccessBranch);
    }
    let scale = success.sqrt();
    for a in acc.iter_mut() {
        *a /= scale;
    }
    Ok((acc, success))
}

// ---------------------------------------------------------------------------
// Linear combination of unitaries
// ---------------------------------------------------------------------------

/// Nonnegative weights attached to same-dimension unitaries.
#[derive(Debug, Clone)]
pub struct LcuProgram {
    coefficients: Vec<f64>,
    unitaries: Vec<ComplexMatrix>,
}

impl LcuProgram {
    pub fn new(coefficients: Vec<f64>, unitaries: Vec<ComplexMatrix>) -> Result<Self, WalkError> {
        if coefficients.is_empty() || !coefficients.iter().any(|&c| c > 0.0) {
            return Err(WalkError::EmptyCoefficients);
        }
        if let Some(&c) = coefficients.iter().find(|&&c| c < 0.0) {
            return Err(WalkError::NegativeCoefficient(c));
        }
        assert_eq!(coefficients.len(), unitaries.len(), "coefficient/unitary count mismatch");
        let dim = unitaries[0].rows();
        for u in &unitaries {
            assert_eq!(u.rows(), dim, "mixed unitary dimensions");
            assert_eq!(u.cols(), dim, "mixed unitary dimensions");
        }
        Ok(Self { coefficients, unitaries })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Householder unitary on the auxiliary register sending `|0⟩` to the
/// √-weight superposition.
fn prep_matrix(coefficients: &[f64]) -> RealMatrix {
    let a = coefficients.len();
    let total: f64 = coefficients.iter().sum();
    let target: Vec<f64> = coefficients.iter().map(|&c| (c / total).sqrt()).collect();
    let mut w: Vec<f64> = target.clone();
    w[0] -= 1.0;
    let wn = linalg::norm_real(&w);
    if wn < 1e-15 {
        return RealMatrix::identity(a);
    }
    for v in w.iter_mut() {
        *v /= wn;
    }
    RealMatrix::from_fn(a, a, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - 2.0 * w[i] * w[j]
    })
}

/// Apply `Σ_l p_l U_l` through the block construction
/// `(⟨0| ⊗ 1) · Prep† · Sel · Prep · (|0⟩ ⊗ 1)`.
///
/// The surviving branch is proportional to `Σ_l p_l U_l ψ` and the flagged
/// success probability is `‖Σ_l p_l U_l ψ‖² / (Σ_l p_l)²`.
pub fn lcu_apply(prog: &LcuProgram, psi: &[Complex64]) -> Result<(CVec, f64), WalkError> {
    let dim = prog.unitaries[0].rows();
    if psi.len() != dim {
        return Err(WalkError::DimensionMismatch(psi.len(), dim));
    }
    let a = prog.coefficients.len();
    let prep = prep_matrix(&prog.coefficients);
    // Joint state over aux ⊗ system as `a` blocks of length `dim`.
    let mut joint = vec![vec![Complex64::default(); dim]; a];
    joint[0].copy_from_slice(psi);
    let mix = |joint: &Vec<CVec>, m: &RealMatrix| -> Vec<CVec> {
        let mut out = vec![vec![Complex64::default(); dim]; a];
        for (i, row) in out.iter_mut().enumerate() {
            for l in 0..a {
                let c = m.get(i, l);
                if c == 0.0 {
                    continue;
                }
                for (o, v) in row.iter_mut().zip(&joint[l]) {
                    *o += c * v;
                }
            }
        }
        out
    };
    joint = mix(&joint, &prep);
    for (l, block) in joint.iter_mut().enumerate() {
        *block = prog.unitaries[l].matvec(block);
    }
    joint = mix(&joint, &prep.transpose());
    let branch = joint.swap_remove(0);
    let success = branch.iter().map(|z| z.norm_sqr()).sum::<f64>();
    // Exactly cancelled branches survive only as rounding dust.
    if success <= 1e-24 {
        return Err(WalkError::ZeroSuccessBranch);
    }
    let scale = success.sqrt();
    let state = branch.iter().map(|z| z / scale).collect();
    Ok((state, success))
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

/// Tuning constants for [`szegedy_detect`]. `t_range_constant` scales the
/// walk-length window `[1, ⌈c/√(δ·eps)⌉]`; `repetition_constant` scales the
/// `log(1/p_f)` repetition count.
#[derive(Debug, Clone, Copy)]
pub struct DetectConfig {
    pub t_range_constant: f64,
    pub repetition_constant: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { t_range_constant: 4.0, repetition_constant: 4.0 }
    }
}

/// Decide whether a symmetric ergodic chain has marked states by comparing
/// the stationary state against its evolution under the absorbing walk.
///
/// Each repetition draws a walk length `t` uniformly from
/// `[1, ⌈c/√(δ·eps)⌉]`, prepares `(|0⟩+|1⟩)|π⟩/√2`, applies `t`
/// ancilla-controlled absorbing-walk steps, interferes the ancilla, and
/// measures it. Any `|1⟩` outcome reports a detection. With no marked states
/// the walk fixes `|π⟩` and the `|1⟩` amplitude is identically zero, so false
/// positives cannot occur; the repetition count `⌈k·ln(1/p_f)⌉` drives the
/// false-negative rate below `p_f` for marked fractions of at least `eps`.
pub fn szegedy_detect(
    chain: &MarkovChain,
    marked: &[usize],
    eps: f64,
    p_f: f64,
    seed: u64,
) -> Result<bool, WalkError> {
    szegedy_detect_with(chain, marked, eps, p_f, seed, DetectConfig::default())
}

pub fn szegedy_detect_with(
    chain: &MarkovChain,
    marked: &[usize],
    eps: f64,
    p_f: f64,
    seed: u64,
    cfg: DetectConfig,
) -> Result<bool, WalkError> {
    let asym = chain.matrix().max_asymmetry();
    if asym > tol::ROW_SUM_TOL {
        return Err(WalkError::NotSymmetric(asym));
    }
    if eps <= 0.0 || eps > 1.0 {
        return Err(WalkError::InvalidEps(eps));
    }
    if !(p_f > 0.0 && p_f < 1.0) {
        return Err(WalkError::InvalidFailureProbability(p_f));
    }
    let d = chain.dim();
    if !marked.is_empty() && (marked.len() as f64) < eps * d as f64 {
        return Err(WalkError::MarkedFractionTooSmall {
            got: marked.len() as f64 / d as f64,
            eps,
        });
    }
    let delta = markov::eigenvalue_gap(chain)?;
    // Absorbing variant: marked rows become self-loops.
    let mut is_marked = vec![false; d];
    for &m in marked {
        is_marked[m] = true;
    }
    let p_abs = RealMatrix::from_fn(d, d, |x, y| {
        if is_marked[x] {
            if x == y {
                1.0
            } else {
                0.0
            }
        } else {
            chain.prob(x, y)
        }
    });
    let absorbing = build_walk_matrices(&p_abs)?;
    // Symmetric chain: the stationary state is the uniform coherent state,
    // embedded through the original chain's isometry.
    let original = build_walk_matrices(chain.matrix())?;
    let uniform = vec![1.0 / (d as f64).sqrt(); d];
    let pi_state = original.isometry.matvec(&uniform);

    let t_max = ((cfg.t_range_constant / (delta * eps).sqrt()).ceil() as u64).max(1);
    let reps = ((cfg.repetition_constant * (1.0 / p_f).ln()).ceil() as u64).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..reps {
        let t = rng.gen_range(1..=t_max);
        let mut evolved = pi_state.clone();
        for _ in 0..t {
            evolved = absorbing.walk.matvec(&evolved);
        }
        // After the ancilla Hadamard, P(1) = ‖(1 − W'^t)|π⟩‖²/4.
        let overlap = linalg::inner_real(&pi_state, &evolved);
        let p_one = (0.5 * (1.0 - overlap)).clamp(0.0, 1.0);
        if rng.gen::<f64>() < p_one {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::EnergyLandscape;
    use crate::markov::build_metropolis_chain;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn two_state_symmetric(p: f64) -> MarkovChain {
        MarkovChain::from_rows(&[vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    #[test]
    fn one_state_walk_is_identity() {
        let chain = MarkovChain::from_rows(&[vec![1.0]]).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        assert_eq!(w.dim_walk(), 1);
        assert_close(w.walk_operator().get(0, 0), 1.0, 1e-14);
    }

    #[test]
    fn walk_operators_are_orthogonal() {
        let land = EnergyLandscape::new(1, 2, vec![0.6, 0.3, 0.0, 0.3]).unwrap();
        let chain = build_metropolis_chain(&land, 1.3).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        assert!(w.walk_operator().is_orthogonal(tol::UNITARITY_TOL).unwrap());
        assert!(w.walk_operator_qff().is_orthogonal(tol::UNITARITY_TOL).unwrap());
    }

    #[test]
    fn walk_fixes_stationary_state() {
        let land = EnergyLandscape::new(2, 1, vec![0.2, 0.0, 0.6, 0.4]).unwrap();
        let chain = build_metropolis_chain(&land, 0.8).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        let pi = w.stationary_state();
        let moved = w.walk_operator().matvec(&pi);
        for (a, b) in moved.iter().zip(&pi) {
            assert_close(*a, *b, 1e-12);
        }
        let moved_qff = w.walk_operator_qff().matvec(&pi);
        for (a, b) in moved_qff.iter().zip(&pi) {
            assert_close(*a, *b, 1e-12);
        }
    }

    #[test]
    fn two_state_eigenphases() {
        // Discriminant spectrum {1, 1/2}: the nontrivial plane rotates by
        // 2·arccos(1/2), so restricted-phase cosines are {1, cos(2π/3)·twice}.
        let w = build_szegedy_walk(&two_state_symmetric(0.25)).unwrap();
        let mut cosines = w.eigenphase_cosines_on_ab().unwrap();
        cosines.sort_by(f64::total_cmp);
        assert_eq!(cosines.len(), 3);
        let expect = (2.0 * (0.5f64).acos()).cos();
        assert_close(cosines[0], expect, 1e-8);
        assert_close(cosines[1], expect, 1e-8);
        assert_close(cosines[2], 1.0, 1e-8);
    }

    #[test]
    fn phase_gap_examples() {
        let w = build_szegedy_walk(&two_state_symmetric(0.25)).unwrap();
        assert_close(w.phase_gap(), 2.0 * 0.5f64.acos(), 1e-10);
        assert!(w.phase_gap() >= 2.0 * 0.5f64.sqrt() - 1e-12);

        let n = 4;
        let uniform =
            MarkovChain::new(RealMatrix::from_fn(n, n, |_, _| 0.25), None).unwrap();
        let w = build_szegedy_walk(&uniform).unwrap();
        assert_close(w.phase_gap(), std::f64::consts::PI, 1e-10);
    }

    #[test]
    fn qff_coefficients_small_orders() {
        let c1 = qff_coefficients(1, 1).unwrap();
        assert_close(c1[0], 0.0, 0.0);
        assert_close(c1[1], 1.0, 1e-14);
        let c2 = qff_coefficients(2, 2).unwrap();
        assert_close(c2[0], 0.5, 1e-14);
        assert_close(c2[1], 0.0, 0.0);
        assert_close(c2[2], 0.5, 1e-14);
        let c4 = qff_coefficients(4, 4).unwrap();
        assert_close(c4[0], 3.0 / 8.0, 1e-14);
        assert_close(c4[2], 0.5, 1e-14);
        assert_close(c4[4], 1.0 / 8.0, 1e-14);
        assert_close(c4.iter().sum::<f64>(), 1.0, 1e-12);
        assert!(qff_coefficients(3, 4).is_err());
    }

    #[test]
    fn qff_coefficients_reconstruct_cosine_powers() {
        // Full-support weights must reproduce cos^t pointwise on a θ grid.
        for &t in &[1u64, 2, 3, 4, 7, 12] {
            let c = qff_coefficients(t, t as usize).unwrap();
            for i in 0..1000 {
                let theta = i as f64 * std::f64::consts::PI / 999.0;
                let direct = theta.cos().powi(t as i32);
                let series: f64 =
                    c.iter().enumerate().map(|(l, &p)| p * (l as f64 * theta).cos()).sum();
                assert_close(series, direct, 1e-12);
            }
        }
    }

    #[test]
    fn qff_exact_at_low_order() {
        let land = EnergyLandscape::new(1, 2, vec![0.6, 0.3, 0.0, 0.3]).unwrap();
        let chain = build_metropolis_chain(&land, 0.9).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        let mut psi: CVec =
            (0..4).map(|i| Complex64::new(0.3 + 0.2 * i as f64, 0.1 * i as f64)).collect();
        linalg::normalize(&mut psi);
        for t in [1u64, 2] {
            let (state, success) = quantum_fast_forward(&w, &psi, t, 1e-6).unwrap();
            let dc = w.discriminant().to_complex();
            let mut expect = psi.clone();
            for _ in 0..t {
                expect = dc.matvec(&expect);
            }
            let got: CVec = state.iter().map(|z| z * success.sqrt()).collect();
            let err = linalg::norm(&linalg::sub_vec(&got, &expect));
            assert!(err <= 1e-12, "t = {t}: error {err}");
        }
    }

    #[test]
    fn qff_tracks_dense_power() {
        let land = EnergyLandscape::new(3, 1, vec![0.5, 0.35, 0.75, 0.6, 0.15, 0.0, 0.4, 0.25])
            .unwrap();
        let chain = build_metropolis_chain(&land, 0.7).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        let mut psi: CVec = (0..8).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.0)).collect();
        linalg::normalize(&mut psi);
        let eps = 1e-3;
        let (state, success) = quantum_fast_forward(&w, &psi, 16, eps).unwrap();
        let dc = w.discriminant().to_complex();
        let mut expect = psi.clone();
        for _ in 0..16 {
            expect = dc.matvec(&expect);
        }
        let got: CVec = state.iter().map(|z| z * success.sqrt()).collect();
        let err = linalg::norm(&linalg::sub_vec(&got, &expect));
        assert!(err <= eps, "error {err}");
    }

    #[test]
    fn chebyshev_action_of_walk_powers() {
        // T† W_qff^t T = T_t(D) for t ≤ 8.
        let land = EnergyLandscape::new(1, 2, vec![0.45, 0.0, 0.3, 0.15]).unwrap();
        let chain = build_metropolis_chain(&land, 1.1).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        let d = w.dim_base();
        let mut psi = vec![0.0; d];
        for (i, v) in psi.iter_mut().enumerate() {
            *v = (i as f64 + 1.0).recip();
        }
        let n = linalg::norm_real(&psi);
        for v in psi.iter_mut() {
            *v /= n;
        }
        let embedded = w.embed(&psi);
        let mut cheb_prev = psi.clone();
        let mut cheb_cur = w.discriminant().matvec(&psi);
        let mut walked = embedded;
        for t in 1..=8u32 {
            walked = w.walk_operator_qff().matvec(&walked);
            let projected = w.project_a(&walked);
            for (a, b) in projected.iter().zip(&cheb_cur) {
                assert!((a - b).abs() <= 1e-9, "t = {t}: {a} vs {b}");
            }
            let next: Vec<f64> = w
                .discriminant()
                .matvec(&cheb_cur)
                .iter()
                .zip(&cheb_prev)
                .map(|(a, b)| 2.0 * a - b)
                .collect();
            cheb_prev = std::mem::replace(&mut cheb_cur, next);
        }
    }

    #[test]
    fn lcu_single_term_applies_unitary() {
        let u = ComplexMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
        });
        let prog = LcuProgram::new(vec![1.0], vec![u]).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0), Complex64::default()];
        let (state, success) = lcu_apply(&prog, &psi).unwrap();
        assert_close(success, 1.0, 1e-12);
        assert_close(state[1].re, 1.0, 1e-12);
    }

    #[test]
    fn lcu_half_identity_half_flip() {
        let x = ComplexMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
        });
        let prog = LcuProgram::new(vec![0.5, 0.5], vec![ComplexMatrix::identity(2), x]).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0), Complex64::default()];
        let (state, success) = lcu_apply(&prog, &psi).unwrap();
        assert_close(success, 0.5, 1e-12);
        let r = 0.5f64.sqrt();
        assert_close(state[0].re, r, 1e-12);
        assert_close(state[1].re, r, 1e-12);
    }

    #[test]
    fn lcu_rejects_bad_inputs() {
        assert!(matches!(
            LcuProgram::new(vec![], vec![]),
            Err(WalkError::EmptyCoefficients)
        ));
        assert!(matches!(
            LcuProgram::new(vec![0.0], vec![ComplexMatrix::identity(2)]),
            Err(WalkError::EmptyCoefficients)
        ));
        assert!(matches!(
            LcuProgram::new(vec![-0.5, 1.0], vec![ComplexMatrix::identity(2); 2]),
            Err(WalkError::NegativeCoefficient(_))
        ));
        // Orthogonal branch: (I − X)/2 on |+⟩ has zero amplitude.
        let x = ComplexMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
        });
        let flip = x.scale(Complex64::new(-1.0, 0.0));
        let prog = LcuProgram::new(vec![0.5, 0.5], vec![ComplexMatrix::identity(2), flip]).unwrap();
        let r = 0.5f64.sqrt();
        let plus = vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)];
        assert!(matches!(lcu_apply(&prog, &plus), Err(WalkError::ZeroSuccessBranch)));
    }

    #[test]
    fn lcu_reproduces_fast_forward() {
        let land = EnergyLandscape::new(1, 2, vec![0.6, 0.3, 0.0, 0.3]).unwrap();
        let chain = build_metropolis_chain(&land, 0.9).unwrap();
        let w = build_szegedy_walk(&chain).unwrap();
        let mut psi: CVec = (0..4).map(|i| Complex64::new(0.9 - 0.2 * i as f64, 0.0)).collect();
        linalg::normalize(&mut psi);
        let t = 6u64;
        let eps = 1e-4;
        let tau = qff_truncation_order(t, eps);
        let coeffs = qff_coefficients(t, tau).unwrap();
        let total: f64 = coeffs.iter().sum();
        let wq = w.walk_operator_qff().to_complex();
        let unitaries: Vec<ComplexMatrix> =
            (0..=tau as u64).map(|l| wq.pow(l).unwrap()).collect();
        let prog = LcuProgram::new(coeffs.clone(), unitaries).unwrap();
        let embedded = linalg::cvec_from_real(&w.embed(
            &psi.iter().map(|z| z.re).collect::<Vec<_>>(),
        ));
        let (branch, success_lcu) = lcu_apply(&prog, &embedded).unwrap();
        // Unnormalized branch, projected to A coordinates, times Σp equals
        // the unnormalized fast-forward output exactly.
        let branch_unnorm: Vec<f64> =
            branch.iter().map(|z| z.re * success_lcu.sqrt() * total).collect();
        let on_a = w.project_a(&branch_unnorm);
        let (qff_state, qff_success) = quantum_fast_forward(&w, &psi, t, eps).unwrap();
        for (a, q) in on_a.iter().zip(&qff_state) {
            assert_close(*a, q.re * qff_success.sqrt(), 1e-10);
        }
    }

    #[test]
    fn detect_empty_marked_set_never_fires() {
        let chain = two_state_symmetric(0.3);
        for seed in 0..20 {
            assert!(!szegedy_detect(&chain, &[], 0.4, 0.01, seed).unwrap());
        }
    }

    #[test]
    fn detect_all_marked_is_invisible_to_the_swap_test() {
        // With every state absorbing there is no marked/unmarked boundary:
        // R'_B R'_A acts as +1 on the stationary state (both reflections flip
        // or both keep each component), so the interference signal is exactly
        // zero and the swap test cannot fire. Detection needs a proper subset.
        let n = 4;
        let chain = MarkovChain::new(RealMatrix::from_fn(n, n, |_, _| 0.25), None).unwrap();
        let marked: Vec<usize> = (0..n).collect();
        let abs_chain = RealMatrix::identity(n);
        let absorbing = build_walk_matrices(&abs_chain).unwrap();
        let original = build_walk_matrices(chain.matrix()).unwrap();
        let pi = original.isometry.matvec(&vec![0.5; n]);
        let moved = absorbing.walk.matvec(&pi);
        for (a, b) in moved.iter().zip(&pi) {
            assert_close(*a, *b, 1e-12);
        }
        for seed in 0..20 {
            assert!(!szegedy_detect(&chain, &marked, 0.5, 0.01, seed).unwrap());
        }
    }

    #[test]
    fn detect_rejects_asymmetric_chain() {
        let chain = MarkovChain::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        assert!(matches!(
            szegedy_detect(&chain, &[1], 0.5, 0.01, 0),
            Err(WalkError::NotSymmetric(_))
        ));
    }
}
