//! Coin-based quantum Metropolis walk: a unitary on system ⊗ move ⊗ coin
//! registers whose coin rotation encodes the Metropolis acceptance rule,
//! schedule-driven evolution with exact ground-state marginals, and
//! measurement-driven annealing through a chain sequence.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::caps;
use crate::landscape::EnergyLandscape;
use crate::linalg::{self, CVec, ComplexMatrix};
use crate::markov::{self, AnnealingSchedule, MarkovChain};
use crate::qpe;
use crate::szegedy::{self, SzegedyWalk};

#[derive(Debug, Error)]
pub enum QMetropolisError {
    #[error("register dimension {0} exceeds cap {1}")]
    TooLarge(usize, usize),
    #[error("beta must be nonnegative, got {0}")]
    NegativeBeta(f64),
    #[error("chain list is empty")]
    NoChains,
    #[error("chains have mixed dimensions: {0} vs {1}")]
    MixedDimensions(usize, usize),
    #[error("consecutive stationary states {0} and {1} have zero overlap; annealing cannot succeed")]
    ZeroConsecutiveOverlap(usize, usize),
    #[error(transparent)]
    Markov(#[from] markov::MarkovError),
    #[error(transparent)]
    Walk(#[from] szegedy::WalkError),
    #[error(transparent)]
    Qpe(#[from] qpe::QpeError),
}

// ---------------------------------------------------------------------------
// Register layout
// ---------------------------------------------------------------------------

/// Index bookkeeping for system ⊗ move ⊗ coin, coin fastest:
/// `index = (s · 2N + m) · 2 + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub system_dim: usize,
    pub move_dim: usize,
}

impl RegisterLayout {
    pub fn for_landscape(landscape: &EnergyLandscape) -> Self {
        Self { system_dim: landscape.state_count(), move_dim: landscape.num_moves() }
    }

    #[inline]
    pub fn total_dim(&self) -> usize {
        self.system_dim * self.move_dim * 2
    }

    #[inline]
    pub fn index(&self, system: usize, mv: usize, coin: usize) -> usize {
        (system * self.move_dim + mv) * 2 + coin
    }

    #[inline]
    pub fn system_of(&self, index: usize) -> usize {
        index / (2 * self.move_dim)
    }
}

// ---------------------------------------------------------------------------
// The walk operator
// ---------------------------------------------------------------------------

/// One quantum Metropolis walk step `W̃ = R·V†·B†·F·B·V` at a fixed inverse
/// temperature:
///
/// - `V` spreads the move register from `|0⟩` into the uniform superposition,
/// - `B` rotates the coin so `|1⟩` carries amplitude `√A` with `A` the
///   Metropolis acceptance of the proposed move,
/// - `F` applies the move to the system register when the coin shows `|1⟩`,
/// - `R` flips the sign of the `|0⟩|0⟩` move ⊗ coin component.
///
/// The operator is applied register by register, so states up to the
/// coin-walk cap never require a dense matrix.
#[derive(Debug, Clone)]
pub struct CoinWalk<'a> {
    landscape: &'a EnergyLandscape,
    beta: f64,
    layout: RegisterLayout,
    /// Householder column sending move |0⟩ to the uniform superposition.
    house: Vec<f64>,
}

impl<'a> CoinWalk<'a> {
    pub fn new(landscape: &'a EnergyLandscape, beta: f64) -> Result<Self, QMetropolisError> {
        if beta < 0.0 {
            return Err(QMetropolisError::NegativeBeta(beta));
        }
        let layout = RegisterLayout::for_landscape(landscape);
        let cap = caps::coin_walk_cap();
        if layout.total_dim() > cap {
            return Err(QMetropolisError::TooLarge(layout.total_dim(), cap));
        }
        // w ∝ e₀ − u, so 1 − 2wwᵀ maps e₀ ↦ u and is an involution.
        let nm = layout.move_dim;
        let u = 1.0 / (nm as f64).sqrt();
        let mut house = vec![-u; nm];
        house[0] += 1.0;
        let norm = linalg::norm_real(&house);
        for h in house.iter_mut() {
            *h /= norm;
        }
        Ok(Self { landscape, beta: beta.min(caps::BETA_CAP), layout, house })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn apply_move_mixer(&self, state: &mut [Complex64]) {
        let nm = self.layout.move_dim;
        let slots = self.layout.system_dim * 2;
        for slot in 0..slots {
            let s = slot / 2;
            let c = slot % 2;
            // Gather the move strand for fixed (s, c).
            let mut dot = Complex64::default();
            for m in 0..nm {
                dot += self.house[m] * state[self.layout.index(s, m, c)];
            }
            let two_dot = 2.0 * dot;
            for m in 0..nm {
                let idx = self.layout.index(s, m, c);
                state[idx] -= two_dot * self.house[m];
            }
        }
    }

    /// Coin rotation angles depend on (system, move) through the acceptance.
    fn apply_coin(&self, state: &mut [Complex64], inverse: bool) {
        for s in 0..self.layout.system_dim {
            let es = self.landscape.energy(s);
            for m in 0..self.layout.move_dim {
                let y = self.landscape.apply_move(s, m);
                let a = markov::acceptance(self.beta, es, self.landscape.energy(y));
                let c = (1.0 - a).max(0.0).sqrt();
                let sn = a.sqrt();
                let i0 = self.layout.index(s, m, 0);
                let i1 = self.layout.index(s, m, 1);
                let (v0, v1) = (state[i0], state[i1]);
                if inverse {
                    state[i0] = c * v0 + sn * v1;
                    state[i1] = -sn * v0 + c * v1;
                } else {
                    state[i0] = c * v0 - sn * v1;
                    state[i1] = sn * v0 + c * v1;
                }
            }
        }
    }

    /// Conditioned on coin |1⟩, permute the system register by the move.
    fn apply_flip(&self, state: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        scratch.clear();
        scratch.extend_from_slice(state);
        for s in 0..self.layout.system_dim {
            for m in 0..self.layout.move_dim {
                let y = self.landscape.apply_move(s, m);
                state[self.layout.index(y, m, 1)] = scratch[self.layout.index(s, m, 1)];
            }
        }
    }

    fn apply_reflection(&self, state: &mut [Complex64]) {
        for s in 0..self.layout.system_dim {
            let idx = self.layout.index(s, 0, 0);
            state[idx] = -state[idx];
        }
    }

    /// Apply one walk step in place.
    pub fn apply(&self, state: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(state.len(), self.layout.total_dim());
        self.apply_move_mixer(state); // V
        self.apply_coin(state, false); // B
        self.apply_flip(state, scratch); // F
        self.apply_coin(state, true); // B†
        self.apply_move_mixer(state); // V†  (V is an involution)
        self.apply_reflection(state); // R
    }

    /// Dense form of the walk step, for unitarity checks at desk dimensions.
    pub fn dense_unitary(&self) -> Result<ComplexMatrix, QMetropolisError> {
        let dim = self.layout.total_dim();
        if dim > caps::MAX_DENSE_UNITARY_DIM {
            return Err(QMetropolisError::TooLarge(dim, caps::MAX_DENSE_UNITARY_DIM));
        }
        let mut out = ComplexMatrix::zeros(dim, dim);
        let mut col = vec![Complex64::default(); dim];
        let mut scratch = Vec::with_capacity(dim);
        for j in 0..dim {
            col.iter_mut().for_each(|z| *z = Complex64::default());
            col[j] = Complex64::new(1.0, 0.0);
            self.apply(&mut col, &mut scratch);
            for (i, &v) in col.iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

/// Ground-state success probabilities `p(t)` for `t = 1..=T` along a schedule.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub schedule: AnnealingSchedule,
    pub success: Vec<f64>,
}

impl EvolutionTrace {
    /// `p(t)` with `t` counted from 1.
    pub fn p(&self, t: u64) -> f64 {
        self.success[(t - 1) as usize]
    }
}

/// Probability mass on basis states whose system component lies in
/// `ground_set`.
pub fn quantum_success_probability(
    state: &[Complex64],
    layout: &RegisterLayout,
    ground_set: &[usize],
) -> f64 {
    debug_assert!(linalg::is_normalized(state, 1e-8));
    let mut is_ground = vec![false; layout.system_dim];
    for &g in ground_set {
        is_ground[g] = true;
    }
    state
        .iter()
        .enumerate()
        .filter(|(i, _)| is_ground[layout.system_of(*i)])
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Seeded measurement sampler over the full register: draws `shots` basis
/// outcomes from `|ψ|²` and reports the fraction whose system component is in
/// the ground set. Cross-check oracle for the exact marginalization.
pub fn sample_success_probability(
    state: &[Complex64],
    layout: &RegisterLayout,
    ground_set: &[usize],
    shots: usize,
    seed: u64,
) -> f64 {
    let mut cumulative = Vec::with_capacity(state.len());
    let mut acc = 0.0;
    for z in state {
        acc += z.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let mut is_ground = vec![false; layout.system_dim];
    for &g in ground_set {
        is_ground[g] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..shots {
        let x: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= x).min(state.len() - 1);
        if is_ground[layout.system_of(idx)] {
            hits += 1;
        }
    }
    hits as f64 / shots as f64
}

/// Evolve `uniform system ⊗ |0⟩_M ⊗ |0⟩_C` under walk steps built at
/// `β(1), …, β(T)` and record the exact ground-set marginal after each step.
pub fn evolve_schedule(
    landscape: &EnergyLandscape,
    schedule: &AnnealingSchedule,
    t_max: u64,
) -> Result<EvolutionTrace, QMetropolisError> {
    let layout = RegisterLayout::for_landscape(landscape);
    let cap = caps::coin_walk_cap();
    if layout.total_dim() > cap {
        return Err(QMetropolisError::TooLarge(layout.total_dim(), cap));
    }
    let mut state = vec![Complex64::default(); layout.total_dim()];
    let amp = 1.0 / (layout.system_dim as f64).sqrt();
    for s in 0..layout.system_dim {
        state[layout.index(s, 0, 0)] = Complex64::new(amp, 0.0);
    }
    let mut scratch = Vec::with_capacity(state.len());
    let mut success = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let beta = schedule.beta(t).map_err(QMetropolisError::Markov)?;
        let walk = CoinWalk::new(landscape, beta)?;
        walk.apply(&mut state, &mut scratch);
        success.push(quantum_success_probability(&state, &layout, landscape.ground_set()));
    }
    Ok(EvolutionTrace { schedule: *schedule, success })
}

// ---------------------------------------------------------------------------
// Measurement-driven annealing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ZenoOutcome {
    /// Walk-space state after the final measurement (of the last attempt).
    pub final_state: CVec,
    /// True iff some attempt measured phase 0 at every stage.
    pub success: bool,
    /// Number of failed attempts before the returned one.
    pub restarts: u64,
}

/// Anneal through a chain sequence by projective phase measurements.
///
/// The state starts in the coherent stationary state of `chains[0]`. For each
/// chain in order, an `qpe_bits`-bit phase estimation of its walk operator is
/// measured; outcome 0 keeps the (collapsed) state, anything else aborts the
/// attempt and restarts from scratch, up to `max_restarts` restarts. Every
/// random draw comes from the seeded generator, so runs are reproducible.
///
/// Consecutive stationary states must overlap; a zero overlap makes success
/// impossible and is reported as an error up front.
pub fn zeno_anneal(
    chains: &[MarkovChain],
    qpe_bits: usize,
    seed: u64,
    max_restarts: u64,
) -> Result<ZenoOutcome, QMetropolisError> {
    if chains.is_empty() {
        return Err(QMetropolisError::NoChains);
    }
    let d = chains[0].dim();
    for c in chains {
        if c.dim() != d {
            return Err(QMetropolisError::MixedDimensions(d, c.dim()));
        }
    }
    let walks: Vec<SzegedyWalk> =
        chains.iter().map(szegedy::build_szegedy_walk).collect::<Result<_, _>>()?;
    for i in 0..walks.len().saturating_sub(1) {
        let a = walks[i].stationary_state();
        let b = walks[i + 1].stationary_state();
        if linalg::inner_real(&a, &b).powi(2) <= f64::MIN_POSITIVE {
            return Err(QMetropolisError::ZeroConsecutiveOverlap(i, i + 1));
        }
    }
    let operators: Vec<ComplexMatrix> =
        walks.iter().map(|w| w.walk_operator().to_complex()).collect();
    let initial = linalg::cvec_from_real(&walks[0].stationary_state());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut restarts = 0u64;
    loop {
        let mut state = initial.clone();
        let mut ok = true;
        for op in &operators {
            let (outcome, collapsed) = qpe::qpe_sample_and_collapse(op, &state, qpe_bits, &mut rng)?;
            state = collapsed;
            if outcome != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(ZenoOutcome { final_state: state, success: true, restarts });
        }
        if restarts >= max_restarts {
            return Ok(ZenoOutcome { final_state: state, success: false, restarts });
        }
        restarts += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;
    use crate::markov::ScheduleKind;
    use crate::tol;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn funnel_1x2() -> EnergyLandscape {
        EnergyLandscape::new(1, 2, vec![0.6, 0.3, 0.0, 0.3]).unwrap()
    }

    #[test]
    fn walk_step_is_unitary() {
        let land = funnel_1x2();
        for beta in [0.0, 1.0, 50.0, 1000.0] {
            let walk = CoinWalk::new(&land, beta).unwrap();
            let dense = walk.dense_unitary().unwrap();
            assert!(dense.is_unitary(tol::UNITARITY_TOL).unwrap(), "beta = {beta}");
        }
    }

    #[test]
    fn coin_rotation_angles_two_state() {
        // E = (0, 1) at β = ln 2: downhill coin amplitude 1, uphill √(1/2).
        let land = EnergyLandscape::new(1, 1, vec![0.0, 1.0]).unwrap();
        let walk = CoinWalk::new(&land, 2.0f64.ln()).unwrap();
        let layout = walk.layout();
        // Feed |s=0, m=0, c=0⟩ through B alone.
        let mut state = vec![Complex64::default(); layout.total_dim()];
        state[layout.index(0, 0, 0)] = Complex64::new(1.0, 0.0);
        walk.apply_coin(&mut state, false);
        let a_up = 0.5f64; // acceptance of the uphill move
        assert_close(state[layout.index(0, 0, 1)].re, a_up.sqrt(), 1e-12);
        assert_close(state[layout.index(0, 0, 0)].re, (1.0 - a_up).sqrt(), 1e-12);
        let mut state = vec![Complex64::default(); layout.total_dim()];
        state[layout.index(1, 0, 0)] = Complex64::new(1.0, 0.0);
        walk.apply_coin(&mut state, false);
        assert_close(state[layout.index(1, 0, 1)].re, 1.0, 1e-12);
        let dense = walk.dense_unitary().unwrap();
        assert!(dense.is_unitary(1e-12).unwrap());
    }

    #[test]
    fn flat_landscape_equals_beta_zero() {
        let flat = EnergyLandscape::new(1, 2, vec![2.0; 4]).unwrap();
        let shaped = funnel_1x2();
        let w_flat = CoinWalk::new(&flat, 37.0).unwrap().dense_unitary().unwrap();
        let w_zero = CoinWalk::new(&shaped, 0.0).unwrap().dense_unitary().unwrap();
        assert!(w_flat.sub(&w_zero).unwrap().max_abs_entry() <= 1e-14);
    }

    #[test]
    fn nontrivial_landscape_walk_squared_is_not_identity() {
        let land = funnel_1x2();
        let w = CoinWalk::new(&land, 2.0).unwrap().dense_unitary().unwrap();
        let w2 = w.matmul(&w).unwrap();
        let dev = w2.sub(&ComplexMatrix::identity(w.rows())).unwrap().max_abs_entry();
        assert!(dev > 1e-3, "walk squared collapsed to identity (dev {dev})");
    }

    #[test]
    fn negative_beta_rejected() {
        let land = funnel_1x2();
        assert!(matches!(
            CoinWalk::new(&land, -0.5),
            Err(QMetropolisError::NegativeBeta(_))
        ));
    }

    #[test]
    fn flat_landscape_success_is_one() {
        let flat = EnergyLandscape::new(1, 2, vec![1.0; 4]).unwrap();
        let sched = AnnealingSchedule::fixed(3.0).unwrap();
        let trace = evolve_schedule(&flat, &sched, 6).unwrap();
        for &p in &trace.success {
            assert_close(p, 1.0, 1e-12);
        }
    }

    #[test]
    fn ground_basis_state_has_full_success_mass() {
        let land = funnel_1x2();
        let layout = RegisterLayout::for_landscape(&land);
        let ground = land.ground_set()[0];
        let mut state = vec![Complex64::default(); layout.total_dim()];
        state[layout.index(ground, 1, 1)] = Complex64::new(1.0, 0.0);
        assert_close(
            quantum_success_probability(&state, &layout, land.ground_set()),
            1.0,
            0.0,
        );
    }

    #[test]
    fn uniform_start_mass_matches_ground_fraction() {
        let land = funnel_1x2();
        let layout = RegisterLayout::for_landscape(&land);
        let mut state = vec![Complex64::default(); layout.total_dim()];
        let amp = 0.5;
        for s in 0..4 {
            state[layout.index(s, 0, 0)] = Complex64::new(amp, 0.0);
        }
        let p = quantum_success_probability(&state, &layout, land.ground_set());
        assert_close(p, 0.25, 1e-14);
    }

    #[test]
    fn marginalization_matches_direct_sum_on_random_state() {
        let land = funnel_1x2();
        let layout = RegisterLayout::for_landscape(&land);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state: CVec = (0..layout.total_dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        linalg::normalize(&mut state);
        let p = quantum_success_probability(&state, &layout, land.ground_set());
        let mut direct = 0.0;
        for (i, z) in state.iter().enumerate() {
            if land.ground_set().contains(&layout.system_of(i)) {
                direct += z.norm_sqr();
            }
        }
        assert_close(p, direct, 1e-12);
    }

    #[test]
    fn beta_zero_preserves_uniform_marginal() {
        let land = funnel_1x2();
        let sched =
            AnnealingSchedule::new(ScheduleKind::Fixed, 1e-12, 0.9, 1).unwrap();
        // β numerically zero: acceptance 1 everywhere on this scale.
        let layout = RegisterLayout::for_landscape(&land);
        let mut state = vec![Complex64::default(); layout.total_dim()];
        let amp = 0.5;
        for s in 0..4 {
            state[layout.index(s, 0, 0)] = Complex64::new(amp, 0.0);
        }
        let walk = CoinWalk::new(&land, 0.0).unwrap();
        let mut scratch = Vec::new();
        for _ in 0..7 {
            walk.apply(&mut state, &mut scratch);
            for s in 0..4 {
                let mass: f64 = (0..layout.move_dim)
                    .flat_map(|m| (0..2).map(move |c| (m, c)))
                    .map(|(m, c)| state[layout.index(s, m, c)].norm_sqr())
                    .sum();
                assert_close(mass, 0.25, 1e-10);
            }
        }
        let _ = sched;
    }

    #[test]
    fn evolution_deterministic_and_sampler_consistent() {
        let land = funnel_1x2();
        let sched = AnnealingSchedule::fixed(2.0).unwrap();
        let a = evolve_schedule(&land, &sched, 16).unwrap();
        let b = evolve_schedule(&land, &sched, 16).unwrap();
        assert_eq!(a.success, b.success);
        assert!(a.success.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn zeno_single_chain_never_restarts() {
        let chain = MarkovChain::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let out = zeno_anneal(&[chain], 3, 42, 10).unwrap();
        assert!(out.success);
        assert_eq!(out.restarts, 0);
    }

    #[test]
    fn zeno_rejects_empty_and_mixed() {
        assert!(matches!(zeno_anneal(&[], 3, 0, 0), Err(QMetropolisError::NoChains)));
        let a = MarkovChain::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let b = MarkovChain::new(RealMatrix::from_fn(3, 3, |_, _| 1.0 / 3.0), None).unwrap();
        assert!(matches!(
            zeno_anneal(&[a, b], 3, 0, 0),
            Err(QMetropolisError::MixedDimensions(2, 3))
        ));
    }
}
