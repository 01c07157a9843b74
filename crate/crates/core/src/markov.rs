//! Metropolis-Hastings chains over energy landscapes: construction, stationary
//! distributions, spectral gaps, annealing schedules, exact success-probability
//! propagation, and hitting/mixing times.
//!
//! Transition matrices are row-stochastic: `P[x][y]` is the probability of
//! moving from `x` to `y`, so distributions evolve as row vectors.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::caps;
use crate::landscape::EnergyLandscape;
use crate::linalg::{self, RealMatrix};
use crate::tol;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("beta must be nonnegative, got {0}")]
    NegativeBeta(f64),
    #[error("matrix row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("negative transition probability at ({0},{1})")]
    NegativeEntry(usize, usize),
    #[error("chain is not ergodic (irreducible + aperiodic)")]
    NotErgodic,
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("chain is not reversible (detailed-balance residual {0:.3e})")]
    NotReversible(f64),
    #[error("stationary distribution has zero mass at state {0}")]
    ZeroStationaryMass(usize),
    #[error("state count {0} exceeds cap {1}")]
    TooLarge(usize, usize),
    #[error("schedule step must be at least 1")]
    InvalidStep,
    #[error("invalid schedule parameter: {0}")]
    InvalidSchedule(String),
    #[error("marked set is empty")]
    EmptyMarkedSet,
    #[error("stationary solve residual {0:.3e} exceeds tolerance")]
    NumericalFailure(f64),
    #[error("mixing did not reach eps within {0} steps")]
    MixingDidNotConverge(u64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

// ---------------------------------------------------------------------------
// Chain type
// ---------------------------------------------------------------------------

/// Row-stochastic transition matrix, optionally tagged with the inverse
/// temperature it was built at.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    p: RealMatrix,
    beta: Option<f64>,
}

impl MarkovChain {
    /// Validates row sums within [`tol::ROW_SUM_TOL`] and nonnegativity.
    pub fn new(p: RealMatrix, beta: Option<f64>) -> Result<Self, MarkovError> {
        if p.rows() != p.cols() {
            return Err(MarkovError::Linalg(linalg::LinalgError::NotSquare {
                rows: p.rows(),
                cols: p.cols(),
            }));
        }
        for i in 0..p.rows() {
            let mut sum = 0.0;
            for j in 0..p.cols() {
                let v = p.get(i, j);
                if v < 0.0 {
                    return Err(MarkovError::NegativeEntry(i, j));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol::ROW_SUM_TOL {
                return Err(MarkovError::NotStochastic { row: i, sum });
            }
        }
        Ok(Self { p, beta })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        Self::new(RealMatrix::from_rows(rows), None)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.p
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.p.get(from, to)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.p.max_asymmetry() <= tol
    }

    /// Strong connectivity of the positive-transition graph; enough for the
    /// eigenvalue-1 left eigenvector to be unique.
    pub fn is_irreducible(&self) -> bool {
        let n = self.dim();
        let reach = |transpose: bool| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(x) = stack.pop() {
                for y in 0..n {
                    let p = if transpose { self.p.get(y, x) } else { self.p.get(x, y) };
                    if p > 0.0 && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen
        };
        reach(false).iter().all(|&s| s) && reach(true).iter().all(|&s| s)
    }

    /// Irreducibility plus aperiodicity via the gcd of directed cycle lengths.
    pub fn is_ergodic(&self) -> bool {
        let n = self.dim();
        if !self.is_irreducible() {
            return false;
        }
        // Aperiodicity: gcd of (level(x) + 1 − level(y)) over edges x→y of a
        // BFS levelling is the chain period for strongly connected graphs.
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        level[0] = 0;
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if self.p.get(x, y) > 0.0 && level[y] == usize::MAX {
                    level[y] = level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        let mut g: u64 = 0;
        for x in 0..n {
            for y in 0..n {
                if self.p.get(x, y) > 0.0 {
                    let diff = level[x] as i64 + 1 - level[y] as i64;
                    g = gcd(g, diff.unsigned_abs());
                }
            }
        }
        g == 1
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Metropolis construction
// ---------------------------------------------------------------------------

/// Metropolis acceptance `min{1, e^{−β(E_y − E_x)}}`.
#[inline]
pub fn acceptance(beta: f64, e_from: f64, e_to: f64) -> f64 {
    if e_to <= e_from {
        1.0
    } else {
        (-beta * (e_to - e_from)).exp()
    }
}

/// Build the Metropolis chain at inverse temperature `beta`: the proposal is
/// uniform over the `2N` single-coordinate ±1 moves (`T = 1/(2N)` per move),
/// rejected mass stays put, and the stationary state is the Gibbs
/// distribution over the landscape energies.
pub fn build_metropolis_chain(
    landscape: &EnergyLandscape,
    beta: f64,
) -> Result<MarkovChain, MarkovError> {
    if beta < 0.0 {
        return Err(MarkovError::NegativeBeta(beta));
    }
    let beta = beta.min(caps::BETA_CAP);
    let n = landscape.state_count();
    if n > caps::MAX_DENSE_CHAIN_STATES {
        return Err(MarkovError::TooLarge(n, caps::MAX_DENSE_CHAIN_STATES));
    }
    let moves = landscape.num_moves();
    let t_prob = 1.0 / moves as f64;
    let mut p = RealMatrix::zeros(n, n);
    for x in 0..n {
        let ex = landscape.energy(x);
        let mut leave = 0.0;
        for mv in 0..moves {
            let y = landscape.apply_move(x, mv);
            let a = acceptance(beta, ex, landscape.energy(y));
            let w = t_prob * a;
            p.set(x, y, p.get(x, y) + w);
            leave += w;
        }
        // Diagonal absorbs rejected proposals exactly.
        p.set(x, x, p.get(x, x) + (1.0 - leave).max(0.0));
    }
    MarkovChain::new(p, Some(beta))
}

// ---------------------------------------------------------------------------
// Stationary distribution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }
}

fn stationary_residual(chain: &MarkovChain, probs: &[f64]) -> f64 {
    let n = chain.dim();
    let mut worst = 0.0f64;
    for y in 0..n {
        let mut acc = 0.0;
        for x in 0..n {
            acc += probs[x] * chain.prob(x, y);
        }
        worst = worst.max((acc - probs[y]).abs());
    }
    worst
}

/// Candidate stationary vector from detailed-balance ratios along a spanning
/// tree of bidirectional edges. Exact (to rounding of the entry ratios) for
/// reversible chains; returns None when the bidirectional graph is
/// disconnected.
fn detailed_balance_candidate(chain: &MarkovChain) -> Option<Vec<f64>> {
    let n = chain.dim();
    let mut logw = vec![f64::NAN; n];
    logw[0] = 0.0;
    let mut stack = vec![0usize];
    let mut seen = 1usize;
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if logw[y].is_nan() && chain.prob(x, y) > 0.0 && chain.prob(y, x) > 0.0 {
                logw[y] = logw[x] + chain.prob(x, y).ln() - chain.prob(y, x).ln();
                seen += 1;
                stack.push(y);
            }
        }
    }
    if seen < n {
        return None;
    }
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logw.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    Some(probs)
}

/// Solve `πᵀP = πᵀ, Σπ = 1` by replacing one balance equation with the
/// normalization row.
fn stationary_by_lu(chain: &MarkovChain) -> Result<Vec<f64>, MarkovError> {
    let n = chain.dim();
    let mut a = RealMatrix::from_fn(n, n, |i, j| {
        
        chain.prob(j, i) - if i == j { 1.0 } else { 0.0 }
    });
    for j in 0..n {
        a.set(n - 1, j, 1.0);
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let mut probs = linalg::solve_linear(&a, &b)?;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            // Elimination can leave tiny negative round-off in near-zero mass.
            if *p < -1e-9 {
                return Err(MarkovError::NumericalFailure(-*p));
            }
            *p = 0.0;
        }
    }
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    Ok(probs)
}

/// Unique stationary distribution, with `πᵀP = πᵀ` verified within
/// [`tol::STATIONARY_RESIDUAL_TOL`].
///
/// Irreducibility alone makes π unique, so periodic chains are accepted: the
/// zero-temperature limit of the Metropolis construction is a walk on a
/// bipartite move graph, and its Gibbs state must still resolve. (Mixing-time
/// questions do require full ergodicity; see [`mixing_time`].)
pub fn stationary_distribution(
    chain: &MarkovChain,
) -> Result<StationaryDistribution, MarkovError> {
    if !chain.is_irreducible() {
        return Err(MarkovError::NotIrreducible);
    }
    stationary_of_irreducible(chain)
}

fn stationary_of_irreducible(chain: &MarkovChain) -> Result<StationaryDistribution, MarkovError> {
    // Reversible chains get the exact ratio construction, which resolves
    // Gibbs weights across hundreds of orders of magnitude where a direct
    // linear solve would not; everything else falls back to LU.
    if let Some(probs) = detailed_balance_candidate(chain) {
        let db = detailed_balance_residual(chain, &probs);
        if db <= tol::DETAILED_BALANCE_TOL
            && stationary_residual(chain, &probs) <= tol::STATIONARY_RESIDUAL_TOL
        {
            return Ok(StationaryDistribution { probs });
        }
    }
    let probs = stationary_by_lu(chain)?;
    let res = stationary_residual(chain, &probs);
    if res > tol::STATIONARY_RESIDUAL_TOL {
        return Err(MarkovError::NumericalFailure(res));
    }
    Ok(StationaryDistribution { probs })
}

fn detailed_balance_residual(chain: &MarkovChain, probs: &[f64]) -> f64 {
    let n = chain.dim();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            worst = worst.max((chain.prob(x, y) * probs[x] - chain.prob(y, x) * probs[y]).abs());
        }
    }
    worst
}

/// True iff `max_{x,y} |p_yx π_x − p_xy π_y| ≤ tol`.
pub fn check_detailed_balance(
    chain: &MarkovChain,
    pi: &StationaryDistribution,
    tol: f64,
) -> bool {
    assert_eq!(chain.dim(), pi.dim(), "dimension mismatch");
    detailed_balance_residual(chain, pi.probs()) <= tol
}

// ---------------------------------------------------------------------------
// Spectral quantities
// ---------------------------------------------------------------------------

/// Stationary distribution for spectral purposes: the irreducible solve when
/// possible, the uniform vector for symmetric chains (identity included).
fn spectral_pi(chain: &MarkovChain) -> Result<StationaryDistribution, MarkovError> {
    if chain.is_irreducible() {
        stationary_of_irreducible(chain)
    } else if chain.is_symmetric(tol::ROW_SUM_TOL) {
        let n = chain.dim();
        Ok(StationaryDistribution { probs: vec![1.0 / n as f64; n] })
    } else {
        Err(MarkovError::NotIrreducible)
    }
}

/// Discriminant matrix with entries `D_xy = √(π_x/π_y)·p_xy`; symmetric for
/// reversible chains and sharing the chain's spectrum.
pub fn discriminant(
    chain: &MarkovChain,
    pi: &StationaryDistribution,
) -> Result<RealMatrix, MarkovError> {
    assert_eq!(chain.dim(), pi.dim(), "dimension mismatch");
    let n = chain.dim();
    if let Some(x) = pi.probs().iter().position(|&p| p <= 0.0) {
        return Err(MarkovError::ZeroStationaryMass(x));
    }
    let sqrt_pi: Vec<f64> = pi.probs().iter().map(|&p| p.sqrt()).collect();
    let d = RealMatrix::from_fn(n, n, |x, y| sqrt_pi[x] / sqrt_pi[y] * chain.prob(x, y));
    let asym = d.max_asymmetry();
    if asym > tol::SYMMETRY_TOL {
        return Err(MarkovError::NotReversible(asym));
    }
    // Symmetrize the rounding residue so downstream eigensolves are exact.
    Ok(RealMatrix::from_fn(n, n, |x, y| 0.5 * (d.get(x, y) + d.get(y, x))))
}

/// Classical eigenvalue gap `δ = 1 − |λ₂|`, with `λ₂` the second-largest
/// absolute eigenvalue, obtained from the symmetric discriminant spectrum.
pub fn eigenvalue_gap(chain: &MarkovChain) -> Result<f64, MarkovError> {
    let pi = spectral_pi(chain)?;
    let d = discriminant(chain, &pi)?;
    let eig = linalg::symmetric_eig(&d)?;
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let second = if mags.len() > 1 { mags[1] } else { 0.0 };
    Ok(1.0 - second)
}

// ---------------------------------------------------------------------------
// Annealing schedules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Fixed,
    Boltzmann,
    Cauchy,
    Geometric,
    Exponential,
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Fixed => "fixed",
            ScheduleKind::Boltzmann => "boltzmann",
            ScheduleKind::Cauchy => "cauchy",
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(ScheduleKind::Fixed),
            "boltzmann" | "logarithmic" => Some(ScheduleKind::Boltzmann),
            "cauchy" | "linear" => Some(ScheduleKind::Cauchy),
            "geometric" => Some(ScheduleKind::Geometric),
            "exponential" => Some(ScheduleKind::Exponential),
            _ => None,
        }
    }
}

/// β(t) for t = 1, 2, …; every kind starts at `beta1` and is nondecreasing.
///
/// fixed: `β₁` · boltzmann: `β₁·ln(t·e)` · cauchy: `β₁·t` ·
/// geometric: `β₁·α^{−t+1}` · exponential: `β₁·exp(α·(t−1)^{1/N})`.
/// Values are clamped at [`caps::BETA_CAP`].
#[derive(Debug, Clone, Copy)]
pub struct AnnealingSchedule {
    pub kind: ScheduleKind,
    pub beta1: f64,
    pub alpha: f64,
    pub dimension_n: usize,
}

pub const DEFAULT_ALPHA: f64 = 0.9;

impl AnnealingSchedule {
    pub fn new(
        kind: ScheduleKind,
        beta1: f64,
        alpha: f64,
        dimension_n: usize,
    ) -> Result<Self, MarkovError> {
        // NaN fails these bounds checks too.
        if beta1 <= 0.0 || beta1.is_nan() {
            return Err(MarkovError::InvalidSchedule(format!("beta1 must be > 0, got {beta1}")));
        }
        match kind {
            ScheduleKind::Geometric => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(MarkovError::InvalidSchedule(format!(
                        "geometric alpha must be in (0, 1], got {alpha}"
                    )));
                }
            }
            ScheduleKind::Exponential => {
                if alpha <= 0.0 || alpha.is_nan() {
                    return Err(MarkovError::InvalidSchedule(format!(
                        "exponential alpha must be > 0, got {alpha}"
                    )));
                }
                if dimension_n == 0 {
                    return Err(MarkovError::InvalidSchedule(
                        "exponential schedule needs dimension_n ≥ 1".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { kind, beta1, alpha, dimension_n })
    }

    pub fn fixed(beta: f64) -> Result<Self, MarkovError> {
        Self::new(ScheduleKind::Fixed, beta, DEFAULT_ALPHA, 1)
    }

    /// β at step `t ≥ 1`.
    pub fn beta(&self, t: u64) -> Result<f64, MarkovError> {
        if t < 1 {
            return Err(MarkovError::InvalidStep);
        }
        let tf = t as f64;
        let raw = match self.kind {
            ScheduleKind::Fixed => self.beta1,
            ScheduleKind::Boltzmann => self.beta1 * (tf.ln() + 1.0),
            ScheduleKind::Cauchy => self.beta1 * tf,
            ScheduleKind::Geometric => self.beta1 * self.alpha.powi(-((t - 1) as i32)),
            ScheduleKind::Exponential => {
                self.beta1 * (self.alpha * (tf - 1.0).powf(1.0 / self.dimension_n as f64)).exp()
            }
        };
        Ok(raw.min(caps::BETA_CAP))
    }
}

// ---------------------------------------------------------------------------
// Exact classical propagation
// ---------------------------------------------------------------------------

/// One Metropolis step of the distribution, matrix-free over the move graph.
fn propagate_step(landscape: &EnergyLandscape, beta: f64, dist: &[f64], out: &mut [f64]) {
    let moves = landscape.num_moves();
    let t_prob = 1.0 / moves as f64;
    out.fill(0.0);
    for (x, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let ex = landscape.energy(x);
        let mut leave = 0.0;
        for mv in 0..moves {
            let y = landscape.apply_move(x, mv);
            let w = t_prob * acceptance(beta, ex, landscape.energy(y));
            out[y] += mass * w;
            leave += w;
        }
        out[x] += mass * (1.0 - leave).max(0.0);
    }
}

/// Exact ground-state occupancy per step: starting from the uniform
/// distribution, apply the Metropolis kernel at `β(1), …, β(t)` and record the
/// probability mass on the ground set after each step.
pub fn classical_success_probability(
    landscape: &EnergyLandscape,
    schedule: &AnnealingSchedule,
    t_max: u64,
) -> Result<Vec<f64>, MarkovError> {
    let n = landscape.state_count();
    if n > caps::MAX_PROPAGATION_STATES {
        return Err(MarkovError::TooLarge(n, caps::MAX_PROPAGATION_STATES));
    }
    let mut dist = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let beta = schedule.beta(t)?;
        propagate_step(landscape, beta, &dist, &mut next);
        std::mem::swap(&mut dist, &mut next);
        out.push(landscape.ground_set().iter().map(|&g| dist[g]).sum());
    }
    Ok(out)
}

/// Ever-hit variant of [`classical_success_probability`]: the ground set is
/// absorbing, so `p(t)` is the probability of having visited it by step `t`.
/// Exposed alongside the occupancy reading so the two conventions can be
/// compared on equal footing.
pub fn classical_hit_probability(
    landscape: &EnergyLandscape,
    schedule: &AnnealingSchedule,
    t_max: u64,
) -> Result<Vec<f64>, MarkovError> {
    let n = landscape.state_count();
    if n > caps::MAX_PROPAGATION_STATES {
        return Err(MarkovError::TooLarge(n, caps::MAX_PROPAGATION_STATES));
    }
    let ground: Vec<bool> = {
        let mut g = vec![false; n];
        for &i in landscape.ground_set() {
            g[i] = true;
        }
        g
    };
    let mut dist = vec![1.0 / n as f64; n];
    let mut absorbed: f64 = landscape.ground_set().iter().map(|&g| dist[g]).sum();
    for &g in landscape.ground_set() {
        dist[g] = 0.0;
    }
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let beta = schedule.beta(t)?;
        propagate_step(landscape, beta, &dist, &mut next);
        std::mem::swap(&mut dist, &mut next);
        for (x, is_ground) in ground.iter().enumerate() {
            if *is_ground {
                absorbed += dist[x];
                dist[x] = 0.0;
            }
        }
        out.push(absorbed);
    }
    Ok(out)
}

/// Seeded Monte-Carlo counterpart of [`classical_success_probability`]; a
/// cross-check oracle, not a benchmark engine.
pub fn sample_classical_success(
    landscape: &EnergyLandscape,
    schedule: &AnnealingSchedule,
    t_max: u64,
    walkers: usize,
    seed: u64,
) -> Result<Vec<f64>, MarkovError> {
    let n = landscape.state_count();
    let moves = landscape.num_moves();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground: Vec<bool> = {
        let mut g = vec![false; n];
        for &i in landscape.ground_set() {
            g[i] = true;
        }
        g
    };
    let mut states: Vec<usize> = (0..walkers).map(|_| rng.gen_range(0..n)).collect();
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let beta = schedule.beta(t)?;
        let mut hits = 0usize;
        for s in states.iter_mut() {
            let mv = rng.gen_range(0..moves);
            let y = landscape.apply_move(*s, mv);
            let a = acceptance(beta, landscape.energy(*s), landscape.energy(y));
            if rng.gen::<f64>() < a {
                *s = y;
            }
            if ground[*s] {
                hits += 1;
            }
        }
        out.push(hits as f64 / walkers as f64);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hitting time
// ---------------------------------------------------------------------------

/// Expected number of chain steps to reach `marked` starting from the
/// stationary distribution restricted to unmarked states, computed from the
/// absorbing chain's discriminant spectrum (eigenvalue-1 modes excluded).
pub fn hitting_time(chain: &MarkovChain, marked: &[usize]) -> Result<f64, MarkovError> {
    let n = chain.dim();
    if marked.is_empty() {
        return Err(MarkovError::EmptyMarkedSet);
    }
    let mut is_marked = vec![false; n];
    for &m in marked {
        assert!(m < n, "marked index out of range");
        is_marked[m] = true;
    }
    if is_marked.iter().all(|&m| m) {
        return Ok(0.0);
    }
    let pi = stationary_of_irreducible(chain)?;
    if !check_detailed_balance(chain, &pi, tol::REVERSIBILITY_TOL) {
        return Err(MarkovError::NotReversible(detailed_balance_residual(chain, pi.probs())));
    }
    // Absorbing chain: marked rows become self-loops.
    let p_abs = RealMatrix::from_fn(n, n, |x, y| {
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
    // Entrywise √(p'_xy p'_yx) is symmetric by construction and decouples the
    // marked block, which carries exactly the eigenvalue-1 modes.
    let d_abs = RealMatrix::from_fn(n, n, |x, y| (p_abs.get(x, y) * p_abs.get(y, x)).sqrt());
    let eig = linalg::symmetric_eig(&d_abs)?;
    let mut start: Vec<f64> = (0..n)
        .map(|x| if is_marked[x] { 0.0 } else { pi.prob(x).sqrt() })
        .collect();
    let snorm = linalg::norm_real(&start);
    if snorm == 0.0 {
        return Err(MarkovError::ZeroStationaryMass(0));
    }
    for v in start.iter_mut() {
        *v /= snorm;
    }
    let mut ht = 0.0;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam >= 1.0 - 1e-9 {
            continue;
        }
        let overlap = linalg::inner_real(&eig.eigenvectors.col(k), &start);
        ht += overlap * overlap / (1.0 - lam);
    }
    Ok(ht)
}

// ---------------------------------------------------------------------------
// Mixing time
// ---------------------------------------------------------------------------

const MAX_MIXING_STEPS: u64 = 1_000_000;

/// Smallest `t ≥ 1` such that every point-mass initial distribution is within
/// total-variation distance `eps` of π after `t` steps. The worst-case
/// distance is checked to be nonincreasing along the way.
pub fn mixing_time(chain: &MarkovChain, eps: f64) -> Result<u64, MarkovError> {
    if !chain.is_ergodic() {
        return Err(MarkovError::NotErgodic);
    }
    let pi = stationary_of_irreducible(chain)?;
    let n = chain.dim();
    // Row x of `m` is the distribution after t steps when starting from x.
    let mut m = RealMatrix::identity(n);
    let mut prev_dist = f64::INFINITY;
    for t in 1..=MAX_MIXING_STEPS {
        m = m.matmul(chain.matrix())?;
        let mut worst = 0.0f64;
        for x in 0..n {
            let d: f64 =
                m.row(x).iter().zip(pi.probs()).map(|(p, q)| (p - q).abs()).sum::<f64>() / 2.0;
            worst = worst.max(d);
        }
        if worst > prev_dist + 1e-12 {
            return Err(MarkovError::NumericalFailure(worst - prev_dist));
        }
        prev_dist = worst;
        if worst <= eps {
            return Ok(t);
        }
    }
    Err(MarkovError::MixingDidNotConverge(MAX_MIXING_STEPS))
}
