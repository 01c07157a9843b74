//! Shared helpers for the integration suites: bundled fixtures and seeded
//! generators for random chains and landscapes.

use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use qwalk_core::landscape::EnergyLandscape;
use qwalk_core::linalg::RealMatrix;
use qwalk_core::markov::MarkovChain;

#[allow(dead_code)]
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/landscapes").join(name)
}

#[allow(dead_code)]
pub fn load_fixture(name: &str) -> EnergyLandscape {
    EnergyLandscape::from_file(fixture_path(name)).expect("bundled landscape should parse")
}

#[allow(dead_code)]
pub fn bundled_names() -> Vec<&'static str> {
    vec!["toy_2x2.txt", "toy_1x2.txt", "toy_2x1.txt", "toy_3x1.txt", "bench_2x3.txt"]
}

#[allow(dead_code)]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

/// Random landscape with energies in `[0, scale]`.
#[allow(dead_code)]
pub fn random_landscape(seed: u64, coords: usize, bits: usize, scale: f64) -> EnergyLandscape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1usize << (coords * bits);
    let energies = (0..n).map(|_| rng.gen::<f64>() * scale).collect();
    EnergyLandscape::new(coords, bits, energies).unwrap()
}

/// Seeded reversible ergodic chain; cycles through three constructions:
/// complete-graph Metropolis against random Gibbs targets, move-graph
/// Metropolis over random landscapes, and symmetric doubly-stochastic
/// matrices from Sinkhorn scaling.
#[allow(dead_code)]
pub fn random_reversible_chain(seed: u64, dim: usize) -> MarkovChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match seed % 3 {
        0 => {
            let beta: f64 = rng.gen_range(0.2..2.0);
            let energies: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let t = 1.0 / dim as f64;
            let mut p = RealMatrix::zeros(dim, dim);
            for x in 0..dim {
                let mut leave = 0.0;
                for y in 0..dim {
                    if x == y {
                        continue;
                    }
                    let a = if energies[y] <= energies[x] {
                        1.0
                    } else {
                        (-beta * (energies[y] - energies[x])).exp()
                    };
                    p.set(x, y, t * a);
                    leave += t * a;
                }
                p.set(x, x, 1.0 - leave);
            }
            MarkovChain::new(p, Some(beta)).unwrap()
        }
        1 => {
            // Move-graph Metropolis over a random landscape of matching size.
            let (coords, bits) = match dim {
                2 => (1, 1),
                4 => (2, 1),
                8 => (3, 1),
                16 => (2, 2),
                32 => (5, 1),
                _ => (1, 1),
            };
            let land = random_landscape(seed, coords, bits, 1.0);
            qwalk_core::markov::build_metropolis_chain(&land, rng.gen_range(0.3..2.5)).unwrap()
        }
        _ => {
            // Symmetric stochastic by Sinkhorn scaling of a symmetric seed.
            let mut s = RealMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let v = rng.gen_range(0.05..1.0);
                    s.set(i, j, v);
                    s.set(j, i, v);
                }
            }
            for _ in 0..200 {
                let sums: Vec<f64> = (0..dim).map(|i| s.row(i).iter().sum::<f64>()).collect();
                let scale: Vec<f64> = sums.iter().map(|&r| 1.0 / r.sqrt()).collect();
                s = RealMatrix::from_fn(dim, dim, |i, j| scale[i] * s.get(i, j) * scale[j]);
            }
            // Pin row sums to exactly 1 while keeping the matrix symmetric:
            // move the residue onto the diagonal.
            let sums: Vec<f64> = (0..dim).map(|i| s.row(i).iter().sum::<f64>()).collect();
            let fixed = RealMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    s.get(i, i) + (1.0 - sums[i])
                } else {
                    s.get(i, j)
                }
            });
            MarkovChain::new(fixed, None).unwrap()
        }
    }
}

/// Chain dims to pair with seeds in sweeps.
#[allow(dead_code)]
pub fn sweep_dim(seed: u64, max_dim: usize) -> usize {
    let dims = [2usize, 4, 8, 16, 32];
    let mut d = dims[(seed / 3) as usize % dims.len()];
    while d > max_dim {
        d /= 2;
    }
    d.max(2)
}
