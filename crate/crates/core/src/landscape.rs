//! Discrete energy landscapes: `N` coordinates of `b` bits each, one energy
//! per packed state, and single-coordinate ±1 moves with wraparound.
//!
//! States pack little-endian by coordinate: `s = Σ_k c_k · 2^{b·k}`, so
//! coordinate 0 occupies the lowest `b` bits. The text format is one header
//! line `coords=N bits=b` followed by exactly `2^{bN}` energy lines in index
//! order; anything else is rejected with a line-numbered diagnostic.

use std::path::Path;

use thiserror::Error;

use crate::caps;

#[derive(Debug, Error)]
pub enum LandscapeError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state count {0} exceeds the cap of {1}")]
    TooLarge(usize, usize),
    #[error("energy list has {got} entries, expected {expect}")]
    WrongLength { got: usize, expect: usize },
    #[error("coords and bits must both be at least 1")]
    EmptyGeometry,
    #[error("energy at index {0} is not finite")]
    NonFinite(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct EnergyLandscape {
    num_coords: usize,
    bits_per_coord: usize,
    energies: Vec<f64>,
    ground_set: Vec<usize>,
}

impl EnergyLandscape {
    pub fn new(
        num_coords: usize,
        bits_per_coord: usize,
        energies: Vec<f64>,
    ) -> Result<Self, LandscapeError> {
        if num_coords == 0 || bits_per_coord == 0 {
            return Err(LandscapeError::EmptyGeometry);
        }
        let bits = num_coords
            .checked_mul(bits_per_coord)
            .filter(|&b| b < usize::BITS as usize)
            .ok_or(LandscapeError::TooLarge(usize::MAX, caps::MAX_PROPAGATION_STATES))?;
        let expect = 1usize << bits;
        if expect > caps::MAX_PROPAGATION_STATES {
            return Err(LandscapeError::TooLarge(expect, caps::MAX_PROPAGATION_STATES));
        }
        if energies.len() != expect {
            return Err(LandscapeError::WrongLength { got: energies.len(), expect });
        }
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(LandscapeError::NonFinite(i));
        }
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        // Ground states attain the minimum exactly; ties are kept as a set.
        let ground_set = energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == min)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { num_coords, bits_per_coord, energies, ground_set })
    }

    /// Parse the landscape text format, rejecting wrong line counts.
    pub fn parse(text: &str) -> Result<Self, LandscapeError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(LandscapeError::Parse { line: 1, msg: "missing header".into() })?;
        let mut coords = None;
        let mut bits = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("coords", v)) => {
                    coords = Some(v.parse::<usize>().map_err(|_| LandscapeError::Parse {
                        line: 1,
                        msg: format!("bad coords value `{v}`"),
                    })?)
                }
                Some(("bits", v)) => {
                    bits = Some(v.parse::<usize>().map_err(|_| LandscapeError::Parse {
                        line: 1,
                        msg: format!("bad bits value `{v}`"),
                    })?)
                }
                _ => {
                    return Err(LandscapeError::Parse {
                        line: 1,
                        msg: format!("unexpected header token `{tok}`"),
                    })
                }
            }
        }
        let (n, b) = match (coords, bits) {
            (Some(n), Some(b)) => (n, b),
            _ => {
                return Err(LandscapeError::Parse {
                    line: 1,
                    msg: "header must be `coords=N bits=b`".into(),
                })
            }
        };
        if n == 0 || b == 0 {
            return Err(LandscapeError::EmptyGeometry);
        }
        let total_bits = n
            .checked_mul(b)
            .filter(|&t| t < usize::BITS as usize)
            .ok_or(LandscapeError::TooLarge(usize::MAX, caps::MAX_PROPAGATION_STATES))?;
        let expect = 1usize << total_bits;
        if expect > caps::MAX_PROPAGATION_STATES {
            return Err(LandscapeError::TooLarge(expect, caps::MAX_PROPAGATION_STATES));
        }
        let mut energies = Vec::with_capacity(expect);
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let t = raw.trim();
            if t.is_empty() {
                // A single trailing newline is tolerated; a blank line in the
                // body is a format error caught by the count checks below.
                continue;
            }
            if energies.len() == expect {
                return Err(LandscapeError::Parse {
                    line: line_no,
                    msg: format!("expected {expect} energy lines, found more"),
                });
            }
            let e = t.parse::<f64>().map_err(|_| LandscapeError::Parse {
                line: line_no,
                msg: format!("bad energy value `{t}`"),
            })?;
            energies.push(e);
        }
        if energies.len() != expect {
            return Err(LandscapeError::Parse {
                line: text.lines().count(),
                msg: format!("expected {expect} energy lines, found {}", energies.len()),
            });
        }
        Self::new(n, b, energies)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LandscapeError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Render in the same text format accepted by [`EnergyLandscape::parse`].
    pub fn to_file_string(&self) -> String {
        let mut s = format!("coords={} bits={}\n", self.num_coords, self.bits_per_coord);
        for e in &self.energies {
            s.push_str(&format!("{e}\n"));
        }
        s
    }

    #[inline]
    pub fn num_coords(&self) -> usize {
        self.num_coords
    }

    #[inline]
    pub fn bits_per_coord(&self) -> usize {
        self.bits_per_coord
    }

    #[inline]
    pub fn state_count(&self) -> usize {
        self.energies.len()
    }

    /// Number of proposal moves: ±1 on each coordinate.
    #[inline]
    pub fn num_moves(&self) -> usize {
        2 * self.num_coords
    }

    #[inline]
    pub fn energy(&self, state: usize) -> f64 {
        self.energies[state]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_set(&self) -> &[usize] {
        &self.ground_set
    }

    pub fn min_energy(&self) -> f64 {
        self.energies[self.ground_set[0]]
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    #[inline]
    pub fn coord(&self, state: usize, k: usize) -> usize {
        (state >> (self.bits_per_coord * k)) & ((1 << self.bits_per_coord) - 1)
    }

    /// Apply move `mv ∈ [0, 2N)`: coordinate `mv/2` steps by +1 (even `mv`)
    /// or −1 (odd `mv`), wrapping modulo `2^b`.
    #[inline]
    pub fn apply_move(&self, state: usize, mv: usize) -> usize {
        debug_assert!(mv < self.num_moves());
        let k = mv / 2;
        let m = (1usize << self.bits_per_coord) - 1;
        let shift = self.bits_per_coord * k;
        let c = (state >> shift) & m;
        let c_new = if mv.is_multiple_of(2) { (c + 1) & m } else { (c + m) & m };
        (state & !(m << shift)) | (c_new << shift)
    }

    /// Rebuild with coordinates relabeled by `perm` (coordinate `k` of the new
    /// landscape is coordinate `perm[k]` of the original).
    pub fn permute_coords(&self, perm: &[usize]) -> Result<Self, LandscapeError> {
        assert_eq!(perm.len(), self.num_coords);
        let b = self.bits_per_coord;
        let m = (1usize << b) - 1;
        let mut energies = vec![0.0; self.state_count()];
        for (s_new, e) in energies.iter_mut().enumerate() {
            let mut s_old = 0usize;
            for (k, &pk) in perm.iter().enumerate() {
                let c = (s_new >> (b * k)) & m;
                s_old |= c << (b * pk);
            }
            *e = self.energies[s_old];
        }
        Self::new(self.num_coords, b, energies)
    }
}
