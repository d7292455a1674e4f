//! Payoff matrix, expected payoffs against a mixed opposing population, and
//! the average cooperation ratio `eta`.

use crate::error::{Error, Result};
use crate::params::{CreatorStrategy, GameParams, UserStrategy};

/// Tolerance on `x1 + x2 + x3 + x4 = 1` accepted by [`PopulationState::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Payoffs of one user-creator encounter, averaged over media coin flips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffPair {
    pub user_payoff: f64,
    pub creator_payoff: f64,
}

/// Strategy frequencies of two infinite populations.
///
/// `x` holds the user frequencies `[AllD, BMedia, GMedia, AllC]`, `y` the
/// frequency of safe (cooperating) creators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationState {
    pub x: [f64; 4],
    pub y: f64,
}

impl PopulationState {
    /// Builds a state, rejecting anything off the simplex.
    pub fn new(x: [f64; 4], y: f64) -> Result<Self> {
        let s = PopulationState { x, y };
        s.check(SIMPLEX_TOLERANCE)?;
        Ok(s)
    }

    /// Builds a state from `(x1, x2, x3, y)` with `x4 = 1 - x1 - x2 - x3`.
    pub fn from_reduced(z: [f64; 4]) -> Result<Self> {
        Self::new([z[0], z[1], z[2], 1.0 - z[0] - z[1] - z[2]], z[3])
    }

    /// Equal user shares with creator cooperator share `y`.
    pub fn uniform(y: f64) -> Self {
        PopulationState { x: [0.25; 4], y }
    }

    /// Homogeneous state: every user plays `user`, every creator plays `creator`.
    pub fn corner(user: UserStrategy, creator: CreatorStrategy) -> Self {
        let mut x = [0.0; 4];
        x[user.index()] = 1.0;
        PopulationState {
            x,
            y: match creator {
                CreatorStrategy::Unsafe => 0.0,
                CreatorStrategy::Safe => 1.0,
            },
        }
    }

    /// `(x1, x2, x3, y)`, the coordinates the dynamics are written in.
    pub fn reduced(&self) -> [f64; 4] {
        [self.x[0], self.x[1], self.x[2], self.y]
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let in_unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !self.x.iter().all(|&v| in_unit(v)) {
            return Err(Error::InvalidState(format!(
                "user frequencies {:?} outside [0, 1]",
                self.x
            )));
        }
        if !in_unit(self.y) {
            return Err(Error::InvalidState(format!(
                "creator frequency {} outside [0, 1]",
                self.y
            )));
        }
        let sum: f64 = self.x.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "user frequencies sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    /// Largest absolute coordinate difference, over `x` and `y`.
    pub fn max_distance(&self, other: &PopulationState) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b).abs())
            .fold((self.y - other.y).abs(), f64::max)
    }
}

/// One cell of the payoff matrix.
pub fn payoff_pair(creator: CreatorStrategy, user: UserStrategy, p: &GameParams) -> PayoffPair {
    use CreatorStrategy::*;
    use UserStrategy::*;
    let (user_payoff, creator_payoff) = match (creator, user) {
        (Unsafe, AllD) => (0.0, 0.0),
        (Unsafe, AllC) => (-p.c_u, p.b_c),
        (Unsafe, BMedia) => (-0.5 * p.c_u, 0.5 * p.b_c),
        (Unsafe, GMedia) => (-(1.0 - p.q) * p.c_u - p.c_i, (1.0 - p.q) * p.b_c),
        (Safe, AllD) => (0.0, -p.c_c),
        (Safe, AllC) => (p.b_u, p.b_c - p.c_c),
        (Safe, BMedia) => (0.5 * p.b_u, 0.5 * p.b_c - p.c_c),
        (Safe, GMedia) => (p.q * p.b_u - p.c_i, p.q * p.b_c - p.c_c),
    };
    PayoffPair {
        user_payoff,
        creator_payoff,
    }
}

/// Expected payoff of each user strategy against creators with cooperator
/// share `s.y`, as `[AllD, BMedia, GMedia, AllC]`.
pub fn expected_user_payoffs(s: &PopulationState, p: &GameParams) -> [f64; 4] {
    let y = s.y;
    let d = 1.0 - y;
    [
        0.0,
        0.5 * p.b_u * y - 0.5 * p.c_u * d,
        (p.q * p.b_u - p.c_i) * y - ((1.0 - p.q) * p.c_u + p.c_i) * d,
        p.b_u * y - p.c_u * d,
    ]
}

/// Expected payoff of each creator strategy against the user mixture `s.x`,
/// as `[D, C]`.
pub fn expected_creator_payoffs(s: &PopulationState, p: &GameParams) -> [f64; 2] {
    let [x1, x2, x3, x4] = s.x;
    let pi_c = -p.c_c * x1
        + (0.5 * p.b_c - p.c_c) * x2
        + (p.q * p.b_c - p.c_c) * x3
        + (p.b_c - p.c_c) * x4;
    let pi_d = 0.5 * p.b_c * x2 + (1.0 - p.q) * p.b_c * x3 + p.b_c * x4;
    [pi_d, pi_c]
}

/// Average cooperation ratio `eta`: the mean of the expected user adoption
/// rate and the creator cooperation rate.
pub fn avg_cooperation(s: &PopulationState, p: &GameParams) -> f64 {
    let [_, x2, x3, x4] = s.x;
    let y = s.y;
    let gmedia_adopts = p.q * y + (1.0 - p.q) * (1.0 - y);
    (y + 0.5 * x2 + gmedia_adopts * x3 + x4) / 2.0
}

/// Strategy frequencies of finite populations.
pub fn frequencies(
    users: &[UserStrategy],
    creators: &[CreatorStrategy],
) -> Result<PopulationState> {
    if users.is_empty() || creators.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut counts = [0usize; 4];
    for u in users {
        counts[u.index()] += 1;
    }
    let safe = creators
        .iter()
        .filter(|&&c| c == CreatorStrategy::Safe)
        .count();
    Ok(from_counts(&counts, [creators.len() - safe, safe]))
}

/// Frequencies from strategy counts. Both count vectors must be non-empty in total.
pub(crate) fn from_counts(users: &[usize; 4], creators: [usize; 2]) -> PopulationState {
    let n_u: usize = users.iter().sum();
    let n_c = creators[0] + creators[1];
    PopulationState {
        x: users.map(|c| c as f64 / n_u as f64),
        y: creators[1] as f64 / n_c as f64,
    }
}

/// `eta` of finite populations, using expected (not sampled) adoption of
/// media followers.
pub fn empirical_cooperation(
    users: &[UserStrategy],
    creators: &[CreatorStrategy],
    p: &GameParams,
) -> Result<f64> {
    Ok(avg_cooperation(&frequencies(users, creators)?, p))
}
