//! Finite-population agent-based simulation.
//!
//! Two well-mixed populations of users and creators. In each evolutionary
//! step a random user and then a random creator revise their strategy:
//! with probability `mu` they mutate to a different strategy, otherwise they
//! compare payoffs with a random peer and imitate it following the Fermi
//! rule. Payoffs are accumulated over as many games as the opposing
//! population has members, against opponents drawn with replacement.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded with
//! [`SeedableRng::seed_from_u64`]; replicate `r` of a run with seed `s` uses
//! seed `s + r`. Integer draws go through `u32` so streams are identical on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{CreatorStrategy, GameParams, UserStrategy};
use crate::payoff::{avg_cooperation, from_counts, payoff_pair};

pub type AbmRng = ChaCha8Rng;

/// Evolutionary parameters of the agent-based model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbmConfig {
    pub n_users: usize,
    pub n_creators: usize,
    /// Selection strength for users.
    pub beta_u: f64,
    /// Selection strength for creators.
    pub beta_c: f64,
    /// Mutation probability for users.
    pub mu_u: f64,
    /// Mutation probability for creators.
    pub mu_c: f64,
    pub generations: usize,
    /// Leading share of generations excluded from averages.
    pub burn_in_fraction: f64,
    pub seed: u64,
    pub replicates: usize,
    /// When true every step revises one user and then one creator; when
    /// false every step revises a single agent drawn from the union of both
    /// populations.
    pub paired_updates: bool,
}

impl Default for AbmConfig {
    fn default() -> Self {
        AbmConfig::with_sizes(100, 50)
    }
}

impl AbmConfig {
    /// Defaults for the given population sizes, with `mu = 1 / N` per population.
    pub fn with_sizes(n_users: usize, n_creators: usize) -> Self {
        AbmConfig {
            n_users,
            n_creators,
            beta_u: 1.0,
            beta_c: 1.0,
            mu_u: 1.0 / n_users.max(1) as f64,
            mu_c: 1.0 / n_creators.max(1) as f64,
            generations: 500,
            burn_in_fraction: 0.1,
            seed: 0,
            replicates: 100,
            paired_updates: true,
        }
    }

    pub fn validate(self) -> Result<Self> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_users < 2 || self.n_creators < 2 {
            return fail(format!(
                "population sizes must be at least 2 (got {} users, {} creators)",
                self.n_users, self.n_creators
            ));
        }
        if self.n_users > u32::MAX as usize || self.n_creators > u32::MAX as usize {
            return fail("population sizes must fit in 32 bits".into());
        }
        for (name, beta) in [("beta_u", self.beta_u), ("beta_c", self.beta_c)] {
            if !(beta.is_finite() && beta >= 0.0) {
                return fail(format!("{name} = {beta} must be finite and non-negative"));
            }
        }
        for (name, mu) in [("mu_u", self.mu_u), ("mu_c", self.mu_c)] {
            if !(0.0..=1.0).contains(&mu) {
                return fail(format!("{name} = {mu} must lie in [0, 1]"));
            }
        }
        if self.generations == 0 {
            return fail("generations must be positive".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return fail(format!(
                "burn_in_fraction = {} must lie in [0, 1)",
                self.burn_in_fraction
            ));
        }
        if self.replicates == 0 {
            return fail("replicates must be positive".into());
        }
        Ok(self)
    }

    /// Steps per generation.
    pub fn steps_per_generation(&self) -> usize {
        self.n_users + self.n_creators
    }

    /// Generations strictly after this index enter averages.
    pub fn burn_in_generations(&self) -> usize {
        (self.generations as f64 * self.burn_in_fraction).floor() as usize
    }

    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        self.seed.wrapping_add(replicate as u64)
    }
}

/// Strategy of every agent in both populations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentPopulations {
    pub users: Vec<UserStrategy>,
    pub creators: Vec<CreatorStrategy>,
}

impl AgentPopulations {
    /// Every agent draws a strategy uniformly at random.
    pub fn uniform_random<R: Rng>(n_users: usize, n_creators: usize, rng: &mut R) -> Self {
        AgentPopulations {
            users: (0..n_users)
                .map(|_| UserStrategy::ALL[rng.gen_range(0..4u32) as usize])
                .collect(),
            creators: (0..n_creators)
                .map(|_| CreatorStrategy::ALL[rng.gen_range(0..2u32) as usize])
                .collect(),
        }
    }

    pub fn homogeneous(
        user: UserStrategy,
        creator: CreatorStrategy,
        n_users: usize,
        n_creators: usize,
    ) -> Self {
        AgentPopulations {
            users: vec![user; n_users],
            creators: vec![creator; n_creators],
        }
    }

    pub fn user_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for u in &self.users {
            counts[u.index()] += 1;
        }
        counts
    }

    pub fn creator_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for c in &self.creators {
            counts[c.index()] += 1;
        }
        counts
    }
}

/// Strategy counts and `eta` after one generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub user_counts: [usize; 4],
    pub creator_counts: [usize; 2],
    pub eta: f64,
}

/// Generation 0 (the initial populations) followed by one record per generation.
#[derive(Clone, Debug, PartialEq)]
pub struct AbmTimeSeries {
    pub records: Vec<GenerationRecord>,
}

impl AbmTimeSeries {
    /// Mean `eta` over generations after the burn-in.
    pub fn mean_eta_after(&self, burn_in_generations: usize) -> f64 {
        let tail: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.generation > burn_in_generations)
            .map(|r| r.eta)
            .collect();
        if tail.is_empty() {
            return self.records.last().map_or(0.0, |r| r.eta);
        }
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    /// Mean `eta` over the last `n` generations.
    pub fn mean_eta_last(&self, n: usize) -> f64 {
        let last = self.records.last().map_or(0, |r| r.generation);
        self.mean_eta_after(last.saturating_sub(n))
    }

    pub fn max_eta(&self) -> f64 {
        self.records.iter().map(|r| r.eta).fold(0.0, f64::max)
    }
}

/// Probability that a player with payoff `pi_i` imitates one with payoff `pi_j`.
pub fn fermi_probability(pi_i: f64, pi_j: f64, beta: f64) -> f64 {
    let a = beta * (pi_j - pi_i);
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Payoffs of every strategy pair, indexed `[creator][user]`.
#[derive(Clone, Copy, Debug)]
pub struct PayoffTable {
    user: [[f64; 4]; 2],
    creator: [[f64; 4]; 2],
}

impl PayoffTable {
    pub fn new(p: &GameParams) -> Self {
        let mut user = [[0.0; 4]; 2];
        let mut creator = [[0.0; 4]; 2];
        for c in CreatorStrategy::ALL {
            for u in UserStrategy::ALL {
                let cell = payoff_pair(c, u, p);
                user[c.index()][u.index()] = cell.user_payoff;
                creator[c.index()][u.index()] = cell.creator_payoff;
            }
        }
        PayoffTable { user, creator }
    }
}

/// A strategy that plays against members of the other population.
pub trait Player: Copy + PartialEq {
    type Opponent: Copy;
    const COUNT: usize;

    fn index(self) -> usize;
    fn from_index(i: usize) -> Self;
    fn payoff_against(self, opponent: Self::Opponent, table: &PayoffTable) -> f64;
}

impl Player for UserStrategy {
    type Opponent = CreatorStrategy;
    const COUNT: usize = 4;

    fn index(self) -> usize {
        UserStrategy::index(self)
    }

    fn from_index(i: usize) -> Self {
        UserStrategy::ALL[i]
    }

    fn payoff_against(self, opponent: CreatorStrategy, table: &PayoffTable) -> f64 {
        table.user[opponent.index()][self.index()]
    }
}

impl Player for CreatorStrategy {
    type Opponent = UserStrategy;
    const COUNT: usize = 2;

    fn index(self) -> usize {
        CreatorStrategy::index(self)
    }

    fn from_index(i: usize) -> Self {
        CreatorStrategy::ALL[i]
    }

    fn payoff_against(self, opponent: UserStrategy, table: &PayoffTable) -> f64 {
        table.creator[self.index()][opponent.index()]
    }
}

fn draw_index<R: Rng>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n as u32) as usize
}

/// Average payoff of `focal` over as many games as there are opponents,
/// against opponents drawn uniformly with replacement.
pub fn accumulate_payoff<S: Player, R: Rng>(
    focal: S,
    opponents: &[S::Opponent],
    p: &GameParams,
    rng: &mut R,
) -> f64 {
    accumulate_with(focal, opponents, &PayoffTable::new(p), rng)
}

fn accumulate_with<S: Player, R: Rng>(
    focal: S,
    opponents: &[S::Opponent],
    table: &PayoffTable,
    rng: &mut R,
) -> f64 {
    let m = opponents.len();
    let total: f64 = (0..m)
        .map(|_| focal.payoff_against(opponents[draw_index(rng, m)], table))
        .sum();
    total / m as f64
}

/// Revises the strategy of one random member of `pop`.
fn revise<S: Player, R: Rng>(
    pop: &mut [S],
    opponents: &[S::Opponent],
    table: &PayoffTable,
    beta: f64,
    mu: f64,
    rng: &mut R,
) {
    let n = pop.len();
    let i = draw_index(rng, n);
    let current = pop[i];
    if rng.gen::<f64>() < mu {
        // Uniform over the other strategies.
        let k = draw_index(rng, S::COUNT - 1);
        let k = if k >= current.index() { k + 1 } else { k };
        pop[i] = S::from_index(k);
        return;
    }
    let mut j = draw_index(rng, n - 1);
    if j >= i {
        j += 1;
    }
    let model = pop[j];
    if model == current {
        return;
    }
    let pi_i = accumulate_with(current, opponents, table, rng);
    let pi_j = accumulate_with(model, opponents, table, rng);
    if rng.gen::<f64>() < fermi_probability(pi_i, pi_j, beta) {
        pop[i] = model;
    }
}

fn step_with<R: Rng>(
    pop: &mut AgentPopulations,
    table: &PayoffTable,
    cfg: &AbmConfig,
    rng: &mut R,
) {
    let revise_user = |pop: &mut AgentPopulations, rng: &mut R| {
        revise(&mut pop.users, &pop.creators, table, cfg.beta_u, cfg.mu_u, rng)
    };
    let revise_creator = |pop: &mut AgentPopulations, rng: &mut R| {
        revise(&mut pop.creators, &pop.users, table, cfg.beta_c, cfg.mu_c, rng)
    };
    if cfg.paired_updates {
        revise_user(pop, rng);
        revise_creator(pop, rng);
    } else if draw_index(rng, pop.users.len() + pop.creators.len()) < pop.users.len() {
        revise_user(pop, rng);
    } else {
        revise_creator(pop, rng);
    }
}

/// One evolutionary step: a random user, then a random creator, revise
/// their strategies (or a single random agent when `paired_updates` is off).
pub fn evolutionary_step<R: Rng>(
    pop: &mut AgentPopulations,
    p: &GameParams,
    cfg: &AbmConfig,
    rng: &mut R,
) {
    step_with(pop, &PayoffTable::new(p), cfg, rng);
}

fn record(generation: usize, pop: &AgentPopulations, p: &GameParams) -> GenerationRecord {
    let user_counts = pop.user_counts();
    let creator_counts = pop.creator_counts();
    GenerationRecord {
        generation,
        user_counts,
        creator_counts,
        eta: avg_cooperation(&from_counts(&user_counts, creator_counts), p),
    }
}

/// Runs one replicate for `cfg.generations` generations with seed `cfg.seed`.
///
/// Without `initial`, each agent starts with a uniformly random strategy
/// drawn from the run's own stream.
pub fn run_abm(
    p: &GameParams,
    cfg: &AbmConfig,
    initial: Option<&AgentPopulations>,
) -> Result<AbmTimeSeries> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    let mut rng = AbmRng::seed_from_u64(cfg.seed);
    let mut pop = match initial {
        Some(init) => {
            if init.users.len() != cfg.n_users || init.creators.len() != cfg.n_creators {
                return Err(Error::InvalidConfig(format!(
                    "initial populations have {} users and {} creators, config expects {} and {}",
                    init.users.len(),
                    init.creators.len(),
                    cfg.n_users,
                    cfg.n_creators
                )));
            }
            init.clone()
        }
        None => AgentPopulations::uniform_random(cfg.n_users, cfg.n_creators, &mut rng),
    };
    let table = PayoffTable::new(&p);
    let mut records = Vec::with_capacity(cfg.generations + 1);
    records.push(record(0, &pop, &p));
    for g in 1..=cfg.generations {
        for _ in 0..cfg.steps_per_generation() {
            step_with(&mut pop, &table, &cfg, &mut rng);
        }
        records.push(record(g, &pop, &p));
    }
    Ok(AbmTimeSeries { records })
}

/// Runs `cfg.replicates` independent replicates, replicate `r` with seed
/// `cfg.seed + r`. Output is in replicate order.
pub fn run_replicates(
    p: &GameParams,
    cfg: &AbmConfig,
    initial: Option<&AgentPopulations>,
) -> Result<Vec<AbmTimeSeries>> {
    let cfg = cfg.validate()?;
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let rc = AbmConfig {
                seed: cfg.replicate_seed(r),
                ..cfg
            };
            run_abm(p, &rc, initial)
        })
        .collect()
}

/// Mean and spread of per-replicate average cooperation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateSummary {
    pub mean: f64,
    /// Population standard deviation over replicates.
    pub std: f64,
    /// Post-burn-in mean `eta` of each replicate, in replicate order.
    pub per_replicate: Vec<f64>,
}

impl ReplicateSummary {
    pub fn from_values(per_replicate: Vec<f64>) -> Self {
        let n = per_replicate.len().max(1) as f64;
        let mean = per_replicate.iter().sum::<f64>() / n;
        let var = per_replicate.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        ReplicateSummary {
            mean,
            std: var.sqrt(),
            per_replicate,
        }
    }
}

/// Average cooperation after burn-in, averaged over replicates started
/// from uniformly random strategies.
pub fn average_cooperation_abm(p: &GameParams, cfg: &AbmConfig) -> Result<ReplicateSummary> {
    let cfg = cfg.validate()?;
    let burn_in = cfg.burn_in_generations();
    let values = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let rc = AbmConfig {
                seed: cfg.replicate_seed(r),
                ..cfg
            };
            run_abm(p, &rc, None).map(|ts| ts.mean_eta_after(burn_in))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ReplicateSummary::from_values(values))
}
