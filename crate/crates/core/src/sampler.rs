//! Annealed Metropolis-Hastings over contiguous districting plans.
//!
//! The chain proposes single-ward flips chosen uniformly from the
//! conflicted `(ward, neighboring district)` pairs of the current plan.
//! Proposals that would empty or disconnect the donor district are
//! rejected outright. A valid proposal from `x` to `y` is accepted with
//! probability
//!
//! ```text
//! min(1, (c(x) / c(y)) * exp(-beta * (J(y) - J(x))))
//! ```
//!
//! where `c` is the number of conflicted pairs, which makes
//! `exp(-beta J)` the stationary law at fixed `beta`. `beta` advances
//! per accepted step through a three-phase schedule: held at 0, ramped
//! linearly to 1, then held at 1.
//!
//! An ensemble is one final plan per independent annealing run, kept only
//! if it passes the hard [`FilterCriteria`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geography::{conflicted_wards, district_aggregates, Geography, Plan};
use crate::scores::{compactness_from_aggregates, ScoreBreakdown, ScoreTracker, ScoreWeights};

pub const DEFAULT_STALL_CAP: u64 = 10_000_000;

/// Accepted-step counts for the three annealing phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub steps_beta0: u64,
    pub steps_ramp: u64,
    pub steps_beta1: u64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        AnnealingSchedule {
            steps_beta0: 20_000,
            steps_ramp: 80_000,
            steps_beta1: 20_000,
        }
    }
}

impl AnnealingSchedule {
    pub fn new(steps_beta0: u64, steps_ramp: u64, steps_beta1: u64) -> Self {
        AnnealingSchedule {
            steps_beta0,
            steps_ramp,
            steps_beta1,
        }
    }

    pub fn total(&self) -> u64 {
        self.steps_beta0 + self.steps_ramp + self.steps_beta1
    }

    /// Inverse temperature after `accepted` accepted steps.
    pub fn beta_at(&self, accepted: u64) -> f64 {
        if accepted < self.steps_beta0 {
            0.0
        } else if accepted < self.steps_beta0 + self.steps_ramp {
            (accepted - self.steps_beta0) as f64 / self.steps_ramp as f64
        } else {
            1.0
        }
    }
}

/// Hard acceptance filters applied to finished chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCriteria {
    /// Strict bound on `max_d |pop_d - ideal| / ideal`.
    pub max_pop_deviation: f64,
    pub vra_black_districts: usize,
    pub vra_black_threshold: f64,
    pub vra_hispanic_districts: usize,
    pub vra_hispanic_threshold: f64,
    pub max_compactness: Option<f64>,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        FilterCriteria {
            max_pop_deviation: 0.05,
            vra_black_districts: 6,
            vra_black_threshold: 0.40,
            vra_hispanic_districts: 1,
            vra_hispanic_threshold: 0.40,
            max_compactness: None,
        }
    }
}

impl FilterCriteria {
    /// Accepts every valid plan.
    pub fn none() -> Self {
        FilterCriteria {
            max_pop_deviation: f64::INFINITY,
            vra_black_districts: 0,
            vra_black_threshold: 0.0,
            vra_hispanic_districts: 0,
            vra_hispanic_threshold: 0.0,
            max_compactness: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in [self.vra_black_threshold, self.vra_hispanic_threshold] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidArgument(format!("VRA threshold {t} outside [0, 1]")));
            }
        }
        if !(self.max_pop_deviation >= 0.0) {
            return Err(Error::InvalidArgument("population deviation bound must be nonnegative".into()));
        }
        Ok(())
    }

    /// Also requires the VRA district counts to fit within `k` districts.
    pub fn validate_for(&self, k: usize) -> Result<()> {
        self.validate()?;
        if self.vra_black_districts > k || self.vra_hispanic_districts > k {
            return Err(Error::InvalidArgument(format!(
                "VRA district counts exceed the {k} districts"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterFailure {
    PopulationDeviation,
    BlackVra,
    HispanicVra,
    Compactness,
}

impl fmt::Display for FilterFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterFailure::PopulationDeviation => "population_deviation",
            FilterFailure::BlackVra => "black_vra",
            FilterFailure::HispanicVra => "hispanic_vra",
            FilterFailure::Compactness => "compactness",
        })
    }
}

/// Largest relative deviation of a district population from ideal.
pub fn max_population_deviation(g: &Geography, p: &Plan) -> f64 {
    let ideal = g.ideal_population();
    district_aggregates(g, p)
        .iter()
        .map(|a| (a.population as f64 - ideal).abs() / ideal)
        .fold(0.0, f64::max)
}

/// `Ok(())` when the plan passes every criterion, otherwise the list of
/// violated ones.
pub fn passes_filter(g: &Geography, p: &Plan, crit: &FilterCriteria) -> Result<(), Vec<FilterFailure>> {
    let aggs = district_aggregates(g, p);
    let ideal = g.ideal_population();
    let mut failures = Vec::new();

    let dev = aggs
        .iter()
        .map(|a| (a.population as f64 - ideal).abs() / ideal)
        .fold(0.0, f64::max);
    if !(dev < crit.max_pop_deviation) {
        failures.push(FilterFailure::PopulationDeviation);
    }
    let black = aggs
        .iter()
        .filter(|a| a.black_fraction() >= crit.vra_black_threshold)
        .count();
    if black < crit.vra_black_districts {
        failures.push(FilterFailure::BlackVra);
    }
    let hispanic = aggs
        .iter()
        .filter(|a| a.hispanic_fraction() >= crit.vra_hispanic_threshold)
        .count();
    if hispanic < crit.vra_hispanic_districts {
        failures.push(FilterFailure::HispanicVra);
    }
    if let Some(max) = crit.max_compactness {
        if compactness_from_aggregates(&aggs) > max {
            failures.push(FilterFailure::Compactness);
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}

/// Seeded region growing: `k` distinct seed wards, then repeatedly a
/// uniformly random unassigned ward on the frontier joins a uniformly
/// random adjacent district.
pub fn random_initial_plan(g: &Geography, k: usize, seed: u64) -> Result<Plan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    initial_plan_with(g, k, &mut rng)
}

fn initial_plan_with(g: &Geography, k: usize, rng: &mut ChaCha8Rng) -> Result<Plan> {
    let n = g.num_wards();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot grow {k} districts over {n} wards")));
    }
    const UNASSIGNED: usize = usize::MAX;
    let mut assignment = vec![UNASSIGNED; n];
    let seeds = rand::seq::index::sample(rng, n, k);
    let mut frontier = Vec::new();
    let mut in_frontier = vec![false; n];
    for (d, w) in seeds.iter().enumerate() {
        assignment[w] = d;
    }
    for w in seeds.iter() {
        for nb in g.neighbors(w) {
            if assignment[nb.ward] == UNASSIGNED && !in_frontier[nb.ward] {
                in_frontier[nb.ward] = true;
                frontier.push(nb.ward);
            }
        }
    }
    let mut remaining = n - k;
    while remaining > 0 {
        if frontier.is_empty() {
            return Err(Error::Validation("region growing stalled; graph is not connected".into()));
        }
        let w = frontier.swap_remove(rng.random_range(0..frontier.len()));
        let adjacent: Vec<usize> = {
            let mut ds: Vec<usize> = g
                .neighbors(w)
                .iter()
                .map(|nb| assignment[nb.ward])
                .filter(|&d| d != UNASSIGNED)
                .collect();
            ds.sort_unstable();
            ds.dedup();
            ds
        };
        assignment[w] = adjacent[rng.random_range(0..adjacent.len())];
        remaining -= 1;
        for nb in g.neighbors(w) {
            if assignment[nb.ward] == UNASSIGNED && !in_frontier[nb.ward] {
                in_frontier[nb.ward] = true;
                frontier.push(nb.ward);
            }
        }
    }
    Ok(Plan::from_assignment_unchecked(assignment))
}

/// The conflicted `(ward, district)` pairs of a plan as an indexable set,
/// maintained incrementally under single-ward moves.
#[derive(Debug, Clone)]
struct BoundarySet {
    /// For each ward, `(district, number of neighbors in it)`.
    neighbor_counts: Vec<Vec<(usize, u32)>>,
    pairs: Vec<(usize, usize)>,
    /// Position in `pairs` of `(w, d)` at `w * k + d`, or `ABSENT`.
    index: Vec<usize>,
    k: usize,
}

const ABSENT: usize = usize::MAX;

impl BoundarySet {
    fn new(g: &Geography, p: &Plan) -> Self {
        let mut set = BoundarySet {
            neighbor_counts: vec![Vec::new(); g.num_wards()],
            pairs: Vec::new(),
            index: vec![ABSENT; g.num_wards() * g.num_districts()],
            k: g.num_districts(),
        };
        for w in 0..g.num_wards() {
            for nb in g.neighbors(w) {
                set.bump(w, p.district_of(nb.ward), 1);
            }
        }
        for w in 0..g.num_wards() {
            let own = p.district_of(w);
            let mut ds: Vec<usize> = set.neighbor_counts[w].iter().map(|&(d, _)| d).collect();
            ds.sort_unstable();
            for d in ds {
                if d != own {
                    set.insert((w, d));
                }
            }
        }
        set
    }

    /// Adjusts the neighbor count of `w` in `d`; returns the new count.
    fn bump(&mut self, w: usize, d: usize, delta: i32) -> u32 {
        let counts = &mut self.neighbor_counts[w];
        match counts.iter().position(|&(x, _)| x == d) {
            Some(i) => {
                let c = (counts[i].1 as i32 + delta) as u32;
                if c == 0 {
                    counts.swap_remove(i);
                } else {
                    counts[i].1 = c;
                }
                c
            }
            None => {
                debug_assert!(delta > 0);
                counts.push((d, delta as u32));
                delta as u32
            }
        }
    }

    fn has_neighbor_in(&self, w: usize, d: usize) -> bool {
        self.neighbor_counts[w].iter().any(|&(x, _)| x == d)
    }

    fn slot(&self, (w, d): (usize, usize)) -> usize {
        w * self.k + d
    }

    fn insert(&mut self, pair: (usize, usize)) {
        let s = self.slot(pair);
        if self.index[s] == ABSENT {
            self.index[s] = self.pairs.len();
            self.pairs.push(pair);
        }
    }

    fn remove(&mut self, pair: (usize, usize)) {
        let s = self.slot(pair);
        let i = std::mem::replace(&mut self.index[s], ABSENT);
        if i != ABSENT {
            self.pairs.swap_remove(i);
            if i < self.pairs.len() {
                let moved = self.slot(self.pairs[i]);
                self.index[moved] = i;
            }
        }
    }

    /// Updates the set for moving `w` to `to`, given the assignment before
    /// the move.
    fn apply_move(&mut self, g: &Geography, assignment: &[usize], w: usize, to: usize) {
        let from = assignment[w];
        if from == to {
            return;
        }
        self.remove((w, to));
        if self.has_neighbor_in(w, from) {
            self.insert((w, from));
        }
        for nb in g.neighbors(w) {
            let u = nb.ward;
            let du = assignment[u];
            if self.bump(u, from, -1) == 0 && du != from {
                self.remove((u, from));
            }
            if self.bump(u, to, 1) == 1 && du != to {
                self.insert((u, to));
            }
        }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Sampler state visible to callers: the current plan and its score.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub plan: Plan,
    pub score: ScoreBreakdown,
    pub beta: f64,
    pub accepted_steps: u64,
    pub rng_seed: u64,
}

/// Result of a single proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposal {
    Move { ward: usize, to: usize },
    Rejected,
}

/// Reusable buffers for the donor connectivity search.
#[derive(Debug, Clone, Default)]
struct SearchScratch {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
    targets: Vec<usize>,
}

impl SearchScratch {
    fn new(n: usize) -> Self {
        SearchScratch {
            stamp: vec![0; n],
            ..Self::default()
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// True when removing `ward` leaves its district nonempty and connected.
/// Only the donor district is searched.
fn donor_stays_valid(
    g: &Geography,
    assignment: &[usize],
    sizes: &[usize],
    ward: usize,
    scratch: &mut SearchScratch,
) -> bool {
    let donor = assignment[ward];
    if sizes[donor] <= 1 {
        return false;
    }
    scratch.targets.clear();
    scratch
        .targets
        .extend(g.neighbors(ward).iter().map(|nb| nb.ward).filter(|&u| assignment[u] == donor));
    if scratch.targets.len() <= 1 {
        return true;
    }
    let epoch = scratch.next_epoch();
    let first = scratch.targets[0];
    scratch.stamp[ward] = epoch;
    scratch.stamp[first] = epoch;
    scratch.stack.clear();
    scratch.stack.push(first);
    let mut found = 1;
    while let Some(u) = scratch.stack.pop() {
        for nb in g.neighbors(u) {
            let v = nb.ward;
            if assignment[v] == donor && scratch.stamp[v] != epoch {
                scratch.stamp[v] = epoch;
                if scratch.targets.contains(&v) {
                    found += 1;
                    if found == scratch.targets.len() {
                        return true;
                    }
                }
                scratch.stack.push(v);
            }
        }
    }
    false
}

/// Draws a flip uniformly from the conflicted pairs of `state.plan`;
/// [`Proposal::Rejected`] when there are none or the donor would not
/// survive the move.
pub fn propose_move<R: Rng + ?Sized>(g: &Geography, state: &ChainState, rng: &mut R) -> Proposal {
    let pairs = conflicted_wards(g, &state.plan);
    if pairs.is_empty() {
        return Proposal::Rejected;
    }
    let (ward, to) = pairs[rng.random_range(0..pairs.len())];
    let mut sizes = vec![0; g.num_districts()];
    for &d in state.plan.assignment() {
        sizes[d] += 1;
    }
    let mut scratch = SearchScratch::new(g.num_wards());
    if donor_stays_valid(g, state.plan.assignment(), &sizes, ward, &mut scratch) {
        Proposal::Move { ward, to }
    } else {
        Proposal::Rejected
    }
}

/// Metropolis-Hastings acceptance with the proposal-count correction.
pub fn accept_move<R: Rng + ?Sized>(
    j_old: f64,
    j_new: f64,
    beta: f64,
    c_old: usize,
    c_new: usize,
    rng: &mut R,
) -> bool {
    let log_ratio = (c_old as f64 / c_new as f64).ln() - beta * (j_new - j_old);
    if log_ratio >= 0.0 {
        return true;
    }
    rng.random::<f64>() < log_ratio.exp()
}

/// Acceptance rule used by a chain. `IgnoreScore` exists to produce a
/// deliberately wrong sampler for mutation testing of the validators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcceptanceRule {
    #[default]
    MetropolisHastings,
    IgnoreScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// Proposal was invalid (donor emptied or disconnected, or no boundary).
    Invalid,
    /// Valid proposal rejected by the acceptance test.
    Declined,
}

/// A single Markov chain over plans of one geography.
pub struct Chain<'g> {
    g: &'g Geography,
    weights: ScoreWeights,
    state: ChainState,
    tracker: ScoreTracker,
    boundary: BoundarySet,
    sizes: Vec<usize>,
    scratch: SearchScratch,
    rng: ChaCha8Rng,
    proposals: u64,
    consecutive_rejections: u64,
    stall_cap: u64,
    rule: AcceptanceRule,
    debug_checks: bool,
}

impl<'g> Chain<'g> {
    pub fn new(g: &'g Geography, weights: ScoreWeights, plan: Plan, seed: u64) -> Self {
        Self::with_rng(g, weights, plan, seed, ChaCha8Rng::seed_from_u64(seed))
    }

    fn with_rng(g: &'g Geography, weights: ScoreWeights, plan: Plan, seed: u64, rng: ChaCha8Rng) -> Self {
        let tracker = ScoreTracker::new(g, &plan);
        let score = tracker.breakdown(g, &weights);
        let boundary = BoundarySet::new(g, &plan);
        let mut sizes = vec![0; g.num_districts()];
        for &d in plan.assignment() {
            sizes[d] += 1;
        }
        Chain {
            g,
            weights,
            state: ChainState {
                plan,
                score,
                beta: 0.0,
                accepted_steps: 0,
                rng_seed: seed,
            },
            tracker,
            boundary,
            sizes,
            scratch: SearchScratch::new(g.num_wards()),
            rng,
            proposals: 0,
            consecutive_rejections: 0,
            stall_cap: DEFAULT_STALL_CAP,
            rule: AcceptanceRule::MetropolisHastings,
            debug_checks: false,
        }
    }

    pub fn set_stall_cap(&mut self, cap: u64) {
        self.stall_cap = cap;
    }

    pub fn set_acceptance_rule(&mut self, rule: AcceptanceRule) {
        self.rule = rule;
    }

    /// After every accepted step, re-validate the plan and compare the
    /// tracked score against a full recomputation. Slow.
    pub fn set_debug_checks(&mut self, on: bool) {
        self.debug_checks = on;
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn plan(&self) -> &Plan {
        &self.state.plan
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// Number of conflicted pairs in the current plan.
    pub fn boundary_size(&self) -> usize {
        self.boundary.len()
    }

    /// Draws a candidate flip uniformly from the conflicted pairs and
    /// checks that the donor district stays nonempty and contiguous.
    pub fn propose(&mut self) -> Proposal {
        if self.boundary.len() == 0 {
            return Proposal::Rejected;
        }
        let (ward, to) = self.boundary.pairs[self.rng.random_range(0..self.boundary.len())];
        if self.donor_survives(ward) {
            Proposal::Move { ward, to }
        } else {
            Proposal::Rejected
        }
    }

    fn donor_survives(&mut self, ward: usize) -> bool {
        donor_stays_valid(self.g, self.state.plan.assignment(), &self.sizes, ward, &mut self.scratch)
    }

    /// One proposal at the given inverse temperature.
    pub fn step(&mut self, beta: f64) -> Result<StepOutcome> {
        self.proposals += 1;
        self.state.beta = beta;
        let outcome = match self.propose() {
            Proposal::Rejected => StepOutcome::Invalid,
            Proposal::Move { ward, to } => self.try_move(ward, to, beta),
        };
        if outcome == StepOutcome::Accepted {
            self.consecutive_rejections = 0;
            self.state.accepted_steps += 1;
            if self.debug_checks {
                self.check_consistency();
            }
        } else {
            self.consecutive_rejections += 1;
            if self.consecutive_rejections >= self.stall_cap {
                return Err(Error::Stalled(self.consecutive_rejections));
            }
        }
        Ok(outcome)
    }

    fn try_move(&mut self, ward: usize, to: usize, beta: f64) -> StepOutcome {
        let from = self.state.plan.district_of(ward);
        let c_old = self.boundary.len();
        let j_old = self.state.score.total;
        let undo = self.tracker.apply_move(self.g, self.state.plan.assignment(), ward, to);
        self.boundary.apply_move(self.g, self.state.plan.assignment(), ward, to);
        self.state.plan.set(ward, to);
        let new_score = self.tracker.breakdown(self.g, &self.weights);
        let c_new = self.boundary.len();

        let accept = match self.rule {
            AcceptanceRule::MetropolisHastings => {
                accept_move(j_old, new_score.total, beta, c_old, c_new, &mut self.rng)
            }
            AcceptanceRule::IgnoreScore => true,
        };
        if accept {
            self.state.score = new_score;
            self.sizes[from] -= 1;
            self.sizes[to] += 1;
            StepOutcome::Accepted
        } else {
            self.boundary.apply_move(self.g, self.state.plan.assignment(), ward, from);
            self.state.plan.set(ward, from);
            self.tracker.undo(self.g, undo);
            StepOutcome::Declined
        }
    }

    fn check_consistency(&self) {
        let g = self.g;
        if let Err(e) = self.state.plan.validate(g) {
            panic!("chain produced an invalid plan: {e}");
        }
        let full = crate::scores::total_score(g, &self.state.plan, &self.weights);
        let tol = 1e-9 * full.total.abs().max(1.0);
        assert!(
            (full.total - self.state.score.total).abs() <= tol,
            "tracked score {} drifted from {}",
            self.state.score.total,
            full.total
        );
        assert_eq!(
            self.boundary.len(),
            crate::geography::conflicted_wards(g, &self.state.plan).len()
        );
    }

    /// Runs until the schedule's accepted-step total is reached.
    pub fn anneal(&mut self, schedule: &AnnealingSchedule) -> Result<()> {
        let total = schedule.total();
        while self.state.accepted_steps < total {
            let beta = schedule.beta_at(self.state.accepted_steps);
            self.step(beta)?;
        }
        self.state.beta = schedule.beta_at(total);
        Ok(())
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub plan: Plan,
    pub score: ScoreBreakdown,
    pub accepted_steps: u64,
    pub proposals: u64,
}

/// Grows a random initial plan and anneals it; deterministic in `seed`.
pub fn run_annealed_chain(
    g: &Geography,
    weights: &ScoreWeights,
    schedule: &AnnealingSchedule,
    seed: u64,
) -> Result<ChainResult> {
    run_chain_with_cap(g, weights, schedule, seed, DEFAULT_STALL_CAP)
}

fn run_chain_with_cap(
    g: &Geography,
    weights: &ScoreWeights,
    schedule: &AnnealingSchedule,
    seed: u64,
    stall_cap: u64,
) -> Result<ChainResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = initial_plan_with(g, g.num_districts(), &mut rng)?;
    let mut chain = Chain::with_rng(g, *weights, initial, seed, rng);
    chain.set_stall_cap(stall_cap);
    chain.anneal(schedule)?;
    let proposals = chain.proposals();
    let state = chain.into_state();
    Ok(ChainResult {
        plan: state.plan,
        score: state.score,
        accepted_steps: state.accepted_steps,
        proposals,
    })
}

/// Per-run seed from the master seed and run index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, run_index: u64) -> u64 {
    let mut z = master
        .wrapping_add(run_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub run_index: u64,
    pub seed: u64,
    pub accepted_steps: u64,
    pub proposals: u64,
    pub scores: ScoreBreakdown,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ensemble {
    pub plans: Vec<Plan>,
    pub provenance: Vec<Provenance>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

/// Run-level statistics written next to an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub target: usize,
    pub runs_attempted: usize,
    pub runs_accepted: usize,
    pub filter_acceptance_rate: f64,
    /// Accepted steps over proposals, pooled across retained runs.
    pub mh_acceptance_rate: f64,
    pub filter_failures: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions {
    pub workers: usize,
    /// Maximum number of annealing runs before giving up.
    pub max_attempts: usize,
    pub stall_cap: u64,
}

impl EnsembleOptions {
    pub fn for_target(n_target: usize) -> Self {
        EnsembleOptions {
            workers: 1,
            max_attempts: n_target.saturating_mul(20).max(100),
            stall_cap: DEFAULT_STALL_CAP,
        }
    }
}

const BATCH: usize = 32;

/// Runs independent annealed chains with seeds derived from `seed` until
/// `n_target` plans pass `crit`. Plans are kept in run-index order, so the
/// result does not depend on the worker count.
pub fn generate_ensemble(
    g: &Geography,
    weights: &ScoreWeights,
    schedule: &AnnealingSchedule,
    crit: &FilterCriteria,
    n_target: usize,
    seed: u64,
    options: &EnsembleOptions,
) -> Result<(Ensemble, SamplingSummary)> {
    if n_target == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    crit.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let mut ensemble = Ensemble::default();
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    let mut attempts = 0usize;
    let (mut accepted_steps, mut proposals) = (0u64, 0u64);
    while ensemble.len() < n_target && attempts < options.max_attempts {
        let batch = BATCH.min(options.max_attempts - attempts);
        let runs: Vec<Result<(u64, u64, ChainResult, Result<(), Vec<FilterFailure>>)>> = pool.install(|| {
            (attempts..attempts + batch)
                .into_par_iter()
                .map(|i| {
                    let run_seed = derive_seed(seed, i as u64);
                    let res = run_chain_with_cap(g, weights, schedule, run_seed, options.stall_cap)?;
                    let verdict = passes_filter(g, &res.plan, crit);
                    Ok((i as u64, run_seed, res, verdict))
                })
                .collect()
        });
        for run in runs {
            let (run_index, run_seed, res, verdict) = run?;
            attempts += 1;
            if ensemble.len() >= n_target {
                continue;
            }
            match verdict {
                Ok(()) => {
                    accepted_steps += res.accepted_steps;
                    proposals += res.proposals;
                    ensemble.provenance.push(Provenance {
                        run_index,
                        seed: run_seed,
                        accepted_steps: res.accepted_steps,
                        proposals: res.proposals,
                        scores: res.score,
                    });
                    ensemble.plans.push(res.plan);
                }
                Err(reasons) => {
                    for r in reasons {
                        *failures.entry(r.to_string()).or_default() += 1;
                    }
                }
            }
        }
    }
    let runs_attempted = ensemble
        .provenance
        .last()
        .map(|p| p.run_index as usize + 1)
        .filter(|_| ensemble.len() >= n_target)
        .unwrap_or(attempts);
    if ensemble.len() < n_target {
        return Err(Error::BudgetExhausted {
            target: n_target,
            accepted: ensemble.len(),
            attempts,
            failures: format!("{failures:?}"),
        });
    }
    let summary = SamplingSummary {
        target: n_target,
        runs_attempted,
        runs_accepted: ensemble.len(),
        filter_acceptance_rate: ensemble.len() as f64 / runs_attempted as f64,
        mh_acceptance_rate: if proposals == 0 {
            0.0
        } else {
            accepted_steps as f64 / proposals as f64
        },
        filter_failures: failures,
    };
    Ok((ensemble, summary))
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleLine {
    plan_id: usize,
    seed: u64,
    scores: ScoreBreakdown,
    assignment: Vec<usize>,
}

/// Writes one JSON object per plan:
/// `{plan_id, seed, scores: {pop, comp, county, vra, town, total}, assignment}`.
pub fn write_ensemble(path: &Path, ensemble: &Ensemble) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(f);
    for (i, (plan, prov)) in ensemble.plans.iter().zip(&ensemble.provenance).enumerate() {
        let line = EnsembleLine {
            plan_id: i,
            seed: prov.seed,
            scores: prov.scores,
            assignment: plan.assignment().to_vec(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads an ensemble file, validating every plan against `g`.
pub fn read_ensemble(path: &Path, g: &Geography) -> Result<Ensemble> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ensemble = Ensemble::default();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EnsembleLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path.display().to_string(), n as u64 + 1, e.to_string()))?;
        let plan = Plan::new(g, rec.assignment)?;
        ensemble.provenance.push(Provenance {
            run_index: rec.plan_id as u64,
            seed: rec.seed,
            accepted_steps: 0,
            proposals: 0,
            scores: rec.scores,
        });
        ensemble.plans.push(plan);
    }
    Ok(ensemble)
}
