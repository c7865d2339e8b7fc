//! Ground truth for validating the sampler and statistics on small
//! instances: seeded synthetic grids with vote and demographic fields,
//! exhaustive enumeration of contiguous plans, exact Boltzmann
//! probabilities and total-variation distance.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elections::{write_votes, Election, ReferenceElection, VoteCounts};
use crate::error::{Error, Result};
use crate::geography::{Geography, Plan, Ward};
use crate::sampler::{passes_filter, AcceptanceRule, Chain, FilterCriteria};
use crate::scores::{total_score, ScoreWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationField {
    Uniform,
    /// Population rises linearly toward the urban center, up to
    /// `1 + urban_population_boost` times the base.
    UrbanCluster,
}

/// Parameters of a synthetic grid instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub districts: usize,
    pub seed: u64,
    pub population: PopulationField,
    pub base_population: u64,
    pub urban_population_boost: f64,
    /// Republican share away from the urban cluster.
    pub base_rep_share: f64,
    /// Democratic gain at the urban center.
    pub urban_dem_amplitude: f64,
    /// Half-width of the uniform noise added to ward shares.
    pub share_noise: f64,
    /// Side length of the square county blocks, in wards.
    pub county_block: usize,
    pub town_block: usize,
    /// Black population fraction at the urban center.
    pub black_peak: f64,
    /// Hispanic population fraction at the corner cluster.
    pub hispanic_peak: f64,
    /// Fraction of wards left unopposed in the target election.
    pub unopposed_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            width: 8,
            height: 8,
            districts: 4,
            seed: 0,
            population: PopulationField::Uniform,
            base_population: 1000,
            urban_population_boost: 1.0,
            base_rep_share: 0.55,
            urban_dem_amplitude: 0.25,
            share_noise: 0.02,
            county_block: 4,
            town_block: 2,
            black_peak: 0.0,
            hispanic_peak: 0.0,
            unopposed_fraction: 0.1,
        }
    }
}

/// Ids of the elections written by [`synth_geography`].
pub const REFERENCE_ELECTIONS: [&str; 2] = ["REF_A", "REF_B"];
pub const TARGET_ELECTION: &str = "TARGET";

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub geography: Geography,
    /// Two fully opposed elections followed by the target election with
    /// unopposed wards.
    pub elections: Vec<Election>,
    /// The target election before its unopposed wards were blanked.
    pub target_truth: Election,
    /// Contiguous, population-balanced stripes along a snake ordering.
    pub reference_plan: Plan,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.width * self.height;
        if n == 0 || self.districts == 0 || n < self.districts {
            return Err(Error::Validation(format!(
                "a {}x{} grid cannot hold {} districts",
                self.width, self.height, self.districts
            )));
        }
        if self.base_population == 0 || self.county_block == 0 || self.town_block == 0 {
            return Err(Error::Validation("population and block sizes must be positive".into()));
        }
        for (name, v) in [
            ("base_rep_share", self.base_rep_share),
            ("black_peak", self.black_peak),
            ("hispanic_peak", self.hispanic_peak),
            ("unopposed_fraction", self.unopposed_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.urban_population_boost < 0.0 || self.share_noise < 0.0 || self.urban_dem_amplitude < 0.0 {
            return Err(Error::Validation("boost, noise and amplitude must be nonnegative".into()));
        }
        Ok(())
    }

    fn radius(&self) -> f64 {
        (self.width.max(self.height) as f64 / 3.0).max(1.0)
    }

    fn urban_center(&self) -> (f64, f64) {
        ((self.width as f64 - 1.0) / 2.0, (self.height as f64 - 1.0) / 2.0)
    }

    /// Linear falloff from 1 at `center` to 0 at the cluster radius.
    fn bump(&self, x: usize, y: usize, center: (f64, f64)) -> f64 {
        let d = ((x as f64 - center.0).powi(2) + (y as f64 - center.1).powi(2)).sqrt();
        (1.0 - d / self.radius()).max(0.0)
    }

    /// Democratic gain of the urban cluster at a ward, before noise.
    pub fn urban_effect(&self, x: usize, y: usize) -> f64 {
        self.urban_dem_amplitude * self.bump(x, y, self.urban_center())
    }

    /// Wards whose urban effect outweighs the share noise.
    pub fn in_urban_cluster(&self, x: usize, y: usize) -> bool {
        self.urban_effect(x, y) > self.share_noise
    }
}

fn clamp_share(s: f64) -> f64 {
    s.clamp(0.02, 0.98)
}

fn opposed_votes(turnout: u64, share: f64, third: f64) -> VoteCounts {
    let other = (third * turnout as f64).round() as u64;
    let two_party = turnout - other;
    let rep = (share * two_party as f64).round() as u64;
    VoteCounts {
        total: turnout,
        dem: two_party - rep,
        rep,
    }
}

/// Builds a seeded synthetic grid instance with its elections.
pub fn synth_geography(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let hispanic_center = (0.0, (h as f64 - 1.0));

    let mut county_names = Vec::new();
    let mut town_names = Vec::new();
    let mut county_index = HashMap::new();
    let mut town_index = HashMap::new();
    let mut wards = Vec::with_capacity(w * h);
    let mut shares = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let county_name = format!("c{}_{}", x / spec.county_block, y / spec.county_block);
            let town_name = format!("t{}_{}", x / spec.town_block, y / spec.town_block);
            let county = *county_index.entry(county_name.clone()).or_insert_with(|| {
                county_names.push(county_name);
                county_names.len() - 1
            });
            let town = *town_index.entry(town_name.clone()).or_insert_with(|| {
                town_names.push(town_name);
                town_names.len() - 1
            });
            let urban = spec.bump(x, y, spec.urban_center());
            let population = match spec.population {
                PopulationField::Uniform => spec.base_population,
                PopulationField::UrbanCluster => {
                    (spec.base_population as f64 * (1.0 + spec.urban_population_boost * urban)).round() as u64
                }
            };
            let black = (population as f64 * spec.black_peak * urban).round() as u64;
            let hisp_frac = spec.hispanic_peak * spec.bump(x, y, hispanic_center);
            let hispanic = ((population as f64 * hisp_frac).round() as u64).min(population - black);
            let outer = [x == 0, x + 1 == w, y == 0, y + 1 == h].iter().filter(|&&b| b).count() as f64;
            wards.push(Ward {
                name: format!("w{}", y * w + x),
                population,
                black_population: black,
                hispanic_population: hispanic,
                county,
                town,
                area: 1.0,
                outer_boundary: outer,
            });
            let noise = rng.random_range(-1.0..=1.0) * spec.share_noise;
            shares.push(clamp_share(spec.base_rep_share - spec.urban_effect(x, y) + noise));
        }
    }
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                edges.push((i, i + 1, 1.0));
            }
            if y + 1 < h {
                edges.push((i, i + w, 1.0));
            }
        }
    }
    let g = Geography::new(wards, &edges, spec.districts, county_names, town_names)?;

    let n = w * h;
    let mut ref_a = Vec::with_capacity(n);
    let mut ref_b = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for (i, &share) in shares.iter().enumerate() {
        let pop = g.ward(i).population as f64;
        let turnout_a = (pop * rng.random_range(0.45..0.6)).round().max(1.0) as u64;
        let turnout_b = (pop * rng.random_range(0.35..0.5)).round().max(1.0) as u64;
        let share_b = clamp_share(share + rng.random_range(-1.0..=1.0) * spec.share_noise);
        ref_a.push(opposed_votes(turnout_a, share, 0.02));
        ref_b.push(opposed_votes(turnout_b, share_b, 0.03));
        let turnout_t = (1.1 * turnout_a as f64 + rng.random_range(0.0..20.0)).round() as u64;
        let share_t = clamp_share(share - 0.01 + rng.random_range(-0.5..=0.5) * spec.share_noise);
        truth.push(opposed_votes(turnout_t, share_t, 0.02));
    }
    let ref_a = Election::new(REFERENCE_ELECTIONS[0], ref_a, vec![true; n])?;
    let ref_b = Election::new(REFERENCE_ELECTIONS[1], ref_b, vec![true; n])?;
    let target_truth = Election::new(TARGET_ELECTION, truth.clone(), vec![true; n])?;

    // the least competitive wards go uncontested
    let mut n_bad = (spec.unopposed_fraction * n as f64).round() as usize;
    if spec.unopposed_fraction > 0.0 {
        n_bad = n_bad.max(1);
    }
    let n_bad = n_bad.min(n.saturating_sub(2));
    let mut by_margin: Vec<usize> = (0..n).collect();
    by_margin.sort_by(|&a, &b| {
        let ma = (shares[a] - 0.5).abs();
        let mb = (shares[b] - 0.5).abs();
        mb.total_cmp(&ma).then(a.cmp(&b))
    });
    let mut opposed = vec![true; n];
    let mut observed = truth;
    for &i in &by_margin[..n_bad] {
        opposed[i] = false;
        let v = observed[i];
        observed[i] = if shares[i] > 0.5 {
            VoteCounts {
                total: v.total,
                dem: 0,
                rep: v.total,
            }
        } else {
            VoteCounts {
                total: v.total,
                dem: v.total,
                rep: 0,
            }
        };
    }
    let target = Election::new(TARGET_ELECTION, observed, opposed)?;
    let reference_plan = snake_stripes(&g, spec.width, spec.height)?;
    Ok(SyntheticData {
        geography: g,
        elections: vec![ref_a, ref_b, target],
        target_truth,
        reference_plan,
    })
}

/// Cuts the boustrophedon ordering of a grid into `k` consecutive runs of
/// roughly equal population; each run is contiguous.
fn snake_stripes(g: &Geography, width: usize, height: usize) -> Result<Plan> {
    let k = g.num_districts();
    let order: Vec<usize> = (0..height)
        .flat_map(|y| {
            let row: Vec<usize> = (0..width).map(|x| y * width + x).collect();
            if y % 2 == 0 {
                row
            } else {
                row.into_iter().rev().collect()
            }
        })
        .collect();
    let ideal = g.ideal_population();
    let mut assignment = vec![0; order.len()];
    let mut cumulative = 0u64;
    let mut district = 0;
    for (pos, &w) in order.iter().enumerate() {
        let remaining_wards = order.len() - pos;
        let remaining_districts = k - district;
        // open the next district when this one is full, or when every
        // remaining ward is needed to keep the later ones nonempty
        let filled = cumulative as f64 >= ideal * (district + 1) as f64 - 1e-9;
        let must_advance = remaining_wards < remaining_districts;
        if district + 1 < k && pos > 0 && (filled || must_advance) && assignment[order[pos - 1]] == district {
            district += 1;
        }
        assignment[w] = district;
        cumulative += g.ward(w).population;
    }
    Plan::new(g, assignment)
}

/// Writes `wards.csv` (with the reference plan), `adjacency.csv` and
/// `votes.csv` into `dir`.
pub fn write_synthetic(dir: &Path, data: &SyntheticData) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    data.geography
        .write_csv(&dir.join("wards.csv"), &dir.join("adjacency.csv"), Some(&data.reference_plan))?;
    write_votes(&dir.join("votes.csv"), &data.geography, &data.elections, false)
}

/// Stirling number of the second kind as a float, for size estimates.
fn stirling2(n: usize, k: usize) -> f64 {
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

pub const MAX_ENUMERATION_WARDS: usize = 16;
pub const MAX_ENUMERATION_ESTIMATE: f64 = 1e6;

struct Enumerator<'a> {
    g: &'a Geography,
    k: usize,
    assignment: Vec<usize>,
    out: Vec<Plan>,
}

impl Enumerator<'_> {
    /// Every district's assigned wards must still be joinable through
    /// wards of the same district or wards not yet assigned (`>= next`).
    fn still_connectable(&self, next: usize, used: usize) -> bool {
        let n = self.assignment.len();
        let mut seen = vec![false; n];
        for d in 0..used {
            let Some(start) = (0..next).find(|&w| self.assignment[w] == d) else {
                continue;
            };
            seen.iter_mut().for_each(|s| *s = false);
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for nb in self.g.neighbors(u) {
                    let v = nb.ward;
                    if !seen[v] && (v >= next || self.assignment[v] == d) {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            if (0..next).any(|w| self.assignment[w] == d && !seen[w]) {
                return false;
            }
        }
        true
    }

    fn descend(&mut self, next: usize, used: usize) {
        let n = self.assignment.len();
        if next == n {
            if used == self.k {
                self.out.push(Plan::from_assignment_unchecked(self.assignment.clone()));
            }
            return;
        }
        // labels appear in order of first use, so each partition is seen once
        let max_label = used.min(self.k - 1);
        for d in 0..=max_label {
            let new_used = used.max(d + 1);
            if n - next - 1 < self.k - new_used {
                continue;
            }
            self.assignment[next] = d;
            if self.still_connectable(next + 1, new_used) {
                self.descend(next + 1, new_used);
            }
        }
    }
}

/// Every contiguous plan with `k` nonempty districts that passes `crit`,
/// in canonical labeling, each partition exactly once.
pub fn enumerate_plans(g: &Geography, k: usize, crit: &FilterCriteria) -> Result<Vec<Plan>> {
    let n = g.num_wards();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot split {n} wards into {k} districts")));
    }
    let estimate = stirling2(n, k);
    if n > MAX_ENUMERATION_WARDS && estimate > MAX_ENUMERATION_ESTIMATE {
        return Err(Error::TooLarge(format!(
            "{n} wards into {k} districts (about {estimate:.3e} labelings)"
        )));
    }
    let g = &g.with_districts(k)?;
    let mut e = Enumerator {
        g,
        k,
        assignment: vec![0; n],
        out: Vec::new(),
    };
    e.descend(0, 0);
    Ok(e.out.into_iter().filter(|p| passes_filter(g, p, crit).is_ok()).collect())
}

/// Exact Boltzmann weights `exp(-beta J) / Z` over a set of plans.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub plans: Vec<Plan>,
    pub scores: Vec<f64>,
    pub probabilities: Vec<f64>,
    index: HashMap<Plan, usize>,
}

impl ExactDistribution {
    /// Normalizes `exp(-beta * score)` with a log-sum-exp shift.
    pub fn from_scores(plans: Vec<Plan>, scores: Vec<f64>, beta: f64) -> Result<Self> {
        if plans.is_empty() || plans.len() != scores.len() {
            return Err(Error::InvalidArgument("need one score per plan and at least one plan".into()));
        }
        let logits: Vec<f64> = scores.iter().map(|j| -beta * j).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / z).collect();
        let index = plans.iter().enumerate().map(|(i, p)| (p.canonical(), i)).collect();
        Ok(ExactDistribution {
            plans,
            scores,
            probabilities,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Position of a plan, compared up to relabeling.
    pub fn index_of(&self, p: &Plan) -> Option<usize> {
        self.index.get(&p.canonical()).copied()
    }

    /// Normalizes visit counts keyed by plan onto this distribution's
    /// support.
    pub fn empirical(&self, counts: &HashMap<Plan, u64>) -> Result<Vec<f64>> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("no visits recorded".into()));
        }
        let mut out = vec![0.0; self.len()];
        for (p, &c) in counts {
            let i = self
                .index_of(p)
                .ok_or_else(|| Error::SupportMismatch(format!("plan {:?} is not enumerated", p.assignment())))?;
            out[i] += c as f64 / total as f64;
        }
        Ok(out)
    }
}

pub fn exact_boltzmann(plans: &[Plan], g: &Geography, weights: &ScoreWeights, beta: f64) -> Result<ExactDistribution> {
    let scores = plans.iter().map(|p| total_score(g, p, weights).total).collect();
    ExactDistribution::from_scores(plans.to_vec(), scores, beta)
}

/// Half the L1 distance between two distributions on the same support.
pub fn tv_distance(empirical: &[f64], exact: &[f64]) -> Result<f64> {
    if empirical.len() != exact.len() {
        return Err(Error::SupportMismatch(format!(
            "{} versus {} support points",
            empirical.len(),
            exact.len()
        )));
    }
    Ok(0.5 * empirical.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Runs a chain at fixed `beta` until `accepted` steps have been taken and
/// counts the canonical plan held after every proposal, rejected ones
/// included.
pub fn fixed_beta_visits(
    g: &Geography,
    weights: &ScoreWeights,
    beta: f64,
    initial: Plan,
    accepted: u64,
    seed: u64,
    rule: AcceptanceRule,
) -> Result<HashMap<Plan, u64>> {
    let mut chain = Chain::new(g, *weights, initial, seed);
    chain.set_acceptance_rule(rule);
    let mut visits: HashMap<Plan, u64> = HashMap::new();
    while chain.state().accepted_steps < accepted {
        chain.step(beta)?;
        *visits.entry(chain.plan().canonical()).or_insert(0) += 1;
    }
    Ok(visits)
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples`
/// (values in `[0, 1]`) and the uniform CDF.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

/// An interpolation test case whose target totals are exactly
/// `2 * U_tot + 3` of the exact reference and whose shares copy it up to
/// rounding, plus a noise reference with unrelated values.
#[derive(Debug, Clone)]
pub struct InterpolationFixture {
    pub truth: Election,
    pub target: Election,
    pub exact: ReferenceElection,
    pub noise: ReferenceElection,
}

pub fn exact_linear_fixture(seed: u64, wards: usize, unopposed: usize) -> Result<InterpolationFixture> {
    if wards < unopposed + 2 {
        return Err(Error::InvalidArgument("need at least two opposed wards".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // distinct totals avoid degenerate local fits
    let mut totals: Vec<u64> = (0..4 * wards as u64).map(|i| 4000 + 7 * i).collect();
    totals.shuffle(&mut rng);
    let mut u = Vec::with_capacity(wards);
    let mut v = Vec::with_capacity(wards);
    let mut noise = Vec::with_capacity(wards);
    for &total in &totals[..wards] {
        let rep = (rng.random_range(0.2..0.8) * total as f64).round() as u64;
        u.push(VoteCounts {
            total,
            rep,
            dem: total - rep,
        });
        let vt = 2 * total + 3;
        let vrep = (rep as f64 / total as f64 * vt as f64).round() as u64;
        v.push(VoteCounts {
            total: vt,
            rep: vrep,
            dem: vt - vrep,
        });
        let nt = rng.random_range(1000..12000u64);
        let nrep = (rng.random_range(0.2..0.8) * nt as f64).round() as u64;
        noise.push(VoteCounts {
            total: nt,
            rep: nrep,
            dem: nt - nrep,
        });
    }
    let mut hidden: Vec<usize> = (0..wards).collect();
    hidden.shuffle(&mut rng);
    let mut opposed = vec![true; wards];
    let mut observed = v.clone();
    for &i in &hidden[..unopposed] {
        opposed[i] = false;
        observed[i] = VoteCounts {
            total: v[i].total,
            rep: 0,
            dem: v[i].total,
        };
    }
    Ok(InterpolationFixture {
        truth: Election::new("TRUTH", v, vec![true; wards])?,
        target: Election::new("TARGET", observed, opposed)?,
        exact: ReferenceElection::try_from(Election::new("EXACT", u, vec![true; wards])?)?,
        noise: ReferenceElection::try_from(Election::new("NOISE", noise, vec![true; wards])?)?,
    })
}
