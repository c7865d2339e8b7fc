//! Ward-level vote data, district tallies and seat counts, uniform vote
//! shifts, and interpolation of wards where the race was unopposed.
//!
//! Shares are two-party: Republican votes over Republican plus Democratic
//! votes. Ward totals (which may include other candidates) are only used
//! inside the interpolation regressions.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geography::{write_file, Geography, Plan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoteCounts {
    pub total: u64,
    pub dem: u64,
    pub rep: u64,
}

/// One election over every ward. Wards with `opposed == false` form the
/// set whose values are estimated by [`interpolate_election`].
#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    id: String,
    votes: Vec<VoteCounts>,
    opposed: Vec<bool>,
    interpolated: Vec<bool>,
}

impl Election {
    pub fn new(id: impl Into<String>, votes: Vec<VoteCounts>, opposed: Vec<bool>) -> Result<Self> {
        let id = id.into();
        if votes.len() != opposed.len() {
            return Err(Error::Validation(format!("election {id}: vote and flag lengths differ")));
        }
        if let Some(i) = votes.iter().position(|v| v.dem + v.rep > v.total) {
            return Err(Error::Validation(format!(
                "election {id}: ward {i} has dem + rep above total"
            )));
        }
        let interpolated = vec![false; votes.len()];
        Ok(Election {
            id,
            votes,
            opposed,
            interpolated,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn votes(&self) -> &[VoteCounts] {
        &self.votes
    }

    pub fn opposed(&self) -> &[bool] {
        &self.opposed
    }

    pub fn interpolated(&self) -> &[bool] {
        &self.interpolated
    }

    pub fn num_wards(&self) -> usize {
        self.votes.len()
    }

    pub fn is_fully_opposed(&self) -> bool {
        self.opposed.iter().all(|&o| o)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

/// A complete election used as regressor data for interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElection(Election);

impl ReferenceElection {
    pub fn id(&self) -> &str {
        self.0.id()
    }

    pub fn votes(&self) -> &[VoteCounts] {
        self.0.votes()
    }
}

impl TryFrom<Election> for ReferenceElection {
    type Error = Error;

    fn try_from(e: Election) -> Result<Self> {
        if let Some(i) = e.votes.iter().position(|v| v.total == 0) {
            return Err(Error::Validation(format!(
                "reference election {}: ward {i} has zero total votes",
                e.id
            )));
        }
        if !e.is_fully_opposed() {
            return Err(Error::Validation(format!(
                "reference election {} has unopposed wards",
                e.id
            )));
        }
        Ok(ReferenceElection(e))
    }
}

/// Statewide two-party Republican fraction `r(pi)`.
pub fn statewide_rep_fraction(e: &Election) -> Result<f64> {
    let rep: u64 = e.votes.iter().map(|v| v.rep).sum();
    let dem: u64 = e.votes.iter().map(|v| v.dem).sum();
    if rep + dem == 0 {
        return Err(Error::ZeroTwoPartyTotal);
    }
    Ok(rep as f64 / (rep + dem) as f64)
}

/// Something with a Republican two-party share per district.
pub trait DistrictShares {
    fn shares(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistrictTally {
    pub rep_votes: Vec<u64>,
    pub dem_votes: Vec<u64>,
}

impl DistrictTally {
    pub fn num_districts(&self) -> usize {
        self.rep_votes.len()
    }
}

/// Two-party share; a district with no two-party votes counts as a tie.
fn two_party_share(rep: u64, dem: u64) -> f64 {
    if rep + dem == 0 {
        0.5
    } else {
        rep as f64 / (rep + dem) as f64
    }
}

impl DistrictShares for DistrictTally {
    fn shares(&self) -> Vec<f64> {
        self.rep_votes
            .iter()
            .zip(&self.dem_votes)
            .map(|(&r, &d)| two_party_share(r, d))
            .collect()
    }
}

pub fn district_tallies(g: &Geography, p: &Plan, e: &Election) -> DistrictTally {
    let k = g.num_districts();
    let mut tally = DistrictTally {
        rep_votes: vec![0; k],
        dem_votes: vec![0; k],
    };
    for (w, v) in e.votes.iter().enumerate() {
        let d = p.district_of(w);
        tally.rep_votes[d] += v.rep;
        tally.dem_votes[d] += v.dem;
    }
    tally
}

/// District Republican shares of `e` under plan `p`.
pub fn district_shares(g: &Geography, p: &Plan, e: &Election) -> Vec<f64> {
    district_tallies(g, p, e).shares()
}

/// District shares after a uniform shift of `shift` percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedElection {
    pub base: Vec<f64>,
    pub shift: f64,
    pub shares: Vec<f64>,
}

impl DistrictShares for ShiftedElection {
    fn shares(&self) -> Vec<f64> {
        self.shares.clone()
    }
}

impl DistrictShares for [f64] {
    fn shares(&self) -> Vec<f64> {
        self.to_vec()
    }
}

impl DistrictShares for Vec<f64> {
    fn shares(&self) -> Vec<f64> {
        self.clone()
    }
}

/// Adds `delta` percentage points to every district share, clamped to [0, 1].
pub fn shift_shares(base: &[f64], delta: f64) -> ShiftedElection {
    ShiftedElection {
        base: base.to_vec(),
        shift: delta,
        shares: base.iter().map(|&p| (p + delta / 100.0).clamp(0.0, 1.0)).collect(),
    }
}

pub fn shift_election(t: &DistrictTally, delta: f64) -> ShiftedElection {
    shift_shares(&t.shares(), delta)
}

/// Shift that moves the statewide fraction `statewide` (in [0, 1]) to
/// `target_percent`.
pub fn delta_for_target(target_percent: f64, statewide: f64) -> f64 {
    target_percent - 100.0 * statewide
}

pub fn shift_to_target(t: &DistrictTally, target_percent: f64, statewide: f64) -> ShiftedElection {
    shift_election(t, delta_for_target(target_percent, statewide))
}

/// `(rep_seats, dem_seats)`; a share of exactly one half is a Democratic seat.
pub fn seats<S: DistrictShares + ?Sized>(s: &S) -> (usize, usize) {
    let shares = s.shares();
    let rep = rep_seats(&shares, 0.0);
    (rep, shares.len() - rep)
}

/// Republican seats of raw shares under a shift of `delta` points.
pub fn rep_seats(shares: &[f64], delta: f64) -> usize {
    let d = delta / 100.0;
    shares.iter().filter(|&&p| (p + d).clamp(0.0, 1.0) > 0.5).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Rep,
    Dem,
}

/// Least-squares line through `points`, evaluated at `x`. Degenerate
/// abscissae fall back to the mean ordinate.
fn local_fit(points: &[(f64, f64)], x: f64) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n {
        my
    } else {
        my + sxy / sxx * (x - mx)
    }
}

/// Wards sorted by a regressor, used to find for each ward the two nearest
/// usable wards below and above it in the ordering.
struct SortedRegressor {
    order: Vec<usize>,
    position: Vec<usize>,
    x: Vec<f64>,
}

impl SortedRegressor {
    fn new(x: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let mut position = vec![0; x.len()];
        for (pos, &w) in order.iter().enumerate() {
            position[w] = pos;
        }
        SortedRegressor { order, position, x }
    }

    /// Up to two usable wards on each side of `ward` in sorted order,
    /// excluding `ward` itself.
    fn neighbors(&self, ward: usize, usable: impl Fn(usize) -> bool) -> Vec<usize> {
        let pos = self.position[ward];
        let mut out = Vec::with_capacity(4);
        let below = self.order[..pos].iter().rev().filter(|&&j| usable(j)).take(2);
        out.extend(below);
        let above = self.order[pos + 1..].iter().filter(|&&j| usable(j)).take(2);
        out.extend(above);
        out
    }
}

/// Per-ward `(total, rep, dem)` estimates from one reference election.
/// Wards in `targets` are estimated from the good wards around them; a
/// target that is itself a good ward is held out of its own fit.
fn reference_estimates(
    target: &Election,
    reference: &ReferenceElection,
    targets: &[usize],
    min_points: usize,
) -> Result<Vec<[f64; 3]>> {
    let v = &target.votes;
    let u = reference.votes();
    let good = |j: usize| target.opposed[j];
    let share_good = |j: usize| target.opposed[j] && v[j].total > 0;

    let by_total = SortedRegressor::new(u.iter().map(|c| c.total as f64).collect());
    let by_rep = SortedRegressor::new(u.iter().map(|c| c.rep as f64 / c.total as f64).collect());
    let by_dem = SortedRegressor::new(u.iter().map(|c| c.dem as f64 / c.total as f64).collect());

    let fit = |reg: &SortedRegressor, ward: usize, usable: &dyn Fn(usize) -> bool, y: &dyn Fn(usize) -> f64| {
        let pts: Vec<(f64, f64)> = reg
            .neighbors(ward, usable)
            .into_iter()
            .map(|j| (reg.x[j], y(j)))
            .collect();
        if pts.len() < min_points.max(1) {
            return Err(Error::Validation(format!(
                "election {}: ward {ward} has only {} usable neighbor points",
                target.id,
                pts.len()
            )));
        }
        Ok(local_fit(&pts, reg.x[ward]))
    };

    let share = |field: Field, j: usize| {
        let num = match field {
            Field::Rep => v[j].rep,
            Field::Dem => v[j].dem,
        };
        num as f64 / v[j].total as f64
    };

    targets
        .iter()
        .map(|&i| {
            let total = fit(&by_total, i, &good, &|j| v[j].total as f64)?;
            let rho_rep = fit(&by_rep, i, &share_good, &|j| share(Field::Rep, j))?;
            let rho_dem = fit(&by_dem, i, &share_good, &|j| share(Field::Dem, j))?;
            // floor() on the first term only, as in the published procedure
            let rep = ((rho_rep * total).floor() + (total - rho_dem * total)) / 2.0;
            let dem = (rho_dem * total + (total - rho_rep * total)) / 2.0;
            Ok([total, rep, dem])
        })
        .collect()
}

/// Averages per-reference estimates, rounds to the nearest integer and
/// clamps at zero. The total is raised if needed so `dem + rep <= total`.
fn combine(estimates: &[&[f64; 3]]) -> VoteCounts {
    let n = estimates.len() as f64;
    let avg = |k: usize| (estimates.iter().map(|e| e[k]).sum::<f64>() / n).round().max(0.0) as u64;
    let (total, rep, dem) = (avg(0), avg(1), avg(2));
    VoteCounts {
        total: total.max(rep + dem),
        dem,
        rep,
    }
}

fn check_target(target: &Election, refs: &[ReferenceElection]) -> Result<()> {
    if refs.is_empty() {
        return Err(Error::InvalidArgument("no reference elections given".into()));
    }
    if let Some(r) = refs.iter().find(|r| r.votes().len() != target.num_wards()) {
        return Err(Error::Validation(format!(
            "reference election {} covers {} wards, target {} covers {}",
            r.id(),
            r.votes().len(),
            target.id,
            target.num_wards()
        )));
    }
    let good = target.opposed.iter().filter(|&&o| o).count();
    if good < 2 && !target.is_fully_opposed() {
        return Err(Error::Validation(format!(
            "election {} needs at least two opposed wards for interpolation",
            target.id
        )));
    }
    Ok(())
}

/// Replaces every unopposed ward's votes by local least-squares estimates
/// from the reference elections. Opposed wards pass through unchanged.
pub fn interpolate_election(target: &Election, refs: &[ReferenceElection]) -> Result<Election> {
    let bad: Vec<usize> = (0..target.num_wards()).filter(|&i| !target.opposed[i]).collect();
    if bad.is_empty() {
        return Ok(target.clone());
    }
    check_target(target, refs)?;
    let per_ref: Vec<Vec<[f64; 3]>> = refs
        .iter()
        .map(|r| reference_estimates(target, r, &bad, 2))
        .collect::<Result<_>>()?;
    let mut out = target.clone();
    for (slot, &i) in bad.iter().enumerate() {
        let ests: Vec<&[f64; 3]> = per_ref.iter().map(|v| &v[slot]).collect();
        out.votes[i] = combine(&ests);
        out.interpolated[i] = true;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSelection {
    /// Indices into the candidate list, ascending.
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
    /// Total squared error over (total, rep, dem) on opposed wards, each
    /// predicted with itself held out.
    pub squared_error: f64,
}

fn subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            return;
        }
        for i in start..n {
            cur.push(i);
            out.push(cur.clone());
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, max_size, &mut Vec::new(), &mut out);
    out
}

/// Chooses the subset of candidates (size at most `max_size`) whose
/// interpolation best predicts the opposed wards of `target`.
/// Ties go to the smaller subset, then to the lexicographically smaller
/// sorted id list.
pub fn select_reference_set(
    target: &Election,
    candidates: &[ReferenceElection],
    max_size: usize,
) -> Result<ReferenceSelection> {
    if max_size == 0 {
        return Err(Error::InvalidArgument("max_size must be at least 1".into()));
    }
    check_target(target, candidates)?;
    let good: Vec<usize> = (0..target.num_wards()).filter(|&i| target.opposed[i]).collect();
    let per_ref: Vec<Vec<[f64; 3]>> = candidates
        .iter()
        .map(|r| reference_estimates(target, r, &good, 1))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, Vec<String>, Vec<usize>)> = None;
    for subset in subsets(candidates.len(), max_size) {
        let mut err = 0.0;
        for (slot, &i) in good.iter().enumerate() {
            let ests: Vec<&[f64; 3]> = subset.iter().map(|&c| &per_ref[c][slot]).collect();
            let est = combine(&ests);
            let truth = target.votes[i];
            for (a, b) in [(est.total, truth.total), (est.rep, truth.rep), (est.dem, truth.dem)] {
                let d = a as f64 - b as f64;
                err += d * d;
            }
        }
        let mut ids: Vec<String> = subset.iter().map(|&c| candidates[c].id().to_string()).collect();
        ids.sort();
        let better = match &best {
            None => true,
            Some((e, size, best_ids, _)) => {
                err < *e || (err == *e && (subset.len(), &ids) < (*size, best_ids))
            }
        };
        if better {
            best = Some((err, subset.len(), ids, subset));
        }
    }
    let (squared_error, _, _, indices) = best.expect("at least one subset");
    Ok(ReferenceSelection {
        ids: indices.iter().map(|&c| candidates[c].id().to_string()).collect(),
        indices,
        squared_error,
    })
}

#[derive(Debug, Deserialize)]
struct VoteRow {
    election_id: String,
    ward_id: String,
    total: u64,
    dem: u64,
    rep: u64,
    opposed: u8,
    #[serde(default)]
    interpolated: Option<u8>,
}

/// Reads a votes CSV (`election_id,ward_id,total,dem,rep,opposed` with an
/// optional `interpolated` column). Elections are returned in order of
/// first appearance; each must cover every ward of `g` exactly once.
pub fn load_votes(path: &Path, g: &Geography) -> Result<Vec<Election>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f);
    let index = g.ward_index();
    let n = g.num_wards();
    let mut order: Vec<String> = Vec::new();
    let mut data: HashMap<String, (Vec<Option<VoteCounts>>, Vec<bool>, Vec<bool>)> = HashMap::new();
    for row in reader.deserialize::<VoteRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(path.display().to_string(), line, e.to_string())
        })?;
        let w = *index
            .get(row.ward_id.as_str())
            .ok_or_else(|| Error::Validation(format!("votes reference unknown ward id {}", row.ward_id)))?;
        if row.opposed > 1 || row.interpolated.is_some_and(|v| v > 1) {
            return Err(Error::Validation(format!(
                "election {} ward {}: flags must be 0 or 1",
                row.election_id, row.ward_id
            )));
        }
        let entry = data.entry(row.election_id.clone()).or_insert_with(|| {
            order.push(row.election_id.clone());
            (vec![None; n], vec![false; n], vec![false; n])
        });
        if entry.0[w].is_some() {
            return Err(Error::Validation(format!(
                "election {} lists ward {} twice",
                row.election_id, row.ward_id
            )));
        }
        entry.0[w] = Some(VoteCounts {
            total: row.total,
            dem: row.dem,
            rep: row.rep,
        });
        entry.1[w] = row.opposed == 1;
        entry.2[w] = row.interpolated == Some(1);
    }
    order
        .into_iter()
        .map(|id| {
            let (votes, opposed, interpolated) = data.remove(&id).expect("recorded id");
            let votes = votes
                .into_iter()
                .enumerate()
                .map(|(w, v)| {
                    v.ok_or_else(|| Error::Validation(format!("election {id} is missing ward {}", g.ward(w).name)))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut e = Election::new(id, votes, opposed)?;
            e.interpolated = interpolated;
            Ok(e)
        })
        .collect()
}

/// Writes elections in the votes CSV format, adding the `interpolated`
/// column when `provenance` is set.
pub fn write_votes(path: &Path, g: &Geography, elections: &[Election], provenance: bool) -> Result<()> {
    let mut out = String::from("election_id,ward_id,total,dem,rep,opposed");
    if provenance {
        out.push_str(",interpolated");
    }
    out.push('\n');
    for e in elections {
        for (w, v) in e.votes.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                e.id,
                g.ward(w).name,
                v.total,
                v.dem,
                v.rep,
                u8::from(e.opposed[w])
            ));
            if provenance {
                out.push_str(&format!(",{}", u8::from(e.interpolated[w])));
            }
            out.push('\n');
        }
    }
    write_file(path, &out)
}
