//! Score function `J(plan) = w_pop J_pop + w_comp J_comp + w_county J_county
//! + w_vra J_vra + w_town J_town`. Lower is better; the sampler targets the
//! density proportional to `exp(-beta J)`.

use serde::{Deserialize, Serialize};

use crate::geography::{apply_move_to_aggregates, district_aggregates, DistrictAggregate, Geography, Plan};

/// Minority-district targets shared by the soft VRA score and the hard filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VraTarget {
    pub black_districts: usize,
    pub black_threshold: f64,
    pub hispanic_districts: usize,
    pub hispanic_threshold: f64,
}

impl Default for VraTarget {
    fn default() -> Self {
        VraTarget {
            black_districts: 6,
            black_threshold: 0.40,
            hispanic_districts: 1,
            hispanic_threshold: 0.40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub pop: f64,
    pub comp: f64,
    pub county: f64,
    pub vra: f64,
    /// Zero disables the township term.
    pub town: f64,
    pub vra_target: VraTarget,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            pop: 2200.0,
            comp: 0.8,
            county: 0.6,
            vra: 100.0,
            town: 0.0,
            vra_target: VraTarget::default(),
        }
    }
}

impl ScoreWeights {
    /// Township weight used for the town-preserving ensemble variant.
    pub const TOWNSHIP_WEIGHT: f64 = 0.005;

    pub fn scaled(&self, factor: f64) -> Self {
        ScoreWeights {
            pop: self.pop * factor,
            comp: self.comp * factor,
            county: self.county * factor,
            vra: self.vra * factor,
            town: self.town * factor,
            vra_target: self.vra_target,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub pop: f64,
    pub comp: f64,
    pub county: f64,
    pub vra: f64,
    pub town: f64,
    pub total: f64,
}

impl ScoreBreakdown {
    pub fn from_components(pop: f64, comp: f64, county: f64, vra: f64, town: f64, w: &ScoreWeights) -> Self {
        let total = w.pop * pop + w.comp * comp + w.county * county + w.vra * vra + w.town * town;
        ScoreBreakdown {
            pop,
            comp,
            county,
            vra,
            town,
            total,
        }
    }
}

pub(crate) fn population_from_aggregates(aggs: &[DistrictAggregate], ideal: f64) -> f64 {
    if ideal <= 0.0 {
        return 0.0;
    }
    aggs.iter()
        .map(|a| {
            let rel = (a.population as f64 - ideal) / ideal;
            rel * rel
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn compactness_from_aggregates(aggs: &[DistrictAggregate]) -> f64 {
    aggs.iter()
        .filter(|a| a.area > 0.0)
        .map(|a| a.perimeter * a.perimeter / a.area)
        .sum()
}

/// Sum of `sqrt(max(0, threshold - f))` over the `count` largest fractions.
fn shortfall(mut fractions: Vec<f64>, count: usize, threshold: f64) -> f64 {
    fractions.sort_by(|a, b| b.total_cmp(a));
    fractions
        .iter()
        .take(count)
        .map(|&f| (threshold - f).max(0.0).sqrt())
        .sum()
}

pub(crate) fn vra_from_aggregates(aggs: &[DistrictAggregate], target: &VraTarget) -> f64 {
    let black = aggs.iter().map(DistrictAggregate::black_fraction).collect();
    let hispanic = aggs.iter().map(DistrictAggregate::hispanic_fraction).collect();
    shortfall(black, target.black_districts, target.black_threshold)
        + shortfall(hispanic, target.hispanic_districts, target.hispanic_threshold)
}

/// Root-sum-square relative deviation of district populations from ideal.
pub fn score_population(g: &Geography, p: &Plan) -> f64 {
    population_from_aggregates(&district_aggregates(g, p), g.ideal_population())
}

/// Summed isoperimetric ratio `perimeter^2 / area` over districts.
pub fn score_compactness(g: &Geography, p: &Plan) -> f64 {
    compactness_from_aggregates(&district_aggregates(g, p))
}

/// Number of extra pieces counties are split into: `sum_c (pieces(c) - 1)`.
pub fn score_county(g: &Geography, p: &Plan) -> f64 {
    SplitCounter::new(g.num_counties(), g.num_districts(), |w| g.ward(w).county, p).excess() as f64
}

pub fn score_town(g: &Geography, p: &Plan) -> f64 {
    SplitCounter::new(g.num_towns(), g.num_districts(), |w| g.ward(w).town, p).excess() as f64
}

/// Square-root shortfall of the top minority fractions against their
/// thresholds, using the default targets.
pub fn score_vra(g: &Geography, p: &Plan) -> f64 {
    score_vra_with(g, p, &VraTarget::default())
}

pub fn score_vra_with(g: &Geography, p: &Plan, target: &VraTarget) -> f64 {
    vra_from_aggregates(&district_aggregates(g, p), target)
}

pub fn total_score(g: &Geography, p: &Plan, w: &ScoreWeights) -> ScoreBreakdown {
    ScoreTracker::new(g, p).breakdown(g, w)
}

/// Ward counts per (label, district) for county or town labels.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SplitCounter {
    k: usize,
    counts: Vec<u32>,
    pieces: u64,
    labels_present: u64,
}

impl SplitCounter {
    fn new(num_labels: usize, k: usize, label_of: impl Fn(usize) -> usize, p: &Plan) -> Self {
        let mut counts = vec![0u32; num_labels * k];
        let mut pieces = 0;
        for w in 0..p.len() {
            let slot = &mut counts[label_of(w) * k + p.district_of(w)];
            if *slot == 0 {
                pieces += 1;
            }
            *slot += 1;
        }
        let labels_present = (0..num_labels)
            .filter(|&c| counts[c * k..(c + 1) * k].iter().any(|&n| n > 0))
            .count() as u64;
        SplitCounter {
            k,
            counts,
            pieces,
            labels_present,
        }
    }

    fn apply_move(&mut self, label: usize, from: usize, to: usize) {
        let a = &mut self.counts[label * self.k + from];
        *a -= 1;
        if *a == 0 {
            self.pieces -= 1;
        }
        let b = &mut self.counts[label * self.k + to];
        if *b == 0 {
            self.pieces += 1;
        }
        *b += 1;
    }

    fn excess(&self) -> u64 {
        self.pieces - self.labels_present
    }
}

/// Per-district state from which every score component follows in O(k),
/// updated incrementally under single-ward moves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTracker {
    aggregates: Vec<DistrictAggregate>,
    counties: SplitCounter,
    towns: SplitCounter,
}

impl ScoreTracker {
    pub fn new(g: &Geography, p: &Plan) -> Self {
        let k = g.num_districts();
        ScoreTracker {
            aggregates: district_aggregates(g, p),
            counties: SplitCounter::new(g.num_counties(), k, |w| g.ward(w).county, p),
            towns: SplitCounter::new(g.num_towns(), k, |w| g.ward(w).town, p),
        }
    }

    pub fn aggregates(&self) -> &[DistrictAggregate] {
        &self.aggregates
    }

    pub fn breakdown(&self, g: &Geography, w: &ScoreWeights) -> ScoreBreakdown {
        ScoreBreakdown::from_components(
            population_from_aggregates(&self.aggregates, g.ideal_population()),
            compactness_from_aggregates(&self.aggregates),
            self.counties.excess() as f64,
            vra_from_aggregates(&self.aggregates, &w.vra_target),
            self.towns.excess() as f64,
            w,
        )
    }

    /// Applies moving `ward` to district `to`; `assignment` is the state
    /// before the move. Returns an undo token restoring the exact prior state.
    pub fn apply_move(&mut self, g: &Geography, assignment: &[usize], ward: usize, to: usize) -> MoveUndo {
        let from = assignment[ward];
        let undo = MoveUndo {
            ward,
            from,
            to,
            from_agg: self.aggregates[from],
            to_agg: self.aggregates[to],
        };
        if from != to {
            apply_move_to_aggregates(g, assignment, &mut self.aggregates, ward, to);
            let info = g.ward(ward);
            self.counties.apply_move(info.county, from, to);
            self.towns.apply_move(info.town, from, to);
        }
        undo
    }

    pub fn undo(&mut self, g: &Geography, undo: MoveUndo) {
        if undo.from == undo.to {
            return;
        }
        self.aggregates[undo.from] = undo.from_agg;
        self.aggregates[undo.to] = undo.to_agg;
        let info = g.ward(undo.ward);
        self.counties.apply_move(info.county, undo.to, undo.from);
        self.towns.apply_move(info.town, undo.to, undo.from);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MoveUndo {
    ward: usize,
    from: usize,
    to: usize,
    from_agg: DistrictAggregate,
    to_agg: DistrictAggregate,
}
