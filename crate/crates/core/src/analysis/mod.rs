//! Ensemble statistics for one election: seat histograms under uniform
//! shifts, rank-wise box statistics of sorted district shares, the
//! Gerrymandering and Representativeness indices, the shift-based outlier
//! statistics `l`/`L` and `h`/`H`, envelopes and parity shifts.
//!
//! Shifts are in percentage points of Republican two-party share. All
//! percentage-valued outputs lie in `[0, 100]`.

mod indices;
mod order;
mod shift;

pub use indices::{
    continuous_seats, gerrymandering_index, index_report, outlier_stats, ramp, representativeness_index,
    variant_grid, IndexReport, IndexValue, OutlierStats, ShiftTable, RAMP_WIDTH,
};
pub use order::{marginal_box_stats, percentile, tukey_hinges, write_box_csv, MarginalBoxStats, RankBox};
pub use shift::{
    ensemble_parity_shift, histogram_rows, parity_sweep, plan_parity_fraction, shift_envelope, write_envelope_csv,
    write_histogram_csv, EnvelopeRow, PARITY_STEP,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::elections::{district_shares, rep_seats, statewide_rep_fraction, Election};
use crate::error::{Error, Result};
use crate::geography::{Geography, Plan};

/// District shares of every ensemble plan under one election.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleView {
    statewide: f64,
    shares: Vec<Vec<f64>>,
    sorted: Vec<Vec<f64>>,
}

impl EnsembleView {
    pub fn new(g: &Geography, plans: &[Plan], e: &Election) -> Result<Self> {
        let shares = plans.iter().map(|p| district_shares(g, p, e)).collect();
        Self::from_shares(shares, statewide_rep_fraction(e)?)
    }

    /// Builds a view from per-plan district shares and the statewide
    /// Republican fraction.
    pub fn from_shares(shares: Vec<Vec<f64>>, statewide: f64) -> Result<Self> {
        let Some(first) = shares.first() else {
            return Err(Error::InvalidArgument("ensemble is empty".into()));
        };
        let k = first.len();
        if k == 0 || shares.iter().any(|s| s.len() != k) {
            return Err(Error::InvalidArgument("plans must all have the same nonzero district count".into()));
        }
        let sorted = shares.iter().map(|s| sorted_shares(s)).collect();
        Ok(EnsembleView {
            statewide,
            shares,
            sorted,
        })
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn num_districts(&self) -> usize {
        self.shares[0].len()
    }

    /// Statewide Republican two-party fraction `r(pi)` in `[0, 1]`.
    pub fn statewide(&self) -> f64 {
        self.statewide
    }

    pub fn shares(&self) -> &[Vec<f64>] {
        &self.shares
    }

    pub fn sorted(&self) -> &[Vec<f64>] {
        &self.sorted
    }

    /// Republican seats of every plan under a shift of `delta` points.
    pub fn seats_at(&self, delta: f64) -> Vec<usize> {
        self.shares.iter().map(|s| rep_seats(s, delta)).collect()
    }
}

/// Ascending copy of a plan's district shares.
pub fn sorted_shares(shares: &[f64]) -> Vec<f64> {
    let mut v = shares.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Set of statewide target percentages at which shift statistics are taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftGrid {
    targets: Vec<f64>,
}

impl Default for ShiftGrid {
    fn default() -> Self {
        ShiftGrid::range(45.0, 55.0, 0.5).expect("valid default grid")
    }
}

impl ShiftGrid {
    pub fn new(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() || targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("shift grid must be nonempty and finite".into()));
        }
        if targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("shift grid must be strictly increasing".into()));
        }
        Ok(ShiftGrid { targets })
    }

    /// `lo, lo + step, ..., hi`. `hi - lo` must be a whole number of steps.
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::new(steps(lo, hi, step)?)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Shifts (points) that move a statewide fraction to each target.
    pub fn deltas(&self, statewide: f64) -> Vec<f64> {
        self.targets.iter().map(|t| t - 100.0 * statewide).collect()
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub(crate) fn steps(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidArgument(format!("bad range {lo}..{hi} step {step}")));
    }
    let n = (hi - lo) / step;
    let rounded = n.round();
    if (n - rounded).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("range {lo}..{hi} is not a multiple of step {step}")));
    }
    Ok((0..=rounded as usize).map(|i| lo + i as f64 * step).collect())
}

/// Seat-count distribution across an ensemble at one shift.
#[derive(Debug, Clone, PartialEq)]
pub struct SeatHistogram {
    pub delta: f64,
    pub counts: BTreeMap<usize, usize>,
    n: usize,
    mean: f64,
    sd: f64,
}

impl SeatHistogram {
    pub fn from_seats(delta: f64, seats: &[usize]) -> Self {
        let n = seats.len();
        let mut counts = BTreeMap::new();
        for &s in seats {
            *counts.entry(s).or_insert(0) += 1;
        }
        let mean = seats.iter().sum::<usize>() as f64 / n as f64;
        let var = seats.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        SeatHistogram {
            delta,
            counts,
            n,
            mean,
            sd: var.sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation.
    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn count(&self, seats: usize) -> usize {
        self.counts.get(&seats).copied().unwrap_or(0)
    }

    /// Empirical frequency of `seats`, or outside the observed support the
    /// mass of `[seats - 0.5, seats + 0.5]` under a normal with this
    /// histogram's mean and sd, floored at `1 / (10 N)`.
    pub fn probability(&self, seats: usize) -> f64 {
        let c = self.count(seats);
        if c > 0 {
            return c as f64 / self.n as f64;
        }
        let floor = 1.0 / (10.0 * self.n as f64);
        let mass = match Normal::new(self.mean, self.sd) {
            Ok(normal) if self.sd > 0.0 => {
                let x = seats as f64;
                normal.cdf(x + 0.5) - normal.cdf(x - 0.5)
            }
            _ => 0.0,
        };
        mass.max(floor)
    }
}

pub fn seat_histogram(view: &EnsembleView, delta: f64) -> SeatHistogram {
    SeatHistogram::from_seats(delta, &view.seats_at(delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn view(shares: &[&[f64]], statewide: f64) -> EnsembleView {
        EnsembleView::from_shares(shares.iter().map(|s| s.to_vec()).collect(), statewide).unwrap()
    }

    #[test]
    fn histogram_examples() {
        let one = view(&[&[0.6, 0.2]], 0.4);
        let h = seat_histogram(&one, 0.0);
        assert_eq!(h.counts, BTreeMap::from([(1, 1)]));
        assert_eq!(h.sd(), 0.0);

        let three = view(&[&[0.6, 0.7, 0.2], &[0.6, 0.7, 0.1], &[0.6, 0.7, 0.8]], 0.5);
        let h = seat_histogram(&three, 0.0);
        assert_eq!(h.counts, BTreeMap::from([(2, 2), (3, 1)]));
        assert!((h.mean() - 7.0 / 3.0).abs() < 1e-12);
        assert_eq!(h.counts.values().sum::<usize>(), 3);
        assert_eq!(seat_histogram(&three, 0.0), SeatHistogram::from_seats(0.0, &three.seats_at(0.0)));
    }

    #[test]
    fn tail_probability() {
        let h = SeatHistogram::from_seats(0.0, &[2, 2, 3, 4]);
        assert_eq!(h.probability(2), 0.5);
        let tail = h.probability(7);
        assert!(tail >= 1.0 / 40.0 - 1e-15 && tail < 0.25);
        let flat = SeatHistogram::from_seats(0.0, &[5; 10]);
        assert_eq!(flat.probability(5), 1.0);
        assert_eq!(flat.probability(6), 0.01);
    }

    #[test]
    fn grids() {
        let g = ShiftGrid::default();
        assert_eq!(g.len(), 21);
        assert_eq!(g.targets()[0], 45.0);
        assert_eq!(g.targets()[20], 55.0);
        assert!(g.targets().windows(2).all(|w| w[0] < w[1]));
        assert!(ShiftGrid::new(vec![1.0, 1.0]).is_err());
        assert!(ShiftGrid::range(0.0, 1.0, 0.3).is_err());
        let d = g.deltas(0.48);
        assert!((d[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_or_ragged_view_rejected() {
        assert!(EnsembleView::from_shares(vec![], 0.5).is_err());
        assert!(EnsembleView::from_shares(vec![vec![0.5], vec![0.5, 0.5]], 0.5).is_err());
    }
}
