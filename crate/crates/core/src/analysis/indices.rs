use serde::{Deserialize, Serialize};

use crate::elections::rep_seats;

use super::order::{marginal_box_stats, MarginalBoxStats};
use super::shift::plan_parity_fraction;
use super::{sorted_shares, EnsembleView, SeatHistogram, ShiftGrid};

/// Width of the linear ramp that turns a district share into a fractional seat.
pub const RAMP_WIDTH: f64 = 0.02;

/// Fractional Republican seat for one district share: 0 below
/// `0.5 - RAMP_WIDTH / 2`, 1 above `0.5 + RAMP_WIDTH / 2`, linear between.
pub fn ramp(share: f64) -> f64 {
    ((share - 0.5) / RAMP_WIDTH + 0.5).clamp(0.0, 1.0)
}

pub fn continuous_seats(shares: &[f64]) -> f64 {
    shares.iter().map(|&p| ramp(p)).sum()
}

/// A statistic and the percentage of the ensemble that exceeds it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub value: f64,
    pub percent: f64,
}

fn percent_where<T>(items: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    100.0 * items.iter().filter(|x| pred(x)).count() as f64 / items.len() as f64
}

fn gi_value(sorted: &[f64], means: &[f64]) -> f64 {
    // deviations of Democratic shares equal those of Republican shares up to sign
    sorted
        .iter()
        .zip(means)
        .map(|(p, m)| (p - m).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Root-sum-square distance of the plan's sorted shares from the rank-wise
/// ensemble means; `percent` counts ensemble plans with a strictly larger
/// index.
pub fn gerrymandering_index(view: &EnsembleView, stats: &MarginalBoxStats, plan_shares: &[f64]) -> IndexValue {
    let means = stats.means();
    let value = gi_value(&sorted_shares(plan_shares), &means);
    let members: Vec<f64> = view.sorted().iter().map(|s| gi_value(s, &means)).collect();
    IndexValue {
        value,
        percent: percent_where(&members, |&x| x > value),
    }
}

/// Distance of the plan's continuous seat count from the ensemble mean;
/// `percent` counts ensemble plans with a strictly larger index.
pub fn representativeness_index(view: &EnsembleView, plan_shares: &[f64]) -> IndexValue {
    let c: Vec<f64> = view.shares().iter().map(|s| continuous_seats(s)).collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    let value = (continuous_seats(plan_shares) - mean).abs();
    let members: Vec<f64> = c.iter().map(|x| (x - mean).abs()).collect();
    IndexValue {
        value,
        percent: percent_where(&members, |&x| x > value),
    }
}

/// Ensemble seat counts at a fixed list of shifts.
#[derive(Debug, Clone)]
pub struct ShiftTable {
    deltas: Vec<f64>,
    seats: Vec<Vec<usize>>,
    histograms: Vec<SeatHistogram>,
    /// `at_least[t][s]`: plans with at least `s` Republican seats at shift `t`.
    at_least: Vec<Vec<usize>>,
}

impl ShiftTable {
    pub fn new(view: &EnsembleView, deltas: Vec<f64>) -> Self {
        let k = view.num_districts();
        let seats: Vec<Vec<usize>> = view.shares().iter().map(|s| Self::seats_for(s, &deltas)).collect();
        let mut histograms = Vec::with_capacity(deltas.len());
        let mut at_least = Vec::with_capacity(deltas.len());
        for (t, &d) in deltas.iter().enumerate() {
            let column: Vec<usize> = seats.iter().map(|row| row[t]).collect();
            let mut ge = vec![0; k + 2];
            for &s in &column {
                ge[s] += 1;
            }
            for s in (0..=k).rev() {
                ge[s] += ge[s + 1];
            }
            at_least.push(ge);
            histograms.push(SeatHistogram::from_seats(d, &column));
        }
        ShiftTable {
            deltas,
            seats,
            histograms,
            at_least,
        }
    }

    fn seats_for(shares: &[f64], deltas: &[f64]) -> Vec<usize> {
        deltas.iter().map(|&d| rep_seats(shares, d)).collect()
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn histograms(&self) -> &[SeatHistogram] {
        &self.histograms
    }

    /// Republican seats of arbitrary shares at each shift of the table.
    pub fn seats_of(&self, shares: &[f64]) -> Vec<usize> {
        Self::seats_for(shares, &self.deltas)
    }

    pub fn member_seats(&self, i: usize) -> &[usize] {
        &self.seats[i]
    }

    fn n(&self) -> f64 {
        self.seats.len() as f64
    }

    /// `(ell_rep, ell_dem)`: the smallest, over shifts, ensemble frequency
    /// of doing at least as well for that party as `seats` does.
    pub fn ell(&self, seats: &[usize]) -> (f64, f64) {
        let n = self.n();
        let mut rep = f64::INFINITY;
        let mut dem = f64::INFINITY;
        for (t, &s) in seats.iter().enumerate() {
            let ge = &self.at_least[t];
            rep = rep.min(ge[s] as f64 / n);
            // Democratic seats at least k - s  <=>  Republican seats at most s
            dem = dem.min((ge[0] - ge[s + 1]) as f64 / n);
        }
        (rep, dem)
    }

    /// Mean over shifts of the negative log probability of `seats`.
    pub fn h(&self, seats: &[usize]) -> f64 {
        let total: f64 = seats
            .iter()
            .zip(&self.histograms)
            .map(|(&s, hist)| -hist.probability(s).ln())
            .sum();
        total / seats.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierStats {
    pub ell_rep: f64,
    pub ell_dem: f64,
    /// Percent of the ensemble with strictly larger `ell_rep`.
    pub l_rep: f64,
    pub l_dem: f64,
    pub h: f64,
    /// Percent of the ensemble with `h` at most the plan's.
    pub big_h: f64,
}

/// The `l`/`L` and `h`/`H` statistics of a plan over a target grid.
pub fn outlier_stats(view: &EnsembleView, plan_shares: &[f64], grid: &ShiftGrid) -> OutlierStats {
    let table = ShiftTable::new(view, grid.deltas(view.statewide()));
    let seats = table.seats_of(plan_shares);
    let (ell_rep, ell_dem) = table.ell(&seats);
    let h = table.h(&seats);
    let members: Vec<((f64, f64), f64)> = (0..view.len())
        .map(|i| {
            let s = table.member_seats(i);
            (table.ell(s), table.h(s))
        })
        .collect();
    OutlierStats {
        ell_rep,
        ell_dem,
        l_rep: percent_where(&members, |m| m.0 .0 > ell_rep),
        l_dem: percent_where(&members, |m| m.0 .1 > ell_dem),
        h,
        big_h: percent_where(&members, |m| m.1 <= h),
    }
}

/// Targets within 7.5 points of the statewide fraction in half-point steps.
pub fn variant_grid(statewide: f64) -> ShiftGrid {
    let c = 100.0 * statewide;
    ShiftGrid::range(c - 7.5, c + 7.5, 0.5).expect("31-point grid")
}

/// All indices for one plan under one election.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub plan: String,
    pub election: String,
    pub ensemble_size: usize,
    pub districts: usize,
    pub statewide_rep_percent: f64,
    pub rep_seats: usize,
    pub gerrymandering_index: f64,
    /// Percent of ensemble plans with a larger Gerrymandering Index.
    pub gerrymandering_percent_more: f64,
    pub representativeness_index: f64,
    /// Percent of ensemble plans with a larger Representativeness Index.
    pub representativeness_percent_less: f64,
    pub ell_rep: f64,
    pub ell_dem: f64,
    #[serde(rename = "L_rep")]
    pub l_rep: f64,
    #[serde(rename = "L_dem")]
    pub l_dem: f64,
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    #[serde(rename = "variant_H")]
    pub variant_h: f64,
    #[serde(rename = "variant_L_rep")]
    pub variant_l_rep: f64,
    #[serde(rename = "variant_L_dem")]
    pub variant_l_dem: f64,
    /// Statewide fraction at which the plan's majority is evenly poised;
    /// absent for an even number of districts.
    pub parity_fraction: Option<f64>,
}

pub fn index_report(
    view: &EnsembleView,
    plan_shares: &[f64],
    grid: &ShiftGrid,
    plan: &str,
    election: &str,
) -> IndexReport {
    let stats = marginal_box_stats(view);
    let gi = gerrymandering_index(view, &stats, plan_shares);
    let ri = representativeness_index(view, plan_shares);
    let main = outlier_stats(view, plan_shares, grid);
    let variant = outlier_stats(view, plan_shares, &variant_grid(view.statewide()));
    IndexReport {
        plan: plan.to_string(),
        election: election.to_string(),
        ensemble_size: view.len(),
        districts: view.num_districts(),
        statewide_rep_percent: 100.0 * view.statewide(),
        rep_seats: rep_seats(plan_shares, 0.0),
        gerrymandering_index: gi.value,
        gerrymandering_percent_more: gi.percent,
        representativeness_index: ri.value,
        representativeness_percent_less: ri.percent,
        ell_rep: main.ell_rep,
        ell_dem: main.ell_dem,
        l_rep: main.l_rep,
        l_dem: main.l_dem,
        h: main.h,
        big_h: main.big_h,
        variant_h: variant.big_h,
        variant_l_rep: variant.l_rep,
        variant_l_dem: variant.l_dem,
        parity_fraction: plan_parity_fraction(plan_shares, view.statewide()).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::view;
    use super::*;

    #[test]
    fn ramp_edges() {
        assert_eq!(ramp(0.5), 0.5);
        assert_eq!(ramp(0.51), 1.0);
        assert_eq!(ramp(0.7), 1.0);
        assert_eq!(ramp(0.49), 0.0);
        assert!((ramp(0.505) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn gi_examples() {
        let ens = view(&[&[0.3, 0.5, 0.7], &[0.5, 0.3, 0.7]], 0.5);
        let stats = marginal_box_stats(&ens);
        let zero = gerrymandering_index(&ens, &stats, &[0.7, 0.3, 0.5]);
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.percent, 0.0);
        let off = gerrymandering_index(&ens, &stats, &[0.4, 0.6, 0.7]);
        assert!((off.value - 0.02f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ri_examples() {
        let ens = view(&[&[0.6, 0.4], &[0.6, 0.6], &[0.4, 0.4]], 0.5);
        let at_mean = representativeness_index(&ens, &[0.6, 0.4]);
        assert_eq!(at_mean.value, 0.0);
        assert!((at_mean.percent - 200.0 / 3.0).abs() < 1e-12);
        let far = representativeness_index(&ens, &[0.7, 0.7]);
        assert_eq!(far.value, 1.0);
        assert_eq!(far.percent, 0.0);
    }

    #[test]
    fn ell_boundaries() {
        // constant outcomes everywhere: all ties
        let ens = view(&[&[0.2, 0.8], &[0.3, 0.7]], 0.5);
        let grid = ShiftGrid::range(49.0, 51.0, 1.0).unwrap();
        let s = outlier_stats(&ens, &[0.25, 0.75], &grid);
        assert_eq!((s.ell_rep, s.ell_dem), (1.0, 1.0));
        assert_eq!(s.h, 0.0);
        assert_eq!(s.big_h, 100.0);
        assert_eq!((s.l_rep, s.l_dem), (0.0, 0.0));

        // more Republican seats than any member
        let s = outlier_stats(&ens, &[0.6, 0.75], &grid);
        assert_eq!(s.ell_rep, 0.0);
        assert_eq!(s.ell_dem, 1.0);
        assert_eq!(s.l_rep, 100.0);
    }

    #[test]
    fn h_of_half_split_is_log_two() {
        let ens = view(&[&[0.6, 0.3], &[0.4, 0.3]], 0.5);
        let grid = ShiftGrid::range(49.0, 51.0, 0.5).unwrap();
        let s = outlier_stats(&ens, &[0.6, 0.3], &grid);
        assert!((s.h - 2f64.ln()).abs() < 1e-12);
        assert_eq!(s.ell_rep, 0.5);
    }

    #[test]
    fn variant_grid_contains_zero_and_default_range() {
        let g = variant_grid(0.5);
        assert_eq!(g.len(), 31);
        assert!(g.deltas(0.5).iter().any(|d| d.abs() < 1e-12));
        assert!(g.targets()[0] <= 45.0 && *g.targets().last().unwrap() >= 55.0);
        let off = variant_grid(0.537);
        assert!(off.deltas(0.537).iter().any(|d| d.abs() < 1e-9));
    }

    #[test]
    fn report_is_in_range() {
        let ens = view(&[&[0.45, 0.55, 0.6], &[0.4, 0.52, 0.62], &[0.48, 0.49, 0.7]], 0.52);
        let r = index_report(&ens, &[0.45, 0.55, 0.6], &ShiftGrid::default(), "p", "e");
        for v in [
            r.gerrymandering_percent_more,
            r.representativeness_percent_less,
            r.l_rep,
            r.l_dem,
            r.big_h,
            r.variant_h,
            r.variant_l_rep,
            r.variant_l_dem,
        ] {
            assert!((0.0..=100.0).contains(&v));
        }
        assert!(r.parity_fraction.is_some());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"L_rep\"") && json.contains("\"H\""));
        assert_eq!(serde_json::from_str::<IndexReport>(&json).unwrap(), r);
    }
}
