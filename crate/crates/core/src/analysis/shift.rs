use std::path::Path;

use crate::elections::rep_seats;
use crate::error::{Error, Result};
use crate::geography::write_file;

use super::order::percentile;
use super::{steps, EnsembleView, SeatHistogram};

/// Resolution of parity scans, in points.
pub const PARITY_STEP: f64 = 0.01;
const PARITY_LIMIT: i64 = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub shift: f64,
    pub mean: f64,
    pub sd: f64,
    pub p5: f64,
    pub p95: f64,
    pub min: usize,
    pub max: usize,
    pub ref_seats: Option<usize>,
}

/// Ensemble seat statistics at shifts `-range, -range + step, ..., range`,
/// with the seat curve of `reference` when given.
pub fn shift_envelope(view: &EnsembleView, range: f64, step: f64, reference: Option<&[f64]>) -> Result<Vec<EnvelopeRow>> {
    let deltas = steps(-range, range, step)?;
    Ok(deltas
        .into_iter()
        .map(|d| {
            let seats = view.seats_at(d);
            let hist = SeatHistogram::from_seats(d, &seats);
            let mut sorted: Vec<f64> = seats.iter().map(|&s| s as f64).collect();
            sorted.sort_by(f64::total_cmp);
            EnvelopeRow {
                shift: d,
                mean: hist.mean(),
                sd: hist.sd(),
                p5: percentile(&sorted, 5.0),
                p95: percentile(&sorted, 95.0),
                min: *seats.iter().min().expect("nonempty"),
                max: *seats.iter().max().expect("nonempty"),
                ref_seats: reference.map(|r| rep_seats(r, d)),
            }
        })
        .collect())
}

pub fn write_envelope_csv(path: &Path, rows: &[EnvelopeRow]) -> Result<()> {
    let mut out = String::from("shift,mean,sd,p5,p95,min,max,ref_seats\n");
    for r in rows {
        let reference = r.ref_seats.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.shift, r.mean, r.sd, r.p5, r.p95, r.min, r.max, reference
        ));
    }
    write_file(path, &out)
}

/// `(shift, seats, count)` for every seat count observed at each shift.
pub fn histogram_rows(view: &EnsembleView, deltas: &[f64]) -> Vec<(f64, usize, usize)> {
    deltas
        .iter()
        .flat_map(|&d| {
            SeatHistogram::from_seats(d, &view.seats_at(d))
                .counts
                .into_iter()
                .map(move |(s, c)| (d, s, c))
        })
        .collect()
}

pub fn write_histogram_csv(path: &Path, rows: &[(f64, usize, usize)]) -> Result<()> {
    let mut out = String::from("shift,seats,count\n");
    for (d, s, c) in rows {
        out.push_str(&format!("{d},{s},{c}\n"));
    }
    write_file(path, &out)
}

fn majority(k: usize) -> Result<usize> {
    if k % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "parity needs an odd number of districts, got {k}"
        )));
    }
    Ok(k.div_ceil(2))
}

fn grid_delta(j: i64) -> f64 {
    j as f64 * PARITY_STEP
}

/// Shift (points) at which half the ensemble has a Republican majority.
/// Where a range of grid shifts gives exactly half, the one closest to
/// zero is returned; otherwise the smallest shift at which at least half
/// the plans are majority Republican.
pub fn ensemble_parity_shift(view: &EnsembleView) -> Result<f64> {
    let m = majority(view.num_districts())?;
    let n = view.len();
    let count = |j: i64| {
        view.shares()
            .iter()
            .filter(|s| rep_seats(s, grid_delta(j)) >= m)
            .count()
    };
    // smallest grid index whose count reaches `target` (counts rise with j)
    let first_reaching = |target: usize| -> Option<i64> {
        let (mut lo, mut hi) = (-PARITY_LIMIT, PARITY_LIMIT);
        if count(hi) < target {
            return None;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if count(mid) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    };
    let half = n.div_ceil(2);
    let first = first_reaching(half).ok_or(Error::ParityUnreachable)?;
    if n % 2 == 1 || count(first) != n / 2 {
        return Ok(grid_delta(first));
    }
    // plateau of exact balance: [first, end]
    let end = first_reaching(n / 2 + 1).map_or(PARITY_LIMIT, |j| j - 1);
    Ok(grid_delta(0i64.clamp(first, end)))
}

/// Statewide Republican fraction at which the plan's majority-pivot
/// district (the `(k+1)/2`-th most Republican) sits at exactly one half.
pub fn plan_parity_fraction(shares: &[f64], statewide: f64) -> Result<f64> {
    let m = majority(shares.len())?;
    let mut desc = shares.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    Ok(statewide + (0.5 - desc[m - 1]))
}

/// Smallest grid shift within +/-50 points giving the plan a Republican
/// majority, by exhaustive scan.
pub fn parity_sweep(shares: &[f64]) -> Result<Option<f64>> {
    let m = majority(shares.len())?;
    Ok((-PARITY_LIMIT..=PARITY_LIMIT)
        .map(grid_delta)
        .find(|&d| rep_seats(shares, d) >= m))
}
