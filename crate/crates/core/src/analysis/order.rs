use std::path::Path;

use crate::error::Result;
use crate::geography::write_file;

use super::EnsembleView;

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// `(q1, median, q3)` by the median-of-halves rule. For odd `n` the
/// median itself belongs to neither half. `sorted` must be ascending and
/// nonempty.
pub fn tukey_hinges(sorted: &[f64]) -> (f64, f64, f64) {
    let n = sorted.len();
    let med = median_sorted(sorted);
    if n == 1 {
        return (med, med, med);
    }
    let half = n / 2;
    (median_sorted(&sorted[..half]), med, median_sorted(&sorted[n - half..]))
}

/// Linearly interpolated percentile `q` in `[0, 100]` of ascending data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 100.0) / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box statistics of one rank of the sorted share vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankBox {
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Smallest observation within 1.5 IQR below `q1`.
    pub lo: f64,
    /// Largest observation within 1.5 IQR above `q3`.
    pub hi: f64,
}

impl RankBox {
    fn from_values(mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        let (q1, median, q3) = tukey_hinges(&v);
        let reach = 1.5 * (q3 - q1);
        let lo = v.iter().copied().find(|&x| x >= q1 - reach).unwrap_or(q1);
        let hi = v.iter().rev().copied().find(|&x| x <= q3 + reach).unwrap_or(q3);
        RankBox {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q1,
            median,
            q3,
            lo,
            hi,
        }
    }
}

/// Per-rank statistics, rank 1 (the most Democratic district) first.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalBoxStats {
    pub ranks: Vec<RankBox>,
}

impl MarginalBoxStats {
    pub fn means(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| r.mean).collect()
    }
}

pub fn marginal_box_stats(view: &EnsembleView) -> MarginalBoxStats {
    let ranks = (0..view.num_districts())
        .map(|r| RankBox::from_values(view.sorted().iter().map(|s| s[r]).collect()))
        .collect();
    MarginalBoxStats { ranks }
}

pub fn write_box_csv(path: &Path, stats: &MarginalBoxStats) -> Result<()> {
    let mut out = String::from("rank,mean,q1,median,q3,lo,hi\n");
    for (i, r) in stats.ranks.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i + 1,
            r.mean,
            r.q1,
            r.median,
            r.q3,
            r.lo,
            r.hi
        ));
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::view;
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn hinges() {
        let (q1, m, q3) = tukey_hinges(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        assert!(close(q1, 0.15) && close(m, 0.3) && close(q3, 0.45));
        assert_eq!(tukey_hinges(&[1.0, 2.0, 3.0, 4.0]), (1.5, 2.5, 3.5));
        assert_eq!(tukey_hinges(&[7.0]), (7.0, 7.0, 7.0));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 10.0, 20.0];
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 100.0), 20.0);
        assert_eq!(percentile(&v, 25.0), 5.0);
    }

    #[test]
    fn box_stats() {
        let ens = view(&[&[0.1, 0.9], &[0.2, 0.9], &[0.3, 0.9], &[0.4, 0.9], &[0.5, 0.9]], 0.5);
        let b = marginal_box_stats(&ens);
        let r1 = b.ranks[0];
        assert!(close(r1.median, 0.3) && close(r1.q1, 0.15) && close(r1.q3, 0.45));
        assert!(close(r1.mean, 0.3));
        assert_eq!((r1.lo, r1.hi), (0.1, 0.5));
        let r2 = b.ranks[1];
        assert_eq!((r2.q1, r2.q3, r2.lo, r2.hi), (0.9, 0.9, 0.9, 0.9));
    }

    #[test]
    fn whiskers_stop_at_fences() {
        let mut shares: Vec<Vec<f64>> = (0..8).map(|i| vec![0.40 + 0.01 * i as f64]).collect();
        shares.push(vec![0.95]);
        let ens = super::super::EnsembleView::from_shares(shares, 0.5).unwrap();
        let r = marginal_box_stats(&ens).ranks[0];
        assert!(r.hi < 0.95 && r.hi >= r.q3);
        assert!(r.lo <= r.q1 && r.q1 <= r.median && r.median <= r.q3);
    }
}
