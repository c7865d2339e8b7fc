use proptest::prelude::*;

use redist::analysis::{
    gerrymandering_index, index_report, marginal_box_stats, parity_sweep, percentile, plan_parity_fraction,
    shift_envelope, EnsembleView, ShiftGrid, ShiftTable, PARITY_STEP,
};
use redist::elections::{interpolate_election, load_votes, rep_seats, Election, ReferenceElection, VoteCounts};
use redist::geography::{load_geography, Plan};
use redist::oracle::{synth_geography, write_synthetic, SyntheticSpec};
use redist::sampler::{random_initial_plan, read_ensemble, write_ensemble, Chain, Ensemble, Provenance};
use redist::scores::{total_score, ScoreWeights};

fn shares(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, k)
}

fn ensemble(k: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(shares(k), n)
}

proptest! {
    #[test]
    fn seats_nondecreasing_in_shift(s in shares(9), a in -60.0f64..60.0, b in -60.0f64..60.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(rep_seats(&s, lo) <= rep_seats(&s, hi));
    }

    #[test]
    fn percentile_bounded_and_monotone(mut v in prop::collection::vec(-10.0f64..10.0, 1..40), q1 in 0.0f64..=100.0, q2 in 0.0f64..=100.0) {
        v.sort_by(f64::total_cmp);
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let (a, b) = (percentile(&v, lo), percentile(&v, hi));
        prop_assert!(v[0] <= a && a <= b && b <= v[v.len() - 1]);
    }

    #[test]
    fn report_percents_in_range(ens in ensemble(5, 1..30), plan in shares(5), sw in 0.3f64..0.7) {
        let view = EnsembleView::from_shares(ens, sw).unwrap();
        let r = index_report(&view, &plan, &ShiftGrid::default(), "p", "e");
        for p in [r.gerrymandering_percent_more, r.representativeness_percent_less, r.l_rep, r.l_dem,
                  r.big_h, r.variant_h, r.variant_l_rep, r.variant_l_dem] {
            prop_assert!((0.0..=100.0).contains(&p), "{p}");
        }
        prop_assert!(r.h >= 0.0 && r.gerrymandering_index >= 0.0);
    }

    #[test]
    fn h_is_minus_log_tie_probability(n in 1usize..40, m_frac in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let ens: Vec<Vec<f64>> = (0..n).map(|i| vec![if i < m { 0.9 } else { 0.1 }]).collect();
        let view = EnsembleView::from_shares(ens, 0.5).unwrap();
        let table = ShiftTable::new(&view, ShiftGrid::default().deltas(0.5));
        let h = table.h(&table.seats_of(&[0.9]));
        prop_assert!((h + (m as f64 / n as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn gi_zero_at_rank_means(ens in ensemble(4, 1..20)) {
        let view = EnsembleView::from_shares(ens, 0.5).unwrap();
        let stats = marginal_box_stats(&view);
        let gi = gerrymandering_index(&view, &stats, &stats.means());
        prop_assert!(gi.value.abs() < 1e-12);
        prop_assert!(gi.percent >= 0.0 && gi.percent <= 100.0);
    }

    #[test]
    fn parity_closed_form_matches_sweep(s in prop::collection::vec(0.05f64..0.95, 1..6), sw in 0.2f64..0.8) {
        let mut s = s;
        if s.len() % 2 == 0 {
            s.pop();
        }
        let closed = 100.0 * (plan_parity_fraction(&s, sw).unwrap() - sw);
        let swept = parity_sweep(&s).unwrap().unwrap();
        prop_assert!((swept - closed).abs() <= PARITY_STEP + 1e-9, "{swept} vs {closed}");
    }

    #[test]
    fn envelope_monotone(ens in ensemble(6, 1..25), reference in shares(6)) {
        let view = EnsembleView::from_shares(ens, 0.5).unwrap();
        let rows = shift_envelope(&view, 10.0, 0.5, Some(&reference)).unwrap();
        prop_assert_eq!(rows.len(), 41);
        for w in rows.windows(2) {
            prop_assert!(w[0].ref_seats <= w[1].ref_seats);
            prop_assert!(w[0].min <= w[1].min && w[0].max <= w[1].max);
            prop_assert!(w[0].mean <= w[1].mean + 1e-12);
        }
        for r in &rows {
            prop_assert!(r.min as f64 <= r.p5 && r.p5 <= r.p95 && r.p95 <= r.max as f64);
        }
    }

    #[test]
    fn canonical_is_label_invariant(labels in prop::collection::vec(0usize..4, 1..30), perm in Just([2usize, 0, 3, 1])) {
        let p = Plan::from_assignment_unchecked(labels.clone());
        let q = Plan::from_assignment_unchecked(labels.iter().map(|&d| perm[d]).collect());
        let c = p.canonical();
        prop_assert_eq!(&c, &q.canonical());
        prop_assert_eq!(&c, &c.canonical());
    }

    #[test]
    fn interpolation_fills_consistently(
        raw in prop::collection::vec((1000u64..5000, 0.2f64..0.8, 0.3f64..0.6, 0.0f64..0.3, any::<bool>()), 6..30)
    ) {
        let mut target = Vec::new();
        let mut reference = Vec::new();
        let mut opposed = Vec::new();
        for (i, &(total, share, turnout, minor, open)) in raw.iter().enumerate() {
            let cast = (total as f64 * turnout) as u64;
            let two = cast - (cast as f64 * minor) as u64;
            let rep = (two as f64 * share) as u64;
            reference.push(VoteCounts { total: cast, dem: two - rep, rep });
            // keep at least two opposed wards
            let is_open = open && i >= 2;
            opposed.push(!is_open);
            let t = cast + 17;
            let trep = ((two as f64) * (share * 0.9 + 0.05)) as u64;
            target.push(if is_open {
                VoteCounts { total: t, dem: two, rep: 0 }
            } else {
                VoteCounts { total: t, dem: two - trep, rep: trep }
            });
        }
        let n = raw.len();
        let refe = ReferenceElection::try_from(Election::new("R", reference, vec![true; n]).unwrap()).unwrap();
        let tgt = Election::new("T", target.clone(), opposed.clone()).unwrap();
        let filled = interpolate_election(&tgt, &[refe]).unwrap();
        for i in 0..n {
            let v = filled.votes()[i];
            prop_assert!(v.rep + v.dem <= v.total);
            prop_assert_eq!(filled.interpolated()[i], !opposed[i]);
            if opposed[i] {
                prop_assert_eq!(v, target[i]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn incremental_scores_match_recomputation(seed in any::<u64>(), k in 2usize..5) {
        let data = synth_geography(&SyntheticSpec { width: 5, height: 4, districts: k, seed, black_peak: 0.5, ..Default::default() }).unwrap();
        let g = &data.geography;
        let weights = ScoreWeights { pop: 20.0, ..ScoreWeights::default() };
        let initial = random_initial_plan(g, k, seed).unwrap();
        let mut chain = Chain::new(g, weights, initial, seed);
        // debug checks compare tracked scores and boundary against a full rebuild
        chain.set_debug_checks(true);
        for i in 0..300 {
            chain.step(i as f64 / 300.0).unwrap();
        }
        let full = total_score(g, chain.plan(), &weights);
        prop_assert!((full.total - chain.state().score.total).abs() <= 1e-9 * full.total.abs().max(1.0));
    }

    #[test]
    fn synthetic_files_round_trip(seed in any::<u64>(), w in 2usize..6, h in 2usize..6) {
        let data = synth_geography(&SyntheticSpec { width: w, height: h, districts: 2, seed, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_synthetic(dir.path(), &data).unwrap();
        let loaded = load_geography(&dir.path().join("wards.csv"), &dir.path().join("adjacency.csv"), 2).unwrap();
        prop_assert_eq!(loaded.geography.wards(), data.geography.wards());
        prop_assert_eq!(loaded.reference_plan.as_ref(), Some(&data.reference_plan));
        let votes = load_votes(&dir.path().join("votes.csv"), &loaded.geography).unwrap();
        prop_assert_eq!(votes, data.elections.clone());

        let ensemble = Ensemble {
            plans: vec![data.reference_plan.clone()],
            provenance: vec![Provenance {
                run_index: 0,
                seed,
                accepted_steps: 0,
                proposals: 0,
                scores: total_score(&data.geography, &data.reference_plan, &ScoreWeights::default()),
            }],
        };
        let path = dir.path().join("ensemble.jsonl");
        write_ensemble(&path, &ensemble).unwrap();
        prop_assert_eq!(read_ensemble(&path, &loaded.geography).unwrap().plans, ensemble.plans);
    }
}
