//! Command-line surface: `synth`, `sample`, `interpolate`, `analyze` and
//! `validate`, driven by an optional config file plus flag overrides.
//!
//! Input paths not set in the config default to `wards.csv`,
//! `adjacency.csv`, `votes.csv` and `ensemble.jsonl` inside the output
//! directory, so `synth`, `sample` and `analyze` chain without a config.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    ensemble_parity_shift, histogram_rows, index_report, marginal_box_stats, parity_sweep, plan_parity_fraction,
    shift_envelope, write_box_csv, write_envelope_csv, write_histogram_csv, EnsembleView, ShiftGrid, ShiftTable,
    PARITY_STEP,
};
use crate::config::RunConfig;
use crate::elections::{
    district_shares, interpolate_election, load_votes, rep_seats, select_reference_set, write_votes, Election,
    ReferenceElection,
};
use crate::error::{Error, Result};
use crate::geography::{count_reference_districts, load_geography, load_plan, write_file, Geography, Plan};
use crate::oracle::{
    enumerate_plans, exact_boltzmann, exact_linear_fixture, fixed_beta_visits, synth_geography, tv_distance,
    write_synthetic, PopulationField, SyntheticSpec,
};
use crate::sampler::{
    generate_ensemble, random_initial_plan, read_ensemble, write_ensemble, AcceptanceRule, EnsembleOptions,
    FilterCriteria, Provenance, SamplingSummary,
};
use crate::scores::{ScoreWeights, VraTarget};

#[derive(Debug, Parser)]
#[command(name = "redist", version, about = "Annealed MCMC districting ensembles and outlier statistics")]
pub struct Cli {
    /// Flat TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (also the default location of inputs).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic grid instance: wards, adjacency and votes.
    Synth(SynthArgs),
    /// Sample an ensemble of plans.
    Sample(SampleArgs),
    /// Fill in unopposed wards of one election.
    Interpolate(InterpolateArgs),
    /// Compute ensemble statistics.
    Analyze(AnalyzeArgs),
    /// Run the small-instance oracle checks.
    Validate(ValidateArgs),
}

/// `WIDTHxHEIGHT`, e.g. `8x8`.
fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w = w.trim().parse().map_err(|_| format!("bad width in {s}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height in {s}"))?;
    Ok((w, h))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PopulationArg {
    Uniform,
    Urban,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_grid, default_value = "8x8")]
    pub grid: (usize, usize),
    #[arg(long, default_value_t = 4)]
    pub districts: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub population: PopulationArg,
    #[arg(long, default_value_t = 0.55)]
    pub base_share: f64,
    #[arg(long, default_value_t = 0.25)]
    pub urban_amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    pub black_peak: f64,
    #[arg(long, default_value_t = 0.0)]
    pub hispanic_peak: f64,
    #[arg(long, default_value_t = 0.1)]
    pub unopposed: f64,
    #[arg(long, default_value_t = 4)]
    pub county_block: usize,
    #[arg(long, default_value_t = 2)]
    pub town_block: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Number of plans to keep.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub districts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub election: String,
    /// Comma-separated candidate reference elections.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Vec<String>,
    #[arg(long)]
    pub max_refs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Histogram,
    Boxes,
    Envelope,
    Indices,
    Parity,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub which: Analysis,
    /// `ref` for the reference plan, or a `ward_id,district` CSV.
    #[arg(long)]
    pub plan: Option<String>,
    /// Election ids; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    pub election: Vec<String>,
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long)]
    pub districts: Option<usize>,
    /// Envelope half-width in points.
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Histogram shifts in points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_parser = parse_grid, default_value = "3x3")]
    pub instance: (usize, usize),
    #[arg(long, default_value_t = 2)]
    pub districts: usize,
    /// Accepted steps per stationarity chain.
    #[arg(long, default_value_t = 300_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Use an acceptance rule that ignores the score; the suite must fail.
    #[arg(long)]
    pub biased: bool,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    let ctx = Context { cfg };
    match cli.command {
        Command::Synth(a) => ctx.synth(&a, out),
        Command::Sample(a) => ctx.sample(&a, out),
        Command::Interpolate(a) => ctx.interpolate(&a, out),
        Command::Analyze(a) => ctx.analyze(&a, out),
        Command::Validate(a) => ctx.validate(&a, out),
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

#[derive(Serialize)]
struct SampleSidecar<'a> {
    seed: u64,
    summary: &'a SamplingSummary,
    weights: ScoreWeights,
    filter: FilterCriteria,
    schedule: crate::sampler::AnnealingSchedule,
    provenance: &'a [Provenance],
}

#[derive(Serialize)]
struct InterpolationReport {
    target: String,
    candidates: Vec<String>,
    chosen: Vec<String>,
    squared_error: Option<f64>,
    interpolated_wards: usize,
    notice: Option<String>,
}

#[derive(Serialize)]
struct ParityReport {
    plan: String,
    election: String,
    statewide_rep_fraction: f64,
    ensemble_parity_shift: f64,
    ensemble_parity_fraction: f64,
    plan_parity_fraction: f64,
    plan_rep_seats_at_ensemble_parity: usize,
}

struct Context {
    cfg: RunConfig,
}

impl Context {
    fn out_dir(&self) -> Result<&Path> {
        let d = self.cfg.out_dir.as_path();
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        Ok(d)
    }

    fn input(&self, configured: &Option<PathBuf>, default_name: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.cfg.out_dir.join(default_name))
    }

    fn validated(&self, districts: Option<usize>) -> Result<RunConfig> {
        let mut cfg = self.cfg.clone();
        if districts.is_some() {
            cfg.districts = districts;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn load_geography(&self, cfg: &RunConfig) -> Result<(Geography, Option<Plan>)> {
        let wards = self.input(&cfg.wards, "wards.csv");
        let adjacency = self.input(&cfg.adjacency, "adjacency.csv");
        let k = match cfg.districts {
            Some(k) => k,
            None => count_reference_districts(&wards)?.ok_or_else(|| {
                Error::InvalidArgument("set `districts` or provide a ref_district column".into())
            })?,
        };
        cfg.filter().validate_for(k).map_err(|e| Error::Validation(e.to_string()))?;
        let loaded = load_geography(&wards, &adjacency, k)?;
        let reference = match &cfg.reference_plan {
            Some(p) => Some(load_plan(&loaded.geography, p)?),
            None => loaded.reference_plan,
        };
        Ok((loaded.geography, reference))
    }

    fn synth(&self, a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
        let spec = SyntheticSpec {
            width: a.grid.0,
            height: a.grid.1,
            districts: a.districts,
            seed: self.cfg.seed,
            population: match a.population {
                PopulationArg::Uniform => PopulationField::Uniform,
                PopulationArg::Urban => PopulationField::UrbanCluster,
            },
            base_rep_share: a.base_share,
            urban_dem_amplitude: a.urban_amplitude,
            black_peak: a.black_peak,
            hispanic_peak: a.hispanic_peak,
            unopposed_fraction: a.unopposed,
            county_block: a.county_block,
            town_block: a.town_block,
            ..SyntheticSpec::default()
        };
        let data = synth_geography(&spec)?;
        let dir = self.out_dir()?;
        write_synthetic(dir, &data)?;
        say(
            out,
            format!(
                "wrote {} wards, {} edges, {} elections to {}",
                data.geography.num_wards(),
                data.geography.num_edges(),
                data.elections.len(),
                dir.display()
            ),
        )
    }

    fn sample(&self, a: &SampleArgs, out: &mut dyn Write) -> Result<()> {
        let mut cfg = self.validated(a.districts)?;
        if let Some(n) = a.size {
            cfg.ensemble_size = n;
        }
        let (g, _) = self.load_geography(&cfg)?;
        let mut options = EnsembleOptions::for_target(cfg.ensemble_size);
        options.workers = cfg.workers;
        if cfg.max_attempts > 0 {
            options.max_attempts = cfg.max_attempts;
        }
        let (weights, filter, schedule) = (cfg.weights(), cfg.filter(), cfg.schedule());
        let (ensemble, summary) =
            generate_ensemble(&g, &weights, &schedule, &filter, cfg.ensemble_size, cfg.seed, &options)?;
        let dir = self.out_dir()?;
        write_ensemble(&dir.join("ensemble.jsonl"), &ensemble)?;
        write_json(
            &dir.join("ensemble.summary.json"),
            &SampleSidecar {
                seed: cfg.seed,
                summary: &summary,
                weights,
                filter,
                schedule,
                provenance: &ensemble.provenance,
            },
        )?;
        let mut ids = String::from("index,ward_id\n");
        for (i, w) in g.wards().iter().enumerate() {
            ids.push_str(&format!("{i},{}\n", w.name));
        }
        write_file(&dir.join("ward_ids.csv"), &ids)?;
        say(
            out,
            format!(
                "kept {} of {} runs (filter rate {:.3}, MH acceptance {:.3})",
                summary.runs_accepted, summary.runs_attempted, summary.filter_acceptance_rate, summary.mh_acceptance_rate
            ),
        )
    }

    fn interpolate(&self, a: &InterpolateArgs, out: &mut dyn Write) -> Result<()> {
        let mut cfg = self.validated(None)?;
        if let Some(m) = a.max_refs {
            cfg.interpolation_max_refs = m;
        }
        let (g, _) = self.load_geography(&cfg)?;
        let mut elections = load_votes(&self.input(&cfg.votes, "votes.csv"), &g)?;
        let pos = elections
            .iter()
            .position(|e| e.id() == a.election)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown election {}", a.election)))?;
        let names = if !a.candidates.is_empty() {
            a.candidates.clone()
        } else {
            cfg.interpolation_candidates.clone()
        };
        let candidates: Vec<ReferenceElection> = if names.is_empty() {
            elections
                .iter()
                .filter(|e| e.id() != a.election)
                .filter_map(|e| ReferenceElection::try_from(e.clone()).ok())
                .collect()
        } else {
            names
                .iter()
                .map(|n| {
                    let e = elections
                        .iter()
                        .find(|e| e.id() == n)
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown candidate election {n}")))?;
                    ReferenceElection::try_from(e.clone())
                })
                .collect::<Result<_>>()?
        };
        let target = elections[pos].clone();
        let mut report = InterpolationReport {
            target: a.election.clone(),
            candidates: candidates.iter().map(|c| c.id().to_string()).collect(),
            chosen: Vec::new(),
            squared_error: None,
            interpolated_wards: 0,
            notice: None,
        };
        if target.is_fully_opposed() {
            let notice = format!("election {} has no unopposed wards; left unchanged", a.election);
            say(out, &notice)?;
            report.notice = Some(notice);
        } else {
            if candidates.is_empty() {
                return Err(Error::InvalidArgument("no candidate reference elections".into()));
            }
            let sel = select_reference_set(&target, &candidates, cfg.interpolation_max_refs)?;
            let chosen: Vec<ReferenceElection> = sel.indices.iter().map(|&i| candidates[i].clone()).collect();
            let filled = interpolate_election(&target, &chosen)?;
            report.interpolated_wards = filled.interpolated().iter().filter(|&&x| x).count();
            report.chosen = sel.ids.clone();
            report.squared_error = Some(sel.squared_error);
            say(
                out,
                format!(
                    "interpolated {} wards of {} from {} (squared error {})",
                    report.interpolated_wards,
                    a.election,
                    sel.ids.join(","),
                    sel.squared_error
                ),
            )?;
            elections[pos] = filled;
        }
        let dir = self.out_dir()?;
        write_votes(&dir.join("votes_interpolated.csv"), &g, &elections, true)?;
        write_json(&dir.join("interpolation_report.json"), &report)
    }

    fn analyze(&self, a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
        let cfg = self.validated(a.districts)?;
        let (g, reference) = self.load_geography(&cfg)?;
        let elections = load_votes(&self.input(&cfg.votes, "votes.csv"), &g)?;
        let ensemble_path = a
            .ensemble
            .clone()
            .unwrap_or_else(|| self.input(&cfg.ensemble, "ensemble.jsonl"));
        let ensemble = read_ensemble(&ensemble_path, &g)?;
        if ensemble.is_empty() {
            return Err(Error::Validation(format!("ensemble {} is empty", ensemble_path.display())));
        }
        let (plan_label, plan) = match a.plan.as_deref() {
            None | Some("ref") => ("ref".to_string(), reference),
            Some(path) => {
                let p = PathBuf::from(path);
                let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (label, Some(load_plan(&g, &p)?))
            }
        };
        let need_plan = matches!(a.which, Analysis::Indices | Analysis::Parity);
        if need_plan && plan.is_none() {
            return Err(Error::InvalidArgument("no plan given and the wards file has no reference plan".into()));
        }
        let ids = if !a.election.is_empty() {
            a.election.clone()
        } else {
            cfg.elections.clone()
        };
        let selected: Vec<&Election> = if ids.is_empty() {
            elections.iter().collect()
        } else {
            ids.iter()
                .map(|id| {
                    elections
                        .iter()
                        .find(|e| e.id() == id)
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown election {id}")))
                })
                .collect::<Result<_>>()?
        };
        let grid = cfg.shift_grid()?;
        let dir = self.out_dir()?;
        for e in selected {
            let view = EnsembleView::new(&g, &ensemble.plans, e)?;
            let plan_shares = plan.as_ref().map(|p| district_shares(&g, p, e));
            let id = e.id();
            let path = match a.which {
                Analysis::Histogram => {
                    let shifts = if a.shift.is_empty() { vec![0.0] } else { a.shift.clone() };
                    let path = dir.join(format!("histogram_{id}.csv"));
                    write_histogram_csv(&path, &histogram_rows(&view, &shifts))?;
                    path
                }
                Analysis::Boxes => {
                    let path = dir.join(format!("boxes_{id}.csv"));
                    write_box_csv(&path, &marginal_box_stats(&view))?;
                    path
                }
                Analysis::Envelope => {
                    let range = a.range.unwrap_or(cfg.envelope_range);
                    let step = a.step.unwrap_or(cfg.envelope_step);
                    let rows = shift_envelope(&view, range, step, plan_shares.as_deref())?;
                    let path = dir.join(format!("envelope_{id}.csv"));
                    write_envelope_csv(&path, &rows)?;
                    path
                }
                Analysis::Indices => {
                    let shares = plan_shares.as_deref().expect("checked above");
                    let report = index_report(&view, shares, &grid, &plan_label, id);
                    let path = dir.join(format!("indices_{id}.json"));
                    write_json(&path, &report)?;
                    path
                }
                Analysis::Parity => {
                    let shares = plan_shares.as_deref().expect("checked above");
                    let delta = ensemble_parity_shift(&view)?;
                    let report = ParityReport {
                        plan: plan_label.clone(),
                        election: id.to_string(),
                        statewide_rep_fraction: view.statewide(),
                        ensemble_parity_shift: delta,
                        ensemble_parity_fraction: view.statewide() + delta / 100.0,
                        plan_parity_fraction: plan_parity_fraction(shares, view.statewide())?,
                        plan_rep_seats_at_ensemble_parity: rep_seats(shares, delta),
                    };
                    let path = dir.join(format!("parity_{id}.json"));
                    write_json(&path, &report)?;
                    path
                }
            };
            say(out, format!("wrote {}", path.display()))?;
        }
        Ok(())
    }

    fn validate(&self, a: &ValidateArgs, out: &mut dyn Write) -> Result<()> {
        let checks = run_validation_suite(a, self.cfg.seed)?;
        let mut failed = 0;
        for c in &checks {
            if !c.pass {
                failed += 1;
            }
            say(
                out,
                format!("{:<28} {:>12.6}  {}", c.name, c.value, if c.pass { "PASS" } else { "FAIL" }),
            )?;
        }
        if failed > 0 {
            return Err(Error::Validation(format!("{failed} of {} checks failed", checks.len())));
        }
        Ok(())
    }
}

struct Check {
    name: &'static str,
    value: f64,
    pass: bool,
}

fn stationarity_tv(
    g: &Geography,
    weights: &ScoreWeights,
    beta: f64,
    steps: u64,
    seed: u64,
    rule: AcceptanceRule,
) -> Result<f64> {
    let k = g.num_districts();
    let plans = enumerate_plans(g, k, &FilterCriteria::none())?;
    let exact = exact_boltzmann(&plans, g, weights, beta)?;
    let initial = random_initial_plan(g, k, seed)?;
    let visits = fixed_beta_visits(g, weights, beta, initial, steps, seed, rule)?;
    tv_distance(&exact.empirical(&visits)?, &exact.probabilities)
}

fn run_validation_suite(a: &ValidateArgs, seed: u64) -> Result<Vec<Check>> {
    let spec = SyntheticSpec {
        width: a.instance.0,
        height: a.instance.1,
        districts: a.districts,
        seed,
        black_peak: 0.6,
        county_block: 2,
        ..SyntheticSpec::default()
    };
    let data = synth_geography(&spec)?;
    let g = &data.geography;
    let rule = if a.biased {
        AcceptanceRule::IgnoreScore
    } else {
        AcceptanceRule::MetropolisHastings
    };
    let mut checks = Vec::new();

    let tv0 = stationarity_tv(g, &ScoreWeights::default(), 0.0, a.steps, seed, rule)?;
    checks.push(Check {
        name: "uniform_stationarity_tv",
        value: tv0,
        pass: tv0 < a.tolerance,
    });
    let weights = ScoreWeights {
        vra_target: VraTarget {
            black_districts: 1,
            black_threshold: 0.4,
            hispanic_districts: 0,
            hispanic_threshold: 0.4,
        },
        ..ScoreWeights::default()
    };
    let tv1 = stationarity_tv(g, &weights, 1.0, a.steps, seed ^ 1, rule)?;
    checks.push(Check {
        name: "boltzmann_stationarity_tv",
        value: tv1,
        pass: tv1 < a.tolerance,
    });

    let mut worst = 0i64;
    let mut picked = 0;
    let trials = 20;
    for t in 0..trials {
        let f = exact_linear_fixture(seed.wrapping_add(t), 60, 8)?;
        let filled = interpolate_election(&f.target, &[f.exact.clone()])?;
        for (i, (got, want)) in filled.votes().iter().zip(f.truth.votes()).enumerate() {
            if filled.interpolated()[i] {
                for (x, y) in [(got.total, want.total), (got.dem, want.dem), (got.rep, want.rep)] {
                    worst = worst.max((x as i64 - y as i64).abs());
                }
            }
        }
        let sel = select_reference_set(&f.target, &[f.noise.clone(), f.exact.clone()], 3)?;
        if sel.ids == ["EXACT"] {
            picked += 1;
        }
    }
    checks.push(Check {
        name: "interpolation_max_error",
        value: worst as f64,
        pass: worst <= 1,
    });
    checks.push(Check {
        name: "reference_selection_hits",
        value: picked as f64,
        pass: picked == trials,
    });

    // one ensemble member in four wins its only district at every shift
    let view = EnsembleView::from_shares(vec![vec![0.9], vec![0.1], vec![0.1], vec![0.1]], 0.5)?;
    let grid = ShiftGrid::default();
    let table = ShiftTable::new(&view, grid.deltas(view.statewide()));
    let h = table.h(&table.seats_of(&[0.9]));
    let err = (h - 4f64.ln()).abs();
    checks.push(Check {
        name: "h_uniform_tie_identity",
        value: err,
        pass: err < 1e-12,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parity_gap = 0f64;
    for _ in 0..100 {
        let shares: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..0.9)).collect();
        let statewide = rng.random_range(0.35..0.65);
        let closed = 100.0 * (plan_parity_fraction(&shares, statewide)? - statewide);
        let swept = parity_sweep(&shares)?.ok_or(Error::ParityUnreachable)?;
        parity_gap = parity_gap.max((swept - closed).abs());
    }
    checks.push(Check {
        name: "parity_closed_form_gap",
        value: parity_gap,
        pass: parity_gap <= PARITY_STEP + 1e-9,
    });

    let ens: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..7).map(|_| rng.random_range(0.2..0.8)).collect())
        .collect();
    let view = EnsembleView::from_shares(ens.clone(), 0.5)?;
    let rows = shift_envelope(&view, 10.0, 0.5, Some(&ens[0]))?;
    let monotone = rows.windows(2).all(|w| {
        w[0].ref_seats <= w[1].ref_seats && w[0].min <= w[1].min && w[0].max <= w[1].max && w[0].p5 <= w[1].p5
            && w[0].p95 <= w[1].p95
    });
    checks.push(Check {
        name: "envelope_monotone",
        value: f64::from(u8::from(monotone)),
        pass: monotone,
    });
    Ok(checks)
}
