//! Run configuration: one flat TOML file of documented keys. Every key is
//! optional and defaults to the published settings; command-line flags
//! override the file.
//!
//! ```toml
//! wards = "data/wards.csv"
//! adjacency = "data/adjacency.csv"
//! votes = "data/votes.csv"
//! districts = 99
//! ensemble_size = 100
//! seed = 7
//! w_pop = 2200.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ShiftGrid;
use crate::error::{Error, Result};
use crate::sampler::{AnnealingSchedule, FilterCriteria};
use crate::scores::{ScoreWeights, VraTarget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wards: Option<PathBuf>,
    pub adjacency: Option<PathBuf>,
    pub votes: Option<PathBuf>,
    /// `ward_id,district` CSV; when absent the `ref_district` column of the
    /// wards file is used.
    pub reference_plan: Option<PathBuf>,
    /// JSON-lines ensemble read by `analyze`.
    pub ensemble: Option<PathBuf>,
    pub out_dir: PathBuf,

    /// When absent, the number of distinct `ref_district` labels.
    pub districts: Option<usize>,
    pub ensemble_size: usize,
    pub seed: u64,
    pub workers: usize,
    /// Annealing runs allowed before sampling gives up; 0 picks
    /// `max(20 * ensemble_size, 100)`.
    pub max_attempts: usize,

    pub w_pop: f64,
    pub w_comp: f64,
    pub w_county: f64,
    pub w_vra: f64,
    pub w_town: f64,

    pub vra_black_districts: usize,
    pub vra_black_threshold: f64,
    pub vra_hispanic_districts: usize,
    pub vra_hispanic_threshold: f64,
    pub max_pop_deviation: f64,
    pub max_compactness: Option<f64>,

    pub steps_beta0: u64,
    pub steps_ramp: u64,
    pub steps_beta1: u64,

    pub shift_lo: f64,
    pub shift_hi: f64,
    pub shift_step: f64,
    pub envelope_range: f64,
    pub envelope_step: f64,

    /// Elections to analyze; empty means all in the votes file.
    pub elections: Vec<String>,
    /// Candidate reference elections for interpolation; empty means every
    /// fully opposed election other than the target.
    pub interpolation_candidates: Vec<String>,
    pub interpolation_max_refs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let w = ScoreWeights::default();
        let f = FilterCriteria::default();
        let s = AnnealingSchedule::default();
        RunConfig {
            wards: None,
            adjacency: None,
            votes: None,
            reference_plan: None,
            ensemble: None,
            out_dir: PathBuf::from("out"),
            districts: None,
            ensemble_size: 100,
            seed: 0,
            workers: 1,
            max_attempts: 0,
            w_pop: w.pop,
            w_comp: w.comp,
            w_county: w.county,
            w_vra: w.vra,
            w_town: w.town,
            vra_black_districts: f.vra_black_districts,
            vra_black_threshold: f.vra_black_threshold,
            vra_hispanic_districts: f.vra_hispanic_districts,
            vra_hispanic_threshold: f.vra_hispanic_threshold,
            max_pop_deviation: f.max_pop_deviation,
            max_compactness: f.max_compactness,
            steps_beta0: s.steps_beta0,
            steps_ramp: s.steps_ramp,
            steps_beta1: s.steps_beta1,
            shift_lo: 45.0,
            shift_hi: 55.0,
            shift_step: 0.5,
            envelope_range: 10.0,
            envelope_step: 0.5,
            elections: Vec::new(),
            interpolation_candidates: Vec::new(),
            interpolation_max_refs: 3,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            Error::parse(origin, line, e.message())
        })
    }

    pub fn weights(&self) -> ScoreWeights {
        ScoreWeights {
            pop: self.w_pop,
            comp: self.w_comp,
            county: self.w_county,
            vra: self.w_vra,
            town: self.w_town,
            vra_target: VraTarget {
                black_districts: self.vra_black_districts,
                black_threshold: self.vra_black_threshold,
                hispanic_districts: self.vra_hispanic_districts,
                hispanic_threshold: self.vra_hispanic_threshold,
            },
        }
    }

    pub fn filter(&self) -> FilterCriteria {
        FilterCriteria {
            max_pop_deviation: self.max_pop_deviation,
            vra_black_districts: self.vra_black_districts,
            vra_black_threshold: self.vra_black_threshold,
            vra_hispanic_districts: self.vra_hispanic_districts,
            vra_hispanic_threshold: self.vra_hispanic_threshold,
            max_compactness: self.max_compactness,
        }
    }

    pub fn schedule(&self) -> AnnealingSchedule {
        AnnealingSchedule::new(self.steps_beta0, self.steps_ramp, self.steps_beta1)
    }

    pub fn shift_grid(&self) -> Result<ShiftGrid> {
        ShiftGrid::range(self.shift_lo, self.shift_hi, self.shift_step)
    }

    /// Checks value ranges and that every configured path exists.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::Validation("ensemble_size must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Validation("workers must be at least 1".into()));
        }
        if self.districts == Some(0) {
            return Err(Error::Validation("districts must be at least 1".into()));
        }
        if self.interpolation_max_refs == 0 {
            return Err(Error::Validation("interpolation_max_refs must be at least 1".into()));
        }
        for w in [self.w_pop, self.w_comp, self.w_county, self.w_vra, self.w_town] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Validation(format!("score weight {w} must be finite and nonnegative")));
            }
        }
        let filter = self.filter();
        match self.districts {
            Some(k) => filter.validate_for(k),
            None => filter.validate(),
        }
        .map_err(|e| Error::Validation(e.to_string()))?;
        self.shift_grid().map_err(|e| Error::Validation(e.to_string()))?;
        for p in [&self.wards, &self.adjacency, &self.votes, &self.reference_plan, &self.ensemble]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(Error::Validation(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
