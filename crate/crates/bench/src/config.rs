use std::path::PathBuf;

use geopriv::accounting::matched_gp_budget;
use geopriv::dataset::CellMembership;
use geopriv::statcheck::Tamper;

use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Identity,
    Knn,
    Hull,
    Verify,
}

impl Task {
    pub fn label(self) -> &'static str {
        match self {
            Task::Identity => "identity",
            Task::Knn => "knn",
            Task::Hull => "hull",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Independent uniform points in the square.
    Uniform,
    /// A reflected random walk with fixed step length.
    Walk,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Synthetic(SyntheticKind),
    /// A trace file or directory in the cabspotting layout.
    Path(PathBuf),
}

impl InputSpec {
    /// `synthetic`, `synthetic:uniform`, `synthetic:walk`, or a path.
    pub fn parse(s: &str) -> Self {
        match s {
            "synthetic" | "synthetic:uniform" => InputSpec::Synthetic(SyntheticKind::Uniform),
            "synthetic:walk" => InputSpec::Synthetic(SyntheticKind::Walk),
            path => InputSpec::Path(PathBuf::from(path)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    /// CGP rates. Ignored when `eps_grid` is set.
    pub rho_grid: Vec<f64>,
    /// GP rates; when set, the CGP mechanisms run at `ρ = ε²/2`.
    pub eps_grid: Option<Vec<f64>>,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    /// Repetitions per collection.
    pub trials: usize,
    /// Number of trace collections drawn from the input.
    pub collections: usize,
    pub seed: u64,
    pub delta: f64,
    /// Lower bound on `ε·Δ` used when matching GP to CGP budgets.
    pub min_eps_delta: f64,
    /// Failure probability handed to the hull mechanisms.
    pub beta: f64,
    pub input: InputSpec,
    /// Replace every noise draw by its mean.
    pub zero_noise: bool,
    /// Side of the synthetic square in meters.
    pub square_side: f64,
    /// Step length of the synthetic walk in meters.
    pub walk_step: f64,
    pub cell_membership: CellMembership,
    /// Score the kNN baselines by true rather than released distances.
    pub baseline_true_distances: bool,
    pub verify_samples: usize,
    pub verify_mean_samples: usize,
    /// Swap a closed form in the verification battery for a wrong one.
    pub tamper: Option<Tamper>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Identity,
            rho_grid: vec![5e-8, 5e-7, 5e-6, 5e-5, 5e-4],
            eps_grid: None,
            n_grid: vec![1024],
            k_grid: vec![16, 64],
            trials: 25,
            collections: 50,
            seed: 0,
            delta: 1e-10,
            min_eps_delta: 10.0,
            beta: 0.05,
            input: InputSpec::Synthetic(SyntheticKind::Uniform),
            zero_noise: false,
            square_side: 10_000.0,
            walk_step: 50.0,
            cell_membership: CellMembership::Points,
            baseline_true_distances: false,
            verify_samples: 1_000_000,
            verify_mean_samples: 100_000,
            tamper: None,
        }
    }
}

/// One budget grid point: the GP rate and the CGP rate compared at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPoint {
    /// The grid value reported in the `budget` column.
    pub value: f64,
    pub eps: f64,
    pub rho: f64,
}

fn config_error(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.task == Task::Verify {
            if self.verify_samples == 0 || self.verify_mean_samples == 0 {
                return Err(config_error("verification sample counts must be positive"));
            }
            return Ok(());
        }
        let grid = self.eps_grid.as_ref().unwrap_or(&self.rho_grid);
        if grid.is_empty() || grid.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(config_error("budget grid must be non-empty and positive"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(config_error("n grid must be non-empty and positive"));
        }
        if self.task == Task::Knn && (self.k_grid.is_empty() || self.k_grid.contains(&0)) {
            return Err(config_error("k grid must be non-empty and positive"));
        }
        if self.trials == 0 || self.collections == 0 {
            return Err(config_error("trials and collections must be at least 1"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(config_error("beta must lie in (0, 1)"));
        }
        if !(self.square_side > 0.0 && self.walk_step > 0.0) {
            return Err(config_error("synthetic square and step must be positive"));
        }
        Ok(())
    }

    /// Budget grid with matched GP and CGP rates.
    pub fn budgets(&self) -> Result<Vec<BudgetPoint>> {
        match &self.eps_grid {
            Some(eps_grid) => Ok(eps_grid
                .iter()
                .map(|&eps| BudgetPoint {
                    value: eps,
                    eps,
                    rho: eps * eps / 2.0,
                })
                .collect()),
            None => self
                .rho_grid
                .iter()
                .map(|&rho| {
                    Ok(BudgetPoint {
                        value: rho,
                        eps: matched_gp_budget(rho, self.delta, self.min_eps_delta)?,
                        rho,
                    })
                })
                .collect(),
        }
    }

    /// Repetitions per grid cell.
    pub fn runs(&self) -> usize {
        self.trials * self.collections
    }
}
