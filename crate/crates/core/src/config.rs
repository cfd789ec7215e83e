use serde::Serialize;

use crate::automorphism::DEFAULT_BUDGET;
use crate::word::WindowParams;

/// Bounds shared by every analysis. Parallelism and output location are not
/// part of it, so reports do not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Factor length `k` used for languages and leaf tests.
    pub depth: usize,
    /// Maximal number of iterates when building languages.
    pub iter_max: usize,
    /// Consecutive unchanged stages that count as stabilization.
    pub stall: usize,
    /// Length bound on the classes generating the orbit languages.
    pub ball: usize,
    /// Length bound on `w` in candidates `w·t^m`.
    pub word_radius: usize,
    /// Bound on `|m|` in candidates `w·t^m`.
    pub exp_max: usize,
    pub period_max: usize,
    /// Rays must diverge within this many letters.
    pub probe: usize,
    /// Extra letters on each side of the leaf window.
    pub slack: usize,
    pub budget: usize,
    pub tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            depth: 6,
            iter_max: 30,
            stall: 5,
            ball: 2,
            word_radius: 2,
            exp_max: 2,
            period_max: 6,
            probe: 64,
            slack: 6,
            budget: DEFAULT_BUDGET,
            tol: 1e-9,
        }
    }
}

impl AnalysisConfig {
    pub fn window_params(&self) -> WindowParams {
        WindowParams { probe: self.probe, start: 16.min(self.probe) }
    }

    /// Prefix length certified for every attracting ray: enough for any
    /// window that can be requested.
    pub fn ray_target(&self) -> usize {
        self.probe + 2 * (self.depth + self.slack) + 8
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("depth", self.depth),
            ("iter-max", self.iter_max),
            ("stall", self.stall),
            ("ball", self.ball),
            ("word-radius", self.word_radius),
            ("exp-max", self.exp_max),
            ("period-max", self.period_max),
            ("probe", self.probe),
            ("budget", self.budget),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("--{name} must be positive"));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err("--tol must be positive".into());
        }
        if self.probe < self.depth {
            return Err("--probe must be at least --depth".into());
        }
        Ok(())
    }
}
