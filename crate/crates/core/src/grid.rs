//! Alternating forced/coast time grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    Forced,
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BurnCount {
    Auto,
    Fixed(usize),
}

/// Shortest coast that fits a 180° slew at `omega_max` plus a settling margin.
pub fn min_coast_duration(omega_max: f64, t_safety: f64) -> Result<f64, CoreError> {
    if !(omega_max > 0.0) {
        return Err(CoreError::Grid(format!("maximum slew rate {omega_max} rad/s must be positive")));
    }
    if !(t_safety >= 0.0) {
        return Err(CoreError::Grid(format!("safety margin {t_safety} s must be non-negative")));
    }
    Ok(PI / omega_max + t_safety)
}

/// Slack for comparing durations that went through unit conversions.
fn slack(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
    kinds: Vec<ArcKind>,
}

impl TimeGrid {
    /// Epochs `t_0 .. t_{m+1}`.
    pub fn epochs(&self) -> &[f64] {
        &self.t
    }

    pub fn kinds(&self) -> &[ArcKind] {
        &self.kinds
    }

    /// Index of the last interval; intervals are `0..=m`.
    pub fn m(&self) -> usize {
        self.kinds.len() - 1
    }

    pub fn num_intervals(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_epochs(&self) -> usize {
        self.t.len()
    }

    pub fn n_burns(&self) -> usize {
        self.kinds.len() / 2
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.t[k + 1] - self.t[k]
    }

    pub fn kind(&self, k: usize) -> ArcKind {
        self.kinds[k]
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    pub fn forced_arcs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kinds.len()).filter(|&k| self.kinds[k] == ArcKind::Forced)
    }

    pub fn natural_arcs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kinds.len()).filter(|&k| self.kinds[k] == ArcKind::Natural)
    }

    /// Position of forced arc `k` among the forced arcs.
    pub fn forced_index(&self, k: usize) -> Option<usize> {
        (self.kinds[k] == ArcKind::Forced).then_some(k / 2)
    }
}

pub fn build_time_grid(
    total_duration: f64,
    t_forced: f64,
    t_natural: f64,
    n_burns: BurnCount,
    min_coast: f64,
) -> Result<TimeGrid, CoreError> {
    if !(t_forced > 0.0) {
        return Err(CoreError::Grid(format!("forced arc duration {t_forced} s must be positive")));
    }
    if t_natural + slack(min_coast) < min_coast {
        return Err(CoreError::Grid(format!(
            "coast duration {t_natural} s is below the slew bound {min_coast} s"
        )));
    }
    let pair = t_forced + t_natural;
    if total_duration + slack(total_duration) < pair {
        return Err(CoreError::Grid(format!(
            "duration {total_duration} s is shorter than one forced/coast pair ({pair} s)"
        )));
    }
    let burns = match n_burns {
        BurnCount::Auto => ((total_duration + slack(total_duration)) / pair).floor().max(1.0) as usize,
        BurnCount::Fixed(0) => return Err(CoreError::Grid("at least one burn is required".into())),
        BurnCount::Fixed(n) => n,
    };
    let last = total_duration - (burns - 1) as f64 * pair - t_forced;
    if last + slack(min_coast) < min_coast {
        return Err(CoreError::Grid(format!(
            "{burns} burns leave a final coast of {last:.3} s, below the slew bound {min_coast:.3} s"
        )));
    }
    let mut t = Vec::with_capacity(2 * burns + 1);
    let mut kinds = Vec::with_capacity(2 * burns);
    t.push(0.0);
    for b in 0..burns {
        let start = b as f64 * pair;
        t.push(start + t_forced);
        kinds.push(ArcKind::Forced);
        kinds.push(ArcKind::Natural);
        t.push(if b + 1 == burns { total_duration } else { start + pair });
    }
    Ok(TimeGrid { t, kinds })
}
