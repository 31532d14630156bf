use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every solver and certifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Tableau entries at or below this magnitude never become pivots.
    pub pivot: f64,
    /// Row residual accepted as satisfied; also the phase-1 infeasibility threshold.
    pub feasibility: f64,
    /// Maximum primal/dual objective gap at an optimum.
    pub duality: f64,
    /// Minimum slack `delta*` for a strict homogeneous system to count as solvable.
    pub strict: f64,
    /// Band around zero for active-set membership.
    pub active: f64,
    /// Maximum stationarity residual for recovered multipliers.
    pub stationary: f64,
    /// Slack used when comparing weighted objective values on a grid.
    pub value: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            pivot: 1e-9,
            feasibility: 1e-8,
            duality: 1e-7,
            strict: 1e-7,
            active: 1e-7,
            stationary: 1e-7,
            value: 1e-7,
        }
    }
}
