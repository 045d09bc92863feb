//! Numerical tolerances shared by all modules.

/// All numerical thresholds in one place. Defaults are the values the
/// verification suite is calibrated against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Normalized hypersurface residual accepted as "on the flag variety".
    pub flag_tol: f64,
    /// Relative local error target of the adaptive integrator.
    pub ode_tol: f64,
    /// Smallest admissible adaptive step.
    pub min_step: f64,
    /// Threshold on singular values for numerical rank decisions.
    pub rank_tol: f64,
    /// Coordinate size below which a homogeneous coordinate counts as zero.
    pub zero_tol: f64,
    /// Phase tolerance (radians) for the specialty test.
    pub phase_tol: f64,
    /// Exclusion radius around collapse circles of singular tori.
    pub collapse_exclusion: f64,
    /// Exclusion radius around the boundary divisor and the diagonal lines.
    pub divisor_exclusion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            flag_tol: 1e-10,
            ode_tol: 1e-12,
            min_step: 1e-12,
            rank_tol: 1e-7,
            zero_tol: 1e-9,
            phase_tol: 1e-3,
            collapse_exclusion: 1e-3,
            divisor_exclusion: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        [
            self.flag_tol,
            self.ode_tol,
            self.min_step,
            self.rank_tol,
            self.zero_tol,
            self.phase_tol,
            self.collapse_exclusion,
            self.divisor_exclusion,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }
}
