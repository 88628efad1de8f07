use serde::{Deserialize, Serialize};

/// Numerical thresholds used for validation and comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// max|m - m†| for Hermitian inputs.
    pub hermitian: f64,
    /// |tr ρ - 1|.
    pub trace: f64,
    /// Allowed negative eigenvalue of a density matrix.
    pub positivity: f64,
    /// Idempotency, orthogonality and completeness of projectors.
    pub projector: f64,
    /// Distance of tr(P) from an integer.
    pub rank: f64,
    /// P_i Q_j ∈ {0, Q_j} test of the refinement order.
    pub order: f64,
    /// max|[P, Q]| for commuting coarse-grainings.
    pub commute: f64,
    /// Eigenvalue grouping, relative to the spectral range.
    pub degeneracy: f64,
    /// Probabilities below this contribute nothing to entropy sums.
    pub probability_floor: f64,
    /// max|∑ K†K - 1| for Kraus sets.
    pub trace_preserving: f64,
    /// |∑|χ_i|² - 1| per cell.
    pub chi: f64,
    /// Total mass of a classical density.
    pub mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            positivity: 1e-10,
            projector: 1e-10,
            rank: 1e-8,
            order: 1e-9,
            commute: 1e-9,
            degeneracy: 1e-10,
            probability_floor: 1e-14,
            trace_preserving: 1e-9,
            chi: 1e-9,
            mass: 1e-10,
        }
    }
}

impl Tolerances {
    /// Sets a field by name, as used by `--tol-<name>` overrides.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        let slot = match name.replace('-', "_").as_str() {
            "hermitian" => &mut self.hermitian,
            "trace" => &mut self.trace,
            "positivity" => &mut self.positivity,
            "projector" => &mut self.projector,
            "rank" => &mut self.rank,
            "order" => &mut self.order,
            "commute" => &mut self.commute,
            "degeneracy" => &mut self.degeneracy,
            "probability_floor" => &mut self.probability_floor,
            "trace_preserving" => &mut self.trace_preserving,
            "chi" => &mut self.chi,
            "mass" => &mut self.mass,
            other => return Err(format!("unknown tolerance `{other}`")),
        };
        *slot = value;
        Ok(())
    }
}
