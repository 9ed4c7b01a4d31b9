//! Analytic bounds and identities that a less-informed agent can evaluate
//! from its own state, without access to the complete description ρ_O.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::metrics::{
    commutator_2norm_sq, entropy_of_spectrum, purity, surprise_second_moment_of_spectrum, PURE_TOL,
};
use crate::operators::commutator;
use crate::sme::MeasurementChannel;
use crate::state::{c, trace_product, CMatrix, DensityOperator, Observable, C64};

/// Slack used when comparing bound endpoints.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

impl BoundPair {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper + BOUND_SLACK) {
            return Err(Error::OutOfRange(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Whether `value` lies in [lower - slack, upper + slack].
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }

    /// Distance of `value` inside the interval; negative when outside.
    pub fn margin(&self, value: f64) -> f64 {
        (value - self.lower).min(self.upper - value)
    }
}

/// Time series of an ensemble statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample variance.
    pub variance: Vec<f64>,
    /// Standard error of the mean, √(variance/N).
    pub std_error: Vec<f64>,
    /// Standard error of the sample variance, √((m₄ - m₂²)/N).
    pub variance_std_error: Vec<f64>,
    /// Finite samples that entered each time point.
    pub count: Vec<usize>,
    /// Raw samples, indexed `[trajectory][time]`, when retained.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trajectory: Option<Vec<Vec<f64>>>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// (1 - 𝒫, √(1 - 𝒫)) bracketing the mean trace distance to the complete
/// description.
pub fn purity_sandwich(rho_agent: &DensityOperator) -> BoundPair {
    let gap = (1.0 - purity(rho_agent)).max(0.0);
    BoundPair {
        lower: gap,
        upper: gap.sqrt(),
    }
}

/// S(ρ_agent), the mean relative entropy of the complete description with
/// respect to the agent's.
pub fn entropy_identity_rhs(rho_agent: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho_agent.spectrum())
}

/// 𝒫 - 𝒫².
pub fn trace_distance_variance_bound(rho_agent: &DensityOperator) -> f64 {
    let p = purity(rho_agent);
    p - p * p
}

/// tr(ρ log²ρ) - S(ρ)².
pub fn relative_entropy_variance_bound(rho_agent: &DensityOperator) -> f64 {
    let spec = rho_agent.spectrum();
    let s = entropy_of_spectrum(&spec);
    surprise_second_moment_of_spectrum(&spec) - s * s
}

fn check_pure(rho: &DensityOperator) -> Result<()> {
    let p = purity(rho);
    if p < 1.0 - PURE_TOL {
        return Err(Error::NotPure { purity: p });
    }
    Ok(())
}

fn variance(rho: &DensityOperator, a: &CMatrix) -> f64 {
    let m = trace_product(rho.matrix(), a);
    (trace_product(rho.matrix(), &(a * a)) - m * m).max(0.0)
}

/// 1/τ_D = Σ_α Var_ρ0(A_α)/(4 τ_m^α) for a pure initial state.
pub fn decoherence_rate(rho0: &DensityOperator, channels: &[MeasurementChannel]) -> Result<f64> {
    check_pure(rho0)?;
    let mut rate = 0.0;
    for ch in channels {
        check_dim(rho0.dim(), ch.observable.dim())?;
        rate += variance(rho0, ch.observable.matrix()) / (4.0 * ch.tau_m);
    }
    Ok(rate)
}

/// (T/τ_D, √(T/τ_D)) for short times T ≤ τ_D.
pub fn short_time_bounds(
    rho0: &DensityOperator,
    channels: &[MeasurementChannel],
    t: f64,
) -> Result<BoundPair> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("time {t} must be >= 0")));
    }
    let x = t * decoherence_rate(rho0, channels)?;
    if x > 1.0 + BOUND_SLACK {
        return Err(Error::OutOfRegime(format!("T/tau_D = {x} exceeds 1")));
    }
    BoundPair::new(x, x.sqrt())
}

/// Trapezoid integral of uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Trapezoid time average of uniformly spaced samples; a single sample is
/// its own average.
pub fn time_average(values: &[f64]) -> Result<f64> {
    match values.len() {
        0 => Err(Error::EmptySeries),
        1 => Ok(values[0]),
        n => Ok(trapezoid(values, 1.0) / (n - 1) as f64),
    }
}

/// Σ_α (1/(4 τ_m^α)) ∫ ‖[ρ_A(t), A_α]‖₂² dt over a series sampled every `dt`.
/// Along unconditioned evolution from a pure state this equals 1 - 𝒫(ρ_A(T)).
pub fn commutator_rate_identity(
    rho_a_series: &[DensityOperator],
    channels: &[MeasurementChannel],
    dt: f64,
) -> Result<f64> {
    if rho_a_series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut integrand = vec![0.0; rho_a_series.len()];
    for ch in channels {
        for (v, rho) in integrand.iter_mut().zip(rho_a_series) {
            *v += commutator_2norm_sq(rho, &ch.observable)? / (4.0 * ch.tau_m);
        }
    }
    Ok(trapezoid(&integrand, dt))
}

/// (|𝒫_A - 𝒫_B|, √(1 - 𝒫_A) + √(1 - 𝒫_B)) for the trace distance between
/// two partially informed agents.
pub fn multi_agent_triangle_bounds(
    rho_a: &DensityOperator,
    rho_b: &DensityOperator,
) -> Result<BoundPair> {
    check_dim(rho_a.dim(), rho_b.dim())?;
    let (pa, pb) = (purity(rho_a), purity(rho_b));
    BoundPair::new(
        (pa - pb).abs(),
        (1.0 - pa).max(0.0).sqrt() + (1.0 - pb).max(0.0).sqrt(),
    )
}

/// V_X = i[H, X] - Σ_α (1/(8 τ_m^α)) [A_α, [A_α, X]], the Heisenberg-picture
/// rate of change of X under the unconditioned dynamics.
pub fn heisenberg_rate_operator(
    x: &Observable,
    h: &Observable,
    channels: &[MeasurementChannel],
) -> Result<Observable> {
    check_dim(x.dim(), h.dim())?;
    let mut v = commutator(h.matrix(), x.matrix()) * C64::new(0.0, 1.0);
    for ch in channels {
        check_dim(x.dim(), ch.observable.dim())?;
        let a = ch.observable.matrix();
        v -= commutator(a, &commutator(a, x.matrix())) * c(ch.dephasing_rate());
    }
    Observable::new(v)
}

/// Variance tr(ρ V²) - tr(ρ V)² along a series.
fn rate_variance_series(series: &[DensityOperator], v: &Observable) -> Result<Vec<f64>> {
    series
        .iter()
        .map(|rho| {
            check_dim(v.dim(), rho.dim())?;
            Ok(variance(rho, v.matrix()))
        })
        .collect()
}

/// 2T‖X‖ √(time average of tr(ρ V_X²) - tr(ρ V_X)²) over the agent's series,
/// bounding the mean squared gap in ⟨X⟩ between agent and complete
/// description at time T.
pub fn observable_gap_bound(
    rho_agent_series: &[DensityOperator],
    x: &Observable,
    h: &Observable,
    channels: &[MeasurementChannel],
    t: f64,
) -> Result<f64> {
    if rho_agent_series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let v = heisenberg_rate_operator(x, h, channels)?;
    let avg = time_average(&rate_variance_series(rho_agent_series, &v)?)?;
    Ok(2.0 * t * x.operator_norm() * avg.max(0.0).sqrt())
}

/// Diagnostic for the implicit form of the observable bound,
/// ⟨𝒯_T^X⟩ ≤ 2T √(avg ⟨𝒯^X⟩) √(avg Var V_X). Takes the simulated mean gap
/// series ⟨𝒯_t^X⟩ on the same grid as the agent series and returns
/// lhs - rhs, which is ≤ 0 when the inequality holds.
pub fn observable_gap_implicit_residual(
    mean_gap_series: &[f64],
    rho_agent_series: &[DensityOperator],
    x: &Observable,
    h: &Observable,
    channels: &[MeasurementChannel],
    t: f64,
) -> Result<f64> {
    if mean_gap_series.is_empty() || rho_agent_series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if mean_gap_series.len() != rho_agent_series.len() {
        return Err(Error::MisalignedGrids);
    }
    let v = heisenberg_rate_operator(x, h, channels)?;
    let var = time_average(&rate_variance_series(rho_agent_series, &v)?)?;
    let gap = time_average(mean_gap_series)?;
    let lhs = *mean_gap_series.last().expect("non-empty");
    Ok(lhs - 2.0 * t * gap.max(0.0).sqrt() * var.max(0.0).sqrt())
}

/// tr((ρ_A - ρ_B) V_X)², the kernel of the bound on the ⟨X⟩ gap between two
/// agents monitoring different channels.
pub fn two_observer_gap_rate(
    rho_a: &DensityOperator,
    rho_b: &DensityOperator,
    x: &Observable,
    h: &Observable,
    channels: &[MeasurementChannel],
) -> Result<f64> {
    check_dim(rho_a.dim(), rho_b.dim())?;
    let v = heisenberg_rate_operator(x, h, channels)?;
    check_dim(v.dim(), rho_a.dim())?;
    let diff = rho_a.matrix() - rho_b.matrix();
    Ok(trace_product(&diff, v.matrix()).powi(2))
}
