//! Position-monitored harmonic oscillator in the Gaussian picture.
//!
//! Natural units (ħ = m = 1), X = (a + a†)/√2, P = i(a† - a)/√2 and
//! H = ω(a†a + 1/2). A state seen with efficiency η stays Gaussian; its
//! covariances obey deterministic Riccati equations while the first moments
//! diffuse. The first moments carried here are their ensemble means.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the uncertainty relation v_x v_p - c_xp² ≥ 1/4.
pub const HEISENBERG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianOscillatorState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub v_x: f64,
    pub v_p: f64,
    pub c_xp: f64,
    pub omega: f64,
    pub tau_m: f64,
    /// Fraction of the position record the describing agent sees; 0 is the
    /// unconditioned description.
    pub eta: f64,
}

impl GaussianOscillatorState {
    /// Centered state with the given second moments, validated.
    pub fn new(v_x: f64, v_p: f64, c_xp: f64, omega: f64, tau_m: f64, eta: f64) -> Result<Self> {
        let s = Self {
            mean_x: 0.0,
            mean_p: 0.0,
            v_x,
            v_p,
            c_xp,
            omega,
            tau_m,
            eta,
        };
        s.validate()?;
        Ok(s)
    }

    /// Oscillator ground state, v_x = v_p = 1/2.
    pub fn ground(omega: f64, tau_m: f64, eta: f64) -> Result<Self> {
        Self::new(0.5, 0.5, 0.0, omega, tau_m, eta)
    }

    pub fn with_means(mut self, mean_x: f64, mean_p: f64) -> Self {
        self.mean_x = mean_x;
        self.mean_p = mean_p;
        self
    }

    pub fn det(&self) -> f64 {
        self.v_x * self.v_p - self.c_xp * self.c_xp
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.tau_m > 0.0) {
            return Err(Error::OutOfRange(format!(
                "omega = {} and tau_m = {} must be > 0",
                self.omega, self.tau_m
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidEfficiency(self.eta));
        }
        let finite = [self.mean_x, self.mean_p, self.v_x, self.v_p, self.c_xp]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.v_x > 0.0) || !(self.v_p > 0.0) {
            return Err(Error::InvalidState(format!(
                "variances ({}, {}) must be finite and positive",
                self.v_x, self.v_p
            )));
        }
        let det = self.det();
        if det < 0.25 - HEISENBERG_TOL {
            return Err(Error::InvalidState(format!(
                "covariance determinant {det} violates the uncertainty bound 1/4"
            )));
        }
        Ok(())
    }

    fn with_moments(&self, m: [f64; 5]) -> Self {
        Self {
            mean_x: m[0],
            mean_p: m[1],
            v_x: m[2],
            v_p: m[3],
            c_xp: m[4],
            ..*self
        }
    }

    fn moments(&self) -> [f64; 5] {
        [self.mean_x, self.mean_p, self.v_x, self.v_p, self.c_xp]
    }
}

/// (dv_x, dv_p, dc_xp)/dt.
pub fn moment_derivatives(s: &GaussianOscillatorState) -> (f64, f64, f64) {
    let k = s.eta / s.tau_m;
    let w = s.omega;
    (
        2.0 * w * s.c_xp - k * s.v_x * s.v_x,
        -2.0 * w * s.c_xp + 1.0 / (4.0 * s.tau_m) - k * s.c_xp * s.c_xp,
        w * s.v_p - w * s.v_x - k * s.v_x * s.c_xp,
    )
}

fn derivatives(s: &GaussianOscillatorState) -> [f64; 5] {
    let (dvx, dvp, dc) = moment_derivatives(s);
    [s.omega * s.mean_p, -s.omega * s.mean_x, dvx, dvp, dc]
}

/// Largest dt accepted by [`integrate_moments`], as a fraction of
/// min(τ_m, 1/ω).
pub const GAUSSIAN_DT_GUARD: f64 = 0.01;

/// RK4 integration of the moment equations; returns `n_steps + 1` states
/// starting with `s0`.
pub fn integrate_moments(
    s0: &GaussianOscillatorState,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<GaussianOscillatorState>> {
    s0.validate()?;
    let limit = GAUSSIAN_DT_GUARD * s0.tau_m.min(1.0 / s0.omega);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge(format!(
            "dt = {dt} must lie in (0, {limit}]"
        )));
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut s = *s0;
    out.push(s);
    let axpy =
        |m: [f64; 5], k: [f64; 5], h: f64| -> [f64; 5] { std::array::from_fn(|i| m[i] + h * k[i]) };
    for _ in 0..n_steps {
        let m = s.moments();
        let k1 = derivatives(&s);
        let k2 = derivatives(&s.with_moments(axpy(m, k1, 0.5 * dt)));
        let k3 = derivatives(&s.with_moments(axpy(m, k2, 0.5 * dt)));
        let k4 = derivatives(&s.with_moments(axpy(m, k3, dt)));
        let next: [f64; 5] =
            std::array::from_fn(|i| m[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        s = s.with_moments(next);
        s.validate()?;
        out.push(s);
    }
    Ok(out)
}

/// Long-time covariances for efficiency η > 0, taking the c_xp ≥ 0 root.
pub fn steady_state(omega: f64, tau_m: f64, eta: f64) -> Result<GaussianOscillatorState> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidEfficiency(eta));
    }
    if !(omega > 0.0) || !(tau_m > 0.0) {
        return Err(Error::OutOfRange(format!(
            "omega = {omega} and tau_m = {tau_m} must be > 0"
        )));
    }
    let wt = omega * tau_m;
    let c_xp = ((wt * wt + eta / 4.0).sqrt() - wt) / eta;
    let v_x = (2.0 * wt * c_xp / eta).sqrt();
    let v_p = v_x * (1.0 + eta * c_xp / wt);
    GaussianOscillatorState::new(v_x, v_p, c_xp, omega, tau_m, eta)
}

/// 1/(2√det σ).
pub fn purity_from_covariance(s: &GaussianOscillatorState) -> f64 {
    (1.0 / (2.0 * s.det().sqrt())).min(1.0)
}

/// Von Neumann entropy (nats) of a one-mode Gaussian state with purity P:
/// a ln a - b ln b with a = 1/(2P) + 1/2, b = a - 1.
pub fn gaussian_entropy_from_purity(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange(format!("purity {p} must lie in (0, 1]")));
    }
    let b = 0.5 / p - 0.5;
    let a = b + 1.0;
    let term = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    Ok(term(a) - term(b))
}

/// One row of the ignorance-to-awareness table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRow {
    pub eta: f64,
    /// 1 - √η.
    pub lower: f64,
    /// √(1 - √η).
    pub upper: f64,
    /// Steady-state mean relative entropy; +∞ at η = 0.
    pub rel_entropy: f64,
}

/// Steady-state trace-distance bounds and relative entropy for each η in
/// the grid. η = 0 is reported by its limit (lower = upper = 1, infinite
/// entropy).
pub fn transition_curves(eta_grid: &[f64]) -> Result<Vec<TransitionRow>> {
    eta_grid
        .iter()
        .map(|&eta| {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::OutOfRange(format!("eta {eta} outside [0, 1]")));
            }
            let p = eta.sqrt();
            let rel_entropy = if eta == 0.0 {
                f64::INFINITY
            } else {
                gaussian_entropy_from_purity(p)?
            };
            Ok(TransitionRow {
                eta,
                lower: 1.0 - p,
                upper: (1.0 - p).sqrt(),
                rel_entropy,
            })
        })
        .collect()
}

/// d⟨S⟩/dη = ln((1 - √η)/(1 + √η)) / (4 η^{3/2}) for 0 < η < 1.
pub fn entropy_eta_derivative(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::OutOfRange(format!("eta {eta} must lie in (0, 1)")));
    }
    let r = eta.sqrt();
    Ok(((1.0 - r) / (1.0 + r)).ln() / (4.0 * eta * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_examples() {
        let s = GaussianOscillatorState::new(1.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(moment_derivatives(&s), (-1.0, 0.25, 0.0));
        let s = GaussianOscillatorState::new(0.7, 0.9, 0.2, 1.3, 0.5, 0.0).unwrap();
        let (_, dvp, _) = moment_derivatives(&s);
        assert!((dvp - (-2.0 * 1.3 * 0.2 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn steady_state_examples() {
        let s = steady_state(1.0, 1.0, 1.0).unwrap();
        assert!((s.c_xp - 0.1180339887498949).abs() < 1e-12);
        assert!((s.v_x - 0.48586827175664576).abs() < 1e-12);
        assert!((s.v_p - 0.5432172418791006).abs() < 1e-12);
        for &(w, t) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.1), (1.0, 10.0)] {
            for &eta in &[0.05, 0.1, 0.25, 0.5, 0.75, 1.0] {
                let s = steady_state(w, t, eta).unwrap();
                let (a, b, c) = moment_derivatives(&s);
                let scale = 1.0 / t + w;
                assert!(
                    a.abs().max(b.abs()).max(c.abs()) < 1e-12 * scale,
                    "{w} {t} {eta}"
                );
                assert!((purity_from_covariance(&s) - eta.sqrt()).abs() < 1e-12);
            }
        }
        assert!(matches!(
            steady_state(1.0, 1.0, 0.0),
            Err(Error::InvalidEfficiency(_))
        ));
    }

    #[test]
    fn purity_examples() {
        let s = GaussianOscillatorState::ground(1.0, 1.0, 1.0).unwrap();
        assert_eq!(purity_from_covariance(&s), 1.0);
        let s = GaussianOscillatorState::new(2.0, 0.5, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((purity_from_covariance(&s) - 0.5).abs() < 1e-15);
        let s = steady_state(1.0, 1.0, 0.25).unwrap();
        assert!((purity_from_covariance(&s) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_violation_rejected() {
        assert!(matches!(
            GaussianOscillatorState::new(0.4, 0.5, 0.0, 1.0, 1.0, 1.0),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(gaussian_entropy_from_purity(1.0).unwrap(), 0.0);
        let s = gaussian_entropy_from_purity(0.5f64.sqrt()).unwrap();
        assert!((s - 0.5533032997205156).abs() < 1e-12);
        assert!((gaussian_entropy_from_purity(0.5).unwrap() - 0.9547712524422192).abs() < 1e-12);
        let grid: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&p| gaussian_entropy_from_purity(p).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(gaussian_entropy_from_purity(0.0).is_err());
        assert!(gaussian_entropy_from_purity(1.1).is_err());
    }

    #[test]
    fn integration_behaviour() {
        let s = steady_state(1.0, 1.0, 0.5).unwrap();
        let path = integrate_moments(&s, 0.01, 500).unwrap();
        for p in &path {
            assert!((p.v_x - s.v_x).abs() < 1e-12 && (p.c_xp - s.c_xp).abs() < 1e-12);
        }
        // relaxation runs at (η/τ_m)·v_x, so η = 1 settles fastest
        let s = steady_state(1.0, 1.0, 1.0).unwrap();
        let start = GaussianOscillatorState::new(2.0, 1.0, 0.3, 1.0, 1.0, 1.0).unwrap();
        let path = integrate_moments(&start, 0.01, 5000).unwrap();
        let last = path.last().unwrap();
        assert!((last.v_x - s.v_x).abs() < 1e-8 && (last.v_p - s.v_p).abs() < 1e-8);
        assert!((last.c_xp - s.c_xp).abs() < 1e-8);
        assert!(path.iter().all(|p| p.det() >= 0.25 - HEISENBERG_TOL));
        assert!(matches!(
            integrate_moments(&start, 0.02, 10),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn rk4_global_order() {
        let start = GaussianOscillatorState::ground(1.0, 1.0, 0.7).unwrap();
        let reference = *integrate_moments(&start, 0.00125, 1600)
            .unwrap()
            .last()
            .unwrap();
        let err = |dt: f64, n: usize| {
            let s = *integrate_moments(&start, dt, n).unwrap().last().unwrap();
            (s.v_x - reference.v_x).abs()
                + (s.v_p - reference.v_p).abs()
                + (s.c_xp - reference.c_xp).abs()
        };
        let ratio = err(0.01, 200) / err(0.005, 400);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn means_rotate() {
        let s = GaussianOscillatorState::ground(2.0, 1.0, 1.0)
            .unwrap()
            .with_means(1.0, 0.0);
        let n = 200;
        let dt = 0.005;
        let last = *integrate_moments(&s, dt, n).unwrap().last().unwrap();
        let t = n as f64 * dt;
        assert!((last.mean_x - (2.0 * t).cos()).abs() < 1e-9);
        assert!((last.mean_p + (2.0 * t).sin()).abs() < 1e-9);
    }

    #[test]
    fn transition_examples() {
        let rows = transition_curves(&[1.0, 0.25, 0.0]).unwrap();
        assert_eq!(
            (rows[0].lower, rows[0].upper, rows[0].rel_entropy),
            (0.0, 0.0, 0.0)
        );
        assert!(
            (rows[1].lower - 0.5).abs() < 1e-15 && (rows[1].upper - 0.5f64.sqrt()).abs() < 1e-15
        );
        assert!((rows[1].rel_entropy - 0.9547712524422192).abs() < 1e-12);
        assert_eq!(rows[2].lower, 1.0);
        assert!(rows[2].rel_entropy.is_infinite());
        assert!(transition_curves(&[1.2]).is_err());
    }

    #[test]
    fn eta_derivative() {
        assert!((entropy_eta_derivative(0.25).unwrap() + 2.1972245773362196).abs() < 1e-12);
        let s = |eta: f64| gaussian_entropy_from_purity(eta.sqrt()).unwrap();
        for &eta in &[0.1, 0.3, 0.5, 0.8] {
            let h = 1e-5;
            let fd = (s(eta + h) - s(eta - h)) / (2.0 * h);
            let d = entropy_eta_derivative(eta).unwrap();
            assert!(((fd - d) / d).abs() < 1e-6, "{eta}: {fd} vs {d}");
        }
        let approach: Vec<f64> = [0.9, 0.99, 0.9999, 1.0 - 1e-12]
            .iter()
            .map(|&e| entropy_eta_derivative(e).unwrap())
            .collect();
        assert!(approach.windows(2).all(|w| w[1] < w[0]));
        assert!(approach[3] < -5.0);
        assert!(entropy_eta_derivative(1.0).is_err() && entropy_eta_derivative(0.0).is_err());
    }
}
