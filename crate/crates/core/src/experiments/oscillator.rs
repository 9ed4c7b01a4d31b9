//! Steady-state transition curves of the position-monitored oscillator.

use crate::gaussian::{entropy_eta_derivative, transition_curves};

use super::config::require;
use super::{
    invalid, Check, ExperimentError, OscillatorCurvesConfig, Outcome, Recorder, RunOptions, Table,
};

pub const CURVE_COLUMNS: [&str; 6] = [
    "eta",
    "lower",
    "upper",
    "rel_entropy",
    "d_entropy_d_eta",
    "derivative_infinite",
];

fn grid(cfg: &OscillatorCurvesConfig) -> Result<Vec<f64>, ExperimentError> {
    let etas = match &cfg.etas {
        Some(v) => v.clone(),
        None => {
            require(cfg.points >= 2, || {
                format!(
                    "oscillator-curves.points = {} must be at least 2",
                    cfg.points
                )
            })?;
            require(cfg.eta_min < cfg.eta_max, || {
                format!(
                    "oscillator-curves.eta_min = {} must be below eta_max = {}",
                    cfg.eta_min, cfg.eta_max
                )
            })?;
            let step = (cfg.eta_max - cfg.eta_min) / (cfg.points - 1) as f64;
            (0..cfg.points)
                .map(|k| {
                    if k + 1 == cfg.points {
                        cfg.eta_max
                    } else {
                        cfg.eta_min + k as f64 * step
                    }
                })
                .collect()
        }
    };
    require(!etas.is_empty(), || {
        "oscillator-curves.etas must not be empty".into()
    })?;
    for (i, &e) in etas.iter().enumerate() {
        require(e > 0.0 && e <= 1.0, || {
            format!("oscillator-curves grid entry {i} = {e} outside (0, 1]")
        })?;
        require(i == 0 || e > etas[i - 1], || {
            format!("oscillator-curves grid must be strictly increasing (entry {i} = {e})")
        })?;
    }
    require(cfg.derivative_tolerance > 0.0, || {
        "oscillator-curves.derivative_tolerance must be positive".into()
    })?;
    Ok(etas)
}

/// Second-order derivative on a possibly non-uniform grid at interior
/// point `k`.
fn three_point_derivative(x: &[f64], y: &[f64], k: usize) -> f64 {
    let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
    (-h1 / (h0 * (h0 + h1))) * y[k - 1]
        + ((h1 - h0) / (h0 * h1)) * y[k]
        + (h0 / (h1 * (h0 + h1))) * y[k + 1]
}

/// Writes `oscillator_curves.csv` and `oscillator_curves_summary.json`.
/// The derivative column is checked against finite differences of the
/// entropy column over the configured range.
pub fn cmd_oscillator_curves(
    cfg: &OscillatorCurvesConfig,
    opts: &RunOptions,
) -> Result<Outcome, ExperimentError> {
    opts.validate()?;
    let etas = grid(cfg)?;
    let rows = transition_curves(&etas).map_err(invalid("oscillator-curves"))?;
    let mut rec = Recorder::start(opts, "oscillator-curves")?;

    let mut table = Table::new(&CURVE_COLUMNS).allow_infinite("d_entropy_d_eta");
    let mut derivs = Vec::with_capacity(rows.len());
    for r in &rows {
        let d = if r.eta < 1.0 {
            entropy_eta_derivative(r.eta)?
        } else {
            f64::NEG_INFINITY
        };
        derivs.push(d);
        table.push(vec![
            r.eta,
            r.lower,
            r.upper,
            r.rel_entropy,
            d,
            f64::from(u8::from(d.is_infinite())),
        ])?;
    }

    let entropy: Vec<f64> = rows.iter().map(|r| r.rel_entropy).collect();
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for k in 1..etas.len().saturating_sub(1) {
        if etas[k] < cfg.check_min || etas[k] > cfg.check_max {
            continue;
        }
        let fd = three_point_derivative(&etas, &entropy, k);
        worst = worst.max((fd - derivs[k]).abs());
        compared += 1;
    }
    let mut checks = Vec::new();
    if compared > 0 {
        checks.push(Check::within(
            "derivative_vs_finite_difference",
            &format!(
                "{compared} grid points in [{}, {}]",
                cfg.check_min, cfg.check_max
            ),
            None,
            worst,
            None,
            Some(cfg.derivative_tolerance),
        ));
    }
    rec.table("oscillator_curves.csv", &table)?;
    rec.finish(cfg, None, None, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_is_exact_on_quadratics() {
        let x = [0.0, 0.1, 0.35];
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t * t - t + 3.0).collect();
        assert!((three_point_derivative(&x, &y, 1) - (4.0 * 0.1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let mut c = OscillatorCurvesConfig::default();
        let g = grid(&c).unwrap();
        assert_eq!((g.len(), g[0], *g.last().unwrap()), (10_000, 1e-4, 1.0));
        c.etas = Some(vec![0.0, 0.5]);
        assert!(grid(&c).unwrap_err().to_string().contains("outside (0, 1]"));
        c.etas = Some(vec![0.5, 0.25]);
        assert!(grid(&c).unwrap_err().to_string().contains("increasing"));
        c.etas = Some(vec![0.25, 1.0]);
        assert_eq!(grid(&c).unwrap(), vec![0.25, 1.0]);
    }
}
