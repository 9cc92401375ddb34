//! Batch experiments: region classification, long dissipative runs, momentum
//! sweeps, continuation of perturbed equilibria and the normal-form period
//! check. Every command returns plain data; [`csv`] renders it.

pub mod config;
pub mod csv;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{combined_field, combined_jacobian, integrate, IntegratorConfig, Splitting, TrajectoryRecord};
use crate::normal_form::{linear_period, measure_period, twist_determinants, NormalForm, TwistReport};
use crate::reduction::{consolidate_params, ConsolidatedParams, DerivedCoeffs, MomentumLevel, ReducedState};
use crate::stability::{classify, linear_spectrum, thresholds, StabilityClass};

pub use config::{ExperimentConfig, Preset, StepPolicy};

/// Steps per period used by sweeps when the config sets no step policy.
pub const SWEEP_STEPS_PER_PERIOD: f64 = 40.0;
/// Steps per period used by single runs when the config sets no step policy.
pub const SIMULATE_STEPS_PER_PERIOD: f64 = 80.0;
/// Upper bound on recorded samples per simulated trajectory.
pub const MAX_SAMPLES: usize = 5000;

/// Shortest period `2π/ω` of the linearisation at the vertical equilibrium.
pub fn mode_period(cfg: &ExperimentConfig, pe: f64) -> Result<f64> {
    let spec = linear_spectrum(&cfg.body, pe, cfg.se);
    let omega = spec.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if omega > 0.0 {
        Ok(std::f64::consts::TAU / omega)
    } else {
        Err(Error::ZeroFrequency)
    }
}

pub fn momentum_level(cfg: &ExperimentConfig, pe: f64, nua1: f64) -> MomentumLevel {
    MomentumLevel {
        nu_a: [nua1, 0.0, pe],
        nu_theta: cfg.se,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub pe: f64,
    pub se: f64,
    pub c1: f64,
    pub c2: f64,
    pub region: StabilityClass,
    pub eigenvalues: [Complex64; 4],
    pub max_real_part: f64,
    pub frequencies: Option<(f64, f64)>,
    /// Normal-form data, only in the gap.
    pub consolidated: Option<ConsolidatedParams>,
    pub twist: Option<TwistReport>,
    /// Whether a nonvanishing twist determinant gives KAM stability.
    pub kam_stable: Option<bool>,
}

pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<ClassifyReport> {
    cfg.body.validate()?;
    let (pe, se) = (cfg.pe, cfg.se);
    let (c1, c2) = thresholds(&cfg.body, se);
    let region = classify(&cfg.body, pe, se);
    let spec = linear_spectrum(&cfg.body, pe, se);
    let (mut consolidated, mut twist, mut kam_stable) = (None, None, None);
    if region == StabilityClass::Gap {
        let cp = consolidate_params(&DerivedCoeffs::new(&cfg.body, pe), cfg.body.mgl(), se)?;
        let t = twist_determinants(&cp)?;
        kam_stable = Some(t.first_nonzero.is_some());
        consolidated = Some(cp);
        twist = Some(t);
    }
    Ok(ClassifyReport {
        pe,
        se,
        c1,
        c2,
        region,
        eigenvalues: spec.eigenvalues,
        max_real_part: spec.max_real_part,
        frequencies: spec.frequencies,
        consolidated,
        twist,
        kam_stable,
    })
}

/// One trajectory of a simulation batch.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRun {
    pub eps: f64,
    pub divisor: f64,
    pub q1_0: f64,
    pub nua1_0: f64,
    pub dt: f64,
    pub record: TrajectoryRecord,
}

/// Number of steps covering `periods` periods at step `dt`.
fn step_count(periods: f64, period: f64, dt: f64) -> usize {
    (periods * period / dt).round().max(1.0) as usize
}

/// Runs one trajectory from the perturbed equilibrium
/// `q = (q1, 0)`, `p = 0`, `nu_a = (nua1, 0, Pe)`.
pub fn run_perturbed(
    cfg: &ExperimentConfig,
    pe: f64,
    eps: f64,
    q1: f64,
    nua1: f64,
    policy: StepPolicy,
    stride: Option<usize>,
) -> Result<(f64, TrajectoryRecord)> {
    let period = mode_period(cfg, pe)?;
    let dt = policy.dt(period);
    let n = step_count(cfg.periods, period, dt);
    let icfg = IntegratorConfig {
        sample_stride: stride.unwrap_or_else(|| n.div_ceil(MAX_SAMPLES).max(1)),
        ..IntegratorConfig::new(dt, eps)
    };
    let sp = Splitting::new(cfg.body, momentum_level(cfg, pe, nua1));
    let rec = integrate(&ReducedState::new(q1, 0.0, 0.0, 0.0), &icfg, &sp, n)?;
    Ok((dt, rec))
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<SimulationRun>> {
    let policy = cfg.step.unwrap_or(StepPolicy::PerPeriod(SIMULATE_STEPS_PER_PERIOD));
    let jobs: Vec<(f64, f64)> = cfg
        .eps
        .iter()
        .flat_map(|&e| cfg.series.iter().map(move |&k| (e, k)))
        .collect();
    jobs.par_iter()
        .map(|&(eps, k)| {
            let (q1, nua1) = (cfg.q1_0 / k, cfg.nua1_0 / k);
            let (dt, record) = run_perturbed(cfg, cfg.pe, eps, q1, nua1, policy, None)?;
            Ok(SimulationRun {
                eps,
                divisor: k,
                q1_0: q1,
                nua1_0: nua1,
                dt,
                record,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub pe: f64,
    pub eps: f64,
    pub max_r: f64,
    pub max_real_part: f64,
    /// `completed`, `escaped`, `chart_violation`, or an error message.
    pub termination: String,
    pub elapsed: f64,
}

pub fn cmd_sweep(cfg: &ExperimentConfig, eps: f64) -> Vec<SweepRow> {
    let policy = cfg.step.unwrap_or(StepPolicy::PerPeriod(SWEEP_STEPS_PER_PERIOD));
    cfg.pe_grid
        .par_iter()
        .map(|&pe| {
            let max_real_part = linear_spectrum(&cfg.body, pe, cfg.se).max_real_part;
            match run_perturbed(cfg, pe, eps, cfg.q1_0, cfg.nua1_0, policy, Some(usize::MAX)) {
                Ok((dt, rec)) => SweepRow {
                    pe,
                    eps,
                    max_r: rec.max_r,
                    max_real_part,
                    termination: rec.termination.to_string(),
                    elapsed: rec.steps as f64 * dt,
                },
                Err(e) => SweepRow {
                    pe,
                    eps,
                    max_r: f64::NAN,
                    max_real_part,
                    termination: format!("error: {e}"),
                    elapsed: 0.0,
                },
            }
        })
        .collect()
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// Newton iteration for a zero of the combined Hamiltonian and dissipative
/// field, started at the origin. Returns the state and the iteration count.
pub fn find_equilibrium(sp: &Splitting, eps: f64) -> Result<(ReducedState, usize)> {
    let mut s = ReducedState::ORIGIN;
    let mut residual = f64::INFINITY;
    for it in 1..=NEWTON_MAX_ITER {
        let f = combined_field(sp, eps, &s);
        let j = combined_jacobian(sp, eps, &s);
        let jm = Matrix4::from_fn(|r, c| j[r][c]);
        let rhs = nalgebra::Vector4::from(f);
        let dx = jm.lu().solve(&rhs).ok_or_else(|| Error::Precondition("singular Jacobian".into()))?;
        let x = s.to_array();
        s = ReducedState::from_array([x[0] - dx[0], x[1] - dx[1], x[2] - dx[2], x[3] - dx[3]]);
        residual = combined_field(sp, eps, &s).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if dx.amax() <= NEWTON_TOL && residual <= NEWTON_TOL {
            return Ok((s, it));
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::NewtonDivergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationRow {
    pub pe: f64,
    pub eps: f64,
    pub state: Option<ReducedState>,
    pub iterations: usize,
    pub eigenvalues: Option<[Complex64; 4]>,
    pub max_real_part: f64,
    pub error: Option<String>,
}

pub fn equilibrium_spectrum(sp: &Splitting, eps: f64, s: &ReducedState) -> [Complex64; 4] {
    let j = combined_jacobian(sp, eps, s);
    let ev = Matrix4::from_fn(|r, c| j[r][c]).complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| b.im.total_cmp(&a.im).then(b.re.total_cmp(&a.re)));
    out
}

pub fn cmd_continue(cfg: &ExperimentConfig, eps: f64) -> Vec<ContinuationRow> {
    cfg.pe_grid
        .par_iter()
        .map(|&pe| {
            let sp = Splitting::new(cfg.body, momentum_level(cfg, pe, cfg.nua1_0));
            match find_equilibrium(&sp, eps) {
                Ok((s, iterations)) => {
                    let ev = equilibrium_spectrum(&sp, eps, &s);
                    ContinuationRow {
                        pe,
                        eps,
                        state: Some(s),
                        iterations,
                        eigenvalues: Some(ev),
                        max_real_part: ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
                        error: None,
                    }
                }
                Err(e) => ContinuationRow {
                    pe,
                    eps,
                    state: None,
                    iterations: NEWTON_MAX_ITER,
                    eigenvalues: None,
                    max_real_part: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Amplitudes of the period check, and the direction of the initial point
/// in `(q1, q2, u1, u2)`.
pub const TABLE_ONE_EPS: [f64; 5] = [1e-4, 2e-4, 4e-4, 8e-4, 16e-4];
pub const TABLE_ONE_POINT: [f64; 4] = [0.5, 1.0, -0.75, 0.0];
pub const NF_ORDERS: [u32; 3] = [4, 6, 8];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NfRow {
    pub eps: f64,
    /// Measured period over the linear period.
    pub t_ratio: f64,
    /// Normal-form periods of order 4, 6 and 8 over the linear period.
    pub tnf_ratio: [f64; 3],
    /// Observed convergence orders from this amplitude to the doubled one.
    pub order: [Option<f64>; 3],
}

pub fn nf_check(cp: &ConsolidatedParams, amplitudes: &[f64], point: [f64; 4]) -> Result<Vec<NfRow>> {
    let nf = NormalForm::new(cp)?;
    let t0 = linear_period(cp);
    let mut rows = amplitudes
        .par_iter()
        .map(|&eps| {
            let x = point.map(|v| v * eps);
            let t = measure_period(cp, [point[0], point[1]], [point[2], point[3]], eps)?;
            let mut tnf = [0.0; 3];
            for (slot, order) in tnf.iter_mut().zip(NF_ORDERS) {
                *slot = nf.matched_period(x, order)? / t0;
            }
            Ok(NfRow {
                eps,
                t_ratio: t / t0,
                tnf_ratio: tnf,
                order: [None; 3],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 0..rows.len() {
        let Some(next) = rows.get(i + 1).cloned() else { break };
        if (next.eps - 2.0 * rows[i].eps).abs() > 1e-12 * next.eps {
            continue;
        }
        for k in 0..3 {
            let here = rows[i].tnf_ratio[k] - rows[i].t_ratio;
            let there = next.tnf_ratio[k] - next.t_ratio;
            rows[i].order[k] = Some((there / here).abs().log2());
        }
    }
    Ok(rows)
}

pub fn cmd_nfcheck(_cfg: &ExperimentConfig) -> Result<Vec<NfRow>> {
    nf_check(&ConsolidatedParams::table_one(), &TABLE_ONE_EPS, TABLE_ONE_POINT)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_with(pe: f64) -> ExperimentConfig {
        ExperimentConfig {
            pe,
            pe_grid: vec![pe],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn classify_regions() {
        let r = cmd_classify(&cfg_with(0.5)).unwrap();
        assert_eq!(r.region, StabilityClass::EMRegion);
        assert!((r.c1 - 1.0).abs() < 1e-12 && (r.c2 - 4.0).abs() < 1e-12);
        assert!(r.twist.is_none());
        let r = cmd_classify(&cfg_with(1.5)).unwrap();
        assert_eq!(r.region, StabilityClass::Gap);
        assert_eq!(r.kam_stable, Some(true));
        assert!(r.twist.unwrap().d4 != 0.0);
        let r = cmd_classify(&cfg_with(2.5)).unwrap();
        assert_eq!(r.region, StabilityClass::SpectrallyUnstable);
        assert!(r.max_real_part > 0.0);
    }

    #[test]
    fn mode_periods() {
        assert!((mode_period(&cfg_with(1.5), 1.5).unwrap() - 3.562).abs() < 1e-3);
        assert!((mode_period(&cfg_with(0.5), 0.5).unwrap() - 2.966).abs() < 1e-3);
    }

    #[test]
    fn vertical_equilibrium_is_found_at_once() {
        let cfg = ExperimentConfig::default();
        let sp = Splitting::new(cfg.body, momentum_level(&cfg, 1.5, 0.0));
        let (s, it) = find_equilibrium(&sp, 0.05).unwrap();
        assert_eq!(s, ReducedState::ORIGIN);
        assert_eq!(it, 1);
    }

    #[test]
    fn continuation_spectrum_tends_to_linear_spectrum() {
        let cfg = ExperimentConfig {
            nua1_0: 1e-9,
            pe_grid: vec![0.5, 1.5],
            ..ExperimentConfig::default()
        };
        for row in cmd_continue(&cfg, 0.0) {
            let lin = linear_spectrum(&cfg.body, row.pe, cfg.se);
            let ev = row.eigenvalues.unwrap();
            for z in lin.eigenvalues {
                let best = ev.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-6, "{z} not in {ev:?}");
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg = ExperimentConfig {
            pe_grid: vec![0.5, 1.2, 1.5],
            periods: 20.0,
            ..ExperimentConfig::default()
        };
        let a = cmd_sweep(&cfg, 0.05);
        let b = cmd_sweep(&cfg, 0.05);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].pe < w[1].pe));
        assert!(a.iter().all(|r| r.max_r < 0.1 && r.termination == "completed"));
    }

    #[test]
    fn conservative_run_keeps_energy() {
        let max_dev = |periods: f64| {
            let cfg = ExperimentConfig {
                periods,
                nua1_0: 0.0,
                ..ExperimentConfig::default()
            };
            let policy = StepPolicy::PerPeriod(160.0);
            let (_, rec) = run_perturbed(&cfg, 1.5, 0.0, 0.0125, 0.0, policy, None).unwrap();
            rec.energy.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let (short, long) = (max_dev(100.0), max_dev(1e4));
        assert!(long < 1e-8, "{long:e}");
        assert!(long < 1.01 * short, "energy error grows: {short:e} -> {long:e}");
    }

    #[test]
    fn table_one_periods() {
        let rows = cmd_nfcheck(&ExperimentConfig::default()).unwrap();
        assert!((rows[0].t_ratio - 0.9995410553688).abs() < 1e-9);
        assert!((rows[4].t_ratio - 0.9108473444693).abs() < 1e-8 * 0.91);
        assert!(rows[4].order.iter().all(Option::is_none));
        let r = rows[2].order.map(Option::unwrap);
        for (got, want) in r[1..].iter().zip([5.8, 7.8]) {
            assert!((got - want).abs() <= 0.3, "{got} vs {want}");
        }
        assert!((rows[0].order[2].unwrap() - 8.2).abs() <= 0.3);
    }
}
