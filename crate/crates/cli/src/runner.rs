//! Run orchestration: builds solver configurations from an experiment
//! spec, executes (method, seed, T) runs — concurrently up to a job
//! limit — and reduces outputs to trace, summary, and rate rows.

use crate::config::{ConfigError, ExperimentSpec, SweepMetric};
use minimax_meta_core::diagnostics::{
    duality_gap, projected_grad_exact, stationarity_certificate, weighted_meta_loss,
    ConstantsReport, DiagnosticsRecord, InnerMinMode,
};
use minimax_meta_core::estimators::{exact_grad_p, exact_grad_w};
use minimax_meta_core::geometry::SimplexPoint;
use minimax_meta_core::linalg;
use minimax_meta_core::solver::{
    run_da_maml, run_maml_baseline, RunConfig, RunOutput, SolverError, StepSizeRegime,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run {run_id}: {source}")]
    Solver {
        run_id: String,
        source: SolverError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    DaMaml,
    Baseline,
}

impl MethodKind {
    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::DaMaml => "da-maml",
            MethodKind::Baseline => "maml",
        }
    }
}

/// One planned run.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub run_id: String,
    pub method: MethodKind,
    pub seed: u64,
    pub iterations: usize,
}

/// One trace row joined with its run identity.
#[derive(Debug, Clone)]
pub struct TraceLine {
    pub run_id: String,
    pub method: &'static str,
    pub seed: u64,
    pub record: DiagnosticsRecord,
}

/// Output-point diagnostics of one finished run.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub run_id: String,
    pub method: &'static str,
    pub seed: u64,
    pub iterations: usize,
    pub tau: Option<usize>,
    pub worst_task_loss: f64,
    pub avg_loss: f64,
    pub duality_gap: Option<f64>,
    pub grad_norm: f64,
    pub proj_grad_norm: f64,
    pub p_gap: f64,
    pub stationary: Option<bool>,
}

/// One aggregated sweep point.
#[derive(Debug, Clone)]
pub struct RatePoint {
    pub iterations: usize,
    pub mean_metric: f64,
    pub fitted_slope: f64,
    pub theoretical_slope: f64,
}

pub struct FinishedRun {
    pub plan: RunPlan,
    pub output: RunOutput,
    pub summary: SummaryRow,
}

/// The experiment spec with its derived constants, ready to execute.
pub struct Prepared<'a> {
    pub spec: &'a ExperimentSpec,
    pub report: Option<ConstantsReport>,
    trace_gap: bool,
}

impl<'a> Prepared<'a> {
    pub fn new(spec: &'a ExperimentSpec) -> Result<Self, ConfigError> {
        let tasks = &spec.suite.tasks;
        let report = match &spec.suite.constants_ball {
            Some((center, radius)) => {
                let (_, report) = ConstantsReport::for_task_set(
                    tasks,
                    center,
                    *radius,
                    spec.run.alpha,
                    spec.run.task_batch,
                    spec.run.data_batch,
                )
                .map_err(|e| ConfigError::at("suite", e.to_string()))?;
                Some(report)
            }
            None => None,
        };
        if report.is_none() && !matches!(spec.run.regime, StepSizeRegime::Manual { .. }) {
            return Err(ConfigError::at(
                "suite.constants_radius",
                "theory step-size regimes need assumption constants; declare a ball domain or a constants_radius",
            ));
        }
        let trace_gap = spec
            .run
            .trace_gap
            .unwrap_or_else(|| tasks.meta_convex(spec.run.alpha));
        Ok(Self {
            spec,
            report,
            trace_gap,
        })
    }

    fn run_config(&self, plan: &RunPlan) -> RunConfig {
        let run = &self.spec.run;
        RunConfig {
            alpha: run.alpha,
            iterations: plan.iterations,
            task_batch: run.task_batch,
            data_batch: run.data_batch,
            beta: run.beta,
            regime: run.regime,
            termination: run.termination,
            set: self.spec.suite.tasks.domain().clone(),
            seed: plan.seed,
            w_init: run.w_init.clone(),
            trace_stride: run.trace_stride,
            trace_gap: self.trace_gap,
            keep_history: false,
            grad_w_bound: self.report.as_ref().map(|r| r.grad_w_sq_bound.sqrt()),
        }
    }

    pub fn execute(&self, plan: &RunPlan) -> Result<FinishedRun, RunnerError> {
        let config = self.run_config(plan);
        let tasks = &self.spec.suite.tasks;
        let result = match plan.method {
            MethodKind::DaMaml => run_da_maml(&config, tasks, self.report.as_ref()),
            MethodKind::Baseline => {
                run_maml_baseline(&config, tasks, self.report.as_ref(), &self.spec.task_probs)
            }
        };
        let output = result.map_err(|source| RunnerError::Solver {
            run_id: plan.run_id.clone(),
            source,
        })?;
        let summary = self
            .summarize(plan, &output)
            .map_err(|source| RunnerError::Solver {
                run_id: plan.run_id.clone(),
                source,
            })?;
        Ok(FinishedRun {
            plan: plan.clone(),
            output,
            summary,
        })
    }

    fn summarize(&self, plan: &RunPlan, output: &RunOutput) -> Result<SummaryRow, SolverError> {
        let run = &self.spec.run;
        let tasks = &self.spec.suite.tasks;
        let losses = exact_grad_p(&output.w_out, tasks, run.alpha)?;
        let worst = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg = losses.iter().sum::<f64>() / losses.len() as f64;
        let weighted = weighted_meta_loss(&output.w_out, &output.p_out, tasks, run.alpha)?;
        let grad = exact_grad_w(&output.w_out, &output.p_out, tasks, run.alpha)?;
        let grad_norm = linalg::norm(&grad);
        let eta = prox_eta(output);
        let proj_grad_norm =
            projected_grad_exact(&output.w_out, &output.p_out, tasks, run.alpha, eta)?.1;
        let gap = if self.trace_gap {
            Some(duality_gap(
                &output.w_out,
                &output.p_out,
                tasks,
                run.alpha,
                InnerMinMode::ClosedForm,
            )?)
        } else {
            None
        };
        let stationary = match (run.epsilon, run.delta) {
            (Some(eps), Some(delta)) => Some(
                stationarity_certificate(
                    &output.w_out,
                    &output.p_out,
                    tasks,
                    run.alpha,
                    eta,
                    eps,
                    delta,
                )?
                .holds,
            ),
            _ => None,
        };
        Ok(SummaryRow {
            run_id: plan.run_id.clone(),
            method: plan.method.name(),
            seed: plan.seed,
            iterations: plan.iterations,
            tau: output.tau,
            worst_task_loss: worst,
            avg_loss: avg,
            duality_gap: gap,
            grad_norm,
            proj_grad_norm,
            p_gap: worst - weighted,
            stationary,
        })
    }

    /// Evaluates one sweep metric at a run's output point.
    fn metric_at(&self, metric: SweepMetric, output: &RunOutput) -> Result<f64, SolverError> {
        let tasks = &self.spec.suite.tasks;
        let alpha = self.spec.run.alpha;
        Ok(match metric {
            SweepMetric::DualityGap => duality_gap(
                &output.w_out,
                &output.p_out,
                tasks,
                alpha,
                InnerMinMode::ClosedForm,
            )?,
            SweepMetric::GradNormSq => {
                let g = exact_grad_w(&output.w_out, &output.p_out, tasks, alpha)?;
                linalg::dot(&g, &g)
            }
            SweepMetric::ProjGradNormSq => {
                let (_, n) = projected_grad_exact(
                    &output.w_out,
                    &output.p_out,
                    tasks,
                    alpha,
                    prox_eta(output),
                )?;
                n * n
            }
        })
    }
}

/// Prox step size for output-point diagnostics; degenerate runs carry a
/// zero step, so fall back to a nominal one.
fn prox_eta(output: &RunOutput) -> f64 {
    if output.eta_w > 0.0 {
        output.eta_w
    } else {
        1.0
    }
}

/// The run list of `cmd run`: every configured method crossed with every
/// seed, in deterministic order.
pub fn comparison_plans(spec: &ExperimentSpec) -> Vec<RunPlan> {
    let mut methods = vec![MethodKind::DaMaml];
    if spec.baseline {
        methods.push(MethodKind::Baseline);
    }
    let mut plans = Vec::new();
    for method in methods {
        for &seed in &spec.run.seeds {
            plans.push(RunPlan {
                run_id: format!(
                    "{:03}-{}-T{}-seed{}",
                    plans.len(),
                    method.name(),
                    spec.run.iterations,
                    seed
                ),
                method,
                seed,
                iterations: spec.run.iterations,
            });
        }
    }
    plans
}

/// Executes plans concurrently (up to `jobs` workers); results come back
/// in plan order regardless of scheduling.
pub fn execute_all(
    prepared: &Prepared<'_>,
    plans: &[RunPlan],
    jobs: usize,
) -> Result<Vec<FinishedRun>, RunnerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        plans
            .par_iter()
            .map(|plan| prepared.execute(plan))
            .collect()
    })
}

pub fn trace_lines(runs: &[FinishedRun]) -> Vec<TraceLine> {
    let mut lines = Vec::new();
    for run in runs {
        for record in &run.output.trace {
            lines.push(TraceLine {
                run_id: run.plan.run_id.clone(),
                method: run.plan.method.name(),
                seed: run.plan.seed,
                record: record.clone(),
            });
        }
    }
    lines
}

/// Least-squares slope of `ln(metric)` against `ln(T)`.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Runs the sweep: every T crossed with every sweep seed, metric averaged
/// over seeds at each T, one fitted slope across the T grid.
pub fn run_rate_sweep(
    prepared: &Prepared<'_>,
    jobs: usize,
) -> Result<(Vec<RatePoint>, Vec<FinishedRun>), RunnerError> {
    let spec = prepared.spec;
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::at("sweep", "missing section (required by rate-sweep)"))?;
    if sweep.iterations.len() < 3 {
        return Err(
            ConfigError::at("sweep.iterations", "need at least 3 sweep points").into(),
        );
    }
    if sweep.metric == SweepMetric::DualityGap
        && !spec.suite.tasks.meta_convex(spec.run.alpha)
    {
        return Err(ConfigError::at(
            "sweep.metric",
            "duality-gap requires a convex suite",
        )
        .into());
    }
    let mut plans = Vec::new();
    for &t in &sweep.iterations {
        for &seed in &sweep.seeds {
            plans.push(RunPlan {
                run_id: format!("{:03}-da-maml-T{}-seed{}", plans.len(), t, seed),
                method: MethodKind::DaMaml,
                seed,
                iterations: t,
            });
        }
    }
    let runs = execute_all(prepared, &plans, jobs)?;

    let mut points = Vec::new();
    let per_t = sweep.seeds.len();
    for (i, &t) in sweep.iterations.iter().enumerate() {
        let chunk = &runs[i * per_t..(i + 1) * per_t];
        let mut mean = 0.0;
        for run in chunk {
            mean += prepared
                .metric_at(sweep.metric, &run.output)
                .map_err(|source| RunnerError::Solver {
                    run_id: run.plan.run_id.clone(),
                    source,
                })?;
        }
        mean /= per_t as f64;
        points.push((t as f64, mean));
    }
    let fitted = fit_log_log_slope(&points);
    let theoretical = sweep.metric.theoretical_slope(spec.run.beta);
    let rate_points = points
        .into_iter()
        .map(|(t, mean)| RatePoint {
            iterations: t as usize,
            mean_metric: mean,
            fitted_slope: fitted,
            theoretical_slope: theoretical,
        })
        .collect();
    Ok((rate_points, runs))
}

/// Ambient-distribution override check used by both commands.
pub fn validate_task_probs(spec: &ExperimentSpec) -> Result<&SimplexPoint, ConfigError> {
    if spec.task_probs.len() != spec.suite.tasks.len() {
        return Err(ConfigError::at(
            "comparison.task_probs",
            "length must match the number of tasks",
        ));
    }
    Ok(&spec.task_probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_power_law() {
        let points: Vec<(f64, f64)> = [100.0, 1000.0, 10000.0]
            .iter()
            .map(|&t: &f64| (t, 3.0 * t.powf(-0.5)))
            .collect();
        let slope = fit_log_log_slope(&points);
        assert!((slope + 0.5).abs() < 1e-12);
    }
}
