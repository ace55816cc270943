//! Flat `key = value` experiment and suite configuration files.
//!
//! Format: `[section]` headers, one `key = value` per line, `#` comments,
//! no nesting and no includes. Every key must be recognized; parse and
//! validation errors name the failing `section.key` path.
//!
//! # Suite file
//!
//! ```text
//! [suite]
//! kind = quadratic            # quadratic | trig-quadratic
//! dim = 2
//! domain = ball               # ball | all
//! center = 0,0                # ball center (default zeros)
//! radius = 2.0                # required for domain = ball
//! constants_radius = 4.0      # required for domain = all when theory
//!                             # constants are needed
//! sigma_value = 0.1           # noise standard deviations (default 0)
//! sigma_grad = 0.1
//! sigma_hess = 0.0
//! amplitude = 0.3             # trig-quadratic only
//! frequency = 2.0
//!
//! [task.1]                    # explicit tasks, 1-based consecutive
//! matrix = 2,0;0,1            # rows separated by ';'
//! minimizer = 1,0
//! offset = 0.0
//!
//! [generator]                 # or a seeded generator instead
//! tasks = 4
//! seed = 42
//! eig_min = 0.5
//! eig_max = 2.0
//! minimizer_radius = 1.0
//! ```
//!
//! # Experiment file
//!
//! ```text
//! [experiment]
//! suite = suite.cfg           # path relative to this file
//! output = out                # output directory
//!
//! [run]
//! alpha = 0.1
//! iterations = 1000
//! task_batch = 1
//! data_batch = 1
//! regime = convex             # convex | nonconvex-unconstrained |
//!                             # nonconvex-constrained | manual
//! beta = 0.4                  # nonconvex regimes
//! eta_w = 0.05                # manual regime
//! eta_p = 0.05
//! termination = average       # average | sampled (defaults per regime)
//! seed = 7
//! seeds = 1,2,3               # optional; defaults to the single seed
//! w_init = center             # center | zero | explicit vector
//! trace_stride = 1
//! trace_gap = auto            # on | off | auto (convex suites)
//! epsilon = 0.1               # optional stationarity thresholds
//! delta = 0.1
//!
//! [comparison]                # optional
//! baseline = on
//! task_probs = 0.1,0.2,...    # ambient distribution, default uniform
//!
//! [sweep]                     # optional; required by rate-sweep
//! iterations = 100,1000,10000 # strictly increasing
//! seeds = 1,2,3               # distinct
//! metric = duality-gap        # duality-gap | grad-norm-sq |
//!                             # proj-grad-norm-sq
//! ```

use minimax_meta_core::geometry::{FeasibleSet, SimplexPoint};
use minimax_meta_core::linalg::SymMatrix;
use minimax_meta_core::solver::{InitPoint, StepSizeRegime, Termination};
use minimax_meta_core::task::{NoiseModel, QuadraticTask, TaskOracle, TaskSet, TrigQuadraticTask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {file}: {source}")]
    Io {
        file: PathBuf,
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One parsed `[section]` with unconsumed-key tracking.
struct Section {
    name: String,
    entries: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::at(format!("{}.{key}", self.name), "missing required key"))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                ConfigError::at(
                    format!("{}.{key}", self.name),
                    format!("cannot parse value {raw:?}"),
                )
            }),
        }
    }

    fn parse_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(key) = self.entries.into_keys().next() {
            return Err(ConfigError::at(
                format!("{}.{key}", self.name),
                "unknown key",
            ));
        }
        Ok(())
    }
}

fn parse_sections(text: &str, file: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::at(name, "duplicate section"));
            }
            sections.push(Section {
                name,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::at(
                format!("{file}:{}", lineno + 1),
                format!("expected 'key = value', got {line:?}"),
            ));
        };
        let section = sections.last_mut().ok_or_else(|| {
            ConfigError::at(
                format!("{file}:{}", lineno + 1),
                "key before any [section] header",
            )
        })?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(ConfigError::at(
                format!("{}.{key}", section.name),
                "duplicate key",
            ));
        }
        section.entries.insert(key, value.trim().to_string());
    }
    Ok(sections)
}

fn parse_vector(path: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError::at(path, format!("cannot parse number {:?}", s.trim())))
        })
        .collect()
}

fn parse_matrix(path: &str, raw: &str, dim: usize) -> Result<SymMatrix, ConfigError> {
    let mut data = Vec::with_capacity(dim * dim);
    let rows: Vec<&str> = raw.split(';').collect();
    if rows.len() != dim {
        return Err(ConfigError::at(
            path,
            format!("expected {dim} rows, got {}", rows.len()),
        ));
    }
    for row in rows {
        let entries = parse_vector(path, row)?;
        if entries.len() != dim {
            return Err(ConfigError::at(
                path,
                format!("expected {dim} entries per row, got {}", entries.len()),
            ));
        }
        data.extend(entries);
    }
    SymMatrix::new(dim, data).map_err(|e| ConfigError::at(path, e))
}

fn parse_seed_list(path: &str, raw: &str) -> Result<Vec<u64>, ConfigError> {
    let seeds: Result<Vec<u64>, _> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| ConfigError::at(path, format!("cannot parse seed {:?}", s.trim())))
        })
        .collect();
    let seeds = seeds?;
    for (i, a) in seeds.iter().enumerate() {
        if seeds[..i].contains(a) {
            return Err(ConfigError::at(path, format!("seeds must be distinct ({a})")));
        }
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Quadratic,
    TrigQuadratic,
}

/// A parsed task suite: the task set plus the ball over which the
/// assumption constants are scoped.
#[derive(Debug)]
pub struct Suite {
    pub tasks: TaskSet,
    pub kind: SuiteKind,
    /// Center and radius scoping the assumption constants: the domain
    /// ball itself, or the explicit `constants_radius` ball for
    /// unconstrained suites (absent when never declared).
    pub constants_ball: Option<(Vec<f64>, f64)>,
}

pub fn load_suite(path: &Path) -> Result<Suite, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        file: path.to_path_buf(),
        source,
    })?;
    parse_suite(&text, &path.display().to_string())
}

pub fn parse_suite(text: &str, file: &str) -> Result<Suite, ConfigError> {
    let sections = parse_sections(text, file)?;
    let mut suite_section = None;
    let mut generator = None;
    let mut task_sections = Vec::new();
    for section in sections {
        match section.name.as_str() {
            "suite" => suite_section = Some(section),
            "generator" => generator = Some(section),
            name if name.starts_with("task.") => task_sections.push(section),
            other => return Err(ConfigError::at(other, "unknown section in suite file")),
        }
    }
    let mut suite = suite_section.ok_or_else(|| ConfigError::at("suite", "missing section"))?;

    let kind = match suite.require("kind")?.as_str() {
        "quadratic" => SuiteKind::Quadratic,
        "trig-quadratic" => SuiteKind::TrigQuadratic,
        other => {
            return Err(ConfigError::at(
                "suite.kind",
                format!("expected quadratic | trig-quadratic, got {other:?}"),
            ))
        }
    };
    let dim: usize = suite
        .parse("dim")?
        .ok_or_else(|| ConfigError::at("suite.dim", "missing required key"))?;
    if dim == 0 {
        return Err(ConfigError::at("suite.dim", "dimension must be positive"));
    }
    let center = match suite.take("center") {
        Some(raw) => {
            let v = parse_vector("suite.center", &raw)?;
            if v.len() != dim {
                return Err(ConfigError::at(
                    "suite.center",
                    format!("expected {dim} entries, got {}", v.len()),
                ));
            }
            v
        }
        None => vec![0.0; dim],
    };
    let domain_kind = suite.require("domain")?;
    let radius: Option<f64> = suite.parse("radius")?;
    let constants_radius: Option<f64> = suite.parse("constants_radius")?;
    let (domain, constants_ball) = match domain_kind.as_str() {
        "ball" => {
            let r = radius
                .ok_or_else(|| ConfigError::at("suite.radius", "required for domain = ball"))?;
            let set = FeasibleSet::ball(center.clone(), r)
                .map_err(|e| ConfigError::at("suite.radius", e.to_string()))?;
            (set, Some((center.clone(), r)))
        }
        "all" => (
            FeasibleSet::all_space(dim),
            constants_radius.map(|r| (center.clone(), r)),
        ),
        other => {
            return Err(ConfigError::at(
                "suite.domain",
                format!("expected ball | all, got {other:?}"),
            ))
        }
    };
    let noise = NoiseModel::new(
        suite.parse_or("sigma_value", 0.0)?,
        suite.parse_or("sigma_grad", 0.0)?,
        suite.parse_or("sigma_hess", 0.0)?,
    )
    .map_err(|e| ConfigError::at("suite.sigma_value", e.to_string()))?;
    let amplitude: Option<f64> = suite.parse("amplitude")?;
    let frequency: Option<f64> = suite.parse("frequency")?;
    if kind == SuiteKind::Quadratic && (amplitude.is_some() || frequency.is_some()) {
        return Err(ConfigError::at(
            "suite.amplitude",
            "amplitude/frequency only apply to trig-quadratic suites",
        ));
    }
    suite.finish()?;

    let mut tasks: Vec<Box<dyn TaskOracle>> = Vec::new();
    match (task_sections.is_empty(), generator) {
        (false, Some(_)) => {
            return Err(ConfigError::at(
                "generator",
                "give either explicit [task.N] sections or a [generator], not both",
            ))
        }
        (true, None) => {
            return Err(ConfigError::at(
                "suite",
                "no tasks: add [task.N] sections or a [generator]",
            ))
        }
        (false, None) => {
            task_sections.sort_by_key(|s| s.name.clone());
            for (i, mut section) in task_sections.into_iter().enumerate() {
                let expected = format!("task.{}", i + 1);
                if section.name != expected {
                    return Err(ConfigError::at(
                        section.name.clone(),
                        format!("task sections must be consecutive; expected [{expected}]"),
                    ));
                }
                let path = section.name.clone();
                let matrix_raw = section.require("matrix")?;
                let matrix = parse_matrix(&format!("{path}.matrix"), &matrix_raw, dim)?;
                let minimizer_raw = section.require("minimizer")?;
                let minimizer = parse_vector(&format!("{path}.minimizer"), &minimizer_raw)?;
                if minimizer.len() != dim {
                    return Err(ConfigError::at(
                        format!("{path}.minimizer"),
                        format!("expected {dim} entries, got {}", minimizer.len()),
                    ));
                }
                let offset = section.parse_or("offset", 0.0)?;
                let task: Box<dyn TaskOracle> = match kind {
                    SuiteKind::Quadratic => Box::new(
                        QuadraticTask::new(matrix, minimizer, offset, noise)
                            .map_err(|e| ConfigError::at(&path, e.to_string()))?,
                    ),
                    SuiteKind::TrigQuadratic => {
                        let a = section
                            .parse("amplitude")?
                            .or(amplitude)
                            .ok_or_else(|| {
                                ConfigError::at(format!("{path}.amplitude"), "missing amplitude")
                            })?;
                        let f = section
                            .parse("frequency")?
                            .or(frequency)
                            .ok_or_else(|| {
                                ConfigError::at(format!("{path}.frequency"), "missing frequency")
                            })?;
                        Box::new(
                            TrigQuadraticTask::new(matrix, minimizer, offset, a, f, noise)
                                .map_err(|e| ConfigError::at(&path, e.to_string()))?,
                        )
                    }
                };
                section.finish()?;
                tasks.push(task);
            }
        }
        (true, Some(mut generator)) => {
            let count: usize = generator
                .parse("tasks")?
                .ok_or_else(|| ConfigError::at("generator.tasks", "missing required key"))?;
            if count == 0 {
                return Err(ConfigError::at("generator.tasks", "need at least one task"));
            }
            let seed: u64 = generator.parse_or("seed", 0)?;
            let eig_min: f64 = generator.parse_or("eig_min", 0.5)?;
            let eig_max: f64 = generator.parse_or("eig_max", 1.5)?;
            if !eig_min.is_finite() || eig_min <= 0.0 || !eig_max.is_finite() || eig_max < eig_min {
                return Err(ConfigError::at(
                    "generator.eig_min",
                    "need 0 < eig_min <= eig_max",
                ));
            }
            let minimizer_radius: f64 = generator.parse_or("minimizer_radius", 1.0)?;
            generator.finish()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let spectrum: Vec<f64> =
                    (0..dim).map(|_| rng.gen_range(eig_min..=eig_max)).collect();
                let matrix = SymMatrix::from_spectrum(&spectrum, &mut rng);
                let minimizer: Vec<f64> = (0..dim)
                    .map(|_| rng.gen_range(-minimizer_radius..=minimizer_radius))
                    .collect();
                let task: Box<dyn TaskOracle> = match kind {
                    SuiteKind::Quadratic => Box::new(
                        QuadraticTask::new(matrix, minimizer, 0.0, noise)
                            .map_err(|e| ConfigError::at("generator", e.to_string()))?,
                    ),
                    SuiteKind::TrigQuadratic => {
                        let a = amplitude.ok_or_else(|| {
                            ConfigError::at("suite.amplitude", "required for generated trig tasks")
                        })?;
                        let f = frequency.ok_or_else(|| {
                            ConfigError::at("suite.frequency", "required for generated trig tasks")
                        })?;
                        Box::new(
                            TrigQuadraticTask::new(matrix, minimizer, 0.0, a, f, noise)
                                .map_err(|e| ConfigError::at("generator", e.to_string()))?,
                        )
                    }
                };
                tasks.push(task);
            }
        }
    }

    let tasks = TaskSet::new(tasks, domain).map_err(|e| ConfigError::at("suite", e.to_string()))?;
    Ok(Suite {
        tasks,
        kind,
        constants_ball,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    DualityGap,
    GradNormSq,
    ProjGradNormSq,
}

impl SweepMetric {
    /// The rate exponent the theory predicts for this metric.
    pub fn theoretical_slope(&self, beta: f64) -> f64 {
        match self {
            SweepMetric::DualityGap => -0.5,
            SweepMetric::GradNormSq | SweepMetric::ProjGradNormSq => -beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepMetric::DualityGap => "duality-gap",
            SweepMetric::GradNormSq => "grad-norm-sq",
            SweepMetric::ProjGradNormSq => "proj-grad-norm-sq",
        }
    }
}

/// Base run parameters shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub alpha: f64,
    pub iterations: usize,
    pub task_batch: usize,
    pub data_batch: usize,
    pub beta: f64,
    pub regime: StepSizeRegime,
    pub termination: Termination,
    pub w_init: InitPoint,
    pub trace_stride: usize,
    pub trace_gap: Option<bool>,
    pub seeds: Vec<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub iterations: Vec<usize>,
    pub seeds: Vec<u64>,
    pub metric: SweepMetric,
}

/// A fully parsed experiment specification.
#[derive(Debug)]
pub struct ExperimentSpec {
    pub suite: Suite,
    pub output: PathBuf,
    pub run: RunSettings,
    pub baseline: bool,
    pub task_probs: SimplexPoint,
    pub sweep: Option<SweepSettings>,
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        file: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_experiment(&text, &path.display().to_string(), base)
}

pub fn parse_experiment(
    text: &str,
    file: &str,
    base_dir: &Path,
) -> Result<ExperimentSpec, ConfigError> {
    let sections = parse_sections(text, file)?;
    let (mut experiment, mut run, mut comparison, mut sweep) = (None, None, None, None);
    for section in sections {
        match section.name.as_str() {
            "experiment" => experiment = Some(section),
            "run" => run = Some(section),
            "comparison" => comparison = Some(section),
            "sweep" => sweep = Some(section),
            other => return Err(ConfigError::at(other, "unknown section in experiment file")),
        }
    }
    let mut experiment =
        experiment.ok_or_else(|| ConfigError::at("experiment", "missing section"))?;
    let mut run = run.ok_or_else(|| ConfigError::at("run", "missing section"))?;

    let suite_path = base_dir.join(experiment.require("suite")?);
    let suite = load_suite(&suite_path)?;
    let output = PathBuf::from(experiment.take("output").unwrap_or_else(|| "out".to_string()));
    experiment.finish()?;

    let alpha: f64 = run
        .parse("alpha")?
        .ok_or_else(|| ConfigError::at("run.alpha", "missing required key"))?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(ConfigError::at("run.alpha", "must be nonnegative"));
    }
    let iterations: usize = run
        .parse("iterations")?
        .ok_or_else(|| ConfigError::at("run.iterations", "missing required key"))?;
    let task_batch: usize = run.parse_or("task_batch", 1)?;
    let data_batch: usize = run.parse_or("data_batch", 1)?;
    let beta: f64 = run.parse_or("beta", 0.0)?;
    let regime_raw = run.require("regime")?;
    let regime = match regime_raw.as_str() {
        "convex" => StepSizeRegime::Convex,
        "nonconvex-unconstrained" => StepSizeRegime::NonconvexUnconstrained,
        "nonconvex-constrained" => StepSizeRegime::NonconvexConstrained,
        "manual" => {
            let eta_w: f64 = run
                .parse("eta_w")?
                .ok_or_else(|| ConfigError::at("run.eta_w", "required for manual regime"))?;
            let eta_p: f64 = run
                .parse("eta_p")?
                .ok_or_else(|| ConfigError::at("run.eta_p", "required for manual regime"))?;
            StepSizeRegime::Manual { eta_w, eta_p }
        }
        other => {
            return Err(ConfigError::at(
                "run.regime",
                format!(
                    "expected convex | nonconvex-unconstrained | nonconvex-constrained | manual, got {other:?}"
                ),
            ))
        }
    };
    let termination = match run.take("termination").as_deref() {
        None => match regime {
            StepSizeRegime::Convex | StepSizeRegime::Manual { .. } => Termination::AverageT1,
            _ => Termination::SampledT2,
        },
        Some("average") => Termination::AverageT1,
        Some("sampled") => Termination::SampledT2,
        Some(other) => {
            return Err(ConfigError::at(
                "run.termination",
                format!("expected average | sampled, got {other:?}"),
            ))
        }
    };
    let seed: u64 = run.parse_or("seed", 0)?;
    let seeds = match run.take("seeds") {
        Some(raw) => parse_seed_list("run.seeds", &raw)?,
        None => vec![seed],
    };
    let w_init = match run.take("w_init").as_deref() {
        None | Some("center") => InitPoint::Center,
        Some("zero") => InitPoint::Zero,
        Some(raw) => InitPoint::Explicit(parse_vector("run.w_init", raw)?),
    };
    let trace_stride: usize = run.parse_or("trace_stride", 1)?;
    if trace_stride == 0 {
        return Err(ConfigError::at("run.trace_stride", "must be >= 1"));
    }
    let trace_gap = match run.take("trace_gap").as_deref() {
        None | Some("auto") => None,
        Some("on") => Some(true),
        Some("off") => Some(false),
        Some(other) => {
            return Err(ConfigError::at(
                "run.trace_gap",
                format!("expected on | off | auto, got {other:?}"),
            ))
        }
    };
    let epsilon: Option<f64> = run.parse("epsilon")?;
    let delta: Option<f64> = run.parse("delta")?;
    run.finish()?;

    let m = suite.tasks.len();
    let (baseline, task_probs) = match comparison {
        None => (false, SimplexPoint::uniform(m).unwrap()),
        Some(mut section) => {
            let baseline = match section.take("baseline").as_deref() {
                None | Some("on") => true,
                Some("off") => false,
                Some(other) => {
                    return Err(ConfigError::at(
                        "comparison.baseline",
                        format!("expected on | off, got {other:?}"),
                    ))
                }
            };
            let probs = match section.take("task_probs") {
                None => SimplexPoint::uniform(m).unwrap(),
                Some(raw) => {
                    let v = parse_vector("comparison.task_probs", &raw)?;
                    if v.len() != m {
                        return Err(ConfigError::at(
                            "comparison.task_probs",
                            format!("expected {m} entries, got {}", v.len()),
                        ));
                    }
                    SimplexPoint::new(v)
                        .map_err(|e| ConfigError::at("comparison.task_probs", e.to_string()))?
                }
            };
            section.finish()?;
            (baseline, probs)
        }
    };

    let sweep = match sweep {
        None => None,
        Some(mut section) => {
            let raw = section.require("iterations")?;
            let iterations: Result<Vec<usize>, _> = raw
                .split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| {
                        ConfigError::at("sweep.iterations", format!("bad count {:?}", s.trim()))
                    })
                })
                .collect();
            let iterations = iterations?;
            if iterations.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ConfigError::at(
                    "sweep.iterations",
                    "iteration counts must be strictly increasing",
                ));
            }
            let seeds = match section.take("seeds") {
                Some(raw) => parse_seed_list("sweep.seeds", &raw)?,
                None => seeds.clone(),
            };
            let metric = match section.require("metric")?.as_str() {
                "duality-gap" => SweepMetric::DualityGap,
                "grad-norm-sq" => SweepMetric::GradNormSq,
                "proj-grad-norm-sq" => SweepMetric::ProjGradNormSq,
                other => {
                    return Err(ConfigError::at(
                        "sweep.metric",
                        format!(
                            "expected duality-gap | grad-norm-sq | proj-grad-norm-sq, got {other:?}"
                        ),
                    ))
                }
            };
            section.finish()?;
            Some(SweepSettings {
                iterations,
                seeds,
                metric,
            })
        }
    };

    Ok(ExperimentSpec {
        suite,
        output,
        run: RunSettings {
            alpha,
            iterations,
            task_batch,
            data_batch,
            beta,
            regime,
            termination,
            w_init,
            trace_stride,
            trace_gap,
            seeds,
            epsilon,
            delta,
        },
        baseline,
        task_probs,
        sweep,
    })
}
