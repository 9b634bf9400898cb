use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QocError, Result};
use faer::Mat;

use crate::linalg::{c64, mul, trace, CMat, TargetGate};
use crate::propagate::{
    grape_gradient, pwc_propagate_amplitudes, pwm_gradient_staged, pwm_propagate_staged, Dynamics,
    GradientMemory, PropagationResult, SpectralCache,
};
use crate::pulse::PwmTrain;

use super::descent::{minimize, Objective};
use super::{infidelity, infidelity_abs, ControlProblem, OptimizationReport, OptimizerConfig, PwcField};

fn objective_value(target: &TargetGate, u: &CMat, phase_insensitive: bool) -> Result<f64> {
    if phase_insensitive {
        infidelity_abs(target, u.as_ref())
    } else {
        infidelity(target, u.as_ref())
    }
}

/// `W·e^{i arg tr(W†U)}`: at `U`, `Re tr` against it equals `|tr(W†U)|`
/// and has the same gradient.
fn aligned_target(target: &TargetGate, u: &CMat) -> Result<TargetGate> {
    let w = target.matrix();
    let z = trace(mul(w.adjoint(), u.as_ref()).as_ref());
    let phase = if z.norm() > 0.0 { z / z.norm() } else { c64::new(1.0, 0.0) };
    TargetGate::new(Mat::from_fn(w.nrows(), w.ncols(), |i, j| w[(i, j)] * phase))
}

struct PwmObjective<'a> {
    cache: SpectralCache,
    template: PwmTrain,
    target: &'a TargetGate,
    memory: GradientMemory,
    bound: f64,
    phase_insensitive: bool,
}

impl PwmObjective<'_> {
    fn train(&self, x: &[f64]) -> PwmTrain {
        let mut t = self.template.clone();
        t.set_flat_widths(x);
        t
    }
}

impl Objective for PwmObjective<'_> {
    type Stage = PropagationResult;

    fn bound(&self) -> f64 {
        self.bound
    }

    fn evaluate(&self, x: &[f64]) -> Result<(f64, PropagationResult)> {
        let staged = pwm_propagate_staged(&self.cache, &self.train(x), self.memory)?;
        Ok((objective_value(self.target, &staged.u, self.phase_insensitive)?, staged))
    }

    fn gradient(&self, x: &[f64], stage: PropagationResult) -> Result<Vec<f64>> {
        if self.phase_insensitive {
            let target = aligned_target(self.target, &stage.u)?;
            return Ok(pwm_gradient_staged(&self.cache, &self.train(x), &target, stage)?.flat());
        }
        Ok(pwm_gradient_staged(&self.cache, &self.train(x), self.target, stage)?.flat())
    }
}

struct GrapeObjective<'a> {
    dynamics: Dynamics,
    tau: f64,
    controls: usize,
    target: &'a TargetGate,
    memory: GradientMemory,
    bound: f64,
    phase_insensitive: bool,
}

impl GrapeObjective<'_> {
    fn field(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.chunks(x.len() / self.controls).map(|c| c.to_vec()).collect()
    }
}

impl Objective for GrapeObjective<'_> {
    type Stage = CMat;

    fn bound(&self) -> f64 {
        self.bound
    }

    fn evaluate(&self, x: &[f64]) -> Result<(f64, CMat)> {
        let r = pwc_propagate_amplitudes(&self.dynamics, &self.field(x), self.tau)?;
        Ok((objective_value(self.target, &r.u, self.phase_insensitive)?, r.u))
    }

    fn gradient(&self, x: &[f64], u: CMat) -> Result<Vec<f64>> {
        let aligned;
        let target = if self.phase_insensitive {
            aligned = aligned_target(self.target, &u)?;
            &aligned
        } else {
            self.target
        };
        let g = grape_gradient(&self.dynamics, &self.field(x), self.tau, target, self.memory)?;
        Ok(g.gradient.into_iter().flatten().collect())
    }
}

/// Starting point of a PWM run.
#[derive(Clone, Debug)]
pub enum PwmInit {
    Train(PwmTrain),
    /// Widths drawn from the run's seeded generator.
    Random,
}

/// Starting point of a GRAPE run: `amplitudes[i][k]` or random.
#[derive(Clone, Debug)]
pub enum GrapeInit {
    Field(Vec<Vec<f64>>),
    Random,
}

pub fn optimize_pwm(
    problem: &ControlProblem,
    config: &OptimizerConfig,
    initial: PwmInit,
) -> Result<OptimizationReport> {
    problem.validate()?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = match initial {
        PwmInit::Train(t) => t,
        PwmInit::Random => problem.random_train(&mut rng)?,
    };
    let template = problem.zero_train()?;
    if start.config != template.config
        || start.controls.iter().zip(&template.controls).any(|(a, b)| a.eps != b.eps || a.shift != b.shift)
        || start.num_controls() != template.num_controls()
    {
        return Err(QocError::Config("initial train does not match the problem grid".into()));
    }
    start.validate()?;
    let cache = SpectralCache::for_train(&problem.dynamics(), &template)?;
    let obj = PwmObjective {
        cache,
        bound: template.width_bound(),
        template,
        target: &problem.target,
        memory: config.memory(),
        phase_insensitive: config.phase_insensitive,
    };
    let out = minimize(&obj, start.flat_widths(), config, &mut rng)?;
    Ok(OptimizationReport {
        status: out.status,
        seed: config.seed,
        iterations: out.trace.len() - 1,
        final_train: Some(obj.train(&out.x)),
        final_field: None,
        trace: out.trace,
        wall_ms: out.wall_ms,
        perturbed: out.perturbed,
        error: None,
    })
}

pub fn optimize_grape(
    problem: &ControlProblem,
    config: &OptimizerConfig,
    initial: GrapeInit,
) -> Result<OptimizationReport> {
    problem.validate()?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = problem.axes.len();
    let field = match initial {
        GrapeInit::Field(f) => f,
        GrapeInit::Random => problem.random_field(&mut rng),
    };
    if field.len() != m || field.iter().any(|r| r.len() != problem.intervals) {
        return Err(QocError::Config("initial field does not match the problem grid".into()));
    }
    if field.iter().flatten().any(|a| a.abs() > problem.eps) {
        return Err(QocError::Config("initial field exceeds the amplitude bound".into()));
    }
    let obj = GrapeObjective {
        dynamics: problem.dynamics(),
        tau: problem.tau(),
        controls: m,
        target: &problem.target,
        memory: config.memory(),
        bound: problem.eps,
        phase_insensitive: config.phase_insensitive,
    };
    let x0: Vec<f64> = field.into_iter().flatten().collect();
    let out = minimize(&obj, x0, config, &mut rng)?;
    Ok(OptimizationReport {
        status: out.status,
        seed: config.seed,
        iterations: out.trace.len() - 1,
        final_train: None,
        final_field: Some(PwcField {
            tau: problem.tau(),
            bound: problem.eps,
            amplitudes: obj.field(&out.x),
        }),
        trace: out.trace,
        wall_ms: out.wall_ms,
        perturbed: out.perturbed,
        error: None,
    })
}

/// `n_starts` random PWM runs with seeds `config.seed + i`, sorted by final
/// infidelity. A failing run is reported with status `failed`.
pub fn multi_start(
    problem: &ControlProblem,
    config: &OptimizerConfig,
    n_starts: usize,
    parallelism: usize,
) -> Result<Vec<OptimizationReport>> {
    if n_starts == 0 {
        return Err(QocError::Config("need at least one start".into()));
    }
    problem.validate()?;
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| QocError::Config(format!("thread pool: {e}")))?;
    let mut reports: Vec<OptimizationReport> = pool.install(|| {
        (0..n_starts)
            .into_par_iter()
            .map(|i| {
                let seed = config.seed.wrapping_add(i as u64);
                let cfg = OptimizerConfig {
                    seed,
                    ..config.clone()
                };
                optimize_pwm(problem, &cfg, PwmInit::Random)
                    .unwrap_or_else(|e| OptimizationReport::failed(seed, &e))
            })
            .collect()
    });
    reports.sort_by(|a, b| {
        a.final_infidelity()
            .total_cmp(&b.final_infidelity())
            .then(a.seed.cmp(&b.seed))
    });
    Ok(reports)
}
