//! Projected gradient descent with Armijo backtracking on a box `[−b, b]ⁿ`.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QocError, Result};

use super::{Direction, OptimizerConfig, Status};

pub(crate) trait Objective {
    /// Whatever an evaluation can hand to the following gradient call.
    type Stage;

    fn bound(&self) -> f64;
    fn evaluate(&self, x: &[f64]) -> Result<(f64, Self::Stage)>;
    fn gradient(&self, x: &[f64], stage: Self::Stage) -> Result<Vec<f64>>;
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub status: Status,
    pub trace: Vec<f64>,
    pub wall_ms: Vec<f64>,
    pub perturbed: Vec<bool>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check(values: &[f64], iteration: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(QocError::NonFinite { iteration })
    }
}

pub(crate) fn minimize<O: Objective>(
    obj: &O,
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let bound = obj.bound();
    let mut x = x0;
    let (mut f, stage) = obj.evaluate(&x)?;
    check(&[f], 0)?;
    let mut g = obj.gradient(&x, stage)?;
    check(&g, 0)?;

    let mut trace = vec![f];
    let mut wall_ms = Vec::new();
    let mut perturbed = Vec::new();
    let mut last_alpha: Option<f64> = None;
    let mut last_perturb: Option<usize> = None;
    let mut force_perturb = false;
    let mut status = Status::IterationLimit;
    let mut candidate = vec![0.0; x.len()];
    let mut spare = vec![0.0; x.len()];
    // previous gradient and direction, for conjugate gradients
    let mut memory: Option<(Vec<f64>, Vec<f64>)> = None;

    for it in 1..=cfg.max_iterations {
        if f <= cfg.target_infidelity {
            status = Status::Converged;
            break;
        }
        let gnorm = norm(&g);
        if gnorm <= cfg.gradient_tolerance {
            status = Status::Stalled;
            break;
        }
        let start = Instant::now();

        let w = cfg.stall_window;
        let stalled = trace.len() > w && {
            let old = trace[trace.len() - 1 - w];
            old - f < cfg.stall_tolerance * old.abs()
        };
        let cooled = last_perturb.is_none_or(|p| it - p >= w);
        let perturb = force_perturb || (stalled && cooled);
        let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();
        if let (Direction::ConjugateGradient, Some((g_prev, d_prev)), false) =
            (cfg.direction, memory.as_ref(), perturb)
        {
            let den: f64 = g_prev.iter().map(|v| v * v).sum();
            let num: f64 = g.iter().zip(g_prev).map(|(a, b)| a * (a - b)).sum();
            let beta = (num / den).max(0.0);
            if beta.is_finite() && beta > 0.0 {
                let conj: Vec<f64> = dir.iter().zip(d_prev).map(|(d, p)| d + beta * p).collect();
                if conj.iter().zip(&g).map(|(d, gi)| d * gi).sum::<f64>() < 0.0 {
                    dir = conj;
                }
            }
        }
        if perturb {
            let s = cfg.perturbation_scale * gnorm * 3f64.sqrt() / (g.len() as f64).sqrt();
            for d in dir.iter_mut() {
                *d -= rng.random_range(-s..=s);
            }
            last_perturb = Some(it);
        }

        let dmax = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = match last_alpha {
            Some(a) => 2.0 * a,
            None => cfg.initial_step.unwrap_or(0.1 * bound / dmax),
        };
        let trial = |alpha: f64, c: &mut Vec<f64>| -> Result<(f64, O::Stage, bool)> {
            for ((ci, xi), di) in c.iter_mut().zip(&x).zip(&dir) {
                *ci = (xi + alpha * di).clamp(-bound, bound);
            }
            let (fc, stage) = obj.evaluate(c)?;
            check(&[fc], it)?;
            let slope: f64 = g.iter().zip(c.iter().zip(&x)).map(|(gi, (ci, xi))| gi * (ci - xi)).sum();
            Ok((fc, stage, fc <= f + cfg.armijo_slope * slope && fc < f))
        };
        let mut accepted = None;
        for b in 0..cfg.max_backtracks {
            let (fc, stage, ok) = trial(alpha, &mut candidate)?;
            if ok {
                accepted = Some((fc, stage));
                // the first trial was already acceptable: grow the step while
                // that keeps paying off
                if b == 0 {
                    for _ in 0..cfg.max_expansions {
                        let grown = alpha / cfg.armijo_shrink;
                        let (fe, se, ok) = trial(grown, &mut spare)?;
                        if !ok || fe >= accepted.as_ref().map_or(f, |a| a.0) {
                            break;
                        }
                        alpha = grown;
                        accepted = Some((fe, se));
                        std::mem::swap(&mut candidate, &mut spare);
                    }
                }
                break;
            }
            alpha *= cfg.armijo_shrink;
        }

        match accepted {
            Some((fc, stage)) => {
                std::mem::swap(&mut x, &mut candidate);
                f = fc;
                let g_new = obj.gradient(&x, stage)?;
                let g_old = std::mem::replace(&mut g, g_new);
                memory = (!perturb).then_some((g_old, dir));
                check(&g, it)?;
                last_alpha = Some(alpha);
                force_perturb = false;
            }
            None => {
                last_alpha = None;
                memory = None;
                if perturb {
                    trace.push(f);
                    wall_ms.push(start.elapsed().as_secs_f64() * 1e3);
                    perturbed.push(true);
                    status = Status::Stalled;
                    break;
                }
                force_perturb = true;
            }
        }
        trace.push(f);
        wall_ms.push(start.elapsed().as_secs_f64() * 1e3);
        perturbed.push(perturb);
        if cfg.verbose {
            eprintln!(
                "iter {it:4}  IF = {f:.6e}  |g| = {:.3e}  step = {:.3e}{}",
                norm(&g),
                last_alpha.unwrap_or(0.0),
                if perturb { "  (perturbed)" } else { "" }
            );
        }
    }
    if status == Status::IterationLimit && f <= cfg.target_infidelity {
        status = Status::Converged;
    }
    Ok(Outcome {
        x,
        status,
        trace,
        wall_ms,
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// `Σ (x_i − c_i)²` with the minimum inside the box.
    struct Quadratic(Vec<f64>);

    impl Objective for Quadratic {
        type Stage = ();
        fn bound(&self) -> f64 {
            1.0
        }
        fn evaluate(&self, x: &[f64]) -> Result<(f64, ())> {
            Ok((x.iter().zip(&self.0).map(|(a, b)| (a - b) * (a - b)).sum(), ()))
        }
        fn gradient(&self, x: &[f64], _: ()) -> Result<Vec<f64>> {
            Ok(x.iter().zip(&self.0).map(|(a, b)| 2.0 * (a - b)).collect())
        }
    }

    #[test]
    fn quadratic_converges_monotonically() {
        let obj = Quadratic(vec![0.3, -0.5, 0.9]);
        let cfg = OptimizerConfig {
            target_infidelity: 1e-12,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = minimize(&obj, vec![0.0; 3], &cfg, &mut rng).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn projection_keeps_iterates_in_box() {
        let obj = Quadratic(vec![3.0, -3.0]);
        let cfg = OptimizerConfig {
            max_iterations: 50,
            target_infidelity: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = minimize(&obj, vec![0.0; 2], &cfg, &mut rng).unwrap();
        assert!(out.x.iter().all(|v| v.abs() <= 1.0));
        assert!((out.x[0] - 1.0).abs() < 1e-12 && (out.x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_start_does_not_move() {
        let obj = Quadratic(vec![0.25, 0.25]);
        let cfg = OptimizerConfig {
            target_infidelity: -1.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = minimize(&obj, vec![0.25, 0.25], &cfg, &mut rng).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.x, vec![0.25, 0.25]);
    }
}
