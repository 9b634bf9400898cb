//! Accuracy-matched timing of one propagation, PWM against PWC.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::fixtures::SineDrive;
use crate::error::{QocError, Result};
use crate::linalg::{distance, CMat};
use crate::propagate::{magnus4_propagate, pwc_propagate, pwm_propagate, Dynamics, SpectralCache};
use crate::pulse::{pwm_transform, ControlSignal, Layout, PwmConfig};
use crate::spin::DEFAULT_EPS;

/// First line of every bench CSV.
pub const ACCURACY_NOTE: &str = "# accuracy: a cell is met when ||U - U_ref||_F <= target_IF, \
U_ref from a fourth-order Magnus integrator refined until converged; \
cpu_median_s is the median wall time of one propagation at M_required";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pwm,
    Pwc,
}

impl Scheme {
    fn name(self) -> &'static str {
        match self {
            Scheme::Pwm => "pwm",
            Scheme::Pwc => "pwc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchGrid {
    /// Seconds.
    pub horizons: Vec<f64>,
    /// Targets are `10^-e` for each `e`.
    pub exponents: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub repetitions: usize,
    pub drive: SineDrive,
    /// Pulse amplitude of the PWM trains, rad/s.
    pub eps: f64,
    /// Largest M tried is `2^max_log2`.
    pub max_log2: u32,
    /// Stop a search early once the error has not improved for this many
    /// doublings; the remaining targets are unreachable.
    pub plateau: usize,
}

impl Default for BenchGrid {
    fn default() -> Self {
        Self {
            horizons: vec![20e-6, 100e-6, 200e-6],
            exponents: vec![1, 2, 3, 4],
            schemes: vec![Scheme::Pwm, Scheme::Pwc],
            repetitions: 3,
            drive: SineDrive::new(6),
            eps: DEFAULT_EPS,
            max_log2: 24,
            plateau: 4,
        }
    }
}

impl BenchGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QocError::Config(format!("bench grid: {m}")));
        if self.horizons.is_empty() || self.horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("horizons must be positive");
        }
        if self.exponents.is_empty() || self.exponents.iter().any(|e| !(1..=12).contains(e)) {
            return bad("exponents must lie in 1..=12");
        }
        if self.schemes.is_empty() {
            return bad("need at least one scheme");
        }
        if self.repetitions < 3 {
            return bad("need at least 3 repetitions");
        }
        if self.eps < self.drive.amplitude.abs() {
            return bad("eps must be at least the drive amplitude");
        }
        if self.max_log2 > 30 {
            return bad("max_log2 must be at most 30");
        }
        self.drive.system().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub target_if: f64,
    pub scheme: Scheme,
    /// `None`: unreachable.
    pub m_required: Option<usize>,
    pub cpu_median_s: Option<f64>,
}

struct Bench<'a> {
    grid: &'a BenchGrid,
    dynamics: Dynamics,
    signal: ControlSignal,
}

impl Bench<'_> {
    fn propagate(&self, scheme: Scheme, horizon: f64, m: usize) -> Result<CMat> {
        let pairs = [(&self.signal, &self.dynamics.controls()[0])];
        match scheme {
            Scheme::Pwc => Ok(pwc_propagate(self.dynamics.drift(), &pairs, horizon / m as f64, horizon)?.u),
            Scheme::Pwm => {
                let cfg = PwmConfig::from_horizon(horizon, m, Layout::Centered)?;
                let train = pwm_transform(&self.signal, &cfg, self.grid.eps)?;
                let cache = SpectralCache::for_train(&self.dynamics, &train)?;
                Ok(pwm_propagate(&cache, &train)?.u)
            }
        }
    }

    /// Refine until two successive results agree to `tol / 100`.
    fn reference(&self, horizon: f64, tol: f64) -> Result<CMat> {
        let pairs = [(&self.signal, &self.dynamics.controls()[0])];
        let mut steps = 16;
        let mut prev = magnus4_propagate(self.dynamics.drift(), &pairs, horizon, steps)?.u;
        loop {
            steps *= 2;
            let next = magnus4_propagate(self.dynamics.drift(), &pairs, horizon, steps)?.u;
            if distance(next.as_ref(), prev.as_ref()) <= 0.01 * tol {
                return Ok(next);
            }
            if steps >= 1 << 22 {
                return Err(QocError::Config(format!("reference for T = {horizon} did not converge")));
            }
            prev = next;
        }
    }

    /// Smallest `M = 2^j` meeting each target, by doubling.
    fn search(&self, scheme: Scheme, horizon: f64, reference: &CMat, targets: &[f64]) -> Result<Vec<Option<usize>>> {
        let mut found = vec![None; targets.len()];
        let mut best = f64::INFINITY;
        let mut since_best = 0;
        for j in 0..=self.grid.max_log2 {
            let m = 1usize << j;
            let err = distance(self.propagate(scheme, horizon, m)?.as_ref(), reference.as_ref());
            for (slot, &t) in found.iter_mut().zip(targets) {
                if slot.is_none() && err <= t {
                    *slot = Some(m);
                }
            }
            if found.iter().all(Option::is_some) {
                break;
            }
            if err < best {
                best = err;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= self.grid.plateau {
                    break;
                }
            }
        }
        Ok(found)
    }

    fn time(&self, scheme: Scheme, horizon: f64, m: usize) -> Result<f64> {
        let start = Instant::now();
        let u = self.propagate(scheme, horizon, m)?;
        let elapsed = start.elapsed().as_secs_f64();
        std::hint::black_box(u);
        Ok(elapsed)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the grid on the calling thread. Within a cell the order of the
/// schemes alternates between repetitions.
pub fn run_bench(grid: &BenchGrid) -> Result<Vec<BenchCell>> {
    grid.validate()?;
    let bench = Bench {
        grid,
        dynamics: grid.drive.dynamics()?,
        signal: grid.drive.signal(),
    };
    let targets: Vec<f64> = grid.exponents.iter().map(|&e| 10f64.powi(-(e as i32))).collect();
    let tightest = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let mut schemes = grid.schemes.clone();
    schemes.sort();
    schemes.dedup();

    let mut cells = Vec::new();
    for &horizon in &grid.horizons {
        let reference = bench.reference(horizon, tightest)?;
        let mut required: BTreeMap<Scheme, Vec<Option<usize>>> = BTreeMap::new();
        for &s in &schemes {
            required.insert(s, bench.search(s, horizon, &reference, &targets)?);
        }
        for (ti, &target) in targets.iter().enumerate() {
            let mut times: BTreeMap<Scheme, Vec<f64>> = BTreeMap::new();
            for rep in 0..grid.repetitions {
                let mut order = schemes.clone();
                if rep % 2 == 1 {
                    order.reverse();
                }
                for s in order {
                    if let Some(m) = required[&s][ti] {
                        times.entry(s).or_default().push(bench.time(s, horizon, m)?);
                    }
                }
            }
            for &s in &schemes {
                cells.push(BenchCell {
                    horizon,
                    target_if: target,
                    scheme: s,
                    m_required: required[&s][ti],
                    cpu_median_s: times.remove(&s).map(median),
                });
            }
        }
    }
    cells.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.horizon.total_cmp(&b.horizon))
            .then(b.target_if.total_cmp(&a.target_if))
    });
    Ok(cells)
}

/// [`ACCURACY_NOTE`], then `T,target_IF,scheme,M_required,cpu_median_s`.
pub fn write_bench_csv<W: Write>(cells: &[BenchCell], mut out: W) -> Result<()> {
    writeln!(out, "{ACCURACY_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["T", "target_IF", "scheme", "M_required", "cpu_median_s"])?;
    for c in cells {
        w.write_record([
            format!("{:?}", c.horizon),
            format!("{:?}", c.target_if),
            c.scheme.name().to_string(),
            c.m_required.map_or("unreachable".to_string(), |m| m.to_string()),
            c.cpu_median_s.map_or(String::new(), |t| format!("{t:?}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: Read>(input: R) -> Result<Vec<BenchCell>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut cells = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse_err = |column: usize, message: String| QocError::Parse {
            row: row + 1,
            column: column + 1,
            message,
        };
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse()
                .map_err(|e| parse_err(c, format!("{e}")))
        };
        let scheme = match rec.get(2) {
            Some("pwm") => Scheme::Pwm,
            Some("pwc") => Scheme::Pwc,
            other => return Err(parse_err(2, format!("unknown scheme {other:?}"))),
        };
        let m_required = match rec.get(3) {
            Some("unreachable") => None,
            Some(s) => Some(s.parse().map_err(|e| parse_err(3, format!("{e}")))?),
            None => return Err(parse_err(3, "missing M_required".into())),
        };
        let cpu_median_s = match rec.get(4) {
            Some("") | None => None,
            Some(_) => Some(num(4)?),
        };
        cells.push(BenchCell {
            horizon: num(0)?,
            target_if: num(1)?,
            scheme,
            m_required,
            cpu_median_s,
        });
    }
    Ok(cells)
}
