//! Spin-1/2 systems: drift and control Hamiltonians and standard target gates.
//!
//! Spins are labelled `1..=m`; spin 1 is the most significant factor of the
//! Kronecker product. Shifts and couplings are stored in Hz and converted to
//! rad/s (×2π) when Hamiltonians are built.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{QocError, Result};
use crate::linalg::{c64, identity, kron, mul, CMat, HermitianOperator, TargetGate};

/// Default control amplitude bound: 2 MHz, in rad/s.
pub const DEFAULT_EPS: f64 = 2.0 * PI * 2.0e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn pauli(self) -> CMat {
        let z = c64::new(0.0, 0.0);
        let one = c64::new(1.0, 0.0);
        let i = c64::new(0.0, 1.0);
        match self {
            Axis::X => Mat::from_fn(2, 2, |r, c| if r != c { one } else { z }),
            Axis::Y => Mat::from_fn(2, 2, |r, c| match (r, c) {
                (0, 1) => -i,
                (1, 0) => i,
                _ => z,
            }),
            Axis::Z => Mat::from_fn(2, 2, |r, c| match (r, c) {
                (0, 0) => one,
                (1, 1) => -one,
                _ => z,
            }),
        }
    }
}

/// Chemical shifts and scalar couplings of `m` spin-1/2 nuclei.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    shifts: Vec<f64>,
    /// `couplings[k][j]` holds J between spins `j+1` and `k+1` for `j < k`.
    couplings: Vec<Vec<f64>>,
    eps: f64,
}

impl SpinSystem {
    /// `couplings[k]` must have exactly `k` entries (lower triangle, row-major).
    pub fn new(shifts: Vec<f64>, couplings: Vec<Vec<f64>>, eps: f64) -> Result<Self> {
        if shifts.is_empty() {
            return Err(QocError::Config("spin system needs at least one spin".into()));
        }
        if couplings.len() != shifts.len() {
            return Err(QocError::DimensionMismatch {
                expected: shifts.len(),
                found: couplings.len(),
            });
        }
        for (k, row) in couplings.iter().enumerate() {
            if row.len() != k {
                return Err(QocError::Parse {
                    row: k + 1,
                    column: row.len(),
                    message: format!("coupling row {} needs {} entries", k + 1, k),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(QocError::Config(format!("non-finite coupling in row {}", k + 1)));
            }
        }
        if shifts.iter().any(|s| !s.is_finite()) {
            return Err(QocError::Config("non-finite chemical shift".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(QocError::Config(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            shifts,
            couplings,
            eps,
        })
    }

    /// Uncoupled spins with the given shifts (Hz).
    pub fn uncoupled(shifts: Vec<f64>, eps: f64) -> Result<Self> {
        let couplings = (0..shifts.len()).map(|k| vec![0.0; k]).collect();
        Self::new(shifts, couplings, eps)
    }

    /// The six carbon spins of D-Norleucine (shifts and J in Hz).
    pub fn d_norleucine() -> Self {
        let shifts = vec![17662.0, 5382.4, 4006.7, 2435.8, 2216.6, 2105.8];
        let couplings = vec![
            vec![],
            vec![53.9],
            vec![0.8, 33.96],
            vec![2.47, 0.0, 33.96],
            vec![0.0, 3.03, 0.0, 34.73],
            vec![0.0, 2.42, 0.0, 34.93, 0.0],
        ];
        Self::new(shifts, couplings, DEFAULT_EPS).expect("bundled table is valid")
    }

    /// Look up a bundled dataset by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "d-norleucine" => Some(Self::d_norleucine()),
            _ => None,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.shifts.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.num_spins()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(QocError::Config(format!("eps must be positive, got {eps}")));
        }
        self.eps = eps;
        Ok(self)
    }

    /// Shift of spin `k` (1-based), Hz.
    pub fn shift(&self, k: usize) -> f64 {
        self.shifts[k - 1]
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// Coupling between spins `j` and `k` (1-based, either order), Hz.
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        let (lo, hi) = if j < k { (j, k) } else { (k, j) };
        if lo == hi {
            return 0.0;
        }
        self.couplings[hi - 1][lo - 1]
    }

    /// The first `m` spins, dropping couplings to the rest.
    pub fn subsystem(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.num_spins() {
            return Err(QocError::SpinIndex {
                index: m,
                count: self.num_spins(),
            });
        }
        Self::new(
            self.shifts[..m].to_vec(),
            self.couplings[..m].to_vec(),
            self.eps,
        )
    }

    /// Parse the lower-triangular CSV table (row `k` holds `k` numbers).
    pub fn from_table_str(text: &str, eps: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record?;
            let row = r + 1;
            if record.len() != row {
                return Err(QocError::Parse {
                    row,
                    column: record.len(),
                    message: format!("expected {row} entries, found {}", record.len()),
                });
            }
            let mut values = Vec::with_capacity(row);
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| QocError::Parse {
                    row,
                    column: c + 1,
                    message: format!("not a number: {cell:?}"),
                })?;
                values.push(v);
            }
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(QocError::Parse {
                row: 0,
                column: 0,
                message: "empty spin table".into(),
            });
        }
        let shifts = rows.iter().map(|r| *r.last().unwrap()).collect();
        let couplings = rows
            .into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect();
        Self::new(shifts, couplings, eps)
    }

    pub fn load_table(path: &Path, eps: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&text, eps)
    }

    /// Serialize as the lower-triangular CSV table. Shortest round-trip float formatting.
    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        for (k, row) in self.couplings.iter().enumerate() {
            let mut cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            cells.push(format!("{:?}", self.shifts[k]));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Resolve a spin-table source: a built-in dataset name or a CSV path.
pub fn load_spin_table(source: &str, eps: f64) -> Result<SpinSystem> {
    match SpinSystem::builtin(source) {
        Some(sys) => sys.with_eps(eps),
        None => SpinSystem::load_table(Path::new(source), eps),
    }
}

fn spin_matrix(k: usize, axis: Axis, m: usize) -> CMat {
    let mut out = identity(1);
    for site in 1..=m {
        let factor = if site == k {
            axis.pauli() * faer::Scale(c64::new(0.5, 0.0))
        } else {
            identity(2)
        };
        out = kron(out.as_ref(), factor.as_ref());
    }
    out
}

/// `S_axis^k = ½ I^{⊗(k−1)} ⊗ σ_axis ⊗ I^{⊗(m−k)}`, `k` is 1-based.
pub fn spin_operator(k: usize, axis: Axis, m: usize) -> Result<HermitianOperator> {
    if k == 0 || k > m {
        return Err(QocError::SpinIndex { index: k, count: m });
    }
    HermitianOperator::new(spin_matrix(k, axis, m))
}

/// Drift Hamiltonian: Zeeman shifts plus isotropic J couplings, rad/s.
pub fn build_drift(sys: &SpinSystem) -> HermitianOperator {
    let m = sys.num_spins();
    let dim = sys.dim();
    let mut h = Mat::<c64>::zeros(dim, dim);
    let ops: Vec<[CMat; 3]> = (1..=m)
        .map(|k| {
            [
                spin_matrix(k, Axis::X, m),
                spin_matrix(k, Axis::Y, m),
                spin_matrix(k, Axis::Z, m),
            ]
        })
        .collect();
    for k in 0..m {
        let w = c64::new(2.0 * PI * sys.shifts[k], 0.0);
        h += &ops[k][2] * faer::Scale(w);
    }
    for k in 0..m {
        for j in 0..k {
            let jc = sys.couplings[k][j];
            if jc == 0.0 {
                continue;
            }
            let w = c64::new(2.0 * PI * jc, 0.0);
            for a in 0..3 {
                h += mul(ops[j][a].as_ref(), ops[k][a].as_ref()) * faer::Scale(w);
            }
        }
    }
    HermitianOperator::new(h).expect("drift is Hermitian by construction")
}

/// Collective control `−Σ_k S_axis^k` with unit amplitude.
pub fn unit_control(m: usize, axis: Axis) -> HermitianOperator {
    let dim = 1usize << m;
    let mut h = Mat::<c64>::zeros(dim, dim);
    for k in 1..=m {
        h -= spin_matrix(k, axis, m);
    }
    HermitianOperator::new(h).expect("control is Hermitian by construction")
}

/// Full-amplitude control `−ε Σ_k S_axis^k` (the chemical-shift correction
/// factor `1 − δ_k` is taken as 1).
pub fn build_control(sys: &SpinSystem, axis: Axis) -> HermitianOperator {
    unit_control(sys.num_spins(), axis).scaled(sys.eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GateKind {
    /// `exp(−i θ/2 σ_axis)` on one spin.
    Rotation { axis: Axis, angle: f64, spin: usize },
    /// Controlled-NOT with the given control and target spins.
    Cnot { control: usize, target: usize },
}

pub fn make_target(kind: GateKind, m: usize) -> Result<TargetGate> {
    let check = |k: usize| {
        if k == 0 || k > m {
            Err(QocError::SpinIndex { index: k, count: m })
        } else {
            Ok(())
        }
    };
    let dim = 1usize << m;
    let matrix = match kind {
        GateKind::Rotation { axis, angle, spin } => {
            check(spin)?;
            let s = spin_matrix(spin, axis, m);
            let (c, sn) = ((angle / 2.0).cos(), (angle / 2.0).sin());
            // σ on the spin is 2S
            Mat::from_fn(dim, dim, |i, j| {
                let id = if i == j { c } else { 0.0 };
                c64::new(id, 0.0) + c64::new(0.0, -sn) * s[(i, j)] * 2.0
            })
        }
        GateKind::Cnot { control, target } => {
            check(control)?;
            check(target)?;
            if control == target {
                return Err(QocError::Config("CNOT control and target coincide".into()));
            }
            let sz = spin_matrix(control, Axis::Z, m);
            let sx = spin_matrix(target, Axis::X, m);
            let p0 = identity(dim) * faer::Scale(c64::new(0.5, 0.0)) + &sz;
            let p1 = identity(dim) * faer::Scale(c64::new(0.5, 0.0)) - &sz;
            let flip = mul(p1.as_ref(), sx.as_ref()) * faer::Scale(c64::new(2.0, 0.0));
            p0 + flip
        }
    };
    TargetGate::new(matrix)
}
