//! Batch front-end for the `twinbeam` library: parameter sweeps of remote
//! state preparation and teleportation, plus Fock-basis oracle checks.
//! Results are emitted as CSV or JSON tables.

use rayon::prelude::*;
use thiserror::Error;
use twinbeam::fock::{compare_remote_prep, OracleConfig, MAX_DIMENSION};
use twinbeam::rng::derive_seed;
use twinbeam::{
    eta_threshold, fidelity_coherent, photon_number, photon_number_to_squeezing, remote_prep,
    teleport_monte_carlo, Complex64, EtaThreshold, TeleportConfig,
};

pub mod args;
pub mod spec;
pub mod table;

pub use spec::{Gain, Protocol, Range, SweepSpec};
pub use table::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl From<twinbeam::Error> for CliError {
    fn from(e: twinbeam::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// `(r, N)` pairs for the requested gain axis.
fn gain_pairs(gain: &Gain) -> Result<Vec<(f64, f64)>, CliError> {
    match gain {
        Gain::R(r) => r.values().into_iter().map(|r| Ok((r, photon_number(r)?))).collect(),
        Gain::N(n) => n
            .values()
            .into_iter()
            .map(|n| Ok((photon_number_to_squeezing(n)?, n)))
            .collect(),
    }
}

fn axis(range: &Option<Range>, default: f64) -> Vec<f64> {
    range.as_ref().map_or_else(|| vec![default], Range::values)
}

pub const REMOTE_PREP_COLUMNS: [&str; 11] = [
    "r", "N", "eta", "x", "a_x_eta", "sigma1_sq", "sigma2_sq", "n_th", "r_squeeze", "is_squeezed", "density",
];

/// One row per `(r, eta, x)`, in that nesting order.
pub fn run_remote_prep_sweep(spec: &SweepSpec) -> Result<Table, CliError> {
    spec.check_protocol(Protocol::RemotePrep)?;
    let gains = gain_pairs(&spec.gain()?)?;
    let etas = axis(&spec.eta, 1.0);
    let xs = axis(&spec.x, 0.0);
    let mut points = Vec::new();
    for &g in &gains {
        for &eta in &etas {
            for &x in &xs {
                points.push((g, eta, x));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&((r, n), eta, x)| {
            let p = remote_prep(r, eta, x)?;
            Ok(vec![
                r.into(),
                n.into(),
                eta.into(),
                x.into(),
                p.a_x_eta.into(),
                p.sigma1_sq.into(),
                p.sigma2_sq.into(),
                p.n_th.into(),
                p.r_squeeze.into(),
                p.is_squeezed.into(),
                p.outcome_density.into(),
            ])
        })
        .collect::<Result<Vec<_>, twinbeam::Error>>()?;
    Ok(Table {
        columns: REMOTE_PREP_COLUMNS.to_vec(),
        rows,
    })
}

pub const TELEPORT_COLUMNS: [&str; 8] =
    ["r", "gamma_t", "M", "eta", "kappa_sq", "fidelity", "eta_threshold", "beats_classical"];

/// One row per `(r, gamma_t, M, eta)`. With `mc_samples` set, each row also
/// carries a seeded Monte Carlo estimate of the fidelity for input `z`.
pub fn run_teleport_sweep(spec: &SweepSpec) -> Result<Table, CliError> {
    spec.check_protocol(Protocol::Teleport)?;
    let gains = gain_pairs(&spec.gain()?)?;
    let gts = axis(&spec.gamma_t, 0.0);
    let ms = axis(&spec.m, 0.0);
    let etas = axis(&spec.eta, 1.0);
    let mc = spec.mc_samples;
    if mc == Some(0) {
        return Err(CliError::Usage("mc-samples must be at least 1".into()));
    }
    let z = Complex64::new(spec.z_re.unwrap_or(0.0), spec.z_im.unwrap_or(0.0));
    let seed = spec.seed.unwrap_or(0);

    let mut points = Vec::new();
    for &(r, _) in &gains {
        for &gt in &gts {
            for &m in &ms {
                for &eta in &etas {
                    points.push((r, gt, m, eta));
                }
            }
        }
    }
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(r, gt, m, eta))| {
            let cfg = TeleportConfig::new(r, gt, m, eta)?;
            let fidelity = fidelity_coherent(&cfg);
            let threshold = match eta_threshold(r, gt, m)? {
                EtaThreshold::Bound(b) => Cell::Num(b),
                EtaThreshold::Impossible => Cell::from("impossible"),
            };
            let mut row = vec![
                r.into(),
                gt.into(),
                m.into(),
                eta.into(),
                cfg.kappa_sq().into(),
                fidelity.into(),
                threshold,
                (fidelity > 0.5).into(),
            ];
            if let Some(n) = mc {
                let est = teleport_monte_carlo(z, &cfg, n, derive_seed(seed, i as u64))?;
                row.push(est.mean.into());
                row.push(est.std_error.into());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, twinbeam::Error>>()?;
    let mut columns = TELEPORT_COLUMNS.to_vec();
    if mc.is_some() {
        columns.extend(["mc_fidelity", "mc_std_error"]);
    }
    Ok(Table { columns, rows })
}

pub const ORACLE_COLUMNS: [&str; 10] = [
    "lambda",
    "eta",
    "x",
    "cutoff",
    "leakage",
    "moment_discrepancy",
    "purity_discrepancy",
    "density_discrepancy",
    "passed",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub table: Table,
    pub all_passed: bool,
}

pub const DEFAULT_ORACLE_LAMBDAS: [f64; 3] = [0.3, 0.577_350_269_189_625_8, 0.8];
pub const DEFAULT_ORACLE_ETAS: [f64; 3] = [0.6, 0.8, 1.0];
pub const DEFAULT_ORACLE_XS: [f64; 3] = [-1.0, 0.0, 0.7];

/// Fock-basis cross-check of remote preparation over `(lambda, eta, x)`.
/// Truncation or numerical failures become failed rows rather than errors.
pub fn run_oracle_check(spec: &SweepSpec) -> Result<OracleReport, CliError> {
    spec.check_protocol(Protocol::OracleCheck)?;
    let lambdas = spec.lambda.as_ref().map_or(DEFAULT_ORACLE_LAMBDAS.to_vec(), Range::values);
    let etas = spec.eta.as_ref().map_or(DEFAULT_ORACLE_ETAS.to_vec(), Range::values);
    let xs = spec.x.as_ref().map_or(DEFAULT_ORACLE_XS.to_vec(), Range::values);
    let mut cfg = OracleConfig::default();
    if let Some(c) = spec.cutoff {
        cfg.cutoff = c;
    }
    if let Some(n) = spec.nodes {
        cfg.nodes = n;
    }
    if cfg.cutoff == 0 || cfg.cutoff + 1 > MAX_DIMENSION {
        return Err(CliError::Usage(format!("cutoff must lie in 1..={}", MAX_DIMENSION - 1)));
    }
    if cfg.nodes == 0 {
        return Err(CliError::Usage("nodes must be at least 1".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(CliError::Usage(format!("lambda must lie in [0, 1), got {l}")));
    }
    if let Some(e) = etas.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(CliError::Usage(format!("eta must lie in (0, 1], got {e}")));
    }

    let mut points = Vec::new();
    for &l in &lambdas {
        for &e in &etas {
            for &x in &xs {
                points.push((l, e, x));
            }
        }
    }
    let rows: Vec<(Vec<Cell>, bool)> = points
        .par_iter()
        .map(|&(l, e, x)| {
            let head: Vec<Cell> = vec![l.into(), e.into(), x.into(), cfg.cutoff.into()];
            match compare_remote_prep(l, e, x, &cfg) {
                Ok(c) => {
                    let mut row = head;
                    row.extend([
                        c.leakage.into(),
                        c.moment_discrepancy.into(),
                        c.purity_discrepancy.into(),
                        c.density_discrepancy.into(),
                        c.passed.into(),
                        Cell::Empty,
                    ]);
                    (row, c.passed)
                }
                Err(err) => {
                    let leakage = match err {
                        twinbeam::Error::Leakage { leakage, .. } => Cell::Num(leakage),
                        _ => Cell::Empty,
                    };
                    let mut row = head;
                    row.extend([
                        leakage,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        false.into(),
                        Cell::Text(err.to_string().replace(',', ";")),
                    ]);
                    (row, false)
                }
            }
        })
        .collect();
    let all_passed = rows.iter().all(|(_, ok)| *ok);
    Ok(OracleReport {
        table: Table {
            columns: ORACLE_COLUMNS.to_vec(),
            rows: rows.into_iter().map(|(r, _)| r).collect(),
        },
        all_passed,
    })
}
