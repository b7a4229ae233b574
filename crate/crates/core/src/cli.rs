//! Command-line front end: argument parsing, dispatch and artifact writing.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::beta::{
    count_admissible_with, count_full_with, digits_with, enumerate_cylinders, transform, BetaParam, CylinderFilter,
    Interval,
};
use crate::config::{load_config, CylindersConfig, DigitsConfig, RunConfig};
use crate::content::{brute_force_content_2d, content_sandwich, SortedRectangle};
use crate::dimension::s_star;
use crate::error::{Error, Result};
use crate::geometry::{bounding_hyperrectangle, pivoted_orthogonalize, volume};
use crate::lab::{cover_exponent_scan, default_epsilon, verify_measure_bound, MuMeasure};
use crate::polygon::ConvexPolygon;

#[derive(Debug, Parser)]
#[command(name = "beta-targets", version, about = "Dimension of shrinking parallelepiped targets under beta-transformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for artifacts; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Digits of a β-expansion.
    Expand {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Cylinders of one level as CSV.
    Cylinders {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Only full cylinders.
        #[arg(long)]
        full: bool,
        /// Only cylinders inside [LO, HI).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        interval: Option<Vec<f64>>,
    },
    /// Number of admissible (or full) words.
    Count {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        full: bool,
    },
    /// Pivoted Gram–Schmidt of the configured parallelepiped, as JSON.
    Ortho,
    /// Content bracket of the configured planar shape.
    Content,
    /// s_n per level and the windowed estimate of its limsup.
    Dimension {
        #[arg(long)]
        nmin: Option<u32>,
        #[arg(long)]
        nmax: Option<u32>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Grid cover counts of E_n against the closed-form count.
    VerifyCover,
    /// Sampled ball masses of µ_n.
    VerifyMeasure,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Expand { .. } => "expand",
            Command::Cylinders { .. } => "cylinders",
            Command::Count { .. } => "count",
            Command::Ortho => "ortho",
            Command::Content => "content",
            Command::Dimension { .. } => "dimension",
            Command::VerifyCover => "verify-cover",
            Command::VerifyMeasure => "verify-measure",
        }
    }

    fn beta_override(&self) -> Option<f64> {
        match self {
            Command::Expand { beta, .. } | Command::Cylinders { beta, .. } | Command::Count { beta, .. } => *beta,
            _ => None,
        }
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub body: String,
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, cli.command.beta_override()) {
        (Some(path), _) => load_config(path)?,
        (None, Some(b)) => RunConfig::with_betas(vec![b]),
        (None, None) => return Err(Error::Config("--config is required for this subcommand".into())),
    };
    if let Some(b) = cli.command.beta_override() {
        cfg.betas = vec![b];
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(k) = cli.threads {
        cfg.threads = Some(k);
    }
    match &cli.command {
        Command::Expand { x, n, .. } => {
            if x.is_some() || n.is_some() {
                let base = cfg.digits.clone();
                cfg.digits = Some(DigitsConfig {
                    x: x.or(base.as_ref().map(|d| d.x)).ok_or_else(|| Error::Config("missing --x".into()))?,
                    n: n.or(base.as_ref().map(|d| d.n)).ok_or_else(|| Error::Config("missing --n".into()))?,
                });
            }
        }
        Command::Cylinders { n, full, interval, .. } => apply_level(&mut cfg, *n, *full, interval.as_deref())?,
        Command::Count { n, full, .. } => apply_level(&mut cfg, *n, *full, None)?,
        Command::Dimension { nmin, nmax, window } => {
            if let Some(v) = nmin {
                cfg.n_min = *v;
            }
            if let Some(v) = nmax {
                cfg.n_max = *v;
            }
            if let Some(v) = window {
                cfg.window = *v;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_level(cfg: &mut RunConfig, n: Option<usize>, full: bool, interval: Option<&[f64]>) -> Result<()> {
    if n.is_none() && !full && interval.is_none() {
        return Ok(());
    }
    let base = cfg.cylinders.clone();
    cfg.cylinders = Some(CylindersConfig {
        n: n.or(base.as_ref().map(|c| c.n)).ok_or_else(|| Error::Config("missing --n".into()))?,
        full_only: full || base.as_ref().is_some_and(|c| c.full_only),
        interval: interval.map(|v| [v[0], v[1]]).or(base.and_then(|c| c.interval)),
    });
    Ok(())
}

fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_artifact(
    name: &str,
    hash: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
    trailer: &[String],
) -> Result<Artifact> {
    let mut buf = format!("# config-sha256: {hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    for line in trailer {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    Ok(Artifact {
        file_name: format!("{name}.csv"),
        body: String::from_utf8(buf).expect("utf-8 csv"),
    })
}

fn json_artifact(name: &str, value: &impl Serialize) -> Result<Artifact> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    Ok(Artifact {
        file_name: format!("{name}.json"),
        body,
    })
}

fn single_beta(cfg: &RunConfig) -> Result<BetaParam> {
    match cfg.betas.as_slice() {
        [b] => BetaParam::new(*b),
        _ => Err(Error::Config(format!(
            "this subcommand takes one beta, config has {}; use --beta",
            cfg.betas.len()
        ))),
    }
}

#[derive(Serialize)]
struct OrthoReport {
    /// 1-based pivot order.
    permutation: Vec<usize>,
    gamma_norms: Vec<f64>,
    gammas: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    checks: OrthoChecks,
}

#[derive(Serialize)]
struct OrthoChecks {
    orthogonality_defect: f64,
    max_abs_u: f64,
    reconstruction_error: f64,
    volume: f64,
    box_half_extents: Vec<f64>,
    vertices_in_box: bool,
}

/// Runs one subcommand and returns its artifacts.
pub fn run(cli: &Cli) -> Result<Vec<Artifact>> {
    let cfg = effective_config(cli)?;
    let hash = config_hash(&cfg);
    let name = cli.command.name();
    let artifact = match &cli.command {
        Command::Expand { .. } => {
            let dc = cfg
                .digits
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `digits` (or --x and --n)".into()))?;
            let mut rows = Vec::new();
            for &b in &cfg.betas {
                let beta = BetaParam::new(b)?;
                let word = digits_with(beta, dc.x, dc.n, cfg.precision)?;
                let partial: f64 = word.digits().iter().enumerate().map(|(k, &e)| e as f64 * b.powi(-(k as i32 + 1))).sum();
                rows.push(vec![
                    b.to_string(),
                    dc.x.to_string(),
                    dc.n.to_string(),
                    word.to_string(),
                    transform(beta, dc.x)?.to_string(),
                    partial.to_string(),
                ]);
            }
            csv_artifact(name, &hash, &["beta", "x", "n", "digits", "t_beta_x", "partial_sum"], rows, &[])?
        }
        Command::Cylinders { .. } => {
            let beta = single_beta(&cfg)?;
            let cc = cfg
                .cylinders
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `cylinders` (or --n)".into()))?;
            let filter = CylinderFilter {
                full_only: cc.full_only,
                within: cc.interval.map(|[lo, hi]| Interval::new(lo, hi)).transpose()?,
            };
            let mut rows = Vec::new();
            for node in enumerate_cylinders(beta, cc.n, filter, cfg.enum_options())? {
                let node = node?;
                rows.push(vec![
                    node.word.to_string(),
                    node.level.to_string(),
                    node.left.to_string(),
                    node.length.to_string(),
                    u8::from(node.is_full()).to_string(),
                ]);
            }
            csv_artifact(name, &hash, &["word", "level", "left", "length", "full"], rows, &[])?
        }
        Command::Count { .. } => {
            let cc = cfg
                .cylinders
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `cylinders` (or --n)".into()))?;
            let mut rows = Vec::new();
            for &b in &cfg.betas {
                let beta = BetaParam::new(b)?;
                let (kind, count) = if cc.full_only {
                    ("full", count_full_with(beta, cc.n, cfg.enum_options())?)
                } else {
                    ("admissible", count_admissible_with(beta, cc.n, cfg.enum_options())?)
                };
                rows.push(vec![b.to_string(), cc.n.to_string(), kind.to_string(), count.to_string()]);
            }
            csv_artifact(name, &hash, &["beta", "n", "kind", "count"], rows, &[])?
        }
        Command::Ortho => {
            let p = cfg
                .parallelepiped
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `parallelepiped`".into()))?;
            let frame = pivoted_orthogonalize(p)?;
            let boxed = bounding_hyperrectangle(&frame, p.origin());
            let report = OrthoReport {
                permutation: frame.permutation.iter().map(|i| i + 1).collect(),
                gamma_norms: frame.norms.clone(),
                gammas: frame.gammas.clone(),
                u: frame.u.clone(),
                checks: OrthoChecks {
                    orthogonality_defect: frame.orthogonality_defect(),
                    max_abs_u: frame.max_abs_u(),
                    reconstruction_error: frame.reconstruction_error(p),
                    volume: volume(p)?,
                    vertices_in_box: p.vertices().iter().all(|v| boxed.contains(v, 1e-9)),
                    box_half_extents: boxed.half_extents,
                },
            };
            json_artifact(name, &report)?
        }
        Command::Content => {
            let cc = cfg
                .content
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `content`".into()))?;
            let poly = ConvexPolygon::from_parallelepiped(&cc.shape)?;
            let frame = pivoted_orthogonalize(&cc.shape)?;
            let boxed = bounding_hyperrectangle(&frame, cc.shape.origin());
            let rect = SortedRectangle::new(boxed.sorted_sides())?;
            let ratio = volume(&cc.shape)? / rect.volume();
            let mut rows = Vec::new();
            for &s in &cc.exponents {
                let est = brute_force_content_2d(&poly, s, &cc.depths)?;
                let (lo, hi) = content_sandwich(&rect, ratio.min(1.0), s)?;
                rows.push(vec![
                    s.to_string(),
                    est.lower.to_string(),
                    est.upper.to_string(),
                    lo.to_string(),
                    hi.to_string(),
                    est.scale_grid.len().to_string(),
                ]);
            }
            csv_artifact(
                name,
                &hash,
                &["s", "lower", "upper", "sandwich_lower", "sandwich_upper", "grids"],
                rows,
                &[format!("volume_ratio={ratio}")],
            )?
        }
        Command::Dimension { .. } => {
            let spec = cfg.target_spec()?;
            let report = s_star(&spec, cfg.n_min, cfg.n_max, cfg.window, cfg.tolerance)?;
            let d = spec.dim();
            let mut header = vec!["n".to_string()];
            header.extend((1..=d).map(|i| format!("gamma_{i}_log2")));
            header.extend(["s_n".to_string(), "argmin_tau_log2".to_string()]);
            let rows = report.levels.iter().map(|l| {
                let mut row = vec![l.n.to_string()];
                row.extend(l.gamma_log2.iter().map(f64::to_string));
                row.push(l.s_n.to_string());
                row.push(l.argmin_tau_log2.to_string());
                row
            });
            let mut trailer = vec![format!(
                "s_star={},converged={},window={},window_min={},window_max={},tolerance={},large_intersection_by_theorem={}",
                report.s_star,
                report.converged,
                report.window,
                report.window_min,
                report.window_max,
                report.tolerance,
                report.large_intersection_by_theorem
            )];
            trailer.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_artifact(name, &hash, &header, rows, &trailer)?
        }
        Command::VerifyCover => {
            let spec = cfg.target_spec()?;
            let cc = cfg
                .cover
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `cover`".into()))?;
            let mut rows = Vec::new();
            for &n in &cc.levels {
                let scan = cover_exponent_scan(&spec, n, cc.taus.as_deref(), cfg.lab_options())?;
                let argmin = scan.argmin_row().map(|r| r.tau);
                for r in &scan.rows {
                    rows.push(vec![
                        n.to_string(),
                        r.tau.log2().to_string(),
                        r.count.to_string(),
                        r.formula.to_string(),
                        r.ratio.to_string(),
                        scan.s_n.to_string(),
                        r.scaled.to_string(),
                        u8::from(Some(r.tau) == argmin).to_string(),
                    ]);
                }
            }
            csv_artifact(
                name,
                &hash,
                &["n", "tau_log2", "measured", "formula", "ratio", "s_n", "measured_times_tau_s_n", "argmin"],
                rows,
                &[],
            )?
        }
        Command::VerifyMeasure => {
            let spec = cfg.target_spec()?;
            let mc = cfg
                .measure
                .as_ref()
                .ok_or_else(|| Error::Config("missing field `measure`".into()))?;
            let cube = cfg.cube()?;
            let s_est = match mc.epsilon {
                Some(_) => None,
                None => Some(s_star(&spec, cfg.n_min, cfg.n_max, cfg.window, cfg.tolerance)?.s_star),
            };
            let mut rows = Vec::new();
            let mut maxima = Vec::new();
            for &n in &mc.levels {
                let level = crate::dimension::s_n(&spec, n)?;
                let t = level.s_n - mc.t_offset;
                let eps = mc.epsilon.unwrap_or_else(|| default_epsilon(s_est.expect("computed above"), t));
                let m = MuMeasure::new(&spec, n, cube.clone(), eps, cfg.lab_options())?;
                let chk = verify_measure_bound(&m, t, mc.samples, cfg.seed)?;
                for (regime, best) in &chk.per_regime {
                    rows.push(vec![
                        n.to_string(),
                        regime.as_str().to_string(),
                        t.to_string(),
                        eps.to_string(),
                        best.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
                let w = chk.worst;
                rows.push(vec![
                    n.to_string(),
                    "all".to_string(),
                    t.to_string(),
                    eps.to_string(),
                    chk.max_ratio.to_string(),
                    w.center[0].to_string(),
                    w.center[1].to_string(),
                    w.r.to_string(),
                    w.mass.to_string(),
                ]);
                maxima.push((n, chk.max_ratio));
            }
            let trailer: Vec<String> = maxima
                .windows(2)
                .map(|w| format!("growth n={}/n={}: {}", w[1].0, w[0].0, w[1].1 / w[0].1))
                .collect();
            csv_artifact(
                name,
                &hash,
                &["n", "regime", "t", "epsilon", "max_ratio", "witness_x", "witness_y", "witness_r", "witness_mass"],
                rows,
                &trailer,
            )?
        }
    };
    Ok(vec![artifact])
}

fn write_artifacts(cli: &Cli, artifacts: &[Artifact]) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in artifacts {
                std::fs::write(dir.join(&a.file_name), &a.body)?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            for a in artifacts {
                out.write_all(a.body.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Error document printed to stderr on failure.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": {
            "module": e.module().as_str(),
            "code": e.code(),
            "message": e.to_string(),
        }
    })
    .to_string()
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {k} threads: {e}")))?;
    } else if let Some(path) = &cli.config {
        // honour a thread count given in the config file
        if let Ok(cfg) = load_config(path) {
            if let Some(k) = cfg.threads {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
    let artifacts = run(cli)?;
    write_artifacts(cli, &artifacts)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            1
        }
    }
}
