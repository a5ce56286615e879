//! `crgc` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 data-integrity
//! error, 4 infeasible or invalid parameters.

use crate::cluster_sim::{run_scenario, ClusterError, Scenario};
use crate::coop_repair::{cooperative_repair, plan_repair, HelperPolicy, Phase, RepairError};
use crate::cutbound::{
    curve_csv, cut_diagnostics, format_decimal, format_rational, gamma_star, msr_closed_form,
    non_coop_msr, parse_rational, BoundParams, CutboundError, Rational, TradeoffPoint,
};
use crate::mscr::{
    self, encode, read_share, stripe, write_share, CodeParams, FieldMode, MscrError, NodeShare,
    SymbolMapping,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

pub const MANIFEST_NAME: &str = "manifest.sha256";
pub const TRANSCRIPT_NAME: &str = "transcript.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Integrity(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Integrity(_) => EXIT_INTEGRITY,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl From<MscrError> for CliError {
    fn from(e: MscrError) -> Self {
        let msg = e.to_string();
        match e {
            MscrError::InvalidParams(_)
            | MscrError::Galois(_)
            | MscrError::Matrix(_)
            | MscrError::SymbolOutOfRange { .. }
            | MscrError::HeaderRange(_) => CliError::Infeasible(msg),
            MscrError::TooFewShares { .. } | MscrError::NodeOutOfRange(_) => CliError::Usage(msg),
            MscrError::DuplicateNode(_)
            | MscrError::InconsistentShares(_)
            | MscrError::BadMagic
            | MscrError::UnsupportedVersion(_)
            | MscrError::Truncated
            | MscrError::CrcMismatch { .. } => CliError::Integrity(msg),
        }
    }
}

impl From<RepairError> for CliError {
    fn from(e: RepairError) -> Self {
        match e {
            RepairError::Code(e) => e.into(),
            RepairError::InsufficientAlive { .. }
            | RepairError::FailedCount { .. }
            | RepairError::Overlap(_) => CliError::Usage(e.to_string()),
            _ => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<CutboundError> for CliError {
    fn from(e: CutboundError) -> Self {
        match e {
            CutboundError::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::Parse { .. } => CliError::Usage(e.to_string()),
            ClusterError::Code(e) => e.into(),
            ClusterError::Repair(e) => e.into(),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "crgc",
    version,
    about = "Cooperative regenerating code toolkit"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mapping {
    Strict,
    Lossy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Lowest,
    RoundRobin,
    Seeded,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a file into n share files plus a checksum manifest.
    Encode {
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "gf256")]
        field: FieldMode,
        #[arg(long, value_enum, default_value = "strict")]
        mapping: Mapping,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the original file from k share files.
    Reconstruct {
        #[arg(required = true)]
        shares: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate failed shares cooperatively from the survivors in a directory.
    Repair {
        #[arg(long)]
        shares: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        failed: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "lowest")]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Minimum repair bandwidth for a storage level, or a curve over a grid.
    Bound {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: usize,
        /// Defaults to k.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        r: usize,
        /// File size B, as an integer, decimal or p/q.
        #[arg(long = "file-size", short = 'B')]
        file_size: String,
        #[arg(
            long,
            conflicts_with = "alpha_grid",
            required_unless_present = "alpha_grid"
        )]
        alpha: Option<String>,
        /// `a,b,c` or `start:end:points` (points evenly spaced, ends included).
        #[arg(long)]
        alpha_grid: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a cluster scenario file.
    Simulate {
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments and runs; returns what to print on stdout and the exit code.
pub fn run<I, T>(args: I) -> (String, Result<(), CliError>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (e.to_string(), Ok(())),
                _ => (String::new(), Err(CliError::Usage(e.to_string()))),
            };
        }
    };
    let mut out = String::new();
    let result = execute(config.command, &mut out);
    (out, result)
}

pub fn execute(cmd: Command, out: &mut String) -> Result<(), CliError> {
    match cmd {
        Command::Encode {
            input,
            n,
            k,
            r,
            field,
            mapping,
            out: dir,
        } => cmd_encode(&input, n, k, r, field, mapping, &dir, out),
        Command::Reconstruct { shares, out: path } => cmd_reconstruct(&shares, &path, out),
        Command::Repair {
            shares,
            failed,
            out: dir,
            policy,
            seed,
        } => {
            let policy = match policy {
                Policy::Lowest => HelperPolicy::LowestIndex,
                Policy::RoundRobin => HelperPolicy::RoundRobin,
                Policy::Seeded => HelperPolicy::Seeded(seed),
            };
            cmd_repair(&shares, &failed, &dir, policy, out)
        }
        Command::Bound {
            n,
            k,
            d,
            r,
            file_size,
            alpha,
            alpha_grid,
            format,
        } => {
            let d = d.unwrap_or(k);
            let b = parse_rational(&file_size)?;
            let alphas = match (alpha, alpha_grid) {
                (Some(a), None) => vec![parse_rational(&a)?],
                (None, Some(g)) => parse_grid(&g)?,
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --alpha and --alpha-grid".into(),
                    ))
                }
            };
            let params = BoundParams::new(n.unwrap_or(d + r), k, d, r, alphas[0].clone(), b)?;
            cmd_bound(&params, &alphas, format, out)
        }
        Command::Simulate {
            scenario,
            seed,
            format,
            out: path,
        } => cmd_simulate(&scenario, seed, format, path.as_deref(), out),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<Rational>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [list] => list.split(',').map(|a| Ok(parse_rational(a)?)).collect(),
        [start, end, points] => {
            let (start, end) = (parse_rational(start)?, parse_rational(end)?);
            let points: i64 = points
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad point count in `{spec}`")))?;
            if points < 2 || end < start {
                return Err(CliError::Usage(format!(
                    "grid `{spec}` needs start <= end and at least 2 points"
                )));
            }
            let step = (&end - &start) / crate::cutbound::rat(points - 1);
            Ok((0..points)
                .map(|i| &start + &step * crate::cutbound::rat(i))
                .collect())
        }
        _ => Err(CliError::Usage(format!("cannot parse grid `{spec}`"))),
    }
}

pub fn share_file_name(node: usize) -> String {
    format!("node_{node:03}.share")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[allow(clippy::too_many_arguments)]
fn cmd_encode(
    input: &Path,
    n: usize,
    k: usize,
    r: usize,
    field: FieldMode,
    mapping: Mapping,
    dir: &Path,
    out: &mut String,
) -> Result<(), CliError> {
    let params = CodeParams::new(n, k, r, field)?;
    let payload = fs::read(input).map_err(io_err(input))?;
    let mapping = match mapping {
        Mapping::Strict => SymbolMapping::Strict,
        Mapping::Lossy => SymbolMapping::Lossy,
    };
    let file = stripe(&payload, &params, mapping)?;
    let shares = encode(&file, &params)?;
    let encoded: Vec<Vec<u8>> = shares
        .iter()
        .map(|s| write_share(&params, s))
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::new();
    for (share, bytes) in shares.iter().zip(&encoded) {
        let name = share_file_name(share.node_index());
        write_file(&dir.join(&name), bytes)?;
        let _ = writeln!(manifest, "{}  {}", sha256_hex(bytes), name);
    }
    write_file(&dir.join(MANIFEST_NAME), manifest.as_bytes())?;
    let _ = writeln!(
        out,
        "encoded {} bytes into {} shares over {} ({} stripes, {} bytes each)",
        payload.len(),
        n,
        params.field().spec(),
        file.stripe_count(),
        encoded[0].len()
    );
    Ok(())
}

fn load_share(path: &Path) -> Result<(CodeParams, NodeShare), CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    read_share(&bytes).map_err(|e| {
        let inner = CliError::from(e);
        match inner {
            CliError::Integrity(m) => CliError::Integrity(format!("{}: {m}", path.display())),
            other => other,
        }
    })
}

/// Reads share files and checks that their headers describe the same code.
fn load_shares(paths: &[PathBuf]) -> Result<(CodeParams, Vec<NodeShare>), CliError> {
    let mut params: Option<CodeParams> = None;
    let mut shares = Vec::with_capacity(paths.len());
    for path in paths {
        let (p, s) = load_share(path)?;
        match &params {
            Some(first) if *first != p => {
                return Err(CliError::Integrity(format!(
                    "{}: header disagrees with the other shares",
                    path.display()
                )))
            }
            Some(_) => {}
            None => params = Some(p),
        }
        shares.push(s);
    }
    let params = params.ok_or_else(|| CliError::Usage("no share files given".into()))?;
    Ok((params, shares))
}

fn cmd_reconstruct(paths: &[PathBuf], path: &Path, out: &mut String) -> Result<(), CliError> {
    let (params, shares) = load_shares(paths)?;
    if shares.len() != params.k() {
        return Err(CliError::Usage(format!(
            "expected exactly k = {} shares, got {}",
            params.k(),
            shares.len()
        )));
    }
    let payload = mscr::decode_payload(&shares, &params)?;
    write_file(path, &payload)?;
    let _ = writeln!(
        out,
        "reconstructed {} bytes to {}",
        payload.len(),
        path.display()
    );
    Ok(())
}

fn cmd_repair(
    dir: &Path,
    failed: &[usize],
    out_dir: &Path,
    policy: HelperPolicy,
    out: &mut String,
) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "share"));
    paths.sort();
    let (params, shares) = load_shares(&paths)?;
    let alive: BTreeMap<usize, NodeShare> = shares
        .into_iter()
        .filter(|s| !failed.contains(&s.node_index()))
        .map(|s| (s.node_index(), s))
        .collect();
    let alive_nodes: Vec<usize> = alive.keys().copied().collect();
    let plan = plan_repair(&alive_nodes, failed, &params, policy)?;
    let outcome = cooperative_repair(&params, &alive, &plan)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for share in &outcome.shares {
        let bytes = write_share(&params, share)?;
        write_file(&out_dir.join(share_file_name(share.node_index())), &bytes)?;
    }
    let mut transcript = String::from("phase,from,to,stripe,symbol_hex\n");
    transcript.push_str(&outcome.ledger.transcript(&params));
    write_file(&out_dir.join(TRANSCRIPT_NAME), transcript.as_bytes())?;
    let stripes = outcome.shares.first().map_or(0, |s| s.stripe_count());
    for share in &outcome.shares {
        let node = share.node_index();
        let p1 = outcome.ledger.received_by(node, Some(Phase::Download));
        let p2 = outcome.ledger.received_by(node, Some(Phase::Exchange));
        let _ = writeln!(
            out,
            "node {node}: downloaded {p1} + exchanged {p2} = {} symbols over {stripes} stripes",
            p1 + p2
        );
    }
    Ok(())
}

fn point_json(p: &BoundParams, pt: &TradeoffPoint) -> serde_json::Value {
    let diagnostics: Vec<serde_json::Value> = cut_diagnostics(p, pt)
        .into_iter()
        .map(|(t, v, binding)| {
            json!({ "cut_type": t.to_string(), "value": format_rational(&v), "binding": binding })
        })
        .collect();
    json!({
        "alpha": format_rational(&pt.alpha),
        "gamma_star": format_rational(&pt.gamma_star),
        "gamma_star_decimal": format_decimal(&pt.gamma_star),
        "beta1": format_rational(&pt.beta1),
        "beta2": format_rational(&pt.beta2),
        "cut_diagnostics": diagnostics,
    })
}

fn cmd_bound(
    params: &BoundParams,
    alphas: &[Rational],
    format: Format,
    out: &mut String,
) -> Result<(), CliError> {
    let single = alphas.len() == 1;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for a in alphas {
        match gamma_star(&params.with_alpha(a.clone())?) {
            Ok(pt) => points.push(pt),
            Err(e @ CutboundError::Infeasible { .. }) if single => return Err(e.into()),
            Err(CutboundError::Infeasible { .. }) => skipped.push(a.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    let msr = msr_closed_form(params);
    let non_coop = non_coop_msr(params);
    match format {
        Format::Csv => out.push_str(&curve_csv(&points)),
        Format::Json => {
            let value = json!({
                "k": params.k, "d": params.d, "r": params.r,
                "file_size": format_rational(&params.file_size),
                "msr_closed_form": format_rational(&msr),
                "non_coop_msr": format_rational(&non_coop),
                "points": points.iter().map(|pt| point_json(params, pt)).collect::<Vec<_>>(),
                "skipped_infeasible": skipped.iter().map(format_rational).collect::<Vec<_>>(),
            });
            out.push_str(&serde_json::to_string_pretty(&value).expect("json"));
            out.push('\n');
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "k={} d={} r={} B={}",
                params.k,
                params.d,
                params.r,
                format_rational(&params.file_size)
            );
            let _ = writeln!(
                out,
                "cooperative MSR gamma = {} ({}), non-cooperative = {} ({})",
                format_rational(&msr),
                format_decimal(&msr),
                format_rational(&non_coop),
                format_decimal(&non_coop)
            );
            for pt in &points {
                let _ = writeln!(
                    out,
                    "alpha={} gamma*={} ({}) beta1={} beta2={}",
                    format_rational(&pt.alpha),
                    format_rational(&pt.gamma_star),
                    format_decimal(&pt.gamma_star),
                    format_rational(&pt.beta1),
                    format_rational(&pt.beta2)
                );
                if single {
                    for (t, v, binding) in cut_diagnostics(params, pt) {
                        let mark = if binding { " binding" } else { "" };
                        let _ = writeln!(out, "  cut {t}: {}{mark}", format_rational(&v));
                    }
                }
            }
            for a in &skipped {
                let _ = writeln!(out, "alpha={} infeasible (below B/k)", format_rational(a));
            }
        }
    }
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    seed: Option<u64>,
    format: Format,
    dest: Option<&Path>,
    out: &mut String,
) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut scenario = Scenario::parse(&text)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let report = run_scenario(&scenario)?;
    let rendered = match format {
        Format::Csv => report.to_csv(),
        Format::Json | Format::Text => report.to_json() + "\n",
    };
    match dest {
        Some(p) => write_file(p, rendered.as_bytes())?,
        None => out.push_str(&rendered),
    }
    if report.all_verified {
        Ok(())
    } else {
        Err(CliError::Integrity(
            "reconstruction check failed after repair".into(),
        ))
    }
}
