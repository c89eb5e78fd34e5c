//! The `meshsteg` command line.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 capacity, 4 mesh
//! parse error, 5 params file invalid or inconsistent with the stego mesh.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::{
    compute_costs, ifpd_raw_rows, ifpd_raw_table, ofpd_raw_rows, raw_costs, CostContext, CostOptions, Profile,
};
use crate::error::{ParseError, StegoError};
use crate::features::tensor::Pattern;
use crate::gibbs::{channel_expected_distortion, solve_lambda};
use crate::layered::{
    allocate, bits_to_bytes, bytes_to_bits, capacity_bits, embed, extract, ChangeSet, EmbedConfig, EmbedReport,
    SAFETY,
};
use crate::mesh::{read_mesh, write_mesh, Mesh, MeshFormat};
use crate::params::StegoParams;
use crate::quant::{detect_k_star, to_fixed, Channel};
use crate::stc::DEFAULT_HEIGHT;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_PARAMS: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "meshsteg", version, about = "Adaptive steganography for triangle meshes")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a message in a cover mesh.
    Embed(EmbedArgs),
    /// Recover a message from a stego mesh and its params file.
    Extract(ExtractArgs),
    /// Dump the per-(vertex, channel, step) cost table as CSV.
    Costmap(CostmapArgs),
    /// Report how many bits a cover can carry.
    Capacity(CapacityArgs),
    /// Compare a cover and a stego mesh.
    Stats(StatsArgs),
    /// Time the incremental cost computation against full recomputation.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Cover mesh (.off or .ply).
    #[arg(long)]
    cover: PathBuf,
    /// Decimal digits to quantize at (default: detected from the file).
    #[arg(long)]
    kstar: Option<u32>,
    /// Explicit change set, e.g. "-1,0,1,2".
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    changes: Option<Vec<i64>>,
    /// Cost profile: ifpd-cs, ifpd-s1, ifpd-s2, ifpd-s3, vnd, gcd, dihedral.
    #[arg(long, default_value = "ifpd-cs")]
    profile: Profile,
    /// Scale applied to the normalized costs.
    #[arg(long, default_value_t = crate::distortion::DEFAULT_MU)]
    mu: f64,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    cost: CostArgs,
    /// File whose bytes are the message.
    #[arg(long, conflicts_with = "text", required_unless_present = "text")]
    message: Option<PathBuf>,
    /// Literal message text.
    #[arg(long)]
    text: Option<String>,
    /// Payload in bits per vertex; picks the change set and caps the message.
    #[arg(long)]
    alpha: Option<f64>,
    /// Relative payload weights of the x, y and z channels.
    #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
    split: Vec<f64>,
    /// Stego mesh path (default: <cover>.stego.<ext>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Params file path (default: <cover>.params).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    stc_height: u32,
    /// Seed for the parity-check submatrices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format (default: same as the cover).
    #[arg(long)]
    format: Option<MeshFormat>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    stego: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Write the message here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CostmapArgs {
    #[command(flatten)]
    cost: CostArgs,
    /// Change set preset when --changes is absent.
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// Unnormalized costs.
    #[arg(long)]
    raw: bool,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[command(flatten)]
    cost: CostArgs,
    /// Payload to check, bits per vertex.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
    split: Vec<f64>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    stego: PathBuf,
    #[arg(long)]
    kstar: Option<u32>,
    /// Per-vertex CSV (vertex,rmse,displacement).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    kstar: Option<u32>,
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    changes: Option<Vec<i64>>,
    /// Rows timed with full recomputation; the rest is extrapolated.
    #[arg(long, default_value_t = 32)]
    sample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedOutput {
    pub stego: String,
    pub params: String,
    pub k_star: u32,
    pub changes: Vec<i64>,
    pub profile: String,
    pub cost_seconds: f64,
    pub embed_seconds: f64,
    pub report: EmbedReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractOutput {
    pub message_bits: usize,
    pub bytes: usize,
    pub out: Option<String>,
    /// The message when it is valid UTF-8.
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityChannel {
    pub channel: Channel,
    pub message_bits: usize,
    pub target_nats: f64,
    pub entropy_nats: f64,
    pub lambda: f64,
    pub expected_distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityOutput {
    pub vertex_count: usize,
    pub k_star: u32,
    pub changes: Vec<i64>,
    pub q: u32,
    /// `3 log2 |I|`, the entropy ceiling in bits per vertex.
    pub max_alpha: f64,
    pub capacity_bits: usize,
    pub capacity_alpha: f64,
    pub requested_bits: Option<usize>,
    pub feasible: Option<bool>,
    pub channels: Vec<CapacityChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsOutput {
    pub vertex_count: usize,
    pub k_star: u32,
    pub rmse: f64,
    pub max_displacement: f64,
    pub mean_displacement: f64,
    pub hausdorff: f64,
    pub changed_vertices: usize,
    pub changed_coordinates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub profile: String,
    pub ifpd_seconds: f64,
    pub ofpd_row_seconds: f64,
    pub ofpd_estimate_seconds: f64,
    pub speedup: f64,
    /// Largest difference between the two methods on the sampled rows.
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub vertex_count: usize,
    pub steps: Vec<i64>,
    pub sampled_rows: usize,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::new(EXIT_PARSE, e.to_string())
    }
}

impl From<StegoError> for CliError {
    fn from(e: StegoError) -> Self {
        let code = match e {
            StegoError::Capacity { .. } | StegoError::Gibbs(_) => EXIT_CAPACITY,
            StegoError::MeshMismatch { .. } => EXIT_PARAMS,
            StegoError::ChangeSet(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
}

/// Parse `std::env::args` and run; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let json = cli.json;
    let result = match cli.command {
        Command::Embed(a) => cmd_embed(a, json),
        Command::Extract(a) => cmd_extract(a, json),
        Command::Costmap(a) => cmd_costmap(a),
        Command::Capacity(a) => cmd_capacity(a, json),
        Command::Stats(a) => cmd_stats(a, json),
        Command::Bench(a) => cmd_bench(a, json),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn load(path: &Path, kstar: Option<u32>) -> Result<(Mesh, MeshFormat, u32), CliError> {
    let (mesh, fmt) = read_mesh(path)?;
    let k = kstar.unwrap_or_else(|| detect_k_star(&mesh));
    Ok((mesh, fmt, k))
}

fn change_set(explicit: &Option<Vec<i64>>, alpha: f64) -> Result<ChangeSet, CliError> {
    match explicit {
        Some(steps) => ChangeSet::new(steps).map_err(|e| CliError::new(EXIT_USAGE, e.to_string())),
        None => Ok(ChangeSet::preset(alpha)),
    }
}

fn split_weights(v: &[f64]) -> Result<[f64; 3], CliError> {
    let w: [f64; 3] = v
        .try_into()
        .map_err(|_| CliError::new(EXIT_USAGE, "--split needs three weights"))?;
    if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
        return Err(CliError::new(EXIT_USAGE, "--split weights must be non-negative with a positive sum"));
    }
    Ok(w)
}

fn costs_for(a: &CostArgs, mesh: &Mesh, k: u32, cs: &ChangeSet) -> Result<crate::distortion::CostTable, CliError> {
    let options = CostOptions {
        mu: a.mu,
        ..CostOptions::default()
    };
    compute_costs(mesh, k, cs.steps(), a.profile, options).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))
}

/// `dir/stem<suffix>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_embed(a: EmbedArgs, json: bool) -> Result<(), CliError> {
    let (cover, in_fmt, k) = load(&a.cost.cover, a.cost.kstar)?;
    let fmt = a.format.unwrap_or(in_fmt);
    let bytes = match (&a.message, &a.text) {
        (Some(p), _) => fs::read(p).map_err(|e| io_err(p, e))?,
        (None, Some(t)) => t.as_bytes().to_vec(),
        (None, None) => return Err(CliError::new(EXIT_USAGE, "need --message or --text")),
    };
    let bits = bytes_to_bits(&bytes);
    let n = cover.vertex_count();
    let alpha = match a.alpha {
        Some(al) => {
            if !(al > 0.0 && al.is_finite()) {
                return Err(CliError::new(EXIT_USAGE, "--alpha must be positive"));
            }
            let budget = (al * n as f64).floor() as usize;
            if bits.len() > budget {
                return Err(CliError::new(
                    EXIT_CAPACITY,
                    format!("message of {} bits exceeds alpha = {al} on {n} vertices ({budget} bits)", bits.len()),
                ));
            }
            al
        }
        None => bits.len() as f64 / n.max(1) as f64,
    };
    let cs = change_set(&a.cost.changes, alpha)?;
    let mut config = EmbedConfig::new(cs.clone());
    config.k_star = k;
    config.alpha_split = split_weights(&a.split)?;
    config.stc_height = a.stc_height;
    config.stc_seed = a.seed;

    let t0 = Instant::now();
    let costs = costs_for(&a.cost, &cover, k, &cs)?;
    let cost_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let out = embed(&cover, &bits, &config, &costs)?;
    let embed_seconds = t1.elapsed().as_secs_f64();

    let stego_path = a
        .out
        .unwrap_or_else(|| sibling(&a.cost.cover, &format!(".stego.{}", fmt.extension())));
    let params_path = a.params.unwrap_or_else(|| sibling(&a.cost.cover, ".params"));
    fs::write(&stego_path, write_mesh(&out.stego, fmt, k)).map_err(|e| io_err(&stego_path, e))?;
    fs::write(&params_path, out.params.to_text()).map_err(|e| io_err(&params_path, e))?;

    let report = EmbedOutput {
        stego: stego_path.display().to_string(),
        params: params_path.display().to_string(),
        k_star: k,
        changes: cs.steps().to_vec(),
        profile: a.cost.profile.to_string(),
        cost_seconds,
        embed_seconds,
        report: out.report,
    };
    if json {
        return print_json(&report);
    }
    let r = &report.report;
    println!("stego:      {}", report.stego);
    println!("params:     {}", report.params);
    println!("payload:    {} bits on {} vertices ({:.4} bpv)", r.message_bits, r.vertex_count, r.alpha);
    println!("capacity:   {} bits", r.capacity_bits);
    println!("changes:    {} (k* = {k}, profile {})", cs, report.profile);
    println!("distortion: {:.6} expected", r.expected_distortion);
    for c in &r.channels {
        println!(
            "  {}: {} bits, lambda {:.6}, {} vertices changed, distortion {:.6}",
            c.channel.label(),
            c.message_bits,
            c.lambda,
            c.changed_vertices,
            c.realized_distortion
        );
    }
    println!("time:       {cost_seconds:.3}s costs, {embed_seconds:.3}s coding");
    Ok(())
}

fn cmd_extract(a: ExtractArgs, json: bool) -> Result<(), CliError> {
    let (stego, _) = read_mesh(&a.stego)?;
    let text = fs::read_to_string(&a.params).map_err(|e| io_err(&a.params, e))?;
    let params: StegoParams = text
        .parse()
        .map_err(|e| CliError::new(EXIT_PARAMS, format!("{}: {e}", a.params.display())))?;
    let bits = extract(&stego, &params)?;
    let bytes = bits_to_bytes(&bits);
    if let Some(p) = &a.out {
        fs::write(p, &bytes).map_err(|e| io_err(p, e))?;
    }
    if json {
        return print_json(&ExtractOutput {
            message_bits: bits.len(),
            bytes: bytes.len(),
            out: a.out.as_ref().map(|p| p.display().to_string()),
            text: String::from_utf8(bytes).ok(),
        });
    }
    if a.out.is_none() {
        io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    }
    Ok(())
}

fn cmd_costmap(a: CostmapArgs) -> Result<(), CliError> {
    let (mesh, _, k) = load(&a.cost.cover, a.cost.kstar)?;
    let cs = change_set(&a.cost.changes, a.alpha)?;
    let table = if a.raw {
        let options = CostOptions {
            mu: a.cost.mu,
            ..CostOptions::default()
        };
        raw_costs(&mesh, k, cs.steps(), a.cost.profile, options).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?
    } else {
        costs_for(&a.cost, &mesh, k, &cs)?
    };
    let write = |w: &mut dyn Write| table.write_costmap(io::BufWriter::new(w));
    match &a.out {
        Some(p) => {
            let mut f = fs::File::create(p).map_err(|e| io_err(p, e))?;
            write(&mut f).map_err(|e| io_err(p, e))
        }
        None => match write(&mut io::stdout().lock()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::new(EXIT_FAILURE, e.to_string())),
            _ => Ok(()),
        },
    }
}

fn cmd_capacity(a: CapacityArgs, json: bool) -> Result<(), CliError> {
    let (mesh, _, k) = load(&a.cost.cover, a.cost.kstar)?;
    let n = mesh.vertex_count();
    let cs = change_set(&a.cost.changes, a.alpha.unwrap_or(3.0))?;
    let split = split_weights(&a.split)?;
    let cap = capacity_bits(n, &cs, split, SAFETY);
    let mut out = CapacityOutput {
        vertex_count: n,
        k_star: k,
        changes: cs.steps().to_vec(),
        q: cs.q(),
        max_alpha: 3.0 * (cs.len() as f64).log2(),
        capacity_bits: cap,
        capacity_alpha: cap as f64 / n.max(1) as f64,
        requested_bits: None,
        feasible: None,
        channels: Vec::new(),
    };
    if let Some(al) = a.alpha {
        let bits = (al * n as f64).floor() as usize;
        out.requested_bits = Some(bits);
        out.feasible = Some(bits <= cap);
        if bits <= cap {
            let costs = costs_for(&a.cost, &mesh, k, &cs)?;
            let parts = allocate(bits, &split);
            for c in Channel::ALL {
                let m = parts[c.index()];
                if m == 0 {
                    continue;
                }
                let target = m as f64 * std::f64::consts::LN_2 / SAFETY;
                let dist = solve_lambda(&costs, c, target).map_err(StegoError::from)?;
                out.channels.push(CapacityChannel {
                    channel: c,
                    message_bits: m,
                    target_nats: target,
                    entropy_nats: dist.entropy,
                    lambda: dist.lambda,
                    expected_distortion: channel_expected_distortion(&costs, &dist),
                });
            }
        }
    }
    if json {
        return print_json(&out);
    }
    println!("vertices:  {n} (k* = {k})");
    println!("changes:   {cs} (Q = {})", out.q);
    println!("ceiling:   {:.4} bpv", out.max_alpha);
    println!("capacity:  {} bits ({:.4} bpv)", out.capacity_bits, out.capacity_alpha);
    if let (Some(bits), Some(ok)) = (out.requested_bits, out.feasible) {
        println!("requested: {bits} bits, {}", if ok { "feasible" } else { "exceeds capacity" });
        for c in &out.channels {
            println!(
                "  {}: {} bits, lambda {:.6}, H {:.4} nats, expected distortion {:.6}",
                c.channel.label(),
                c.message_bits,
                c.lambda,
                c.entropy_nats,
                c.expected_distortion
            );
        }
    }
    match out.feasible {
        Some(false) => Err(CliError::new(EXIT_CAPACITY, "requested payload exceeds capacity")),
        _ => Ok(()),
    }
}

/// Per-vertex RMSE over the three coordinates and Euclidean displacement.
pub fn vertex_errors(cover: &Mesh, stego: &Mesh) -> Vec<(f64, f64)> {
    cover
        .vertices()
        .iter()
        .zip(stego.vertices())
        .map(|(a, b)| {
            let sq: f64 = (0..3).map(|j| (a[j] - b[j]).powi(2)).sum();
            ((sq / 3.0).sqrt(), sq.sqrt())
        })
        .collect()
}

/// Symmetric Hausdorff distance between the two vertex sets.
pub fn hausdorff(a: &Mesh, b: &Mesh) -> f64 {
    let one_way = |p: &[[f64; 3]], q: &[[f64; 3]]| {
        p.par_iter()
            .map(|x| {
                q.iter()
                    .map(|y| (0..3).map(|j| (x[j] - y[j]).powi(2)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
            .sqrt()
    };
    one_way(a.vertices(), b.vertices()).max(one_way(b.vertices(), a.vertices()))
}

fn cmd_stats(a: StatsArgs, json: bool) -> Result<(), CliError> {
    let (cover, _, kc) = load(&a.cover, a.kstar)?;
    let (stego, _, ks) = load(&a.stego, a.kstar)?;
    let k = kc.max(ks);
    if cover.vertex_count() != stego.vertex_count() {
        return Err(CliError::new(
            EXIT_USAGE,
            format!("cover has {} vertices, stego has {}", cover.vertex_count(), stego.vertex_count()),
        ));
    }
    let n = cover.vertex_count();
    let errors = vertex_errors(&cover, &stego);
    let mut changed_vertices = 0;
    let mut changed_coordinates = 0;
    for (p, q) in cover.vertices().iter().zip(stego.vertices()) {
        let mut any = false;
        for j in 0..3 {
            let differ = match (to_fixed(p[j], k), to_fixed(q[j], k)) {
                (Ok(x), Ok(y)) => x != y,
                _ => p[j] != q[j],
            };
            if differ {
                changed_coordinates += 1;
                any = true;
            }
        }
        changed_vertices += any as usize;
    }
    let denom = n.max(1) as f64;
    let out = StatsOutput {
        vertex_count: n,
        k_star: k,
        rmse: (errors.iter().map(|e| e.0 * e.0).sum::<f64>() / denom).sqrt(),
        max_displacement: errors.iter().map(|e| e.1).fold(0.0, f64::max),
        mean_displacement: errors.iter().map(|e| e.1).sum::<f64>() / denom,
        hausdorff: hausdorff(&cover, &stego),
        changed_vertices,
        changed_coordinates,
    };
    if let Some(p) = &a.table {
        let mut s = String::from("vertex,rmse,displacement\n");
        for (i, (r, d)) in errors.iter().enumerate() {
            s.push_str(&format!("{i},{r:e},{d:e}\n"));
        }
        fs::write(p, s).map_err(|e| io_err(p, e))?;
    }
    if json {
        return print_json(&out);
    }
    println!("vertices:          {n} (k* = {k})");
    println!("rmse:              {:e}", out.rmse);
    println!("max displacement:  {:e}", out.max_displacement);
    println!("mean displacement: {:e}", out.mean_displacement);
    println!("hausdorff:         {:e}", out.hausdorff);
    println!("changed:           {changed_vertices} vertices, {changed_coordinates} coordinates");
    Ok(())
}

/// `count` row indices spread evenly over `0..n`.
pub fn sample_rows(n: usize, count: usize) -> Vec<usize> {
    let count = count.clamp(1, n.max(1)).min(n);
    (0..count).map(|k| k * n / count).collect()
}

fn cmd_bench(a: BenchArgs, json: bool) -> Result<(), CliError> {
    let (mesh, _, k) = load(&a.cover, a.kstar)?;
    let cs = change_set(&a.changes, 6.0)?;
    let steps = cs.steps();
    let ctx = CostContext::new(&mesh, k).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?;
    let n = mesh.vertex_count();
    let rows = sample_rows(n, a.sample);
    let variants: [(&str, &[Pattern]); 4] = [
        ("ifpd-s1", &[Pattern::VertexRing]),
        ("ifpd-s2", &[Pattern::FaceEdge]),
        ("ifpd-s3", &[Pattern::FaceVertex]),
        ("ifpd-cs", &Pattern::ALL),
    ];
    let mut out = BenchOutput {
        vertex_count: n,
        steps: steps.to_vec(),
        sampled_rows: rows.len(),
        threads: rayon::current_num_threads(),
        rows: Vec::new(),
    };
    for (name, patterns) in variants {
        let t = Instant::now();
        let fast = ifpd_raw_table(&ctx, steps, patterns);
        let ifpd_seconds = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let slow = ofpd_raw_rows(&ctx, &rows, steps, patterns);
        let ofpd_row_seconds = t.elapsed().as_secs_f64() / rows.len().max(1) as f64;
        let same = ifpd_raw_rows(&ctx, &rows, steps, patterns);
        let max_abs_diff = (0..3)
            .flat_map(|p| same.values[p].iter().zip(&slow.values[p]).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        debug_assert_eq!(fast.vertex_count, n);
        let estimate = ofpd_row_seconds * n as f64;
        out.rows.push(BenchRow {
            profile: name.to_string(),
            ifpd_seconds,
            ofpd_row_seconds,
            ofpd_estimate_seconds: estimate,
            speedup: estimate / ifpd_seconds.max(1e-12),
            max_abs_diff,
        });
    }
    if json {
        return print_json(&out);
    }
    println!(
        "{n} vertices, |I| = {}, {} sampled rows, {} threads",
        steps.len(),
        out.sampled_rows,
        out.threads
    );
    println!("{:<8} {:>12} {:>14} {:>10} {:>10}", "profile", "ifpd s", "ofpd est s", "speedup", "max diff");
    for r in &out.rows {
        println!(
            "{:<8} {:>12.4} {:>14.2} {:>10.1} {:>10.1e}",
            r.profile, r.ifpd_seconds, r.ofpd_estimate_seconds, r.speedup, r.max_abs_diff
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn json_reports_round_trip() {
        let out = StatsOutput {
            vertex_count: 3,
            k_star: 6,
            rmse: 1e-6 / 3f64.sqrt(),
            max_displacement: 1e-6,
            mean_displacement: 1e-6 / 3.0,
            hausdorff: 1e-6,
            changed_vertices: 1,
            changed_coordinates: 1,
        };
        let s = serde_json::to_string(&out).unwrap();
        assert_eq!(serde_json::from_str::<StatsOutput>(&s).unwrap(), out);
    }

    #[test]
    fn single_unit_move_rmse() {
        let cover = fixtures::quantized(&fixtures::tetrahedron(), 6);
        let mut v = cover.vertices().to_vec();
        v[2][1] += 1e-6;
        let stego = cover.with_vertices(v);
        let e = vertex_errors(&cover, &stego);
        assert!((e[2].0 - 1e-6 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(e[0], (0.0, 0.0));
        assert!((hausdorff(&cover, &stego) - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn rows_are_spread() {
        assert_eq!(sample_rows(10, 5), vec![0, 2, 4, 6, 8]);
        assert_eq!(sample_rows(3, 10), vec![0, 1, 2]);
        assert!(sample_rows(0, 4).is_empty());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_from(["meshsteg", "embed"]), EXIT_USAGE);
        assert_eq!(run_from(["meshsteg", "frobnicate"]), EXIT_USAGE);
    }
}
