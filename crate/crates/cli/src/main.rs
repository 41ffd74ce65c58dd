use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeeze_core::format::{self, AnyScheme};
use squeeze_core::perpgen::{gen_coordinate_split, gen_coordinate_split_with, gen_systematic_pair};
use squeeze_core::spectra::{self, Reducer};
use squeeze_core::templates::{self, LinearClosedForm};
use squeeze_core::trails::{self, ChainMode, KeySelection};
use squeeze_core::{
    validate, BitMatrix, BitVector, Error, Execution, KeyedMap, MultiBranchSpec, SchemeSpec,
};

/// Used when `--seed` is not given.
const DEFAULT_SEED: u64 = 0x5a4d_5749_4348;

#[derive(Parser)]
#[command(
    name = "squeeze",
    version,
    about = "Exact analysis of sandwich block-cipher rounds over GF(2)"
)]
struct Cli {
    /// RNG seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest input width for exhaustive tables and sweeps.
    #[arg(long, global = true, default_value_t = spectra::DEFAULT_LIMIT_BITS)]
    limit_bits: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Output file (or file prefix for gen-perp).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a perpendicular full-rank pair (A, B).
    GenPerp(GenPerpArgs),
    /// Write a template scheme file.
    Template(TemplateArgs),
    /// Validate a scheme file.
    Check(SchemeArg),
    /// Encrypt a state through consecutive rounds.
    Encrypt(CryptArgs),
    /// Invert consecutive rounds.
    Decrypt(CryptArgs),
    /// Difference distribution table of a nonlinear map.
    Ddt(TableArgs),
    /// Correlation table of a nonlinear map.
    Lat(TableArgs),
    /// One whole-round coefficient through the core's tables.
    Reduce(ReduceArgs),
    /// Compare the reductions with brute force on every (alpha, beta).
    OracleCheck(OracleArgs),
    /// Kernel chains and round-count bounds.
    Bound(BoundArgs),
    /// Deterministic trail from alpha0.
    Trail(TrailArgs),
    /// Fixed points of the linear part inside ker A (and ker B).
    FixedPoints(SchemeArg),
    /// Closed-form attack on the fully linear round.
    LinearAttack(AttackArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    CoordinateSplit,
    Systematic,
}

#[derive(Args)]
struct GenPerpArgs {
    #[arg(long, value_enum, default_value_t = Method::CoordinateSplit)]
    method: Method,
    #[arg(long)]
    l1: Option<usize>,
    #[arg(long)]
    l2: Option<usize>,
    #[arg(long)]
    rows_a: Option<usize>,
    #[arg(long)]
    rows_b: Option<usize>,
    /// Coordinates where A vanishes, 1-based, comma separated (random if absent).
    #[arg(long, value_delimiter = ',')]
    j: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TemplateKind {
    Feistel,
    Fox,
    Linear,
    Type1,
    Type3,
}

#[derive(Args)]
struct TemplateArgs {
    #[arg(value_enum)]
    kind: TemplateKind,
    /// Word size in bits.
    #[arg(long)]
    n: usize,
    /// Words (per copy for type3).
    #[arg(long = "N")]
    words: Option<usize>,
}

#[derive(Args)]
struct SchemeArg {
    #[arg(long)]
    scheme: PathBuf,
}

#[derive(Args)]
struct CryptArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Round keys, comma separated; branch keys of a multi-branch round are
    /// separated by ':'.
    #[arg(long)]
    keys: Option<String>,
    /// Rounds with all-zero keys when --keys is absent.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    input: String,
    /// Print every intermediate state.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    nlmap: PathBuf,
    /// Round key; all zero when absent.
    #[arg(long)]
    key: Option<String>,
    /// Single row `u` (input difference or input mask as a bit string).
    #[arg(long)]
    row: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReduceMode {
    Diff,
    Corr,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Round key; all zero when absent.
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    beta: String,
    #[arg(long, value_enum, default_value_t = ReduceMode::Diff)]
    mode: ReduceMode,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Round key; all zero when absent.
    #[arg(long)]
    key: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundMode {
    Diff,
    Lin,
    Both,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    rounds: usize,
    #[arg(long, value_enum, default_value_t = BoundMode::Both)]
    mode: BoundMode,
    /// File with one key per line for the core maxima.
    #[arg(long, conflicts_with = "exhaustive_keys")]
    keys: Option<PathBuf>,
    #[arg(long)]
    exhaustive_keys: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrailMode {
    Diff,
    Lin,
}

#[derive(Args)]
struct TrailArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    alpha0: String,
    #[arg(long)]
    rounds: usize,
    /// Round keys, comma separated; all zero when absent.
    #[arg(long)]
    keys: Option<String>,
    #[arg(long, value_enum, default_value_t = TrailMode::Diff)]
    mode: TrailMode,
}

#[derive(Args)]
struct AttackArgs {
    /// Linear-case scheme; generated from --n/--N and the seed when absent.
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "N", default_value_t = 3)]
    words: usize,
    #[arg(long, default_value_t = 8)]
    rounds: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

/// Errors with their exit status: 1 for failed checks, 2 for bad input.
enum Failure {
    Check(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Generation { .. } => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<Output, Failure>;

/// What a command produced and whether its checks held.
struct Output {
    text: String,
    passed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, passed: true }
    }
}

struct Ctx {
    seed: u64,
    limit_bits: usize,
    format: OutFormat,
    out: Option<PathBuf>,
}

impl Ctx {
    fn announce_seed(&self) {
        eprintln!("seed {}", self.seed);
    }

    fn csv(&self) -> bool {
        self.format == OutFormat::Csv
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        limit_bits: cli.limit_bits,
        format: cli.format,
        out: cli.out,
    };
    let result = match cli.command {
        Command::GenPerp(a) => gen_perp(&ctx, a),
        Command::Template(a) => template(&ctx, a),
        Command::Check(a) => check(&ctx, a),
        Command::Encrypt(a) => crypt(&ctx, a, true),
        Command::Decrypt(a) => crypt(&ctx, a, false),
        Command::Ddt(a) => table(&ctx, a, true),
        Command::Lat(a) => table(&ctx, a, false),
        Command::Reduce(a) => reduce(&ctx, a),
        Command::OracleCheck(a) => oracle_check(&ctx, a),
        Command::Bound(a) => bound(&ctx, a),
        Command::Trail(a) => trail(&ctx, a),
        Command::FixedPoints(a) => fixed_points(&ctx, a),
        Command::LinearAttack(a) => linear_attack(&ctx, a),
    };
    match result {
        Ok(output) => {
            if let Err(e) = emit(&ctx, &output.text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if output.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Writes to `--out` when given (except for commands that own it), else stdout.
fn emit(ctx: &Ctx, text: &str) -> std::io::Result<()> {
    match &ctx.out {
        Some(path) if !text.is_empty() => fs::write(path, text),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn bits(s: &str, len: usize, what: &str) -> Result<BitVector, Failure> {
    BitVector::parse_exact(s, len).map_err(|e| input(format!("{what}: {e}")))
}

fn one_key(s: Option<&str>, key_bits: usize) -> Result<BitVector, Failure> {
    match s {
        Some(s) => bits(s, key_bits, "key"),
        None => Ok(BitVector::zeros(key_bits)),
    }
}

fn key_list(
    s: Option<&str>,
    rounds: Option<usize>,
    key_bits: usize,
) -> Result<Vec<BitVector>, Failure> {
    match (s, rounds) {
        (Some(s), r) => {
            let keys: Vec<BitVector> = s
                .split(',')
                .map(|k| bits(k.trim(), key_bits, "key"))
                .collect::<Result<_, _>>()?;
            if let Some(r) = r {
                if r != keys.len() {
                    return Err(input(format!("{} keys given for {r} rounds", keys.len())));
                }
            }
            Ok(keys)
        }
        (None, Some(r)) => Ok(vec![BitVector::zeros(key_bits); r]),
        (None, None) => Err(input("give --keys or --rounds")),
    }
}

fn read_single(path: &Path) -> Result<SchemeSpec, Failure> {
    match format::read_any(path)? {
        AnyScheme::Single(s) => Ok(s),
        AnyScheme::Multi(_) => Err(input("this command needs a single-branch scheme file")),
    }
}

fn write_matrix(path: &Path, m: &BitMatrix) -> Result<(), Failure> {
    fs::write(path, m.to_text()).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn gen_perp(ctx: &Ctx, a: GenPerpArgs) -> CmdResult {
    ctx.announce_seed();
    let need =
        |v: Option<usize>, name: &str| v.ok_or_else(|| input(format!("--{name} is required")));
    let pair = match a.method {
        Method::CoordinateSplit => {
            let (l1, l2) = (need(a.l1, "l1")?, need(a.l2, "l2")?);
            let (ra, rb) = (need(a.rows_a, "rows-a")?, need(a.rows_b, "rows-b")?);
            match a.j {
                Some(j) => {
                    if j.contains(&0) {
                        return Err(input("--j indices are 1-based"));
                    }
                    let zero_based: Vec<usize> = j.iter().map(|x| x - 1).collect();
                    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                    gen_coordinate_split_with(l1, l2, ra, rb, &zero_based, &mut rng)?
                }
                None => gen_coordinate_split(l1, l2, ra, rb, ctx.seed)?,
            }
        }
        Method::Systematic => {
            gen_systematic_pair(need(a.k, "k")?, need(a.l, "l")?, None, ctx.seed)?
        }
    };
    if let Some(prefix) = &ctx.out {
        let name = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        let (pa, pb) = (name("_A.mat"), name("_B.mat"));
        write_matrix(&pa, &pair.a)?;
        write_matrix(&pb, &pair.b)?;
        println!("wrote {} and {}", pa.display(), pb.display());
        return Ok(Output::ok(String::new()));
    }
    Ok(Output::ok(format!(
        "A\n{}B\n{}",
        pair.a.to_text(),
        pair.b.to_text()
    )))
}

fn template(ctx: &Ctx, a: TemplateArgs) -> CmdResult {
    ctx.announce_seed();
    let out = ctx
        .out
        .clone()
        .ok_or_else(|| input("template needs --out <scheme file>"))?;
    let seed = ctx.seed;
    let written = match a.kind {
        TemplateKind::Feistel => format::write_scheme(&out, &templates::feistel(a.n, None, seed)?)?,
        TemplateKind::Fox => format::write_scheme(&out, &templates::fox(a.n, None, seed)?)?,
        TemplateKind::Type1 => format::write_scheme(
            &out,
            &templates::gfn_type1(a.n, a.words.unwrap_or(4), None, seed)?,
        )?,
        TemplateKind::Linear => {
            let words = a.words.unwrap_or(2);
            let pair = templates::linear_pair(a.n, words, seed)?;
            let (spec, _) = templates::linear_case(a.n, words, pair, None)?;
            format::write_scheme(&out, &spec)?
        }
        TemplateKind::Type3 => {
            let spec = templates::gfn_type3(a.n, a.words.unwrap_or(4), None, seed)?;
            let cores = format::write_multibranch(&out, &spec)?;
            println!("wrote {} with {} branch maps", out.display(), cores.len());
            return Ok(Output::ok(String::new()));
        }
    };
    println!("wrote {} and {}", out.display(), written.display());
    Ok(Output::ok(String::new()))
}

fn check(_ctx: &Ctx, a: SchemeArg) -> CmdResult {
    let text =
        fs::read_to_string(&a.scheme).map_err(|e| input(format!("{}: {e}", a.scheme.display())))?;
    if text.starts_with("multibranch v1") {
        return match format::read_multibranch(&a.scheme) {
            Ok(spec) => Ok(Output::ok(format!(
                "multi-branch scheme: {} branches, {} state bits\nvalid\n",
                spec.branches().len(),
                spec.state_bits()
            ))),
            Err(e @ (Error::Validation(_) | Error::Perpendicularity { .. })) => Ok(Output {
                text: format!("invalid: {e}\n"),
                passed: false,
            }),
            Err(e) => Err(e.into()),
        };
    }
    let parts = format::read_scheme_parts(&a.scheme)?;
    let report = validate(&parts);
    let verdict = if report.is_valid() {
        "valid"
    } else {
        "invalid"
    };
    let key_bits = parts.core.key_bits();
    let state_bits = parts.dims.state_bits();
    let keyspace = format!(
        "info key bits per round: {key_bits} ({} the nN = {state_bits} keyspace size; not enforced)\n",
        if key_bits >= state_bits { "meets" } else { "below" }
    );
    Ok(Output {
        text: format!("{report}{keyspace}{verdict}\n"),
        passed: report.is_valid(),
    })
}

fn crypt(_ctx: &Ctx, a: CryptArgs, forward: bool) -> CmdResult {
    match format::read_any(&a.scheme)? {
        AnyScheme::Single(spec) => {
            let keys = key_list(a.keys.as_deref(), a.rounds, spec.key_bits())?;
            let x = bits(&a.input, spec.dims().state_bits(), "input")?;
            let trace = if forward {
                spec.iterate(&keys, &x)?
            } else {
                let mut states = vec![x];
                for k in keys.iter().rev() {
                    let next = spec.round_inverse(k, states.last().expect("non-empty"))?;
                    states.push(next);
                }
                states
            };
            Ok(Output::ok(render_trace(&trace, a.trace)))
        }
        AnyScheme::Multi(spec) => {
            let rounds = multi_keys(&spec, a.keys.as_deref(), a.rounds)?;
            let x = bits(&a.input, spec.state_bits(), "input")?;
            let mut trace = vec![x];
            let order: Vec<&Vec<BitVector>> = if forward {
                rounds.iter().collect()
            } else {
                rounds.iter().rev().collect()
            };
            for keys in order {
                let last = trace.last().expect("non-empty");
                let next = if forward {
                    spec.forward(keys, last)?
                } else {
                    spec.inverse(keys, last)?
                };
                trace.push(next);
            }
            Ok(Output::ok(render_trace(&trace, a.trace)))
        }
    }
}

fn multi_keys(
    spec: &MultiBranchSpec,
    s: Option<&str>,
    rounds: Option<usize>,
) -> Result<Vec<Vec<BitVector>>, Failure> {
    let widths: Vec<usize> = spec.branches().iter().map(|b| b.core.key_bits()).collect();
    match s {
        Some(s) => {
            let parsed: Vec<Vec<BitVector>> = s
                .split(',')
                .map(|round| {
                    let parts: Vec<&str> = round.split(':').collect();
                    if parts.len() != widths.len() {
                        return Err(input(format!(
                            "round key '{round}' has {} branch keys, need {}",
                            parts.len(),
                            widths.len()
                        )));
                    }
                    parts
                        .iter()
                        .zip(&widths)
                        .map(|(p, &w)| bits(p.trim(), w, "branch key"))
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            if rounds.is_some_and(|r| r != parsed.len()) {
                return Err(input("--rounds disagrees with the number of keys"));
            }
            Ok(parsed)
        }
        None => {
            let r = rounds.ok_or_else(|| input("give --keys or --rounds"))?;
            Ok(vec![
                widths.iter().map(|&w| BitVector::zeros(w)).collect();
                r
            ])
        }
    }
}

fn render_trace(trace: &[BitVector], all: bool) -> String {
    if all {
        trace
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{i} {s}\n"))
            .collect()
    } else {
        format!("{}\n", trace.last().expect("non-empty"))
    }
}

fn table(ctx: &Ctx, a: TableArgs, differential: bool) -> CmdResult {
    let text =
        fs::read_to_string(&a.nlmap).map_err(|e| input(format!("{}: {e}", a.nlmap.display())))?;
    let map = KeyedMap::from_text(&text)?;
    let key = map.prepare_key(&one_key(a.key.as_deref(), map.key_bits())?)?;
    if let Some(row) = a.row {
        let u = bits(&row, map.input_bits(), "row")?.to_u64();
        let values = if differential {
            spectra::ddt_row(&map, &key, u)?
        } else {
            spectra::lat_row(&map, &key, u)?
        };
        let mut out = header(map.output_bits());
        out.push_str(&spectra::csv_row(u, &values));
        return Ok(Output::ok(out));
    }
    let exec = Execution::default();
    let t = if differential {
        spectra::ddt(&map, &key, ctx.limit_bits, exec)?
    } else {
        spectra::lat(&map, &key, ctx.limit_bits, exec)?
    };
    Ok(Output::ok(t.to_csv()))
}

fn header(d2: usize) -> String {
    let mut h = String::from("u");
    for v in 0..1u64 << d2 {
        h.push_str(&format!(",{v}"));
    }
    h.push('\n');
    h
}

fn reduce(ctx: &Ctx, a: ReduceArgs) -> CmdResult {
    let spec = read_single(&a.scheme)?;
    let width = spec.dims().state_bits();
    let key = one_key(a.key.as_deref(), spec.key_bits())?;
    let alpha = bits(&a.alpha, width, "alpha")?;
    let beta = bits(&a.beta, width, "beta")?;
    let reducer = Reducer::new(&spec, &key)?;
    let (mode, r) = match a.mode {
        ReduceMode::Diff => ("diff", reducer.diff(&alpha, &beta)?),
        ReduceMode::Corr => ("corr", reducer.corr(&alpha, &beta)?),
    };
    let (cu, cv) = r
        .core_pair
        .as_ref()
        .map(|(u, v)| (u.to_string(), v.to_string()))
        .unwrap_or_else(|| ("-".into(), "-".into()));
    let text = if ctx.csv() {
        format!(
            "mode,value,approx,rowspace_condition,core_u,core_v\n{mode},{},{},{},{cu},{cv}\n",
            r.value.exact_string(),
            r.value.to_f64(),
            r.active
        )
    } else {
        format!(
            "value {} ~ {}\nrowspace_condition {}\ncore_pair ({cu}, {cv})\n",
            r.value.exact_string(),
            r.value.to_f64(),
            r.active
        )
    };
    Ok(Output::ok(text))
}

fn oracle_check(ctx: &Ctx, a: OracleArgs) -> CmdResult {
    let spec = read_single(&a.scheme)?;
    let key = one_key(a.key.as_deref(), spec.key_bits())?;
    let report = spectra::oracle_check(&spec, &key, ctx.limit_bits, Execution::default())?;
    let mut text = if ctx.csv() {
        String::from("kind,alpha,beta,reduced,brute\n")
    } else {
        format!(
            "pairs {}\ndiff mismatches {}\ncorr mismatches {}\n",
            report.pairs,
            report.diff_mismatches.len(),
            report.corr_mismatches.len()
        )
    };
    let bitsv = |v: u64| BitVector::from_u64(report.state_bits, v).to_string();
    for (kind, list) in [
        ("diff", &report.diff_mismatches),
        ("corr", &report.corr_mismatches),
    ] {
        for m in list {
            text.push_str(&format!(
                "{kind},{},{},{},{}\n",
                bitsv(m.alpha),
                bitsv(m.beta),
                m.reduced.exact_string(),
                m.brute.exact_string()
            ));
        }
    }
    if !ctx.csv() {
        text.push_str(if report.passed() { "PASS\n" } else { "FAIL\n" });
    }
    Ok(Output {
        text,
        passed: report.passed(),
    })
}

fn read_key_file(path: &Path, key_bits: usize) -> Result<Vec<BitVector>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            bits(
                l.trim(),
                key_bits,
                &format!("{} line {}", path.display(), i + 1),
            )
        })
        .collect()
}

fn bound(ctx: &Ctx, a: BoundArgs) -> CmdResult {
    if a.rounds == 0 {
        return Err(input("--rounds must be at least 1"));
    }
    let modes: Vec<ChainMode> = match a.mode {
        BoundMode::Diff => vec![ChainMode::Differential],
        BoundMode::Lin => vec![ChainMode::Linear],
        BoundMode::Both => vec![ChainMode::Differential, ChainMode::Linear],
    };
    let report = match format::read_any(&a.scheme)? {
        AnyScheme::Single(spec) => {
            let selection = match (&a.keys, a.exhaustive_keys) {
                (Some(path), _) => KeySelection::Explicit(read_key_file(path, spec.key_bits())?),
                (None, true) => KeySelection::Exhaustive,
                (None, false) => KeySelection::Auto,
            };
            let maxima = trails::core_maxima(spec.core(), &selection, Execution::default())?;
            trails::min_rounds_report(&spec, a.rounds, Some(maxima))?
        }
        AnyScheme::Multi(spec) => {
            if a.keys.is_some() || a.exhaustive_keys {
                return Err(input(
                    "core maxima are only computed for single-branch schemes",
                ));
            }
            trails::min_rounds_report(&spec, a.rounds, None)?
        }
    };
    let text = if ctx.csv() {
        report.to_csv(&modes)
    } else {
        format!("{}\n{}", report.render_text(&modes), report.to_csv(&modes))
    };
    Ok(Output::ok(text))
}

fn trail(ctx: &Ctx, a: TrailArgs) -> CmdResult {
    let spec = read_single(&a.scheme)?;
    let alpha0 = bits(&a.alpha0, spec.dims().state_bits(), "alpha0")?;
    let keys = key_list(a.keys.as_deref(), Some(a.rounds), spec.key_bits())?;
    let maxima = trails::core_maxima(spec.core(), &KeySelection::Auto, Execution::default())?;
    let report = match a.mode {
        TrailMode::Diff => trails::build_diff_trail(&spec, &alpha0, &keys, &maxima),
        TrailMode::Lin => trails::build_lin_trail(&spec, &alpha0, &keys, &maxima),
    }
    .map_err(|e| match e {
        Error::Precondition(m) => input(m),
        other => other.into(),
    })?;
    let passed = report.identity_holds() && report.active_bound_holds;
    let mut text = report.to_string();
    text.push('\n');
    if !ctx.csv() && !report.chain_bound_holds {
        text.push_str("note: chain bound exceeded (inactive rounds have coefficient 1)\n");
    }
    Ok(Output { text, passed })
}

fn fixed_points(ctx: &Ctx, a: SchemeArg) -> CmdResult {
    let (diff, lin) = match format::read_any(&a.scheme)? {
        AnyScheme::Single(s) => (trails::fixed_points(&s)?, trails::fixed_points_linear(&s)?),
        AnyScheme::Multi(m) => (trails::fixed_points(&m)?, trails::fixed_points_linear(&m)?),
    };
    let mut text = String::new();
    if ctx.csv() {
        text.push_str("mode,index,vector\n");
        for (name, s) in [("diff", &diff), ("lin", &lin)] {
            for (i, v) in s.basis_vectors().iter().enumerate() {
                text.push_str(&format!("{name},{i},{v}\n"));
            }
        }
    } else {
        for (name, what, s) in [
            ("diff", "ker A with Tx = x", &diff),
            ("lin", "ker B with T^t x = x", &lin),
        ] {
            text.push_str(&format!("{name}: {what}, dimension {}\n", s.dim()));
            for v in s.basis_vectors() {
                text.push_str(&format!("  {v}\n"));
            }
        }
    }
    Ok(Output::ok(text))
}

fn linear_attack(ctx: &Ctx, a: AttackArgs) -> CmdResult {
    let (spec, closed) = match &a.scheme {
        Some(path) => {
            let spec = read_single(path)?;
            let closed = LinearClosedForm::from_spec(&spec).map_err(|e| input(e.to_string()))?;
            (spec, closed)
        }
        None => {
            ctx.announce_seed();
            let pair = templates::linear_pair(a.n, a.words, ctx.seed)?;
            templates::linear_case(a.n, a.words, pair, None)?
        }
    };
    let width = spec.dims().state_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0xa77ac4);
    let mut random_bits = |len: usize| BitVector::from_bits((0..len).map(|_| rng.random::<bool>()));
    let (mut endpoint_ok, mut recovered) = (0, 0);
    for _ in 0..a.trials {
        let keys: Vec<BitVector> = (0..a.rounds)
            .map(|_| random_bits(spec.key_bits()))
            .collect();
        let xa = random_bits(width);
        let xb = random_bits(width);
        let ya = spec.iterate(&keys, &xa)?.pop().expect("non-empty");
        let yb = spec.iterate(&keys, &xb)?.pop().expect("non-empty");
        if closed.endpoint(&xa, &keys)? == ya {
            endpoint_ok += 1;
        }
        if closed.recover_difference(&ya, &yb, a.rounds)? == xa.xor(&xb) {
            recovered += 1;
        }
    }
    let passed = endpoint_ok == a.trials && recovered == a.trials;
    let text = if ctx.csv() {
        format!(
            "trials,rounds,endpoint_matches,differences_recovered\n{},{},{endpoint_ok},{recovered}\n",
            a.trials, a.rounds
        )
    } else {
        format!(
            "C\n{}D\n{}trials {} rounds {}\nendpoint matches closed form: {endpoint_ok}/{}\nx_a + x_b recovered: {recovered}/{}\n{}\n",
            closed.c.to_text(),
            closed.d.to_text(),
            a.trials,
            a.rounds,
            a.trials,
            a.trials,
            if passed { "PASS" } else { "FAIL" }
        )
    };
    Ok(Output { text, passed })
}
