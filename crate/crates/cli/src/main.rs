//! `hosc`: build, verify, encode, decode and simulate higher-order staircase codes.

mod bits;
mod presets;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hosc::codec::{Decoder, DecoderConfig, Encoder, Freeze, Rectangle, Schedule};
use hosc::construction::{HoscSpec, Layout};
use hosc::dts::{self, DifferenceTriangleSet, Objective, SearchParams, SearchStatus};
use hosc::net::{self, NetSpec};
use hosc::sim::{self, SimConfig, StopRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "hosc", version, about = "Higher-order staircase code toolkit")]
struct Cli {
    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "HOSC_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code, verify its structure and write the spec file.
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        /// Constraint periods covered by the structural check.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for optimal difference triangle sets.
    DtsSearch {
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "M")]
        m: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Scope)]
        objective: ObjectiveArg,
        /// Largest scope to consider.
        #[arg(long)]
        cap: Option<u64>,
        /// Report every optimal set, not only the first.
        #[arg(long)]
        all: bool,
        /// Seconds before giving up.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine two perfect sets, or iterate a family from a seed.
    DtsCombine {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: Option<PathBuf>,
        /// Iterate `Z_i = combine(Z_{i-1}, X)` this many times instead.
        #[arg(long)]
        iterations: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a set of matrices forms a net.
    NetVerify {
        /// Net file; otherwise a built-in family is checked.
        #[arg(long)]
        net: Option<PathBuf>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long)]
        block_side: Option<u64>,
        #[arg(long, value_enum, default_value_t = NetFamily::Shift)]
        family: NetFamily,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode raw bytes into packed rectangles.
    Encode {
        #[arg(long)]
        spec: PathBuf,
        /// Input bytes (stdin if omitted).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Zero-information rectangles appended at the end.
        #[arg(long)]
        tail: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pass packed rectangles through a binary symmetric channel.
    Channel {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode packed rectangles back to bytes.
    Decode {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "W")]
        w: Option<usize>,
        #[arg(long = "I", default_value_t = 3)]
        i: usize,
        /// Must match the value used when encoding.
        #[arg(long)]
        tail: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo bit error rates over a binary symmetric channel.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "W")]
        w: Option<usize>,
        #[arg(long = "I")]
        i: Option<usize>,
        /// Crossover probability; repeatable.
        #[arg(long = "p")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        min_errors: u64,
        #[arg(long, default_value_t = 10_000_000_000)]
        max_bits: u64,
        /// BER target behind the zero-error rule.
        #[arg(long, default_value_t = 1e-7)]
        target_ber: f64,
        /// Data rectangles per independent stream.
        #[arg(long, default_value_t = 1000)]
        chunk: usize,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Oldest)]
        schedule: ScheduleArg,
        /// Decode every constraint on every pass.
        #[arg(long)]
        decode_all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn simulation CSV files into gnuplot data blocks.
    Plotdata {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// Spec file written by `construct`.
    #[arg(long, conflicts_with_all = ["l", "m", "block_side", "chains", "dts", "net", "parity_bits", "preset"])]
    spec: Option<PathBuf>,
    /// Named parameter set (see `presets` in the README).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    block_side: Option<usize>,
    #[arg(long = "C")]
    chains: Option<usize>,
    /// DTS file, one ruler per line; the first minimum-scope set otherwise.
    #[arg(long)]
    dts: Option<PathBuf>,
    /// Net file; a shift net otherwise.
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    parity_bits: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Scope,
    Slen,
    Pareto,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetFamily {
    Shift,
    Involution,
    Field,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Oldest,
    Newest,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
struct StructuralFailure(String);

impl std::fmt::Display for StructuralFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for StructuralFailure {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage problems are configuration errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let structural = e.downcast_ref::<StructuralFailure>().is_some()
                || matches!(
                    e.downcast_ref::<hosc::Error>(),
                    Some(hosc::Error::Structural(_) | hosc::Error::NotADts { .. })
                );
            ExitCode::from(if structural { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.workers == Some(0) {
        bail!("worker count must be positive");
    }
    if let Some(n) = cli.workers {
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.cmd {
        Command::Construct { code, horizon, out } => construct(&code, horizon, out.as_deref()),
        Command::DtsSearch { l, m, objective, cap, all, time_limit, out } => {
            dts_search(l, m, objective, cap, all, time_limit, out.as_deref())
        }
        Command::DtsCombine { x, y, iterations, out } => dts_combine(&x, y.as_deref(), iterations, out.as_deref()),
        Command::NetVerify { net, m, block_side, family, out } => {
            net_verify(net.as_deref(), m, block_side, family, out.as_deref())
        }
        Command::Encode { spec, input, tail, out } => encode(&spec, input.as_deref(), tail, out.as_deref()),
        Command::Channel { spec, p, seed, input, out } => channel(&spec, p, seed, input.as_deref(), out.as_deref()),
        Command::Decode { spec, w, i, tail, input, out } => {
            decode(&spec, w, i, tail, input.as_deref(), out.as_deref())
        }
        Command::Simulate {
            code,
            w,
            i,
            p,
            seed,
            min_errors,
            max_bits,
            target_ber,
            chunk,
            schedule,
            decode_all,
            out,
        } => {
            let spec = resolve_spec(&code)?;
            let preset = code.preset.as_deref().map(presets::find).transpose()?;
            let w = w.or(preset.map(|p| p.w)).context("--W is required")?;
            let i = i.or(preset.map(|p| p.i)).unwrap_or(3);
            let ps = if p.is_empty() { preset.map(|p| p.ps.to_vec()).unwrap_or_default() } else { p };
            let mut cfg = SimConfig::new(spec, w, i, ps, seed);
            cfg.stop = StopRule { min_bit_errors: min_errors, max_bits, zero_error_target: target_ber };
            cfg.chunk_rects = chunk;
            cfg.schedule = match schedule {
                ScheduleArg::Oldest => Schedule::OldestFirst,
                ScheduleArg::Newest => Schedule::NewestFirst,
            };
            cfg.decode_all = decode_all;
            cfg.workers = cli.workers;
            simulate(&cfg, out.as_deref())
        }
        Command::Plotdata { files, out } => {
            let texts = files
                .iter()
                .map(|f| fs::read_to_string(f).with_context(|| format!("reading {}", f.display())))
                .collect::<Result<Vec<_>>>()?;
            write_output(out.as_deref(), sim::plot_data(&texts)?.as_bytes())
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    match path {
        Some(p) => fs::read(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn resolve_layout(code: &CodeArgs) -> Result<(Layout, Option<usize>)> {
    let preset = code.preset.as_deref().map(presets::find).transpose()?;
    let l = code.l.or(preset.map(|p| p.l));
    let m = code.m.or(preset.map(|p| p.m));
    let side = code.block_side.or(preset.map(|p| p.block_side)).context("--block-side is required")?;
    let chains = code.chains.or(preset.map(|p| p.chains)).unwrap_or(1);
    let dts = match &code.dts {
        Some(path) => DifferenceTriangleSet::parse(&read_text(path)?)?,
        None => {
            let (l, m) = (l.context("--L is required")?, m.context("--M is required")?);
            let mut params = SearchParams::new(l, m, Objective::MinScope, dts::MAX_SCOPE_CAP);
            params.find_all = false;
            let found = dts::search_optimal(&params)?;
            found.solutions.into_iter().next().context("no DTS found")?
        }
    };
    let net = match &code.net {
        Some(path) => NetSpec::parse(&read_text(path)?)?,
        None => net::default_net(dts.degree(), side as u64)?,
    };
    if l.is_some_and(|l| l != dts.num_rulers()) || m.is_some_and(|m| m != dts.degree()) {
        bail!(hosc::Error::InvalidArgument(format!(
            "DTS {dts} does not have the requested (L, M)"
        )));
    }
    if net.block_side() != side {
        bail!(hosc::Error::InvalidArgument(format!(
            "net is over a ring of size {}, block side is {side}",
            net.block_side()
        )));
    }
    let parity = code.parity_bits.or(preset.and_then(|p| p.parity_bits));
    Ok((Layout::new(chains, dts, net)?, parity))
}

fn resolve_spec(code: &CodeArgs) -> Result<HoscSpec> {
    if let Some(path) = &code.spec {
        return Ok(HoscSpec::from_json(&read_text(path)?)?);
    }
    let (layout, parity) = resolve_layout(code)?;
    Ok(HoscSpec::from_layout(layout, parity)?)
}

fn construct(code: &CodeArgs, horizon: Option<usize>, out: Option<&Path>) -> Result<()> {
    let spec = resolve_spec(code)?;
    let span = spec.d_max().div_ceil(spec.l() as u64) as usize;
    let horizon = horizon.unwrap_or(2 * span + 2);
    let report = spec.verify_structure(horizon).map_err(|e| match e {
        hosc::Error::Structural(msg) => anyhow::Error::new(StructuralFailure(msg)),
        other => other.into(),
    })?;
    if !net::verify_net(spec.net()) {
        return Err(StructuralFailure("permutations fail the exhaustive net check".into()).into());
    }
    eprintln!(
        "combined ruler {:?}, rate {:.6}, {} constraints checked, {} steady positions",
        spec.combined_ruler(),
        spec.rate(),
        report.constraints,
        report.steady_positions
    );
    let json = spec.to_json();
    HoscSpec::from_json(&json)?;
    write_output(out, json.as_bytes())
}

fn dts_search(
    l: usize,
    m: usize,
    objective: ObjectiveArg,
    cap: Option<u64>,
    all: bool,
    time_limit: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let objective = match objective {
        ObjectiveArg::Scope => Objective::MinScope,
        ObjectiveArg::Slen => Objective::MinSumOfLengths,
        ObjectiveArg::Pareto => Objective::Pareto,
    };
    let cap = match (cap, objective) {
        (Some(c), _) => c,
        (None, Objective::MinSumOfLengths) => {
            bail!(hosc::Error::InvalidArgument("--cap is required for --objective slen".into()))
        }
        (None, _) => dts::MAX_SCOPE_CAP,
    };
    let mut params = SearchParams::new(l, m, objective, cap);
    params.find_all = all;
    params.time_budget = time_limit.map(Duration::from_secs_f64);
    let res = dts::search_optimal(&params)?;
    let mut text = String::new();
    if res.proven_infeasible {
        text.push_str(&format!("# no ({l},{m})-DTS with scope <= {cap}\n"));
    }
    if res.status == SearchStatus::TimedOut {
        text.push_str("# time limit reached; results are not proven optimal\n");
    }
    for (k, d) in res.solutions.iter().enumerate() {
        if k > 0 {
            text.push('\n');
        }
        for line in d.certify().to_text().lines() {
            text.push_str(&format!("# {line}\n"));
        }
        text.push_str(&d.to_text());
    }
    write_output(out, text.as_bytes())
}

fn dts_combine(x: &Path, y: Option<&Path>, iterations: Option<u32>, out: Option<&Path>) -> Result<()> {
    let x = DifferenceTriangleSet::parse(&read_text(x)?)?;
    let text = match (y, iterations) {
        (Some(y), None) => {
            let y = DifferenceTriangleSet::parse(&read_text(y)?)?;
            let group = hosc::algebra::sharply_2_transitive_group(x.degree() as u32 + 1)?;
            let z = dts::combine(&x, &y, &group)?;
            let mut t = String::new();
            for line in z.certify().to_text().lines().filter(|l| !l.starts_with("distances")) {
                t.push_str(&format!("# {line}\n"));
            }
            t + &z.to_text()
        }
        (None, Some(n)) => {
            let fam = dts::generate_family(&x, n, false)?;
            let mut t = String::from("# i L S\n");
            for mem in fam {
                t.push_str(&format!("{} {} {}\n", mem.index, mem.rulers, mem.sum_of_lengths));
            }
            t
        }
        _ => bail!(hosc::Error::InvalidArgument("give exactly one of --y and --iterations".into())),
    };
    write_output(out, text.as_bytes())
}

fn net_verify(
    path: Option<&Path>,
    m: Option<usize>,
    side: Option<u64>,
    family: NetFamily,
    out: Option<&Path>,
) -> Result<()> {
    let net = match path {
        Some(p) => NetSpec::parse(&read_text(p)?)?,
        None => {
            let m = m.context("--M is required without --net")?;
            let side = side.context("--block-side is required without --net")?;
            match family {
                NetFamily::Shift => net::example_shift_net(m, side)?,
                NetFamily::Involution => net::example_involution_net(m, side)?,
                NetFamily::Field => net::field_shift_net(m, side as u32)?,
            }
        }
    };
    let algebraic = net.satisfies_pair_condition();
    let exhaustive = net::verify_net(&net);
    eprintln!("pair condition: {algebraic}, exhaustive check: {exhaustive}");
    if !(algebraic && exhaustive) {
        return Err(StructuralFailure("not a net".into()).into());
    }
    write_output(out, net.to_text().as_bytes())
}

fn default_tail(spec: &HoscSpec) -> usize {
    spec.d_max().div_ceil(spec.l() as u64) as usize
}

fn encode(spec_path: &Path, input: Option<&Path>, tail: Option<usize>, out: Option<&Path>) -> Result<()> {
    let spec = HoscSpec::from_json(&read_text(spec_path)?)?;
    let data = read_input(input)?;
    let mut enc = Encoder::new(&spec);
    let bits = bits::unpack_bytes(&data);
    let per = enc.info_len();
    let mut stream = Vec::new();
    for chunk in bits.chunks(per) {
        let mut info = chunk.to_vec();
        info.resize(per, 0);
        stream.extend(enc.encode_step(&info)?.to_bytes());
    }
    for r in enc.terminate(tail.unwrap_or_else(|| default_tail(&spec))) {
        stream.extend(r.to_bytes());
    }
    write_output(out, &stream)
}

fn split_rectangles(spec: &HoscSpec, bytes: &[u8]) -> Result<Vec<Rectangle>> {
    let rows = spec.chains() * spec.block_side();
    let cols = spec.s();
    let size = Rectangle::byte_len(rows, cols);
    if !bytes.len().is_multiple_of(size) {
        bail!(hosc::Error::InvalidArgument(format!(
            "{} bytes is not a whole number of {size}-byte rectangles",
            bytes.len()
        )));
    }
    bytes
        .chunks(size)
        .map(|c| Rectangle::from_bytes(rows, cols, c).map_err(Into::into))
        .collect()
}

fn channel(spec_path: &Path, p: f64, seed: u64, input: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let spec = HoscSpec::from_json(&read_text(spec_path)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = Vec::new();
    let mut flips = 0;
    for mut r in split_rectangles(&spec, &read_input(input)?)? {
        flips += sim::bsc(r.bits_mut(), p, &mut rng)?;
        stream.extend(r.to_bytes());
    }
    eprintln!("{flips} bits flipped");
    write_output(out, &stream)
}

fn decode(
    spec_path: &Path,
    w: Option<usize>,
    i: usize,
    tail: Option<usize>,
    input: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let spec = HoscSpec::from_json(&read_text(spec_path)?)?;
    let tail = tail.unwrap_or_else(|| default_tail(&spec));
    let rects = split_rectangles(&spec, &read_input(input)?)?;
    if rects.len() < tail {
        bail!(hosc::Error::InvalidArgument(format!("stream is shorter than its {tail}-rectangle tail")));
    }
    let w = w.unwrap_or(2 * default_tail(&spec) + 2);
    let mut cfg = DecoderConfig::new(w, i);
    cfg.recheck = false;
    let mut dec = Decoder::new(&spec, cfg)?;
    let (data, term) = rects.split_at(rects.len() - tail);
    let mut decided = Vec::new();
    for r in data {
        decided.extend(dec.decode_advance(r)?);
    }
    decided.extend(dec.flush(term, Freeze::InfoColumns)?);
    let info: Vec<u8> = decided.iter().flat_map(|r| r.info_bits(spec.info_per_row())).collect();
    let stats = dec.stats();
    eprintln!("{} rectangles, {} flips", decided.len(), stats.flips);
    write_output(out, &bits::pack_bytes(&info))
}

fn simulate(cfg: &SimConfig, out: Option<&Path>) -> Result<()> {
    let res = sim::sweep(cfg)?;
    for pt in &res.points {
        let secs = pt.elapsed.as_secs_f64();
        eprintln!(
            "p={:e} in={:e} out={:e} bits={} errors={}{} ({:.1} Mbit/s)",
            pt.p,
            pt.input_ber(),
            pt.output_ber(),
            pt.info_bits,
            pt.bit_errors,
            if pt.zero_error { " zero-error" } else { "" },
            pt.info_bits as f64 / secs.max(1e-9) / 1e6
        );
    }
    write_output(out, sim::write_csv(&res)?.as_bytes())
}
