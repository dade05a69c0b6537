use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use latdec::complexity::{count_pieces_enumerate, piece_table, ENUMERATE_MAX_N};
use latdec::cvp::{Inner, Pipeline};
use latdec::folding::{export_folding_network, folded_piece_set, ReflectionSequence};
use latdec::hld::{export_hld_network, orient_basis, synthesize_all, HldSynthesizer};
use latdec::lattice::{
    coding_gain, family_generator, lll_with_transform, minimum_distance, random_gaussian_generator,
    random_mimo_with_seed, relevant_vectors, set_node_budget, LatticeFile, Provenance, DEFAULT_NODE_BUDGET, LLL_DELTA,
};
use latdec::sim::{
    db_to_linear, histogram, mimo_vr_experiment, points_in_sphere_experiment, run_simulation, Ensemble, LatticeSource,
    SimulationConfig, DEFAULT_MAX_ERRORS, DEFAULT_MAX_TRIALS,
};
use latdec::vr::{estimate_nonvr_volume, lemma1_bound, pe_union_bound};
use latdec::{Error, GeneratorMatrix, LatticeFamily};

/// Lattice decoding toolkit: generation, reduction, decoding, HLD synthesis,
/// folding, piece counting, Monte-Carlo simulation and network export.
#[derive(Parser, Debug)]
#[command(name = "latdec", version)]
struct Cli {
    /// Worker threads for Monte-Carlo and enumeration verbs (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Node budget per enumeration.
    #[arg(long, global = true, env = "LATDEC_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a lattice file for a family or a random ensemble.
    Gen(GenArgs),
    /// LLL-reduce a lattice file.
    Reduce(ReduceArgs),
    /// Decode the points of a CSV file, one `z` row per input row.
    Decode(DecodeArgs),
    /// Estimate the non-Voronoi-reduced part of the fundamental parallelotope.
    AnalyzeVr(AnalyzeVrArgs),
    /// Synthesize per-coordinate HLD decision rules.
    SynthHld(SynthArgs),
    /// Fold the first-coordinate decision of A_n, D_n or E_n.
    Fold(FoldArgs),
    /// Boundary piece counts, or the points-in-ball statistics of a random ensemble.
    Count(CountArgs),
    /// Monte-Carlo error rates.
    Simulate(SimulateArgs),
    /// Export an HLD or folding decoder as a piecewise-linear network.
    ExportNet(ExportArgs),
}

#[derive(Args, Debug)]
struct LatticeArgs {
    /// Lattice file (JSON).
    #[arg(long, conflicts_with_all = ["family", "n"])]
    lattice: Option<PathBuf>,
    /// Lattice family: A, D, E, E8, E6q, Z.
    #[arg(long, requires = "n")]
    family: Option<LatticeFamily>,
    /// Dimension for --family.
    #[arg(long)]
    n: Option<usize>,
}

impl LatticeArgs {
    fn load(&self) -> anyhow::Result<(GeneratorMatrix, Option<LatticeFamily>, String)> {
        match (&self.lattice, self.family, self.n) {
            (Some(path), _, _) => {
                LatticeSource::File { path: path.clone() }.load().with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(family), Some(n)) => {
                if family == LatticeFamily::RandomMimo {
                    bail!(usage("random lattices need `gen --family mimo` first"));
                }
                Ok(LatticeSource::Family { family, n }.load()?)
            }
            _ => bail!(usage("give either --lattice FILE or --family F --n N")),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EnsembleArg {
    ComplexMimo,
    RealGaussian,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::ComplexMimo => Ensemble::ComplexMimo,
            EnsembleArg::RealGaussian => Ensemble::RealGaussian,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// A, D, E, E8, E6q, Z, or mimo for a random lattice.
    #[arg(long)]
    family: LatticeFamily,
    #[arg(long)]
    n: usize,
    /// Seed; required for random lattices.
    #[arg(long)]
    seed: Option<u64>,
    /// Distribution of random lattices.
    #[arg(long, value_enum, default_value_t = EnsembleArg::ComplexMimo)]
    ensemble: EnsembleArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long)]
    lattice: PathBuf,
    /// LLL parameter, in (0.25, 1].
    #[arg(long, default_value_t = LLL_DELTA)]
    delta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// sphere (mld), zf, corner (cp), extended-corner (extcp), hld, folding.
    #[arg(long, default_value = "sphere")]
    inner: Inner,
    /// CSV of received points, n columns, no header.
    #[arg(long)]
    points: PathBuf,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeVrArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Also report the union bound and the quasi-VR bound at this VNR (dB).
    #[arg(long)]
    delta_db: Option<f64>,
    /// JSON report (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Only this coordinate (0-based); default all.
    #[arg(long)]
    coordinate: Option<usize>,
    /// Probe offset; default 1e-4 times the minimum distance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Rotate the basis so that g2..gn span y1 = 0 first.
    #[arg(long)]
    oriented: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FoldArgs {
    /// A, D or E.
    #[arg(long)]
    family: LatticeFamily,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    family: Option<LatticeFamily>,
    #[arg(long)]
    n: usize,
    /// Also count by synthesis (n ≤ 8).
    #[arg(long)]
    enumerate: bool,
    /// Count lattice points in the ball of squared radius 2d² over random lattices.
    #[arg(long, conflicts_with_all = ["family", "enumerate"])]
    ball: bool,
    #[arg(long, default_value_t = 500)]
    lattices: usize,
    #[arg(long, value_enum, default_value_t = EnsembleArg::RealGaussian)]
    ensemble: EnsembleArg,
    /// Required with --ball.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report for --ball.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram CSV for --ball.
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    bin_width: u64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Simulation config (JSON, VNR grid as linear `deltas` or `deltas_db`); its seed is replaced by --seed.
    #[arg(long, conflicts_with = "mimo")]
    config: Option<PathBuf>,
    /// Run the MIMO experiment (sphere, corner, extended-corner) at this even n.
    #[arg(long)]
    mimo: Option<usize>,
    #[arg(long, default_value_t = 100)]
    lattices: usize,
    /// Noise draws per lattice for --mimo.
    #[arg(long, default_value_t = 1_000)]
    trials: u64,
    /// VNR grid in dB for --mimo, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
    deltas_db: Vec<f64>,
    /// Per-point error cap for --config runs that do not set one.
    #[arg(long, default_value_t = DEFAULT_MAX_ERRORS)]
    max_errors: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
    max_trials: u64,
    #[arg(long)]
    seed: u64,
    /// Results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Metadata JSON (default: next to --out with a .json extension).
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Export the folding network (A, D, E families only).
    #[arg(long)]
    folded: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Problem with the request itself, reported with exit code 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_validation() => 1,
        _ => 2,
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(f), value)?;
    Ok(())
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let (g, provenance, name) = if a.family == LatticeFamily::RandomMimo {
        let seed = a.seed.ok_or_else(|| usage("--seed is required for random lattices"))?;
        let ensemble = Ensemble::from(a.ensemble);
        let (g, used) = match ensemble {
            Ensemble::ComplexMimo if !a.n.is_multiple_of(2) => {
                bail!(usage(format!("complex MIMO lattices have even n, got {}", a.n)))
            }
            Ensemble::ComplexMimo => random_mimo_with_seed(a.n / 2, seed)?,
            Ensemble::RealGaussian => random_gaussian_generator(a.n, seed)?,
        };
        let label = match ensemble {
            Ensemble::ComplexMimo => "complex-mimo",
            Ensemble::RealGaussian => "real-gaussian",
        };
        let p = Provenance {
            family: Some(LatticeFamily::RandomMimo),
            seed: Some(used),
            ensemble: Some(label.into()),
            lll_delta: None,
        };
        (g, p, format!("{label} n={} seed={used}", a.n))
    } else {
        let g = family_generator(a.family, a.n)?;
        (g, Provenance { family: Some(a.family), ..Default::default() }, format!("{}{}", a.family, a.n))
    };
    LatticeFile::new(name, &g, provenance).write(&a.out)?;
    Ok(())
}

fn reduce(a: ReduceArgs) -> anyhow::Result<()> {
    let file = LatticeFile::read(&a.lattice)?;
    let out = lll_with_transform(&file.generator()?, a.delta)?;
    let mut provenance = file.provenance.clone();
    provenance.lll_delta = Some(a.delta);
    let identity =
        out.transform.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &v)| v == i64::from(i == j)));
    // A changed family basis no longer has the family's Gram matrix.
    if !identity && provenance.family.is_some_and(|f| f != LatticeFamily::RandomMimo) {
        provenance.family = None;
    }
    LatticeFile::new(format!("{} (LLL)", file.name), &out.basis, provenance).write(&a.out)?;
    Ok(())
}

fn read_points(path: &Path, n: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("{}: row {}: {e}", path.display(), line + 1)))?;
        if row.len() != n {
            bail!(usage(format!("{}: row {} has {} values, expected {n}", path.display(), line + 1, row.len())));
        }
        out.push(row);
    }
    Ok(out)
}

fn decode(a: DecodeArgs) -> anyhow::Result<()> {
    let (g, family, _) = a.lattice.load()?;
    let points = read_points(&a.points, g.n())?;
    let pipeline = Pipeline::new(&g, a.inner, family)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(output(a.out.as_deref())?);
    for y in &points {
        let z = pipeline.decode(y)?.z;
        w.write_record(z.iter().map(i64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

fn analyze_vr(a: AnalyzeVrArgs) -> anyhow::Result<()> {
    let (g, _, name) = a.lattice.load()?;
    let report = estimate_nonvr_volume(&g, a.samples, a.seed)?;
    let d = minimum_distance(&g)?;
    let gamma = coding_gain(&g)?;
    let mut value = json!({
        "lattice": name,
        "verdict": report.verdict(),
        "report": report,
        "minimum_distance": d,
        "coding_gain": gamma,
        "relevant_vectors": relevant_vectors(&g).ok().map(|v| v.len()),
    });
    if let Some(db) = a.delta_db {
        let delta = db_to_linear(db);
        let pe = pe_union_bound(&g, delta, 2.0 * d * d)?;
        value["delta_db"] = json!(db);
        value["pe_union_bound"] = json!(pe);
        if let Some(r) = report.d_oc_sq_over_rho_sq {
            value["quasi_vr_bound"] = json!(lemma1_bound(pe, report.vol_ratio, r, gamma, delta, g.n()));
        }
    }
    let mut w = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &value)?;
    writeln!(w)?;
    Ok(())
}

fn synth_hld(a: SynthArgs) -> anyhow::Result<()> {
    let (mut g, _, _) = a.lattice.load()?;
    if a.oriented {
        g = orient_basis(&g)?.0;
    }
    let dnfs = match a.coordinate {
        Some(i) if i >= g.n() => bail!(usage(format!("coordinate {i} out of range for n = {}", g.n()))),
        Some(i) => vec![HldSynthesizer::new(&g, a.epsilon)?.synthesize(i)?],
        None => synthesize_all(&g, a.epsilon)?,
    };
    for d in &dnfs {
        println!(
            "coordinate={} hyperplanes={} terms={} pieces={}",
            d.coordinate,
            d.hyperplanes.len(),
            d.distinct_terms().len(),
            d.piece_count()
        );
    }
    write_json(&a.out, &dnfs)
}

fn fold_cmd(a: FoldArgs) -> anyhow::Result<()> {
    if !a.family.is_root() {
        bail!(usage(format!("folding needs an A, D or E family, got {}", a.family)));
    }
    let (go, _) = orient_basis(&family_generator(a.family, a.n)?)?;
    let seq = ReflectionSequence::new(a.family, &go)?;
    let dnf = HldSynthesizer::new(&go, None)?.synthesize(0)?;
    let folded = folded_piece_set(a.family, a.n, &dnf)?;
    println!("reflections={} pieces={} folded={}", seq.pairs.len(), dnf.piece_count(), folded.piece_count());
    write_json(&a.out, &json!({ "generator": go.rows(), "reflections": seq, "dnf": folded }))
}

fn count(a: CountArgs) -> anyhow::Result<()> {
    if a.ball {
        let seed = a.seed.ok_or_else(|| usage("--seed is required with --ball"))?;
        let rep = points_in_sphere_experiment(a.n, a.lattices, seed, a.ensemble.into())?;
        println!(
            "n={} lattices={} mean={:.2} mean_with_origin={:.2} skipped={}",
            a.n,
            rep.counts.len(),
            rep.mean,
            rep.mean_with_origin(),
            rep.skipped.len()
        );
        if let Some(p) = &a.out {
            write_json(p, &rep)?;
        }
        if let Some(p) = &a.histogram {
            let mut w = csv::Writer::from_path(p)?;
            for bin in histogram(&rep.counts, a.bin_width) {
                w.serialize(bin)?;
            }
            w.flush()?;
        }
        return Ok(());
    }
    let family = a.family.ok_or_else(|| usage("--family is required unless --ball is given"))?;
    let row = piece_table(family, a.n, None)?;
    if !a.enumerate {
        println!("formula={} folded={}", row.formula, row.folded);
        return Ok(());
    }
    if a.n > ENUMERATE_MAX_N {
        bail!(Error::TooLarge { what: "count --enumerate", n: a.n, max: ENUMERATE_MAX_N });
    }
    let e = count_pieces_enumerate(&family_generator(family, a.n)?)?;
    println!("formula={} folded={} enumerated={}", row.formula, row.folded, e.pieces);
    println!("term_histogram={:?}", e.histogram);
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let report = match (&a.config, a.mimo) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut raw: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let obj = raw.as_object_mut().ok_or_else(|| usage("config must be a JSON object"))?;
            obj.insert("seed".into(), json!(a.seed));
            if let Some(db) = obj.remove("deltas_db") {
                if obj.contains_key("deltas") {
                    bail!(usage("config sets both deltas and deltas_db"));
                }
                let db: Vec<f64> = serde_json::from_value(db).map_err(|e| usage(format!("deltas_db: {e}")))?;
                obj.insert("deltas".into(), json!(db.iter().map(|&d| db_to_linear(d)).collect::<Vec<_>>()));
            }
            obj.entry("stop").or_insert(json!({ "max_errors": a.max_errors, "max_trials": a.max_trials }));
            let config: SimulationConfig =
                serde_json::from_value(raw).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            run_simulation(&config)?
        }
        (None, Some(n)) => {
            if !n.is_multiple_of(2) {
                bail!(usage(format!("--mimo needs an even n, got {n}")));
            }
            let deltas: Vec<f64> = a.deltas_db.iter().map(|&d| db_to_linear(d)).collect();
            mimo_vr_experiment(n / 2, a.lattices, &deltas, a.trials, a.seed)?
        }
        _ => bail!(usage("give either --config FILE or --mimo N")),
    };
    let meta = a.meta.clone().unwrap_or_else(|| a.out.with_extension("json"));
    report.write_files(&a.out, &meta)?;
    for r in &report.rows {
        println!("{} {:.2} dB: {}/{} = {:.3e}", r.decoder, r.delta_db, r.errors, r.trials, r.rate);
    }
    Ok(())
}

fn export_net(a: ExportArgs) -> anyhow::Result<()> {
    let net = if a.folded {
        let family = a.lattice.family.ok_or_else(|| usage("--folded needs --family and --n"))?;
        let n = a.lattice.n.ok_or_else(|| usage("--folded needs --n"))?;
        if !family.is_root() {
            bail!(usage(format!("folding needs an A, D or E family, got {family}")));
        }
        let (go, _) = orient_basis(&family_generator(family, n)?)?;
        let seq = ReflectionSequence::new(family, &go)?;
        let dnf = HldSynthesizer::new(&go, None)?.synthesize(0)?;
        export_folding_network(&seq, &folded_piece_set(family, n, &dnf)?)?
    } else {
        let (g, _, _) = a.lattice.load()?;
        export_hld_network(&synthesize_all(&g, None)?)?
    };
    net.validate()?;
    println!("widths={:?}", net.widths());
    net.write(&a.out)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(k) = cli.workers {
        if k == 0 {
            bail!(usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    if cli.budget == 0 {
        bail!(usage("the node budget must be positive"));
    }
    set_node_budget(cli.budget);
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Reduce(a) => reduce(a),
        Command::Decode(a) => decode(a),
        Command::AnalyzeVr(a) => analyze_vr(a),
        Command::SynthHld(a) => synth_hld(a),
        Command::Fold(a) => fold_cmd(a),
        Command::Count(a) => count(a),
        Command::Simulate(a) => simulate(a),
        Command::ExportNet(a) => export_net(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
