use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use graphmark::adversary::{AttackBudget, AttackSpec, PairCount};
use graphmark::experiment::{run_experiment, ExperimentConfig};
use graphmark::fit::{fit_power_law, DEFAULT_RESAMPLES};
use graphmark::graph::{identity_distances, read_edge_list, write_edge_list, Graph};
use graphmark::kv::KvBlock;
use graphmark::metrics::{dk2_deviation_with, dk2_euclidean, dk2_series, Dk2Normalization};
use graphmark::models::ModelParams;
use graphmark::separation::{
    check_separation, er_thresholds, max_collision_free_medium, plg_thresholds, unique_degree_prefix, LabelMode,
    Thresholds,
};
use graphmark::watermark::{
    identify, keygen, mark, Identification, IdentifyOptions, MarkKey, Reference, ResampleSource, WatermarkId,
};

#[derive(Parser)]
#[command(name = "graphmark", version, about = "Structural watermarks for random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph from G(n, p) or the random power-law model.
    Generate(GenerateArgs),
    /// Degree statistics, thresholds and separation of a graph.
    Analyze(AnalyzeArgs),
    /// Generate a secret key.
    Keygen(KeygenArgs),
    /// Produce watermarked copies of a graph.
    Mark(MarkArgs),
    /// Find which id a suspect graph carries.
    Identify(IdentifyArgs),
    /// Flip edges of a graph.
    Attack(AttackArgs),
    /// Dump a dK-2 series or compare two graphs.
    Dk2(Dk2Args),
    /// Fit a discrete power law to a degree sequence.
    Fit(FitArgs),
    /// Run the watermarking security experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Parameter file (`key=value` lines).
    #[arg(long, conflicts_with = "model")]
    params: Option<PathBuf>,
    /// er or plg
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Maximum expected degree (plg).
    #[arg(long)]
    m: Option<f64>,
    /// Average expected degree (plg).
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl ModelArgs {
    fn given(&self) -> bool {
        self.params.is_some() || self.model.is_some()
    }

    fn load(&self) -> Result<ModelParams> {
        let kv = match &self.params {
            Some(path) => read_kv(path)?,
            None => {
                let mut kv = KvBlock::default();
                let model = self.model.as_deref().ok_or_else(|| anyhow!("give --model or --params"))?;
                kv.insert("model", model);
                for (key, value) in [("n", self.n.map(|n| n as f64)), ("p", self.p), ("m", self.m), ("w", self.w), ("gamma", self.gamma)] {
                    if let Some(v) = value {
                        kv.insert(key, v);
                    }
                }
                kv
            }
        };
        Ok(ModelParams::from_kv(&kv)?)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output; stdout if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Degree classes used for labeling.
#[derive(Args)]
struct ClassArgs {
    /// Number of high-degree vertices.
    #[arg(long)]
    high: usize,
    /// Number of medium-degree vertices, or `auto` for the largest
    /// collision-free prefix.
    #[arg(long, default_value = "auto")]
    medium: String,
    /// strict or relaxed
    #[arg(long, default_value = "relaxed")]
    mode: LabelMode,
}

impl ClassArgs {
    fn thresholds(&self, g: &Graph) -> Result<Thresholds> {
        let medium = match self.medium.as_str() {
            "auto" => max_collision_free_medium(g, self.high),
            m => m.parse().with_context(|| format!("--medium: expected a count or auto, got {m:?}"))?,
        };
        Ok(Thresholds::with_counts(self.high, medium)?)
    }

    fn reference(&self, g: &Graph) -> Result<Reference> {
        Ok(Reference::new(g, &self.thresholds(g)?, self.mode)?)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Check separation for this many high-degree vertices.
    #[arg(long)]
    high: Option<usize>,
    #[arg(long, default_value = "auto", requires = "high")]
    medium: String,
    /// Derive thresholds from these model parameters instead.
    #[command(flatten)]
    model: ModelArgs,
    /// ε for G(n, p), ε₁ for the power-law model.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon2: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
}

#[derive(Args)]
struct KeygenArgs {
    /// Number of labeled vertices.
    #[arg(long)]
    x: usize,
    /// Vertex count of the graph the key is for.
    #[arg(long)]
    n: usize,
    /// Key length; defaults to ⌊x·t/2⌋.
    #[arg(long)]
    ell: Option<usize>,
    /// Maximum key pairs per vertex.
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MarkArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[command(flatten)]
    classes: ClassArgs,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Probability of a 1 bit.
    #[arg(long, default_value_t = 0.5)]
    resample: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes copy_<i>.el and copy_<i>.id here.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct IdentifyArgs {
    /// The unmarked original.
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    suspect: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Id files; each non-empty line is one candidate.
    #[arg(long, required = true, num_args = 1..)]
    ids: Vec<PathBuf>,
    #[command(flatten)]
    classes: ClassArgs,
    /// Report ⊥ if the closest id is further than this.
    #[arg(long)]
    max_distance: Option<usize>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Attack file (`key=value` lines); replaces the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// random, uniform or capped
    #[arg(long, default_value = "uniform")]
    attack: String,
    #[arg(long)]
    prob: Option<f64>,
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value = "uniform")]
    strategy: String,
    #[arg(long, default_value_t = 0.0)]
    amount: f64,
    #[arg(long)]
    max_total: Option<usize>,
    #[arg(long)]
    max_per_vertex: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Dk2Args {
    #[arg(short, long)]
    input: PathBuf,
    /// Second graph; prints the deviation instead of the series.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Divide by the keys of the first series only.
    #[arg(long)]
    reference_norm: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Edge list whose degrees are fitted.
    #[arg(short, long, conflicts_with = "samples")]
    input: Option<PathBuf>,
    /// One non-negative integer per line.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Bootstrap resamples; 0 skips the p-value.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write gnuplot columns here.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

fn read_kv(path: &Path) -> Result<KvBlock> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    KvBlock::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let list = read_edge_list(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    Ok(list.graph)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_key(path: &Path) -> Result<MarkKey> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    MarkKey::read_from(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn read_ids(paths: &[PathBuf]) -> Result<Vec<WatermarkId>> {
    let mut ids = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            ids.push(line.parse().with_context(|| format!("{}:{}: bad id", path.display(), i + 1))?);
        }
    }
    Ok(ids)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let params = args.model.load()?;
    if let ModelParams::PowerLaw(p) = &params {
        for w in p.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let g = params.sample(args.seed);
    write_edge_list(&g, open_output(args.output.as_deref())?)?;
    let summary = format!("nodes={} edges={}", g.n(), g.edge_count());
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let g = read_graph(&args.input)?;
    let mut kv = KvBlock::default();
    let degrees = g.degrees();
    kv.insert("nodes", g.n());
    kv.insert("edges", g.edge_count());
    kv.insert("max_degree", degrees.iter().max().copied().unwrap_or(0));
    kv.insert("avg_degree", format!("{:.4}", 2.0 * g.edge_count() as f64 / g.n().max(1) as f64));
    kv.insert("unique_degree", unique_degree_prefix(&g));
    let thresholds = if let Some(high) = args.high {
        kv.insert("collision_free_medium", max_collision_free_medium(&g, high));
        let classes = ClassArgs { high, medium: args.medium.clone(), mode: LabelMode::Relaxed };
        Some(classes.thresholds(&g)?)
    } else if args.model.given() {
        let t = match args.model.load()? {
            ModelParams::ErdosRenyi(er) => er_thresholds(g.n(), er.p(), args.epsilon)?,
            ModelParams::PowerLaw(pl) => plg_thresholds(&pl, args.epsilon, args.c1, args.epsilon2, args.c2)?,
        };
        for w in &t.warnings {
            eprintln!("warning: {w}");
        }
        Some(t)
    } else {
        None
    };
    if let Some(t) = thresholds {
        merge(&mut kv, &t.to_kv());
        match check_separation(&g, &t) {
            Ok(report) => merge(&mut kv, &report.to_kv()),
            Err(e) => kv.insert("separated", format!("unavailable ({e})")),
        }
    }
    print!("{}", kv.render());
    Ok(())
}

fn merge(into: &mut KvBlock, from: &KvBlock) {
    for key in from.keys() {
        into.insert(key, from.raw(key).unwrap_or_default());
    }
}

fn keygen_cmd(args: KeygenArgs) -> Result<()> {
    let ell = args.ell.unwrap_or(args.x * args.t / 2);
    let key = keygen(ell, args.n, args.x, args.t, args.seed)?;
    key.write_to(open_output(args.output.as_deref())?)?;
    Ok(())
}

fn mark_cmd(args: MarkArgs) -> Result<()> {
    let g = read_graph(&args.input)?;
    let key = read_key(&args.key)?;
    if key.n() != g.n() {
        bail!("key is for {} vertices, graph has {}", key.n(), g.n());
    }
    let reference = args.classes.reference(&g)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let source = ResampleSource::Constant(args.resample);
    for i in 0..args.copies {
        let copy = mark(&key, &g, reference.labels(), &source, graphmark::rng::derive_seed(args.seed, &[i as u64]))?;
        let graph_path = args.out_dir.join(format!("copy_{i}.el"));
        write_edge_list(&copy.graph, open_output(Some(&graph_path))?)?;
        fs::write(args.out_dir.join(format!("copy_{i}.id")), format!("{}\n", copy.id))?;
        println!("copy={i} changed={} id={}", copy.changed, copy.id);
    }
    Ok(())
}

fn identify_cmd(args: IdentifyArgs) -> Result<()> {
    let original = read_graph(&args.original)?;
    let suspect = read_graph(&args.suspect)?;
    let key = read_key(&args.key)?;
    let ids = read_ids(&args.ids)?;
    let reference = args.classes.reference(&original)?;
    let options = IdentifyOptions { max_distance: args.max_distance };
    match identify(&key, &reference, &ids, &suspect, options)? {
        Identification::Found { index, distance, extracted } => {
            println!("result=found index={index} distance={distance} id={} extracted={extracted}", ids[index]);
        }
        Identification::Bottom(reason) => println!("result=bottom reason={reason}"),
    }
    Ok(())
}

fn attack_spec(args: &AttackArgs) -> Result<(AttackSpec, u64)> {
    if let Some(path) = &args.config {
        let kv = read_kv(path)?;
        let seed = args.seed.or(kv.get("seed")?).unwrap_or(0);
        return Ok((AttackSpec::from_kv(&kv)?, seed));
    }
    let spec = match args.attack.as_str() {
        "random" => AttackSpec::Random { prob: args.prob.ok_or_else(|| anyhow!("--attack random needs --prob"))? },
        "uniform" => AttackSpec::Uniform {
            pairs: match (args.pairs, args.fraction) {
                (Some(k), _) => PairCount::Exact(k),
                (None, Some(f)) => PairCount::Fraction(f),
                (None, None) => bail!("--attack uniform needs --pairs or --fraction"),
            },
        },
        "capped" => {
            let mut budget =
                AttackBudget::new(args.max_total.unwrap_or(usize::MAX), args.max_per_vertex.unwrap_or(usize::MAX));
            if let Some(f) = args.fraction {
                budget = budget.with_fraction(f)?;
            }
            AttackSpec::Capped { strategy: args.strategy.clone(), amount: args.amount, budget }
        }
        other => bail!("unknown attack {other:?}; expected random, uniform or capped"),
    };
    // round-trip through the parser so flags get the same validation as files
    Ok((AttackSpec::from_kv(&spec.to_kv())?, args.seed.unwrap_or(0)))
}

fn attack_cmd(args: AttackArgs) -> Result<()> {
    let g = read_graph(&args.input)?;
    let (spec, seed) = attack_spec(&args)?;
    let h = spec.apply(&g, seed)?;
    write_edge_list(&h, open_output(args.output.as_deref())?)?;
    let d = identity_distances(&g, &h)?;
    let summary = format!("edges={} edit_distance={} vertex_distance={}", h.edge_count(), d.edit, d.vertex);
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn dk2_cmd(args: Dk2Args) -> Result<()> {
    let a = dk2_series(&read_graph(&args.input)?);
    match &args.compare {
        None => a.write_to(open_output(args.output.as_deref())?)?,
        Some(other) => {
            let b = dk2_series(&read_graph(other)?);
            let norm = if args.reference_norm { Dk2Normalization::Reference } else { Dk2Normalization::Union };
            let mut out = open_output(args.output.as_deref())?;
            writeln!(out, "deviation={}", dk2_deviation_with(&a, &b, norm))?;
            writeln!(out, "euclidean={}", dk2_euclidean(&a, &b))?;
            out.flush()?;
        }
    }
    Ok(())
}

fn fit_cmd(args: FitArgs) -> Result<()> {
    let samples: Vec<u64> = match (&args.input, &args.samples) {
        (Some(path), None) => read_graph(path)?.degrees().into_iter().map(|d| d as u64).collect(),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                .map(|(i, l)| l.trim().parse().with_context(|| format!("{}:{}: not an integer", path.display(), i + 1)))
                .collect::<Result<_>>()?
        }
        _ => bail!("give --input or --samples"),
    };
    let fit = fit_power_law(&samples, args.resamples, args.seed)?;
    print!("{}", fit.to_kv().render());
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let mut kv = read_kv(&args.config)?;
    if let Some(seed) = args.seed {
        kv.insert("seed", seed);
    }
    let config = ExperimentConfig::from_kv(&kv).with_context(|| format!("in {}", args.config.display()))?;
    let result = run_experiment(&config)?;
    let mut out = open_output(args.output.as_deref())?;
    out.write_all(result.to_csv().as_bytes())?;
    out.flush()?;
    if let Some(path) = &args.plot_data {
        fs::write(path, result.to_plot_data()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Keygen(a) => keygen_cmd(a),
        Command::Mark(a) => mark_cmd(a),
        Command::Identify(a) => identify_cmd(a),
        Command::Attack(a) => attack_cmd(a),
        Command::Dk2(a) => dk2_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
