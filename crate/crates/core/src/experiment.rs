//! The watermarking security experiment: per trial, generate a key, obtain
//! the graph, mark `k` copies, leak one of them to an adversary and try to
//! identify which copy came back.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{AttackBudget, AttackError, AttackSpec, PairCount};
use crate::graph::{identity_distances, read_edge_list, Graph, GraphError};
use crate::kv::{KvBlock, KvError};
use crate::metrics::{dk2_deviation, dk2_series, Dk2Series};
use crate::models::{ModelError, ModelParams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::separation::{
    er_thresholds, label, max_collision_free_medium, LabelMode, ThresholdError, Thresholds,
};
use crate::watermark::{identify, keygen, mark, Identification, IdentifyOptions, Reference, ResampleSource};

pub const CSV_HEADER: &str =
    "fraction,success_rate,dk2_deviation,edit_distance,vertex_distance,correct,wrong,failed,trials,label_failed";

/// ε used for G(n, p) thresholds when the config gives none.
pub const DEFAULT_ER_EPSILON: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] KvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Thresholds(#[from] ThresholdError),
    #[error("{path}: {source}")]
    Input { path: String, source: GraphError },
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    Model(ModelParams),
    /// Edge-list file, loaded once.
    File(PathBuf),
    Fixed(Graph),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MediumCount {
    Exact(usize),
    /// Largest prefix of the remaining vertices with collision-free bit vectors.
    Auto,
}

/// How the degree classes are sized on each graph.
#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdChoice {
    /// Explicit number of high-degree vertices.
    Counts { high: usize, medium: MediumCount },
    /// The G(n, p) thresholds with the given ε.
    ErdosRenyi { epsilon: f64 },
}

/// The attack family; the sweep supplies its strength.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackKind {
    /// Strength is the fraction of potential edges flipped.
    Uniform,
    /// Strength is the per-pair flip probability.
    Random,
    /// Strength is the budget's fraction of potential edges.
    Capped { strategy: String, amount: f64, max_total: usize, max_per_vertex: usize },
}

impl AttackKind {
    pub fn spec(&self, strength: f64) -> Result<AttackSpec, AttackError> {
        match self {
            AttackKind::Uniform => {
                if !(0.0..=1.0).contains(&strength) {
                    return Err(AttackError::Fraction(strength));
                }
                Ok(AttackSpec::Uniform { pairs: PairCount::Fraction(strength) })
            }
            AttackKind::Random => {
                if !(0.0..=1.0).contains(&strength) {
                    return Err(AttackError::Probability(strength));
                }
                Ok(AttackSpec::Random { prob: strength })
            }
            AttackKind::Capped { strategy, amount, max_total, max_per_vertex } => Ok(AttackSpec::Capped {
                strategy: strategy.clone(),
                amount: *amount,
                budget: AttackBudget::new(*max_total, *max_per_vertex).with_fraction(strength)?,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    /// Sample a new graph for every trial (model sources only).
    pub fresh_graph: bool,
    pub thresholds: ThresholdChoice,
    pub mode: LabelMode,
    /// Key length; `None` uses the maximum `⌊x·t/2⌋`.
    pub ell: Option<usize>,
    pub t: usize,
    pub resample: ResampleSource,
    pub copies: usize,
    pub attack: AttackKind,
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 24] = [
        "model", "n", "p", "m", "w", "gamma", "input", "fresh_graph", "high", "medium", "epsilon", "mode", "ell", "t",
        "resample", "copies", "attack", "strategy", "amount", "max_total", "max_per_vertex", "sweep", "trials", "seed",
    ];

    pub fn from_kv(kv: &KvBlock) -> Result<Self, ExperimentError> {
        kv.reject_unknown(&Self::KEYS)?;
        let source = match (kv.raw("input"), kv.raw("model")) {
            (Some(_), Some(_)) => return Err(ExperimentError::Invalid("give either input or model, not both".into())),
            (Some(path), None) => GraphSource::File(PathBuf::from(path)),
            (None, Some(_)) => GraphSource::Model(ModelParams::from_kv(kv)?),
            (None, None) => return Err(KvError::Missing("model".into()).into()),
        };
        let er_model = matches!(source, GraphSource::Model(ModelParams::ErdosRenyi(_)));
        let thresholds = match kv.get::<usize>("high")? {
            Some(high) => {
                let medium = match kv.raw("medium") {
                    None | Some("auto") => MediumCount::Auto,
                    Some(_) => MediumCount::Exact(kv.require("medium")?),
                };
                ThresholdChoice::Counts { high, medium }
            }
            None if er_model => {
                ThresholdChoice::ErdosRenyi { epsilon: kv.get("epsilon")?.unwrap_or(DEFAULT_ER_EPSILON) }
            }
            None => return Err(KvError::Missing("high".into()).into()),
        };
        let default_mode = if matches!(thresholds, ThresholdChoice::ErdosRenyi { .. }) {
            LabelMode::Strict
        } else {
            LabelMode::Relaxed
        };
        let ell = match kv.raw("ell") {
            None | Some("auto") => None,
            Some(_) => Some(kv.require("ell")?),
        };
        let resample = match kv.raw("resample") {
            None => ResampleSource::default(),
            Some("model") => match &source {
                GraphSource::Model(m) => ResampleSource::Model(*m),
                _ => return Err(ExperimentError::Invalid("resample=model needs a model source".into())),
            },
            Some(_) => ResampleSource::Constant(kv.require("resample")?),
        };
        let attack = match kv.raw("attack").unwrap_or("uniform") {
            "uniform" => AttackKind::Uniform,
            "random" => AttackKind::Random,
            "capped" => AttackKind::Capped {
                strategy: kv.get("strategy")?.unwrap_or_else(|| "uniform".to_string()),
                amount: kv.get("amount")?.unwrap_or(0.0),
                max_total: kv.get("max_total")?.unwrap_or(usize::MAX),
                max_per_vertex: kv.get("max_per_vertex")?.unwrap_or(usize::MAX),
            },
            other => return Err(AttackError::UnknownAttack(other.to_string()).into()),
        };
        let config = ExperimentConfig {
            source,
            fresh_graph: kv.get("fresh_graph")?.unwrap_or(true),
            thresholds,
            mode: kv.get("mode")?.unwrap_or(default_mode),
            ell,
            t: kv.get("t")?.unwrap_or(1),
            resample,
            copies: kv.get("copies")?.unwrap_or(10),
            attack,
            sweep: kv.list("sweep")?.unwrap_or_else(|| vec![0.0]),
            trials: kv.get("trials")?.unwrap_or(10),
            seed: kv.get("seed")?.unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::Invalid("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(ExperimentError::Invalid("sweep is empty".into()));
        }
        if self.copies == 0 {
            return Err(ExperimentError::Invalid("copies must be at least 1".into()));
        }
        if self.t == 0 {
            return Err(ExperimentError::Invalid("t must be at least 1".into()));
        }
        for &s in &self.sweep {
            self.attack.spec(s)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Correct,
    Wrong,
    /// ⊥ from identification.
    Bottom,
    /// The original graph could not be labeled; nothing was marked.
    LabelFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub outcome: TrialOutcome,
    /// Present when a leaked copy was produced.
    pub dk2_deviation: Option<f64>,
    pub edit_distance: Option<usize>,
    pub vertex_distance: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub strength: f64,
    pub trials: usize,
    pub correct: usize,
    pub wrong: usize,
    /// ⊥ results, label failures included.
    pub failed: usize,
    pub label_failed: usize,
    /// Means over the trials that produced a leaked copy; NaN if none did.
    pub dk2_deviation: f64,
    pub edit_distance: f64,
    pub vertex_distance: f64,
}

impl SweepPoint {
    pub fn success_rate(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }

    fn from_records(strength: f64, records: &[TrialRecord]) -> Self {
        let count = |o: TrialOutcome| records.iter().filter(|r| r.outcome == o).count();
        let mean = |xs: Vec<f64>| if xs.is_empty() { f64::NAN } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        let label_failed = count(TrialOutcome::LabelFailed);
        SweepPoint {
            strength,
            trials: records.len(),
            correct: count(TrialOutcome::Correct),
            wrong: count(TrialOutcome::Wrong),
            failed: count(TrialOutcome::Bottom) + label_failed,
            label_failed,
            dk2_deviation: mean(records.iter().filter_map(|r| r.dk2_deviation).collect()),
            edit_distance: mean(records.iter().filter_map(|r| r.edit_distance.map(|d| d as f64)).collect()),
            vertex_distance: mean(records.iter().filter_map(|r| r.vertex_distance.map(|d| d as f64)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub points: Vec<SweepPoint>,
    /// Per sweep point, per trial.
    pub records: Vec<Vec<TrialRecord>>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                p.strength,
                p.success_rate(),
                p.dk2_deviation,
                p.edit_distance,
                p.vertex_distance,
                p.correct,
                p.wrong,
                p.failed,
                p.trials,
                p.label_failed
            )
            .unwrap();
        }
        out
    }

    /// Whitespace-separated columns for gnuplot.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("# fraction success_rate dk2_deviation\n");
        for p in &self.points {
            writeln!(out, "{:e} {} {}", p.strength, p.success_rate(), p.dk2_deviation).unwrap();
        }
        out
    }
}

/// What a trial needs to know about the original graph.
struct Prepared {
    graph: Graph,
    series: Dk2Series,
    reference: Result<Reference, ()>,
}

fn thresholds_for(g: &Graph, choice: &ThresholdChoice, source: &GraphSource) -> Result<Thresholds, ExperimentError> {
    match choice {
        ThresholdChoice::Counts { high, medium } => {
            let medium = match medium {
                MediumCount::Exact(m) => *m,
                MediumCount::Auto => max_collision_free_medium(g, *high),
            };
            Ok(Thresholds::with_counts(*high, medium)?)
        }
        ThresholdChoice::ErdosRenyi { epsilon } => {
            let p = match source {
                GraphSource::Model(ModelParams::ErdosRenyi(er)) => er.p(),
                _ => {
                    // edge density of the observed graph
                    g.edge_count() as f64 / crate::graph::pair_count(g.n()).max(1) as f64
                }
            };
            Ok(er_thresholds(g.n(), p, *epsilon)?)
        }
    }
}

fn prepare(g: Graph, config: &ExperimentConfig) -> Result<Prepared, ExperimentError> {
    let thresholds = thresholds_for(&g, &config.thresholds, &config.source)?;
    let reference = label(&g, &thresholds, config.mode).map(|l| Reference::from_labels(&g, l)).map_err(|_| ());
    Ok(Prepared { series: dk2_series(&g), graph: g, reference })
}

fn run_trial(prepared: &Prepared, config: &ExperimentConfig, strength: f64, seed: u64) -> TrialRecord {
    let failed = TrialRecord { outcome: TrialOutcome::LabelFailed, dk2_deviation: None, edit_distance: None, vertex_distance: None };
    let Ok(reference) = &prepared.reference else { return failed };
    let g = &prepared.graph;
    let labels = reference.labels();
    let x = labels.len();
    let ell = config.ell.unwrap_or(x * config.t / 2);
    let Ok(key) = keygen(ell, g.n(), x, config.t, derive_seed(seed, &[1])) else { return failed };
    let copies: Vec<_> = (0..config.copies)
        .map(|i| mark(&key, g, labels, &config.resample, derive_seed(seed, &[2, i as u64])))
        .collect::<Result<_, _>>()
        .expect("key ranks fit the labeled vertices");
    let leaked = rng_from_seed(derive_seed(seed, &[3])).random_range(0..copies.len());
    let suspect = if strength == 0.0 {
        copies[leaked].graph.clone()
    } else {
        let spec = config.attack.spec(strength).expect("sweep validated");
        spec.apply(&copies[leaked].graph, derive_seed(seed, &[4])).expect("attack validated")
    };
    let ids: Vec<_> = copies.iter().map(|c| c.id.clone()).collect();
    let outcome = match identify(&key, reference, &ids, &suspect, IdentifyOptions::default()) {
        Ok(Identification::Found { index, .. }) if ids[index] == ids[leaked] => TrialOutcome::Correct,
        Ok(Identification::Found { .. }) => TrialOutcome::Wrong,
        Ok(Identification::Bottom(_)) | Err(_) => TrialOutcome::Bottom,
    };
    let dist = identity_distances(g, &suspect).expect("attacks keep the vertex count");
    TrialRecord {
        outcome,
        dk2_deviation: Some(dk2_deviation(&prepared.series, &dk2_series(&suspect))),
        edit_distance: Some(dist.edit),
        vertex_distance: Some(dist.vertex),
    }
}

/// Run every (sweep point, trial) pair. Trial `j` of point `i` uses the seed
/// `derive_seed(seed, [i, j])`, so results do not depend on scheduling. A
/// fresh graph for that trial is sampled from `derive_seed(trial_seed, [0])`;
/// a shared graph from `derive_seed(seed, [u64::MAX])`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    let shared = match &config.source {
        GraphSource::Model(m) if !config.fresh_graph => Some(prepare(m.sample(derive_seed(config.seed, &[u64::MAX])), config)?),
        GraphSource::Model(_) => None,
        GraphSource::File(path) => {
            let file = std::fs::File::open(path).map_err(|e| ExperimentError::Input {
                path: path.display().to_string(),
                source: GraphError::Io(e.to_string()),
            })?;
            let list = read_edge_list(std::io::BufReader::new(file))
                .map_err(|source| ExperimentError::Input { path: path.display().to_string(), source })?;
            Some(prepare(list.graph, config)?)
        }
        GraphSource::Fixed(g) => Some(prepare(g.clone(), config)?),
    };
    let tasks: Vec<(usize, usize)> =
        (0..config.sweep.len()).flat_map(|i| (0..config.trials).map(move |j| (i, j))).collect();
    let flat: Vec<TrialRecord> = tasks
        .par_iter()
        .map(|&(i, j)| -> Result<TrialRecord, ExperimentError> {
            let seed = derive_seed(config.seed, &[i as u64, j as u64]);
            let strength = config.sweep[i];
            match (&shared, &config.source) {
                (Some(p), _) => Ok(run_trial(p, config, strength, seed)),
                (None, GraphSource::Model(m)) => {
                    let p = prepare(m.sample(derive_seed(seed, &[0])), config)?;
                    Ok(run_trial(&p, config, strength, seed))
                }
                (None, _) => unreachable!("non-model sources are always shared"),
            }
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<Vec<TrialRecord>> = flat.chunks(config.trials).map(<[TrialRecord]>::to_vec).collect();
    let points = config.sweep.iter().zip(&records).map(|(&s, r)| SweepPoint::from_records(s, r)).collect();
    Ok(ExperimentResult { points, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ErdosRenyiParams, PowerLawParams};

    fn small_plg(sweep: Vec<f64>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            source: GraphSource::Model(ModelParams::PowerLaw(
                PowerLawParams::derive_clamped(1000, 150.0, 10.0, 2.75).unwrap(),
            )),
            fresh_graph: false,
            thresholds: ThresholdChoice::Counts { high: 16, medium: MediumCount::Auto },
            mode: LabelMode::Relaxed,
            ell: None,
            t: 1,
            resample: ResampleSource::default(),
            copies: 5,
            attack: AttackKind::Uniform,
            sweep,
            trials,
            seed: 11,
        }
    }

    #[test]
    fn zero_attack_identifies_every_copy() {
        let res = run_experiment(&small_plg(vec![0.0], 8)).unwrap();
        let p = &res.points[0];
        assert_eq!(p.trials, 8);
        assert_eq!(p.correct, 8, "{p:?}");
        // distances are to the unmarked original, so only marking shows up
        assert!(p.edit_distance > 0.0 && p.vertex_distance <= 1.0, "{p:?}");
    }

    #[test]
    fn heavy_attack_degrades_and_rates_are_exact() {
        let res = run_experiment(&small_plg(vec![0.0, 0.3], 6)).unwrap();
        for p in &res.points {
            assert_eq!(p.correct + p.wrong + p.failed, p.trials);
            assert_eq!(p.success_rate(), p.correct as f64 / p.trials as f64);
        }
        assert!(res.points[1].success_rate() < 1.0, "{:?}", res.points[1]);
        assert!(res.points[1].edit_distance > 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = small_plg(vec![0.0, 1e-3], 4);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
        let csv = run_experiment(&c).unwrap().to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn single_copy_is_never_wrong() {
        let mut c = small_plg(vec![0.0, 0.05, 0.3], 5);
        c.copies = 1;
        for p in run_experiment(&c).unwrap().points {
            assert_eq!(p.wrong, 0);
        }
    }

    #[test]
    fn label_failures_are_bottom_not_errors() {
        let c = ExperimentConfig {
            source: GraphSource::Model(ModelParams::ErdosRenyi(ErdosRenyiParams::new(200, 0.1).unwrap())),
            fresh_graph: true,
            thresholds: ThresholdChoice::ErdosRenyi { epsilon: DEFAULT_ER_EPSILON },
            mode: LabelMode::Strict,
            ell: Some(8),
            t: 1,
            resample: ResampleSource::default(),
            copies: 3,
            attack: AttackKind::Uniform,
            sweep: vec![0.0],
            trials: 4,
            seed: 0,
        };
        let p = &run_experiment(&c).unwrap().points[0];
        // 198 medium vertices cannot have distinct 1-bit vectors
        assert_eq!(p.label_failed, 4);
        assert_eq!(p.failed, 4);
        assert!(p.dk2_deviation.is_nan());
    }

    #[test]
    fn config_parsing() {
        let kv = KvBlock::parse(
            "model=plg\nn=1000\nm=150\nw=10\ngamma=2.75\nhigh=16\nsweep=0, 1e-4,1e-3\ntrials=3\nseed=5\nfresh_graph=false\n",
        )
        .unwrap();
        let c = ExperimentConfig::from_kv(&kv).unwrap();
        assert_eq!(c.thresholds, ThresholdChoice::Counts { high: 16, medium: MediumCount::Auto });
        assert_eq!(c.mode, LabelMode::Relaxed);
        assert_eq!(c.sweep, vec![0.0, 1e-4, 1e-3]);
        assert_eq!(c.copies, 10);
        assert!(!c.fresh_graph);

        let er = ExperimentConfig::from_kv(&KvBlock::parse("model=er\nn=100\np=0.1\n").unwrap()).unwrap();
        assert_eq!(er.mode, LabelMode::Strict);
        assert!(matches!(er.thresholds, ThresholdChoice::ErdosRenyi { .. }));

        for bad in [
            "model=plg\nn=1000\nm=150\nw=10\ngamma=2.75\n",
            "model=er\nn=100\np=0.1\ntrials=0\n",
            "model=er\nn=100\np=0.1\nsweep=\n",
            "model=er\nn=100\np=0.1\nsweep=2\n",
            "model=er\nn=100\np=0.1\ncolour=red\n",
            "input=g.el\nresample=model\nhigh=3\n",
        ] {
            assert!(ExperimentConfig::from_kv(&KvBlock::parse(bad).unwrap()).is_err(), "{bad}");
        }
    }
}
