use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use foldcons::config::Settings;
use foldcons::corpus::DatasetFormatConfig;

#[derive(Debug, Parser)]
#[command(
    name = "foldcons",
    version,
    about = "Tag recommendation experiments with FoldCons re-ranking"
)]
pub struct Cli {
    /// Directory that relative input paths are resolved against.
    #[arg(long, global = true, env = "FOLDCONS_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn input(&self, p: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a raw dataset, optionally reduce it to a p-core, and write a snapshot.
    Ingest(IngestArgs),
    /// Build the Dice user graph of a corpus and write it as an edge list.
    Graph(GraphArgs),
    /// Train a PITF model on a corpus.
    Train(TrainArgs),
    /// Print the top tags for one post.
    Recommend(RecommendArgs),
    /// Run an F1@K sweep with and without re-ranking.
    Evaluate(EvaluateArgs),
    /// Run the reference, multi-reference or dimension study.
    Study(StudyArgs),
    /// Write a synthetic corpus with planted tag co-occurrence.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    /// Column layout preset.
    #[arg(long, default_value = "tsv", value_parser = ["tsv", "hetrec", "bibsonomy"])]
    pub format: String,
    /// Field delimiter; overrides the preset.
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub user_col: Option<usize>,
    #[arg(long)]
    pub item_col: Option<usize>,
    #[arg(long)]
    pub tag_col: Option<usize>,
    /// Skip the first line.
    #[arg(long)]
    pub header: bool,
    /// Keep tag case instead of lowercasing.
    #[arg(long)]
    pub keep_case: bool,
}

impl FormatArgs {
    pub fn resolve(&self) -> Result<DatasetFormatConfig> {
        let mut cfg = match self.format.as_str() {
            "hetrec" => DatasetFormatConfig::hetrec(),
            "bibsonomy" => DatasetFormatConfig::bibsonomy_tas(),
            _ => DatasetFormatConfig::default(),
        };
        if let Some(d) = self.delimiter {
            cfg.delimiter = d;
        }
        if let Some(c) = self.user_col {
            cfg.user_col = c;
        }
        if let Some(c) = self.item_col {
            cfg.item_col = c;
        }
        if let Some(c) = self.tag_col {
            cfg.tag_col = c;
        }
        cfg.header |= self.header;
        if self.keep_case {
            cfg.lowercase_tags = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn describe(&self, s: &mut Settings, cfg: &DatasetFormatConfig) {
        s.set("format.preset", &self.format);
        s.set("format.delimiter", format!("{:?}", cfg.delimiter));
        s.set(
            "format.columns",
            format!("{},{},{}", cfg.user_col, cfg.item_col, cfg.tag_col),
        );
        s.set("format.header", cfg.header);
        s.set("format.lowercase_tags", cfg.lowercase_tags);
    }
}

/// Options that map onto configuration keys. Flags override `--config`
/// values, which override defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Any configuration key, as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_parser = ["strec", "pitf", "baseline"])]
    pub recommender: Option<String>,
    /// STRec weight of the item frequency.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = ["direct", "path"])]
    pub proximity: Option<String>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub min_proximity: Option<f64>,
    /// Candidates requested from the base recommender.
    #[arg(long)]
    pub pool: Option<usize>,
    #[arg(long, value_parser = ["none", "foldcons", "adapted"])]
    pub rerank: Option<String>,
    #[arg(long, value_parser = ["item", "user", "both"])]
    pub pcm_dims: Option<String>,
    /// Use the unhalved two-dimension PCM sum.
    #[arg(long)]
    pub raw_pcm: bool,
    /// Number of leading candidates used as references.
    #[arg(long)]
    pub refs: Option<usize>,
    /// Profiles consulted by the adapted re-ranker.
    #[arg(long, value_parser = ["user", "item", "both"])]
    pub profile: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub regularization: Option<f64>,
}

impl ConfigArgs {
    /// File values overlaid with flags.
    pub fn settings(&self, cli: &Cli) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => {
                let p = cli.input(p);
                Settings::load(&p).with_context(|| format!("reading config {}", p.display()))?
            }
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got '{kv}'");
            };
            flags.merge(&Settings::parse(&format!("{} = {}", k.trim(), v.trim()))?);
        }
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.set(key, v);
            }
        };
        put("eval.recommender", self.recommender.clone());
        put("strec.alpha", self.alpha.map(|v| v.to_string()));
        put("strec.proximity", self.proximity.clone());
        put("strec.max_depth", self.max_depth.map(|v| v.to_string()));
        put(
            "graph.min_proximity",
            self.min_proximity.map(|v| v.to_string()),
        );
        put("eval.pool", self.pool.map(|v| v.to_string()));
        put("eval.rerank", self.rerank.clone());
        put("pcm.dimensions", self.pcm_dims.clone());
        put("pcm.normalize", self.raw_pcm.then(|| "false".to_owned()));
        put("pcm.references", self.refs.map(|v| v.to_string()));
        put("eval.profile", self.profile.clone());
        put("eval.seed", self.seed.map(|v| v.to_string()));
        put("eval.workers", self.workers.map(|v| v.to_string()));
        put("pitf.dim", self.dim.map(|v| v.to_string()));
        put("pitf.iterations", self.iterations.map(|v| v.to_string()));
        put(
            "pitf.learning_rate",
            self.learning_rate.map(|v| v.to_string()),
        );
        put(
            "pitf.regularization",
            self.regularization.map(|v| v.to_string()),
        );
        s.merge(&flags);
        Ok(s)
    }
}

/// Either a corpus snapshot split by LeavePostOut, or a fixed split.
#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Corpus snapshot; one post per user is held out.
    #[arg(long, required_unless_present = "train", conflicts_with_all = ["train", "test"])]
    pub corpus: Option<PathBuf>,
    /// Raw training file of a fixed split.
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    /// Raw test file of a fixed split.
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Post-core level; 1 keeps everything.
    #[arg(long, short = 'p', default_value_t = 1)]
    pub core: usize,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub item: String,
    /// Number of tags to print.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Trained PITF model; trained on the corpus when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Where to write the run manifest; stderr when absent.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Write each candidate's raw score, PCM and boosted score as TSV.
    #[arg(long, value_name = "PATH")]
    pub explain: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    /// Cutoffs, as `5..10` or a single `5`.
    #[arg(long, default_value = None)]
    pub k: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write per-post records as JSON lines.
    #[arg(long)]
    pub posts: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, value_parser = ["reference", "multi", "dimension"])]
    pub kind: String,
    /// Cutoff of the study.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub posts_per_user: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
}

/// Parses `5..10`, `5..=10` or `5` into an inclusive range.
pub fn parse_k_range(s: &str) -> Result<(usize, usize)> {
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .with_context(|| format!("bad cutoff range '{s}'"))
    };
    Ok((parse(a)?, parse(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("5..10").unwrap(), (5, 10));
        assert_eq!(parse_k_range("5..=10").unwrap(), (5, 10));
        assert_eq!(parse_k_range("7").unwrap(), (7, 7));
        assert!(parse_k_range("a..3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "strec.alpha = 0.3\neval.pool = 60\n").unwrap();
        let cli = Cli::parse_from(["foldcons", "graph", "--corpus", "x", "--output", "y"]);
        let args = ConfigArgs {
            config: Some(path),
            alpha: Some(0.5),
            set: vec!["eval.k_max = 12".into()],
            ..Default::default()
        };
        let s = args.settings(&cli).unwrap();
        assert_eq!(s.get("strec.alpha"), Some("0.5"));
        assert_eq!(s.get("eval.pool"), Some("60"));
        assert_eq!(s.get("eval.k_max"), Some("12"));
        let bad = ConfigArgs {
            set: vec!["strec.alfa=1".into()],
            ..Default::default()
        };
        assert!(bad.settings(&cli).is_err());
    }
}
