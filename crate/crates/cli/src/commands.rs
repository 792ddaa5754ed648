use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use foldcons::config::Settings;
use foldcons::corpus::{
    leave_post_out, load_fixed_split, p_core, parse_triples, Corpus, Split, Stats,
};
use foldcons::evaluation::{
    evaluate_variants, posts_jsonl, recommend_post, report_table, run_study, study_table,
    EvalConfig, EvalReport, Recommender, RecommenderKind, RerankMode, RerankSpec, StudyKind, Table,
};
use foldcons::foldcons::{rescore, CorpusConfidence};
use foldcons::graph::build_dice_graph;
use foldcons::ids::Dictionary;
use foldcons::recommend::{pitf_train, FactorModel};
use foldcons::snapshot::{read_snapshot, write_snapshot};
use foldcons::synthetic::{generate, SyntheticConfig};

use crate::args::{
    parse_k_range, Cli, EvaluateArgs, GraphArgs, IngestArgs, RecommendArgs, SplitArgs, StudyArgs,
    SynthArgs, TrainArgs,
};
use crate::manifest::{sha256_hex, Outputs, RunManifest};

/// `<path>.manifest.json`
fn sidecar(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn read_input(cli: &Cli, path: &Path, manifest: &mut RunManifest) -> Result<Vec<u8>> {
    let path = cli.input(path);
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    manifest.input(&path, &bytes);
    Ok(bytes)
}

fn snapshot_bytes(corpus: &Corpus) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_snapshot(corpus, &mut buf)?;
    Ok(buf)
}

fn load_corpus(cli: &Cli, path: &Path, manifest: &mut RunManifest) -> Result<Corpus> {
    let bytes = read_input(cli, path, manifest)?;
    let corpus = read_snapshot(bytes.as_slice())
        .with_context(|| format!("loading corpus {}", path.display()))?;
    manifest.corpus_sha256 = Some(sha256_hex(&bytes));
    Ok(corpus)
}

fn stats_table(rows: &[(&str, Stats)]) -> Table {
    Table {
        columns: ["corpus", "users", "items", "tags", "posts", "triples"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .map(|(name, s)| {
                vec![
                    name.to_string(),
                    s.users.to_string(),
                    s.items.to_string(),
                    s.tags.to_string(),
                    s.posts.to_string(),
                    s.triples.to_string(),
                ]
            })
            .collect(),
    }
}

pub fn cmd_ingest(cli: &Cli, args: &IngestArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("ingest");
    let format = args.format.resolve()?;
    if args.core == 0 {
        bail!("core level must be at least 1");
    }
    let bytes = read_input(cli, &args.input, &mut manifest)?;
    let mut dictionary = Dictionary::new();
    let parsed = parse_triples(bytes.as_slice(), &format, &mut dictionary)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    let raw = Corpus {
        dictionary,
        triples: parsed.triples,
    };
    let core = if args.core > 1 {
        raw.restrict(&p_core(&raw.triples, args.core))
    } else {
        raw.clone()
    };
    let snapshot = snapshot_bytes(&core)?;

    args.format.describe(&mut manifest.config, &format);
    manifest.config.set("ingest.core", args.core);
    manifest.corpus_sha256 = Some(sha256_hex(&snapshot));
    let mut outputs = Outputs::new();
    outputs.add(&args.output, snapshot);
    manifest.outputs = outputs.paths();
    outputs.add(sidecar(&args.output), manifest.render());
    outputs.commit()?;

    let core_name = format!("{}-core", args.core);
    let mut rows = vec![("raw", raw.folksonomy().stats())];
    if args.core > 1 {
        rows.push((&core_name, core.folksonomy().stats()));
    }
    write!(out, "{}", stats_table(&rows).to_markdown(&Settings::new()))?;
    writeln!(
        out,
        "{} rows read, {} duplicates collapsed",
        parsed.rows, parsed.duplicates
    )?;
    Ok(())
}

pub fn cmd_graph(cli: &Cli, args: &GraphArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("graph");
    let settings = args.config.settings(cli)?;
    let cfg = EvalConfig::from_settings(&settings)?;
    let corpus = load_corpus(cli, &args.corpus, &mut manifest)?;
    let graph = build_dice_graph(&corpus.folksonomy(), cfg.recommender.min_proximity);
    let mut edges = Vec::new();
    graph.write_edge_list(Some(&corpus.dictionary), &mut edges)?;

    manifest
        .config
        .set("graph.min_proximity", cfg.recommender.min_proximity);
    let mut outputs = Outputs::new();
    outputs.add(&args.output, edges);
    manifest.outputs = outputs.paths();
    outputs.add(sidecar(&args.output), manifest.render());
    outputs.commit()?;
    writeln!(
        out,
        "{} users, {} edges",
        graph.user_count(),
        graph.edge_count()
    )?;
    Ok(())
}

pub fn cmd_train(cli: &Cli, args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("train");
    let settings = args.config.settings(cli)?;
    let pitf = EvalConfig::from_settings(&settings)?.recommender.pitf;
    let corpus = load_corpus(cli, &args.corpus, &mut manifest)?;
    let model = pitf_train(&corpus.folksonomy(), &pitf)?;
    let mut bytes = Vec::new();
    model.write_to(&mut bytes)?;

    pitf.write_settings(&mut manifest.config);
    manifest.seed = Some(pitf.seed);
    let mut outputs = Outputs::new();
    outputs.add(&args.output, bytes);
    manifest.outputs = outputs.paths();
    outputs.add(sidecar(&args.output), manifest.render());
    outputs.commit()?;
    let (u, i, t) = model.shape();
    writeln!(out, "trained {u}x{i}x{t} model, dimension {}", model.dim())?;
    Ok(())
}

pub fn cmd_recommend(cli: &Cli, args: &RecommendArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("recommend");
    let settings = args.config.settings(cli)?;
    let cfg = EvalConfig::from_settings(&settings)?;
    let corpus = load_corpus(cli, &args.corpus, &mut manifest)?;
    let train = corpus.folksonomy();
    let dict = &corpus.dictionary;

    let rec = match (&args.model, cfg.recommender.kind) {
        (Some(path), RecommenderKind::Pitf) => {
            let bytes = read_input(cli, path, &mut manifest)?;
            let model = FactorModel::read_from(bytes.as_slice())?;
            let dims = train.dimensions();
            if model.shape() != (dims.users, dims.items, dims.tags) {
                bail!(
                    "model {} does not match the corpus dimensions",
                    path.display()
                );
            }
            Recommender::Pitf(model)
        }
        (Some(_), kind) => bail!("--model only applies to the pitf recommender, not {kind}"),
        (None, _) => Recommender::fit(&train, &cfg.recommender)?,
    };

    let mut config = cfg.to_settings();
    config.remove("eval.workers");
    config.set("recommend.user", &args.user);
    config.set("recommend.item", &args.item);
    config.set("recommend.k", args.k);
    manifest.config = config;
    manifest.seed = Some(cfg.seed);

    if args.k > cfg.pool {
        bail!("k = {} exceeds the candidate pool {}", args.k, cfg.pool);
    }

    let mut explain = String::from("tag\tscore\tpcm\tboosted\n");
    match (dict.user(&args.user), dict.item(&args.item)) {
        (Some(u), Some(i)) => {
            let (list, candidates, _) =
                recommend_post(&train, &rec, &cfg.rerank, u, i, cfg.pool, args.k)?;
            for e in list.entries() {
                writeln!(out, "{}\t{}", dict.tag_name(e.tag), e.score)?;
            }
            if args.explain.is_some() && !candidates.is_empty() {
                let refs = cfg.rerank.references().resolve(&candidates)?;
                let mut conf = CorpusConfidence::new(&train, cfg.rerank.pcm);
                for r in rescore(&mut conf, &candidates, &refs) {
                    explain.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        dict.tag_name(r.tag),
                        r.score,
                        r.confidence,
                        r.boosted
                    ));
                }
            }
        }
        (None, _) => eprintln!("warning: unknown user '{}', no recommendations", args.user),
        (_, None) => eprintln!("warning: unknown item '{}', no recommendations", args.item),
    }

    let mut outputs = Outputs::new();
    if let Some(path) = &args.explain {
        outputs.add(path, explain);
    }
    manifest.outputs = outputs.paths();
    match &args.manifest {
        Some(path) => {
            manifest.outputs.push(path.clone());
            outputs.add(path, manifest.render());
        }
        None => eprint!("{}", manifest.render()),
    }
    outputs.commit()?;
    Ok(())
}

struct LoadedSplit {
    dictionary: Dictionary,
    split: Split,
    description: &'static str,
}

fn load_split(
    cli: &Cli,
    args: &SplitArgs,
    seed: u64,
    manifest: &mut RunManifest,
) -> Result<LoadedSplit> {
    match (&args.corpus, &args.train, &args.test) {
        (Some(path), _, _) => {
            let corpus = load_corpus(cli, path, manifest)?;
            let split = leave_post_out(&corpus.folksonomy(), seed).context("splitting corpus")?;
            Ok(LoadedSplit {
                dictionary: corpus.dictionary,
                split,
                description: "leave-post-out",
            })
        }
        (None, Some(train), Some(test)) => {
            let format = args.format.resolve()?;
            args.format.describe(&mut manifest.config, &format);
            let train_bytes = read_input(cli, train, manifest)?;
            let test_bytes = read_input(cli, test, manifest)?;
            let (dictionary, split) =
                load_fixed_split(train_bytes.as_slice(), test_bytes.as_slice(), &format)?;
            let mut triples = split.train.triples().to_vec();
            triples.extend(split.test_triples());
            let combined = Corpus {
                dictionary: dictionary.clone(),
                triples,
            };
            manifest.corpus_sha256 = Some(sha256_hex(&snapshot_bytes(&combined)?));
            Ok(LoadedSplit {
                dictionary,
                split,
                description: "fixed",
            })
        }
        _ => bail!("give either --corpus or both --train and --test"),
    }
}

fn report_header(cfg: &EvalConfig, loaded: &LoadedSplit, manifest: &RunManifest) -> Settings {
    let mut h = cfg.to_settings();
    h.remove("eval.workers");
    h.set("split", loaded.description);
    h.set("split.test_posts", loaded.split.test.len());
    if let Some(sha) = &manifest.corpus_sha256 {
        h.set("corpus.sha256", sha);
    }
    h
}

fn per_cutoff(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("evaluate");
    let mut settings = args.config.settings(cli)?;
    if let Some(k) = &args.k {
        let (lo, hi) = parse_k_range(k)?;
        settings.set("eval.k_min", lo);
        settings.set("eval.k_max", hi);
    }
    let mut cfg = EvalConfig::from_settings(&settings)?;
    cfg.record_posts = args.posts;
    let loaded = load_split(cli, &args.split, cfg.seed, &mut manifest)?;

    let rec = Recommender::fit(&loaded.split.train, &cfg.recommender)?;
    let mut specs = vec![RerankSpec::none()];
    if cfg.rerank.mode != RerankMode::None {
        specs.push(cfg.rerank);
    }
    let reports = evaluate_variants(&loaded.split, &rec, &cfg, &specs)?;
    let table = report_table(&reports[0], &reports[1..])?;

    let mut header = report_header(&cfg, &loaded, &manifest);
    header.set("report.unknown_posts", reports[0].unknown_posts);
    if let Some(r) = reports.get(1) {
        header.set("report.applied", per_cutoff(&r.applied));
        header.set(
            "report.negative_contributions",
            per_cutoff(&r.negative_contributions),
        );
    }

    let mut outputs = Outputs::new();
    outputs.add(args.out_dir.join("report.csv"), table.to_csv(&header)?);
    let markdown = table.to_markdown(&header);
    outputs.add(args.out_dir.join("report.md"), markdown.clone());
    if args.posts {
        let lines: String = reports
            .iter()
            .map(|r: &EvalReport| posts_jsonl(r, Some(&loaded.dictionary)))
            .collect();
        outputs.add(args.out_dir.join("posts.jsonl"), lines);
    }
    manifest.config = merged(&manifest.config, &cfg.to_settings());
    manifest.seed = Some(cfg.seed);
    manifest.outputs = outputs.paths();
    outputs.add(args.out_dir.join("manifest.json"), manifest.render());
    outputs.commit()?;
    write!(out, "{markdown}")?;
    Ok(())
}

pub fn cmd_study(cli: &Cli, args: &StudyArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("study");
    let kind: StudyKind = args.kind.parse()?;
    let mut settings = args.config.settings(cli)?;
    if let Some(k) = args.k {
        settings.set("eval.k_min", k);
        settings.set("eval.k_max", k);
    }
    let cfg = EvalConfig::from_settings(&settings)?;
    let loaded = load_split(cli, &args.split, cfg.seed, &mut manifest)?;
    let rec = Recommender::fit(&loaded.split.train, &cfg.recommender)?;
    let study = run_study(&loaded.split, &rec, &cfg, kind)?;
    let table = study_table(&study);

    let mut header = report_header(&cfg, &loaded, &manifest);
    header.set("study", kind);
    header.set("study.k", study.k);
    let mut outputs = Outputs::new();
    outputs.add(
        args.out_dir.join(format!("{kind}.csv")),
        table.to_csv(&header)?,
    );
    let markdown = table.to_markdown(&header);
    outputs.add(args.out_dir.join(format!("{kind}.md")), markdown.clone());
    manifest.config = merged(&manifest.config, &cfg.to_settings());
    manifest.config.set("study", kind);
    manifest.seed = Some(cfg.seed);
    manifest.outputs = outputs.paths();
    outputs.add(args.out_dir.join("manifest.json"), manifest.render());
    outputs.commit()?;
    write!(out, "{markdown}")?;
    Ok(())
}

pub fn cmd_synth(_cli: &Cli, args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::new("synth");
    let mut cfg = SyntheticConfig {
        seed: args.seed,
        ..Default::default()
    };
    if let Some(v) = args.users {
        cfg.users = v;
    }
    if let Some(v) = args.posts_per_user {
        cfg.posts_per_user = v;
    }
    if let Some(v) = args.topics {
        cfg.topics = v;
    }
    let corpus = generate(&cfg)?;
    let snapshot = snapshot_bytes(&corpus)?;
    for (k, v) in [
        ("synth.users", cfg.users.to_string()),
        ("synth.topics", cfg.topics.to_string()),
        ("synth.tags_per_topic", cfg.tags_per_topic.to_string()),
        ("synth.items_per_topic", cfg.items_per_topic.to_string()),
        ("synth.posts_per_user", cfg.posts_per_user.to_string()),
        ("synth.topics_per_user", cfg.topics_per_user.to_string()),
        ("synth.personal_tags", cfg.personal_tags.to_string()),
        ("synth.personal_rate", cfg.personal_rate.to_string()),
        ("synth.anchor_rate", cfg.anchor_rate.to_string()),
        ("synth.core_rate", cfg.core_rate.to_string()),
        ("synth.extra_tags", cfg.extra_tags.to_string()),
    ] {
        manifest.config.set(k, v);
    }
    manifest.seed = Some(cfg.seed);
    manifest.corpus_sha256 = Some(sha256_hex(&snapshot));
    let mut outputs = Outputs::new();
    outputs.add(&args.output, snapshot);
    manifest.outputs = outputs.paths();
    outputs.add(sidecar(&args.output), manifest.render());
    outputs.commit()?;
    write!(
        out,
        "{}",
        stats_table(&[("synthetic", corpus.folksonomy().stats())]).to_markdown(&Settings::new())
    )?;
    Ok(())
}

fn merged(a: &Settings, b: &Settings) -> Settings {
    let mut s = a.clone();
    s.merge(b);
    s
}
