use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use log::{info, warn};

use lostpage_core::archive::{
    ArchiveGateway, DamageProvider, EvidenceCache, FixtureDamage, FixturePopularity,
    FixtureTimeMaps, GatewayConfig, NoEvidence, PopularityProvider, TimeMapProvider,
};
use lostpage_core::deep::{CategoryVectorIndex, DeepFeaturizer, GramScheme, DEFAULT_CANDIDATES};
use lostpage_core::nb::{
    cross_validate_uris, majority_baseline, read_model, write_model, CvOptions, NaiveBayesModel,
    OovPolicy, DEFAULT_SMOOTHING,
};
use lostpage_core::ontology::{
    ingest_dmoz, load_index, save_index, CategoryIndex, DmozFormat, FixtureOntologyProvider,
    IngestOptions, NoProvider, OntologyProvider,
};
use lostpage_core::pipeline::{
    analyze_requests, evaluate_deep, open_maybe_gzip, train_first_level, DeepEvalOptions,
    LogFilter, RecommendOptions, RecommendationRequest, Recommender,
};
use lostpage_core::rank::RankWeights;
use lostpage_core::report::corpus_stats;
use lostpage_core::uri::{TokenConfig, TokenMethod, Tokenizer, Variants, WordLexicon};

use crate::config::{config_error, Settings};
use crate::output;
use crate::{
    AnalyzeLogsArgs, Cli, Command, CorpusArgs, DumpFormat, EvaluateDeepArgs, EvaluateL1Args,
    IngestArgs, OovArg, OutputFormat, RecommendArgs, StatsArgs, TrainArgs, EXIT_EMPTY,
};

pub const MODEL_FILE: &str = "first_level.nb";
pub const VECTORS_FILE: &str = "vectors.txt";
const DEFAULT_CACHE_MAX_AGE: i64 = 7 * 24 * 3600;
const DEFAULT_TIMEOUT_SECS: u64 = 30;

pub fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(&a, &settings),
        Command::Train(a) => train(&a, &settings),
        Command::Recommend(a) => recommend(&a, &settings),
        Command::EvaluateL1(a) => evaluate_l1(&a, &settings),
        Command::EvaluateDeep(a) => evaluate_deep_cmd(&a, &settings),
        Command::AnalyzeLogs(a) => analyze_logs(&a, &settings),
        Command::Stats(a) => stats(&a, &settings),
    }
}

/// Parses an optional string flag, reporting failures as configuration errors.
fn parse_flag<T>(name: &str, raw: Option<&str>) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    raw.map(|r| {
        r.parse::<T>()
            .map_err(|e| config_error(format!("bad --{name} {r:?}: {e}")))
    })
    .transpose()
}

/// Accepts RFC 3339, `YYYY-MM-DD[ T]HH:MM:SS` (UTC), `YYYY-MM-DD` and 14-digit archive stamps.
pub fn parse_datetime(raw: &str) -> Result<DateTime<Utc>> {
    let s = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y%m%d%H%M%S"] {
        if let Ok(n) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(n.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc());
    }
    Err(config_error(format!(
        "cannot read {raw:?} as an ISO-8601 datetime"
    )))
}

fn output_format(settings: &Settings, flag: Option<OutputFormat>) -> Result<OutputFormat> {
    settings.get_or("output", flag, OutputFormat::Table)
}

fn guess_format(path: &Path) -> DumpFormat {
    let name = path.to_string_lossy().to_ascii_lowercase();
    if [
        ".rdf", ".rdf.u8", ".u8", ".xml", ".rdf.gz", ".u8.gz", ".xml.gz",
    ]
    .iter()
    .any(|e| name.ends_with(e))
    {
        DumpFormat::Rdf
    } else {
        DumpFormat::Tsv
    }
}

/// Loads the ontology from `--index` or `--corpus`. When neither flag is
/// given, the config file and environment are consulted.
pub fn load_corpus(args: &CorpusArgs, settings: &Settings) -> Result<CategoryIndex> {
    let any = settings.switch("any-top-level", args.any_top_level)?;
    let options = if any {
        IngestOptions::any_top_level()
    } else {
        IngestOptions::default()
    };
    let (index, corpus) = if args.index.is_some() || args.corpus.is_some() {
        (args.index.clone(), args.corpus.clone())
    } else {
        (
            settings.get::<PathBuf>("index", None)?,
            settings.get::<PathBuf>("corpus", None)?,
        )
    };
    let idx = match (index, corpus) {
        (Some(_), Some(_)) => {
            return Err(config_error("give either --index or --corpus, not both"))
        }
        (None, None) => {
            return Err(config_error(
                "an ontology is required: --index <dir> or --corpus <file>",
            ))
        }
        (Some(dir), None) => load_index(&dir, &options)
            .with_context(|| format!("loading index {}", dir.display()))?,
        (None, Some(file)) => {
            let format = settings
                .get("format", args.format)?
                .unwrap_or_else(|| guess_format(&file));
            let format = match format {
                DumpFormat::Tsv => DmozFormat::Tsv,
                DumpFormat::Rdf => DmozFormat::Rdf,
            };
            let reader =
                open_maybe_gzip(&file).with_context(|| format!("opening {}", file.display()))?;
            ingest_dmoz(reader, format, &options)
                .with_context(|| format!("ingesting {}", file.display()))?
        }
    };
    info!(
        "ontology: {} entries in {} categories",
        idx.len(),
        idx.category_count()
    );
    Ok(idx)
}

fn ingest(args: &IngestArgs, settings: &Settings) -> Result<u8> {
    let index = load_corpus(&args.corpus, settings)?;
    save_index(&index, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let r = index.report();
    println!("records seen\t{}", r.records_seen);
    println!("retained\t{}", r.retained);
    println!("excluded category\t{}", r.excluded_category);
    println!("missing fields\t{}", r.missing_fields);
    println!("duplicates\t{}", r.duplicates);
    println!("malformed\t{}", r.malformed);
    println!("categories\t{}", index.category_count());
    Ok(0)
}

fn first_level_config(method: Option<&str>, variants: Option<&str>) -> Result<TokenConfig> {
    let default = TokenConfig::first_level_default();
    let method = parse_flag::<TokenMethod>("method", method)?.unwrap_or(default.method);
    let variants = parse_flag::<Variants>("variants", variants)?.unwrap_or(default.variants);
    Ok(TokenConfig::new(method, variants))
}

fn train(args: &TrainArgs, settings: &Settings) -> Result<u8> {
    let index = load_corpus(&args.corpus, settings)?;
    let grams: GramScheme = settings.get_or(
        "grams",
        parse_flag("grams", args.grams.as_deref())?,
        GramScheme::default(),
    )?;
    let config = first_level_config(args.method.as_deref(), args.variants.as_deref())?;
    let tokenizer = Tokenizer::default();
    let model = train_first_level(&index, &tokenizer, config, DEFAULT_SMOOTHING)?;
    let featurizer = DeepFeaturizer::new(tokenizer, grams);
    let vectors = CategoryVectorIndex::build(&index, &featurizer)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut out = BufWriter::new(File::create(args.out.join(MODEL_FILE))?);
    write_model(&model, &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(args.out.join(VECTORS_FILE))?);
    vectors.write_dump(&mut out)?;
    out.flush()?;
    println!(
        "first-level model\t{config}\t{} classes\t{} features",
        model.classes().len(),
        model.vocabulary_len()
    );
    println!(
        "category vectors\t{grams}-grams\t{} categories\t{} excluded",
        vectors.category_count(),
        vectors.excluded()
    );
    Ok(0)
}

fn load_models(
    dir: Option<&Path>,
    index: &CategoryIndex,
    tokenizer: &Tokenizer,
    featurizer: &DeepFeaturizer,
) -> Result<(NaiveBayesModel, CategoryVectorIndex)> {
    let Some(dir) = dir else {
        let model = train_first_level(
            index,
            tokenizer,
            TokenConfig::first_level_default(),
            DEFAULT_SMOOTHING,
        )?;
        return Ok((model, CategoryVectorIndex::build(index, featurizer)?));
    };
    let path = dir.join(MODEL_FILE);
    let model = read_model(BufReader::new(
        File::open(&path).with_context(|| format!("opening {}", path.display()))?,
    ))
    .with_context(|| format!("reading {}", path.display()))?;
    let path = dir.join(VECTORS_FILE);
    let vectors = CategoryVectorIndex::read_dump(BufReader::new(
        File::open(&path).with_context(|| format!("opening {}", path.display()))?,
    ))
    .with_context(|| format!("reading {}", path.display()))?;
    if vectors.scheme() != featurizer.scheme() {
        warn!(
            "saved vectors use {}-grams but {}-grams were requested; rebuilding",
            vectors.scheme(),
            featurizer.scheme()
        );
        return Ok((model, CategoryVectorIndex::build(index, featurizer)?));
    }
    Ok((model, vectors))
}

#[cfg(feature = "live")]
fn live_timemaps(base: &str, timeout: Duration) -> Result<Arc<dyn TimeMapProvider>> {
    Ok(Arc::new(lostpage_core::archive::MemGatorClient::new(
        base, timeout,
    )?))
}

#[cfg(not(feature = "live"))]
fn live_timemaps(_base: &str, _timeout: Duration) -> Result<Arc<dyn TimeMapProvider>> {
    Err(config_error(
        "this build has no network support; rebuild with `--features live` or use --fixtures",
    ))
}

#[cfg(feature = "live")]
fn live_damage(base: &str, timeout: Duration) -> Result<Arc<dyn DamageProvider>> {
    Ok(Arc::new(lostpage_core::archive::DamageClient::new(
        base, timeout,
    )?))
}

#[cfg(not(feature = "live"))]
fn live_damage(_base: &str, _timeout: Duration) -> Result<Arc<dyn DamageProvider>> {
    Err(config_error(
        "this build has no network support; rebuild with `--features live` or use --fixtures",
    ))
}

fn build_gateway(
    args: &RecommendArgs,
    settings: &Settings,
    now: DateTime<Utc>,
) -> Result<ArchiveGateway> {
    let fixtures: Option<PathBuf> = settings.get("fixtures", args.fixtures.clone())?;
    let aggregator: Option<String> = settings.get("aggregator", args.aggregator.clone())?;
    let damage_service: Option<String> =
        settings.get("damage-service", args.damage_service.clone())?;
    let timeout =
        Duration::from_secs(settings.get_or("timeout", args.timeout, DEFAULT_TIMEOUT_SECS)?);
    let fixture_file = |name: &str| {
        fixtures
            .as_ref()
            .map(|d| d.join(name))
            .filter(|p| p.exists())
    };

    let timemaps: Arc<dyn TimeMapProvider> = match (&aggregator, &fixtures) {
        (Some(url), _) => live_timemaps(url, timeout)?,
        (None, Some(dir)) => Arc::new(FixtureTimeMaps::load(&dir.join("timemaps"))?),
        (None, None) => {
            return Err(config_error(
                "no archive evidence source: give --fixtures <dir> or --aggregator <url>",
            ))
        }
    };
    let popularity: Arc<dyn PopularityProvider> = match fixture_file("popularity.tsv") {
        Some(p) => Arc::new(FixturePopularity::load(&p)?),
        None => {
            warn!("no popularity source; every candidate gets the worst rank");
            Arc::new(NoEvidence)
        }
    };
    let damage: Arc<dyn DamageProvider> = match (&damage_service, fixture_file("damage.tsv")) {
        (Some(url), _) => live_damage(url, timeout)?,
        (None, Some(p)) => Arc::new(FixtureDamage::load(&p)?),
        (None, None) => {
            warn!("no damage source; every memento gets the default damage");
            Arc::new(NoEvidence)
        }
    };
    let defaults = GatewayConfig::default();
    let config = GatewayConfig {
        max_pages: settings.get_or("max-pages", args.max_pages, defaults.max_pages)?,
        parallelism: settings.get_or("parallelism", args.parallelism, defaults.parallelism)?,
        ..defaults
    };
    if config.max_pages == 0 || config.parallelism == 0 {
        return Err(config_error("max-pages and parallelism must be at least 1"));
    }
    let mut gateway = ArchiveGateway::new(timemaps, popularity, damage, config);
    gateway.now = now.timestamp();
    if let Some(path) = settings.get::<PathBuf>("cache", args.cache.clone())? {
        let max_age =
            settings.get_or("cache-max-age", args.cache_max_age, DEFAULT_CACHE_MAX_AGE)?;
        let cache = EvidenceCache::open(&path, max_age)
            .with_context(|| format!("opening cache {}", path.display()))?;
        gateway = gateway.with_cache(Arc::new(cache));
    }
    Ok(gateway)
}

fn secondary_provider(
    args: &RecommendArgs,
    settings: &Settings,
) -> Result<Box<dyn OntologyProvider>> {
    let explicit: Option<PathBuf> = settings.get("wikipedia", args.wikipedia.clone())?;
    let path = match explicit {
        Some(p) => Some(p),
        None => settings
            .get::<PathBuf>("fixtures", args.fixtures.clone())?
            .map(|d| d.join("wikipedia.jsonl"))
            .filter(|p| p.exists()),
    };
    Ok(match path {
        Some(p) => {
            let file = File::open(&p).with_context(|| format!("opening {}", p.display()))?;
            Box::new(
                FixtureOntologyProvider::from_jsonl(BufReader::new(file))
                    .with_context(|| format!("reading {}", p.display()))?,
            )
        }
        None => Box::new(NoProvider),
    })
}

fn recommend(args: &RecommendArgs, settings: &Settings) -> Result<u8> {
    let uri: String = settings
        .get(
            "uri",
            args.uri.clone().or_else(|| args.positional_uri.clone()),
        )?
        .ok_or_else(|| config_error("a URI is required (--uri)"))?;
    let datetime = settings
        .get::<String>("datetime", args.datetime.clone())?
        .map(|d| parse_datetime(&d))
        .transpose()?;
    let now = match settings.get::<String>("now", args.now.clone())? {
        Some(n) => parse_datetime(&n)?,
        None => Utc::now(),
    };
    let top: usize = settings.get_or("top", args.top, 10)?;
    if top == 0 {
        return Err(config_error("--top must be at least 1"));
    }
    let weights: RankWeights = settings.get_or(
        "weights",
        parse_flag("weights", args.weights.as_deref())?,
        RankWeights::default(),
    )?;
    let grams: GramScheme = settings.get_or(
        "grams",
        parse_flag("grams", args.grams.as_deref())?,
        GramScheme::default(),
    )?;
    let temporal_literal = settings.switch("temporal-literal", args.temporal_literal)?;
    let candidates: usize = settings.get_or("candidates", args.candidates, DEFAULT_CANDIDATES)?;
    let format = output_format(settings, args.output)?;

    let index = load_corpus(&args.corpus, settings)?;
    let tokenizer = Tokenizer::default();
    let featurizer = DeepFeaturizer::new(tokenizer.clone(), grams);
    let model_dir: Option<PathBuf> = settings.get("model", args.model.clone())?;
    let (model, vectors) = load_models(model_dir.as_deref(), &index, &tokenizer, &featurizer)?;
    let secondary = secondary_provider(args, settings)?;
    let gateway = build_gateway(args, settings, now)?;

    let recommender = Recommender {
        index: &index,
        secondary: secondary.as_ref(),
        first_level: &model,
        vectors: &vectors,
        featurizer: &featurizer,
        tokenizer: &tokenizer,
        gateway: &gateway,
        options: RecommendOptions {
            now,
            temporal_literal,
            deep_candidates: candidates,
            ..RecommendOptions::default()
        },
    };
    let request = RecommendationRequest {
        uri,
        datetime,
        top_n: top,
        weights,
    };
    let response = recommender.recommend(&request).map_err(|e| match e {
        lostpage_core::pipeline::PipelineError::Config(msg) => config_error(msg),
        other => anyhow::Error::new(other),
    })?;
    print!("{}", output::recommendations(&response, format)?);
    Ok(if response.recommendations.is_empty() {
        EXIT_EMPTY
    } else {
        0
    })
}

/// The method/variant grid compared for first-level classification.
pub fn first_level_grid() -> Vec<TokenConfig> {
    let methods = [
        TokenMethod::Tokens,
        TokenMethod::AllGramsFromTokens,
        TokenMethod::AllGramsFromUri,
    ];
    let variants = [
        Variants::NONE,
        Variants::TLD,
        Variants::TLD_NUMBERS,
        Variants::TLD_STOPWORDS,
    ];
    methods
        .iter()
        .flat_map(|m| variants.iter().map(move |v| TokenConfig::new(*m, *v)))
        .collect()
}

fn evaluate_l1(args: &EvaluateL1Args, settings: &Settings) -> Result<u8> {
    let index = load_corpus(&args.corpus, settings)?;
    let format = output_format(settings, args.output)?;
    let options = CvOptions {
        folds: args.folds,
        seed: settings.get_or("seed", args.seed, 0)?,
        smoothing: DEFAULT_SMOOTHING,
        oov: match args.oov {
            OovArg::Drop => OovPolicy::DropItem,
            OovArg::Ignore => OovPolicy::IgnoreFeatures,
        },
    };
    let configs = if args.all {
        first_level_grid()
    } else {
        vec![first_level_config(
            args.method.as_deref(),
            args.variants.as_deref(),
        )?]
    };
    let tokenizer = Tokenizer::default();
    let labelled: Vec<(&str, &str)> = index
        .entries()
        .iter()
        .map(|e| (e.uri.as_str(), e.category.top()))
        .collect();
    let baseline = majority_baseline(labelled.iter().map(|(_, l)| *l));
    let mut results = Vec::new();
    for config in configs {
        let report = cross_validate_uris(&tokenizer, labelled.iter().copied(), config, &options)
            .map_err(|e| match e {
                lostpage_core::nb::NbError::BadFolds { .. } => config_error(e.to_string()),
                other => anyhow::Error::new(other),
            })?;
        results.push((config, report));
    }
    print!("{}", output::first_level(&results, baseline, format)?);
    Ok(0)
}

fn evaluate_deep_cmd(args: &EvaluateDeepArgs, settings: &Settings) -> Result<u8> {
    let index = load_corpus(&args.corpus, settings)?;
    let format = output_format(settings, args.output)?;
    let grams: GramScheme = settings.get_or(
        "grams",
        parse_flag("grams", args.grams.as_deref())?,
        GramScheme::default(),
    )?;
    let featurizer = DeepFeaturizer::new(Tokenizer::default(), grams);
    let options = DeepEvalOptions {
        holdout_fraction: args.holdout,
        seed: settings.get_or("seed", args.seed, 0)?,
        candidates: settings.get_or("candidates", args.candidates, DEFAULT_CANDIDATES)?,
    };
    let report = evaluate_deep(&index, &featurizer, &WordLexicon::bundled(), &options).map_err(
        |e| match e {
            lostpage_core::pipeline::PipelineError::Config(msg) => config_error(msg),
            other => anyhow::Error::new(other),
        },
    )?;
    for cat in &report.skipped_categories {
        warn!("category {cat} has fewer than two entries; nothing held out");
    }
    print!("{}", output::deep_eval(&report, format)?);
    Ok(0)
}

fn analyze_logs(args: &AnalyzeLogsArgs, settings: &Settings) -> Result<u8> {
    let format = output_format(settings, args.output)?;
    let mut filter = LogFilter::new(None);
    let mut kept = Vec::new();
    for path in &args.logs {
        let reader =
            open_maybe_gzip(path).with_context(|| format!("opening {}", path.display()))?;
        for line in std::io::BufRead::lines(reader) {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            if let Ok(uri) = filter.accept_line(&line) {
                kept.push(uri);
            }
        }
    }
    if let Some(out) = &args.survivors {
        let mut w = BufWriter::new(
            File::create(out).with_context(|| format!("creating {}", out.display()))?,
        );
        for uri in &kept {
            writeln!(w, "{uri}")?;
        }
        w.flush()?;
    }
    let report = analyze_requests(&kept, &WordLexicon::bundled());
    print!("{}", output::log_analysis(&filter.stats, &report, format)?);
    Ok(0)
}

fn stats(args: &StatsArgs, settings: &Settings) -> Result<u8> {
    let index = load_corpus(&args.corpus, settings)?;
    let format = output_format(settings, args.output)?;
    let report = corpus_stats(&index, &WordLexicon::bundled());
    print!("{}", output::uri_report(&report, format)?);
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn datetime_forms() {
        let want = Utc.with_ymd_and_hms(2014, 3, 1, 0, 0, 0).unwrap();
        assert_eq!(parse_datetime("2014-03-01").unwrap(), want);
        assert_eq!(parse_datetime("2014-03-01T00:00:00Z").unwrap(), want);
        assert_eq!(parse_datetime("2014-03-01T02:00:00+02:00").unwrap(), want);
        assert_eq!(parse_datetime("2014-03-01 00:00:00").unwrap(), want);
        assert_eq!(parse_datetime("20140301000000").unwrap(), want);
        assert!(parse_datetime("March 1").is_err());
    }

    #[test]
    fn dump_format_guess() {
        assert_eq!(guess_format(Path::new("content.rdf.u8")), DumpFormat::Rdf);
        assert_eq!(
            guess_format(Path::new("content.rdf.u8.gz")),
            DumpFormat::Rdf
        );
        assert_eq!(guess_format(Path::new("corpus.tsv")), DumpFormat::Tsv);
    }

    #[test]
    fn grid_has_twelve_configurations() {
        assert_eq!(first_level_grid().len(), 12);
    }
}
