//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//!
//! Run with `cargo test -p lostpage --test acceptance`. Every expected value
//! here is computed independently of the library (by hand, by brute force or
//! from the fixture files themselves).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use lostpage_core::archive::{
    ArchiveGateway, DamageEvidence, DamageSource, FixtureTimeMaps, GatewayConfig, NoEvidence,
    PopularityEvidence,
};
use lostpage_core::deep::{
    prune_tree, CategoryVectorIndex, DeepClassifier, DeepFeaturizer, GramScheme,
};
use lostpage_core::nb::{
    cross_validate_uris, majority_baseline, rank_scores, Classification, CvOptions, EvalReport,
    NaiveBayesModel, OovPolicy,
};
use lostpage_core::ontology::{
    ingest_dmoz, CategoryIndex, CategoryPath, DmozFormat, IngestOptions,
};
use lostpage_core::pipeline::{filter_access_log, open_maybe_gzip, split_holdout};
use lostpage_core::rank::{
    archival_quality, popularity_score, temporal_score, uri_similarity, TemporalInputs,
};
use lostpage_core::uri::{
    all_gram_count, all_grams, tokenize, TokenBag, TokenConfig, TokenMethod, Tokenizer, Variants,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const EPS: f64 = 1e-9;

type Check = Result<String, String>;

type Criterion = (&'static str, fn() -> Check);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS
}

fn load_index(rel: &str) -> Result<CategoryIndex, String> {
    let file = fs::File::open(root().join(rel)).map_err(|e| format!("{rel}: {e}"))?;
    ingest_dmoz(
        std::io::BufReader::new(file),
        DmozFormat::Tsv,
        &IngestOptions::default(),
    )
    .map_err(|e| e.to_string())
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn bag_set(bag: &TokenBag) -> BTreeSet<String> {
    bag.features.iter().cloned().collect()
}

fn tokenization_golden() -> Check {
    let start = Instant::now();
    let uri = "https://odu.edu/compsci";
    let tokens = tokenize(uri, TokenMethod::Tokens, Variants::NONE).map_err(|e| e.to_string())?;
    let from_tokens = tokenize(uri, TokenMethod::AllGramsFromTokens, Variants::NONE)
        .map_err(|e| e.to_string())?;
    let from_uri =
        tokenize(uri, TokenMethod::AllGramsFromUri, Variants::NONE).map_err(|e| e.to_string())?;

    let want_tokens = set(&["odu", "edu", "compsci"]);
    let want_from_tokens = set(&[
        "odu", "edu", "comp", "omps", "mpsc", "psci", "comps", "ompsc", "mpsci", "compsc",
        "ompsci", "compsci",
    ]);
    let want_from_uri = set(&[
        "odue", "dued", "uedu", "educ", "duco", "ucom", "comp", "omps", "mpsc", "psci", "odued",
        "duedu", "ueduc", "educo", "ducom", "ucomp", "comps", "ompsc", "mpsci", "oduedu", "dueduc",
        "ueduco", "educom", "ducomp", "ucomps", "compsc", "ompsci", "odueduc", "dueduco",
        "ueducom", "educomp", "ducomps", "ucompsc", "compsci", "odueduco", "dueducom", "ueducomp",
        "educomps", "ducompsc", "ucompsci",
    ]);
    ensure(bag_set(&tokens) == want_tokens, || {
        format!("tokens {:?}", tokens.features)
    })?;
    ensure(bag_set(&from_tokens) == want_from_tokens, || {
        format!("all-grams-from-tokens {:?}", from_tokens.features)
    })?;
    ensure(bag_set(&from_uri) == want_from_uri, || {
        format!("all-grams-from-uri {:?}", from_uri.features)
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "feature counts {}/{}/{} in {elapsed:?} (4..8-grams over the 13 cleaned letters: \
         10 + 9 + 8 + 7 + 6 = 40)",
        tokens.len(),
        from_tokens.len(),
        from_uri.len()
    ))
}

fn brute_force_grams(s: &str) -> BTreeMap<String, usize> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = BTreeMap::new();
    for n in 4..=8 {
        if chars.len() < n {
            continue;
        }
        for i in 0..=chars.len() - n {
            *out.entry(chars[i..i + n].iter().collect::<String>())
                .or_insert(0) += 1;
        }
    }
    out
}

fn all_gram_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let len = rng.gen_range(0..=40usize);
        let s: String = (0..len)
            .map(|_| rng.gen_range(b'a'..=b'z') as char)
            .collect();
        let got = all_grams(&s);
        let mut multiset = BTreeMap::new();
        for g in &got {
            *multiset.entry(g.clone()).or_insert(0usize) += 1;
        }
        ensure(multiset == brute_force_grams(&s), || {
            format!("case {case}: multiset differs for {s:?}")
        })?;
        let closed: usize = (4..=8).map(|n| len.saturating_sub(n - 1)).sum();
        ensure(got.len() == closed && all_gram_count(len) == closed, || {
            format!("case {case}: count {} vs closed form {closed}", got.len())
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "1000 random strings agree with the sliding-window oracle in {elapsed:?}"
    ))
}

fn naive_bayes_hand_check() -> Check {
    let config = TokenConfig::new(TokenMethod::Tokens, Variants::NONE);
    let doc = |f: &[&str]| TokenBag::new(config, f.iter().map(|s| s.to_string()).collect());
    let docs = [
        (doc(&["a", "b"]), "A"),
        (doc(&["a", "c"]), "A"),
        (doc(&["b", "b", "c"]), "B"),
    ];
    let model = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0)
        .map_err(|e| e.to_string())?;

    // Priors 2/3 and 1/3. Class A holds 4 tokens and B holds 3, so with add-one
    // smoothing over 3 terms P(.|A) = (3, 2, 2)/7 and P(.|B) = (1, 3, 2)/6 for
    // (a, b, c). Query "a b": A ∝ 2/3·6/49 = 4/49, B ∝ 1/3·3/36 = 1/36, so
    // P(A) = 144/193; "c": 4/21 vs 1/9 gives 12/19; "c c": 8/147 vs 1/27 gives 72/121.
    let cases: [(&[&str], f64); 3] = [
        (&["a", "b"], 144.0 / 193.0),
        (&["c"], 12.0 / 19.0),
        (&["c", "c"], 72.0 / 121.0),
    ];
    for (query, want_a) in cases {
        let q: Vec<String> = query.iter().map(|s| s.to_string()).collect();
        let Classification::Label(pred) = model.classify_features(&q) else {
            return Err(format!("{query:?} unclassifiable"));
        };
        let post: BTreeMap<&str, f64> =
            pred.ranking.iter().map(|(c, p)| (c.as_str(), *p)).collect();
        ensure(
            close(post["A"], want_a) && close(post["B"], 1.0 - want_a),
            || format!("{query:?}: posteriors {post:?}, want A={want_a}"),
        )?;
    }

    let classes = model.classes().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let scores: Vec<f64> = (0..classes.len())
            .map(|_| rng.gen_range(-50.0..0.0))
            .collect();
        let shift = rng.gen_range(-1e3..1e3);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let a = rank_scores(&classes, &scores);
        let b = rank_scores(&classes, &shifted);
        ensure(a[0].0 == b[0].0, || {
            format!("argmax moved under shift {shift}")
        })?;
    }
    Ok("posteriors 144/193, 12/19 and 72/121 match; argmax stable under 200 shifts".into())
}

fn cv_arithmetic() -> Check {
    // Truth→prediction counts: A→A 3, A→B 1, B→B 2, B→A 2, C→C 1, C→B 1.
    // A: P 3/5 R 3/4 F1 2/3; B: P 2/4 R 2/4 F1 1/2; C: P 1 R 1/2 F1 2/3.
    let mut pairs = Vec::new();
    for (t, p, n) in [
        ("A", "A", 3),
        ("A", "B", 1),
        ("B", "B", 2),
        ("B", "A", 2),
        ("C", "C", 1),
        ("C", "B", 1),
    ] {
        pairs.extend(std::iter::repeat_n((t, Some(p)), n));
    }
    let r = EvalReport::from_pairs(pairs);
    ensure(close(r.micro_f1, 0.6), || format!("micro {}", r.micro_f1))?;
    ensure(close(r.macro_f1, 11.0 / 18.0), || {
        format!("macro {}", r.macro_f1)
    })?;
    ensure(close(r.weighted_f1, 0.6), || {
        format!("weighted {}", r.weighted_f1)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let n = rng.gen_range(1..60);
        let k = rng.gen_range(1..6u8);
        let pairs: Vec<(String, Option<String>)> = (0..n)
            .map(|_| {
                let t = format!("c{}", rng.gen_range(0..k));
                let p = format!("c{}", rng.gen_range(0..k));
                (t, Some(p))
            })
            .collect();
        let acc = pairs
            .iter()
            .filter(|(t, p)| p.as_deref() == Some(t))
            .count() as f64
            / n as f64;
        let r = EvalReport::from_pairs(pairs);
        ensure(close(r.micro_f1, acc), || {
            format!("case {case}: micro {} vs accuracy {acc}", r.micro_f1)
        })?;
    }
    Ok(
        "micro 0.6, macro 11/18 and weighted 0.6 match; micro F1 = accuracy on 100 random sets"
            .into(),
    )
}

fn desk_scale_classification() -> Check {
    let index = load_index("fixtures/corpus13.tsv")?;
    let labels: Vec<&str> = index.entries().iter().map(|e| e.category.top()).collect();
    let tops: BTreeSet<&str> = labels.iter().copied().collect();
    let baseline = majority_baseline(labels.iter().copied());
    let corpus = || {
        index
            .entries()
            .iter()
            .zip(&labels)
            .map(|(e, l)| (e.uri.as_str(), *l))
    };
    let config = TokenConfig::new(TokenMethod::AllGramsFromUri, Variants::TLD_NUMBERS);
    let ignore = CvOptions {
        oov: OovPolicy::IgnoreFeatures,
        ..CvOptions::default()
    };
    let tokenizer = Tokenizer::default();
    let kept =
        cross_validate_uris(&tokenizer, corpus(), config, &ignore).map_err(|e| e.to_string())?;
    let dropped = cross_validate_uris(&tokenizer, corpus(), config, &CvOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(kept.micro_f1 > baseline, || {
        format!(
            "micro F1 {:.4} does not beat baseline {baseline:.4}",
            kept.micro_f1
        )
    })?;
    Ok(format!(
        "{} entries, {} top-level categories: 10-fold micro F1 {:.4} > majority baseline {baseline:.4} \
         (unseen features ignored); dropping items with unseen features leaves {} testable, micro F1 {:.4}",
        index.len(),
        tops.len(),
        kept.micro_f1,
        dropped.items,
        dropped.micro_f1
    ))
}

fn deep_pipeline() -> Check {
    let index = load_index("fixtures/taxonomy12.tsv")?;
    ensure(index.category_count() == 12, || {
        format!("{} categories", index.category_count())
    })?;
    let featurizer = DeepFeaturizer::new(Tokenizer::default(), GramScheme::AllGram);
    let mut worst_full = 1.0f64;
    for seed in 0..5 {
        let (train, test, _) = split_holdout(&index, 0.2, seed);
        let train = CategoryIndex::from_entries(train);
        let vectors = CategoryVectorIndex::build(&train, &featurizer).map_err(|e| e.to_string())?;
        let classifier = DeepClassifier::new(&train, &vectors, &featurizer);
        let mut full = 0usize;
        let mut level_hits = [0usize; 3];
        for entry in &test {
            let trace = classifier
                .classify(&entry.uri, Some(entry.category.top()))
                .map_err(|e| e.to_string())?;
            let first = trace.candidates.first().map(|c| &c.path);
            ensure(first == Some(&entry.category), || {
                format!("seed {seed}: {} ranked {first:?} first", entry.uri)
            })?;

            let paths: Vec<CategoryPath> =
                trace.candidates.iter().map(|c| c.path.clone()).collect();
            let tree = prune_tree(&paths);
            for p in &paths {
                ensure(tree.nodes().contains(p), || {
                    format!("candidate {p} dropped")
                })?;
            }
            for node in tree.nodes() {
                let related = paths
                    .iter()
                    .any(|p| p == node || p.labels().starts_with(node.labels()));
                ensure(related, || {
                    format!("node {node} is neither a candidate nor an ancestor of one")
                })?;
            }

            let predicted = &trace.outcome.path;
            ensure(paths.contains(predicted), || {
                format!("prediction {predicted} not a candidate")
            })?;
            if predicted == &entry.category {
                full += 1;
            }
            for (k, hit) in level_hits.iter_mut().enumerate() {
                let n = k + 1;
                if predicted.labels().len() >= n
                    && predicted.labels()[..n] == entry.category.labels()[..n]
                {
                    *hit += 1;
                }
            }
        }
        let levels: Vec<f64> = level_hits
            .iter()
            .map(|h| *h as f64 / test.len() as f64)
            .collect();
        ensure(levels.windows(2).all(|w| w[0] >= w[1]), || {
            format!("seed {seed}: levels {levels:?}")
        })?;
        let rate = full as f64 / test.len() as f64;
        worst_full = worst_full.min(rate);
        ensure(rate >= 0.95, || {
            format!("seed {seed}: full-path recovery {rate:.3}")
        })?;
    }
    Ok(format!("5 hold-out splits: true category first, tree invariants hold, worst full-path recovery {worst_full:.3}"))
}

fn ranking_formulas() -> Check {
    let x = 30_000_000u64;
    let m = 538_300u64;
    let pop = |a: u64, n: u64| {
        popularity_score(&PopularityEvidence {
            global_rank: Some(a),
            rank_floor: x,
            archive_count: n,
            archive_count_ceiling: m,
            clamped: false,
        })
    };
    ensure(pop(1, m) == 1.0, || format!("p(1, m) = {}", pop(1, m)))?;
    ensure(pop(x, 1) == 0.0, || format!("p(x, 1) = {}", pop(x, 1)))?;

    for d in [0.0, 0.13, 0.5, 1.0] {
        let q = archival_quality(&DamageEvidence {
            damage: d,
            source: DamageSource::Fixture,
        });
        ensure(close(q, 1.0 - d), || format!("q({d}) = {q}"))?;
    }

    let subsets: Vec<BTreeSet<u8>> = (0u16..256)
        .map(|mask| (0..8).filter(|b| mask >> b & 1 == 1).collect())
        .collect();
    for (ma, a) in subsets.iter().enumerate() {
        for (mb, b) in subsets.iter().enumerate() {
            let inter = (ma & mb).count_ones() as f64;
            let union = (ma | mb).count_ones() as f64;
            let want = if union == 0.0 { 0.0 } else { inter / union };
            ensure(close(uri_similarity(a, b), want), || {
                format!("Jaccard({a:?}, {b:?})")
            })?;
        }
    }

    let day = chrono::Duration::days(1);
    let earliest = Utc.with_ymd_and_hms(1996, 1, 1, 0, 0, 0).unwrap();
    let current = earliest + day * (20 * 365);
    let inputs = |requested, candidate| TemporalInputs {
        requested,
        candidate,
        current,
        earliest,
    };
    let t = |r, c| temporal_score(&inputs(r, c), true).map_err(|e| e.to_string());
    let same = t(current, current)?;
    let far = t(current, earliest)?;
    let mid = t(earliest + day * (10 * 365), earliest + day * (15 * 365))?;
    ensure(
        close(same, 1.0) && close(far, 0.0) && close(mid, 0.75),
        || format!("temporal {same}/{far}/{mid}"),
    )?;
    Ok("popularity 1/0, q = 1 - d, Jaccard over 65536 pairs, temporal 1/0/0.75".into())
}

fn run_recommend() -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lostpage"));
    cmd.current_dir(root());
    for (key, _) in std::env::vars() {
        if key.starts_with("LOSTPAGE_") {
            cmd.env_remove(key);
        }
    }
    let out = cmd
        .args([
            "recommend",
            "http://odu.edu/compsci",
            "--datetime",
            "2014-03-01",
            "--corpus",
            "fixtures/odu/ontology.tsv",
            "--fixtures",
            "fixtures/odu",
            "--now",
            "2018-06-01",
            "--output",
            "records",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out.stdout)
}

fn end_to_end() -> Check {
    let first = run_recommend()?;
    let second = run_recommend()?;
    ensure(first == second, || "repeated runs differ".into())?;

    // archived URIs are exactly the ones with a TimeMap file in the fixture index
    let index = fs::read_to_string(root().join("fixtures/odu/timemaps/index.tsv"))
        .map_err(|e| e.to_string())?;
    let archived: BTreeSet<&str> = index
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split('\t').next())
        .collect();

    let text = String::from_utf8_lossy(&first);
    let mut previous = f64::INFINITY;
    let mut count = 0;
    for line in text.lines() {
        let r: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let uri = r["uri"].as_str().unwrap_or_default();
        ensure(archived.contains(uri), || format!("{uri} has no TimeMap"))?;
        ensure(r["memento"].as_str().is_some_and(|m| !m.is_empty()), || {
            format!("{uri} has no memento")
        })?;
        ensure(!uri.contains("odu.edu/compsci"), || {
            "the request itself was recommended".into()
        })?;
        let f = |k: &str| r[k].as_f64().unwrap_or(f64::NAN);
        let score = f("score");
        let recomputed = 0.25 * (f("t") + f("p") + f("s") + f("q"));
        ensure(close(score, recomputed), || {
            format!("{uri}: score {score} vs weighted sum {recomputed}")
        })?;
        ensure(score <= previous, || {
            format!("{uri}: score {score} above the previous {previous}")
        })?;
        previous = score;
        count += 1;
    }
    ensure(count > 0, || "no recommendations".into())?;
    Ok(format!(
        "{count} archived recommendations, scores descending, byte-identical across runs"
    ))
}

fn access_log_filter() -> Check {
    let reader =
        open_maybe_gzip(&root().join("fixtures/access_log.txt")).map_err(|e| e.to_string())?;
    let (kept, stats) = filter_access_log(reader, None).map_err(|e| e.to_string())?;
    let expected: Vec<String> = fs::read_to_string(root().join("fixtures/access_log.expected"))
        .map_err(|e| e.to_string())?
        .lines()
        .map(str::to_string)
        .collect();
    ensure(stats.lines == 20, || format!("{} lines", stats.lines))?;
    ensure(kept == expected, || format!("survivors {kept:?}"))?;
    ensure(
        stats.non_200 > 0
            && stats.non_html > 0
            && stats.ip_host > 0
            && stats.non_english_cctld > 0
            && stats.duplicate > 0,
        || format!("a rule went unexercised: {stats:?}"),
    )?;
    Ok(format!(
        "{} of {} lines survive, matching the hand-selected list",
        kept.len(),
        stats.lines
    ))
}

fn timemap_parsing() -> Check {
    let dir = root().join("fixtures/odu/timemaps");
    let gateway = ArchiveGateway::new(
        Arc::new(FixtureTimeMaps::load(&dir).map_err(|e| e.to_string())?),
        Arc::new(NoEvidence),
        Arc::new(NoEvidence),
        GatewayConfig::default(),
    );
    // counted by reading each link-format file
    let counts = [
        ("http://cs.gmu.edu", 4, 1),
        ("http://cs.odu.edu", 6, 2),
        ("http://cs.virginia.edu", 3, 1),
        ("http://cs.vt.edu", 2, 1),
        ("http://wm.edu/as/computerscience/?svr=web", 1, 1),
        ("http://radford.edu/content/csat/home/itec.html", 2, 1),
        ("http://cs.jmu.edu", 2, 1),
        ("http://hollins.edu/academics/computersci", 1, 1),
    ];
    for (uri, n, pages) in counts {
        let ev = gateway
            .fetch_timemap(uri)
            .map_err(|e| format!("{uri}: {e}"))?;
        ensure(
            ev.archived && ev.memento_count == n && ev.pages == pages,
            || {
                format!(
                    "{uri}: {} mementos over {} pages",
                    ev.memento_count, ev.pages
                )
            },
        )?;
        ensure(
            ev.memento_datetimes.windows(2).all(|w| w[0] <= w[1]),
            || format!("{uri}: unsorted"),
        )?;
    }
    for uri in [
        "http://mathcs.richmond.edu",
        "https://php.radford.edu/~itec",
    ] {
        match gateway.fetch_timemap(uri) {
            Ok(ev) if !ev.archived => {}
            other => return Err(format!("{uri}: {other:?}")),
        }
    }
    Ok("8 TimeMaps (one paged) give the counted mementos in order; missing TimeMaps are archived=false".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("tokenization golden", tokenization_golden),
        ("all-gram oracle", all_gram_oracle),
        ("naive Bayes hand check", naive_bayes_hand_check),
        ("cross-validation arithmetic", cv_arithmetic),
        ("desk-scale classification", desk_scale_classification),
        ("deep classification", deep_pipeline),
        ("ranking formulas", ranking_formulas),
        ("end-to-end recommendation", end_to_end),
        ("access-log filter", access_log_filter),
        ("TimeMap parsing", timemap_parsing),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
