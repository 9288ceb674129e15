//! Evidence gathering over the recorded TimeMap, popularity and damage files.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use lostpage_core::archive::{
    ArchiveError, ArchiveGateway, DamageSource, EvidenceCache, FixtureDamage, FixturePopularity,
    FixtureTimeMaps, GatewayConfig, NoEvidence, TimeMapProvider,
};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/odu")
}

fn gateway(config: GatewayConfig) -> ArchiveGateway {
    let mut g = ArchiveGateway::new(
        Arc::new(FixtureTimeMaps::load(&dir().join("timemaps")).unwrap()),
        Arc::new(FixturePopularity::load(&dir().join("popularity.tsv")).unwrap()),
        Arc::new(FixtureDamage::load(&dir().join("damage.tsv")).unwrap()),
        config,
    );
    g.now = 1_528_000_000;
    g
}

#[test]
fn paged_timemap_is_followed() {
    let ev = gateway(GatewayConfig::default())
        .fetch_timemap("http://cs.odu.edu/")
        .unwrap();
    assert!(ev.archived);
    assert_eq!(ev.pages, 2);
    assert_eq!(ev.memento_count, 6);
    assert!(!ev.truncated);
    let years: Vec<i32> = ev
        .memento_datetimes
        .iter()
        .map(|d| d.format("%Y").to_string().parse().unwrap())
        .collect();
    assert_eq!(years, vec![1997, 2003, 2008, 2012, 2014, 2016]);
}

#[test]
fn page_limit_truncates() {
    let cfg = GatewayConfig {
        max_pages: 1,
        ..GatewayConfig::default()
    };
    let ev = gateway(cfg).fetch_timemap("http://cs.odu.edu/").unwrap();
    assert_eq!(ev.memento_count, 3);
    assert!(ev.truncated);
}

#[test]
fn missing_timemap_means_not_archived() {
    let g = gateway(GatewayConfig::default());
    let ev = g.fetch_timemap("http://mathcs.richmond.edu").unwrap();
    assert!(!ev.archived);
    assert_eq!(ev.memento_count, 0);
    assert!(g
        .gather("http://mathcs.richmond.edu", Utc::now())
        .unwrap()
        .is_none());
}

#[test]
fn gathered_candidate_has_nearest_memento_and_evidence() {
    let g = gateway(GatewayConfig::default());
    let req = Utc.with_ymd_and_hms(2014, 3, 1, 0, 0, 0).unwrap();
    let page = g.gather("http://cs.odu.edu", req).unwrap().unwrap();
    assert_eq!(
        page.memento.uri,
        "https://web.archive.org/web/20140226090846/http://cs.odu.edu:80/"
    );
    assert_eq!(page.popularity.global_rank, Some(9000));
    assert_eq!(page.popularity.archive_count, 6);
    assert_eq!(page.damage.damage, 0.05);
    assert_eq!(page.damage.source, DamageSource::Fixture);
}

#[test]
fn unknown_damage_falls_back_to_default() {
    let g = gateway(GatewayConfig::default());
    let req = Utc.with_ymd_and_hms(2014, 3, 1, 0, 0, 0).unwrap();
    let page = g
        .gather("http://hollins.edu/academics/computersci", req)
        .unwrap()
        .unwrap();
    assert_eq!(page.damage.source, DamageSource::DefaultMissing);
    assert_eq!(page.damage.damage, 0.5);
}

#[test]
fn gather_all_keeps_input_order() {
    let g = gateway(GatewayConfig::default());
    let uris: Vec<String> = [
        "http://cs.vt.edu",
        "http://nowhere.example",
        "http://cs.gmu.edu",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let out = g.gather_all(&uris, Utc::now());
    assert_eq!(out.len(), 3);
    assert_eq!(
        out[0].as_ref().unwrap().as_ref().unwrap().uri,
        "http://cs.vt.edu"
    );
    assert!(out[1].as_ref().unwrap().is_none());
    assert_eq!(
        out[2].as_ref().unwrap().as_ref().unwrap().uri,
        "http://cs.gmu.edu"
    );
}

/// Counts calls and fails the first `fail` of them with a timeout.
struct Flaky {
    calls: AtomicUsize,
    fail: usize,
}

impl TimeMapProvider for Flaky {
    fn name(&self) -> &str {
        "flaky"
    }
    fn first_page(&self, uri: &str) -> Result<Option<String>, ArchiveError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        if n < self.fail {
            return Err(ArchiveError::Timeout("slow".into()));
        }
        Ok(Some(format!(
            "<{uri}>; rel=\"original\",\n<https://web.archive.org/web/20100101000000/{uri}>; rel=\"memento\"; datetime=\"Fri, 01 Jan 2010 00:00:00 GMT\""
        )))
    }
    fn page(&self, _url: &str) -> Result<Option<String>, ArchiveError> {
        Ok(None)
    }
}

#[test]
fn retryable_failures_are_retried_once() {
    let flaky = Arc::new(Flaky {
        calls: AtomicUsize::new(0),
        fail: 1,
    });
    let g = ArchiveGateway::new(
        flaky.clone(),
        Arc::new(NoEvidence),
        Arc::new(NoEvidence),
        GatewayConfig::default(),
    );
    assert!(g.fetch_timemap("http://a.com/").unwrap().archived);
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 2);

    let stubborn = Arc::new(Flaky {
        calls: AtomicUsize::new(0),
        fail: 5,
    });
    let g = ArchiveGateway::new(
        stubborn,
        Arc::new(NoEvidence),
        Arc::new(NoEvidence),
        GatewayConfig::default(),
    );
    assert!(matches!(
        g.fetch_timemap("http://a.com/"),
        Err(ArchiveError::Timeout(_))
    ));
}

#[test]
fn cache_serves_repeat_lookups() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cache.jsonl");
    let flaky = Arc::new(Flaky {
        calls: AtomicUsize::new(0),
        fail: 0,
    });
    let cache = Arc::new(EvidenceCache::open(&path, 3600).unwrap());
    let mut g = ArchiveGateway::new(
        flaky.clone(),
        Arc::new(NoEvidence),
        Arc::new(NoEvidence),
        GatewayConfig::default(),
    )
    .with_cache(cache);
    g.now = 1_000_000;
    let a = g.fetch_timemap("http://a.com/").unwrap();
    let b = g.fetch_timemap("http://www.a.com").unwrap();
    assert_eq!(a, b);
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 1);

    // a reopened cache still answers while fresh, and expires afterwards
    let reopened = Arc::new(EvidenceCache::open(&path, 3600).unwrap());
    let mut g = ArchiveGateway::new(
        flaky.clone(),
        Arc::new(NoEvidence),
        Arc::new(NoEvidence),
        GatewayConfig::default(),
    )
    .with_cache(reopened);
    g.now = 1_000_100;
    g.fetch_timemap("http://a.com/").unwrap();
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 1);
    g.now = 1_010_000;
    g.fetch_timemap("http://a.com/").unwrap();
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 2);
}
