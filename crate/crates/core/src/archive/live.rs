//! HTTP clients for a MemGator-style aggregator and a damage service.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;

use super::providers::{DamageProvider, TimeMapProvider};
use super::ArchiveError;

fn client(timeout: Duration) -> Result<Client, ArchiveError> {
    Client::builder()
        .timeout(timeout)
        .user_agent(concat!("lostpage/", env!("CARGO_PKG_VERSION")))
        .build()
        .map_err(|e| ArchiveError::Network(e.to_string()))
}

fn classify(e: reqwest::Error) -> ArchiveError {
    if e.is_timeout() {
        ArchiveError::Timeout(e.to_string())
    } else {
        ArchiveError::Network(e.to_string())
    }
}

fn get_text(client: &Client, url: &str) -> Result<Option<String>, ArchiveError> {
    let resp = client.get(url).send().map_err(classify)?;
    match resp.status() {
        StatusCode::NOT_FOUND => Ok(None),
        s if s.is_success() => resp.text().map(Some).map_err(classify),
        s if s.is_server_error() || s == StatusCode::TOO_MANY_REQUESTS => {
            Err(ArchiveError::Network(format!("{url}: HTTP {s}")))
        }
        s => Err(ArchiveError::Malformed(format!(
            "{url}: unexpected HTTP {s}"
        ))),
    }
}

/// Aggregator answering `GET <base>/timemap/link/<uri>` with link-format.
#[derive(Debug, Clone)]
pub struct MemGatorClient {
    base: String,
    client: Client,
}

impl MemGatorClient {
    pub fn new(base: &str, timeout: Duration) -> Result<Self, ArchiveError> {
        Ok(Self {
            base: base.trim_end_matches('/').to_string(),
            client: client(timeout)?,
        })
    }
}

impl TimeMapProvider for MemGatorClient {
    fn name(&self) -> &str {
        "memgator"
    }

    fn first_page(&self, uri: &str) -> Result<Option<String>, ArchiveError> {
        get_text(&self.client, &format!("{}/timemap/link/{}", self.base, uri))
    }

    fn page(&self, url: &str) -> Result<Option<String>, ArchiveError> {
        get_text(&self.client, url)
    }
}

/// Damage service answering `GET <base>/api/damage/<memento-uri>` with a JSON
/// object carrying `total_damage`.
#[derive(Debug, Clone)]
pub struct DamageClient {
    base: String,
    client: Client,
}

impl DamageClient {
    pub fn new(base: &str, timeout: Duration) -> Result<Self, ArchiveError> {
        Ok(Self {
            base: base.trim_end_matches('/').to_string(),
            client: client(timeout)?,
        })
    }
}

impl DamageProvider for DamageClient {
    fn name(&self) -> &str {
        "damage-service"
    }

    fn damage(&self, memento_uri: &str) -> Result<Option<f64>, ArchiveError> {
        let Some(body) = get_text(
            &self.client,
            &format!("{}/api/damage/{}", self.base, memento_uri),
        )?
        else {
            return Ok(None);
        };
        let v: serde_json::Value = serde_json::from_str(&body)
            .map_err(|e| ArchiveError::Malformed(format!("damage response: {e}")))?;
        Ok(v.get("total_damage").and_then(serde_json::Value::as_f64))
    }
}
