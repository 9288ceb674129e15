//! Four-feature linear scoring of archived candidates: temporal similarity,
//! popularity, URI similarity and archival quality.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::archive::{CandidatePage, DamageEvidence, DamageSource, PopularityEvidence};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankError {
    #[error("weights must each lie in [0, 1] and sum to 1 (got {0})")]
    BadWeights(String),
    #[error("the time window is empty: current datetime must be after the earliest datetime")]
    EmptyWindow,
    #[error("top_n must be at least 1")]
    BadTopN,
}

/// Feature weights; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub temporal: f64,
    pub popularity: f64,
    pub similarity: f64,
    pub quality: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        Self {
            temporal: 0.25,
            popularity: 0.25,
            similarity: 0.25,
            quality: 0.25,
        }
    }
}

impl RankWeights {
    pub fn new(
        temporal: f64,
        popularity: f64,
        similarity: f64,
        quality: f64,
    ) -> Result<Self, RankError> {
        let w = Self {
            temporal,
            popularity,
            similarity,
            quality,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), RankError> {
        let all = [
            self.temporal,
            self.popularity,
            self.similarity,
            self.quality,
        ];
        let in_range = all.iter().all(|w| w.is_finite() && (0.0..=1.0).contains(w));
        if !in_range || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(RankError::BadWeights(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for RankWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.temporal, self.popularity, self.similarity, self.quality
        )
    }
}

impl FromStr for RankWeights {
    type Err = RankError;

    /// `t,p,s,q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| RankError::BadWeights(s.to_string()))?;
        match parts[..] {
            [t, p, w, q] => Self::new(t, p, w, q),
            _ => Err(RankError::BadWeights(s.to_string())),
        }
    }
}

/// Start of web archiving, the default earliest datetime.
pub fn default_earliest() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(1996, 1, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalInputs {
    pub requested: DateTime<Utc>,
    pub candidate: DateTime<Utc>,
    pub current: DateTime<Utc>,
    pub earliest: DateTime<Utc>,
}

/// Normalized distance `|r − c| / (u − e)` clamped to `[0, 1]`; with
/// `as_similarity`, one minus that.
pub fn temporal_score(inp: &TemporalInputs, as_similarity: bool) -> Result<f64, RankError> {
    let window = (inp.current - inp.earliest).num_milliseconds();
    if window <= 0 {
        return Err(RankError::EmptyWindow);
    }
    let gap = (inp.requested - inp.candidate)
        .num_milliseconds()
        .unsigned_abs() as f64;
    let raw = (gap / window as f64).clamp(0.0, 1.0);
    Ok(if as_similarity { 1.0 - raw } else { raw })
}

/// `(|ln a / ln x − 1| + ln n / ln m) / 2`, clamped to `[0, 1]`. An unknown
/// rank contributes 0 to the first term, a zero count 0 to the second.
pub fn popularity_score(pe: &PopularityEvidence) -> f64 {
    let x = pe.rank_floor as f64;
    let rank_term = match pe.global_rank {
        Some(a) if pe.rank_floor > 1 => ((a as f64).ln() / x.ln() - 1.0).abs(),
        _ => 0.0,
    };
    let m = pe.archive_count_ceiling as f64;
    let count_term = if pe.archive_count == 0 || pe.archive_count_ceiling <= 1 {
        0.0
    } else {
        (pe.archive_count as f64).ln() / m.ln()
    };
    ((rank_term.min(1.0) + count_term.min(1.0)) / 2.0).clamp(0.0, 1.0)
}

/// Jaccard coefficient; two empty sets give 0.
pub fn uri_similarity<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// `|d − 1|`.
pub fn archival_quality(de: &DamageEvidence) -> f64 {
    (de.damage - 1.0).abs().clamp(0.0, 1.0)
}

/// Per-feature notes explaining a score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub temporal: String,
    pub popularity: String,
    pub similarity: String,
    pub quality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub candidate: CandidatePage,
    pub t: f64,
    pub p: f64,
    pub s: f64,
    pub q: f64,
    pub score: f64,
    pub explanation: Explanation,
}

/// Everything besides the candidates that scoring needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankContext {
    pub weights: RankWeights,
    pub requested: DateTime<Utc>,
    pub current: DateTime<Utc>,
    pub earliest: DateTime<Utc>,
    /// Use the distance form of the temporal feature verbatim.
    pub temporal_literal: bool,
    /// Tokens of the requested URI.
    pub request_tokens: BTreeSet<String>,
}

/// Scores candidates, sorts by score descending (URI ascending on ties) and
/// keeps the best `top_n`. `tokens` gives each candidate's URI token set.
pub fn rank<F>(
    candidates: Vec<CandidatePage>,
    ctx: &RankContext,
    top_n: usize,
    tokens: F,
) -> Result<Vec<Recommendation>, RankError>
where
    F: Fn(&str) -> BTreeSet<String>,
{
    ctx.weights.validate()?;
    if top_n == 0 {
        return Err(RankError::BadTopN);
    }
    if ctx.current <= ctx.earliest {
        return Err(RankError::EmptyWindow);
    }
    let w = ctx.weights;
    let mut out = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let t = temporal_score(
            &TemporalInputs {
                requested: ctx.requested,
                candidate: candidate.memento.datetime,
                current: ctx.current,
                earliest: ctx.earliest,
            },
            !ctx.temporal_literal,
        )?;
        let p = popularity_score(&candidate.popularity);
        let cand_tokens = tokens(&candidate.uri);
        let s = uri_similarity(&ctx.request_tokens, &cand_tokens);
        let q = archival_quality(&candidate.damage);
        let score = w.temporal * t + w.popularity * p + w.similarity * s + w.quality * q;
        let explanation = explain(&candidate, ctx, &cand_tokens);
        out.push(Recommendation {
            candidate,
            t,
            p,
            s,
            q,
            score: score.clamp(0.0, 1.0),
            explanation,
        });
    }
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.candidate.uri.cmp(&b.candidate.uri))
    });
    out.truncate(top_n);
    Ok(out)
}

fn explain(c: &CandidatePage, ctx: &RankContext, cand_tokens: &BTreeSet<String>) -> Explanation {
    let form = if ctx.temporal_literal {
        "distance"
    } else {
        "similarity"
    };
    let pop = &c.popularity;
    let rank = pop
        .global_rank
        .map_or_else(|| "unranked".to_string(), |a| format!("rank {a}"));
    let shared: Vec<&str> = ctx
        .request_tokens
        .intersection(cand_tokens)
        .map(String::as_str)
        .collect();
    let damage_src = match c.damage.source {
        DamageSource::Provider => "provider",
        DamageSource::Fixture => "fixture",
        DamageSource::DefaultMissing => "missing, default used",
    };
    Explanation {
        temporal: format!(
            "{form}; memento {} vs requested {}",
            c.memento.datetime.format("%Y-%m-%dT%H:%M:%SZ"),
            ctx.requested.format("%Y-%m-%dT%H:%M:%SZ")
        ),
        popularity: format!(
            "{rank} of {}; archived {} of {} times{}",
            pop.rank_floor,
            pop.archive_count,
            pop.archive_count_ceiling,
            if pop.clamped { " (clamped)" } else { "" }
        ),
        similarity: format!("shared tokens [{}]", shared.join(", ")),
        quality: format!("damage {:.3} ({damage_src})", c.damage.damage),
    }
}
