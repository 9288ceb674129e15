//! Human tables and JSON-lines records for every subcommand.

use std::fmt::Write as _;

use anyhow::Result;
use serde_json::json;

use lostpage_core::nb::EvalReport;
use lostpage_core::pipeline::{DeepEvalReport, LogFilterStats, RecommendResponse};
use lostpage_core::report::UriReport;
use lostpage_core::uri::TokenConfig;

use crate::OutputFormat;

fn line(value: serde_json::Value) -> String {
    let mut s = value.to_string();
    s.push('\n');
    s
}

pub fn recommendations(resp: &RecommendResponse, format: OutputFormat) -> Result<String> {
    let trace = &resp.trace;
    let category = trace.categories.first().map(|c| c.to_string());
    let mut out = String::new();
    match format {
        OutputFormat::Records => {
            if let Some(reason) = resp.empty_reason {
                out.push_str(&line(json!({
                    "uri": resp.request.uri,
                    "route": trace.route.as_str(),
                    "category": category,
                    "empty_reason": reason.as_str(),
                    "collected": trace.collected.len(),
                    "unarchived": trace.unarchived.len(),
                })));
            }
            for (i, r) in resp.recommendations.iter().enumerate() {
                out.push_str(&line(json!({
                    "rank": i + 1,
                    "uri": r.candidate.uri,
                    "memento": r.candidate.memento.uri,
                    "memento_datetime": r.candidate.memento.datetime.to_rfc3339(),
                    "score": r.score,
                    "t": r.t,
                    "p": r.p,
                    "s": r.s,
                    "q": r.q,
                    "route": trace.route.as_str(),
                    "category": category,
                    "damage_source": r.candidate.damage.source,
                    "explanation": r.explanation,
                })));
            }
        }
        OutputFormat::Table => {
            writeln!(out, "request\t{}", resp.request.uri)?;
            writeln!(out, "datetime\t{}", trace.requested_datetime.to_rfc3339())?;
            writeln!(out, "route\t{}", trace.route.as_str())?;
            if let Some((label, p)) = &trace.first_level {
                writeln!(out, "first level\t{label} ({p:.4})")?;
            }
            if let Some(c) = &category {
                writeln!(out, "category\t{c}")?;
            }
            if let Some(f) = &trace.deep_failure {
                writeln!(out, "deep stage\tfailed: {f}")?;
            }
            writeln!(
                out,
                "candidates\t{} collected, {} unarchived, {} failed",
                trace.collected.len(),
                trace.unarchived.len(),
                trace.fetch_failures.len()
            )?;
            for w in &trace.warnings {
                writeln!(out, "warning\t{w}")?;
            }
            if let Some(reason) = resp.empty_reason {
                writeln!(out, "result\tnone ({})", reason.as_str())?;
                return Ok(out);
            }
            writeln!(out, "\nrank\tscore\tt\tp\ts\tq\tmemento")?;
            for (i, r) in resp.recommendations.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}",
                    i + 1,
                    r.score,
                    r.t,
                    r.p,
                    r.s,
                    r.q,
                    r.candidate.memento.uri
                )?;
            }
        }
    }
    Ok(out)
}

pub fn first_level(
    results: &[(TokenConfig, EvalReport)],
    baseline: f64,
    format: OutputFormat,
) -> Result<String> {
    let mut out = String::new();
    match format {
        OutputFormat::Records => {
            for (config, report) in results {
                out.push_str(&line(json!({
                    "method": config.method.as_str(),
                    "variants": config.variants.to_string(),
                    "majority_baseline": baseline,
                    "report": report,
                })));
            }
        }
        OutputFormat::Table => {
            writeln!(out, "majority baseline\t{baseline:.4}")?;
            writeln!(
                out,
                "\nconfiguration\ttested\tdropped\tmicro-F1\tmacro-F1\tweighted-F1"
            )?;
            for (config, r) in results {
                let dropped: usize = r.folds.iter().map(|f| f.dropped_oov).sum();
                writeln!(
                    out,
                    "{config}\t{}\t{dropped}\t{:.4}\t{:.4}\t{:.4}",
                    r.items, r.micro_f1, r.macro_f1, r.weighted_f1
                )?;
            }
            if let [(_, r)] = results {
                writeln!(out, "\n{r}")?;
            }
        }
    }
    Ok(out)
}

pub fn deep_eval(report: &DeepEvalReport, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Records => line(serde_json::to_value(report)?),
        OutputFormat::Table => report.to_string(),
    })
}

pub fn log_analysis(
    stats: &LogFilterStats,
    report: &UriReport,
    format: OutputFormat,
) -> Result<String> {
    Ok(match format {
        OutputFormat::Records => line(json!({ "filter": stats, "report": report })),
        OutputFormat::Table => {
            let mut out = String::new();
            writeln!(out, "lines\t{}", stats.lines)?;
            writeln!(out, "malformed\t{}", stats.malformed)?;
            writeln!(out, "non-200\t{}", stats.non_200)?;
            writeln!(out, "invalid URI\t{}", stats.invalid_uri)?;
            writeln!(out, "non-HTML\t{}", stats.non_html)?;
            writeln!(out, "IP host\t{}", stats.ip_host)?;
            writeln!(out, "non-English ccTLD\t{}", stats.non_english_cctld)?;
            writeln!(out, "duplicate\t{}", stats.duplicate)?;
            writeln!(out, "kept\t{}\n", stats.kept)?;
            out.push_str(&report.to_string());
            out
        }
    })
}

pub fn uri_report(report: &UriReport, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Records => line(serde_json::to_value(report)?),
        OutputFormat::Table => report.to_string(),
    })
}
