//! The built-in example corpus: worked systems with expected outcomes.
//!
//! Every expectation carries a provenance tag. Checks patch the entry's base
//! config, run one command and assert on the exit code, the text report, or
//! values addressed by JSON pointer into the report.

use crate::commands::{derive, hj_check, hj_solve_affine, simulate, Outcome, RunOptions};
use crate::config::JobConfig;
use crate::CliError;
use jetmech::symexpr::{equal_numeric_with, parse_simplified, SampleBox};
use jetmech::Symbol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const DATA: &str = include_str!("../corpus/corpus.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    #[serde(rename = "PAPER")]
    Paper,
    #[serde(rename = "TRIVIAL")]
    Trivial,
    #[serde(rename = "DERIVED")]
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "derive")]
    Derive,
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "hj-check")]
    HjCheck,
    #[serde(rename = "hj-solve-affine")]
    HjSolveAffine,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Derive => "derive",
            Command::Simulate => "simulate",
            Command::HjCheck => "hj-check",
            Command::HjSolveAffine => "hj-solve-affine",
        }
    }

    pub fn run(self, cfg: &JobConfig, run: RunOptions) -> Result<Outcome, CliError> {
        match self {
            Command::Derive => derive(cfg, run),
            Command::Simulate => simulate(cfg, run),
            Command::HjCheck => hj_check(cfg, run),
            Command::HjSolveAffine => hj_solve_affine(cfg, run),
        }
    }
}

/// One expected outcome. Exactly one of `code`, `contains` or `path` selects
/// what is inspected; with `path`, exactly one of `equals`, `max`, `min`,
/// `approx` or `expr` says how.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub tag: Tag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub command: Command,
    #[serde(default)]
    pub patch: Value,
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub id: String,
    pub title: String,
    pub config: Value,
    pub checks: Vec<Check>,
}

/// All entries, sorted by id.
pub fn entries() -> Vec<CorpusEntry> {
    let mut v: Vec<CorpusEntry> = serde_json::from_str(DATA).expect("corpus data is valid");
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Recursive object merge; `null` in the patch removes the key.
fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                if v.is_null() {
                    b.remove(k);
                } else {
                    merge(b.entry(k.clone()).or_insert(Value::Null), v);
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

impl CorpusEntry {
    pub fn base_config(&self) -> Result<JobConfig, CliError> {
        JobConfig::from_json(&self.config.to_string())
    }

    pub fn config_for(&self, check: &Check) -> Result<JobConfig, CliError> {
        let mut v = self.config.clone();
        if !check.patch.is_null() {
            merge(&mut v, &check.patch);
        }
        JobConfig::from_json(&v.to_string())
    }
}

fn describe(e: &Expectation) -> String {
    if let Some(c) = e.code {
        return format!("exit code {c}");
    }
    if let Some(s) = &e.contains {
        return format!("report contains `{s}`");
    }
    let path = e.path.as_deref().unwrap_or("?");
    if let Some(v) = &e.equals {
        format!("{path} = {v}")
    } else if let Some(m) = e.max {
        format!("{path} <= {m:e}")
    } else if let Some(m) = e.min {
        format!("{path} >= {m:e}")
    } else if let Some(a) = e.approx {
        format!("{path} ~ {a} (tol {:e})", e.tol.unwrap_or(1e-10))
    } else if let Some(x) = &e.expr {
        format!("{path} == {x}")
    } else {
        format!("{path} present")
    }
}

fn same_expr(actual: &str, expected: &str, cfg: &JobConfig, tol: f64) -> Result<bool, String> {
    let a = parse_simplified(actual).map_err(|e| format!("cannot parse `{actual}`: {e}"))?;
    let b = parse_simplified(expected).map_err(|e| format!("cannot parse `{expected}`: {e}"))?;
    let mut region = SampleBox::uniform(-2.0, 2.0);
    for s in a
        .free_symbols()
        .into_iter()
        .chain(b.free_symbols())
        .filter(Symbol::is_param)
    {
        region = match cfg.params.get(&s.name()) {
            Some(v) => region.with_fixed(s, *v),
            None => region.with_range(s, 0.5, 2.0),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_or(None));
    equal_numeric_with(&a, &b, 100, tol, &region, &mut rng).map_err(|e| e.to_string())
}

/// `Ok(actual)` when satisfied, `Err(actual or reason)` otherwise.
fn evaluate(
    e: &Expectation,
    code: i32,
    report: &Value,
    text: &str,
    cfg: &JobConfig,
) -> Result<Value, Value> {
    if let Some(c) = e.code {
        return if c == code {
            Ok(json!(code))
        } else {
            Err(json!(code))
        };
    }
    if let Some(s) = &e.contains {
        return if text.contains(s.as_str()) {
            Ok(json!(true))
        } else {
            Err(json!(false))
        };
    }
    let path = e
        .path
        .as_deref()
        .ok_or_else(|| json!("expectation selects nothing"))?;
    let actual = report
        .pointer(path)
        .cloned()
        .ok_or_else(|| json!("missing"))?;
    let num = || actual.as_f64().ok_or_else(|| actual.clone());
    let ok = if let Some(v) = &e.equals {
        v == &actual
    } else if let Some(m) = e.max {
        num()? <= m
    } else if let Some(m) = e.min {
        num()? >= m
    } else if let Some(a) = e.approx {
        (num()? - a).abs() <= e.tol.unwrap_or(1e-10)
    } else if let Some(x) = &e.expr {
        let s = actual.as_str().ok_or_else(|| actual.clone())?;
        same_expr(s, x, cfg, e.tol.unwrap_or(1e-10)).map_err(Value::String)?
    } else {
        true
    };
    if ok {
        Ok(actual)
    } else {
        Err(actual)
    }
}

/// Run one check; a command error becomes exit code plus an `error` report.
pub fn run_check(entry: &CorpusEntry, check: &Check, run: RunOptions) -> Value {
    let (cfg, outcome) = match entry.config_for(check) {
        Ok(cfg) => {
            let out = check.command.run(&cfg, run);
            (Some(cfg), out)
        }
        Err(e) => (None, Err(e)),
    };
    let (code, report) = match outcome {
        Ok(o) => (o.code, o.report),
        Err(e) => (e.code, json!({"error": e.message})),
    };
    let text = crate::report::to_text(&report);
    let mut pass = true;
    let mut results = Vec::new();
    for e in &check.expect {
        let res = match &cfg {
            Some(cfg) => evaluate(e, code, &report, &text, cfg),
            None => Err(json!("config rejected")),
        };
        pass &= res.is_ok();
        let (ok, actual) = match res {
            Ok(a) => (true, a),
            Err(a) => (false, a),
        };
        results.push(json!({"expect": describe(e), "tag": e.tag, "ok": ok, "actual": actual}));
    }
    let mut v = json!({"name": check.name, "command": check.command.name(), "code": code, "pass": pass,
                       "expectations": results});
    if let Some(err) = report.get("error") {
        v["error"] = err.clone();
    }
    v
}

fn selected<'a>(all: &'a [CorpusEntry], filter: Option<&str>) -> Vec<&'a CorpusEntry> {
    match filter {
        None => all.iter().collect(),
        Some(f) if f.is_empty() => Vec::new(),
        Some(f) => all.iter().filter(|e| e.id.contains(f)).collect(),
    }
}

/// Entries whose id contains `filter` (all entries without one, none for an
/// empty filter), run concurrently and reported in id order.
pub fn run(filter: Option<&str>, run: RunOptions) -> Outcome {
    let all = entries();
    let chosen = selected(&all, filter);
    let mut results: Vec<(String, Value)> = std::thread::scope(|s| {
        let handles: Vec<_> = chosen
            .iter()
            .map(|e| {
                s.spawn(move || {
                    let checks: Vec<Value> =
                        e.checks.iter().map(|c| run_check(e, c, run)).collect();
                    let pass = checks.iter().all(|c| c["pass"] == json!(true));
                    (
                        e.id.clone(),
                        json!({"id": e.id, "title": e.title, "pass": pass, "checks": checks}),
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("corpus worker panicked"))
            .collect()
    });
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let entries: Vec<Value> = results.into_iter().map(|(_, v)| v).collect();
    let checks: usize = entries
        .iter()
        .map(|e| e["checks"].as_array().map_or(0, Vec::len))
        .sum();
    let failed: usize = entries
        .iter()
        .flat_map(|e| e["checks"].as_array().cloned().unwrap_or_default())
        .filter(|c| c["pass"] != json!(true))
        .count();
    let report = json!({
        "command": "corpus run",
        "filter": filter,
        "summary": {"entries": entries.len(), "checks": checks, "failed": failed},
        "entries": entries,
    });
    Outcome {
        report,
        csv: None,
        code: if failed == 0 { 0 } else { 1 },
    }
}

pub fn list(filter: Option<&str>) -> Outcome {
    let all = entries();
    let items: Vec<Value> = selected(&all, filter)
        .into_iter()
        .map(|e| {
            json!({"id": e.id, "title": e.title, "problem": e.config["problem"],
                   "method": e.config.get("method").cloned().unwrap_or(json!("ostrogradsky")),
                   "n": e.config["n"], "k": e.config["k"], "checks": e.checks.len()})
        })
        .collect();
    Outcome {
        report: json!({"command": "corpus list", "entries": items}),
        csv: None,
        code: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses_and_configs_validate() {
        let all = entries();
        assert_eq!(all.len(), 8);
        for e in &all {
            e.base_config().unwrap();
            for c in &e.checks {
                e.config_for(c)
                    .unwrap_or_else(|err| panic!("{} / {}: {err}", e.id, c.name));
                for x in &c.expect {
                    let selectors = [x.code.is_some(), x.contains.is_some(), x.path.is_some()];
                    assert_eq!(
                        selectors.iter().filter(|b| **b).count(),
                        1,
                        "{} / {}",
                        e.id,
                        c.name
                    );
                }
            }
        }
    }

    #[test]
    fn merge_replaces_and_removes() {
        let mut a = json!({"x": 1, "y": {"z": 2, "w": 3}});
        merge(&mut a, &json!({"y": {"z": 5, "w": null}, "v": [1]}));
        assert_eq!(a, json!({"x": 1, "y": {"z": 5}, "v": [1]}));
    }
}
