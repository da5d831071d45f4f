//! Machine-readable JSON reports.
//!
//! Every command writes exactly one report, even on failure. Keys are
//! serialized in sorted order and floats through the standard shortest
//! round-trip formatter, so identical inputs produce byte-identical
//! reports once timestamps are suppressed (`--no-timestamp` also drops
//! `runtime_ms`, which varies run to run).

use std::time::Instant;

use nalgebra::DVector;
use serde_json::{json, Map, Value};

use rkhs_core::io;
use rkhs_core::numerics::Verdict;
use rkhs_core::C64;

pub struct ReportBuilder {
    map: Map<String, Value>,
    started: Instant,
    no_timestamp: bool,
}

impl ReportBuilder {
    pub fn new(command: &str, no_timestamp: bool) -> Self {
        let mut map = Map::new();
        map.insert("command".into(), json!(command));
        Self {
            map,
            started: Instant::now(),
            no_timestamp,
        }
    }

    pub fn field(&mut self, key: &str, value: Value) -> &mut Self {
        self.map.insert(key.to_string(), value);
        self
    }

    /// Echo one input file: path, content hash, and the parsed spec.
    pub fn input(&mut self, key: &str, path: &str, bytes: &[u8]) -> &mut Self {
        let parsed: Value = serde_json::from_slice(bytes).unwrap_or(Value::Null);
        self.field(
            key,
            json!({
                "path": path,
                "sha256": io::content_hash(bytes),
                "spec": parsed,
            }),
        )
    }

    pub fn verdict(&mut self, v: &Verdict) -> &mut Self {
        self.field("verdict", verdict_label(v));
        self.field("margin", json!(v.margin));
        self.field("lambda_min", json!(v.lambda_min));
        if let Some(w) = &v.witness {
            self.field("witness", io::vector_to_json(w));
        }
        self
    }

    pub fn finish(mut self, exit_code: i32) -> (Value, i32) {
        self.map.insert("exit_code".into(), json!(exit_code));
        if !self.no_timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0);
            self.map.insert("timestamp_unix".into(), json!(now));
            self.map.insert(
                "runtime_ms".into(),
                json!(self.started.elapsed().as_millis() as u64),
            );
        }
        (Value::Object(self.map), exit_code)
    }
}

pub fn verdict_label(v: &Verdict) -> Value {
    json!(match v.outcome {
        rkhs_core::numerics::Outcome::Positive => "positive",
        rkhs_core::numerics::Outcome::Indefinite => "indefinite",
        rkhs_core::numerics::Outcome::Inconclusive => "inconclusive",
    })
}

pub fn vector_json(v: &DVector<C64>) -> Value {
    io::vector_to_json(v)
}

/// A finite float or `null` (JSON has no infinities; the infeasible
/// sentinel is reported as a separate flag).
pub fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
