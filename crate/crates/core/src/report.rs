//! Verification reports: an ordered list of checks, rendered as text or as
//! one JSON record per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotRun,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub check_id: String,
    pub status: Status,
    pub payload: BTreeMap<String, Value>,
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    /// Free text printed before the checks in text mode (tables etc.).
    pub preamble: Vec<String>,
    entries: Vec<Entry>,
    metadata: BTreeMap<String, Value>,
}

/// Builds a payload map from `key => value` pairs.
#[macro_export]
macro_rules! payload {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = ::std::collections::BTreeMap::<String, ::serde_json::Value>::new();
        $(m.insert($k.to_string(), ::serde_json::json!($v));)*
        m
    }};
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Metadata attached to every subsequent entry (budgets, seeds).
    pub fn set_metadata(&mut self, metadata: BTreeMap<String, Value>) {
        self.metadata = metadata;
    }

    /// Appends a check. Check ids are unique within a report.
    pub fn push(&mut self, check_id: impl Into<String>, status: Status, payload: BTreeMap<String, Value>) {
        let check_id = check_id.into();
        assert!(self.entries.iter().all(|e| e.check_id != check_id), "check id {check_id} reported twice");
        self.entries.push(Entry { check_id, status, payload, metadata: self.metadata.clone() });
    }

    pub fn check(&mut self, check_id: impl Into<String>, ok: bool, payload: BTreeMap<String, Value>) {
        self.push(check_id, Status::from_bool(ok), payload);
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, check_id: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.check_id == check_id)
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str(line);
            out.push('\n');
        }
        if !self.preamble.is_empty() {
            out.push('\n');
        }
        let width = self.entries.iter().map(|e| e.check_id.len()).max().unwrap_or(0);
        for e in &self.entries {
            let _ = write!(out, "[{}] {:width$}", e.status.tag(), e.check_id);
            for (k, v) in &e.payload {
                let _ = write!(out, "  {k}={}", compact(v));
            }
            out.push('\n');
        }
        if let Some(e) = self.entries.first() {
            if !e.metadata.is_empty() {
                let meta: Vec<String> = e.metadata.iter().map(|(k, v)| format!("{k}={}", compact(v))).collect();
                let _ = writeln!(out, "budget: {}", meta.join(" "));
            }
        }
        let failed = self.entries.iter().filter(|e| e.status == Status::Fail).count();
        let _ = writeln!(out, "{} checks, {} failed", self.entries.len(), failed);
        out
    }

    /// One JSON object per line, keys sorted.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("report entries serialize"));
            out.push('\n');
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_and_exit_code() {
        let mut r = VerificationReport::new();
        r.check("a", true, payload! {"x" => 1});
        r.push("b", Status::NotRun, payload! {"reason" => "no blank"});
        assert_eq!(r.exit_code(), 0);
        r.check("c", false, payload! {});
        assert_eq!(r.exit_code(), 1);
        assert!(r.render_text().contains("[FAIL] c"));
    }

    #[test]
    fn records_are_json_lines() {
        let mut r = VerificationReport::new();
        r.set_metadata(payload! {"seed" => 7});
        r.check("a", true, payload! {"value" => 0.5, "name" => "x"});
        let line = r.render_records();
        assert_eq!(
            line,
            "{\"check_id\":\"a\",\"status\":\"pass\",\"payload\":{\"name\":\"x\",\"value\":0.5},\"metadata\":{\"seed\":7}}\n"
        );
        let v: Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["status"], "pass");
    }

    #[test]
    #[should_panic(expected = "reported twice")]
    fn duplicate_ids_panic() {
        let mut r = VerificationReport::new();
        r.check("a", true, payload! {});
        r.check("a", true, payload! {});
    }
}
