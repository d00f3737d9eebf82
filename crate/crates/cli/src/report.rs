//! Machine-readable command reports.

use serde_json::{json, Map, Value};

use gradgauge::status::Status;

pub const SCHEMA: u64 = 1;

pub fn caveat_degree(n: u32) -> String {
    format!("complete up to degree {n}: solution spaces are computed with polynomial coefficients of degree <= {n} only")
}

pub fn caveat_symmetry_set(n: u32) -> String {
    format!("uniqueness is relative to the finite symmetry set of degree <= {n}")
}

pub const CAVEAT_ORBIT_ASSERTED: &str =
    "orbit non-degeneracy of the pulled back 3-form was asserted by the user and not verified";
pub const CAVEAT_ORBIT_UNCHECKED: &str =
    "orbit non-degeneracy of the pulled back 3-form was neither asserted nor verified";
pub const CAVEAT_ORACLE_MISMATCH: &str =
    "numeric oracle disagrees with a symbolic zero: this is an internal error";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub model: String,
    /// One of pass, fail, unique, family, none, inconclusive, error.
    pub status: String,
    pub residuals: Vec<String>,
    pub data: Map<String, Value>,
    pub caveats: Vec<String>,
    /// Oracle re-confirmation of the symbolic pass claims, if any were made.
    pub oracle: Option<(usize, u64, Status)>,
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: impl Into<String>, model: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            model: model.into(),
            status: "pass".into(),
            residuals: Vec::new(),
            data: Map::new(),
            caveats: Vec::new(),
            oracle: None,
            timing_ms: None,
        }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.data.insert(key.to_string(), v.into());
    }

    pub fn exit_code(&self) -> i32 {
        match self.status.as_str() {
            "pass" | "unique" | "family" => 0,
            "inconclusive" => 3,
            _ => 1,
        }
    }

    /// Downgrades a pass to fail when the oracle disagrees.
    pub fn confirm(&mut self, samples: usize, seed: u64, st: Status) {
        self.oracle = Some((samples, seed, st));
        if !st.is_pass() {
            self.status = "fail".into();
            self.caveats.push(CAVEAT_ORACLE_MISMATCH.into());
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("command".into(), json!(self.command));
        m.insert("model".into(), json!(self.model));
        m.insert("status".into(), json!(self.status));
        m.insert("residuals".into(), json!(self.residuals));
        m.insert("solution".into(), Value::Object(self.data.clone()));
        m.insert("caveats".into(), json!(self.caveats));
        if let Some((k, seed, st)) = self.oracle {
            m.insert("oracle".into(), json!({"samples": k, "seed": seed, "status": st.as_str()}));
        }
        if let Some(t) = self.timing_ms {
            m.insert("timing_ms".into(), json!(t as u64));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_versioned() {
        let mut r = Report::new("check poisson", "R4");
        r.set("zeta", 1);
        r.set("alpha", 2);
        let s = r.to_json();
        assert!(s.contains("\"schema\": 1"));
        let keys: Vec<String> = match r.to_value() {
            Value::Object(m) => m.keys().cloned().collect(),
            _ => unreachable!(),
        };
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::new("x", "m");
        for (s, c) in [("pass", 0), ("unique", 0), ("family", 0), ("fail", 1), ("none", 1), ("inconclusive", 3)] {
            r.status = s.into();
            assert_eq!(r.exit_code(), c);
        }
    }

    #[test]
    fn oracle_mismatch_downgrades() {
        let mut r = Report::new("x", "m");
        r.confirm(20, 1, Status::Fail);
        assert_eq!(r.status, "fail");
        assert_eq!(r.exit_code(), 1);
    }
}
