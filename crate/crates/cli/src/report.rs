//! Machine-readable reports: a single JSON document per run, exact values
//! serialized as term lists or rational strings, never floats. Reports are
//! byte-stable for a fixed (config, seed); timing is opt-in so the default
//! output stays reproducible.

use padic_stringy::numeric::Rat;
use padic_stringy::qexp::{PadicValue, QExp};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// The versioned run configuration; the `inputs` section of every report is
/// exactly one of these and re-parses as such.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct RunConfig {
    pub version: u32,
    pub command: String,
    pub parameters: Value,
}

#[derive(Serialize, Clone, Debug)]
pub struct CheckOut {
    pub name: String,
    pub paper_anchor: String,
    pub pass: bool,
}

impl CheckOut {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, pass: bool) -> Self {
        CheckOut {
            name: name.into(),
            paper_anchor: anchor.into(),
            pass,
        }
    }
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub command: String,
    pub inputs: RunConfig,
    pub outputs: Value,
    pub checks: Vec<CheckOut>,
    pub precision_used: Option<i64>,
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        if let Some(k) = self.precision_used {
            out.push_str(&format!("precision: t^{k}\n"));
        }
        out.push_str(&format!("{:<6} {:<58} {}\n", "status", "check", "anchor"));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<6} {:<58} {}\n",
                if c.pass { "pass" } else { "FAIL" },
                truncate(&c.name, 58),
                c.paper_anchor
            ));
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

fn truncate(s: &str, width: usize) -> String {
    if s.len() <= width {
        s.to_string()
    } else {
        format!("{}...", &s[..width - 3])
    }
}

/// Exact rational as a string, `a` or `a/b`.
pub fn rat_str(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// QExp as an exact term list.
pub fn qexp_terms(x: &QExp) -> Value {
    Value::Array(
        x.terms()
            .map(|(e, c)| json!({"exponent": rat_str(e), "coefficient": rat_str(c)}))
            .collect(),
    )
}

/// Reduced value as coefficients against fractional p-exponents.
pub fn padic_value_terms(v: &PadicValue) -> Value {
    Value::Array(
        v.parts()
            .map(|(e, c)| json!({"p_exponent": rat_str(e), "coefficient": rat_str(c)}))
            .collect(),
    )
}

/// Field descriptor with the field-type tag reserved for future backends.
pub fn field_descriptor(q: u64, p: u64, m: u32) -> Value {
    json!({"q": q, "p": p, "m": m, "field_type": "Fq((t))"})
}
