//! Report envelope, number formatting and the flat CSV table.

use serde_json::{json, Map, Value};

use gie_core::PhysicalConstants;

pub const REPORT_SCHEMA: &str = "gie-report/1";
pub const TOOL_NAME: &str = "gie";

/// Rounds to 15 significant digits; non-finite values become null.
pub fn round15(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    // Drops the sign of negative zero.
    json!(r + 0.0)
}

/// Rounds every float inside a JSON value.
pub fn round_all(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round15(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_all).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_all(v))).collect()),
        other => other,
    }
}

/// One cell of a result row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => round15(*x),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{:.8e}", x + 0.0),
            Cell::Num(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// Ordered (name, unit, value) cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    pub cells: Vec<(String, String, Cell)>,
}

impl Row {
    pub fn push(&mut self, name: impl Into<String>, unit: &str, cell: Cell) {
        self.cells.push((name.into(), unit.to_string(), cell));
    }

    pub fn num(&mut self, name: impl Into<String>, unit: &str, x: f64) {
        self.push(name, unit, Cell::Num(x));
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|(n, _, _)| n == name).map(|(_, _, c)| c)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        match self.get(name) {
            Some(Cell::Num(x)) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unavailable {
    pub output: String,
    pub reason: String,
}

/// Rows of one command plus free-form notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Results {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
    pub unavailable: Vec<Unavailable>,
}

impl Results {
    /// Column names and units, in first-seen order.
    pub fn columns(&self) -> Vec<(String, String)> {
        let mut cols: Vec<(String, String)> = Vec::new();
        for r in &self.rows {
            for (n, u, _) in &r.cells {
                if !cols.iter().any(|(c, _)| c == n) {
                    cols.push((n.clone(), u.clone()));
                }
            }
        }
        cols
    }

    pub fn to_json(&self) -> Value {
        let units: Map<String, Value> = self
            .columns()
            .into_iter()
            .map(|(n, u)| (n, Value::String(u)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    r.cells
                        .iter()
                        .map(|(n, _, c)| (n.clone(), c.to_json()))
                        .collect(),
                )
            })
            .collect();
        json!({ "units": units, "rows": rows, "notes": self.notes })
    }

    /// CSV with a "name [unit]" header; numbers at 9 significant digits.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(cols.iter().map(|(n, u)| format!("{n} [{u}]")))?;
        for r in &self.rows {
            w.write_record(
                cols.iter()
                    .map(|(n, _)| r.get(n).map(Cell::to_csv).unwrap_or_default()),
            )?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).unwrap_or_default())
    }
}

fn constants_json(k: &PhysicalConstants) -> Value {
    Value::Array(
        k.provenance()
            .into_iter()
            .map(|(n, v, u, s)| json!({ "name": n, "value": round15(v), "unit": u, "source": s }))
            .collect(),
    )
}

/// Assembles the full report.
pub fn envelope(
    command: &str,
    seed: u64,
    config_echo: Value,
    constants: &PhysicalConstants,
    results: &Results,
    wall_time_s: f64,
) -> Value {
    let mut unavailable = results.unavailable.clone();
    unavailable.sort();
    unavailable.dedup();
    json!({
        "schema": REPORT_SCHEMA,
        "tool": { "name": TOOL_NAME, "version": env!("CARGO_PKG_VERSION") },
        "command": command,
        "seed": seed,
        "config": round_all(config_echo),
        "constants": constants_json(constants),
        "results": results.to_json(),
        "unavailable": unavailable
            .iter()
            .map(|u| json!({ "output": u.output, "reason": u.reason }))
            .collect::<Vec<_>>(),
        "wall_time_s": round15(wall_time_s),
    })
}

/// Checks a report against the schema it declares.
pub fn validate_report(v: &Value) -> Result<(), String> {
    let obj = v.as_object().ok_or("report must be an object")?;
    match obj.get("schema").and_then(Value::as_str) {
        Some(REPORT_SCHEMA) => {}
        Some(s) => return Err(format!("unknown schema `{s}`")),
        None => return Err("missing `schema`".into()),
    }
    const KEYS: [&str; 9] = [
        "schema",
        "tool",
        "command",
        "seed",
        "config",
        "constants",
        "results",
        "unavailable",
        "wall_time_s",
    ];
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(format!("unexpected key `{k}`"));
    }
    let tool = obj.get("tool").and_then(Value::as_object).ok_or("`tool` must be an object")?;
    for k in ["name", "version"] {
        tool.get(k).and_then(Value::as_str).ok_or(format!("`tool.{k}` must be a string"))?;
    }
    obj.get("command").and_then(Value::as_str).ok_or("`command` must be a string")?;
    obj.get("seed").and_then(Value::as_u64).ok_or("`seed` must be an unsigned integer")?;
    obj.get("config").and_then(Value::as_object).ok_or("`config` must be an object")?;
    match obj.get("wall_time_s") {
        Some(Value::Number(_)) | Some(Value::Null) => {}
        _ => return Err("`wall_time_s` must be a number".into()),
    }
    let constants = obj.get("constants").and_then(Value::as_array).ok_or("`constants` must be an array")?;
    for (i, c) in constants.iter().enumerate() {
        for k in ["name", "unit", "source"] {
            c.get(k).and_then(Value::as_str).ok_or(format!("`constants[{i}].{k}` must be a string"))?;
        }
        c.get("value").and_then(Value::as_f64).ok_or(format!("`constants[{i}].value` must be a number"))?;
    }
    let unavailable = obj.get("unavailable").and_then(Value::as_array).ok_or("`unavailable` must be an array")?;
    for (i, u) in unavailable.iter().enumerate() {
        for k in ["output", "reason"] {
            let s = u.get(k).and_then(Value::as_str).ok_or(format!("`unavailable[{i}].{k}` must be a string"))?;
            if s.is_empty() {
                return Err(format!("`unavailable[{i}].{k}` is empty"));
            }
        }
    }
    let results = obj.get("results").and_then(Value::as_object).ok_or("`results` must be an object")?;
    let units = results.get("units").and_then(Value::as_object).ok_or("`results.units` must be an object")?;
    if units.values().any(|u| !u.is_string()) {
        return Err("`results.units` values must be strings".into());
    }
    let rows = results.get("rows").and_then(Value::as_array).ok_or("`results.rows` must be an array")?;
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_object().ok_or(format!("`results.rows[{i}]` must be an object"))?;
        if let Some(k) = r.keys().find(|k| !units.contains_key(*k)) {
            return Err(format!("`results.rows[{i}].{k}` has no unit"));
        }
        if r.values().any(|c| c.is_array() || c.is_object()) {
            return Err(format!("`results.rows[{i}]` cells must be scalars"));
        }
    }
    let notes = results.get("notes").and_then(Value::as_array).ok_or("`results.notes` must be an array")?;
    if notes.iter().any(|n| !n.is_string()) {
        return Err("`results.notes` entries must be strings".into());
    }
    Ok(())
}

/// Serializes a report with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round15_keeps_fifteen_digits() {
        assert_eq!(round15(0.1 + 0.2), json!(0.3));
        assert_eq!(round15(1.0 / 3.0), json!(0.333333333333333));
        assert_eq!(round15(f64::NAN), Value::Null);
        assert_eq!(round15(6.6743e-11), json!(6.6743e-11));
        assert_eq!(round15(-0.0).to_string(), "0.0");
    }

    fn sample() -> Results {
        let mut r = Row::default();
        r.num("negativity", "1", 0.5);
        r.push("ppt", "bool", Cell::Bool(false));
        r.push("mediator", "text", Cell::Text("ideal".into()));
        Results {
            rows: vec![r],
            notes: vec![],
            unavailable: vec![Unavailable {
                output: "decay".into(),
                reason: "no [decoherence] section".into(),
            }],
        }
    }

    #[test]
    fn csv_header_names_units_and_uses_nine_digits() {
        let csv = sample().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("negativity [1],ppt [bool],mediator [text]"));
        assert_eq!(lines.next(), Some("5.00000000e-1,false,ideal"));
    }

    #[test]
    fn envelope_validates() {
        let k = PhysicalConstants::codata2018();
        let v = envelope("simulate", 7, json!({"schema_version": 1}), &k, &sample(), 0.25);
        validate_report(&v).unwrap();
        let mut broken = v.clone();
        broken["schema"] = json!("gie-report/0");
        assert!(validate_report(&broken).is_err());
        let mut broken = v.clone();
        broken["results"]["rows"][0]["extra"] = json!(1.0);
        assert!(validate_report(&broken).is_err());
        let mut broken = v;
        broken["unavailable"][0]["reason"] = json!("");
        assert!(validate_report(&broken).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round15_is_close_and_idempotent(x in proptest::num::f64::NORMAL) {
            let r = round15(x).as_f64().unwrap();
            proptest::prop_assert!(((r - x) / x).abs() <= 5e-15);
            proptest::prop_assert_eq!(round15(r).as_f64().unwrap(), r);
        }

        #[test]
        fn csv_numbers_parse_back_to_nine_digits(x in -1e30f64..1e30) {
            let s = Cell::Num(x).to_csv();
            let back: f64 = s.parse().unwrap();
            proptest::prop_assert!((back - x).abs() <= 5e-9 * x.abs());
        }
    }
}
