use persuasion_core::{Belief, Error, Result};
use serde::Serialize;
use serde_json::Value;

/// Version of the machine-readable report layout.
pub const FORMAT_VERSION: u32 = 1;

/// Nine significant digits, shortest form.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

pub fn belief(b: &Belief, states: &[String]) -> String {
    let parts: Vec<String> = b.probs().iter().zip(states).map(|(p, s)| format!("{s}={}", sig(*p))).collect();
    format!("({})", parts.join(", "))
}

pub fn machine(command: &str, body: impl Serialize) -> Result<String> {
    let mut v = serde_json::to_value(body).map_err(|e| Error::InternalConsistency(format!("serialization failed: {e}")))?;
    let Value::Object(fields) = &mut v else {
        return Err(Error::InternalConsistency("report is not an object".into()));
    };
    let mut envelope = serde_json::Map::new();
    envelope.insert("format_version".into(), FORMAT_VERSION.into());
    envelope.insert("command".into(), command.into());
    envelope.append(fields);
    let mut s = serde_json::to_string_pretty(&Value::Object(envelope)).expect("json values serialize");
    s.push('\n');
    Ok(s)
}

/// Comma-separated table; fields containing commas or quotes are quoted.
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        let mut csv = Csv { out: String::new() };
        csv.row(header);
        csv
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: impl IntoIterator<Item = S>) {
        let cells: Vec<String> = fields
            .into_iter()
            .map(|f| {
                let f = f.as_ref();
                if f.contains([',', '"', '\n']) {
                    format!("\"{}\"", f.replace('"', "\"\""))
                } else {
                    f.to_string()
                }
            })
            .collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig(1.0 / 15.0), "0.0666666667");
        assert_eq!(sig(0.6), "0.6");
        assert_eq!(sig(-0.0), "0");
        assert_eq!(sig(123456789.4), "123456789");
        assert_eq!(sig(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_quoting() {
        let mut c = Csv::new(["a", "b"]);
        c.row(["x,y", "say \"hi\""]);
        assert_eq!(c.finish(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    }
}
