//! Machine-readable output: JSON documents and CSV tables.
//!
//! Every float is rounded to 12 significant digits before serialization
//! and printed in Rust's shortest round-trip form, so identical runs
//! produce byte-identical files regardless of platform or thread count.
//! JSON object keys are emitted in sorted order for the same reason.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::protocol::SessionTranscript;
use crate::stats::DeviationReport;

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific form parses")
}

fn round_numbers(value: &mut Value) {
    match value {
        Value::Number(num) => {
            if num.is_f64() {
                let x = num.as_f64().expect("checked is_f64");
                if let Some(rounded) = serde_json::Number::from_f64(round_sig12(x)) {
                    *num = rounded;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_numbers(&mut v);
    let mut out = serde_json::to_string_pretty(&v).expect("values render");
    out.push('\n');
    out
}

/// Transcript JSON (bit strings as 0/1 text).
pub fn transcript_json(transcript: &SessionTranscript) -> String {
    to_json_pretty(transcript)
}

/// Parses a transcript back from JSON.
pub fn parse_transcript(text: &str) -> Result<SessionTranscript> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

fn fmt_float(x: f64) -> String {
    format!("{}", round_sig12(x))
}

/// Per-session campaign CSV: `session,arm,qber,aborted,key_agreement`.
/// The key-agreement column is empty for aborted sessions.
pub fn campaign_csv(transcripts: &[SessionTranscript], arm: &str) -> String {
    let mut out = String::from("session,arm,qber,aborted,key_agreement\n");
    for (index, t) in transcripts.iter().enumerate() {
        let agreement = match t.keys_agree() {
            Some(flag) => flag.to_string(),
            None => String::new(),
        };
        out.push_str(&format!(
            "{index},{arm},{},{},{agreement}\n",
            fmt_float(t.qber),
            t.aborted
        ));
    }
    out
}

/// Plot-ready deviation CSV: `arm,session,qber`, 3 x sessions rows.
pub fn deviation_csv(report: &DeviationReport) -> String {
    let mut out = String::from("arm,session,qber\n");
    for arm in &report.arms {
        for (index, qber) in arm.qbers.iter().enumerate() {
            out.push_str(&format!("{},{index},{}\n", arm.label, fmt_float(*qber)));
        }
    }
    out
}
