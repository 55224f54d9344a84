use std::path::Path;

use super::HarnessError;
use crate::model::VoltageTrace;

const HEADER: [&str; 3] = ["time_s", "current_A", "voltage_V"];

/// CSV text of a trace, values at 9 significant digits.
pub fn trace_to_csv(trace: &VoltageTrace) -> String {
    let mut s = String::with_capacity(40 * trace.len() + 32);
    s.push_str("time_s,current_A,voltage_V\n");
    for i in 0..trace.len() {
        s.push_str(&format!(
            "{:.8e},{:.8e},{:.8e}\n",
            trace.time[i], trace.current[i], trace.voltage[i]
        ));
    }
    s
}

/// Parses CSV with the columns `time_s,current_A,voltage_V` (any order,
/// extra columns ignored). Time must increase strictly.
pub fn trace_from_csv(text: &str) -> Result<VoltageTrace, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| HarnessError::Parse { line: 1, reason: e.to_string() })?
        .clone();
    let mut cols = [0usize; 3];
    for (c, name) in cols.iter_mut().zip(HEADER) {
        *c = headers.iter().position(|h| h == name).ok_or_else(|| HarnessError::Parse {
            line: 1,
            reason: format!("missing column {name}"),
        })?;
    }
    let mut t = VoltageTrace {
        time: Vec::new(),
        current: Vec::new(),
        voltage: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| HarnessError::Parse { line, reason: e.to_string() })?;
        let mut vals = [0.0; 3];
        for (v, &c) in vals.iter_mut().zip(&cols) {
            let field = rec.get(c).ok_or_else(|| HarnessError::Parse {
                line,
                reason: "too few fields".into(),
            })?;
            *v = field.parse::<f64>().map_err(|_| HarnessError::Parse {
                line,
                reason: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse { line, reason: "non-finite value".into() });
            }
        }
        if let Some(&last) = t.time.last() {
            if vals[0] <= last {
                return Err(HarnessError::Parse {
                    line,
                    reason: format!("time {} does not increase", vals[0]),
                });
            }
        }
        t.time.push(vals[0]);
        t.current.push(vals[1]);
        t.voltage.push(vals[2]);
    }
    Ok(t)
}

pub fn save_trace(trace: &VoltageTrace, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, trace_to_csv(trace)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_trace(path: &Path) -> Result<VoltageTrace, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    trace_from_csv(&text)
}
