//! Result persistence: CSV/JSON rendering and atomic file writes.
//!
//! Every CSV has a header row and a fixed column order; floats carry 17
//! significant digits so re-runs can be compared byte for byte.

use std::path::Path;

use crate::efficiency::{ExperimentOutput, LongRecord, TableRow};
use crate::error::Result;

/// 17 significant digits, locale-independent.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes via a sibling temp file and rename, so a failed run never leaves a
/// partial output behind.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let result = std::fs::write(&tmp, content).and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(Into::into)
}

/// Summary table CSV with the given key column name (`x`, `alpha_bar`, or
/// `alpha_min`).
pub fn table_csv(key_column: &str, rows: &[TableRow]) -> String {
    let mut out = format!("{key_column},mu,r\n");
    for row in rows {
        out.push_str(&format_float(row.key));
        out.push(',');
        out.push_str(&format_float(row.mu));
        out.push(',');
        out.push_str(&row.r.map_or_else(|| "nan".to_string(), format_float));
        out.push('\n');
    }
    out
}

/// Long-format CSV for re-analysis.
pub fn long_csv(records: &[LongRecord]) -> String {
    let mut out = String::from("x,n,replicate,method,estimate,deviated\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(r.x),
            r.n,
            r.replicate,
            r.method,
            format_float(r.estimate),
            u8::from(r.deviated),
        ));
    }
    out
}

/// Per-x fit summary CSV.
pub fn fit_csv(output: &ExperimentOutput) -> String {
    let mut out = String::from("x,r,beta0,beta1,tau2,sigma2,censored_cells\n");
    for curve in &output.curves {
        let (r, b0, b1, t2, s2) = match &curve.fit {
            Some(f) => (
                if f.beta1 < 0.0 { -f.beta1 } else { f64::NAN },
                f.beta0,
                f.beta1,
                f.tau2,
                f.sigma2,
            ),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_float(curve.x),
            format_float(r),
            format_float(b0),
            format_float(b1),
            format_float(t2),
            format_float(s2),
            curve.censored_cells,
        ));
    }
    out
}
