//! CSV writers. All files are UTF-8, comma-separated, LF line endings,
//! header row first. Floats use the shortest representation that parses
//! back to the same value, so reruns diff cleanly.

use crate::runner::{RatePoint, SummaryRow, TraceLine};
use std::io::Write;
use std::path::Path;

pub const TRACE_HEADER: &str =
    "run_id,method,seed,t,worst_task_loss,avg_loss,grad_norm_exact,proj_grad_norm,duality_gap,eta_w,eta_p";

pub const SUMMARY_HEADER: &str =
    "run_id,method,seed,iterations,tau,worst_task_loss,avg_loss,duality_gap,grad_norm_exact,proj_grad_norm,p_gap,stationary";

pub const RATES_HEADER: &str = "t,mean_metric,fitted_slope,theoretical_slope";

/// Shortest round-trip decimal representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_trace(path: &Path, lines: &[TraceLine]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(TRACE_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for line in lines {
        let r = &line.record;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            line.run_id,
            line.method,
            line.seed,
            r.t,
            fmt_f64(r.worst_task_loss),
            fmt_f64(r.avg_task_loss),
            fmt_opt(r.exact_grad_norm),
            fmt_opt(r.projected_grad_norm),
            fmt_opt(r.duality_gap),
            fmt_f64(r.eta_w),
            fmt_f64(r.eta_p),
        )?;
    }
    out.flush()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(SUMMARY_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.run_id,
            row.method,
            row.seed,
            row.iterations,
            row.tau.map(|t| t.to_string()).unwrap_or_default(),
            fmt_f64(row.worst_task_loss),
            fmt_f64(row.avg_loss),
            fmt_opt(row.duality_gap),
            fmt_f64(row.grad_norm),
            fmt_f64(row.proj_grad_norm),
            fmt_f64(row.p_gap),
            row.stationary
                .map(|b| b.to_string())
                .unwrap_or_default(),
        )?;
    }
    out.flush()
}

pub fn write_rates(path: &Path, points: &[RatePoint]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(RATES_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.iterations,
            fmt_f64(p.mean_metric),
            fmt_f64(p.fitted_slope),
            fmt_f64(p.theoretical_slope),
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_shortest() {
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(0.6), "0.6");
        assert_eq!(fmt_f64(0.1 + 0.2), "0.30000000000000004");
        let v = 2.0f64 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
