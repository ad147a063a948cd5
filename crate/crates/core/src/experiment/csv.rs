//! CSV emission for sweep results and selection traces.
//!
//! Both artifacts use a fixed header, LF line endings, and floats with
//! 17 significant digits so every `f64` survives a parse round-trip
//! bit-exactly.  Wall-clock columns are pinned to 0.0: rates, gains, and
//! iteration counts are deterministic in (config, seed) and the emitted
//! bytes stay reproducible run to run (measured times belong in logs).

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{SweepResult, SweepRow};

/// Exact header of the sweep CSV.
pub const SWEEP_HEADER: &str =
    "scenario,strategy,N,dpc_mean_bpshz,zf_mean_bpshz,dpc_gain_pct,zf_gain_pct,iters,wall_ms";

/// Exact header of the selection-trace CSV.
pub const TRACE_HEADER: &str = "strategy,N,antenna_index";

/// 17 significant digits: enough to reconstruct any `f64` exactly.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a sweep as CSV text (header plus one line per row, LF endings).
/// A `None` ZF value renders as an empty field; harness-produced sweeps
/// always populate it because selection sizes never drop below the user
/// count.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in &result.rows {
        let zf_mean = row.zf_mean_bpshz.map(fmt_float).unwrap_or_default();
        let zf_gain = row.zf_gain_pct.map(fmt_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.scenario,
            row.strategy.name(),
            row.selected,
            fmt_float(row.dpc_mean_bpshz),
            zf_mean,
            fmt_float(row.dpc_gain_pct),
            zf_gain,
            row.solver_iterations,
            fmt_float(0.0),
        ));
    }
    out
}

/// Render the active antenna indices of every row, one line per antenna,
/// indices 1-based and ascending within each (strategy, N) block.
pub fn trace_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for row in rows {
        for index in row.mask.active_indices() {
            out.push_str(&format!(
                "{},{},{}\n",
                row.strategy.name(),
                row.selected,
                index + 1
            ));
        }
    }
    out
}

/// Write the sweep CSV to disk.
pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, sweep_csv(result)).map_err(|e| Error::io(path, e))
}

/// Write the selection-trace CSV to disk.
pub fn write_trace_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, trace_csv(rows)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::SelectionMask;
    use crate::select::Strategy;

    fn demo_row(strategy: Strategy, selected: usize) -> SweepRow {
        SweepRow {
            scenario: "demo".into(),
            strategy,
            selected,
            dpc_mean_bpshz: std::f64::consts::PI,
            zf_mean_bpshz: Some(1.0 / 3.0),
            dpc_gain_pct: -7.25e-4,
            zf_gain_pct: Some(12.5),
            solver_iterations: 42,
            solver_wall_ms: 123.456,
            mask: SelectionMask::from_indices(4, &(0..selected).collect::<Vec<_>>()).unwrap(),
        }
    }

    fn demo_result() -> SweepResult {
        SweepResult {
            scenario: "demo".into(),
            rows: vec![demo_row(Strategy::Convex, 2), demo_row(Strategy::Power, 4)],
            summaries: vec![],
        }
    }

    #[test]
    fn header_is_pinned_verbatim() {
        assert_eq!(
            SWEEP_HEADER,
            "scenario,strategy,N,dpc_mean_bpshz,zf_mean_bpshz,dpc_gain_pct,zf_gain_pct,iters,wall_ms"
        );
        assert_eq!(TRACE_HEADER, "strategy,N,antenna_index");
    }

    #[test]
    fn empty_sweep_emits_header_only() {
        let empty = SweepResult {
            scenario: "none".into(),
            rows: vec![],
            summaries: vec![],
        };
        assert_eq!(sweep_csv(&empty), format!("{SWEEP_HEADER}\n"));
        assert_eq!(trace_csv(&[]), format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn lines_end_with_lf_only() {
        let text = sweep_csv(&demo_result());
        assert!(!text.contains('\r'), "CSV must use LF line endings");
        assert!(text.ends_with('\n'), "every line ends with a newline");
        assert_eq!(text.lines().count(), 3, "header plus two rows");
    }

    #[test]
    fn floats_round_trip_bit_exactly_through_the_csv() {
        let result = demo_result();
        let text = sweep_csv(&result);
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], "demo");
        assert_eq!(fields[1], "convex");
        assert_eq!(fields[2], "2");
        let parse = |s: &str| s.parse::<f64>().expect("emitted floats must parse");
        let row = &result.rows[0];
        assert_eq!(parse(fields[3]).to_bits(), row.dpc_mean_bpshz.to_bits());
        assert_eq!(
            parse(fields[4]).to_bits(),
            row.zf_mean_bpshz.unwrap().to_bits()
        );
        assert_eq!(parse(fields[5]).to_bits(), row.dpc_gain_pct.to_bits());
        assert_eq!(
            parse(fields[6]).to_bits(),
            row.zf_gain_pct.unwrap().to_bits()
        );
        assert_eq!(fields[7], "42");
    }

    #[test]
    fn wall_clock_column_is_pinned_to_zero() {
        let text = sweep_csv(&demo_result());
        for line in text.lines().skip(1) {
            let wall = line.split(',').nth(8).unwrap();
            assert_eq!(
                wall.parse::<f64>().unwrap(),
                0.0,
                "measured time must never reach the CSV"
            );
        }
    }

    #[test]
    fn trace_lists_one_based_sorted_indices_per_row() {
        let rows = [demo_row(Strategy::Convex, 4), demo_row(Strategy::Power, 2)];
        let text = trace_csv(&rows);
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(
            body,
            vec![
                "convex,4,1",
                "convex,4,2",
                "convex,4,3",
                "convex,4,4",
                "power,2,1",
                "power,2,2",
            ],
            "full-array rows must list 1..=M in order"
        );
    }

    #[test]
    fn files_are_written_and_readable() {
        let dir = tempfile::tempdir().unwrap();
        let sweep_path = dir.path().join("sweep.csv");
        let trace_path = dir.path().join("trace.csv");
        let result = demo_result();
        write_sweep_csv(&result, &sweep_path).unwrap();
        write_trace_csv(&result.rows, &trace_path).unwrap();
        assert_eq!(std::fs::read_to_string(&sweep_path).unwrap(), sweep_csv(&result));
        assert_eq!(
            std::fs::read_to_string(&trace_path).unwrap(),
            trace_csv(&result.rows)
        );
    }
}
