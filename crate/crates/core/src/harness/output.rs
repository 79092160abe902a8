use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentResult;
use super::HarnessError;
use crate::bounds::BoundReport;
use crate::oned::WSample;

/// One row of `runs.csv`.
///
/// `value1` / `value2` by model: cpdr `final_time` / `max_infected`;
/// aprr `size` / `max_coord1`; oned `rightmost` / `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub run_index: u64,
    pub seed: u64,
    pub verdict: String,
    pub value1: f64,
    pub value2: f64,
    pub wall_ms: Option<f64>,
}

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: Option<f64>,
    pub runs: u64,
    pub successes: u64,
    pub fraction: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runs_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<(), HarnessError> {
    write_rows(out, records)
}

pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

/// Writes `runs.csv`, `summary.csv`, and when present `w_samples.csv` and
/// `cutting.csv` into `dir`, creating it if needed.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_runs_csv(File::create(dir.join("runs.csv"))?, &result.records)?;
    write_rows(File::create(dir.join("summary.csv"))?, &result.summary)?;
    if !result.w_samples.is_empty() {
        write_rows::<_, WSample>(File::create(dir.join("w_samples.csv"))?, &result.w_samples)?;
    }
    if !result.cutting_table.is_empty() {
        #[derive(Serialize)]
        struct Row {
            i: u64,
            cutting_prob_exact: f64,
        }
        let rows: Vec<Row> = result
            .cutting_table
            .iter()
            .map(|&(i, p)| Row { i, cutting_prob_exact: p })
            .collect();
        write_rows(File::create(dir.join("cutting.csv"))?, &rows)?;
    }
    Ok(())
}

pub fn write_bounds_json(reports: &[BoundReport], path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(reports).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Aligned text table of bound reports.
pub fn format_bounds_table(reports: &[BoundReport]) -> String {
    let rows: Vec<(String, String, String)> = reports
        .iter()
        .map(|r| {
            let value = if r.finite { format!("{:.9}", r.value) } else { "inf".to_string() };
            (r.name.clone(), compact_inputs(&r.inputs), value)
        })
        .collect();
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(6);
    let mut s = format!("{:<w0$}  {:<w1$}  value\n", "name", "inputs");
    for (a, b, c) in rows {
        s += &format!("{a:<w0$}  {b:<w1$}  {c}\n");
    }
    s
}

fn compact_inputs(v: &serde_json::Value) -> String {
    match v.as_object() {
        Some(map) => map
            .iter()
            .filter(|(k, _)| k.as_str() != "dist")
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" "),
        None => v.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> impl Strategy<Value = RunRecord> {
        (
            prop_oneof![Just("cpdr"), Just("aprr"), Just("oned_p1")],
            proptest::option::of(-1e6f64..1e6),
            any::<u64>(),
            any::<u64>(),
            prop_oneof![Just("extinct"), Just("alive"), Just("size_cap")],
            -1e12f64..1e12,
            0f64..1e9,
            proptest::option::of(0f64..1e5),
        )
            .prop_map(|(m, sv, idx, seed, v, a, b, w)| RunRecord {
                model: m.to_string(),
                sweep_param: if sv.is_some() { "lambda".into() } else { String::new() },
                sweep_value: sv,
                run_index: idx,
                seed,
                verdict: v.to_string(),
                value1: a,
                value2: b.floor(),
                wall_ms: w,
            })
    }

    proptest! {
        #[test]
        fn runs_csv_round_trips_bytes(rows in proptest::collection::vec(record(), 0..20)) {
            let mut first = Vec::new();
            write_runs_csv(&mut first, &rows).unwrap();
            let parsed = read_runs_csv(first.as_slice()).unwrap();
            prop_assert_eq!(&parsed, &rows);
            let mut second = Vec::new();
            write_runs_csv(&mut second, &parsed).unwrap();
            prop_assert_eq!(first, second);
        }
    }

    #[test]
    fn header_matches_schema() {
        let mut out = Vec::new();
        write_runs_csv(
            &mut out,
            &[RunRecord {
                model: "cpdr".into(),
                sweep_param: String::new(),
                sweep_value: None,
                run_index: 0,
                seed: 7,
                verdict: "extinct".into(),
                value1: 0.5,
                value2: 1.0,
                wall_ms: None,
            }],
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "model,sweep_param,sweep_value,run_index,seed,verdict,value1,value2,wall_ms"
        );
        assert_eq!(lines.next().unwrap(), "cpdr,,,0,7,extinct,0.5,1.0,");
    }
}
