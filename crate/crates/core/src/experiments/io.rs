//! CSV readers and writers for traces, summaries, thresholds and bin data.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EnsembleSummary, OverlayRow, SummaryPoint, ThresholdReport};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::lambda_fit::{extrapolate, CurveFit};
use crate::simulator::{BinDataset, EstimateTrace};

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    run_id: usize,
    estimator: EstimatorKind,
    n: usize,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SummaryRow {
    estimator: EstimatorKind,
    n: usize,
    mean: f64,
    q05: f64,
    q95: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThresholdRow {
    estimator: EstimatorKind,
    threshold: f64,
    n_cross: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BinRow {
    item: usize,
    bin: usize,
    index: usize,
    rating: u8,
}

#[derive(Debug, Serialize)]
struct LambdaRow {
    i: usize,
    lambda_hat: f64,
    free_estimate: Option<f64>,
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Header `run_id,estimator,n,value`.
pub fn write_traces<W: Write>(out: W, traces: &[EstimateTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in traces {
        for &(n, value) in &t.points {
            w.serialize(TraceRow { run_id: t.run_id, estimator: t.estimator, n, value })?;
        }
    }
    finish(w)
}

/// Consecutive rows with the same run and estimator form one trace.
pub fn read_traces<R: Read>(input: R) -> Result<Vec<EstimateTrace>> {
    let mut out: Vec<EstimateTrace> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: TraceRow = row?;
        match out.last_mut() {
            Some(t) if t.run_id == row.run_id && t.estimator == row.estimator => {
                t.points.push((row.n, row.value))
            }
            _ => out.push(EstimateTrace {
                run_id: row.run_id,
                estimator: row.estimator,
                points: vec![(row.n, row.value)],
            }),
        }
    }
    Ok(out)
}

/// Header `estimator,n,mean,q05,q95`.
pub fn write_summaries<W: Write>(out: W, summaries: &[EnsembleSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in summaries {
        for pt in &s.points {
            w.serialize(SummaryRow {
                estimator: s.estimator,
                n: pt.n,
                mean: pt.mean,
                q05: pt.q05,
                q95: pt.q95,
            })?;
        }
    }
    finish(w)
}

/// The run count is not stored in the CSV and comes back as 0.
pub fn read_summaries<R: Read>(input: R) -> Result<Vec<EnsembleSummary>> {
    let mut out: Vec<EnsembleSummary> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: SummaryRow = row?;
        let pt = SummaryPoint { n: row.n, mean: row.mean, q05: row.q05, q95: row.q95 };
        match out.iter_mut().find(|s| s.estimator == row.estimator) {
            Some(s) => s.points.push(pt),
            None => out.push(EnsembleSummary { estimator: row.estimator, runs: 0, points: vec![pt] }),
        }
    }
    Ok(out)
}

/// Header `estimator,threshold,n_cross`; an empty `n_cross` means never.
pub fn write_thresholds<W: Write>(out: W, reports: &[ThresholdReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(ThresholdRow { estimator: r.estimator, threshold: r.threshold, n_cross: r.n_cross })?;
    }
    finish(w)
}

pub fn read_thresholds<R: Read>(input: R) -> Result<Vec<ThresholdReport>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| {
            let row: ThresholdRow = row?;
            Ok(ThresholdReport { estimator: row.estimator, threshold: row.threshold, n_cross: row.n_cross })
        })
        .collect()
}

/// Header `item,bin,index,rating`; items and bins count from 0, indices from 1.
pub fn write_bin_dataset<W: Write>(out: W, data: &BinDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for item in 0..data.items() {
        for bin in 0..data.bins() {
            for (idx, &r) in data.cell(item, bin).iter().enumerate() {
                w.serialize(BinRow { item, bin, index: idx + 1, rating: u8::from(r) })?;
            }
        }
    }
    finish(w)
}

/// Rows may come in any order but must cover a full `items × bins × n` grid.
pub fn read_bin_dataset<R: Read>(input: R) -> Result<BinDataset> {
    let mut rows: Vec<BinRow> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: BinRow = row?;
        if row.rating > 1 {
            return Err(Error::MalformedData(format!("rating must be 0 or 1, got {}", row.rating)));
        }
        if row.index == 0 {
            return Err(Error::MalformedData("rating indices start at 1".into()));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty("bin dataset"));
    }
    let items = rows.iter().map(|r| r.item).max().unwrap() + 1;
    let bins = rows.iter().map(|r| r.bin).max().unwrap() + 1;
    let per_bin = rows.iter().map(|r| r.index).max().unwrap();
    let total = items * bins * per_bin;
    if rows.len() != total {
        return Err(Error::MalformedData(format!(
            "expected {total} rows for {items} items x {bins} bins x {per_bin} ratings, got {}",
            rows.len()
        )));
    }
    let mut ratings: Vec<Option<bool>> = vec![None; total];
    for r in &rows {
        let slot = &mut ratings[(r.item * bins + r.bin) * per_bin + r.index - 1];
        if slot.replace(r.rating == 1).is_some() {
            return Err(Error::MalformedData(format!(
                "duplicate row for item {} bin {} index {}",
                r.item, r.bin, r.index
            )));
        }
    }
    // row count equals the grid size and there are no duplicates, so every slot is filled
    let ratings = ratings.into_iter().map(|r| r.unwrap_or(false)).collect();
    BinDataset::new(items, bins, per_bin, ratings, None)
}

/// Header `i,lambda_hat,free_estimate` for `i = 1..=n`.
pub fn write_lambda_table<W: Write>(
    out: W,
    curve: &CurveFit,
    free: Option<&[f64]>,
    n: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for i in 1..=n {
        w.serialize(LambdaRow {
            i,
            lambda_hat: extrapolate(curve, i)?,
            free_estimate: free.and_then(|f| f.get(i - 1).copied()),
        })?;
    }
    finish(w)
}

/// Header `n,empirical,theory,z`.
pub fn write_overlay<W: Write>(out: W, rows: &[OverlayRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_round_trip() {
        let traces = vec![
            EstimateTrace { run_id: 0, estimator: EstimatorKind::SampleMean, points: vec![(1, 1.0), (2, 0.5)] },
            EstimateTrace { run_id: 0, estimator: EstimatorKind::Mle, points: vec![(1, 0.999999), (2, 0.25)] },
        ];
        let mut buf = Vec::new();
        write_traces(&mut buf, &traces).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("run_id,estimator,n,value\n0,sample-mean,1,1.0\n"));
        assert_eq!(read_traces(buf.as_slice()).unwrap(), traces);
    }

    #[test]
    fn summaries_and_thresholds_round_trip() {
        let s = vec![EnsembleSummary {
            estimator: EstimatorKind::AffineWeighted,
            runs: 0,
            points: vec![SummaryPoint { n: 3, mean: 0.4, q05: 0.1, q95: 0.7 }],
        }];
        let mut buf = Vec::new();
        write_summaries(&mut buf, &s).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("estimator,n,mean,q05,q95\n"));
        assert_eq!(read_summaries(buf.as_slice()).unwrap(), s);

        let t = vec![
            ThresholdReport { estimator: EstimatorKind::SampleMean, threshold: 0.05, n_cross: Some(282) },
            ThresholdReport { estimator: EstimatorKind::SampleMean, threshold: 0.01, n_cross: None },
        ];
        let mut buf = Vec::new();
        write_thresholds(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "estimator,threshold,n_cross\nsample-mean,0.05,282\nsample-mean,0.01,\n");
        assert_eq!(read_thresholds(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn bin_dataset_round_trip_and_validation() {
        let data = BinDataset::new(2, 2, 3, vec![true, false, true, false, false, true, true, true, false, true, false, false], None).unwrap();
        let mut buf = Vec::new();
        write_bin_dataset(&mut buf, &data).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("item,bin,index,rating\n0,0,1,1\n"));
        assert_eq!(read_bin_dataset(buf.as_slice()).unwrap(), data);

        let missing = "item,bin,index,rating\n0,0,1,1\n0,0,3,0\n";
        assert!(matches!(read_bin_dataset(missing.as_bytes()), Err(Error::MalformedData(_))));
        let dup = "item,bin,index,rating\n0,0,1,1\n0,0,1,0\n";
        assert!(matches!(read_bin_dataset(dup.as_bytes()), Err(Error::MalformedData(_))));
        let bad = "item,bin,index,rating\n0,0,1,2\n";
        assert!(read_bin_dataset(bad.as_bytes()).is_err());
        assert!(read_bin_dataset("item,bin,index,rating\n".as_bytes()).is_err());
    }

    #[test]
    fn lambda_table_has_one_row_per_index() {
        let curve = CurveFit::new(0.1, 0.95).unwrap();
        let mut buf = Vec::new();
        write_lambda_table(&mut buf, &curve, Some(&[1.0, 0.9]), 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,lambda_hat,free_estimate");
        assert_eq!(lines[1], "1,1.0,1.0");
        assert!(lines[2].starts_with("2,0.955"));
        assert!(lines[3].ends_with(','));
    }
}
