//! File formats: series CSV, per-octave detail CSV with a JSON manifest,
//! and spectra JSONL.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pyramid::{DetailSet, SeriesMatrix};
use crate::specmat::{SpectrumRecord, WaveletSpectrum};

/// One line per component, comma separated.
pub fn write_series_csv(path: &Path, y: &SeriesMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in y.rows() {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(path: &Path) -> Result<SeriesMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("row {i}: cannot parse {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    SeriesMatrix::from_rows(rows)
}

/// Writes `octave_<j>.csv` per octave (rows = components) and `manifest.json`.
pub fn write_detail_set(dir: &Path, d: &DetailSet) -> Result<()> {
    fs::create_dir_all(dir)?;
    for o in &d.octaves {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join(format!("octave_{}.csv", o.octave)))?;
        for i in 0..d.p {
            w.write_record(o.row(i).iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
    }
    let manifest = serde_json::json!({
        "p": d.p,
        "n": d.n,
        "filter": d.filter,
        "trimmed": d.trimmed,
        "octaves": d.manifest(),
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn write_spectra_jsonl(path: &Path, spectra: &[WaveletSpectrum]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in spectra {
        serde_json::to_writer(&mut w, &s.record())?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectra_jsonl(path: &Path) -> Result<Vec<WaveletSpectrum>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SpectrumRecord = serde_json::from_str(&line)?;
        out.push(WaveletSpectrum::from_eigenvalues(rec.j, rec.n_j, rec.eigenvalues));
    }
    Ok(out)
}

/// Full `W(2^j)` matrices, one CSV per octave.
pub fn write_matrices_csv(dir: &Path, spectra: &[WaveletSpectrum]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for s in spectra {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join(format!("matrix_{}.csv", s.octave)))?;
        for row in s.matrix.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
    }
    Ok(())
}
