//! Raw per-sample CSV files.
//!
//! Header `sample_index,<columns...>`; one row per sample in index order;
//! values in scientific notation with 17 significant digits, which round-trips
//! every `f64` exactly; `\n` line endings.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lpp_core::SampleTable;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(w)
}

/// 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_raw_to<W: Write>(w: W, table: &SampleTable) -> Result<()> {
    let mut out = writer(w);
    out.write_record(std::iter::once("sample_index").chain(table.columns.iter().map(String::as_str)))?;
    let mut record = Vec::with_capacity(table.columns.len() + 1);
    for (index, row) in table.indices.iter().zip(&table.rows) {
        record.clear();
        record.push(index.to_string());
        record.extend(row.iter().map(|&v| format_value(v)));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `table` to `path` via a temporary file, so a reader never sees a
/// partial file.
pub fn write_raw(path: &Path, table: &SampleTable) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    let file = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    write_raw_to(std::io::BufWriter::new(file), table).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

pub fn read_raw_from<R: Read>(r: R) -> Result<SampleTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("sample_index") {
        bail!("first column must be sample_index");
    }
    let mut table = SampleTable::new(header.iter().skip(1).map(str::to_string).collect());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let index: u64 = rec[0]
            .parse()
            .map_err(|_| anyhow!("row {}: bad sample_index {:?}", line + 1, &rec[0]))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|_| anyhow!("row {}: bad value {f:?}", line + 1)))
            .collect::<Result<Vec<f64>>>()?;
        table.push(index, row).map_err(|e| anyhow!("row {}: {e}", line + 1))?;
    }
    Ok(table)
}

pub fn read_raw(path: &Path) -> Result<SampleTable> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_raw_from(std::io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes(t: &SampleTable) -> Vec<u8> {
        let mut v = Vec::new();
        write_raw_to(&mut v, t).unwrap();
        v
    }

    #[test]
    fn zero_samples_give_a_header_only_file() {
        let t = SampleTable::new(vec!["T_192".into(), "T_2000".into()]);
        assert_eq!(String::from_utf8(bytes(&t)).unwrap(), "sample_index,T_192,T_2000\n");
        assert_eq!(read_raw_from(&bytes(&t)[..]).unwrap(), t);
    }

    #[test]
    fn values_round_trip_exactly() {
        let mut t = SampleTable::new(vec!["a".into(), "b".into()]);
        let mut g = lpp_core::oracle::NormalStream::new(1);
        for i in 0..2000 {
            let x = g.normal() * 10f64.powi((i % 40) - 20);
            t.push(i as u64, vec![x, 1.0 / 3.0 + i as f64]).unwrap();
        }
        t.push(5000, vec![f64::MIN_POSITIVE, f64::MAX]).unwrap();
        t.push(5001, vec![5e-324, -0.0]).unwrap();
        let back = read_raw_from(&bytes(&t)[..]).unwrap();
        assert_eq!(back.indices, t.indices);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn formatting_has_seventeen_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(8000.0), "8.0000000000000000e3");
        let s = String::from_utf8(bytes(&{
            let mut t = SampleTable::new(vec!["x".into()]);
            t.push(3, vec![2.5]).unwrap();
            t
        }))
        .unwrap();
        assert_eq!(s, "sample_index,x\n3,2.5000000000000000e0\n");
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(read_raw_from(&b"index,a\n0,1\n"[..]).is_err());
        assert!(read_raw_from(&b"sample_index,a\n0,x\n"[..]).is_err());
        assert!(read_raw_from(&b"sample_index,a\n1,1\n0,1\n"[..]).is_err());
    }
}
