//! Point file formats.
//!
//! - CSV: one point per line, comma-separated coordinates, no header.
//! - Binary: little-endian `u64` n, little-endian `u64` dims, then
//!   `n * dims` little-endian `f64` coordinates.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::{CentroidSet, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    Csv,
    Binary,
}

impl PointFormat {
    /// `.bin`, `.f64` and `.dat` are binary; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("bin" | "f64" | "dat") => PointFormat::Binary,
            _ => PointFormat::Csv,
        }
    }
}

pub fn read_points(path: &Path) -> Result<Dataset> {
    let file = BufReader::new(File::open(path)?);
    match PointFormat::from_path(path) {
        PointFormat::Csv => read_csv(file),
        PointFormat::Binary => read_binary(file),
    }
}

pub fn write_points(path: &Path, data: &Dataset) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    match PointFormat::from_path(path) {
        PointFormat::Csv => write_csv(&mut file, data.points(), data.dims())?,
        PointFormat::Binary => write_binary(&mut file, data)?,
    }
    file.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    let mut dims = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if dims == 0 {
            dims = record.len();
        } else if record.len() != dims {
            return Err(Error::Parse(format!(
                "line {}: expected {} coordinates, found {}",
                line + 1,
                dims,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!("line {}: invalid coordinate {field:?}", line + 1))
            })?;
            points.push(v);
        }
    }
    Dataset::new(points, dims)
}

/// Writes one row per point (or centroid).
pub fn write_csv<W: Write>(writer: W, coords: &[f64], dims: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for row in coords.chunks_exact(dims) {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_centers(path: &Path, centers: &CentroidSet) -> Result<()> {
    write_csv(
        BufWriter::new(File::create(path)?),
        centers.coords(),
        centers.dims(),
    )
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<Dataset> {
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word);
    reader.read_exact(&mut word)?;
    let dims = u64::from_le_bytes(word);
    let len = n
        .checked_mul(dims)
        .and_then(|l| usize::try_from(l).ok())
        .ok_or_else(|| Error::Parse(format!("header n={n} dims={dims} overflows")))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::Parse(format!(
            "expected {} coordinate bytes for n={n} dims={dims}, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let points = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    Dataset::new(points, dims as usize)
}

pub fn write_binary<W: Write>(mut writer: W, data: &Dataset) -> Result<()> {
    writer.write_all(&(data.n() as u64).to_le_bytes())?;
    writer.write_all(&(data.dims() as u64).to_le_bytes())?;
    for v in data.points() {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_parses_rows() {
        let d = read_csv("1,2\n3.5, -4\n".as_bytes()).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.points(), &[1.0, 2.0, 3.5, -4.0]);
    }

    #[test]
    fn csv_rejects_ragged_and_garbage() {
        assert!(read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_csv("1,x\n".as_bytes()).is_err());
        assert!(read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn binary_layout_is_exact() {
        let d = Dataset::from_rows(&[[1.0, 2.0]]).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &d).unwrap();
        let mut expected = Vec::new();
        expected.extend(1u64.to_le_bytes());
        expected.extend(2u64.to_le_bytes());
        expected.extend(1.0f64.to_le_bytes());
        expected.extend(2.0f64.to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn binary_rejects_truncation() {
        let d = Dataset::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &d).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            PointFormat::from_path(Path::new("a.bin")),
            PointFormat::Binary
        );
        assert_eq!(PointFormat::from_path(Path::new("a.csv")), PointFormat::Csv);
        assert_eq!(PointFormat::from_path(Path::new("a")), PointFormat::Csv);
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(
            rows in proptest::collection::vec(proptest::collection::vec(-1e12f64..1e12, 3), 1..40)
        ) {
            let d = Dataset::from_rows(&rows).unwrap();
            let mut bin = Vec::new();
            write_binary(&mut bin, &d).unwrap();
            prop_assert_eq!(&read_binary(bin.as_slice()).unwrap(), &d);
            let mut text = Vec::new();
            write_csv(&mut text, d.points(), d.dims()).unwrap();
            prop_assert_eq!(&read_csv(text.as_slice()).unwrap(), &d);
        }
    }
}
