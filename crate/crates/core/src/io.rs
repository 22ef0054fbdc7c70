//! CSV ingestion and the binary structure format.
//!
//! Structure files are little-endian and fixed-width:
//!
//! | field        | type / count                                   |
//! |--------------|------------------------------------------------|
//! | magic        | `b"NDKV"`                                      |
//! | version      | `u32` ([`FORMAT_VERSION`])                     |
//! | flags        | `u32`: bit 0 index arrays, bit 1 k-vectors     |
//! | n, d, n_db, n_k | `u64` each                                  |
//! | perm         | `n × u64`                                      |
//! | points       | `n·d × f64`, structured row-major               |
//! | index arrays | `(d−1)·n × u64` (bit 0 only)                   |
//! | lines        | `n_db·d_k × (f64 slope, f64 intercept)` (bit 1) |
//! | k-vectors    | `n_db·d_k·n_k × u64` (bit 1)                   |
//! | minima       | `n_db × f64`                                   |
//!
//! `d_k` is `d` when index arrays are present and 1 otherwise: a structure
//! without index arrays only ever maps dimension 0.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::line::LineParams;
use crate::model::Dataset;
use crate::structure::{IndexArray, KVectorTable, PreprocessedDatabase, StructuredDatabase};

pub const MAGIC: [u8; 4] = *b"NDKV";
pub const FORMAT_VERSION: u32 = 1;
const FLAG_INDEX: u32 = 1;
const FLAG_KVECTOR: u32 = 2;

/// Reads comma-separated rows of numbers. A first row that does not parse as
/// numbers is taken as a header and skipped.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_csv(File::open(path)?, path)
}

pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let err = |line: usize, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut coords = Vec::new();
    let mut d = 0;
    let mut rows = 0;
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(err(line, e.to_string()));
            }
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(e) => {
                let field = record
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or("");
                return Err(err(line, format!("field {field:?} is not a number ({e})")));
            }
        };
        first = false;
        if rows == 0 {
            d = values.len();
        } else if values.len() != d {
            return Err(err(
                line,
                format!("row has {} fields, expected {d}", values.len()),
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(err(line, format!("field {j} is not finite")));
        }
        coords.extend(values);
        rows += 1;
    }
    if rows == 0 {
        return Err(err(0, "no data rows".into()));
    }
    Dataset::from_flat(d, coords)
}

/// Writes one row per point, no header, shortest round-trip float formatting.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in ds.rows() {
        let mut sep = "";
        for v in row {
            write!(w, "{sep}{v}")?;
            sep = ",";
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_structure(pre: &PreprocessedDatabase, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_structure(pre, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_structure(path: impl AsRef<Path>) -> Result<PreprocessedDatabase> {
    read_structure(BufReader::new(File::open(path)?))
}

pub fn write_structure<W: Write>(pre: &PreprocessedDatabase, w: &mut W) -> Result<()> {
    let sdb = pre.structure();
    let flags = if pre.index().is_some() { FLAG_INDEX } else { 0 }
        | if pre.kvectors().is_some() {
            FLAG_KVECTOR
        } else {
            0
        };
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    for v in [sdb.len(), sdb.dims(), sdb.n_db(), pre.n_k()] {
        put_u64(w, v)?;
    }
    for &p in sdb.perm() {
        put_u64(w, p)?;
    }
    for &v in sdb.as_flat() {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(index) = pre.index() {
        for &i in index.as_flat() {
            put_u64(w, i)?;
        }
    }
    if let Some(kv) = pre.kvectors() {
        for line in kv.lines() {
            w.write_all(&line.m.to_le_bytes())?;
            w.write_all(&line.q.to_le_bytes())?;
        }
        for &k in kv.entries() {
            put_u64(w, k)?;
        }
    }
    for &m in pre.subdb_minima() {
        w.write_all(&m.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_structure<R: BufRead>(mut r: R) -> Result<PreprocessedDatabase> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "header")?;
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = get_u32(&mut r, "header")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = get_u32(&mut r, "header")?;
    if flags & !(FLAG_INDEX | FLAG_KVECTOR) != 0 {
        return Err(Error::Inconsistent(format!("unknown flag bits {flags:#x}")));
    }
    let n = get_usize(&mut r, "header")?;
    let d = get_usize(&mut r, "header")?;
    let n_db = get_usize(&mut r, "header")?;
    let n_k = get_usize(&mut r, "header")?;
    if n == 0 || d == 0 || n_db == 0 || n_db > n || n_k < 2 {
        return Err(Error::Inconsistent(format!(
            "header n={n} d={d} n_db={n_db} n_k={n_k}"
        )));
    }
    let has_index = flags & FLAG_INDEX != 0;
    let has_kv = flags & FLAG_KVECTOR != 0;
    let n_d = n
        .checked_mul(d)
        .ok_or_else(|| Error::Inconsistent("n·d overflows".into()))?;

    let perm = get_usizes(&mut r, n, "permutation")?;
    let mut seen = vec![false; n];
    for &p in &perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Inconsistent("permutation is not a bijection".into()));
        }
    }
    let points = get_f64s(&mut r, n_d, "points")?;
    let structure = StructuredDatabase::from_parts(points, perm, d, n_db)?;

    let index = if has_index {
        let maps = get_usizes(&mut r, (d - 1) * n, "index arrays")?;
        for j in 1..d {
            for s in 0..n_db {
                let range = structure.subdb_range(s);
                let slice = &maps[(j - 1) * n + range.start..(j - 1) * n + range.end];
                if slice.iter().any(|g| !range.contains(g)) {
                    return Err(Error::Inconsistent(format!(
                        "index array {j} leaves sub-database {s}"
                    )));
                }
            }
        }
        Some(IndexArray::from_parts(n, d, maps)?)
    } else {
        None
    };

    let kvectors = if has_kv {
        let dims = if has_index { d } else { 1 };
        let count = n_db * dims;
        let mut lines = Vec::with_capacity(count);
        for _ in 0..count {
            let m = get_f64(&mut r, "mapping lines")?;
            let q = get_f64(&mut r, "mapping lines")?;
            lines.push(LineParams::new(m, q));
        }
        let total = count
            .checked_mul(n_k)
            .ok_or_else(|| Error::Inconsistent("k-vector size overflows".into()))?;
        let k = get_usizes(&mut r, total, "k-vectors")?;
        for (c, kvec) in k.chunks(n_k).enumerate() {
            let range = structure.subdb_range(c / dims);
            let ok = kvec.windows(2).all(|w| w[0] <= w[1])
                && kvec[0] >= range.start
                && kvec[n_k - 1] <= range.end;
            if !ok {
                return Err(Error::Inconsistent(format!("k-vector {c} is out of range")));
            }
        }
        Some(KVectorTable::from_parts(dims, n_k, lines, k)?)
    } else {
        None
    };

    let minima = get_f64s(&mut r, n_db, "sub-database minima")?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Inconsistent("trailing bytes after minima".into()));
    }
    PreprocessedDatabase::assemble(structure, index, kvectors, n_k, minima)
}

fn put_u64<W: Write>(w: &mut W, v: usize) -> std::io::Result<()> {
    w.write_all(&(v as u64).to_le_bytes())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Truncated(what),
        _ => Error::Io(e),
    })
}

fn get_u32<R: Read>(r: &mut R, what: &'static str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64<R: Read>(r: &mut R, what: &'static str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

fn get_usize<R: Read>(r: &mut R, what: &'static str) -> Result<usize> {
    let v = get_u64(r, what)?;
    usize::try_from(v).map_err(|_| Error::Inconsistent(format!("{what}: {v} exceeds usize")))
}

fn get_f64<R: Read>(r: &mut R, what: &'static str) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r, what)?))
}

// Element-wise reads keep allocation proportional to the bytes actually
// present, so a corrupt header cannot trigger a huge up-front allocation.
fn get_usizes<R: Read>(r: &mut R, count: usize, what: &'static str) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        out.push(get_usize(r, what)?);
    }
    Ok(out)
}

fn get_f64s<R: Read>(r: &mut R, count: usize, what: &'static str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        out.push(get_f64(r, what)?);
    }
    Ok(out)
}
