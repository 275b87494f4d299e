//! Field snapshots: a two-line ASCII header followed by little-endian
//! interleaved `(re, im)` doubles in row-major order.
//!
//! ```text
//! DPFLD1
//! d=3 n=64 L=12.5 dtype=c128
//! <n^d pairs of f64>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Complex;

use super::{GridSpec, SampledField};

const MAGIC: &str = "DPFLD1";

pub fn write_snapshot<W: Write>(mut w: W, f: &SampledField<f64>) -> Result<()> {
    let g = f.grid();
    // `{:?}` prints the shortest representation that round-trips exactly.
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "d={} n={} L={:?} dtype=c128", g.dim(), g.n(), g.half_width())?;
    let mut buf = Vec::with_capacity(16 * f.values().len());
    for v in f.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: R) -> Result<SampledField<f64>> {
    let mut r = BufReader::new(r);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.strip_suffix(b"\n").unwrap_or(&line) != MAGIC.as_bytes() {
        return Err(Error::BadMagic);
    }
    line.clear();
    r.read_until(b'\n', &mut line)?;
    let header = std::str::from_utf8(&line)
        .map_err(|_| Error::BadHeader("header is not UTF-8".into()))?
        .trim_end_matches('\n');
    let grid = parse_header(header)?;

    let expected = 16 * grid.len();
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload)?;
    if payload.len() < expected {
        return Err(Error::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Error::SizeMismatch(format!(
            "payload holds {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex::new(re, im)
        })
        .collect();
    SampledField::new(grid, values)
}

fn need<'a>(v: Option<&'a str>, key: &str) -> Result<&'a str> {
    v.ok_or_else(|| Error::BadHeader(format!("missing key `{key}`")))
}

fn parse_header(header: &str) -> Result<GridSpec<f64>> {
    let (mut d, mut n, mut l, mut dtype) = (None, None, None, None);
    for tok in header.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::BadHeader(format!("token `{tok}` is not key=value")))?;
        let slot = match key {
            "d" => &mut d,
            "n" => &mut n,
            "L" => &mut l,
            "dtype" => &mut dtype,
            _ => return Err(Error::BadHeader(format!("unknown key `{key}`"))),
        };
        if slot.replace(value).is_some() {
            return Err(Error::BadHeader(format!("duplicate key `{key}`")));
        }
    }
    if need(dtype, "dtype")? != "c128" {
        return Err(Error::BadHeader(format!("unsupported dtype `{}`", dtype.unwrap())));
    }
    let d: usize = need(d, "d")?
        .parse()
        .map_err(|_| Error::BadHeader("d is not an integer".into()))?;
    let n: usize = need(n, "n")?
        .parse()
        .map_err(|_| Error::BadHeader("n is not an integer".into()))?;
    let l: f64 = need(l, "L")?
        .parse()
        .map_err(|_| Error::BadHeader("L is not a decimal".into()))?;
    GridSpec::new(d, n, l).map_err(|e| Error::SizeMismatch(e.to_string()))
}

pub fn save(path: impl AsRef<Path>, f: &SampledField<f64>) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), f)
}

pub fn load(path: impl AsRef<Path>) -> Result<SampledField<f64>> {
    read_snapshot(File::open(path)?)
}
