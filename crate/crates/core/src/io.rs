//! Binary file formats.
//!
//! Truth table: 8-byte little-endian `n`, then `ceil(2^n / 8)` bytes of
//! sign bits, bit `x % 8` of byte `x / 8` set iff `f(x) = -1`.
//!
//! k-monotone file: 8-byte little-endian header length, a JSON
//! [`KMonotoneHeader`], then `k` truth tables (the monotone parts).
//!
//! Example batch: 8-byte little-endian `n`, 8-byte little-endian record
//! count, then one `ceil((n + 1) / 8)`-byte little-endian record per
//! example with `x` in bits `0..n` and bit `n` set iff `y = -1`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::boolfn::{BooleanFunction, KMonotoneFunction, MonotoneSpec, MAX_TABLE_N};
use crate::error::{Error, Result};
use crate::estimator::Example;
use crate::FORMAT_VERSION;

fn table_bytes(n: u32) -> usize {
    (1usize << n).div_ceil(8)
}

pub fn write_table<W: Write>(w: &mut W, f: &BooleanFunction) -> Result<()> {
    w.write_all(&(f.n() as u64).to_le_bytes())?;
    let len = table_bytes(f.n());
    let mut bytes = Vec::with_capacity(len);
    for word in f.words() {
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    bytes.truncate(len);
    w.write_all(&bytes)?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_table<R: Read>(r: &mut R) -> Result<BooleanFunction> {
    let n = read_u64(r)?;
    if n > MAX_TABLE_N as u64 {
        return Err(Error::Format(format!("table dimension {n} exceeds {MAX_TABLE_N}")));
    }
    let n = n as u32;
    let mut bytes = vec![0u8; table_bytes(n)];
    r.read_exact(&mut bytes)?;
    let words = bytes
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect();
    BooleanFunction::from_words(n, words)
}

pub fn table_to_bytes(f: &BooleanFunction) -> Vec<u8> {
    let mut v = Vec::new();
    write_table(&mut v, f).expect("writing to a Vec cannot fail");
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMonotoneHeader {
    pub format_version: u32,
    pub n: u32,
    pub k: usize,
    #[serde(default)]
    pub negated: bool,
    pub spec: Option<MonotoneSpec>,
    pub seed: Option<u64>,
}

pub fn write_kmonotone<W: Write>(
    w: &mut W,
    f: &KMonotoneFunction,
    spec: Option<&MonotoneSpec>,
    seed: Option<u64>,
) -> Result<()> {
    let header = KMonotoneHeader {
        format_version: FORMAT_VERSION,
        n: f.n(),
        k: f.k(),
        negated: f.negated(),
        spec: spec.cloned(),
        seed,
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for p in f.parts() {
        write_table(w, p)?;
    }
    Ok(())
}

pub fn read_kmonotone<R: Read>(r: &mut R) -> Result<(KMonotoneHeader, KMonotoneFunction)> {
    let len = read_u64(r)?;
    if len > 1 << 20 {
        return Err(Error::Format(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    let header: KMonotoneHeader = serde_json::from_slice(&json)?;
    let parts = (0..header.k).map(|_| read_table(r)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = parts.iter().find(|p| p.n() != header.n) {
        return Err(Error::Format(format!("part has n={} but header says {}", p.n(), header.n)));
    }
    let f = KMonotoneFunction::new(header.n, parts, header.negated)?;
    Ok((header, f))
}

/// A function file of either kind.
#[derive(Clone, Debug)]
pub enum FunctionFile {
    Table(BooleanFunction),
    KMonotone(KMonotoneHeader, KMonotoneFunction),
}

impl FunctionFile {
    pub fn function(&self) -> &BooleanFunction {
        match self {
            FunctionFile::Table(f) => f,
            FunctionFile::KMonotone(_, f) => f.combined(),
        }
    }
}

/// Tells the two layouts apart: a table is exactly `8 + ceil(2^n/8)` bytes
/// with `n <= 30` in front.
pub fn parse_function_file(bytes: &[u8]) -> Result<FunctionFile> {
    if bytes.len() < 8 {
        return Err(Error::Format("file is shorter than 8 bytes".into()));
    }
    let lead = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    if lead <= MAX_TABLE_N as u64 && bytes.len() == 8 + table_bytes(lead as u32) {
        return Ok(FunctionFile::Table(read_table(&mut &bytes[..])?));
    }
    let (h, f) = read_kmonotone(&mut &bytes[..])?;
    Ok(FunctionFile::KMonotone(h, f))
}

fn record_bytes(n: u32) -> usize {
    (n as usize + 1).div_ceil(8)
}

pub fn write_examples<W: Write>(w: &mut W, n: u32, examples: &[Example]) -> Result<()> {
    if n > 63 {
        return Err(Error::DimensionTooLarge { n, cap: 63 });
    }
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(examples.len() as u64).to_le_bytes())?;
    let rb = record_bytes(n);
    for e in examples {
        let rec = e.x | (u64::from(e.y < 0) << n);
        w.write_all(&rec.to_le_bytes()[..rb])?;
    }
    Ok(())
}

pub fn read_examples<R: Read>(r: &mut R) -> Result<(u32, Vec<Example>)> {
    let n = read_u64(r)?;
    if n > 63 {
        return Err(Error::Format(format!("example dimension {n} exceeds 63")));
    }
    let n = n as u32;
    let count = read_u64(r)?;
    let rb = record_bytes(n);
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf[..rb])?;
        let rec = u64::from_le_bytes(buf);
        out.push(Example {
            x: rec & crate::combinatorics::low_mask(n),
            y: if rec >> n & 1 == 1 { -1 } else { 1 },
        });
    }
    Ok((n, out))
}
