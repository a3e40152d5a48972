//! Binary walk (`MCRTWALK`) and graph (`MCRTGRPH`) files. All integers and
//! floats are little-endian.
//!
//! ```text
//! MCRTWALK: magic[8] version:u32 value_kind:u8 (0 = i64, 1 = f64)
//!           m_steps:u64 seed:u64 dL[m_steps] dR[m_steps]
//! MCRTGRPH: magic[8] version:u32 m_cells:u64 cell_size_k:u64 root:u64
//!           offsets:u64[m_cells+1] neighbors:u64[offsets[m_cells]]
//!           flags:u8[offsets[m_cells]] (bit0 = L, bit1 = R)
//! ```
//!
//! Cell indices in graph files are the same 0-based vertex ids used in
//! memory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::mapbuild::{EdgeFlags, MatedCrtGraph};
use crate::walkgen::{EncodingWalk, WalkValues};
use crate::{Error, Result};

pub const WALK_MAGIC: &[u8; 8] = b"MCRTWALK";
pub const GRAPH_MAGIC: &[u8; 8] = b"MCRTGRPH";
pub const WALK_FORMAT_VERSION: u32 = 1;
pub const GRAPH_FORMAT_VERSION: u32 = 1;

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated file: {e}")))?;
    Ok(buf)
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

fn read_header(r: &mut impl Read, magic: &[u8; 8], version: u32) -> Result<()> {
    let got = read_exact::<8>(r)?;
    if &got != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    let v = u32::from_le_bytes(read_exact::<4>(r)?);
    if v != version {
        return Err(Error::Format(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn read_u64_array(r: &mut impl Read, len: u64) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(capacity_hint(len));
    for _ in 0..len {
        out.push(read_u64(r)?);
    }
    Ok(out)
}

/// Caps preallocation so a corrupt length field fails on read, not on
/// allocation.
fn capacity_hint(len: u64) -> usize {
    len.min(1 << 24) as usize
}

fn expect_eof(r: &mut impl Read) -> Result<()> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after payload".into())),
    }
}

pub fn write_walk(w: &mut impl Write, walk: &EncodingWalk) -> Result<()> {
    w.write_all(WALK_MAGIC)?;
    w.write_all(&WALK_FORMAT_VERSION.to_le_bytes())?;
    match &walk.values {
        WalkValues::Integer { dl, dr } => {
            w.write_all(&[0u8])?;
            w.write_all(&(dl.len() as u64).to_le_bytes())?;
            w.write_all(&walk.seed.to_le_bytes())?;
            for v in dl.iter().chain(dr) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        WalkValues::Real { dl, dr } => {
            w.write_all(&[1u8])?;
            w.write_all(&(dl.len() as u64).to_le_bytes())?;
            w.write_all(&walk.seed.to_le_bytes())?;
            for v in dl.iter().chain(dr) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads a walk; the step-law id is not stored and comes back as `"file"`.
pub fn read_walk(r: &mut impl Read) -> Result<EncodingWalk> {
    read_header(r, WALK_MAGIC, WALK_FORMAT_VERSION)?;
    let kind = read_exact::<1>(r)?[0];
    let m = read_u64(r)?;
    let seed = read_u64(r)?;
    if m == 0 {
        return Err(Error::Format("walk has no steps".into()));
    }
    let walk = match kind {
        0 => {
            let mut read = || -> Result<Vec<i64>> {
                let mut v = Vec::with_capacity(capacity_hint(m));
                for _ in 0..m {
                    v.push(i64::from_le_bytes(read_exact::<8>(r)?));
                }
                Ok(v)
            };
            let dl = read()?;
            let dr = read()?;
            EncodingWalk::from_integer_increments(dl, dr, "file", seed)?
        }
        1 => {
            let mut read = || -> Result<Vec<f64>> {
                let mut v = Vec::with_capacity(capacity_hint(m));
                for _ in 0..m {
                    v.push(f64::from_le_bytes(read_exact::<8>(r)?));
                }
                Ok(v)
            };
            let dl = read()?;
            let dr = read()?;
            EncodingWalk::from_real_increments(dl, dr, "file", seed)
                .map_err(|e| Error::Format(e.to_string()))?
        }
        other => return Err(Error::Format(format!("unknown value kind {other}"))),
    };
    expect_eof(r)?;
    Ok(walk)
}

pub fn write_graph(w: &mut impl Write, g: &MatedCrtGraph) -> Result<()> {
    w.write_all(GRAPH_MAGIC)?;
    w.write_all(&GRAPH_FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(g.m_cells() as u64).to_le_bytes())?;
    w.write_all(&g.cell_size().to_le_bytes())?;
    w.write_all(&(g.root() as u64).to_le_bytes())?;
    for &o in g.offsets() {
        w.write_all(&(o as u64).to_le_bytes())?;
    }
    for &n in g.neighbor_array() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    let flags: Vec<u8> = g.flag_array().iter().map(|f| f.bits()).collect();
    w.write_all(&flags)?;
    Ok(())
}

pub fn read_graph(r: &mut impl Read) -> Result<MatedCrtGraph> {
    read_header(r, GRAPH_MAGIC, GRAPH_FORMAT_VERSION)?;
    let m = read_u64(r)?;
    let k = read_u64(r)?;
    let root = read_u64(r)?;
    if m == 0 || m > u32::MAX as u64 {
        return Err(Error::Format(format!("unsupported cell count {m}")));
    }
    if root >= m {
        return Err(Error::Format(format!("root {root} outside {m} cells")));
    }
    let offsets = read_u64_array(r, m + 1)?;
    let total = *offsets.last().unwrap();
    let neighbors = read_u64_array(r, total)?;
    if neighbors.iter().any(|&n| n >= m) {
        return Err(Error::Format("neighbor index out of range".into()));
    }
    let mut flags = vec![0u8; total as usize];
    r.read_exact(&mut flags)
        .map_err(|e| Error::Format(format!("truncated flags: {e}")))?;
    expect_eof(r)?;
    let flags = flags
        .into_iter()
        .map(|b| EdgeFlags::from_bits(b).ok_or_else(|| Error::Format(format!("invalid flag byte {b}"))))
        .collect::<Result<Vec<_>>>()?;
    MatedCrtGraph::from_parts(
        k,
        root as u32,
        offsets.into_iter().map(|o| o as usize).collect(),
        neighbors.into_iter().map(|n| n as u32).collect(),
        flags,
    )
}

pub fn save_walk(path: impl AsRef<Path>, walk: &EncodingWalk) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_walk(&mut w, walk)?;
    w.flush()?;
    Ok(())
}

pub fn load_walk(path: impl AsRef<Path>) -> Result<EncodingWalk> {
    read_walk(&mut BufReader::new(File::open(path)?))
}

pub fn save_graph(path: impl AsRef<Path>, g: &MatedCrtGraph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_graph(&mut w, g)?;
    w.flush()?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<MatedCrtGraph> {
    read_graph(&mut BufReader::new(File::open(path)?))
}
