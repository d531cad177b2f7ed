//! Path serialization: CSV (plot-ready), a little-endian binary block, and
//! the row-oriented estimator CSV shared by the command-line tools.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{BifbmError, Result};
use crate::params::{BifBmParams, TimeGrid};
use crate::sampler::{SampleMethod, SamplePath};

const BINARY_MAGIC: &[u8; 4] = b"BFBM";
const BINARY_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> BifbmError {
    BifbmError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// CSV with columns `t, component_1, .., component_d`, one row per grid
/// point, full f64 round-trip precision.
pub fn write_path_csv(path: &SamplePath, out: &Path) -> Result<()> {
    let mut buf = String::new();
    buf.push('t');
    for c in 1..=path.d() {
        buf.push_str(&format!(",component_{c}"));
    }
    buf.push('\n');
    for i in 0..path.len() {
        buf.push_str(&format!("{:?}", path.grid().point(i)));
        for c in 0..path.d() {
            buf.push_str(&format!(",{:?}", path.value(i, c)));
        }
        buf.push('\n');
    }
    std::fs::write(out, buf).map_err(|e| io_err(out, e))
}

/// Binary block: header `magic "BFBM", version u32, n u64, d u64, method u8,
/// seed u64, H f64, K f64`, then `n` rows of `(t, component_1..d)` as
/// little-endian f64.
pub fn write_path_binary(path: &SamplePath, out: &Path) -> Result<()> {
    let mut f = std::fs::File::create(out).map_err(|e| io_err(out, e))?;
    let mut w = std::io::BufWriter::new(&mut f);
    let res: std::io::Result<()> = (|| {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&(path.len() as u64).to_le_bytes())?;
        w.write_all(&(path.d() as u64).to_le_bytes())?;
        w.write_all(&[path.method().code()])?;
        w.write_all(&path.seed().to_le_bytes())?;
        w.write_all(&path.params().h().to_le_bytes())?;
        w.write_all(&path.params().k().to_le_bytes())?;
        for i in 0..path.len() {
            w.write_all(&path.grid().point(i).to_le_bytes())?;
            for c in 0..path.d() {
                w.write_all(&path.value(i, c).to_le_bytes())?;
            }
        }
        w.flush()
    })();
    res.map_err(|e| io_err(out, e))
}

pub fn read_path_binary(input: &Path) -> Result<SamplePath> {
    let mut f = std::fs::File::open(input).map_err(|e| io_err(input, e))?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| io_err(input, e))?;
    let fail = |msg: &str| {
        BifbmError::Io {
            path: input.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string()),
        }
    };
    let take = |off: usize, len: usize| -> Result<&[u8]> {
        bytes
            .get(off..off + len)
            .ok_or_else(|| fail("truncated path file"))
    };
    if take(0, 4)? != BINARY_MAGIC {
        return Err(fail("bad magic, not a path file"));
    }
    let version = u32::from_le_bytes(take(4, 4)?.try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(fail("unsupported path file version"));
    }
    let n = u64::from_le_bytes(take(8, 8)?.try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(take(16, 8)?.try_into().unwrap()) as usize;
    let method = SampleMethod::from_code(take(24, 1)?[0])
        .ok_or_else(|| fail("unknown sampling method code"))?;
    let seed = u64::from_le_bytes(take(25, 8)?.try_into().unwrap());
    let h = f64::from_le_bytes(take(33, 8)?.try_into().unwrap());
    let k = f64::from_le_bytes(take(41, 8)?.try_into().unwrap());
    let params = BifBmParams::new(h, k, d.max(1))?;
    let mut off = 49;
    let mut grid = Vec::with_capacity(n);
    let mut components = vec![Vec::with_capacity(n); d];
    for _ in 0..n {
        grid.push(f64::from_le_bytes(take(off, 8)?.try_into().unwrap()));
        off += 8;
        for comp in components.iter_mut() {
            comp.push(f64::from_le_bytes(take(off, 8)?.try_into().unwrap()));
            off += 8;
        }
    }
    if off != bytes.len() {
        return Err(fail("trailing bytes after path payload"));
    }
    SamplePath::from_parts(TimeGrid::new(grid)?, components, method, seed, params)
}

/// One estimator result in the shared row-oriented CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRow {
    pub estimator: String,
    /// Parameters of the run as a compact JSON object.
    pub params_json: serde_json::Value,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// CSV with columns `estimator, parameters, value, stderr, n`; the JSON
/// parameter column is quoted with doubled inner quotes.
pub fn write_estimator_csv(rows: &[EstimatorRow], out: &Path) -> Result<()> {
    let mut buf = String::from("estimator,parameters,value,stderr,n\n");
    for r in rows {
        let json = r.params_json.to_string().replace('"', "\"\"");
        buf.push_str(&format!(
            "{},\"{}\",{:?},{:?},{}\n",
            r.estimator, json, r.value, r.stderr, r.n
        ));
    }
    std::fs::write(out, buf).map_err(|e| io_err(out, e))
}

pub fn read_estimator_csv(input: &Path) -> Result<Vec<EstimatorRow>> {
    let text = std::fs::read_to_string(input).map_err(|e| io_err(input, e))?;
    let bad = |msg: String| BifbmError::Io {
        path: input.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, msg),
    };
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line);
        if fields.len() != 5 {
            return Err(bad(format!("line {}: expected 5 fields", ln + 1)));
        }
        rows.push(EstimatorRow {
            estimator: fields[0].clone(),
            params_json: serde_json::from_str(&fields[1])
                .map_err(|e| bad(format!("line {}: bad parameter JSON: {e}", ln + 1)))?,
            value: fields[2]
                .parse()
                .map_err(|e| bad(format!("line {}: bad value: {e}", ln + 1)))?,
            stderr: fields[3]
                .parse()
                .map_err(|e| bad(format!("line {}: bad stderr: {e}", ln + 1)))?,
            n: fields[4]
                .parse()
                .map_err(|e| bad(format!("line {}: bad n: {e}", ln + 1)))?,
        });
    }
    Ok(rows)
}

/// Minimal CSV field splitter honoring double-quoted fields with doubled
/// inner quotes.
pub(crate) fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' => quoted = true,
            ',' if !quoted => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}
