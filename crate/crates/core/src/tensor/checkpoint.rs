//! Parameter checkpoint files.
//!
//! Text format, version 1:
//!
//! ```text
//! jfp-params 1
//! <parameter count>
//! <name> <rows> <cols>
//! <rows*cols values, space separated, 17 significant digits>
//! ...
//! ```
//!
//! Parameters appear in store order. Names may not contain whitespace.

use std::fmt::Write as _;

use super::{Matrix, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &str = "jfp-params";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<T: Scalar>(store: &ParamStore<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(out, "{}", store.len());
    for (_, name, m) in store.iter() {
        let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
        let vals: Vec<String> = m.as_slice().iter().map(|x| format!("{:.16e}", x.to_f64_lossy())).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    out
}

pub fn read_checkpoint<T: Scalar>(text: &str) -> Result<ParamStore<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty checkpoint".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(CHECKPOINT_MAGIC) {
        return Err(perr(ln, "missing checkpoint header".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(ln, "missing checkpoint version".into()))?;
    if version != CHECKPOINT_VERSION {
        return Err(perr(ln, format!("unsupported checkpoint version {version}")));
    }
    let (ln, count) = lines.next().ok_or_else(|| perr(ln + 1, "missing parameter count".into()))?;
    let count: usize = count.trim().parse().map_err(|_| perr(ln, "bad parameter count".into()))?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let (ln, head) = lines.next().ok_or_else(|| perr(0, "truncated checkpoint".into()))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 3 {
            return Err(perr(ln, "expected `<name> <rows> <cols>`".into()));
        }
        let rows: usize = f[1].parse().map_err(|_| perr(ln, "bad row count".into()))?;
        let cols: usize = f[2].parse().map_err(|_| perr(ln, "bad column count".into()))?;
        let (vln, vals) = lines.next().ok_or_else(|| perr(ln + 1, "missing values".into()))?;
        let data = vals
            .split_whitespace()
            .map(|v| v.parse::<f64>().map(T::lit))
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| perr(vln, format!("bad value: {e}")))?;
        if data.len() != rows * cols {
            return Err(perr(vln, format!("expected {} values, found {}", rows * cols, data.len())));
        }
        store.insert(f[0], Matrix::from_vec(rows, cols, data)?)?;
    }
    Ok(store)
}
