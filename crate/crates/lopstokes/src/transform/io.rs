//! Field files: a CSV of samples (grid indices, re, im) next to a JSON header
//! describing the box, the shape, the depths and the run parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::TangentialGrid;
use crate::error::{Error, Result};
use crate::symbol::RawParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub name: String,
    pub grid: TangentialGrid,
    pub x_levels: Vec<f64>,
    pub lambda: [f64; 2],
    pub params: RawParams,
}

#[derive(Serialize, Deserialize)]
struct Row {
    level: usize,
    i0: usize,
    i1: usize,
    re: f64,
    im: f64,
}

/// Write `levels[l]` (one grid field per depth) as CSV.
pub fn write_field_csv<W: Write>(grid: &TangentialGrid, levels: &[Vec<C64>], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for (l, f) in levels.iter().enumerate() {
        for (k, v) in f.iter().enumerate() {
            let idx = grid.index(k);
            wr.serialize(Row { level: l, i0: idx[0], i1: idx.get(1).copied().unwrap_or(0), re: v.re, im: v.im })?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Read a single-level field (rows with level 0) for the given grid.
pub fn read_field_csv<P: AsRef<Path>>(grid: &TangentialGrid, path: P) -> Result<Vec<C64>> {
    let file = File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    let mut rd = csv::Reader::from_reader(BufReader::new(file));
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for row in rd.deserialize::<Row>() {
        let r = row?;
        if r.level != 0 {
            continue;
        }
        let idx: Vec<usize> = if grid.axes() == 1 { vec![r.i0] } else { vec![r.i0, r.i1] };
        if idx.iter().zip(&grid.shape).any(|(i, n)| i >= n) {
            return Err(Error::Io(format!("index {idx:?} outside grid {:?}", grid.shape)));
        }
        let k = grid.flat(&idx);
        out[k] = C64::new(r.re, r.im);
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::Io(format!("missing sample at grid index {:?}", grid.index(k))));
    }
    Ok(out)
}

pub fn write_json<T: Serialize, P: AsRef<Path>>(value: &T, path: P) -> Result<()> {
    let f = File::create(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let g = TangentialGrid::new(vec![1.0, 2.0], vec![16, 16]).unwrap();
        let f: Vec<C64> = (0..g.len()).map(|i| C64::new(i as f64, -0.5 * i as f64)).collect();
        let dir = std::env::temp_dir().join(format!("lopstokes-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.csv");
        write_field_csv(&g, &[f.clone()], File::create(&path).unwrap()).unwrap();
        assert_eq!(read_field_csv(&g, &path).unwrap(), f);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
