//! Vertex-list CSV files.

use std::io::{Read, Write};

use super::Vec2;
use crate::error::{LabError, Result};

/// Writes `x,y` rows with 17 significant digits after an `x,y` header.
pub fn write_vertices_csv<W: Write>(out: W, vertices: &[Vec2]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y"])?;
    for v in vertices {
        w.write_record([format!("{:.16e}", v.x), format!("{:.16e}", v.y)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vertices_csv<R: Read>(input: R) -> Result<Vec<Vec2>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| LabError::InvalidShape(format!("bad vertex row {:?}", rec)))
        };
        out.push(Vec2::new(parse(0)?, parse(1)?));
    }
    Ok(out)
}
