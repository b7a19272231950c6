//! Map files: CSV (grid header, then one line per grid row with `y`
//! ascending) and 16-bit binary PGM (top row is `y_max`).

use std::io::{BufRead, Write};

use super::{ImagingGrid, IndicatorMap};
use crate::error::{DsmError, Result};

const CSV_MAGIC: &str = "# dsm indicator map v1";

pub fn write_csv<W: Write>(map: &IndicatorMap, mut out: W) -> Result<()> {
    let g = map.grid();
    writeln!(out, "{CSV_MAGIC}")?;
    writeln!(
        out,
        "grid,{},{},{},{},{},{}",
        g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny
    )?;
    for row in map.values().chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R, source: &str) -> Result<IndicatorMap> {
    let err = |line: usize, message: String| DsmError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut lines = input.lines().enumerate();
    let mut next = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((i, l)) => Ok(Some((i + 1, l?))),
            None => Ok(None),
        }
    };
    match next()? {
        Some((_, l)) if l == CSV_MAGIC => {}
        _ => return Err(err(1, "missing map header".into())),
    }
    let (ln, header) = next()?.ok_or_else(|| err(2, "missing grid line".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 7 || fields[0] != "grid" {
        return Err(err(ln, "expected grid,x_min,x_max,y_min,y_max,nx,ny".into()));
    }
    let f = |i: usize| fields[i].parse::<f64>().map_err(|e| err(ln, e.to_string()));
    let u = |i: usize| fields[i].parse::<usize>().map_err(|e| err(ln, e.to_string()));
    let grid = ImagingGrid::new(f(1)?, f(2)?, f(3)?, f(4)?, u(5)?, u(6)?)?;
    let mut values = Vec::with_capacity(grid.len());
    while let Some((ln, line)) = next()? {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.parse::<f64>().map_err(|e| err(ln, e.to_string())))
            .collect::<Result<_>>()?;
        if row.len() != grid.nx {
            return Err(err(ln, format!("expected {} values, found {}", grid.nx, row.len())));
        }
        values.extend(row);
    }
    if values.len() != grid.len() {
        return Err(err(0, format!("expected {} rows", grid.ny)));
    }
    IndicatorMap::from_normalized(grid, values)
}

pub fn write_pgm<W: Write>(map: &IndicatorMap, mut out: W) -> Result<()> {
    let g = map.grid();
    write!(out, "P5\n{} {}\n65535\n", g.nx, g.ny)?;
    let mut buf = Vec::with_capacity(2 * g.len());
    for row in map.values().chunks(g.nx).rev() {
        for v in row {
            let level = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            buf.extend_from_slice(&level.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}
