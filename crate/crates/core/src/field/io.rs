//! CSV dumps of fields: a header naming the grid, one line of grid values,
//! then `ny` rows of `nx` values (row `j` holds `y = y_min + j h`). The mask
//! goes to a separate CSV of `0`/`1` rows.

use std::path::Path;

use ndarray::Array2;

use super::{GridSpec, Mask, ScalarField};
use crate::error::{Error, Result};

const HEADER: &str = "nx,ny,x_min,x_max,y_min,y_max";

pub fn field_to_csv(f: &ScalarField) -> String {
    let g = f.grid();
    let mut s = String::with_capacity(g.len() * 24 + 128);
    s.push_str(HEADER);
    s.push('\n');
    s.push_str(&format!(
        "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
        g.nx, g.ny, g.x_min, g.x_max, g.y_min, g.y_max
    ));
    for row in f.values().rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn mask_to_csv(m: &Mask) -> String {
    let mut s = String::new();
    for row in m.array().rows() {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses a field CSV; without a mask every node is inside.
pub fn field_from_csv(text: &str, mask_text: Option<&str>) -> Result<ScalarField> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(parse_err(format!("expected header `{HEADER}`")));
    }
    let meta: Vec<&str> = lines.next().ok_or_else(|| parse_err("missing grid line"))?.split(',').collect();
    if meta.len() != 6 {
        return Err(parse_err("grid line needs 6 entries"));
    }
    let int = |s: &str| s.trim().parse::<usize>().map_err(|e| parse_err(format!("{s}: {e}")));
    let real = |s: &str| s.trim().parse::<f64>().map_err(|e| parse_err(format!("{s}: {e}")));
    let grid = GridSpec::new(
        (real(meta[2])?, real(meta[3])?),
        (real(meta[4])?, real(meta[5])?),
        int(meta[0])?,
        int(meta[1])?,
    )?;
    let mut values = Array2::zeros(grid.shape());
    let mut rows = 0;
    for (j, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        if j >= grid.ny {
            return Err(parse_err("too many rows"));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != grid.nx {
            return Err(parse_err(format!("row {j} has {} entries, expected {}", cells.len(), grid.nx)));
        }
        for (i, c) in cells.iter().enumerate() {
            values[[j, i]] = real(c)?;
        }
        rows += 1;
    }
    if rows != grid.ny {
        return Err(parse_err(format!("found {rows} rows, expected {}", grid.ny)));
    }
    let mask = match mask_text {
        None => Mask::full(&grid),
        Some(t) => {
            let mut cells = Array2::from_elem(grid.shape(), false);
            let rows: Vec<&str> = t.lines().filter(|l| !l.trim().is_empty()).collect();
            if rows.len() != grid.ny {
                return Err(parse_err("mask row count does not match grid"));
            }
            for (j, line) in rows.iter().enumerate() {
                let entries: Vec<&str> = line.split(',').collect();
                if entries.len() != grid.nx {
                    return Err(parse_err(format!("mask row {j} has wrong length")));
                }
                for (i, c) in entries.iter().enumerate() {
                    cells[[j, i]] = match c.trim() {
                        "1" => true,
                        "0" => false,
                        other => return Err(parse_err(format!("mask entry `{other}`"))),
                    };
                }
            }
            Mask::from_array(cells)
        }
    };
    ScalarField::new(grid, values, mask)
}

pub fn write_field(f: &ScalarField, path: &Path, mask_path: Option<&Path>) -> Result<()> {
    crate::report::write_atomic(path, field_to_csv(f).as_bytes())?;
    if let Some(mp) = mask_path {
        crate::report::write_atomic(mp, mask_to_csv(f.mask()).as_bytes())?;
    }
    Ok(())
}

pub fn read_field(path: &Path, mask_path: Option<&Path>) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path)?;
    let mask = mask_path.map(std::fs::read_to_string).transpose()?;
    field_from_csv(&text, mask.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        let g = GridSpec::new((-1.0, 1.0), (0.0, 1.0), 17, 9).unwrap();
        let mask = Mask::from_fn(&g, |x, y| x * x + y * y <= 1.0);
        let f = ScalarField::from_fn(&g, |x, y| (3.0 * x).sin() * (y + 0.1).ln() / 7.0)
            .with_mask(mask)
            .unwrap();
        let back = field_from_csv(&field_to_csv(&f), Some(&mask_to_csv(f.mask()))).unwrap();
        assert_eq!(back.mask(), f.mask());
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.grid(), f.grid());
    }

    #[test]
    fn malformed_input() {
        assert!(field_from_csv("nope\n", None).is_err());
        let g = GridSpec::new((0.0, 1.0), (0.0, 1.0), 9, 9).unwrap();
        let mut text = field_to_csv(&ScalarField::zeros(&g));
        text.push_str("0,0,0,0,0,0,0,0,0\n");
        assert!(field_from_csv(&text, None).is_err());
    }
}
