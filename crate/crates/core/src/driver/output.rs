//! Legacy-VTK field dumps and CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::UniformGrid2D;

/// Node lattice of a structured-points file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLattice {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub spacing: f64,
}

impl PointLattice {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<&UniformGrid2D> for PointLattice {
    fn from(g: &UniformGrid2D) -> Self {
        Self {
            nx: g.nx,
            ny: g.ny,
            origin: [g.x_lo, g.y_lo],
            spacing: g.h,
        }
    }
}

/// Named nodal arrays on a lattice, as read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub lattice: PointLattice,
    pub arrays: Vec<(String, Vec<f64>)>,
}

impl FieldDump {
    pub fn array(&self, name: &str) -> Option<&[f64]> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `u` and `rho` as point data of an ASCII structured-points file
/// (x fastest).
pub fn write_field_dump(grid: &UniformGrid2D, u: &[f64], rho: &[f64], path: &Path) -> Result<()> {
    write_structured_points(&PointLattice::from(grid), &[("u", u), ("rho", rho)], path)
}

pub fn write_structured_points(lattice: &PointLattice, arrays: &[(&str, &[f64])], path: &Path) -> Result<()> {
    for (_, a) in arrays {
        if a.len() != lattice.len() {
            return Err(Error::Dimension {
                expected: lattice.len(),
                found: a.len(),
            });
        }
    }
    let mut s = String::with_capacity(lattice.len() * 24 * arrays.len() + 256);
    s.push_str("# vtk DataFile Version 3.0\nebetd field dump\nASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", lattice.nx, lattice.ny);
    let _ = writeln!(s, "ORIGIN {:e} {:e} 0", lattice.origin[0], lattice.origin[1]);
    let _ = writeln!(s, "SPACING {:e} {:e} 1", lattice.spacing, lattice.spacing);
    let _ = writeln!(s, "POINT_DATA {}", lattice.len());
    for (name, a) in arrays {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in *a {
            let _ = writeln!(s, "{v:e}");
        }
    }
    write_file(path, &s)
}

/// Reads a dump written by [`write_field_dump`] (or any ASCII
/// structured-points file with scalar point data on a square-cell plane).
pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut dims: Option<(usize, usize)> = None;
    let mut origin: Option<(f64, f64)> = None;
    let mut spacing: Option<f64> = None;
    let mut arrays: Vec<(String, Vec<f64>)> = Vec::new();
    let mut expected = 0usize;
    let mut lines = text.lines().enumerate().skip(4).peekable();
    while let Some((ln, line)) = lines.next() {
        let mut tok = line.split_whitespace();
        let num = |t: Option<&str>| -> Result<f64> {
            t.and_then(|v| v.parse().ok())
                .ok_or_else(|| err(ln + 1, format!("malformed line '{line}'")))
        };
        match tok.next() {
            Some("DIMENSIONS") => {
                let nx = num(tok.next())? as usize;
                let ny = num(tok.next())? as usize;
                dims = Some((nx, ny));
            }
            Some("ORIGIN") => origin = Some((num(tok.next())?, num(tok.next())?)),
            Some("SPACING") => spacing = Some(num(tok.next())?),
            Some("POINT_DATA") => expected = num(tok.next())? as usize,
            Some("SCALARS") => {
                let name = tok
                    .next()
                    .ok_or_else(|| err(ln + 1, "unnamed scalars".into()))?
                    .to_string();
                match lines.next() {
                    Some((_, l)) if l.trim_start().starts_with("LOOKUP_TABLE") => {}
                    _ => return Err(err(ln + 2, "expected LOOKUP_TABLE".into())),
                }
                let mut values = Vec::with_capacity(expected);
                while values.len() < expected {
                    let (vl, vline) = lines
                        .next()
                        .ok_or_else(|| err(ln + 1, format!("array '{name}' is short")))?;
                    for t in vline.split_whitespace() {
                        values.push(t.parse().map_err(|_| err(vl + 1, format!("bad value '{t}'")))?);
                    }
                }
                arrays.push((name, values));
            }
            Some(_) | None => {}
        }
    }
    let (nx, ny) = dims.ok_or_else(|| err(0, "missing DIMENSIONS".into()))?;
    let (x0, y0) = origin.ok_or_else(|| err(0, "missing ORIGIN".into()))?;
    let h = spacing.ok_or_else(|| err(0, "missing SPACING".into()))?;
    let lattice = PointLattice {
        nx,
        ny,
        origin: [x0, y0],
        spacing: h,
    };
    for (name, a) in &arrays {
        if a.len() != lattice.len() {
            return Err(err(
                0,
                format!("array '{name}' has {} values, expected {}", a.len(), lattice.len()),
            ));
        }
    }
    Ok(FieldDump { lattice, arrays })
}

/// Writes a comma-separated table with a header row and LF line endings.
pub fn write_csv_table<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>], path: &Path) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Dimension {
                expected: header.len(),
                found: row.len(),
            });
        }
        let cells: Vec<&str> = row.iter().map(|c| c.as_ref()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    write_file(path, &s)
}
