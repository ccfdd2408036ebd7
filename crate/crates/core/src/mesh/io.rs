//! Line-based mesh files.
//!
//! ```text
//! polymesh 1
//! v <x> <y>
//! c <i0> <i1> ... <ik>
//! layer <j>        (optional, applies to the preceding cell)
//! deg <p>          (optional, applies to the preceding cell)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{DomainTag, Point, PolyMesh};
use crate::error::{Error, Result};

/// Mesh plus the optional per-cell annotations of the file format.
#[derive(Debug, Clone)]
pub struct MeshFile {
    pub mesh: PolyMesh,
    pub layers: Option<Vec<usize>>,
    pub degrees: Option<Vec<usize>>,
}

pub fn write_mesh_string(mesh: &PolyMesh, layers: Option<&[usize]>, degrees: Option<&[usize]>) -> String {
    let mut s = String::from("polymesh 1\n");
    for p in mesh.vertices() {
        // `{:?}` on f64 is the shortest round-trip representation
        let _ = writeln!(s, "v {:?} {:?}", p.x, p.y);
    }
    for (c, cell) in mesh.cells().iter().enumerate() {
        s.push('c');
        for v in cell {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
        if let Some(l) = layers {
            let _ = writeln!(s, "layer {}", l[c]);
        }
        if let Some(d) = degrees {
            let _ = writeln!(s, "deg {}", d[c]);
        }
    }
    s
}

pub fn write_mesh(path: &Path, mesh: &PolyMesh, layers: Option<&[usize]>, degrees: Option<&[usize]>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh, layers, degrees))?;
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.ok_or_else(|| Error::Parse {
        line,
        reason: "missing value".into(),
    })?
    .parse()
    .map_err(|_| Error::Parse {
        line,
        reason: "malformed number".into(),
    })
}

pub fn read_mesh_str(text: &str, domain: DomainTag) -> Result<MeshFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == "polymesh 1" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                reason: "expected header 'polymesh 1'".into(),
            })
        }
    }
    let mut vertices = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut layers: Vec<Option<usize>> = Vec::new();
    let mut degrees: Vec<Option<usize>> = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("v") => {
                let x: f64 = parse_num(tok.next(), line)?;
                let y: f64 = parse_num(tok.next(), line)?;
                vertices.push(Point::new(x, y));
            }
            Some("c") => {
                let ids = tok
                    .map(|t| parse_num::<usize>(Some(t), line))
                    .collect::<Result<Vec<_>>>()?;
                cells.push(ids);
                layers.push(None);
                degrees.push(None);
            }
            Some(kw @ ("layer" | "deg")) => {
                let val: usize = parse_num(tok.next(), line)?;
                let slot = if kw == "layer" {
                    layers.last_mut()
                } else {
                    degrees.last_mut()
                };
                match slot {
                    Some(s) => *s = Some(val),
                    None => {
                        return Err(Error::Parse {
                            line,
                            reason: format!("'{kw}' before any cell"),
                        })
                    }
                }
            }
            Some(other) => {
                return Err(Error::Parse {
                    line,
                    reason: format!("unknown record '{other}'"),
                })
            }
            None => {}
        }
    }
    let collect = |v: Vec<Option<usize>>, what: &str| -> Result<Option<Vec<usize>>> {
        if v.iter().all(Option::is_none) {
            return Ok(None);
        }
        v.into_iter()
            .collect::<Option<Vec<_>>>()
            .map(Some)
            .ok_or_else(|| Error::Parse {
                line: 0,
                reason: format!("'{what}' given for some cells only"),
            })
    };
    let layers = collect(layers, "layer")?;
    let degrees = collect(degrees, "deg")?;
    let mesh = PolyMesh::new(vertices, cells, domain)?;
    Ok(MeshFile { mesh, layers, degrees })
}

pub fn read_mesh(path: &Path, domain: DomainTag) -> Result<MeshFile> {
    let text = std::fs::read_to_string(path)?;
    read_mesh_str(&text, domain)
}
