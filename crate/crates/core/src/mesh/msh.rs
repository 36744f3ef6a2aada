//! Gmsh MSH v2.2 ASCII reader and writer (triangles only).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{FvkError, Result};

const TRIANGLE: u32 = 2;
const LINE: u32 = 1;
const POINT: u32 = 15;

pub fn import_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FvkError::io(path, e))?;
    parse_msh(&text)
}

fn parse_err(line: usize, msg: impl Into<String>) -> FvkError {
    FvkError::Parse {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some((n, l)) => {
                    self.last = n + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l);
                    }
                }
                None => return Err(parse_err(self.last, "unexpected end of file")),
            }
        }
    }

    fn expect(&mut self, tag: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != tag {
            return Err(parse_err(self.last, format!("expected {tag}, found {l:?}")));
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize> {
        let l = self.next_line()?;
        l.parse()
            .map_err(|_| parse_err(self.last, format!("expected a count, found {l:?}")))
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

/// Parses the `$Nodes` and `$Elements` sections of an ASCII v2.2 file.
/// Point and line elements are skipped; any other non-triangle element is
/// an error, as is a node with a nonzero third coordinate.
pub fn parse_msh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut vertices = Vec::new();
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut triangles = Vec::new();
    let mut seen_format = false;
    let mut seen_nodes = false;
    let mut seen_elements = false;

    loop {
        let header = match lines.next_line() {
            Ok(l) => l,
            Err(_) if seen_nodes && seen_elements => break,
            Err(e) => return Err(e),
        };
        match header {
            "$MeshFormat" => {
                let l = lines.next_line()?;
                let mut tok = l.split_whitespace();
                let version: String = field(tok.next(), lines.last, "version")?;
                let file_type: u32 = field(tok.next(), lines.last, "file type")?;
                if !version.starts_with("2.") {
                    return Err(parse_err(lines.last, format!("unsupported version {version}")));
                }
                if file_type != 0 {
                    return Err(parse_err(lines.last, "binary MSH files are not supported"));
                }
                lines.expect("$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut tok = l.split_whitespace();
                    let id: u64 = field(tok.next(), lines.last, "node id")?;
                    let x: f64 = field(tok.next(), lines.last, "x coordinate")?;
                    let y: f64 = field(tok.next(), lines.last, "y coordinate")?;
                    let z: f64 = field(tok.next(), lines.last, "z coordinate")?;
                    if z != 0.0 {
                        return Err(parse_err(lines.last, format!("node {id} has z = {z}")));
                    }
                    if ids.insert(id, vertices.len()).is_some() {
                        return Err(parse_err(lines.last, format!("duplicate node id {id}")));
                    }
                    vertices.push([x, y]);
                }
                lines.expect("$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let line = lines.last;
                    let tok: Vec<&str> = l.split_whitespace().collect();
                    let kind: u32 = field(tok.get(1).copied(), line, "element type")?;
                    let ntags: usize = field(tok.get(2).copied(), line, "tag count")?;
                    let nodes = tok.get(3 + ntags..).unwrap_or(&[]);
                    match kind {
                        TRIANGLE => {
                            if nodes.len() != 3 {
                                return Err(parse_err(line, "triangle needs 3 nodes"));
                            }
                            let mut tri = [0usize; 3];
                            for (k, s) in nodes.iter().enumerate() {
                                let id: u64 = field(Some(*s), line, "node reference")?;
                                tri[k] = *ids.get(&id).ok_or_else(|| {
                                    parse_err(line, format!("unknown node {id}"))
                                })?;
                            }
                            triangles.push(tri);
                        }
                        LINE | POINT => {}
                        other => {
                            return Err(parse_err(
                                line,
                                format!("unsupported element type {other}"),
                            ))
                        }
                    }
                }
                lines.expect("$EndElements")?;
                seen_elements = true;
            }
            other if other.starts_with("$End") => {
                return Err(parse_err(lines.last, format!("unbalanced section {other}")))
            }
            other if other.starts_with('$') => {
                let end = format!("$End{}", &other[1..]);
                while lines.next_line()? != end {}
            }
            other => return Err(parse_err(lines.last, format!("unexpected line {other:?}"))),
        }
    }
    if !seen_format {
        return Err(parse_err(0, "missing $MeshFormat section"));
    }
    if triangles.is_empty() {
        return Err(parse_err(lines.last, "file contains no triangles"));
    }
    Mesh::new(vertices, triangles).map_err(|e| parse_err(lines.last, e.to_string()))
}

/// Writes the mesh with 1-based node and element ids. Coordinates use the
/// shortest representation that round-trips exactly.
pub fn write_msh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} 0", i + 1, v[0], v[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.n_triangles());
    for (i, t) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(s, "{} 2 2 1 1 {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s.push_str("$EndElements\n");
    s
}

pub fn write_msh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_msh_string(mesh)).map_err(|e| FvkError::io(path, e))
}
