//! ASCII OFF and PLY reading and fixed-point writing.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ParseError, Position};
use crate::mesh::Mesh;
use crate::quant::format_fixed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFormat {
    Off,
    Ply,
}

impl MeshFormat {
    /// Guess from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(Self::Off),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Off => "off",
            Self::Ply => "ply",
        }
    }
}

impl FromStr for MeshFormat {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "ply" => Ok(Self::Ply),
            other => Err(ParseError::Unsupported(other.to_string())),
        }
    }
}

/// Non-blank lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    strip_hash_comments: bool,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, strip_hash_comments: bool) -> Self {
        Self {
            inner: text.lines().enumerate(),
            strip_hash_comments,
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(Position, &'a str), ParseError> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let line = if self.strip_hash_comments {
                raw.split('#').next().unwrap_or("")
            } else {
                raw
            };
            let line = line.trim();
            if !line.is_empty() {
                return Ok((Position { line: i + 1 }, line));
            }
        }
        Err(ParseError::Truncated {
            pos: Position { line: self.last + 1 },
            msg: format!("expected {what}"),
        })
    }
}

fn number<T: FromStr>(pos: Position, token: &str) -> Result<T, ParseError> {
    token.parse().map_err(|_| ParseError::NonNumeric {
        pos,
        token: token.to_string(),
    })
}

fn coordinate(pos: Position, token: &str) -> Result<f64, ParseError> {
    let v: f64 = number(pos, token)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError::NonNumeric {
            pos,
            token: token.to_string(),
        })
    }
}

fn face_indices(
    pos: Position,
    arity_token: &str,
    index_tokens: &[&str],
    vertex_count: usize,
) -> Result<[usize; 3], ParseError> {
    let arity: i64 = number(pos, arity_token)?;
    if arity != 3 {
        return Err(ParseError::NonTriangular { pos, arity });
    }
    if index_tokens.len() < 3 {
        return Err(ParseError::Truncated {
            pos,
            msg: "face needs three vertex indices".into(),
        });
    }
    let mut tri = [0usize; 3];
    for k in 0..3 {
        let index: i64 = number(pos, index_tokens[k])?;
        if index < 0 || index as u64 >= vertex_count as u64 {
            return Err(ParseError::IndexOutOfRange {
                pos,
                index,
                vertex_count,
            });
        }
        tri[k] = index as usize;
        if tri[..k].contains(&tri[k]) {
            return Err(ParseError::RepeatedVertex { pos, index: tri[k] });
        }
    }
    Ok(tri)
}

fn finish(
    vertices: Vec<[f64; 3]>,
    text: Vec<[Box<str>; 3]>,
    faces: Vec<[usize; 3]>,
) -> Result<Mesh, ParseError> {
    // indices and repeats were already validated against positions
    let mesh = Mesh::new(vertices, faces).map_err(|e| ParseError::Header {
        pos: Position { line: 0 },
        msg: e.to_string(),
    })?;
    Ok(mesh.with_coord_text(text))
}

fn parse_off(text: &str) -> Result<Mesh, ParseError> {
    let mut lines = Lines::new(text, true);
    let (pos, first) = lines.next_line("OFF header")?;
    let rest = first
        .strip_prefix("OFF")
        .ok_or_else(|| ParseError::Header {
            pos,
            msg: format!("expected \"OFF\", found {first:?}"),
        })?
        .trim();
    // Some archives glue the counts onto the keyword ("OFF1024 2044 0").
    let (count_pos, counts) = if rest.is_empty() {
        lines.next_line("vertex/face counts")?
    } else {
        (pos, rest)
    };
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() < 2 {
        return Err(ParseError::Header {
            pos: count_pos,
            msg: "counts line needs at least vertex and face counts".into(),
        });
    }
    let nv: usize = number(count_pos, counts[0])?;
    let nf: usize = number(count_pos, counts[1])?;

    let mut vertices = Vec::with_capacity(nv);
    let mut coord_text = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (pos, line) = lines.next_line("vertex line")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(ParseError::Truncated {
                pos,
                msg: "vertex needs three coordinates".into(),
            });
        }
        vertices.push([
            coordinate(pos, tokens[0])?,
            coordinate(pos, tokens[1])?,
            coordinate(pos, tokens[2])?,
        ]);
        coord_text.push([tokens[0].into(), tokens[1].into(), tokens[2].into()]);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (pos, line) = lines.next_line("face line")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        faces.push(face_indices(pos, tokens[0], &tokens[1..], nv)?);
    }
    finish(vertices, coord_text, faces)
}

enum PlyProperty {
    Scalar(String),
    List(String),
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

fn parse_ply(text: &str) -> Result<Mesh, ParseError> {
    let mut lines = Lines::new(text, false);
    let (pos, magic) = lines.next_line("ply magic")?;
    if magic != "ply" {
        return Err(ParseError::Header {
            pos,
            msg: format!("expected \"ply\", found {magic:?}"),
        });
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    loop {
        let (pos, line) = lines.next_line("end_header")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "format" => {
                match tokens.get(1).copied() {
                    Some("ascii") => {}
                    Some(other) => {
                        return Err(ParseError::Unsupported(format!("PLY format {other}")))
                    }
                    None => {
                        return Err(ParseError::Header {
                            pos,
                            msg: "format line without a format".into(),
                        })
                    }
                }
                saw_format = true;
            }
            "comment" | "obj_info" => {}
            "element" => {
                if tokens.len() != 3 {
                    return Err(ParseError::Header {
                        pos,
                        msg: "element line needs a name and a count".into(),
                    });
                }
                elements.push(PlyElement {
                    name: tokens[1].to_string(),
                    count: number(pos, tokens[2])?,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let element = elements.last_mut().ok_or_else(|| ParseError::Header {
                    pos,
                    msg: "property before any element".into(),
                })?;
                let property = match tokens.get(1).copied() {
                    Some("list") if tokens.len() == 5 => PlyProperty::List(tokens[4].to_string()),
                    Some(_) if tokens.len() == 3 => PlyProperty::Scalar(tokens[2].to_string()),
                    _ => {
                        return Err(ParseError::Header {
                            pos,
                            msg: format!("malformed property line {line:?}"),
                        })
                    }
                };
                element.properties.push(property);
            }
            "end_header" => break,
            other => {
                return Err(ParseError::Header {
                    pos,
                    msg: format!("unexpected header keyword {other:?}"),
                })
            }
        }
    }
    if !saw_format {
        return Err(ParseError::Header {
            pos: Position { line: 2 },
            msg: "missing format line".into(),
        });
    }

    let mut vertices = Vec::new();
    let mut coord_text = Vec::new();
    let mut faces = Vec::new();
    let mut have_vertices = false;
    for element in &elements {
        match element.name.as_str() {
            "vertex" => {
                let slot = |name: &str| {
                    element
                        .properties
                        .iter()
                        .position(|p| matches!(p, PlyProperty::Scalar(n) if n == name))
                };
                let (Some(ix), Some(iy), Some(iz)) = (slot("x"), slot("y"), slot("z")) else {
                    return Err(ParseError::Header {
                        pos: Position { line: 1 },
                        msg: "vertex element lacks x, y, z properties".into(),
                    });
                };
                if element
                    .properties
                    .iter()
                    .any(|p| matches!(p, PlyProperty::List(_)))
                {
                    return Err(ParseError::Unsupported("list property on vertices".into()));
                }
                vertices.reserve(element.count);
                coord_text.reserve(element.count);
                for _ in 0..element.count {
                    let (pos, line) = lines.next_line("vertex line")?;
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.len() < element.properties.len() {
                        return Err(ParseError::Truncated {
                            pos,
                            msg: format!("vertex needs {} values", element.properties.len()),
                        });
                    }
                    vertices.push([
                        coordinate(pos, tokens[ix])?,
                        coordinate(pos, tokens[iy])?,
                        coordinate(pos, tokens[iz])?,
                    ]);
                    coord_text.push([tokens[ix].into(), tokens[iy].into(), tokens[iz].into()]);
                }
                have_vertices = true;
            }
            "face" => {
                if !have_vertices {
                    return Err(ParseError::Header {
                        pos: Position { line: 1 },
                        msg: "face element precedes vertex element".into(),
                    });
                }
                let target = element
                    .properties
                    .iter()
                    .position(|p| {
                        matches!(p, PlyProperty::List(n) if n == "vertex_indices" || n == "vertex_index")
                    })
                    .ok_or_else(|| ParseError::Header {
                        pos: Position { line: 1 },
                        msg: "face element lacks a vertex_indices list".into(),
                    })?;
                faces.reserve(element.count);
                for _ in 0..element.count {
                    let (pos, line) = lines.next_line("face line")?;
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    let mut cursor = 0;
                    let mut tri = None;
                    for (k, property) in element.properties.iter().enumerate() {
                        let Some(&head) = tokens.get(cursor) else {
                            return Err(ParseError::Truncated {
                                pos,
                                msg: "face line ended early".into(),
                            });
                        };
                        match property {
                            PlyProperty::Scalar(_) => cursor += 1,
                            PlyProperty::List(_) => {
                                let len: i64 = number(pos, head)?;
                                let end = cursor + 1 + len.max(0) as usize;
                                if k == target {
                                    let body = &tokens[cursor + 1..end.min(tokens.len())];
                                    tri = Some(face_indices(pos, head, body, vertices.len())?);
                                }
                                cursor = end;
                            }
                        }
                    }
                    faces.push(tri.expect("target list visited"));
                }
            }
            _ => {
                for _ in 0..element.count {
                    lines.next_line(&format!("{} line", element.name))?;
                }
            }
        }
    }
    if !have_vertices {
        return Err(ParseError::Header {
            pos: Position { line: 1 },
            msg: "no vertex element".into(),
        });
    }
    finish(vertices, coord_text, faces)
}

/// Parse mesh text in the given format.
pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<Mesh, ParseError> {
    match format {
        MeshFormat::Off => parse_off(text),
        MeshFormat::Ply => parse_ply(text),
    }
}

/// Read a mesh file, picking the format from the extension or, failing that,
/// from the first bytes of the file.
pub fn read_mesh(path: &Path) -> Result<(Mesh, MeshFormat), ParseError> {
    let bytes = std::fs::read(path).map_err(|e| ParseError::Io(format!("{}: {e}", path.display())))?;
    let format = match MeshFormat::from_path(path) {
        Some(f) => f,
        None if bytes.starts_with(b"ply") => MeshFormat::Ply,
        None if bytes.starts_with(b"OFF") => MeshFormat::Off,
        None => {
            return Err(ParseError::Unsupported(format!(
                "cannot tell the format of {}",
                path.display()
            )))
        }
    };
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| ParseError::Unsupported("binary or non-UTF-8 mesh data".into()))?;
    Ok((parse_mesh(text, format)?, format))
}

/// Render a mesh with every coordinate in fixed point with exactly `decimals`
/// fractional digits.
pub fn write_mesh(mesh: &Mesh, format: MeshFormat, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let mut out = String::with_capacity(mesh.vertex_count() * 40 + mesh.face_count() * 24);
    match format {
        MeshFormat::Off => {
            out.push_str("OFF\n");
            let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.face_count());
        }
        MeshFormat::Ply => {
            out.push_str("ply\nformat ascii 1.0\n");
            let _ = writeln!(out, "element vertex {}", mesh.vertex_count());
            out.push_str("property double x\nproperty double y\nproperty double z\n");
            let _ = writeln!(out, "element face {}", mesh.face_count());
            out.push_str("property list uchar int vertex_indices\nend_header\n");
        }
    }
    for v in mesh.vertices() {
        for (k, c) in v.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&format_fixed((c * scale).round() as i64, decimals));
        }
        out.push('\n');
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}
