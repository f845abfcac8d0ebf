//! ASCII OBJ / OFF / PLY reading and writing.
//!
//! Indices are always 0-based in memory. OBJ texture and normal references
//! (`f 1/2/3`) are accepted and dropped. Polygons with more than three corners
//! are rejected unless fan triangulation is requested.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Default number of significant digits for written coordinates.
pub const DEFAULT_PRECISION: usize = 9;
/// Angle (degrees) mapped to pure red by [`write_error_map`].
pub const DEFAULT_ERROR_CLAMP: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Obj,
    Off,
    Ply,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
            .ok_or_else(|| Error::UnknownFormat(path.to_path_buf()))
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Format::Obj),
            "off" => Ok(Format::Off),
            "ply" => Ok(Format::Ply),
            other => Err(Error::UnsupportedElement(format!("format {other}"))),
        }
    }
}

/// Unvalidated vertex/face arrays as stored in a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawMesh {
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    pub face_colors: Option<Vec<[u8; 3]>>,
}

impl RawMesh {
    pub fn into_mesh(self) -> Result<Mesh> {
        Mesh::new(self.vertices, self.faces)
    }
}

impl From<&Mesh> for RawMesh {
    fn from(mesh: &Mesh) -> Self {
        Self { vertices: mesh.vertices().to_vec(), faces: mesh.faces().to_vec(), face_colors: None }
    }
}

/// Options for reading.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Fan-split polygons instead of rejecting them.
    pub triangulate: bool,
}

pub fn load_mesh(path: impl AsRef<Path>, format: Option<Format>, opts: ReadOptions) -> Result<RawMesh> {
    let path = path.as_ref();
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    let text = fs::read(path)?;
    if format == Format::Ply && !text.starts_with(b"ply") {
        return Err(Error::Parse { line: 1, reason: "missing 'ply' magic".into() });
    }
    let text = String::from_utf8(text).map_err(|_| Error::UnsupportedElement("non-UTF-8 (binary?) content".into()))?;
    parse(&text, format, opts)
}

pub fn parse(text: &str, format: Format, opts: ReadOptions) -> Result<RawMesh> {
    let raw = match format {
        Format::Obj => parse_obj(text, opts)?,
        Format::Off => parse_off(text, opts)?,
        Format::Ply => parse_ply(text, opts)?,
    };
    let n = raw.vertices.len();
    for f in &raw.faces {
        for &i in f {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
        }
    }
    Ok(raw)
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing number"))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad number '{tok}'")))
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing integer"))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad integer '{tok}'")))
}

fn push_polygon(faces: &mut Vec<[usize; 3]>, poly: &[usize], line: usize, opts: ReadOptions) -> Result<usize> {
    match poly.len() {
        3 => {
            faces.push([poly[0], poly[1], poly[2]]);
            Ok(1)
        }
        n if n > 3 && opts.triangulate => {
            for k in 1..n - 1 {
                faces.push([poly[0], poly[k], poly[k + 1]]);
            }
            Ok(n - 2)
        }
        n if n > 3 => Err(Error::NonTriangleFace { line, count: n }),
        _ => Err(parse_err(line, "face with fewer than 3 vertices")),
    }
}

fn parse_obj(text: &str, opts: ReadOptions) -> Result<RawMesh> {
    let mut raw = RawMesh::default();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                raw.vertices.push(Point::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::with_capacity(4);
                for tok in toks {
                    let idx = tok.split('/').next().unwrap_or_default();
                    let k: i64 = idx.parse().map_err(|_| parse_err(line, format!("bad index '{tok}'")))?;
                    let resolved = match k {
                        k if k > 0 => (k - 1) as usize,
                        k if k < 0 && (-k) as usize <= raw.vertices.len() => raw.vertices.len() - (-k) as usize,
                        _ => return Err(parse_err(line, format!("bad index '{tok}'"))),
                    };
                    poly.push(resolved);
                }
                push_polygon(&mut raw.faces, &poly, line, opts)?;
            }
            Some("l") | Some("p") => {
                return Err(Error::UnsupportedElement(format!("OBJ '{}' element at line {line}", l.trim())))
            }
            _ => {}
        }
    }
    Ok(raw)
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn color_component(tok: &str, line: usize) -> Result<u8> {
    if let Ok(v) = tok.parse::<u8>() {
        return Ok(v);
    }
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("bad color '{tok}'")))?;
    Ok((v.clamp(0.0, 1.0) * 255.0).round() as u8)
}

fn parse_off(text: &str, opts: ReadOptions) -> Result<RawMesh> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    let magic = toks.next().unwrap_or_default();
    if !magic.ends_with("OFF") {
        return Err(parse_err(line, "missing OFF header"));
    }
    if magic != "OFF" && magic != "COFF" && magic != "NOFF" {
        return Err(Error::UnsupportedElement(format!("OFF variant {magic}")));
    }
    let mut rest: Vec<&str> = toks.collect();
    let mut counts_line = line;
    if rest.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| parse_err(line, "missing counts"))?;
        counts_line = l;
        rest = c.split_whitespace().collect();
    }
    let mut it = rest.into_iter();
    let nv = parse_usize(it.next(), counts_line)?;
    let nf = parse_usize(it.next(), counts_line)?;

    let mut raw = RawMesh::default();
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated vertex list"))?;
        let mut t = s.split_whitespace();
        raw.vertices.push(Point::new(parse_f64(t.next(), l)?, parse_f64(t.next(), l)?, parse_f64(t.next(), l)?));
    }
    let mut colors = Vec::new();
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated face list"))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let n = parse_usize(toks.first().copied(), l)?;
        if toks.len() < n + 1 {
            return Err(parse_err(l, "face has fewer indices than declared"));
        }
        let poly = toks[1..=n].iter().map(|t| parse_usize(Some(t), l)).collect::<Result<Vec<_>>>()?;
        let count = push_polygon(&mut raw.faces, &poly, l, opts)?;
        let extra = &toks[n + 1..];
        if extra.len() >= 3 {
            let c = [color_component(extra[0], l)?, color_component(extra[1], l)?, color_component(extra[2], l)?];
            colors.extend(std::iter::repeat_n(c, count));
        }
    }
    if !colors.is_empty() && colors.len() == raw.faces.len() {
        raw.face_colors = Some(colors);
    }
    Ok(raw)
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    /// (name, is_list)
    properties: Vec<(String, bool)>,
}

fn parse_ply(text: &str, opts: ReadOptions) -> Result<RawMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing 'ply' magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "unterminated header"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => {}
            ["format", kind, _] => return Err(Error::UnsupportedElement(format!("PLY format {kind}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(PlyElement {
                name: name.to_string(),
                count: parse_usize(Some(count), line)?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(line, "property before element"))?
                .properties
                .push((name.to_string(), true)),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(line, "property before element"))?
                .properties
                .push((name.to_string(), false)),
            ["end_header"] => break,
            _ => return Err(parse_err(line, format!("unexpected header line '{l}'"))),
        }
    }

    let mut raw = RawMesh::default();
    let mut colors = Vec::new();
    let mut any_color = false;
    for el in &elements {
        let prop_pos = |n: &str| el.properties.iter().position(|(p, _)| p == n);
        for _ in 0..el.count {
            let (line, l) = lines.next().ok_or_else(|| parse_err(0, format!("truncated {} list", el.name)))?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            // expand list properties into (start, len) token spans
            let mut spans = Vec::with_capacity(el.properties.len());
            let mut k = 0;
            for (_, is_list) in &el.properties {
                if *is_list {
                    let n = parse_usize(toks.get(k).copied(), line)?;
                    spans.push((k + 1, n));
                    k += n + 1;
                } else {
                    spans.push((k, 1));
                    k += 1;
                }
            }
            if toks.len() < k {
                return Err(parse_err(line, "too few values"));
            }
            match el.name.as_str() {
                "vertex" => {
                    let get = |n: &str| {
                        let p = prop_pos(n).ok_or_else(|| parse_err(line, format!("vertex lacks '{n}'")))?;
                        parse_f64(Some(toks[spans[p].0]), line)
                    };
                    raw.vertices.push(Point::new(get("x")?, get("y")?, get("z")?));
                }
                "face" => {
                    let p = prop_pos("vertex_indices")
                        .or_else(|| prop_pos("vertex_index"))
                        .ok_or_else(|| parse_err(line, "face lacks vertex_indices"))?;
                    let (start, n) = spans[p];
                    let poly = toks[start..start + n]
                        .iter()
                        .map(|t| parse_usize(Some(t), line))
                        .collect::<Result<Vec<_>>>()?;
                    let count = push_polygon(&mut raw.faces, &poly, line, opts)?;
                    if let (Some(r), Some(g), Some(b)) = (prop_pos("red"), prop_pos("green"), prop_pos("blue")) {
                        any_color = true;
                        let c = [
                            color_component(toks[spans[r].0], line)?,
                            color_component(toks[spans[g].0], line)?,
                            color_component(toks[spans[b].0], line)?,
                        ];
                        colors.extend(std::iter::repeat_n(c, count));
                    }
                }
                _ => {}
            }
        }
    }
    if any_color {
        raw.face_colors = Some(colors);
    }
    Ok(raw)
}

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Serializes a mesh. `precision` is the number of significant digits and is
/// raised to at least 6.
pub fn write_to_string(raw: &RawMesh, format: Format, precision: usize) -> Result<String> {
    if raw.faces.is_empty() || raw.vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if let Some(c) = &raw.face_colors {
        if c.len() != raw.faces.len() {
            return Err(Error::LengthMismatch { expected: raw.faces.len(), actual: c.len() });
        }
    }
    let p = precision.max(6);
    let coords = |v: &Point| format!("{} {} {}", fmt_sig(v.x, p), fmt_sig(v.y, p), fmt_sig(v.z, p));
    let mut out = String::new();
    match format {
        Format::Obj => {
            for v in &raw.vertices {
                writeln!(out, "v {}", coords(v)).unwrap();
            }
            for f in &raw.faces {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
            }
        }
        Format::Off => {
            writeln!(out, "OFF\n{} {} 0", raw.vertices.len(), raw.faces.len()).unwrap();
            for v in &raw.vertices {
                writeln!(out, "{}", coords(v)).unwrap();
            }
            for (i, f) in raw.faces.iter().enumerate() {
                write!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
                if let Some(c) = &raw.face_colors {
                    write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]).unwrap();
                }
                out.push('\n');
            }
        }
        Format::Ply => {
            out.push_str("ply\nformat ascii 1.0\n");
            writeln!(out, "element vertex {}", raw.vertices.len()).unwrap();
            out.push_str("property double x\nproperty double y\nproperty double z\n");
            writeln!(out, "element face {}", raw.faces.len()).unwrap();
            out.push_str("property list uchar int vertex_indices\n");
            if raw.face_colors.is_some() {
                out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
            }
            out.push_str("end_header\n");
            for v in &raw.vertices {
                writeln!(out, "{}", coords(v)).unwrap();
            }
            for (i, f) in raw.faces.iter().enumerate() {
                write!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
                if let Some(c) = &raw.face_colors {
                    write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]).unwrap();
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn write_mesh(raw: &RawMesh, path: impl AsRef<Path>, format: Option<Format>, precision: usize) -> Result<()> {
    let path = path.as_ref();
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    fs::write(path, write_to_string(raw, format, precision)?)?;
    Ok(())
}

/// Linear blue-to-red ramp: `t = clamp(angle / clamp_max, 0, 1)` maps to
/// `(round(255 t), 0, round(255 (1 - t)))`.
pub fn error_color(angle_deg: f64, clamp_max: f64) -> [u8; 3] {
    let t = (angle_deg / clamp_max).clamp(0.0, 1.0);
    [(255.0 * t).round() as u8, 0, (255.0 * (1.0 - t)).round() as u8]
}

/// Writes the mesh as ASCII PLY with each face colored by its angular error.
pub fn write_error_map(
    mesh: &Mesh,
    angles_deg: &[f64],
    path: impl AsRef<Path>,
    clamp_max: f64,
    precision: usize,
) -> Result<()> {
    if angles_deg.len() != mesh.num_faces() {
        return Err(Error::LengthMismatch { expected: mesh.num_faces(), actual: angles_deg.len() });
    }
    let mut raw = RawMesh::from(mesh);
    raw.face_colors = Some(angles_deg.iter().map(|&a| error_color(a, clamp_max)).collect());
    write_mesh(&raw, path, Some(Format::Ply), precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    const TRI: ReadOptions = ReadOptions { triangulate: false };

    #[test]
    fn minimal_off() {
        let raw = parse("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", Format::Off, TRI).unwrap();
        assert_eq!(raw.vertices.len(), 3);
        assert_eq!(raw.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_indices_are_rebased() {
        let text = "# c\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1 2 3\n";
        assert_eq!(parse(text, Format::Obj, TRI).unwrap().faces, vec![[0, 1, 2]]);
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n";
        assert_eq!(parse(text, Format::Obj, TRI).unwrap().faces, vec![[0, 1, 2]]);
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1//1 -2//2 -1//3\n";
        assert_eq!(parse(text, Format::Obj, TRI).unwrap().faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn quads_need_triangulate() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(parse(text, Format::Obj, TRI), Err(Error::NonTriangleFace { line: 5, count: 4 })));
        let raw = parse(text, Format::Obj, ReadOptions { triangulate: true }).unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "v 0 0 0\nv 1 zz 0\n";
        assert!(matches!(parse(text, Format::Obj, TRI), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("OFF\n3 1 0\n0 0 0\n", Format::Off, TRI), Err(Error::Parse { .. })));
    }

    #[test]
    fn binary_ply_is_rejected() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse(text, Format::Ply, TRI), Err(Error::UnsupportedElement(_))));
    }

    #[test]
    fn round_trip_all_formats() {
        let mesh = shapes::icosphere(1);
        let raw = RawMesh::from(&mesh);
        for format in [Format::Obj, Format::Off, Format::Ply] {
            let text = write_to_string(&raw, format, DEFAULT_PRECISION).unwrap();
            let back = parse(&text, format, TRI).unwrap();
            assert_eq!(back.faces, raw.faces);
            for (a, b) in back.vertices.iter().zip(&raw.vertices) {
                assert!((a - b).norm() <= 1e-6 * mesh.bbox_diagonal());
            }
        }
    }

    #[test]
    fn ply_colors_round_trip() {
        let mut raw = RawMesh::from(&shapes::cube());
        raw.face_colors = Some((0..12).map(|i| [i as u8, 255 - i as u8, 7]).collect());
        let text = write_to_string(&raw, Format::Ply, 6).unwrap();
        assert!(text.contains("property uchar red"));
        assert_eq!(parse(&text, Format::Ply, TRI).unwrap(), raw);
    }

    #[test]
    fn empty_mesh_write_fails() {
        assert!(matches!(write_to_string(&RawMesh::default(), Format::Obj, 6), Err(Error::EmptyMesh)));
    }

    #[test]
    fn error_ramp_endpoints() {
        assert_eq!(error_color(0.0, 60.0), [0, 0, 255]);
        assert_eq!(error_color(60.0, 60.0), [255, 0, 0]);
        assert_eq!(error_color(90.0, 60.0), [255, 0, 0]);
        // 127.5 rounds away from zero on both channels
        assert_eq!(error_color(30.0, 60.0), [128, 0, 128]);
    }

    #[test]
    fn error_map_file() {
        let mesh = shapes::cube();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("err.ply");
        let angles = vec![0.0; 12];
        write_error_map(&mesh, &angles, &path, DEFAULT_ERROR_CLAMP, 6).unwrap();
        let raw = load_mesh(&path, None, TRI).unwrap();
        assert!(raw.face_colors.unwrap().iter().all(|&c| c == [0, 0, 255]));
        assert!(matches!(
            write_error_map(&mesh, &angles[..3], &path, 60.0, 6),
            Err(Error::LengthMismatch { expected: 12, actual: 3 })
        ));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.2345678901, 6), "1.23457");
        assert_eq!(fmt_sig(-0.000123456789, 6), "-0.000123457");
        assert_eq!(fmt_sig(123456.0, 6), "123456");
        assert_eq!(fmt_sig(0.5, 9), "0.5");
        assert_eq!(fmt_sig(0.0, 9), "0");
    }
}
