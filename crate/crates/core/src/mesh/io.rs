use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

impl TriangleMesh {
    pub fn load(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match format {
            MeshFormat::Obj => TriangleMesh::parse_obj(&text),
            MeshFormat::Off => TriangleMesh::parse_off(&text),
        }
    }

    /// Loads a mesh, picking the format from the file extension.
    pub fn load_auto(path: impl AsRef<Path>) -> Result<TriangleMesh> {
        let path = path.as_ref();
        let format = MeshFormat::from_path(path).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown mesh extension: {}", path.display()))
        })?;
        TriangleMesh::load(path, format)
    }

    /// Parses Wavefront OBJ (`v` and `f` records; 1-based or negative indices).
    pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            let mut tok = content.split_whitespace();
            match tok.next() {
                Some("v") => {
                    let p = parse_vec3(&mut tok, line)?;
                    vertices.push(p);
                }
                Some("f") => {
                    let mut tri = [0usize; 3];
                    let mut count = 0;
                    for t in tok {
                        if count == 3 {
                            return Err(Error::parse(line, "only triangular faces are supported"));
                        }
                        let head = t.split('/').next().unwrap_or("");
                        let idx: i64 = head
                            .parse()
                            .map_err(|_| Error::parse(line, format!("bad face index `{t}`")))?;
                        let resolved = if idx > 0 {
                            idx - 1
                        } else if idx < 0 {
                            vertices.len() as i64 + idx
                        } else {
                            return Err(Error::parse(line, "face index 0 is invalid in OBJ (1-based)"));
                        };
                        if resolved < 0 || resolved as usize >= vertices.len() {
                            return Err(Error::parse(line, format!("face index {idx} out of range")));
                        }
                        tri[count] = resolved as usize;
                        count += 1;
                    }
                    if count != 3 {
                        return Err(Error::parse(line, "face needs exactly three indices"));
                    }
                    faces.push(tri);
                }
                _ => {}
            }
        }
        TriangleMesh::new(vertices, faces)
    }

    /// Parses ASCII OFF.
    pub fn parse_off(text: &str) -> Result<TriangleMesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
        // the counts may share the header line ("OFF 3 1 0")
        let rest = header
            .strip_prefix("OFF")
            .ok_or_else(|| Error::parse(line, "missing OFF header"))?
            .trim();
        let (line, counts) = if rest.is_empty() {
            lines.next().ok_or_else(|| Error::parse(line, "missing counts"))?
        } else {
            (line, rest)
        };
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(line, format!("bad count `{t}`"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(Error::parse(line, "expected vertex and face counts"));
        }
        let (nv, nf) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "unexpected end of file in vertex list"))?;
            vertices.push(parse_vec3(&mut l.split_whitespace(), line)?);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (line, l) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "unexpected end of file in face list"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(line, format!("bad index `{t}`"))))
                .collect::<Result<_>>()?;
            if idx.first() != Some(&3) || idx.len() < 4 {
                return Err(Error::parse(line, "only triangular faces are supported"));
            }
            for &v in &idx[1..4] {
                if v >= nv {
                    return Err(Error::parse(line, format!("face index {v} out of range")));
                }
            }
            faces.push([idx[1], idx[2], idx[3]]);
        }
        TriangleMesh::new(vertices, faces)
    }

    pub fn to_off_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "OFF").unwrap();
        writeln!(s, "{} {} 0", self.n_vertices(), self.n_faces()).unwrap();
        for p in self.vertices() {
            writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]).unwrap();
        }
        for t in self.faces() {
            writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }

    pub fn write_off(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_off_string()).map_err(|e| Error::io(path, e))
    }
}

fn parse_vec3<'a>(tok: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<Vec3> {
    let mut p = [0.0; 3];
    for c in &mut p {
        let t = tok
            .next()
            .ok_or_else(|| Error::parse(line, "expected three coordinates"))?;
        *c = f64::from_str(t).map_err(|_| Error::parse(line, format!("bad coordinate `{t}`")))?;
    }
    Ok(p)
}
