use std::collections::HashMap;
use std::path::Path;

use super::{MeshError, SurfaceMesh};
use crate::Vec3;

/// Supported surface mesh file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// Wavefront OBJ, `v` and triangular `f` records.
    Obj,
    /// Gmsh MSH 2.x ASCII, element type 2 (3-node triangle).
    GmshV2,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "msh" => Some(Self::GmshV2),
            _ => None,
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<SurfaceMesh, MeshError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    let (vertices, triangles) = match format {
        MeshFormat::Obj => parse_obj(&text)?,
        MeshFormat::GmshV2 => parse_msh_v2(&text)?,
    };
    SurfaceMesh::new(vertices, triangles)
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coords<'a>(line: usize, mut it: impl Iterator<Item = &'a str>) -> Result<Vec3, MeshError> {
    let mut p = [0.0; 3];
    for c in &mut p {
        let tok = it
            .next()
            .ok_or_else(|| parse_err(line, "expected three coordinates"))?;
        *c = tok
            .parse()
            .map_err(|_| parse_err(line, format!("bad coordinate {tok:?}")))?;
    }
    Ok(Vec3::from(p))
}

/// Parse OBJ text into vertices and zero-based triangles.
pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => vertices.push(parse_coords(line, tokens)?),
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!(
                            "only triangular faces are supported, got {} vertices",
                            refs.len()
                        ),
                    ));
                }
                let mut tri = [0usize; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad vertex reference {r:?}")))?;
                    let resolved = match idx {
                        i if i > 0 => i - 1,
                        i if i < 0 => vertices.len() as i64 + i,
                        _ => -1,
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(
                            line,
                            format!("vertex reference {idx} out of range"),
                        ));
                    }
                    *slot = resolved as usize;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

/// Parse Gmsh MSH v2 ASCII; only 3-node triangles (type 2) are kept.
pub fn parse_msh_v2(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    let lines: Vec<&str> = text.lines().collect();
    let find = |tag: &str| lines.iter().position(|l| l.trim() == tag);

    let fmt = find("$MeshFormat").ok_or_else(|| parse_err(0, "missing $MeshFormat"))?;
    let version = lines
        .get(fmt + 1)
        .and_then(|l| l.split_whitespace().next())
        .ok_or_else(|| parse_err(fmt + 2, "missing version line"))?;
    if !version.starts_with('2') {
        return Err(parse_err(
            fmt + 2,
            format!("unsupported MSH version {version}"),
        ));
    }
    if lines.get(fmt + 1).and_then(|l| l.split_whitespace().nth(1)) != Some("0") {
        return Err(parse_err(fmt + 2, "binary MSH files are not supported"));
    }

    let start = find("$Nodes").ok_or_else(|| parse_err(0, "missing $Nodes"))?;
    let count: usize = lines
        .get(start + 1)
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| parse_err(start + 2, "bad node count"))?;
    let mut ids = HashMap::with_capacity(count);
    let mut vertices = Vec::with_capacity(count);
    for k in 0..count {
        let line = start + 2 + k;
        let raw = lines
            .get(line)
            .ok_or_else(|| parse_err(line + 1, "truncated $Nodes"))?;
        let mut tokens = raw.split_whitespace();
        let id: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line + 1, "bad node id"))?;
        vertices.push(parse_coords(line + 1, tokens)?);
        ids.insert(id, vertices.len() - 1);
    }

    let start = find("$Elements").ok_or_else(|| parse_err(0, "missing $Elements"))?;
    let count: usize = lines
        .get(start + 1)
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| parse_err(start + 2, "bad element count"))?;
    let mut triangles = Vec::new();
    for k in 0..count {
        let line = start + 2 + k;
        let raw = lines
            .get(line)
            .ok_or_else(|| parse_err(line + 1, "truncated $Elements"))?;
        let fields: Vec<usize> = raw
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(line + 1, "bad element record"))?;
        if fields.len() < 3 || fields[1] != 2 {
            continue;
        }
        let nodes = &fields[3 + fields[2]..];
        if nodes.len() != 3 {
            return Err(parse_err(line + 1, "triangle element must list 3 nodes"));
        }
        let mut tri = [0usize; 3];
        for (slot, id) in tri.iter_mut().zip(nodes) {
            *slot = *ids
                .get(id)
                .ok_or_else(|| parse_err(line + 1, format!("unknown node id {id}")))?;
        }
        triangles.push(tri);
    }
    Ok((vertices, triangles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_unit_sphere;
    use std::fmt::Write;

    fn to_obj(mesh: &SurfaceMesh, skip: Option<usize>) -> String {
        let mut s = String::from("# icosahedron\n");
        for v in mesh.vertices() {
            writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
        }
        for (i, t) in mesh.triangles().iter().enumerate() {
            if Some(i) != skip {
                writeln!(s, "f {}/1 {} {}//3", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
            }
        }
        s
    }

    #[test]
    fn obj_icosahedron_round_trip() {
        let ico = make_unit_sphere(0).unwrap();
        let (v, t) = parse_obj(&to_obj(&ico, None)).unwrap();
        assert_eq!((v.len(), t.len()), (12, 20));
        let mesh = SurfaceMesh::new(v, t).unwrap();
        assert!(mesh.closedness_residual() < 1e-12 * mesh.total_area());
    }

    #[test]
    fn obj_missing_face_is_open() {
        let ico = make_unit_sphere(0).unwrap();
        let (v, t) = parse_obj(&to_obj(&ico, Some(3))).unwrap();
        let err = SurfaceMesh::new(v, t).unwrap_err();
        assert!(matches!(err, MeshError::OpenSurface(..)));
        assert!(err.to_string().contains("open surface"));
    }

    #[test]
    fn obj_rejects_quads_and_bad_refs() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n").is_err());
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("v 0 0 zero\n").is_err());
    }

    #[test]
    fn msh_level3_sphere() {
        let sphere = make_unit_sphere(3).unwrap();
        let mut s = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
        writeln!(s, "{}", sphere.vertices().len()).unwrap();
        for (i, v) in sphere.vertices().iter().enumerate() {
            writeln!(s, "{} {:.17e} {:.17e} {:.17e}", i + 10, v.x, v.y, v.z).unwrap();
        }
        s.push_str("$EndNodes\n$Elements\n");
        writeln!(s, "{}", sphere.len() + 1).unwrap();
        writeln!(s, "1 15 2 0 1 10").unwrap();
        for (i, t) in sphere.triangles().iter().enumerate() {
            writeln!(
                s,
                "{} 2 2 0 1 {} {} {}",
                i + 2,
                t[0] + 10,
                t[1] + 10,
                t[2] + 10
            )
            .unwrap();
        }
        s.push_str("$EndElements\n");
        let (v, t) = parse_msh_v2(&s).unwrap();
        let mesh = SurfaceMesh::new(v, t).unwrap();
        let four_pi = 4.0 * std::f64::consts::PI;
        assert_eq!(mesh.len(), 1280);
        assert!((mesh.total_area() - four_pi).abs() / four_pi < 0.02);
    }

    #[test]
    fn msh_rejects_binary_and_v4() {
        assert!(parse_msh_v2("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n").is_err());
        assert!(parse_msh_v2("$MeshFormat\n2.2 1 8\n$EndMeshFormat\n").is_err());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            MeshFormat::from_path(Path::new("a/b.OBJ")),
            Some(MeshFormat::Obj)
        );
        assert_eq!(
            MeshFormat::from_path(Path::new("b.msh")),
            Some(MeshFormat::GmshV2)
        );
        assert_eq!(MeshFormat::from_path(Path::new("b.stl")), None);
    }
}
