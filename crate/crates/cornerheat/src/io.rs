//! Plain-text dumps of meshes and sparse matrices.
//!
//! Mesh format:
//!
//! ```text
//! tmesh v1 <nv> <nt> <nc>
//! x y tag            (nv lines; tag is I, D<segment> or N<segment>)
//! i j k              (nt lines)
//! vertex_index theta bisector_angle edge_angle   (nc lines)
//! ```
//!
//! Floats are written in shortest round-trip form, so a dump reads back
//! bit for bit.

use std::io::{BufRead, Write};

use cornerheat_core::fem::SparseMatrix;
use cornerheat_core::{BoundaryTag, MeshCorner, Point2, ReentrantCorner, TriMesh};

use crate::error::{HarnessError, Result};

const MAGIC: &str = "tmesh v1";

fn tag_str(tag: BoundaryTag) -> String {
    match tag {
        BoundaryTag::Interior => "I".into(),
        BoundaryTag::Dirichlet(s) => format!("D{s}"),
        BoundaryTag::Neumann(s) => format!("N{s}"),
    }
}

fn parse_tag(s: &str) -> Option<BoundaryTag> {
    match s.split_at_checked(1)? {
        ("I", "") => Some(BoundaryTag::Interior),
        ("D", id) => id.parse().ok().map(BoundaryTag::Dirichlet),
        ("N", id) => id.parse().ok().map(BoundaryTag::Neumann),
        _ => None,
    }
}

pub fn write_mesh<W: Write>(mesh: &TriMesh, mut w: W) -> Result<()> {
    let (vs, ts, cs) = (mesh.vertices(), mesh.triangles(), mesh.corners());
    writeln!(w, "{MAGIC} {} {} {}", vs.len(), ts.len(), cs.len())?;
    for (p, tag) in vs.iter().zip(mesh.boundary()) {
        writeln!(w, "{:?} {:?} {}", p.x, p.y, tag_str(*tag))?;
    }
    for [i, j, k] in ts {
        writeln!(w, "{i} {j} {k}")?;
    }
    for c in cs {
        let k = &c.corner;
        writeln!(w, "{} {:?} {:?} {:?}", c.vertex_index, k.theta, k.bisector_angle, k.edge_angle)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self, want: usize) -> Result<Vec<String>> {
        self.number += 1;
        let line = match self.inner.next() {
            Some(l) => l?,
            None => return Err(self.error("unexpected end of file")),
        };
        let fields: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if fields.len() != want {
            return Err(self.error(format!("expected {want} fields, found {}", fields.len())));
        }
        Ok(fields)
    }

    fn error(&self, msg: impl Into<String>) -> HarnessError {
        HarnessError::Parse {
            line: self.number,
            msg: msg.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.error(format!("cannot parse {s:?}")))
    }
}

/// Reads a dump written by [`write_mesh`]. The mesh is audited; the
/// refinement level is not stored and reads back as 0.
pub fn read_mesh<R: BufRead>(r: R) -> Result<TriMesh> {
    let mut lines = Lines {
        inner: r.lines(),
        number: 0,
    };
    let head = lines.next_fields(5)?;
    if head[..2].join(" ") != MAGIC {
        return Err(lines.error(format!("not a {MAGIC} header")));
    }
    let nv: usize = lines.parse(&head[2])?;
    let nt: usize = lines.parse(&head[3])?;
    let nc: usize = lines.parse(&head[4])?;

    let mut vertices = Vec::with_capacity(nv);
    let mut boundary = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = lines.next_fields(3)?;
        vertices.push(Point2::new(lines.parse(&f[0])?, lines.parse(&f[1])?));
        boundary.push(parse_tag(&f[2]).ok_or_else(|| lines.error(format!("bad boundary tag {:?}", f[2])))?);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = lines.next_fields(3)?;
        triangles.push([lines.parse(&f[0])?, lines.parse(&f[1])?, lines.parse(&f[2])?]);
    }
    let mut corners = Vec::with_capacity(nc);
    for _ in 0..nc {
        let f = lines.next_fields(4)?;
        let vertex_index: usize = lines.parse(&f[0])?;
        let vertex = *vertices
            .get(vertex_index)
            .ok_or_else(|| lines.error(format!("corner vertex {vertex_index} out of range")))?;
        let corner = ReentrantCorner::new(vertex, lines.parse(&f[1])?, lines.parse(&f[3])?)?;
        let bisector: f64 = lines.parse(&f[2])?;
        if (corner.bisector_angle - bisector).abs() > 1e-12 {
            return Err(lines.error("bisector angle does not match theta and edge angle"));
        }
        corners.push(MeshCorner { vertex_index, corner });
    }
    Ok(TriMesh::new(vertices, triangles, boundary, corners)?)
}

/// One `i j value` line per stored entry, row by row.
pub fn write_triplets<W: Write>(m: &SparseMatrix, mut w: W) -> Result<()> {
    for (i, j, v) in m.triplets() {
        writeln!(w, "{i} {j} {v:?}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cornerheat_core::fem::assemble_mass;
    use cornerheat_core::mesh::{build_notched_rectangle, graded_refine, l_shape};

    fn round_trip(mesh: &TriMesh) -> TriMesh {
        let mut buf = Vec::new();
        write_mesh(mesh, &mut buf).unwrap();
        read_mesh(buf.as_slice()).unwrap()
    }

    #[test]
    fn meshes_read_back_exactly() {
        let graded = graded_refine(&l_shape(4).unwrap(), 0, 0.6).unwrap();
        for mesh in [l_shape(2).unwrap(), build_notched_rectangle(), graded] {
            let back = round_trip(&mesh);
            assert_eq!(back.vertices(), mesh.vertices());
            assert_eq!(back.triangles(), mesh.triangles());
            assert_eq!(back.boundary(), mesh.boundary());
            assert_eq!(back.corners(), mesh.corners());
        }
    }

    #[test]
    fn header_and_counts() {
        let mut buf = Vec::new();
        write_mesh(&build_notched_rectangle(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let m = build_notched_rectangle();
        let want = format!("tmesh v1 {} {} 3", m.n_vertices(), m.n_triangles());
        assert_eq!(text.lines().next().unwrap(), want);
        assert_eq!(text.lines().count(), 1 + m.n_vertices() + m.n_triangles() + 3);
    }

    #[test]
    fn malformed_input_names_the_line() {
        let cases = [
            ("tmesh v2 0 0 0\n", 1),
            ("tmesh v1 1 0 0\n0 0\n", 2),
            ("tmesh v1 1 0 0\n0 0 X\n", 2),
            ("tmesh v1 3 1 0\n0 0 D0\n1 0 D0\n0 1 D0\n0 1 7\n", 5),
        ];
        for (text, line) in cases {
            match read_mesh(text.as_bytes()) {
                Err(HarnessError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                Err(HarnessError::Core(_)) => assert_eq!(line, 5),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn triplets_list_every_entry() {
        let m = assemble_mass(&l_shape(1).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_triplets(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), m.nnz());
        let sum: f64 = text.lines().map(|l| l.split(' ').nth(2).unwrap().parse::<f64>().unwrap()).sum();
        assert!((sum - 3.0).abs() < 1e-12);
    }
}
