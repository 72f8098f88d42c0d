//! Discretized model manifolds: closed/open 1-D chains and triangle meshes.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Known geometric data of a built-in manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMetadata {
    pub n: u32,
    /// Ricci lower bound divided by `n - 1`.
    pub kappa_lower: f64,
    pub diameter: f64,
    pub lambda1_exact: Option<f64>,
}

/// A chain of nodes on a circle (`closed`) or an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph1D {
    pub name: String,
    /// Strictly increasing arc-length positions.
    pub positions: Vec<f64>,
    pub closed: bool,
    /// Circumference for closed chains; ignored otherwise.
    pub length: f64,
    pub metadata: Option<AnalyticMetadata>,
}

impl Graph1D {
    pub fn validate(&self) -> Result<()> {
        if self.positions.len() < 8 {
            return Err(Error::InvalidMesh(format!(
                "a chain needs at least 8 nodes, got {}",
                self.positions.len()
            )));
        }
        if self.positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMesh("positions must be strictly increasing".into()));
        }
        if self.closed {
            let span = self.positions[self.positions.len() - 1] - self.positions[0];
            if !(self.length > span) {
                return Err(Error::InvalidMesh("circumference must exceed the position span".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Edges `(i, j, length)`, including the closing edge of a circle.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.positions.len();
        let mut edges: Vec<(usize, usize, f64)> = (0..n - 1)
            .map(|i| (i, i + 1, self.positions[i + 1] - self.positions[i]))
            .collect();
        if self.closed {
            let wrap = self.length - (self.positions[n - 1] - self.positions[0]);
            edges.push((n - 1, 0, wrap));
        }
        edges
    }
}

/// Uniform closed chain of `nodes` nodes with circumference `length`.
pub fn build_circle(length: f64, nodes: usize) -> Result<Graph1D> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidMesh(format!("circle length must be positive, got {length}")));
    }
    let h = length / nodes as f64;
    let graph = Graph1D {
        name: format!("circle(L={length}, N={nodes})"),
        positions: (0..nodes).map(|i| i as f64 * h).collect(),
        closed: true,
        length,
        metadata: Some(AnalyticMetadata {
            n: 1,
            kappa_lower: 0.0,
            diameter: 0.5 * length,
            lambda1_exact: Some((2.0 * PI / length).powi(2)),
        }),
    };
    graph.validate()?;
    Ok(graph)
}

/// Uniform open chain on `[-D/2, D/2]`; the end nodes carry half cells.
pub fn build_interval(diameter: f64, nodes: usize) -> Result<Graph1D> {
    if !(diameter > 0.0) || !diameter.is_finite() {
        return Err(Error::InvalidMesh(format!("interval length must be positive, got {diameter}")));
    }
    if nodes < 8 {
        return Err(Error::InvalidMesh(format!("a chain needs at least 8 nodes, got {nodes}")));
    }
    let h = diameter / (nodes - 1) as f64;
    let half = 0.5 * diameter;
    let graph = Graph1D {
        name: format!("interval(D={diameter}, N={nodes})"),
        positions: (0..nodes)
            .map(|i| if i + 1 == nodes { half } else { -half + i as f64 * h })
            .collect(),
        closed: false,
        length: diameter,
        metadata: Some(AnalyticMetadata {
            n: 1,
            kappa_lower: 0.0,
            diameter,
            lambda1_exact: Some(PI * PI / (diameter * diameter)),
        }),
    };
    graph.validate()?;
    Ok(graph)
}

pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// A triangulated surface.
///
/// `periods` turns the mesh into a quotient of space by a lattice: edge
/// vectors are taken as minimum images along every axis with a positive
/// period. This is how the flat torus is represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub periods: Option<Vec3>,
    pub metadata: Option<AnalyticMetadata>,
}

impl TriangleMesh {
    /// Vector from vertex `i` to vertex `j`.
    #[inline]
    pub fn edge_vector(&self, i: usize, j: usize) -> Vec3 {
        let mut d = sub(self.vertices[j], self.vertices[i]);
        if let Some(periods) = self.periods {
            for (x, &p) in d.iter_mut().zip(&periods) {
                if p > 0.0 {
                    *x -= p * (*x / p).round();
                }
            }
        }
        d
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * norm(cross(self.edge_vector(a, b), self.edge_vector(a, c)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Mean edge length, the mesh size `h`.
    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edges();
        edges.iter().map(|&(i, j)| norm(self.edge_vector(i, j))).sum::<f64>() / edges.len() as f64
    }

    /// Checks indices, degenerate triangles, edge-manifoldness and connectivity.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if nv == 0 || self.triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices or no triangles".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle { index: t, area: 0.0 });
            }
        }
        self.check_degenerate()?;

        let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                *edge_use.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        if let Some((&(i, j), _)) = edge_use
            .iter()
            .filter(|(_, &count)| count > 2)
            .min_by_key(|(&e, _)| e)
        {
            return Err(Error::NonManifoldMesh(i, j));
        }

        let components = count_components(nv, self.edges().into_iter());
        if components != 1 {
            return Err(Error::DisconnectedMesh { components });
        }
        Ok(())
    }

    /// Rejects triangles whose area is below `1e-14` of the mean area.
    pub fn check_degenerate(&self) -> Result<()> {
        let areas: Vec<f64> = (0..self.triangles.len()).map(|t| self.triangle_area(t)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        match areas.iter().position(|&a| !(a > 1e-14 * mean)) {
            Some(index) => Err(Error::DegenerateTriangle {
                index,
                area: areas[index],
            }),
            None => Ok(()),
        }
    }
}

fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut components = n;
    for (i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            components -= 1;
        }
    }
    components
}

/// Icosahedron subdivided `subdivisions` times and projected to radius `r`.
pub fn build_icosphere(radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidMesh(format!("radius must be positive, got {radius}")));
    }
    if subdivisions > 7 {
        return Err(Error::InvalidMesh(format!(
            "at most 7 subdivisions are supported, got {subdivisions}"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let project = |v: Vec3| {
        let l = norm(v);
        [radius * v[0] / l, radius * v[1] / l, radius * v[2] / l]
    };
    vertices.iter_mut().for_each(|v| *v = project(*v));

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        let mut midpoint = |i: usize, j: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoints.entry((i.min(j), i.max(j))).or_insert_with(|| {
                let (a, b) = (vertices[i], vertices[j]);
                vertices.push(project([
                    0.5 * (a[0] + b[0]),
                    0.5 * (a[1] + b[1]),
                    0.5 * (a[2] + b[2]),
                ]));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }

    Ok(TriangleMesh {
        name: format!("icosphere(r={radius}, subdiv={subdivisions})"),
        vertices,
        triangles,
        periods: None,
        metadata: Some(AnalyticMetadata {
            n: 2,
            kappa_lower: 1.0 / (radius * radius),
            diameter: PI * radius,
            lambda1_exact: Some(2.0 / (radius * radius)),
        }),
    })
}

/// `nx x ny` periodic grid on `[0, a) x [0, b)`, every cell split along the
/// same diagonal.
pub fn build_flat_torus(a: f64, b: f64, nx: usize, ny: usize) -> Result<TriangleMesh> {
    if !(a > 0.0 && b > 0.0) || !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidMesh(format!("torus sides must be positive, got {a} x {b}")));
    }
    if nx < 8 || ny < 8 {
        return Err(Error::InvalidMesh(format!("torus grid must be at least 8 x 8, got {nx} x {ny}")));
    }
    let index = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push([a * i as f64 / nx as f64, b * j as f64 / ny as f64, 0.0]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (index(i, j), index(i + 1, j), index(i, j + 1), index(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let k1 = (2.0 * PI / a).powi(2);
    let k2 = (2.0 * PI / b).powi(2);
    Ok(TriangleMesh {
        name: format!("flat_torus(a={a}, b={b}, N={nx}, M={ny})"),
        vertices,
        triangles,
        periods: Some([a, b, 0.0]),
        metadata: Some(AnalyticMetadata {
            n: 2,
            kappa_lower: 0.0,
            diameter: 0.5 * (a * a + b * b).sqrt(),
            lambda1_exact: Some(k1.min(k2)),
        }),
    })
}

/// Reads an ASCII OFF file (triangles only).
pub fn load_mesh_off(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut mesh = parse_off(std::io::BufReader::new(file))?;
    mesh.name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    Ok(mesh)
}

/// Parses OFF text from any reader; see [`load_mesh_off`].
pub fn parse_off<R: BufRead>(reader: R) -> Result<TriangleMesh> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter_map(|(i, l)| match l {
            Ok(text) => {
                let body = text.split('#').next().unwrap_or("").trim().to_string();
                (!body.is_empty()).then_some(Ok((i, body)))
            }
            Err(e) => Some(Err(Error::from(e))),
        });
    let mut next_line = |what: &str, last: usize| -> Result<(usize, String)> {
        lines
            .next()
            .unwrap_or_else(|| Err(parse_err(last + 1, format!("unexpected end of file, expected {what}"))))
    };

    let (header_line, header) = next_line("OFF header", 0)?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&"OFF") {
        return Err(parse_err(header_line, format!("expected `OFF` header, found `{header}`")));
    }
    tokens.remove(0);
    let (counts_line, counts_text) = if tokens.is_empty() {
        next_line("counts line", header_line)?
    } else {
        (header_line, tokens.join(" "))
    };
    let counts: Vec<usize> = counts_text
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(counts_line, format!("bad counts line: {e}")))?;
    if counts.len() < 2 {
        return Err(parse_err(counts_line, "counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut last = counts_line;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = next_line("vertex line", last)?;
        last = line;
        let coords: Vec<f64> = text
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(line, format!("bad vertex coordinate: {e}")))?;
        if coords.len() != 3 || coords.iter().any(|c| !c.is_finite()) {
            return Err(parse_err(line, "vertex needs three finite coordinates".into()));
        }
        vertices.push([coords[0], coords[1], coords[2]]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, text) = next_line("face line", last)?;
        last = line;
        let fields: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(line, format!("bad face index: {e}")))?;
        match fields.as_slice() {
            [3, a, b, c, ..] => {
                if let Some(bad) = [*a, *b, *c].into_iter().find(|&v| v >= nv) {
                    return Err(parse_err(line, format!("vertex index {bad} out of range (0..{nv})")));
                }
                triangles.push([*a, *b, *c]);
            }
            [arity, ..] => {
                return Err(parse_err(line, format!("only triangles are supported, found arity {arity}")))
            }
            [] => return Err(parse_err(line, "empty face line".into())),
        }
    }
    let mesh = TriangleMesh {
        name: "mesh".into(),
        vertices,
        triangles,
        periods: None,
        metadata: None,
    };
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn icosphere_counts() {
        let m = build_icosphere(1.0, 0).unwrap();
        assert_eq!((m.vertices.len(), m.triangles.len()), (12, 20));
        for k in 1..=4 {
            let m = build_icosphere(1.0, k).unwrap();
            assert_eq!(m.vertices.len(), 10 * 4usize.pow(k) + 2);
            assert_eq!(m.triangles.len(), 20 * 4usize.pow(k));
            m.validate().unwrap();
        }
        let m = build_icosphere(2.0, 4).unwrap();
        assert_eq!(m.metadata.unwrap().lambda1_exact, Some(0.5));
    }

    #[test]
    fn torus_is_closed() {
        let m = build_flat_torus(2.0 * PI, PI, 16, 8).unwrap();
        m.validate().unwrap();
        let mut use_count: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &m.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                *use_count.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        assert!(use_count.values().all(|&c| c == 2));
        assert!((m.total_area() - 2.0 * PI * PI).abs() < 1e-12);
        let md = m.metadata.unwrap();
        assert!((md.diameter - PI * 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((md.lambda1_exact.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_builders() {
        let c = build_circle(2.0 * PI, 400).unwrap();
        let md = c.metadata.unwrap();
        assert!((md.diameter - PI).abs() < 1e-15);
        assert!((md.lambda1_exact.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(c.edges().len(), 400);
        assert!(build_circle(1.0, 8).is_ok());
        assert!(build_circle(1.0, 7).is_err());

        let i = build_interval(2.0, 8).unwrap();
        assert_eq!(i.edges().len(), 7);
        assert!((i.metadata.unwrap().lambda1_exact.unwrap() - PI * PI / 4.0).abs() < 1e-15);
        assert_eq!(i.positions[0], -1.0);
        assert_eq!(i.positions[7], 1.0);
    }

    #[test]
    fn off_tetrahedron() {
        let m = parse_off(TETRA.as_bytes()).unwrap();
        assert_eq!((m.vertices.len(), m.triangles.len()), (4, 4));
        assert!(m.metadata.is_none());
    }

    #[test]
    fn off_errors() {
        let dangling = TETRA.replace("3 1 2 3", "3 1 2 9");
        match parse_off(dangling.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("unexpected {other:?}"),
        }
        let quad = TETRA.replace("3 1 2 3", "4 1 2 3 0");
        assert!(matches!(parse_off(quad.as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(parse_off("OF\n".as_bytes()), Err(Error::Parse { line: 1, .. })));

        let two = "OFF\n8 8 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n5 0 0\n6 0 0\n5 1 0\n5 0 1\n\
                   3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n3 4 6 5\n3 4 5 7\n3 4 7 6\n3 5 6 7\n";
        assert!(matches!(
            parse_off(two.as_bytes()),
            Err(Error::DisconnectedMesh { components: 2 })
        ));

        let fin = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 -1 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
        assert!(matches!(parse_off(fin.as_bytes()), Err(Error::NonManifoldMesh(0, 1))));

        let flat = "OFF\n3 1 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n";
        assert!(matches!(
            parse_off(flat.as_bytes()),
            Err(Error::DegenerateTriangle { index: 0, .. })
        ));
    }
}
