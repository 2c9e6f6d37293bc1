//! Polygonal meshes of the unit square with an accessible/inaccessible
//! boundary split.
//!
//! Every edge carries one fixed global orientation `v0 -> v1` and a unit
//! normal obtained by rotating that direction by -90 degrees. Each cell
//! records, per side, the edge index and a sign `+1`/`-1` telling whether the
//! global normal points out of the cell. Traces and normal fluxes stored per
//! edge are therefore single-valued by construction.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::{Add, Sub};

use thiserror::Error;

const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cell {cell}: vertex index {index} out of range ({nv} vertices)")]
    DanglingVertex { cell: usize, index: usize, nv: usize },
    #[error("cell {cell} has fewer than three vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell} is not counterclockwise (signed area {area:e})")]
    NotCounterClockwise { cell: usize, area: f64 },
    #[error("cell {cell} is not a simple polygon")]
    SelfIntersecting { cell: usize },
    #[error("edge ({v0}, {v1}) is shared by more than two cells")]
    NonManifoldEdge { v0: usize, v1: usize },
    #[error("cells {a} and {b} traverse their common edge in the same direction")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("edge list does not match the cell sides: {0}")]
    EdgeMismatch(String),
    #[error("every boundary edge was assigned to the inaccessible part; the data boundary must be nonempty")]
    EmptyDataBoundary,
    #[error("boundary edge {0} has not been tagged")]
    UntaggedBoundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;

    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// Classification of an edge with respect to the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    /// Boundary edge that has not been assigned to either part yet.
    Boundary,
    /// Accessible boundary carrying both Dirichlet and Neumann data.
    Gamma1,
    /// Inaccessible boundary, no data.
    Gamma2,
}

impl EdgeTag {
    pub fn is_boundary(self) -> bool {
        self != EdgeTag::Interior
    }

    fn file_code(self) -> Option<u8> {
        match self {
            EdgeTag::Interior => Some(0),
            EdgeTag::Gamma1 => Some(1),
            EdgeTag::Gamma2 => Some(2),
            EdgeTag::Boundary => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counterclockwise vertex indices.
    pub vertex_ids: Vec<usize>,
    /// Maximum pairwise vertex distance.
    pub diameter: f64,
    pub centroid: Point2,
    pub area: f64,
    pub convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub v0: usize,
    pub v1: usize,
    /// Unit normal, `(v1 - v0)` rotated by -90 degrees.
    pub normal: Point2,
    pub left_cell: usize,
    pub right_cell: Option<usize>,
    pub tag: EdgeTag,
}

/// Side of a cell: the global edge and whether its normal is outward (`+1`)
/// or inward (`-1`) for this cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge {
    pub edge: usize,
    pub sign: f64,
}

/// A straight segment with the affine parametrization
/// `x(t) = mid + t * (b - a) / 2`, `t` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        (self.a + self.b).scale(0.5)
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        let m = self.midpoint();
        let half = (self.b - self.a).scale(0.5);
        m + half.scale(t)
    }

    /// Unit normal of the direction `a -> b` rotated by -90 degrees.
    pub fn normal(&self) -> Point2 {
        let d = self.b - self.a;
        let l = d.norm();
        Point2::new(d.y / l, -d.x / l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Point2>,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    /// `cell_to_edges[c][j]` is the side from `vertex_ids[j]` to `vertex_ids[j + 1]`.
    pub cell_to_edges: Vec<Vec<CellEdge>>,
    /// Maximum cell diameter.
    pub h: f64,
}

fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

fn centroid(poly: &[Point2], area: f64) -> Point2 {
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

fn diameter(poly: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

/// Convex when no corner turns clockwise; collinear corners count as convex.
pub fn is_convex(poly: &[Point2]) -> bool {
    let n = poly.len();
    let scale = diameter(poly).powi(2);
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        (b - a).cross(c - b) >= -GEOM_EPS * scale
    })
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = (q2 - q1).cross(p1 - q1);
    let d2 = (q2 - q1).cross(p2 - q1);
    let d3 = (p2 - p1).cross(q1 - p1);
    let d4 = (p2 - p1).cross(q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2, d: f64| {
        d.abs() <= GEOM_EPS
            && p.x >= a.x.min(b.x) - GEOM_EPS
            && p.x <= a.x.max(b.x) + GEOM_EPS
            && p.y >= a.y.min(b.y) - GEOM_EPS
            && p.y <= a.y.max(b.y) + GEOM_EPS
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            // adjacent sides share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    // repeated vertices
    for i in 0..n {
        for j in i + 1..n {
            if poly[i].dist(poly[j]) <= GEOM_EPS {
                return false;
            }
        }
    }
    true
}

impl PolyMesh {
    /// Builds a mesh from vertices and counterclockwise cells, computing the
    /// edges and adjacency. Boundary edges are left untagged.
    pub fn from_cells(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        let mut out_cells = Vec::with_capacity(cells.len());
        for (c, ids) in cells.into_iter().enumerate() {
            if ids.len() < 3 {
                return Err(MeshError::TooFewVertices { cell: c });
            }
            if let Some(&bad) = ids.iter().find(|&&i| i >= nv) {
                return Err(MeshError::DanglingVertex { cell: c, index: bad, nv });
            }
            let poly: Vec<Point2> = ids.iter().map(|&i| vertices[i]).collect();
            let area = signed_area(&poly);
            let diam = diameter(&poly);
            if area <= GEOM_EPS * diam * diam {
                return Err(MeshError::NotCounterClockwise { cell: c, area });
            }
            if !is_simple(&poly) {
                return Err(MeshError::SelfIntersecting { cell: c });
            }
            out_cells.push(Cell {
                centroid: centroid(&poly, area),
                diameter: diam,
                area,
                convex: is_convex(&poly),
                vertex_ids: ids,
            });
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_to_edges = Vec::with_capacity(out_cells.len());
        for (c, cell) in out_cells.iter().enumerate() {
            let ids = &cell.vertex_ids;
            let k = ids.len();
            let mut sides = Vec::with_capacity(k);
            for j in 0..k {
                let (a, b) = (ids[j], ids[(j + 1) % k]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let seg = Segment::new(vertices[a], vertices[b]);
                        lookup.insert(key, edges.len());
                        sides.push(CellEdge { edge: edges.len(), sign: 1.0 });
                        edges.push(Edge {
                            v0: a,
                            v1: b,
                            normal: seg.normal(),
                            left_cell: c,
                            right_cell: None,
                            tag: EdgeTag::Boundary,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right_cell.is_some() {
                            return Err(MeshError::NonManifoldEdge { v0: a, v1: b });
                        }
                        if edge.v0 == a {
                            return Err(MeshError::InconsistentOrientation { a: edge.left_cell, b: c });
                        }
                        edge.right_cell = Some(c);
                        edge.tag = EdgeTag::Interior;
                        sides.push(CellEdge { edge: e, sign: -1.0 });
                    }
                }
            }
            cell_to_edges.push(sides);
        }
        let h = out_cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        Ok(Self { vertices, cells: out_cells, edges, cell_to_edges, h })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point2> {
        self.cells[c].vertex_ids.iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn segment(&self, e: usize) -> Segment {
        let edge = &self.edges[e];
        Segment::new(self.vertices[edge.v0], self.vertices[edge.v1])
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// The (edge, sign) pair of the unique cell touching a boundary edge.
    pub fn boundary_sign(&self, e: usize) -> f64 {
        let cell = self.edges[e].left_cell;
        self.cell_to_edges[cell].iter().find(|s| s.edge == e).map(|s| s.sign).expect("edge missing from its own cell")
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].tag.is_boundary())
    }

    pub fn count_tag(&self, tag: EdgeTag) -> usize {
        self.edges.iter().filter(|e| e.tag == tag).count()
    }

    /// Returns a copy with edge `e` reversed: endpoints swapped, normal
    /// negated and the per-cell signs flipped.
    pub fn flip_edge(&self, e: usize) -> PolyMesh {
        let mut out = self.clone();
        let edge = &mut out.edges[e];
        std::mem::swap(&mut edge.v0, &mut edge.v1);
        edge.normal = edge.normal.scale(-1.0);
        if let Some(r) = edge.right_cell {
            edge.right_cell = Some(edge.left_cell);
            edge.left_cell = r;
        }
        for sides in out.cell_to_edges.iter_mut() {
            for s in sides.iter_mut().filter(|s| s.edge == e) {
                s.sign = -s.sign;
            }
        }
        out
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn validate(&self) -> Result<(), String> {
        for (e, edge) in self.edges.iter().enumerate() {
            let incident: Vec<(usize, f64)> = self
                .cell_to_edges
                .iter()
                .enumerate()
                .flat_map(|(c, s)| s.iter().filter(|s| s.edge == e).map(move |s| (c, s.sign)))
                .collect();
            let expect = if edge.right_cell.is_some() { 2 } else { 1 };
            if incident.len() != expect {
                return Err(format!("edge {e}: {} incident cells, expected {expect}", incident.len()));
            }
            if expect == 2 && incident[0].1 == incident[1].1 {
                return Err(format!("edge {e}: incident cells carry equal signs"));
            }
            if (edge.normal.norm() - 1.0).abs() > 1e-12 {
                return Err(format!("edge {e}: normal not unit"));
            }
            if (edge.tag == EdgeTag::Interior) != (expect == 2) {
                return Err(format!("edge {e}: tag {:?} inconsistent with adjacency", edge.tag));
            }
        }
        for (c, sides) in self.cell_to_edges.iter().enumerate() {
            let mut sum = Point2::default();
            for s in sides {
                let seg = self.segment(s.edge);
                sum = sum + (seg.b - seg.a).scale(s.sign);
            }
            if sum.norm() > 1e-12 {
                return Err(format!("cell {c}: signed edge cycle does not close"));
            }
        }
        Ok(())
    }
}

/// Assigns `Gamma2` to the boundary edges whose midpoint satisfies the
/// predicate and `Gamma1` to the remaining boundary edges.
pub fn tag_boundary(mesh: &PolyMesh, gamma2: impl Fn(Point2) -> bool) -> Result<PolyMesh, MeshError> {
    let mut out = mesh.clone();
    let mut any_gamma1 = false;
    for e in 0..out.edges.len() {
        if !out.edges[e].tag.is_boundary() {
            continue;
        }
        let mid = out.segment(e).midpoint();
        let tag = if gamma2(mid) { EdgeTag::Gamma2 } else { EdgeTag::Gamma1 };
        any_gamma1 |= tag == EdgeTag::Gamma1;
        out.edges[e].tag = tag;
    }
    if !any_gamma1 {
        return Err(MeshError::EmptyDataBoundary);
    }
    Ok(out)
}

/// Default split of the unit square: the left side `x = 0` carries no data.
pub fn left_side(p: Point2) -> bool {
    p.x < 1e-12
}

/// Mesh families used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Each macro square split by its diagonal into two triangles.
    TriUniform,
    /// Polyline pattern plus the anti-diagonal: two triangles and two
    /// quadrilaterals per macro square.
    TriFigure,
    /// Polyline pattern only: two non-convex pentagons per macro square.
    Pentagon,
}

impl MeshKind {
    pub fn generate(self, n: usize) -> PolyMesh {
        match self {
            MeshKind::TriUniform => generate_uniform_triangular(n),
            MeshKind::TriFigure | MeshKind::Pentagon => generate_figure_pattern(n, self),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshKind::TriUniform => "tri_uniform",
            MeshKind::TriFigure => "tri_figure",
            MeshKind::Pentagon => "pentagon",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vertex pool on the lattice of spacing `1 / (4 n)`; keys are exact.
struct Lattice {
    n: usize,
    ids: HashMap<(usize, usize), usize>,
    vertices: Vec<Point2>,
}

impl Lattice {
    fn new(n: usize) -> Self {
        Self { n, ids: HashMap::new(), vertices: Vec::new() }
    }

    /// Vertex at macro square `(i, j)` plus `(qx, qy)` quarters.
    fn vertex(&mut self, i: usize, j: usize, qx: usize, qy: usize) -> usize {
        let key = (4 * i + qx, 4 * j + qy);
        let scale = 4.0 * self.n as f64;
        let next = self.vertices.len();
        *self.ids.entry(key).or_insert_with(|| {
            self.vertices.push(Point2::new(key.0 as f64 / scale, key.1 as f64 / scale));
            next
        })
    }
}

fn build_from_pattern(n: usize, pattern: &[&[(usize, usize)]]) -> PolyMesh {
    assert!(n >= 1, "mesh resolution must be positive");
    let mut lat = Lattice::new(n);
    let mut cells = Vec::with_capacity(n * n * pattern.len());
    for j in 0..n {
        for i in 0..n {
            for shape in pattern {
                cells.push(shape.iter().map(|&(qx, qy)| lat.vertex(i, j, qx, qy)).collect());
            }
        }
    }
    PolyMesh::from_cells(lat.vertices, cells).expect("generated mesh is valid")
}

/// `n x n` squares, each split by the diagonal `(0,0)-(1,1)`.
pub fn generate_uniform_triangular(n: usize) -> PolyMesh {
    build_from_pattern(n, &[&[(0, 0), (4, 0), (4, 4)], &[(0, 0), (4, 4), (0, 4)]])
}

/// Macro squares cut by the polyline `(0,0)-(1/4,3/4)-(3/4,1/4)-(1,1)`,
/// optionally also by the anti-diagonal.
pub fn generate_figure_pattern(n: usize, kind: MeshKind) -> PolyMesh {
    match kind {
        MeshKind::Pentagon => build_from_pattern(
            n,
            &[&[(0, 0), (4, 0), (4, 4), (3, 1), (1, 3)], &[(0, 0), (1, 3), (3, 1), (4, 4), (0, 4)]],
        ),
        MeshKind::TriFigure => build_from_pattern(
            n,
            &[
                &[(0, 0), (1, 3), (0, 4)],
                &[(0, 0), (4, 0), (3, 1), (1, 3)],
                &[(4, 0), (4, 4), (3, 1)],
                &[(1, 3), (3, 1), (4, 4), (0, 4)],
            ],
        ),
        MeshKind::TriUniform => generate_uniform_triangular(n),
    }
}

/// Serializes a tagged mesh in the line-oriented text format.
pub fn write_mesh(mesh: &PolyMesh) -> Result<String, MeshError> {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.vertices.len(), mesh.cells.len(), mesh.edges.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {}", v.x, v.y);
    }
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.vertex_ids.len());
        for i in &c.vertex_ids {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        let code = edge.tag.file_code().ok_or(MeshError::UntaggedBoundary(e))?;
        let _ = writeln!(s, "{} {} {}", edge.v0, edge.v1, code);
    }
    Ok(s)
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

/// Parses the text format. Adjacency is recomputed from the cells; the edge
/// list supplies orientation and tags.
pub fn read_mesh(text: &str) -> Result<PolyMesh, MeshError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    fn numbers<T: std::str::FromStr>(line: usize, l: &str) -> Result<Vec<T>, MeshError> {
        l.split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| parse_err(line, format!("invalid number `{t}`"))))
            .collect()
    }
    let mut next =
        |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")));

    let (ln, header) = next("header")?;
    let counts: Vec<usize> = numbers(ln, header)?;
    if counts.len() != 3 {
        return Err(parse_err(ln, "header must be `NV NC NE`"));
    }
    let (nv, nc, ne) = (counts[0], counts[1], counts[2]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let xy: Vec<f64> = numbers(ln, l)?;
        if xy.len() != 2 || !xy.iter().all(|v| v.is_finite()) {
            return Err(parse_err(ln, "vertex line must hold two finite coordinates"));
        }
        vertices.push(Point2::new(xy[0], xy[1]));
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = next("cell")?;
        let ids: Vec<usize> = numbers(ln, l)?;
        if ids.is_empty() || ids.len() != ids[0] + 1 {
            return Err(parse_err(ln, "cell line must be `k i1 ... ik`"));
        }
        cells.push(ids[1..].to_vec());
    }
    let mut file_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = next("edge")?;
        let t: Vec<usize> = numbers(ln, l)?;
        if t.len() != 3 {
            return Err(parse_err(ln, "edge line must be `v0 v1 tag`"));
        }
        let tag = match t[2] {
            0 => EdgeTag::Interior,
            1 => EdgeTag::Gamma1,
            2 => EdgeTag::Gamma2,
            other => return Err(parse_err(ln, format!("unknown edge tag {other}"))),
        };
        file_edges.push((ln, t[0], t[1], tag));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after edge list"));
    }

    let mut mesh = PolyMesh::from_cells(vertices, cells)?;
    if file_edges.len() != mesh.edges.len() {
        return Err(MeshError::EdgeMismatch(format!(
            "file lists {} edges, cells define {}",
            file_edges.len(),
            mesh.edges.len()
        )));
    }
    let lookup: HashMap<(usize, usize), usize> =
        mesh.edges.iter().enumerate().map(|(e, ed)| ((ed.v0.min(ed.v1), ed.v0.max(ed.v1)), e)).collect();
    let mut seen = vec![false; mesh.edges.len()];
    let mut order = Vec::with_capacity(file_edges.len());
    for &(ln, a, b, tag) in &file_edges {
        let e = *lookup
            .get(&(a.min(b), a.max(b)))
            .ok_or_else(|| parse_err(ln, format!("edge ({a}, {b}) is not a cell side")))?;
        if std::mem::replace(&mut seen[e], true) {
            return Err(parse_err(ln, format!("edge ({a}, {b}) listed twice")));
        }
        let interior = mesh.edges[e].right_cell.is_some();
        if interior != (tag == EdgeTag::Interior) {
            return Err(parse_err(ln, format!("edge ({a}, {b}) tag {tag:?} contradicts adjacency")));
        }
        if mesh.edges[e].v0 != a {
            mesh = mesh.flip_edge(e);
        }
        mesh.edges[e].tag = tag;
        order.push(e);
    }
    Ok(reorder_edges(mesh, &order))
}

/// Renumbers edges so that new edge `i` is old edge `order[i]`.
fn reorder_edges(mut mesh: PolyMesh, order: &[usize]) -> PolyMesh {
    let mut new_index = vec![0; order.len()];
    for (i, &old) in order.iter().enumerate() {
        new_index[old] = i;
    }
    let edges = order.iter().map(|&old| mesh.edges[old].clone()).collect();
    mesh.edges = edges;
    for sides in mesh.cell_to_edges.iter_mut() {
        for s in sides.iter_mut() {
            s.edge = new_index[s.edge];
        }
    }
    mesh
}
