//! Planar graphs with a combinatorial embedding (counterclockwise rotation
//! system), an ordered outer boundary, and a two-coloring of the boundary
//! vertices. The embedding is part of the input; faces are recovered by
//! tracing dart orbits of the rotation system.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rat, parse_rat, Rat};

use num_traits::{One, Zero};

/// Boundary coloring. The color of a boundary vertex decides on which side of
/// its source stub the sink stub of the directed modification is inserted,
/// and the sign conventions of the signed correlation matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    /// "o" in graph files.
    White,
    /// "b" in graph files.
    Black,
}

impl Color {
    pub fn from_code(s: &str) -> Result<Color> {
        match s {
            "o" => Ok(Color::White),
            "b" => Ok(Color::Black),
            _ => Err(Error::Parse(format!(
                "bad color '{s}', expected \"o\" or \"b\""
            ))),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Color::White => "o",
            Color::Black => "b",
        }
    }
}

/// Set of edge ids as a bitmask. Graphs are capped at 64 edges, far above
/// every enumeration capacity in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub fn singleton(e: usize) -> EdgeSet {
        EdgeSet(1 << e)
    }

    pub fn full(m: usize) -> EdgeSet {
        if m == 64 {
            EdgeSet(!0)
        } else {
            EdgeSet((1u64 << m) - 1)
        }
    }

    pub fn contains(self, e: usize) -> bool {
        self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) {
        self.0 |= 1 << e;
    }

    pub fn remove(&mut self, e: usize) {
        self.0 &= !(1 << e);
    }

    pub fn toggle(&mut self, e: usize) {
        self.0 ^= 1 << e;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | other.0)
    }

    pub fn intersect(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & other.0)
    }

    pub fn minus(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !other.0)
    }

    pub fn sym_diff(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 ^ other.0)
    }

    pub fn is_subset_of(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }
}

impl FromIterator<usize> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = EdgeSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", ids.join("+"))
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub x: Rat,
}

impl Edge {
    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn has_end(&self, w: usize) -> bool {
        self.u == w || self.v == w
    }
}

/// A dart is a directed use of an edge: `2*edge` runs u -> v, `2*edge + 1`
/// runs v -> u.
pub type Dart = usize;

pub fn dart(edge: usize, from_v: bool) -> Dart {
    2 * edge + from_v as usize
}

pub fn dart_edge(d: Dart) -> usize {
    d / 2
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub face_count: usize,
    pub euler: i64,
    /// Index into the face list of the face matching the declared boundary.
    pub outer_face: usize,
}

#[derive(Debug, Clone)]
pub struct PlanarGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    rotations: Vec<Vec<usize>>,
    boundary: Vec<(usize, Color)>,
    // Derived at construction.
    boundary_pos: Vec<Option<usize>>,
    /// Outer-face dart walk, rotated to start at the first boundary vertex.
    outer_walk: Vec<Dart>,
    face_count: usize,
}

impl PlanarGraph {
    /// Builds and fully validates a graph. Rejects loops, parallel edges,
    /// weights outside (0,1), inconsistent rotations, disconnected graphs,
    /// non-planar rotation data and boundary lists that do not match the
    /// outer-face walk of the embedding.
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        rotations: Vec<Vec<usize>>,
        boundary: Vec<(usize, Color)>,
    ) -> Result<PlanarGraph> {
        if vertex_count < 2 || edges.is_empty() {
            return Err(Error::InvalidGraph(
                "need at least 2 vertices and 1 edge".into(),
            ));
        }
        if edges.len() > 64 {
            return Err(Error::capacity("edge count for bitmask representation", 64));
        }
        let mut seen_pairs = BTreeMap::new();
        for (e, edge) in edges.iter().enumerate() {
            if edge.u >= vertex_count || edge.v >= vertex_count {
                return Err(Error::IndexOutOfRange(format!("edge {e} endpoint")));
            }
            if edge.u == edge.v {
                return Err(Error::InvalidGraph(format!("edge {e} is a loop")));
            }
            let key = (edge.u.min(edge.v), edge.u.max(edge.v));
            if let Some(prev) = seen_pairs.insert(key, e) {
                return Err(Error::InvalidGraph(format!(
                    "edges {prev} and {e} are parallel between {} and {}",
                    key.0, key.1
                )));
            }
            if edge.x <= Rat::zero() || edge.x >= Rat::one() {
                return Err(Error::WeightOutOfRange {
                    edge: e,
                    weight: format_rat(&edge.x),
                });
            }
        }
        if rotations.len() != vertex_count {
            return Err(Error::RotationInconsistent(format!(
                "expected {vertex_count} rotation lists, found {}",
                rotations.len()
            )));
        }
        // Every edge appears exactly once in the rotation of each endpoint.
        let mut uses = vec![0usize; edges.len()];
        for (v, rot) in rotations.iter().enumerate() {
            for &e in rot {
                let edge = edges.get(e).ok_or_else(|| {
                    Error::RotationInconsistent(format!("vertex {v} lists unknown edge {e}"))
                })?;
                if !edge.has_end(v) {
                    return Err(Error::RotationInconsistent(format!(
                        "vertex {v} lists edge {e} which is not incident to it"
                    )));
                }
                uses[e] += 1;
            }
        }
        for (e, &n) in uses.iter().enumerate() {
            if n != 2 {
                return Err(Error::RotationInconsistent(format!(
                    "edge {e} appears {n} times across rotations, expected 2"
                )));
            }
        }
        for (v, rot) in rotations.iter().enumerate() {
            let mut sorted: Vec<usize> = rot.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != rot.len() {
                return Err(Error::RotationInconsistent(format!(
                    "vertex {v} repeats an edge"
                )));
            }
        }
        // Connectivity.
        let mut seen = vec![false; vertex_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &rotations[v] {
                let w = edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Disconnected(v));
        }

        if boundary.is_empty() {
            return Err(Error::BoundaryMismatch("boundary list is empty".into()));
        }
        let mut boundary_pos = vec![None; vertex_count];
        for (i, &(v, _)) in boundary.iter().enumerate() {
            if v >= vertex_count {
                return Err(Error::IndexOutOfRange(format!("boundary vertex {v}")));
            }
            if boundary_pos[v].is_some() {
                return Err(Error::BoundaryMismatch(format!("vertex {v} listed twice")));
            }
            boundary_pos[v] = Some(i);
        }

        let faces = trace_faces(&edges, &rotations);
        let euler = vertex_count as i64 - edges.len() as i64 + faces.len() as i64;
        if euler != 2 {
            return Err(Error::EulerViolation(euler));
        }
        let outer_walk = find_outer_walk(&edges, &faces, &boundary, &boundary_pos)?;
        let face_count = faces.len();

        Ok(PlanarGraph {
            vertex_count,
            edges,
            rotations,
            boundary,
            boundary_pos,
            outer_walk,
            face_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn x(&self, e: usize) -> &Rat {
        &self.edges[e].x
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotations[v]
    }

    pub fn boundary(&self) -> &[(usize, Color)] {
        &self.boundary
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary.iter().map(|&(v, _)| v).collect()
    }

    /// Position of `v` in the counterclockwise boundary list.
    pub fn boundary_pos(&self, v: usize) -> Option<usize> {
        self.boundary_pos.get(v).copied().flatten()
    }

    pub fn color(&self, v: usize) -> Option<Color> {
        self.boundary_pos(v).map(|i| self.boundary[i].1)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_pos(v).is_some()
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edges.len())
    }

    /// Edge between two vertices, if present.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.rotations[u]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(u) == v)
    }

    /// Same graph with a different boundary coloring, given per boundary
    /// position.
    pub fn with_coloring(&self, colors: &[Color]) -> Result<PlanarGraph> {
        if colors.len() != self.boundary.len() {
            return Err(Error::Parse(format!(
                "coloring has {} entries, boundary has {}",
                colors.len(),
                self.boundary.len()
            )));
        }
        let mut g = self.clone();
        for (slot, &c) in g.boundary.iter_mut().zip(colors) {
            slot.1 = c;
        }
        Ok(g)
    }

    /// Outer-face dart walk (counterclockwise), starting at the first
    /// declared boundary vertex.
    pub fn outer_walk(&self) -> &[Dart] {
        &self.outer_walk
    }

    /// Number of faces of the embedding.
    pub fn face_count(&self) -> usize {
        self.face_count
    }

    /// Outer-face corners of a boundary vertex, in walk order. Each corner is
    /// the arrival edge of a visit; the stubs of the directed modification
    /// are inserted immediately after it in the rotation.
    pub fn outer_corners(&self, v: usize) -> Vec<usize> {
        let walk = &self.outer_walk;
        let mut corners = Vec::new();
        for (i, &d) in walk.iter().enumerate() {
            if self.dart_tail(d) == v {
                let prev = walk[(i + walk.len() - 1) % walk.len()];
                corners.push(dart_edge(prev));
            }
        }
        corners
    }

    pub fn dart_tail(&self, d: Dart) -> usize {
        let e = &self.edges[dart_edge(d)];
        if d % 2 == 0 {
            e.u
        } else {
            e.v
        }
    }

    pub fn dart_head(&self, d: Dart) -> usize {
        let e = &self.edges[dart_edge(d)];
        if d % 2 == 0 {
            e.v
        } else {
            e.u
        }
    }

    /// Euler / boundary diagnostics for an already constructed graph.
    pub fn validate_embedding(&self) -> EmbeddingReport {
        let faces = trace_faces(&self.edges, &self.rotations);
        let euler = self.vertex_count as i64 - self.edges.len() as i64 + faces.len() as i64;
        let outer = find_outer_walk(&self.edges, &faces, &self.boundary, &self.boundary_pos)
            .map(|_| 0)
            .unwrap_or(usize::MAX);
        EmbeddingReport {
            face_count: faces.len(),
            euler,
            outer_face: outer,
        }
    }

    pub fn parse(text: &str) -> Result<PlanarGraph> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph file: {e}")))?;
        doc.into_graph()
    }

    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc::from_graph(self);
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }
}

/// Traces all faces of the rotation system. The next dart after arriving at
/// `h` via edge `e` leaves along the counterclockwise successor of `e` at
/// `h`; under this rule the orbit of the outer face visits the boundary in
/// counterclockwise order.
fn trace_faces(edges: &[Edge], rotations: &[Vec<usize>]) -> Vec<Vec<Dart>> {
    let m = edges.len();
    let mut visited = vec![false; 2 * m];
    let mut faces = Vec::new();
    for start in 0..2 * m {
        if visited[start] {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = start;
        loop {
            visited[d] = true;
            walk.push(d);
            let e = dart_edge(d);
            let h = if d % 2 == 0 { edges[e].v } else { edges[e].u };
            let rot = &rotations[h];
            let idx = rot
                .iter()
                .position(|&f| f == e)
                .expect("validated rotation");
            let e_next = rot[(idx + 1) % rot.len()];
            d = dart(e_next, edges[e_next].v == h);
            if d == start {
                break;
            }
        }
        faces.push(walk);
    }
    faces
}

/// Finds the face whose walk visits the declared boundary vertices in the
/// declared cyclic order (first occurrences; repeated visits of cut vertices
/// are allowed) and returns it rotated to start at the first declared vertex.
fn find_outer_walk(
    edges: &[Edge],
    faces: &[Vec<Dart>],
    boundary: &[(usize, Color)],
    boundary_pos: &[Option<usize>],
) -> Result<Vec<Dart>> {
    let declared: Vec<usize> = boundary.iter().map(|&(v, _)| v).collect();
    for face in faces {
        let tails: Vec<usize> = face
            .iter()
            .map(|&d| {
                let e = dart_edge(d);
                if d % 2 == 0 {
                    edges[e].u
                } else {
                    edges[e].v
                }
            })
            .collect();
        if tails.iter().any(|&v| boundary_pos[v].is_none()) {
            continue;
        }
        let mut in_face = vec![false; boundary_pos.len()];
        for &v in &tails {
            in_face[v] = true;
        }
        if declared.iter().any(|&v| !in_face[v]) {
            continue;
        }
        for (start, &v0) in tails.iter().enumerate() {
            if v0 != declared[0] {
                continue;
            }
            let mut order = Vec::new();
            let mut seen = vec![false; boundary_pos.len()];
            for i in 0..tails.len() {
                let v = tails[(start + i) % tails.len()];
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
            if order == declared {
                let rotated: Vec<Dart> = (0..face.len())
                    .map(|i| face[(start + i) % face.len()])
                    .collect();
                return Ok(rotated);
            }
        }
    }
    Err(Error::BoundaryMismatch(
        "no face of the rotation system traverses the declared boundary in the declared counterclockwise order".into(),
    ))
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: usize,
    u: usize,
    v: usize,
    x: String,
}

#[derive(Serialize, Deserialize)]
struct BoundaryDoc {
    v: usize,
    color: String,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: usize,
    edges: Vec<EdgeDoc>,
    rotations: BTreeMap<String, Vec<usize>>,
    boundary: Vec<BoundaryDoc>,
}

impl GraphDoc {
    fn into_graph(self) -> Result<PlanarGraph> {
        let m = self.edges.len();
        let mut slots: Vec<Option<Edge>> = vec![None; m];
        for e in &self.edges {
            if e.id >= m {
                return Err(Error::Parse(format!(
                    "edge id {} out of range, ids must be 0..{}",
                    e.id, m
                )));
            }
            if slots[e.id].is_some() {
                return Err(Error::Parse(format!("duplicate edge id {}", e.id)));
            }
            slots[e.id] = Some(Edge {
                u: e.u,
                v: e.v,
                x: parse_rat(&e.x)?,
            });
        }
        let edges: Vec<Edge> = slots.into_iter().map(|s| s.expect("dense ids")).collect();
        let mut rotations = vec![Vec::new(); self.vertices];
        for (key, rot) in &self.rotations {
            let v: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("rotation key '{key}' is not a vertex id")))?;
            if v >= self.vertices {
                return Err(Error::Parse(format!("rotation key {v} out of range")));
            }
            rotations[v] = rot.clone();
        }
        let mut boundary = Vec::new();
        for b in &self.boundary {
            boundary.push((b.v, Color::from_code(&b.color)?));
        }
        PlanarGraph::new(self.vertices, edges, rotations, boundary)
    }

    fn from_graph(g: &PlanarGraph) -> GraphDoc {
        GraphDoc {
            vertices: g.vertex_count,
            edges: g
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeDoc {
                    id,
                    u: e.u,
                    v: e.v,
                    x: format_rat(&e.x),
                })
                .collect(),
            rotations: g
                .rotations
                .iter()
                .enumerate()
                .map(|(v, rot)| (v.to_string(), rot.clone()))
                .collect(),
            boundary: g
                .boundary
                .iter()
                .map(|&(v, c)| BoundaryDoc {
                    v,
                    color: c.code().to_string(),
                })
                .collect(),
        }
    }
}
