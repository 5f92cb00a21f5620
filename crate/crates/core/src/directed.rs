//! The directed modification of a planar graph: each edge becomes a bundle of
//! one middle edge and two opposing side edges, and every boundary vertex
//! gains a source and a sink stub in its outer-face corner. The relative
//! order of the stubs encodes the boundary coloring.

use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{Color, PlanarGraph};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Side1,
    Mid,
    Side2,
}

impl Role {
    /// Bit in the per-edge local state mask.
    pub fn bit(self) -> u8 {
        match self {
            Role::Mid => 1,
            Role::Side1 => 2,
            Role::Side2 => 4,
        }
    }
}

/// One dart in the rotation of an original vertex of the modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModDart {
    Bundle {
        edge: usize,
        role: Role,
    },
    /// Edge from w+ into w; present exactly when w is a used source.
    SourceStub,
    /// Edge from w out to w-; present exactly when w is a used sink.
    SinkStub,
}

/// Which outer-face corner of a boundary vertex receives its stubs. The two
/// choices differ only at cut vertices that the outer walk visits more than
/// once; partition functions are invariant under the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StubCorner {
    #[default]
    FirstVisit,
    LastVisit,
}

#[derive(Debug, Clone)]
pub struct DirectedModification<'g> {
    graph: &'g PlanarGraph,
    /// Per edge: is the middle edge oriented from endpoint `u` to `v`?
    middle_from_u: Vec<bool>,
    /// Rotation of each original vertex, stubs included.
    darts: Vec<Vec<ModDart>>,
}

impl<'g> DirectedModification<'g> {
    pub fn new(graph: &'g PlanarGraph) -> DirectedModification<'g> {
        Self::with_options(graph, None, StubCorner::FirstVisit)
    }

    /// `middle_orientations[e]` = middle edge of `e` runs u -> v. When
    /// omitted, middles run from the lower to the higher endpoint id.
    pub fn with_options(
        graph: &'g PlanarGraph,
        middle_orientations: Option<&[bool]>,
        corner: StubCorner,
    ) -> DirectedModification<'g> {
        let middle_from_u: Vec<bool> = match middle_orientations {
            Some(bits) => {
                assert_eq!(bits.len(), graph.edge_count());
                bits.to_vec()
            }
            None => graph.edges().iter().map(|e| e.u < e.v).collect(),
        };
        let mut darts = Vec::with_capacity(graph.vertex_count());
        for v in 0..graph.vertex_count() {
            let stub_after = graph.boundary_pos(v).map(|_| {
                let corners = graph.outer_corners(v);
                match corner {
                    StubCorner::FirstVisit => corners[0],
                    StubCorner::LastVisit => *corners.last().unwrap(),
                }
            });
            let mut rot = Vec::with_capacity(3 * graph.rotation(v).len() + 2);
            for &e in graph.rotation(v) {
                let edge = graph.edge(e);
                let tail = if middle_from_u[e] { edge.u } else { edge.v };
                // Side edges sit on opposite sides of the middle edge; the
                // counterclockwise bundle order is (s2, m, s1) at the tail of
                // the middle edge and (s1, m, s2) at its head.
                if v == tail {
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Side2,
                    });
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Mid,
                    });
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Side1,
                    });
                } else {
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Side1,
                    });
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Mid,
                    });
                    rot.push(ModDart::Bundle {
                        edge: e,
                        role: Role::Side2,
                    });
                }
                if stub_after == Some(e) {
                    match graph.color(v).expect("boundary vertex") {
                        // Counterclockwise around the outer face the sink
                        // comes immediately before the source for white
                        // vertices, immediately after for black ones.
                        Color::White => {
                            rot.push(ModDart::SinkStub);
                            rot.push(ModDart::SourceStub);
                        }
                        Color::Black => {
                            rot.push(ModDart::SourceStub);
                            rot.push(ModDart::SinkStub);
                        }
                    }
                }
            }
            darts.push(rot);
        }
        DirectedModification {
            graph,
            middle_from_u,
            darts,
        }
    }

    pub fn graph(&self) -> &'g PlanarGraph {
        self.graph
    }

    pub fn middle_from_u(&self, e: usize) -> bool {
        self.middle_from_u[e]
    }

    /// Tail vertex of the middle edge of `e`.
    pub fn middle_tail(&self, e: usize) -> usize {
        let edge = self.graph.edge(e);
        if self.middle_from_u[e] {
            edge.u
        } else {
            edge.v
        }
    }

    pub fn middle_head(&self, e: usize) -> usize {
        let edge = self.graph.edge(e);
        if self.middle_from_u[e] {
            edge.v
        } else {
            edge.u
        }
    }

    /// Rotation at an original vertex, stub darts included.
    pub fn rotation(&self, v: usize) -> &[ModDart] {
        &self.darts[v]
    }

    /// Is the given dart oriented into `v`?
    pub fn incoming_at(&self, v: usize, dart: ModDart) -> bool {
        match dart {
            ModDart::SourceStub => true,
            ModDart::SinkStub => false,
            ModDart::Bundle { edge, role } => match role {
                Role::Mid => v == self.middle_head(edge),
                // Side edges oppose the middle edge.
                Role::Side1 | Role::Side2 => v == self.middle_tail(edge),
            },
        }
    }

    /// Weight of one directed edge of the bundle of `e`.
    pub fn bundle_weight(&self, e: usize, role: Role) -> Rat {
        let x = self.graph.x(e);
        match role {
            Role::Mid => x / (Rat::one() - x * x),
            Role::Side1 | Role::Side2 => x / crate::rational::int(2),
        }
    }

    /// Checks that every vertex in A (and B) is a boundary vertex.
    pub fn check_terminals(&self, a: &[usize], b: &[usize]) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::OrderingViolation(format!(
                "|A| = {} must equal |B| = {}",
                a.len(),
                b.len()
            )));
        }
        for &v in a.iter().chain(b) {
            if self.graph.boundary_pos(v).is_none() {
                return Err(Error::NotBoundary(v));
            }
        }
        for set in [a, b] {
            let mut s = set.to_vec();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() {
                return Err(Error::OrderingViolation(
                    "terminal set repeats a vertex".into(),
                ));
            }
        }
        Ok(())
    }
}
