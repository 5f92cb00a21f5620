//! Standard test graphs. Rotation systems are derived from planar coordinates
//! (counterclockwise by angle), so the embeddings are correct by
//! construction. The mixed-weight constructors cycle through a fixed palette
//! of rationals so that no accidental symmetry hides a sign error.

use crate::error::Result;
use crate::graph::{Color, Edge, PlanarGraph};
use crate::rational::{rat, Rat};

/// Weight palette used by the `_mixed` constructors.
pub fn palette(i: usize) -> Rat {
    const P: [(i64, i64); 12] = [
        (1, 2),
        (1, 3),
        (2, 5),
        (3, 7),
        (2, 3),
        (1, 5),
        (5, 8),
        (3, 10),
        (4, 9),
        (1, 4),
        (5, 11),
        (7, 12),
    ];
    let (p, q) = P[i % P.len()];
    rat(p, q)
}

/// Builds a graph from planar coordinates: rotations are the incident edges
/// sorted counterclockwise by angle. All boundary vertices are colored white;
/// recolor with [`PlanarGraph::with_coloring`].
pub fn from_coords(
    coords: &[(f64, f64)],
    edge_pairs: &[(usize, usize)],
    weights: &[Rat],
    boundary: &[usize],
) -> Result<PlanarGraph> {
    assert_eq!(edge_pairs.len(), weights.len());
    let edges: Vec<Edge> = edge_pairs
        .iter()
        .zip(weights)
        .map(|(&(u, v), x)| Edge { u, v, x: x.clone() })
        .collect::<Vec<_>>();
    let mut rotations: Vec<Vec<usize>> = vec![Vec::new(); coords.len()];
    for (e, &(u, v)) in edge_pairs.iter().enumerate() {
        rotations[u].push(e);
        rotations[v].push(e);
    }
    for (v, rot) in rotations.iter_mut().enumerate() {
        let (vx, vy) = coords[v];
        rot.sort_by(|&a, &b| {
            let ang = |e: usize| {
                let w = if edge_pairs[e].0 == v {
                    edge_pairs[e].1
                } else {
                    edge_pairs[e].0
                };
                let (wx, wy) = coords[w];
                (wy - vy).atan2(wx - vx)
            };
            ang(a).partial_cmp(&ang(b)).unwrap()
        });
    }
    let boundary: Vec<(usize, Color)> = boundary.iter().map(|&v| (v, Color::White)).collect();
    PlanarGraph::new(coords.len(), edges, rotations, boundary)
}

fn mixed(n: usize) -> Vec<Rat> {
    (0..n).map(palette).collect()
}

fn uniform(n: usize, x: &Rat) -> Vec<Rat> {
    vec![x.clone(); n]
}

pub fn single_edge(x: &Rat) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (1.0, 0.0)],
        &[(0, 1)],
        &uniform(1, x),
        &[0, 1],
    )
    .unwrap()
}

pub fn single_edge_mixed() -> PlanarGraph {
    single_edge(&palette(0))
}

pub fn path3(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
        &[(0, 1), (1, 2)],
        weights,
        &[0, 1, 2],
    )
    .unwrap()
}

pub fn path3_mixed() -> PlanarGraph {
    path3(&mixed(2))
}

pub fn triangle(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)],
        &[(0, 1), (1, 2), (2, 0)],
        weights,
        &[0, 1, 2],
    )
    .unwrap()
}

pub fn triangle_mixed() -> PlanarGraph {
    triangle(&mixed(3))
}

pub fn triangle_uniform(x: &Rat) -> PlanarGraph {
    triangle(&uniform(3, x))
}

/// 4-cycle 0-1-2-3, counterclockwise.
pub fn cycle4(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        &[(0, 1), (1, 2), (2, 3), (3, 0)],
        weights,
        &[0, 1, 2, 3],
    )
    .unwrap()
}

pub fn cycle4_mixed() -> PlanarGraph {
    cycle4(&mixed(4))
}

pub fn cycle4_uniform(x: &Rat) -> PlanarGraph {
    cycle4(&uniform(4, x))
}

/// K4 embedded with vertex 3 inside triangle 0,1,2.
pub fn k4(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.5, 0.35)],
        &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)],
        weights,
        &[0, 1, 2],
    )
    .unwrap()
}

pub fn k4_mixed() -> PlanarGraph {
    k4(&mixed(6))
}

/// w x h grid; vertex (i, j) has id j*w + i. Boundary runs counterclockwise
/// from the bottom-left corner.
pub fn grid(w: usize, h: usize, weights: &[Rat]) -> PlanarGraph {
    assert!(w >= 2 && h >= 2);
    let id = |i: usize, j: usize| j * w + i;
    let mut coords = Vec::new();
    for j in 0..h {
        for i in 0..w {
            coords.push((i as f64, j as f64));
        }
    }
    let mut pairs = Vec::new();
    for j in 0..h {
        for i in 0..w {
            if i + 1 < w {
                pairs.push((id(i, j), id(i + 1, j)));
            }
            if j + 1 < h {
                pairs.push((id(i, j), id(i, j + 1)));
            }
        }
    }
    let mut boundary = Vec::new();
    for i in 0..w {
        boundary.push(id(i, 0));
    }
    for j in 1..h {
        boundary.push(id(w - 1, j));
    }
    for i in (0..w - 1).rev() {
        boundary.push(id(i, h - 1));
    }
    for j in (1..h - 1).rev() {
        boundary.push(id(0, j));
    }
    from_coords(&coords, &pairs, weights, &boundary).unwrap()
}

pub fn grid3_mixed() -> PlanarGraph {
    grid(3, 3, &mixed(12))
}

pub fn grid3_uniform(x: &Rat) -> PlanarGraph {
    grid(3, 3, &uniform(12, x))
}

/// Theta graph: two hubs joined by three internally disjoint length-2 paths.
/// The midpoint of the middle path is the only interior vertex.
pub fn theta(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 0.0), (2.0, 0.0), (1.0, 1.0), (1.0, 0.0), (1.0, -1.0)],
        &[(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)],
        weights,
        &[0, 4, 1, 2],
    )
    .unwrap()
}

pub fn theta_mixed() -> PlanarGraph {
    theta(&mixed(6))
}

/// Wheel with five rim vertices 0..4 (the boundary) and hub 5.
pub fn wheel5(weights: &[Rat]) -> PlanarGraph {
    let mut coords = Vec::new();
    for k in 0..5 {
        let a = (-90.0 + 72.0 * k as f64).to_radians();
        coords.push((a.cos(), a.sin()));
    }
    coords.push((0.0, 0.0));
    let pairs = [
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 0),
        (0, 5),
        (1, 5),
        (2, 5),
        (3, 5),
        (4, 5),
    ];
    from_coords(&coords, &pairs, weights, &[0, 1, 2, 3, 4]).unwrap()
}

pub fn wheel5_mixed() -> PlanarGraph {
    wheel5(&mixed(10))
}

/// Two triangles sharing the cut vertex 2: every path between the left pair
/// {0,1} and the right pair {3,4} passes through it.
pub fn bowtie(weights: &[Rat]) -> PlanarGraph {
    from_coords(
        &[(0.0, 1.0), (0.0, -1.0), (1.0, 0.0), (2.0, 1.0), (2.0, -1.0)],
        &[(0, 1), (1, 2), (2, 0), (2, 3), (2, 4), (3, 4)],
        weights,
        &[0, 1, 2, 4, 3],
    )
    .unwrap()
}

pub fn bowtie_mixed() -> PlanarGraph {
    bowtie(&mixed(6))
}

/// The eight-graph corpus used by the acceptance suites, with mixed weights.
pub fn acceptance_corpus() -> Vec<(&'static str, PlanarGraph)> {
    vec![
        ("single_edge", single_edge_mixed()),
        ("path3", path3_mixed()),
        ("triangle", triangle_mixed()),
        ("cycle4", cycle4_mixed()),
        ("k4", k4_mixed()),
        ("grid3", grid3_mixed()),
        ("theta", theta_mixed()),
        ("wheel5", wheel5_mixed()),
    ]
}

/// Two boundary colorings per graph: all white, and alternating.
pub fn test_colorings(g: &PlanarGraph) -> Vec<Vec<Color>> {
    let n = g.boundary().len();
    let all_white = vec![Color::White; n];
    let alternating: Vec<Color> = (0..n)
        .map(|i| {
            if i % 2 == 0 {
                Color::White
            } else {
                Color::Black
            }
        })
        .collect();
    vec![all_white, alternating]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_builds_and_validates() {
        for (name, g) in acceptance_corpus() {
            let rep = g.validate_embedding();
            assert_eq!(rep.euler, 2, "{name}");
        }
        bowtie_mixed();
    }

    #[test]
    fn grid_boundary_is_the_outer_ring() {
        let g = grid3_mixed();
        assert_eq!(g.boundary_vertices(), vec![0, 1, 2, 5, 8, 7, 6, 3]);
        assert!(!g.is_boundary(4));
    }

    #[test]
    fn theta_middle_vertex_is_interior() {
        let g = theta_mixed();
        assert!(!g.is_boundary(3));
        assert_eq!(g.boundary_vertices(), vec![0, 4, 1, 2]);
    }
}
