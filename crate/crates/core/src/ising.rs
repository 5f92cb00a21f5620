//! Even-subgraph (high-temperature) expansion: the polynomials
//! `S_A = sum over edge sets with odd-degree set A of prod x_e`
//! and the boundary two-point correlation `S_{a,b} / S_0`. Enumeration runs
//! over the coset of the cycle space shifted by one fixed representative, so
//! the work is `2^(|E|-|V|+1)` instead of `2^|E|`.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, PlanarGraph};
use crate::rational::Rat;

/// Cyclomatic-number cap for exact enumeration.
pub const CYCLE_SPACE_CAP: usize = 28;

/// Spanning tree data: BFS parents and fundamental cycles.
pub struct CycleBasis {
    /// Parent edge of each vertex in the BFS tree (root has none).
    pub parent_edge: Vec<Option<usize>>,
    pub parent_vertex: Vec<Option<usize>>,
    /// Non-tree edges, ascending.
    pub chords: Vec<usize>,
    /// Fundamental cycle of each chord.
    pub cycles: Vec<EdgeSet>,
}

impl CycleBasis {
    pub fn new(g: &PlanarGraph) -> CycleBasis {
        let n = g.vertex_count();
        let mut parent_edge = vec![None; n];
        let mut parent_vertex = vec![None; n];
        let mut seen = vec![false; n];
        let mut tree = EdgeSet::EMPTY;
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in g.rotation(v) {
                let w = g.edge(e).other(v);
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = Some(e);
                    parent_vertex[w] = Some(v);
                    tree.insert(e);
                    queue.push_back(w);
                }
            }
        }
        let chords: Vec<usize> = (0..g.edge_count()).filter(|&e| !tree.contains(e)).collect();
        let path_to_root = |mut v: usize| -> EdgeSet {
            let mut p = EdgeSet::EMPTY;
            while let Some(e) = parent_edge[v] {
                p.insert(e);
                v = parent_vertex[v].unwrap();
            }
            p
        };
        let cycles = chords
            .iter()
            .map(|&e| {
                let edge = g.edge(e);
                let mut c = path_to_root(edge.u).sym_diff(path_to_root(edge.v));
                c.insert(e);
                c
            })
            .collect();
        CycleBasis {
            parent_edge,
            parent_vertex,
            chords,
            cycles,
        }
    }

    /// Edge set of the tree path from `v` to the root.
    pub fn tree_path_to_root(&self, mut v: usize) -> EdgeSet {
        let mut p = EdgeSet::EMPTY;
        while let Some(e) = self.parent_edge[v] {
            p.insert(e);
            v = self.parent_vertex[v].unwrap();
        }
        p
    }
}

/// One member of `E_A`, or None when A is infeasible (odd cardinality here,
/// since graphs are connected).
fn base_member(g: &PlanarGraph, basis: &CycleBasis, sources: &[usize]) -> Result<Option<EdgeSet>> {
    for &v in sources {
        if v >= g.vertex_count() {
            return Err(Error::IndexOutOfRange(format!("source vertex {v}")));
        }
    }
    if sources.len() % 2 == 1 {
        return Ok(None);
    }
    let mut omega = EdgeSet::EMPTY;
    for &v in sources {
        omega = omega.sym_diff(basis.tree_path_to_root(v));
    }
    Ok(Some(omega))
}

/// Lazily yields every member of `E_A`: edge sets whose odd-degree vertex set
/// is exactly `A`. Deterministic Gray-code order.
pub fn enumerate_even_subgraphs(
    g: &PlanarGraph,
    sources: &[usize],
) -> Result<impl Iterator<Item = EdgeSet>> {
    let basis = CycleBasis::new(g);
    if basis.chords.len() > CYCLE_SPACE_CAP {
        return Err(Error::capacity("cycle space enumeration", CYCLE_SPACE_CAP));
    }
    let base = base_member(g, &basis, sources)?;
    let cycles = basis.cycles;
    let total: u64 = match base {
        Some(_) => 1u64 << cycles.len(),
        None => 0,
    };
    let mut current = base.unwrap_or(EdgeSet::EMPTY);
    let mut index = 0u64;
    Ok(std::iter::from_fn(move || {
        if index >= total {
            return None;
        }
        if index > 0 {
            let bit = index.trailing_zeros() as usize;
            current = current.sym_diff(cycles[bit]);
        }
        index += 1;
        Some(current)
    }))
}

/// `S_A`: sum over `E_A` of the product of edge weights. Exact; returns 0 for
/// infeasible source sets.
pub fn even_polynomial(g: &PlanarGraph, sources: &[usize]) -> Result<Rat> {
    let mut sum = Rat::zero();
    for omega in enumerate_even_subgraphs(g, sources)? {
        let mut term = Rat::one();
        for e in omega.iter() {
            term *= g.x(e);
        }
        sum += term;
    }
    Ok(sum)
}

/// Boundary-free two-point function `<sigma_a sigma_b> = S_{a,b} / S_0`,
/// with the convention that it equals 1 for `a == b`.
pub fn correlation(g: &PlanarGraph, a: usize, b: usize) -> Result<Rat> {
    if a >= g.vertex_count() || b >= g.vertex_count() {
        return Err(Error::IndexOutOfRange(format!("vertex pair ({a},{b})")));
    }
    if a == b {
        return Ok(Rat::one());
    }
    let s_ab = even_polynomial(g, &[a, b])?;
    let s_0 = even_polynomial(g, &[])?;
    Ok(s_ab / s_0)
}

/// Memoized two-point functions over a fixed graph. `S_0` is computed once;
/// pair polynomials are filled on demand.
pub struct CorrelationTable<'g> {
    g: &'g PlanarGraph,
    s_empty: Rat,
    pairs: RefCell<BTreeMap<(usize, usize), Rat>>,
}

impl<'g> CorrelationTable<'g> {
    pub fn new(g: &'g PlanarGraph) -> Result<CorrelationTable<'g>> {
        Ok(CorrelationTable {
            g,
            s_empty: even_polynomial(g, &[])?,
            pairs: RefCell::default(),
        })
    }

    pub fn graph(&self) -> &'g PlanarGraph {
        self.g
    }

    pub fn s_empty(&self) -> &Rat {
        &self.s_empty
    }

    pub fn corr(&self, a: usize, b: usize) -> Rat {
        if a == b {
            return Rat::one();
        }
        let key = (a.min(b), a.max(b));
        if let Some(v) = self.pairs.borrow().get(&key) {
            return v.clone();
        }
        let s = even_polynomial(self.g, &[key.0, key.1]).expect("within capacity");
        let c = s / &self.s_empty;
        self.pairs.borrow_mut().insert(key, c.clone());
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::rational::{int, rat, to_f64};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    #[test]
    fn triangle_even_subgraphs_no_sources() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        let all: Vec<EdgeSet> = enumerate_even_subgraphs(&g, &[]).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert!(all.contains(&EdgeSet::EMPTY));
        assert!(all.contains(&EdgeSet::full(3)));
    }

    #[test]
    fn triangle_even_subgraphs_two_sources() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        let ab = g.edge_between(0, 1).unwrap();
        let ac = g.edge_between(0, 2).unwrap();
        let cb = g.edge_between(2, 1).unwrap();
        let all: Vec<EdgeSet> = enumerate_even_subgraphs(&g, &[0, 1]).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert!(all.contains(&EdgeSet::singleton(ab)));
        assert!(all.contains(&EdgeSet::from_iter([ac, cb])));
    }

    #[test]
    fn odd_source_set_is_empty() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        assert_eq!(enumerate_even_subgraphs(&g, &[0]).unwrap().count(), 0);
        assert_eq!(even_polynomial(&g, &[0]).unwrap(), int(0));
    }

    #[test]
    fn triangle_polynomials_at_one_half() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        assert_eq!(even_polynomial(&g, &[]).unwrap(), rat(9, 8));
        assert_eq!(even_polynomial(&g, &[0, 1]).unwrap(), rat(3, 4));
        assert_eq!(correlation(&g, 0, 1).unwrap(), rat(2, 3));
    }

    #[test]
    fn single_edge_polynomials() {
        let g = corpus::single_edge(&rat(1, 2));
        assert_eq!(even_polynomial(&g, &[0, 1]).unwrap(), rat(1, 2));
        assert_eq!(correlation(&g, 0, 1).unwrap(), rat(1, 2));
        assert_eq!(correlation(&g, 1, 1).unwrap(), int(1));
    }

    /// Spin-sum oracle: brute force over all 2^|V| spin configurations with
    /// couplings J = atanh(x), in floating point.
    fn spin_sum_correlation(g: &PlanarGraph, a: usize, b: usize) -> f64 {
        let n = g.vertex_count();
        assert!(n <= 12);
        let j: Vec<f64> = g.edges().iter().map(|e| to_f64(&e.x).atanh()).collect();
        let mut z = 0.0;
        let mut num = 0.0;
        for cfg in 0u32..1 << n {
            let spin = |v: usize| if cfg >> v & 1 == 1 { -1.0 } else { 1.0 };
            let mut w = 0.0;
            for (e, edge) in g.edges().iter().enumerate() {
                w += j[e] * spin(edge.u) * spin(edge.v);
            }
            let w = w.exp();
            z += w;
            num += w * spin(a) * spin(b);
        }
        num / z
    }

    #[test]
    fn matches_spin_sum_oracle() {
        for (name, g) in corpus::acceptance_corpus() {
            if g.vertex_count() > 12 {
                continue;
            }
            let bnd = g.boundary_vertices();
            for i in 0..bnd.len() {
                for k in i + 1..bnd.len() {
                    let exact = to_f64(&correlation(&g, bnd[i], bnd[k]).unwrap());
                    let oracle = spin_sum_correlation(&g, bnd[i], bnd[k]);
                    assert!(
                        (exact - oracle).abs() <= 1e-9 * oracle.abs(),
                        "{name}: <{},{}> exact {exact} vs oracle {oracle}",
                        bnd[i],
                        bnd[k]
                    );
                }
            }
        }
    }

    #[test]
    fn correlation_symmetry_range_and_griffiths() {
        for (name, g) in corpus::acceptance_corpus() {
            let n = g.vertex_count();
            let mut corr = vec![vec![int(1); n]; n];
            for a in 0..n {
                for b in 0..n {
                    corr[a][b] = correlation(&g, a, b).unwrap();
                }
            }
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(corr[a][b], corr[b][a], "{name} symmetry");
                    assert!(corr[a][b] > int(0), "{name} positivity");
                    assert!(corr[a][b] <= int(1), "{name} range");
                    if a != b {
                        assert!(corr[a][b] < int(1), "{name} strict range");
                    }
                    for c in 0..n {
                        assert!(
                            corr[a][b] >= &corr[a][c] * &corr[c][b],
                            "{name} Griffiths a={a} b={b} c={c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_triple_inequalities() {
        // For counterclockwise boundary triples a,b,c:
        //   1 + <ab>  > <ac> + <bc>   and   1 + <ab>^2 > <ac>^2 + <bc>^2.
        for (name, g) in corpus::acceptance_corpus() {
            let bnd = g.boundary_vertices();
            if bnd.len() < 3 {
                continue;
            }
            for i in 0..bnd.len() {
                for j in i + 1..bnd.len() {
                    for k in j + 1..bnd.len() {
                        let (a, b, c) = (bnd[i], bnd[j], bnd[k]);
                        let ab = correlation(&g, a, b).unwrap();
                        let ac = correlation(&g, a, c).unwrap();
                        let bc = correlation(&g, b, c).unwrap();
                        assert!(int(1) + &ab > &ac + &bc, "{name} linear triple");
                        assert!(
                            int(1) + &ab * &ab > &ac * &ac + &bc * &bc,
                            "{name} squared triple"
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_weights_keep_griffiths_on_cycle4(ps in proptest::collection::vec(1u32..20, 4),
                                                   qs in proptest::collection::vec(20u32..40, 4)) {
            let ws: Vec<Rat> = ps.iter().zip(&qs).map(|(&p, &q)| rat(p as i64, q as i64)).collect();
            let g = corpus::cycle4(&ws);
            for a in 0..4usize {
                for b in 0..4usize {
                    let ab = correlation(&g, a, b).unwrap();
                    prop_assert!(ab > int(0) && ab <= int(1));
                    for c in 0..4usize {
                        let ac = correlation(&g, a, c).unwrap();
                        let cb = correlation(&g, c, b).unwrap();
                        prop_assert!(ab >= ac * cb);
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_capacity_is_enforced() {
        // A 5x5 grid with one diagonal per cell: 56 edges on 25 vertices,
        // cyclomatic number 32, over the 28 cap.
        let n = 5usize;
        let id = |i: usize, j: usize| j * n + i;
        let mut coords = Vec::new();
        for j in 0..n {
            for i in 0..n {
                coords.push((i as f64, j as f64));
            }
        }
        let mut pairs = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if i + 1 < n {
                    pairs.push((id(i, j), id(i + 1, j)));
                }
                if j + 1 < n {
                    pairs.push((id(i, j), id(i, j + 1)));
                }
                if i + 1 < n && j + 1 < n {
                    pairs.push((id(i, j), id(i + 1, j + 1)));
                }
            }
        }
        let mut boundary = Vec::new();
        for i in 0..n {
            boundary.push(id(i, 0));
        }
        for j in 1..n {
            boundary.push(id(n - 1, j));
        }
        for i in (0..n - 1).rev() {
            boundary.push(id(i, n - 1));
        }
        for j in (1..n - 1).rev() {
            boundary.push(id(0, j));
        }
        let weights: Vec<Rat> = (0..pairs.len()).map(|_| rat(1, 2)).collect();
        let g = crate::corpus::from_coords(&coords, &pairs, &weights, &boundary).unwrap();
        assert!(matches!(
            even_polynomial(&g, &[]),
            Err(crate::error::Error::Capacity { .. })
        ));
    }

    #[test]
    fn s_empty_is_at_least_one() {
        for (_, g) in corpus::acceptance_corpus() {
            assert!(even_polynomial(&g, &[]).unwrap() >= int(1));
        }
        // Sanity for the table wrapper.
        let g = corpus::grid3_mixed();
        let t = CorrelationTable::new(&g).unwrap();
        assert!(t.s_empty().to_f64().unwrap() >= 1.0);
        assert_eq!(t.corr(0, 2), t.corr(2, 0));
    }
}
