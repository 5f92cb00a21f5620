//! Signed correlation matrices and their exact linear algebra: Bareiss
//! determinants, Pfaffians, crossing-signed pairing expansions, total
//! nonnegativity certificates and the vertex-disjoint-path criterion.

use num_traits::{One, Zero};

use crate::currents::validate_contiguous;
use crate::error::{Error, Result};
use crate::graph::{Color, PlanarGraph};
use crate::ising::CorrelationTable;
use crate::rational::Rat;

pub const MINOR_ORDER_CAP: usize = 6;
pub const BIJECTION_CAP: usize = 8;
pub const PAIRING_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Signed matrix with entries (-1)^s(i,j) <sigma_a sigma_b>.
    N,
    /// Plain correlation matrix of two contiguous boundary blocks.
    M,
    /// Skew-symmetric matrix of all pairwise correlations.
    K,
}

#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub kind: MatrixKind,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub entries: Vec<Vec<Rat>>,
}

impl CorrelationMatrix {
    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(crate::rational::format_rat).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// The sign exponent of the N matrix. `a_positions` are the sorted boundary
/// positions of A, `row` indexes into them, `col_pos` is the boundary
/// position of the column vertex. Positions are 0-based; only their order
/// matters.
pub fn sign_exponent(
    g: &PlanarGraph,
    a_positions: &[usize],
    row: usize,
    col_pos: usize,
) -> Result<usize> {
    let n = g.boundary().len();
    let l = *a_positions.get(row).ok_or_else(|| {
        Error::IndexOutOfRange(format!(
            "row {row} of an N matrix with {} rows",
            a_positions.len()
        ))
    })?;
    if col_pos >= n {
        return Err(Error::IndexOutOfRange(format!(
            "boundary position {col_pos}"
        )));
    }
    let (lo, hi) = (l.min(col_pos), l.max(col_pos));
    let between = a_positions.iter().filter(|&&p| p > lo && p < hi).count();
    let (col_vertex, col_color) = g.boundary()[col_pos];
    let col_in_a = a_positions.contains(&col_pos);
    let _ = col_vertex;
    let white_before = col_in_a && col_color == Color::White && col_pos < l;
    let black_after = col_in_a && col_color == Color::Black && col_pos > l;
    Ok(between + white_before as usize + black_after as usize)
}

fn boundary_positions_sorted(g: &PlanarGraph, vs: &[usize]) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(vs.len());
    for &v in vs {
        positions.push(g.boundary_pos(v).ok_or(Error::NotBoundary(v))?);
    }
    positions.sort_unstable();
    positions.dedup();
    if positions.len() != vs.len() {
        return Err(Error::OrderingViolation(
            "vertex set repeats a vertex".into(),
        ));
    }
    Ok(positions)
}

/// `N^{A,B}`: rows are A in boundary order, columns are B in boundary order,
/// entries carry the sign `(-1)^{s(i,j)}`.
pub fn build_n(table: &CorrelationTable, a: &[usize], b: &[usize]) -> Result<CorrelationMatrix> {
    let g = table.graph();
    if a.len() != b.len() {
        return Err(Error::OrderingViolation("|A| must equal |B|".into()));
    }
    let a_pos = boundary_positions_sorted(g, a)?;
    let b_pos = boundary_positions_sorted(g, b)?;
    let row_labels: Vec<usize> = a_pos.iter().map(|&p| g.boundary()[p].0).collect();
    let col_labels: Vec<usize> = b_pos.iter().map(|&p| g.boundary()[p].0).collect();
    let mut entries = Vec::with_capacity(a_pos.len());
    for i in 0..a_pos.len() {
        let mut row = Vec::with_capacity(b_pos.len());
        for &jp in &b_pos {
            let s = sign_exponent(g, &a_pos, i, jp)?;
            let c = table.corr(row_labels[i], g.boundary()[jp].0);
            row.push(if s % 2 == 0 { c } else { -c });
        }
        entries.push(row);
    }
    Ok(CorrelationMatrix {
        kind: MatrixKind::N,
        row_labels,
        col_labels,
        entries,
    })
}

/// `M^{A,B}` for contiguous A, B given in their pairing order
/// (a_1..a_k, b_k..b_1 counterclockwise).
pub fn build_m(table: &CorrelationTable, a: &[usize], b: &[usize]) -> Result<CorrelationMatrix> {
    let g = table.graph();
    validate_contiguous(g, a, b)?;
    let entries = a
        .iter()
        .map(|&ai| b.iter().map(|&bj| table.corr(ai, bj)).collect())
        .collect();
    Ok(CorrelationMatrix {
        kind: MatrixKind::M,
        row_labels: a.to_vec(),
        col_labels: b.to_vec(),
        entries,
    })
}

/// `K^S` for a boundary set S, taken in counterclockwise boundary order.
pub fn build_k(table: &CorrelationTable, s: &[usize]) -> Result<CorrelationMatrix> {
    let g = table.graph();
    let pos = boundary_positions_sorted(g, s)?;
    let labels: Vec<usize> = pos.iter().map(|&p| g.boundary()[p].0).collect();
    let n = labels.len();
    let mut entries = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = table.corr(labels[i], labels[j]);
            entries[i][j] = c.clone();
            entries[j][i] = -c;
        }
    }
    Ok(CorrelationMatrix {
        kind: MatrixKind::K,
        row_labels: labels.clone(),
        col_labels: labels,
        entries,
    })
}

/// Exact determinant by fraction-free Bareiss elimination.
pub fn det_exact(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut sign = 1i32;
    let mut prev = Rat::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Rat::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact Pfaffian of an even-dimensional skew-symmetric matrix, by expansion
/// along the first remaining row. Checks `pf^2 = det`.
pub fn pfaffian_exact(m: &[Vec<Rat>]) -> Result<Rat> {
    let n = m.len();
    if n % 2 == 1 {
        return Err(Error::OrderingViolation(format!(
            "Pfaffian of odd dimension {n}"
        )));
    }
    for i in 0..n {
        if !m[i][i].is_zero() {
            return Err(Error::OrderingViolation(
                "matrix is not skew-symmetric".into(),
            ));
        }
        for j in 0..n {
            if m[i][j] != -m[j][i].clone() {
                return Err(Error::OrderingViolation(
                    "matrix is not skew-symmetric".into(),
                ));
            }
        }
    }
    fn rec(m: &[Vec<Rat>], active: &[usize]) -> Rat {
        if active.is_empty() {
            return Rat::one();
        }
        let i0 = active[0];
        let mut acc = Rat::zero();
        for (idx, &j) in active.iter().enumerate().skip(1) {
            if m[i0][j].is_zero() {
                continue;
            }
            let rest: Vec<usize> = active[1..].iter().copied().filter(|&x| x != j).collect();
            let term = &m[i0][j] * rec(m, &rest);
            if idx % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    let active: Vec<usize> = (0..n).collect();
    let pf = rec(m, &active);
    debug_assert_eq!(&pf * &pf, det_exact(m), "pf^2 must equal det");
    Ok(pf)
}

/// Number of crossing chord pairs for chords on a circle, given by endpoint
/// positions. Two chords cross iff exactly one endpoint of the second lies
/// strictly between the endpoints of the first, cyclically.
pub fn xing(chords: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for i in 0..chords.len() {
        for j in i + 1..chords.len() {
            let (p, q) = chords[i];
            let (lo, hi) = (p.min(q), p.max(q));
            let inside = |x: usize| x > lo && x < hi;
            if inside(chords[j].0) != inside(chords[j].1) {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Copy_ {
    A,
    B,
}

/// Disk placement for pairings of A and B: one token per vertex, two for a
/// vertex in both sets (white: the A copy immediately after the B copy
/// counterclockwise, black: before).
fn disk_tokens(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<Vec<(usize, Copy_)>> {
    let mut tokens = Vec::new();
    for &(v, color) in g.boundary() {
        let in_a = a.contains(&v);
        let in_b = b.contains(&v);
        match (in_a, in_b) {
            (false, false) => {}
            (true, false) => tokens.push((v, Copy_::A)),
            (false, true) => tokens.push((v, Copy_::B)),
            (true, true) => match color {
                Color::White => {
                    tokens.push((v, Copy_::B));
                    tokens.push((v, Copy_::A));
                }
                Color::Black => {
                    tokens.push((v, Copy_::A));
                    tokens.push((v, Copy_::B));
                }
            },
        }
    }
    for &v in a.iter().chain(b) {
        if g.boundary_pos(v).is_none() {
            return Err(Error::NotBoundary(v));
        }
    }
    Ok(tokens)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    fn heap(perm: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..k {
            heap(perm, k - 1, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heap(&mut perm, k, &mut out);
    out
}

/// Brute-force expansion `sum over bijections A -> B of (-1)^xing prod
/// <sigma_a sigma_b>`; equals `det N^{A,B}`.
pub fn expand_det_via_pairings(table: &CorrelationTable, a: &[usize], b: &[usize]) -> Result<Rat> {
    let g = table.graph();
    if a.len() != b.len() {
        return Err(Error::OrderingViolation("|A| must equal |B|".into()));
    }
    if a.len() > BIJECTION_CAP {
        return Err(Error::capacity("bijection expansion", BIJECTION_CAP));
    }
    let a_sorted: Vec<usize> = {
        let pos = boundary_positions_sorted(g, a)?;
        pos.iter().map(|&p| g.boundary()[p].0).collect()
    };
    let b_sorted: Vec<usize> = {
        let pos = boundary_positions_sorted(g, b)?;
        pos.iter().map(|&p| g.boundary()[p].0).collect()
    };
    let tokens = disk_tokens(g, &a_sorted, &b_sorted)?;
    let token_pos = |v: usize, c: Copy_| {
        tokens
            .iter()
            .position(|&(w, wc)| w == v && wc == c)
            .expect("token present")
    };
    let mut total = Rat::zero();
    for perm in permutations(a_sorted.len()) {
        let mut chords = Vec::with_capacity(a_sorted.len());
        let mut prod = Rat::one();
        for (i, &pi) in perm.iter().enumerate() {
            let (av, bv) = (a_sorted[i], b_sorted[pi]);
            chords.push((token_pos(av, Copy_::A), token_pos(bv, Copy_::B)));
            prod *= table.corr(av, bv);
        }
        if xing(&chords) % 2 == 1 {
            prod = -prod;
        }
        total += prod;
    }
    Ok(total)
}

/// Brute-force expansion `sum over pairings of S of (-1)^xing prod
/// <sigma_u sigma_v>`; equals `pf K^S`.
pub fn expand_pf_via_pairings(table: &CorrelationTable, s: &[usize]) -> Result<Rat> {
    let g = table.graph();
    if s.len() % 2 == 1 {
        return Err(Error::OrderingViolation(
            "pairing expansion needs an even set".into(),
        ));
    }
    if s.len() > PAIRING_CAP {
        return Err(Error::capacity("pairing expansion", PAIRING_CAP));
    }
    let pos = boundary_positions_sorted(g, s)?;
    let labels: Vec<usize> = pos.iter().map(|&p| g.boundary()[p].0).collect();
    let mut total = Rat::zero();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    fn rec(
        remaining: &[usize],
        pairs: &mut Vec<(usize, usize)>,
        labels: &[usize],
        table: &CorrelationTable,
        total: &mut Rat,
    ) {
        if remaining.is_empty() {
            let mut prod = Rat::one();
            for &(i, j) in pairs.iter() {
                prod *= table.corr(labels[i], labels[j]);
            }
            if xing(pairs) % 2 == 1 {
                prod = -prod;
            }
            *total += prod;
            return;
        }
        let first = remaining[0];
        for idx in 1..remaining.len() {
            let partner = remaining[idx];
            let rest: Vec<usize> = remaining[1..]
                .iter()
                .copied()
                .filter(|&x| x != partner)
                .collect();
            pairs.push((first, partner));
            rec(&rest, pairs, labels, table, total);
            pairs.pop();
        }
    }
    let all: Vec<usize> = (0..labels.len()).collect();
    rec(&all, &mut pairs, &labels, table, &mut total);
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct MinorCertificate {
    pub checked: usize,
    pub min_minor: Rat,
    pub min_witness: (Vec<usize>, Vec<usize>),
    pub all_nonnegative: bool,
    pub all_positive: bool,
    /// Every minor: row subset, column subset, exact value.
    pub minors: Vec<(Vec<usize>, Vec<usize>, Rat)>,
}

impl MinorCertificate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rows,cols,minor\n");
        let join = |ix: &[usize]| {
            ix.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("+")
        };
        for (rows, cols, value) in &self.minors {
            out.push_str(&format!(
                "{},{},{}\n",
                join(rows),
                join(cols),
                crate::rational::format_rat(value)
            ));
        }
        out
    }
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Checks every square minor of an M matrix, reporting the smallest one.
pub fn all_minors_nonneg(m: &CorrelationMatrix) -> Result<MinorCertificate> {
    let k = m.order();
    if k > MINOR_ORDER_CAP {
        return Err(Error::capacity("minor enumeration", MINOR_ORDER_CAP));
    }
    let mut cert = MinorCertificate {
        checked: 0,
        min_minor: Rat::one(),
        min_witness: (vec![], vec![]),
        all_nonnegative: true,
        all_positive: true,
        minors: Vec::new(),
    };
    let mut first = true;
    for l in 1..=k {
        for rows in subsets_of_size(k, l) {
            for cols in subsets_of_size(k, l) {
                let sub: Vec<Vec<Rat>> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| m.entries[i][j].clone()).collect())
                    .collect();
                let d = det_exact(&sub);
                cert.checked += 1;
                if d < Rat::zero() {
                    cert.all_nonnegative = false;
                }
                if d <= Rat::zero() {
                    cert.all_positive = false;
                }
                if first || d < cert.min_minor {
                    first = false;
                    cert.min_minor = d.clone();
                    cert.min_witness = (rows.clone(), cols.clone());
                }
                cert.minors.push((rows.clone(), cols.clone(), d));
            }
        }
    }
    Ok(cert)
}

/// Edmonds-Karp with unit vertex capacities (vertex splitting). Decides
/// whether |A'| pairwise vertex-disjoint paths connect A' and B'; a vertex in
/// both sets is its own empty path and is removed from the graph first.
pub fn disjoint_paths_exist(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::OrderingViolation("|A'| must equal |B'|".into()));
    }
    let shared: Vec<usize> = a.iter().copied().filter(|v| b.contains(v)).collect();
    let a_only: Vec<usize> = a.iter().copied().filter(|v| !shared.contains(v)).collect();
    let b_only: Vec<usize> = b.iter().copied().filter(|v| !shared.contains(v)).collect();
    if a_only.is_empty() {
        return Ok(true);
    }
    let n = g.vertex_count();
    let node = |v: usize, out: bool| 2 * v + out as usize;
    let source = 2 * n;
    let sink = 2 * n + 1;
    let mut flow = MaxFlow::new(2 * n + 2);
    let removed = |v: usize| shared.contains(&v);
    for v in 0..n {
        if !removed(v) {
            flow.add_arc(node(v, false), node(v, true), 1);
        }
    }
    for edge in g.edges() {
        if removed(edge.u) || removed(edge.v) {
            continue;
        }
        flow.add_arc(node(edge.u, true), node(edge.v, false), 1);
        flow.add_arc(node(edge.v, true), node(edge.u, false), 1);
    }
    for &v in &a_only {
        flow.add_arc(source, node(v, false), 1);
    }
    for &v in &b_only {
        flow.add_arc(node(v, true), sink, 1);
    }
    Ok(flow.run(source, sink) == a_only.len() as i64)
}

struct MaxFlow {
    heads: Vec<usize>,
    caps: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlow {
    fn new(n: usize) -> MaxFlow {
        MaxFlow {
            heads: Vec::new(),
            caps: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64) {
        self.adj[from].push(self.heads.len());
        self.heads.push(to);
        self.caps.push(cap);
        self.adj[to].push(self.heads.len());
        self.heads.push(from);
        self.caps.push(0);
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut parent = vec![usize::MAX; self.adj.len()];
            let mut parent_arc = vec![usize::MAX; self.adj.len()];
            let mut queue = std::collections::VecDeque::from([s]);
            parent[s] = s;
            while let Some(v) = queue.pop_front() {
                for &arc in &self.adj[v] {
                    let w = self.heads[arc];
                    if parent[w] == usize::MAX && self.caps[arc] > 0 {
                        parent[w] = v;
                        parent_arc[w] = arc;
                        queue.push_back(w);
                    }
                }
            }
            if parent[t] == usize::MAX {
                return total;
            }
            let mut v = t;
            let mut push = i64::MAX;
            while v != s {
                push = push.min(self.caps[parent_arc[v]]);
                v = parent[v];
            }
            let mut v = t;
            while v != s {
                let arc = parent_arc[v];
                self.caps[arc] -= push;
                self.caps[arc ^ 1] += push;
                v = parent[v];
            }
            total += push;
        }
    }
}

/// Strict positivity criterion of the signed determinant: some alternating
/// flow with terminals A, B exists. Equivalent to `det N^{A,B} > 0`.
pub fn alternating_path_criterion(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<bool> {
    crate::flows::flow_exists(g, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::flows;
    use crate::rational::{int, rat};

    #[test]
    fn sign_exponent_examples() {
        // Positions 0,1,2 on the triangle boundary; A at positions {0, 2}.
        let g = corpus::triangle_mixed(); // all white
        let a_pos = vec![0usize, 2];
        // Diagonal entries have sign 0.
        assert_eq!(sign_exponent(&g, &a_pos, 0, 0).unwrap(), 0);
        assert_eq!(sign_exponent(&g, &a_pos, 1, 2).unwrap(), 0);
        // Column vertex not in A: only the between-count matters.
        assert_eq!(sign_exponent(&g, &a_pos, 0, 1).unwrap(), 0);
        // Row at position 2, column at position 0, white column vertex in A.
        assert_eq!(sign_exponent(&g, &a_pos, 1, 0).unwrap(), 1);
    }

    #[test]
    fn example_sign_pattern_two_white_one_black() {
        // Boundary triple a,b,c counterclockwise with a,b white and c black,
        // A = B = {a,b,c}: signs must be [[+,+,+],[-,+,-],[+,-,+]] and the
        // determinant 1 + <ab>^2 - <ac>^2 - <bc>^2.
        let g = corpus::triangle_mixed()
            .with_coloring(&[Color::White, Color::White, Color::Black])
            .unwrap();
        let table = CorrelationTable::new(&g).unwrap();
        let n = build_n(&table, &[0, 1, 2], &[0, 1, 2]).unwrap();
        let p = table.corr(0, 1);
        let q = table.corr(0, 2);
        let r = table.corr(1, 2);
        let expect = vec![
            vec![int(1), p.clone(), q.clone()],
            vec![-p.clone(), int(1), -r.clone()],
            vec![q.clone(), -r.clone(), int(1)],
        ];
        assert_eq!(n.entries, expect);
        let det = det_exact(&n.entries);
        assert_eq!(det, int(1) + &p * &p - &q * &q - &r * &r);
        assert!(det > int(0));
    }

    #[test]
    fn determinant_basics() {
        let id3 = vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
            vec![int(0), int(0), int(1)],
        ];
        assert_eq!(det_exact(&id3), int(1));
        let m = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(2, 7)]];
        assert_eq!(det_exact(&m), rat(1, 2) * rat(2, 7) - rat(1, 3) * rat(1, 5));
        let singular = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(det_exact(&singular), int(0));
        assert_eq!(det_exact(&[]), int(1));
    }

    #[test]
    fn pfaffian_basics() {
        let c = rat(3, 7);
        let k2 = vec![vec![int(0), c.clone()], vec![-c.clone(), int(0)]];
        assert_eq!(pfaffian_exact(&k2).unwrap(), c);
        // Block diagonal of two 2x2 blocks.
        let (c1, c2) = (rat(1, 2), rat(2, 5));
        let mut k4 = vec![vec![int(0); 4]; 4];
        k4[0][1] = c1.clone();
        k4[1][0] = -c1.clone();
        k4[2][3] = c2.clone();
        k4[3][2] = -c2.clone();
        assert_eq!(pfaffian_exact(&k4).unwrap(), c1 * c2);
        assert!(pfaffian_exact(&[vec![int(0)]]).is_err());
        let not_skew = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert!(pfaffian_exact(&not_skew).is_err());
    }

    #[test]
    fn k_matrix_and_four_point_pfaffian() {
        let g = corpus::cycle4_uniform(&rat(1, 2));
        let table = CorrelationTable::new(&g).unwrap();
        let k = build_k(&table, &[0, 1, 2, 3]).unwrap();
        let pf = pfaffian_exact(&k.entries).unwrap();
        let ab = table.corr(0, 1);
        let cd = table.corr(2, 3);
        let ad = table.corr(0, 3);
        let bc = table.corr(1, 2);
        let ac = table.corr(0, 2);
        let bd = table.corr(1, 3);
        assert_eq!(pf, &ab * &cd + &ad * &bc - &ac * &bd);
        assert_eq!(pf, rat(8, 17));
        assert_eq!(&pf * &pf, det_exact(&k.entries));
    }

    #[test]
    fn xing_examples() {
        // Nested pairing on tokens 0,1,2,3 placed around the circle.
        assert_eq!(xing(&[(0, 3), (1, 2)]), 0);
        assert_eq!(xing(&[(0, 2), (1, 3)]), 1);
        assert_eq!(xing(&[(0, 1), (2, 3)]), 0);
    }

    #[test]
    fn expansions_match_exact_linear_algebra() {
        let g = corpus::cycle4_mixed();
        let table = CorrelationTable::new(&g).unwrap();
        // k = 1: both reduce to a single correlation.
        assert_eq!(
            expand_det_via_pairings(&table, &[0], &[2]).unwrap(),
            table.corr(0, 2)
        );
        let m1 = build_m(&table, &[0], &[2]).unwrap();
        assert_eq!(m1.entries, vec![vec![table.corr(0, 2)]]);
        // k = 2 contiguous blocks.
        let m = build_m(&table, &[0, 1], &[3, 2]).unwrap();
        assert_eq!(
            expand_det_via_pairings(&table, &[0, 1], &[3, 2]).unwrap(),
            det_exact(&m.entries)
        );
        let k = build_k(&table, &[0, 1, 2, 3]).unwrap();
        assert_eq!(
            expand_pf_via_pairings(&table, &[0, 1, 2, 3]).unwrap(),
            pfaffian_exact(&k.entries).unwrap()
        );
    }

    #[test]
    fn n_expansion_handles_overlap_and_colors() {
        for colors in [
            [Color::White, Color::White, Color::White],
            [Color::White, Color::Black, Color::White],
            [Color::Black, Color::Black, Color::Black],
        ] {
            let g = corpus::triangle_mixed().with_coloring(&colors).unwrap();
            let table = CorrelationTable::new(&g).unwrap();
            for (a, b) in [
                (vec![0], vec![0]),
                (vec![0, 1], vec![0, 1]),
                (vec![0, 1], vec![1, 2]),
                (vec![0, 1, 2], vec![0, 1, 2]),
            ] {
                let n = build_n(&table, &a, &b).unwrap();
                assert_eq!(
                    det_exact(&n.entries),
                    expand_det_via_pairings(&table, &a, &b).unwrap(),
                    "colors {colors:?} A={a:?} B={b:?}"
                );
            }
        }
    }

    #[test]
    fn det_n_equals_flow_ratio_small() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        let table = CorrelationTable::new(&g).unwrap();
        let dm = crate::directed::DirectedModification::new(&g);
        let z00 = flows::z_aflow(&dm, &[], &[]).unwrap();
        for (a, b) in [
            (vec![0], vec![1]),
            (vec![0], vec![0]),
            (vec![0, 1], vec![1, 2]),
            (vec![0, 2], vec![1, 2]),
        ] {
            let n = build_n(&table, &a, &b).unwrap();
            let z = flows::z_aflow(&dm, &a, &b).unwrap();
            assert_eq!(det_exact(&n.entries), z / &z00, "A={a:?} B={b:?}");
        }
    }

    #[test]
    fn cut_vertex_makes_m_singular() {
        let g = corpus::bowtie_mixed();
        let table = CorrelationTable::new(&g).unwrap();
        // Contiguous blocks {0,1} and {3,4} separated by the cut vertex 2.
        let m = build_m(&table, &[0, 1], &[3, 4]).unwrap();
        assert_eq!(det_exact(&m.entries), int(0));
        let cert = all_minors_nonneg(&m).unwrap();
        assert!(cert.all_nonnegative);
        assert!(!cert.all_positive);
        assert_eq!(cert.checked, 5);
        assert!(cert.to_csv().starts_with("rows,cols,minor\n"));
        assert!(!disjoint_paths_exist(&g, &[0, 1], &[3, 4]).unwrap());
    }

    #[test]
    fn grid_opposite_sides_are_totally_positive() {
        let g = corpus::grid3_mixed();
        let table = CorrelationTable::new(&g).unwrap();
        // Bottom row 0,1,2 against top row 8,7,6: counterclockwise pattern
        // a1,a2,a3,b3,b2,b1 = 0,1,2,8,7,6.
        let m = build_m(&table, &[0, 1, 2], &[6, 7, 8]).unwrap();
        let cert = all_minors_nonneg(&m).unwrap();
        assert!(cert.all_positive, "min minor {:?}", cert.min_minor);
        assert!(disjoint_paths_exist(&g, &[0, 1, 2], &[6, 7, 8]).unwrap());
    }

    #[test]
    fn disjoint_path_examples() {
        let g = corpus::path3_mixed();
        assert!(disjoint_paths_exist(&g, &[0], &[2]).unwrap());
        assert!(disjoint_paths_exist(&g, &[0], &[0]).unwrap());
        // Spider: center 2 with pendants 0,1,3,4; two paths must share 2.
        let weights: Vec<Rat> = (0..4).map(corpus::palette).collect();
        let spider = corpus::from_coords(
            &[
                (-1.0, 0.5),
                (-1.0, -0.5),
                (0.0, 0.0),
                (1.0, 0.0),
                (0.0, 1.0),
            ],
            &[(0, 2), (1, 2), (2, 3), (2, 4)],
            &weights,
            &[0, 2, 1, 3, 4],
        )
        .unwrap();
        assert!(!disjoint_paths_exist(&spider, &[0, 1], &[3, 4]).unwrap());
        // 2 x 3 grid: left column to right column via two disjoint rows.
        let weights: Vec<Rat> = (0..7).map(corpus::palette).collect();
        let g = corpus::grid(3, 2, &weights);
        assert!(disjoint_paths_exist(&g, &[0, 3], &[2, 5]).unwrap());
    }

    #[test]
    fn bridge_forces_zero_determinant() {
        // Two triangles joined by a bridge edge: two vertex-disjoint paths
        // between opposite pairs cannot exist, so the k = 2 determinant
        // vanishes exactly and the alternating criterion rejects.
        let weights: Vec<Rat> = (0..7).map(corpus::palette).collect();
        let g = corpus::from_coords(
            &[
                (0.0, 1.0),
                (0.0, -1.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (3.0, 1.0),
                (3.0, -1.0),
            ],
            &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (3, 5), (4, 5)],
            &weights,
            // First occurrences of the outer walk; the bridge endpoints are
            // visited twice.
            &[0, 1, 2, 3, 5, 4],
        )
        .unwrap();
        let table = CorrelationTable::new(&g).unwrap();
        let m = build_m(&table, &[0, 1], &[4, 5]).unwrap();
        assert_eq!(det_exact(&m.entries), int(0));
        let n = build_n(&table, &[0, 1], &[4, 5]).unwrap();
        assert_eq!(det_exact(&n.entries), int(0));
        assert!(!alternating_path_criterion(&g, &[0, 1], &[4, 5]).unwrap());
        assert!(!disjoint_paths_exist(&g, &[0, 1], &[4, 5]).unwrap());
    }

    #[test]
    fn alternating_criterion_matches_det_sign() {
        let g = corpus::cycle4_mixed();
        let table = CorrelationTable::new(&g).unwrap();
        for (a, b) in [
            (vec![0], vec![2]),
            (vec![0, 1], vec![3, 2]),
            (vec![0, 2], vec![1, 3]),
            (vec![0, 1], vec![2, 3]),
        ] {
            let n = build_n(&table, &a, &b).unwrap();
            let det = det_exact(&n.entries);
            let has_flow = alternating_path_criterion(&g, &a, &b).unwrap();
            assert_eq!(det > int(0), has_flow, "A={a:?} B={b:?} det={det}");
            assert!(det >= int(0));
        }
        // A single boundary vertex against itself: empty path, det = 1 > 0.
        assert!(alternating_path_criterion(&g, &[0], &[0]).unwrap());
    }
}
