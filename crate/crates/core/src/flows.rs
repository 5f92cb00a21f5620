//! Alternating flows on the directed modification: backtracking enumeration
//! over per-edge local states, flow weights and partition functions, the
//! projection onto current shadows, the induced measure, and the interlacing
//! characterization of the image. A second, aggregated route computes the
//! same partition functions through the induced-measure formula; the two are
//! cross-checked exactly on every small graph.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_traits::{One, Zero};

use crate::currents::{count_sourceless, Components, OmegaPair};
use crate::directed::{DirectedModification, ModDart, Role, StubCorner};
use crate::error::{Error, Result};
use crate::graph::{Color, EdgeSet, PlanarGraph};
use crate::ising::even_polynomial;
use crate::rational::{pow2, Rat};

/// Local edge states: bit 1 = middle, bit 2 = side 1, bit 4 = side 2. The
/// state with both sides and no middle violates alternation and is not
/// representable.
pub const STATES: [u8; 7] = [0, 1, 2, 3, 4, 5, 7];

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

pub fn state_name(s: u8) -> &'static str {
    match s {
        0 => "empty",
        1 => "m",
        2 => "s1",
        3 => "ms1",
        4 => "s2",
        5 => "ms2",
        7 => "s1s2m",
        _ => "invalid",
    }
}

/// An alternating flow, recorded as the local state of every base edge
/// together with its terminal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltFlow {
    pub states: Vec<u8>,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
}

/// Projection onto the current shadow: odd-popcount states form omega1, the
/// two middle-plus-one-side states form omega2.
pub fn project_states(states: &[u8]) -> OmegaPair {
    let mut omega1 = EdgeSet::EMPTY;
    let mut omega2 = EdgeSet::EMPTY;
    for (e, &s) in states.iter().enumerate() {
        match s.count_ones() {
            0 => {}
            1 | 3 => omega1.insert(e),
            2 => omega2.insert(e),
            _ => unreachable!(),
        }
    }
    OmegaPair::new(omega1, omega2)
}

impl AltFlow {
    pub fn project(&self) -> OmegaPair {
        project_states(&self.states)
    }

    /// Debug dump: one `edge_id,state` row per base edge.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_id,state\n");
        for (e, &s) in self.states.iter().enumerate() {
            out.push_str(&format!("{e},{}\n", state_name(s)));
        }
        out
    }
}

/// Weight of a flow: `2^(|A| + |F| - |V(F)|) * prod of edge weights`.
/// `|F|` counts the boundary stubs, `|V(F)|` counts the source and sink
/// vertices themselves as well as every original vertex touched by a dart
/// (a terminal is touched by its stub even without bundle edges).
pub fn flow_weight(dm: &DirectedModification, flow: &AltFlow) -> Rat {
    flow_weight_states(dm, &flow.states, &flow.sources, &flow.sinks)
}

fn flow_weight_states(dm: &DirectedModification, states: &[u8], a: &[usize], b: &[usize]) -> Rat {
    let g = dm.graph();
    let mut dart_count = a.len() + b.len();
    let mut product = Rat::one();
    let mut touched = vec![false; g.vertex_count()];
    for &v in a.iter().chain(b) {
        touched[v] = true;
    }
    for (e, &s) in states.iter().enumerate() {
        if s == 0 {
            continue;
        }
        dart_count += s.count_ones() as usize;
        touched[g.edge(e).u] = true;
        touched[g.edge(e).v] = true;
        if s & Role::Mid.bit() != 0 {
            product *= dm.bundle_weight(e, Role::Mid);
        }
        if s & Role::Side1.bit() != 0 {
            product *= dm.bundle_weight(e, Role::Side1);
        }
        if s & Role::Side2.bit() != 0 {
            product *= dm.bundle_weight(e, Role::Side2);
        }
    }
    let verts = a.len() + b.len() + touched.iter().filter(|&&t| t).count();
    let exponent = a.len() as i64 + dart_count as i64 - verts as i64;
    pow2(exponent) * product
}

/// Backtracking enumerator for alternating flows with terminal sets A, B.
pub struct FlowSearch<'d, 'g> {
    dm: &'d DirectedModification<'g>,
    sources: Vec<usize>,
    sinks: Vec<usize>,
    node_budget: u64,
}

struct SearchState<'d, 'g> {
    dm: &'d DirectedModification<'g>,
    edge_order: Vec<usize>,
    states: Vec<u8>,
    in_c: Vec<i32>,
    out_c: Vec<i32>,
    fut_in: Vec<i32>,
    fut_out: Vec<i32>,
    unassigned: Vec<i32>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
    nodes: u64,
    budget: u64,
    exceeded: bool,
}

impl<'d, 'g> FlowSearch<'d, 'g> {
    pub fn new(dm: &'d DirectedModification<'g>, a: &[usize], b: &[usize]) -> Result<Self> {
        dm.check_terminals(a, b)?;
        Ok(FlowSearch {
            dm,
            sources: a.to_vec(),
            sinks: b.to_vec(),
            node_budget: DEFAULT_NODE_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Visits every flow exactly once. Returns false when the callback broke
    /// off early.
    pub fn for_each<F: FnMut(&[u8]) -> ControlFlow<()>>(&self, mut f: F) -> Result<bool> {
        let g = self.dm.graph();
        let n = g.vertex_count();
        let m = g.edge_count();

        // BFS vertex order; edges sorted by the later of their endpoints so
        // vertex neighborhoods close early.
        let mut bfs_index = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        bfs_index[0] = 0;
        let mut next = 1;
        while let Some(v) = queue.pop_front() {
            for &e in g.rotation(v) {
                let w = g.edge(e).other(v);
                if bfs_index[w] == usize::MAX {
                    bfs_index[w] = next;
                    next += 1;
                    queue.push_back(w);
                }
            }
        }
        let mut edge_order: Vec<usize> = (0..m).collect();
        edge_order.sort_by_key(|&e| {
            let (u, v) = (g.edge(e).u, g.edge(e).v);
            let (bu, bv) = (bfs_index[u], bfs_index[v]);
            (bu.max(bv), bu.min(bv), e)
        });

        let mut is_source = vec![false; n];
        for &v in &self.sources {
            is_source[v] = true;
        }
        let mut is_sink = vec![false; n];
        for &v in &self.sinks {
            is_sink[v] = true;
        }
        let mut in_c = vec![0i32; n];
        let mut out_c = vec![0i32; n];
        for v in 0..n {
            if is_source[v] {
                in_c[v] += 1;
            }
            if is_sink[v] {
                out_c[v] += 1;
            }
        }
        let mut fut_in = vec![0i32; n];
        let mut fut_out = vec![0i32; n];
        let mut unassigned = vec![0i32; n];
        for e in 0..m {
            let tail = self.dm.middle_tail(e);
            let head = self.dm.middle_head(e);
            fut_in[tail] += 2;
            fut_out[tail] += 1;
            fut_in[head] += 1;
            fut_out[head] += 2;
            unassigned[tail] += 1;
            unassigned[head] += 1;
        }

        let mut st = SearchState {
            dm: self.dm,
            edge_order,
            states: vec![u8::MAX; m],
            in_c,
            out_c,
            fut_in,
            fut_out,
            unassigned,
            is_source,
            is_sink,
            nodes: 0,
            budget: self.node_budget,
            exceeded: false,
        };
        let flow = st.descend(0, &mut f);
        if st.exceeded {
            return Err(Error::capacity(
                "alternating-flow search nodes",
                self.node_budget,
            ));
        }
        Ok(flow != ControlFlow::Break(()))
    }

    pub fn collect(&self) -> Result<Vec<AltFlow>> {
        let mut out = Vec::new();
        self.for_each(|states| {
            out.push(AltFlow {
                states: states.to_vec(),
                sources: self.sources.clone(),
                sinks: self.sinks.clone(),
            });
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    /// Exact partition function `Z^{A,B}` by direct enumeration.
    pub fn partition_function(&self) -> Result<Rat> {
        let mut z = Rat::zero();
        self.for_each(|states| {
            z += flow_weight_states(self.dm, states, &self.sources, &self.sinks);
            ControlFlow::Continue(())
        })?;
        Ok(z)
    }

    /// Does any flow exist? Early-exits on the first one.
    pub fn any_flow(&self) -> Result<bool> {
        let completed = self.for_each(|_| ControlFlow::Break(()))?;
        Ok(!completed)
    }
}

impl SearchState<'_, '_> {
    fn descend<F: FnMut(&[u8]) -> ControlFlow<()>>(
        &mut self,
        idx: usize,
        f: &mut F,
    ) -> ControlFlow<()> {
        if idx == self.edge_order.len() {
            return f(&self.states);
        }
        let e = self.edge_order[idx];
        let g = self.dm.graph();
        let (u, v) = (g.edge(e).u, g.edge(e).v);
        let tail = self.dm.middle_tail(e);
        for &s in &STATES {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exceeded = true;
                return ControlFlow::Break(());
            }
            // Dart orientation per endpoint: the middle edge leaves the tail;
            // side edges enter it.
            let sides = (s & 2 != 0) as i32 + (s & 4 != 0) as i32;
            let mid = (s & 1 != 0) as i32;
            let (d_in_tail, d_out_tail) = (sides, mid);
            let (d_in_head, d_out_head) = (mid, sides);
            let (din_u, dout_u, din_v, dout_v) = if u == tail {
                (d_in_tail, d_out_tail, d_in_head, d_out_head)
            } else {
                (d_in_head, d_out_head, d_in_tail, d_out_tail)
            };
            self.states[e] = s;
            self.in_c[u] += din_u;
            self.out_c[u] += dout_u;
            self.in_c[v] += din_v;
            self.out_c[v] += dout_v;
            self.fut_in[u] -= if u == tail { 2 } else { 1 };
            self.fut_out[u] -= if u == tail { 1 } else { 2 };
            self.fut_in[v] -= if v == tail { 2 } else { 1 };
            self.fut_out[v] -= if v == tail { 1 } else { 2 };
            self.unassigned[u] -= 1;
            self.unassigned[v] -= 1;

            let mut ok = true;
            for w in [u, v] {
                if self.in_c[w] - self.out_c[w] > self.fut_out[w]
                    || self.out_c[w] - self.in_c[w] > self.fut_in[w]
                {
                    ok = false;
                    break;
                }
                if self.unassigned[w] == 0 && (self.in_c[w] != self.out_c[w] || !self.alternates(w))
                {
                    ok = false;
                    break;
                }
            }
            let flow = if ok {
                self.descend(idx + 1, f)
            } else {
                ControlFlow::Continue(())
            };

            self.states[e] = u8::MAX;
            self.in_c[u] -= din_u;
            self.out_c[u] -= dout_u;
            self.in_c[v] -= din_v;
            self.out_c[v] -= dout_v;
            self.fut_in[u] += if u == tail { 2 } else { 1 };
            self.fut_out[u] += if u == tail { 1 } else { 2 };
            self.fut_in[v] += if v == tail { 2 } else { 1 };
            self.fut_out[v] += if v == tail { 1 } else { 2 };
            self.unassigned[u] += 1;
            self.unassigned[v] += 1;

            if flow == ControlFlow::Break(()) {
                return flow;
            }
        }
        ControlFlow::Continue(())
    }

    /// Cyclic in/out alternation of the present darts at a closed vertex.
    fn alternates(&self, w: usize) -> bool {
        let mut dirs: Vec<bool> = Vec::with_capacity(8);
        for &dart in self.dm.rotation(w) {
            let present = match dart {
                ModDart::SourceStub => self.is_source[w],
                ModDart::SinkStub => self.is_sink[w],
                ModDart::Bundle { edge, role } => self.states[edge] & role.bit() != 0,
            };
            if present {
                dirs.push(self.dm.incoming_at(w, dart));
            }
        }
        dirs.len() % 2 == 0 && (0..dirs.len()).all(|i| dirs[i] != dirs[(i + 1) % dirs.len()])
    }
}

/// Raw partition function `Z^{A,B}` over alternating flows.
pub fn z_aflow(dm: &DirectedModification, a: &[usize], b: &[usize]) -> Result<Rat> {
    FlowSearch::new(dm, a, b)?.partition_function()
}

pub fn enumerate_flows(
    dm: &DirectedModification,
    a: &[usize],
    b: &[usize],
) -> Result<Vec<AltFlow>> {
    FlowSearch::new(dm, a, b)?.collect()
}

/// Tokens of one component class: true for a source stub, false for a sink
/// stub, in counterclockwise boundary order. A vertex in both terminal sets
/// contributes its two stubs in the order fixed by its color.
fn class_tokens(g: &PlanarGraph, class: &[usize], in_a: &[bool], in_b: &[bool]) -> Vec<bool> {
    let mut by_pos: Vec<(usize, usize)> = class
        .iter()
        .filter(|&&v| in_a[v] || in_b[v])
        .map(|&v| {
            (
                g.boundary_pos(v).expect("terminals are boundary vertices"),
                v,
            )
        })
        .collect();
    by_pos.sort_unstable();
    let mut tokens = Vec::new();
    for (_, v) in by_pos {
        match (in_a[v], in_b[v]) {
            (true, false) => tokens.push(true),
            (false, true) => tokens.push(false),
            (true, true) => match g.color(v).expect("boundary vertex") {
                Color::White => {
                    tokens.push(false);
                    tokens.push(true);
                }
                Color::Black => {
                    tokens.push(true);
                    tokens.push(false);
                }
            },
            (false, false) => unreachable!(),
        }
    }
    tokens
}

fn tokens_alternate(tokens: &[bool]) -> bool {
    tokens.is_empty()
        || (tokens.len() % 2 == 0
            && (0..tokens.len()).all(|i| tokens[i] != tokens[(i + 1) % tokens.len()]))
}

fn terminal_flags(g: &PlanarGraph, a: &[usize], b: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let mut in_a = vec![false; g.vertex_count()];
    for &v in a {
        in_a[v] = true;
    }
    let mut in_b = vec![false; g.vertex_count()];
    for &v in b {
        in_b[v] = true;
    }
    (in_a, in_b)
}

/// Is `classes` (the boundary partition of a shadow) the projection of some
/// flow with terminals A, B? True iff every A-xor-B vertex is covered and the
/// stubs attached to each component alternate source/sink around the outer
/// face.
fn image_condition(g: &PlanarGraph, classes: &[Vec<usize>], in_a: &[bool], in_b: &[bool]) -> bool {
    let mut covered = vec![false; g.vertex_count()];
    for class in classes {
        for &v in class {
            covered[v] = true;
        }
    }
    for v in 0..g.vertex_count() {
        if (in_a[v] ^ in_b[v]) && !covered[v] {
            return false;
        }
    }
    classes
        .iter()
        .all(|class| tokens_alternate(&class_tokens(g, class, in_a, in_b)))
}

/// Number of components meeting A union B, counting an uncovered vertex of
/// A intersect B as its own empty component.
fn k_prime_from_classes(
    g: &PlanarGraph,
    classes: &[Vec<usize>],
    in_a: &[bool],
    in_b: &[bool],
) -> i64 {
    let mut covered = vec![false; g.vertex_count()];
    let mut k = 0i64;
    for class in classes {
        if class.iter().any(|&v| in_a[v] || in_b[v]) {
            k += 1;
        }
        for &v in class {
            covered[v] = true;
        }
    }
    for v in 0..g.vertex_count() {
        if in_a[v] && in_b[v] && !covered[v] {
            k += 1;
        }
    }
    k
}

/// Interlacing test for a shadow in Gamma_{A xor B}: every component's
/// attached sources and sinks must alternate around the outer face.
pub fn interlaces(g: &PlanarGraph, omega: &OmegaPair, a: &[usize], b: &[usize]) -> bool {
    let (in_a, in_b) = terminal_flags(g, a, b);
    let classes = Components::of(g, omega.support()).boundary_classes(g);
    image_condition(g, &classes, &in_a, &in_b)
}

/// Closed-form unnormalized weight of a shadow under the induced alternating
/// flow measure: `2^(|A| - k') |E_0(omega)| x^{omega1} x^{2 omega2}
/// (1-x^2)^{rest}`.
pub fn induced_flow_weight(g: &PlanarGraph, omega: &OmegaPair, a: &[usize], b: &[usize]) -> Rat {
    let (in_a, in_b) = terminal_flags(g, a, b);
    let classes = Components::of(g, omega.support()).boundary_classes(g);
    let k_prime = k_prime_from_classes(g, &classes, &in_a, &in_b);
    pow2(a.len() as i64 - k_prime) * crate::currents::double_current_weight(g, omega)
}

/// Mass of every shadow with a fixed source parity, aggregated by the
/// partition its components induce on the boundary. `W(S, sigma) =
/// |E_0(S)| * (sum over odd parts of S with boundary sigma of x^{omega1}
/// x^{2(S - omega1)}) * (1-x^2)^{E - S}` summed per partition signature.
/// Everything a flow partition function or a boundary connection event needs
/// can be read off this table.
pub struct GammaAggregates {
    pub sigma: Vec<usize>,
    by_partition: BTreeMap<Vec<Vec<usize>>, Rat>,
    pub prod_one_minus_x2: Rat,
}

pub fn aggregate_gamma(g: &PlanarGraph, sigma: &[usize]) -> Result<GammaAggregates> {
    let m = g.edge_count();
    if m > crate::currents::GAMMA_EDGE_CAP {
        return Err(Error::capacity(
            "Gamma aggregation",
            crate::currents::GAMMA_EDGE_CAP,
        ));
    }
    let mut sigma_sorted = sigma.to_vec();
    sigma_sorted.sort_unstable();
    sigma_sorted.dedup();
    if sigma_sorted.len() != sigma.len() {
        return Err(Error::OrderingViolation(
            "source set repeats a vertex".into(),
        ));
    }
    let one_m_x2: Vec<Rat> = (0..m).map(|e| Rat::one() - g.x(e) * g.x(e)).collect();
    let mut in_sigma = vec![false; g.vertex_count()];
    for &v in &sigma_sorted {
        if v >= g.vertex_count() {
            return Err(Error::IndexOutOfRange(format!("source vertex {v}")));
        }
        in_sigma[v] = true;
    }

    let mut by_partition: BTreeMap<Vec<Vec<usize>>, Rat> = BTreeMap::new();
    let n = g.vertex_count();
    // Scratch arrays reused across subsets.
    let mut parent_edge = vec![usize::MAX; n];
    let mut parent_vertex = vec![usize::MAX; n];
    let mut comp_root = vec![usize::MAX; n];

    for mask in 0u64..1u64 << m {
        let support = EdgeSet(mask);
        // Forest of the support by BFS; roots get themselves.
        for v in 0..n {
            parent_edge[v] = usize::MAX;
            parent_vertex[v] = usize::MAX;
            comp_root[v] = usize::MAX;
        }
        let mut vertex_count = 0usize;
        let mut comp_count = 0usize;
        let mut forest = EdgeSet::EMPTY;
        let touched: Vec<usize> = {
            let mut t = Vec::new();
            let mut seen = vec![false; n];
            for e in support.iter() {
                for w in [g.edge(e).u, g.edge(e).v] {
                    if !seen[w] {
                        seen[w] = true;
                        t.push(w);
                    }
                }
            }
            t
        };
        for &start in &touched {
            if comp_root[start] != usize::MAX {
                continue;
            }
            comp_count += 1;
            comp_root[start] = start;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                vertex_count += 1;
                for &e in g.rotation(v) {
                    if !support.contains(e) {
                        continue;
                    }
                    let w = g.edge(e).other(v);
                    if comp_root[w] == usize::MAX {
                        comp_root[w] = start;
                        parent_edge[w] = e;
                        parent_vertex[w] = v;
                        forest.insert(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        // Parity feasibility: sigma inside the support, evenly per component.
        let mut feasible = true;
        let mut parity: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in &sigma_sorted {
            if comp_root[v] == usize::MAX {
                feasible = false;
                break;
            }
            *parity.entry(comp_root[v]).or_insert(0) += 1;
        }
        if !feasible || parity.values().any(|&c| c % 2 == 1) {
            continue;
        }
        // Base member of the coset: xor of forest paths to component roots.
        let mut omega1 = EdgeSet::EMPTY;
        for &v in &sigma_sorted {
            let mut w = v;
            while parent_edge[w] != usize::MAX {
                omega1.toggle(parent_edge[w]);
                w = parent_vertex[w];
            }
        }
        let chords: Vec<usize> = support.minus(forest).iter().collect();
        let cycles: Vec<EdgeSet> = chords
            .iter()
            .map(|&e| {
                let mut c = EdgeSet::singleton(e);
                for mut w in [g.edge(e).u, g.edge(e).v] {
                    while parent_edge[w] != usize::MAX {
                        c.toggle(parent_edge[w]);
                        w = parent_vertex[w];
                    }
                }
                c
            })
            .collect();
        // Sum of x^{omega1} x^{2(S-omega1)} over the coset, by Gray toggles.
        let mut term = Rat::one();
        for e in support.iter() {
            term *= if omega1.contains(e) {
                g.x(e).clone()
            } else {
                g.x(e) * g.x(e)
            };
        }
        let mut coset_sum = term.clone();
        let mut current = omega1;
        for i in 1u64..1u64 << cycles.len() {
            let bit = i.trailing_zeros() as usize;
            for e in cycles[bit].iter() {
                if current.contains(e) {
                    term *= g.x(e);
                } else {
                    term /= g.x(e);
                }
                current.toggle(e);
            }
            coset_sum += &term;
        }
        // |E_0(S)| and the complement factor.
        let cyclomatic = support.len() + comp_count - vertex_count;
        let mut weight = pow2(cyclomatic as i64) * coset_sum;
        for e in g.all_edges().minus(support).iter() {
            weight *= &one_m_x2[e];
        }
        // Partition signature over the boundary.
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(v, _) in g.boundary() {
            if comp_root[v] != usize::MAX {
                by_root.entry(comp_root[v]).or_default().push(v);
            }
        }
        let mut classes: Vec<Vec<usize>> = by_root.into_values().collect();
        for c in classes.iter_mut() {
            c.sort_unstable();
        }
        classes.sort();
        *by_partition.entry(classes).or_insert_with(Rat::zero) += weight;
    }

    let prod_one_minus_x2 = one_m_x2.iter().fold(Rat::one(), |acc, t| acc * t);
    Ok(GammaAggregates {
        sigma: sigma_sorted,
        by_partition,
        prod_one_minus_x2,
    })
}

impl GammaAggregates {
    /// Total induced double-current mass; equals `S_sigma * S_0` exactly.
    pub fn total_mass(&self) -> Rat {
        self.by_partition
            .values()
            .fold(Rat::zero(), |acc, w| acc + w)
    }

    /// Mass of a boundary-partition event.
    pub fn event_mass<F: Fn(&[Vec<usize>]) -> bool>(&self, pred: F) -> Rat {
        self.by_partition
            .iter()
            .filter(|(classes, _)| pred(classes))
            .fold(Rat::zero(), |acc, (_, w)| acc + w)
    }

    /// `Z^{A,B}` through the induced-measure formula, for any A, B with
    /// A xor B = sigma.
    pub fn z_aflow(&self, g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<Rat> {
        DirectedModification::new(g).check_terminals(a, b)?;
        let (in_a, in_b) = terminal_flags(g, a, b);
        let mut expect: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| in_a[v] ^ in_b[v])
            .collect();
        expect.sort_unstable();
        if expect != self.sigma {
            return Err(Error::OrderingViolation(format!(
                "A xor B = {expect:?} does not match the aggregated sigma {:?}",
                self.sigma
            )));
        }
        let mut z_bar = Rat::zero();
        for (classes, w) in &self.by_partition {
            if image_condition(g, classes, &in_a, &in_b) {
                let k_prime = k_prime_from_classes(g, classes, &in_a, &in_b);
                z_bar += pow2(a.len() as i64 - k_prime) * w;
            }
        }
        Ok(z_bar / &self.prod_one_minus_x2)
    }
}

/// `Z^{A,B}` through the projection route, one-shot.
pub fn z_aflow_projected(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<Rat> {
    let (in_a, in_b) = terminal_flags(g, a, b);
    let sigma: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| in_a[v] ^ in_b[v])
        .collect();
    aggregate_gamma(g, &sigma)?.z_aflow(g, a, b)
}

/// `Z^{A,B}`, picking the enumeration route on small graphs and the
/// projection route on larger ones.
pub fn z_aflow_auto(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<Rat> {
    if g.edge_count() <= 8 {
        let dm = DirectedModification::new(g);
        z_aflow(&dm, a, b)
    } else {
        z_aflow_projected(g, a, b)
    }
}

/// Does some alternating flow with terminals A, B exist? Uses the early-exit
/// backtracking search.
pub fn flow_exists(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<bool> {
    let dm = DirectedModification::with_options(g, None, StubCorner::FirstVisit);
    FlowSearch::new(&dm, a, b)?.any_flow()
}

/// Expected `S_sigma * S_0` mass for the partition-of-unity cross-check.
pub fn expected_total_mass(g: &PlanarGraph, sigma: &[usize]) -> Result<Rat> {
    Ok(even_polynomial(g, sigma)? * even_polynomial(g, &[])?)
}

/// Pointwise pushforward of the flow measure: total flow weight per shadow.
pub fn pushforward(
    dm: &DirectedModification,
    a: &[usize],
    b: &[usize],
) -> Result<BTreeMap<OmegaPair, Rat>> {
    let mut map: BTreeMap<OmegaPair, Rat> = BTreeMap::new();
    FlowSearch::new(dm, a, b)?.for_each(|states| {
        let omega = project_states(states);
        let w = flow_weight_states(dm, states, a, b);
        *map.entry(omega).or_insert_with(Rat::zero) += w;
        ControlFlow::Continue(())
    })?;
    Ok(map)
}

/// Sanity helper used by tests and the verify suites: `|E_0|`-weighted count
/// of shadows with a given support.
pub fn sourceless_count(g: &PlanarGraph, support: EdgeSet) -> u64 {
    count_sourceless(g, support)
}

/// The factor `prod over E of (1 - x^2)` converting a raw flow partition
/// function Z into its barred normalization `Z_bar = Z * factor`, in which
/// the induced-measure formula is stated.
pub fn barred_factor(g: &PlanarGraph) -> Rat {
    (0..g.edge_count()).fold(Rat::one(), |acc, e| acc * (Rat::one() - g.x(e) * g.x(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::currents::gamma_space;
    use crate::rational::{int, rat};

    #[test]
    fn single_edge_partition_functions() {
        let x = rat(1, 2);
        let g = corpus::single_edge(&x);
        let dm = DirectedModification::new(&g);
        let z00 = z_aflow(&dm, &[], &[]).unwrap();
        assert_eq!(z00, rat(4, 3)); // 1/(1 - x^2)
        let zab = z_aflow(&dm, &[0], &[1]).unwrap();
        assert_eq!(zab, rat(2, 3)); // x/(1 - x^2)
        assert_eq!(zab / z00, x);
    }

    #[test]
    fn single_edge_flow_weights_both_orientations() {
        let g = corpus::single_edge(&rat(1, 2));
        // Middle oriented 0 -> 1: a single flow in state m.
        let dm = DirectedModification::with_options(&g, Some(&[true]), StubCorner::FirstVisit);
        let flows = enumerate_flows(&dm, &[0], &[1]).unwrap();
        assert_eq!(flows.len(), 1);
        assert_eq!(flows[0].states, vec![1]);
        assert_eq!(flow_weight(&dm, &flows[0]), rat(2, 3));
        assert_eq!(flows[0].to_csv(), "edge_id,state\n0,m\n");
        // Reversed middle: states s1, s2 and s1s2m with weights 1/4, 1/4, 1/6.
        let dm = DirectedModification::with_options(&g, Some(&[false]), StubCorner::FirstVisit);
        let mut flows = enumerate_flows(&dm, &[0], &[1]).unwrap();
        flows.sort_by_key(|f| f.states[0]);
        let weights: Vec<Rat> = flows.iter().map(|f| flow_weight(&dm, f)).collect();
        assert_eq!(
            flows.iter().map(|f| f.states[0]).collect::<Vec<_>>(),
            vec![2, 4, 7]
        );
        assert_eq!(weights, vec![rat(1, 4), rat(1, 4), rat(1, 6)]);
        assert_eq!(z_aflow(&dm, &[0], &[1]).unwrap(), rat(2, 3));
    }

    #[test]
    fn empty_flow_is_present_with_weight_one() {
        let g = corpus::cycle4_mixed();
        let dm = DirectedModification::new(&g);
        let flows = enumerate_flows(&dm, &[], &[]).unwrap();
        let empty = flows
            .iter()
            .find(|f| f.states.iter().all(|&s| s == 0))
            .unwrap();
        assert_eq!(flow_weight(&dm, empty), int(1));
    }

    #[test]
    fn identical_terminal_sets_depend_on_coloring_only_through_flows() {
        // A = B = {u,v} on the single edge: Z = (1+x^2)/(1-x^2) when the
        // colors agree and 1/(1-x^2)*(1-x^2) = 1 when they differ.
        let x = rat(1, 2);
        let g = corpus::single_edge(&x);
        let same = [Color::White, Color::White];
        let diff = [Color::White, Color::Black];
        let g_same = g.with_coloring(&same).unwrap();
        let g_diff = g.with_coloring(&diff).unwrap();
        let z_same = z_aflow(&DirectedModification::new(&g_same), &[0, 1], &[0, 1]).unwrap();
        let z_diff = z_aflow(&DirectedModification::new(&g_diff), &[0, 1], &[0, 1]).unwrap();
        assert_eq!(z_same, rat(5, 4) / rat(3, 4)); // (1+x^2)/(1-x^2)
        assert_eq!(z_diff, int(1));
    }

    #[test]
    fn two_point_ratio_on_triangle() {
        let g = corpus::triangle_uniform(&rat(1, 2));
        let dm = DirectedModification::new(&g);
        let z00 = z_aflow(&dm, &[], &[]).unwrap();
        let zab = z_aflow(&dm, &[0], &[1]).unwrap();
        assert_eq!(zab / z00, rat(2, 3));
    }

    #[test]
    fn z_barred_equals_squared_polynomial() {
        // Z_bar^{0,0} = S_0^2.
        for (name, g) in corpus::acceptance_corpus() {
            if g.edge_count() > 8 {
                continue;
            }
            let dm = DirectedModification::new(&g);
            let z = z_aflow(&dm, &[], &[]).unwrap();
            let mut bar = z;
            for e in 0..g.edge_count() {
                bar *= Rat::one() - g.x(e) * g.x(e);
            }
            let s0 = even_polynomial(&g, &[]).unwrap();
            assert_eq!(bar, &s0 * &s0, "{name}");
        }
    }

    #[test]
    fn projection_states() {
        assert_eq!(
            project_states(&[1]),
            OmegaPair::new(EdgeSet::singleton(0), EdgeSet::EMPTY)
        );
        assert_eq!(
            project_states(&[3]),
            OmegaPair::new(EdgeSet::EMPTY, EdgeSet::singleton(0))
        );
        assert_eq!(
            project_states(&[0]),
            OmegaPair::new(EdgeSet::EMPTY, EdgeSet::EMPTY)
        );
        assert_eq!(
            project_states(&[7, 5, 0]),
            OmegaPair::new(EdgeSet::singleton(0), EdgeSet::singleton(1))
        );
    }

    #[test]
    fn pushforward_matches_induced_formula_small() {
        for (name, g) in corpus::acceptance_corpus() {
            if g.edge_count() > 6 {
                continue;
            }
            let bnd = g.boundary_vertices();
            let mut terminal_sets: Vec<(Vec<usize>, Vec<usize>)> =
                vec![(vec![], vec![]), (vec![bnd[0]], vec![bnd[1]])];
            terminal_sets.push((vec![bnd[0]], vec![bnd[0]]));
            if bnd.len() >= 4 {
                terminal_sets.push((vec![bnd[0], bnd[1]], vec![bnd[3], bnd[2]]));
            }
            for (a, b) in terminal_sets {
                let dm = DirectedModification::new(&g);
                let factor = barred_factor(&g);
                let push = pushforward(&dm, &a, &b).unwrap();
                for (omega, total) in &push {
                    let expect = induced_flow_weight(&g, omega, &a, &b);
                    assert_eq!(
                        total * &factor,
                        expect,
                        "{name} A={a:?} B={b:?} omega={omega:?}"
                    );
                }
                // Support matches the interlacing characterization.
                let mut sigma: Vec<usize> = vec![];
                for &v in bnd.iter() {
                    let ina = a.contains(&v);
                    let inb = b.contains(&v);
                    if ina ^ inb {
                        sigma.push(v);
                    }
                }
                let image: Vec<OmegaPair> = gamma_space(&g, &sigma)
                    .unwrap()
                    .filter(|w| interlaces(&g, w, &a, &b))
                    .collect();
                let mut support: Vec<OmegaPair> = push.keys().copied().collect();
                support.sort();
                let mut image_sorted = image;
                image_sorted.sort();
                assert_eq!(support, image_sorted, "{name} A={a:?} B={b:?} image");
            }
        }
    }

    #[test]
    fn aggregated_route_matches_enumeration() {
        for (name, g) in corpus::acceptance_corpus() {
            if g.edge_count() > 8 {
                continue;
            }
            let bnd = g.boundary_vertices();
            let dm = DirectedModification::new(&g);
            let mut cases: Vec<(Vec<usize>, Vec<usize>)> = vec![
                (vec![], vec![]),
                (vec![bnd[0]], vec![bnd[1]]),
                (vec![bnd[1]], vec![bnd[1]]),
            ];
            if bnd.len() >= 4 {
                cases.push((vec![bnd[0], bnd[1]], vec![bnd[3], bnd[2]]));
                cases.push((vec![bnd[0], bnd[2]], vec![bnd[1], bnd[3]]));
            }
            for (a, b) in cases {
                let raw = z_aflow(&dm, &a, &b).unwrap();
                let projected = z_aflow_projected(&g, &a, &b).unwrap();
                assert_eq!(raw, projected, "{name} A={a:?} B={b:?}");
            }
        }
    }

    #[test]
    fn induced_weight_values() {
        let x = rat(1, 2);
        let g = corpus::single_edge(&x);
        let e = EdgeSet::singleton(0);
        // 2^(1-1) * 1 * x with nothing outside the shadow.
        assert_eq!(
            induced_flow_weight(&g, &OmegaPair::new(e, EdgeSet::EMPTY), &[0], &[1]),
            x.clone()
        );
        // A = B = empty, omega2 = {e}: plain x^2.
        assert_eq!(
            induced_flow_weight(&g, &OmegaPair::new(EdgeSet::EMPTY, e), &[], &[]),
            &x * &x
        );
        // Triangle cycle with no terminals: 2 * x^3.
        let g = corpus::triangle_uniform(&x);
        assert_eq!(
            induced_flow_weight(&g, &OmegaPair::new(g.all_edges(), EdgeSet::EMPTY), &[], &[]),
            rat(2, 1) * &x * &x * &x
        );
    }

    #[test]
    fn interlacing_patterns() {
        let g = corpus::cycle4_mixed();
        // Single component containing all four terminals: ++-- fails.
        let all = OmegaPair::new(g.all_edges(), EdgeSet::EMPTY);
        assert!(!interlaces(&g, &all, &[0, 1], &[3, 2]));
        // Two components pairing 0-1 and 3-2 via opposite edges: each has
        // pattern +-.
        let e01 = g.edge_between(0, 1).unwrap();
        let e23 = g.edge_between(2, 3).unwrap();
        let split = OmegaPair::new(EdgeSet::from_iter([e01, e23]), EdgeSet::EMPTY);
        assert!(interlaces(&g, &split, &[0, 3], &[1, 2]));
        // k = 1: always true.
        let e12 = g.edge_between(1, 2).unwrap();
        let path = OmegaPair::new(EdgeSet::from_iter([e01, e12]), EdgeSet::EMPTY);
        assert!(interlaces(&g, &path, &[0], &[2]));
    }

    #[test]
    fn orientation_and_corner_invariance_small() {
        for (name, g) in corpus::acceptance_corpus() {
            if g.edge_count() > 6 {
                continue;
            }
            let bnd = g.boundary_vertices();
            let flipped: Vec<bool> = g.edges().iter().map(|e| e.u >= e.v).collect();
            let dm_default = DirectedModification::new(&g);
            let dm_flipped =
                DirectedModification::with_options(&g, Some(&flipped), StubCorner::FirstVisit);
            let dm_corner = DirectedModification::with_options(&g, None, StubCorner::LastVisit);
            for (a, b) in [(vec![], vec![]), (vec![bnd[0]], vec![bnd[1]])] {
                let z0 = z_aflow(&dm_default, &a, &b).unwrap();
                let z1 = z_aflow(&dm_flipped, &a, &b).unwrap();
                let z2 = z_aflow(&dm_corner, &a, &b).unwrap();
                assert_eq!(z0, z1, "{name} orientation");
                assert_eq!(z0, z2, "{name} corner");
            }
        }
    }

    #[test]
    fn path_terminal_existence() {
        let g = corpus::path3_mixed();
        assert!(flow_exists(&g, &[0], &[2]).unwrap());
        assert!(flow_exists(&g, &[0], &[0]).unwrap());
        assert!(flow_exists(&g, &[], &[]).unwrap());
    }

    #[test]
    fn node_budget_is_enforced() {
        let g = corpus::grid3_mixed();
        let dm = DirectedModification::new(&g);
        let search = FlowSearch::new(&dm, &[0], &[8]).unwrap().with_budget(50);
        assert!(matches!(
            search.partition_function(),
            Err(crate::error::Error::Capacity { .. })
        ));
    }

    #[test]
    fn single_middle_flip_preserves_z() {
        let g = corpus::cycle4_mixed();
        for flip in 0..4usize {
            let orient: Vec<bool> = (0..4)
                .map(|e| (g.edge(e).u < g.edge(e).v) ^ (e == flip))
                .collect();
            let dm = DirectedModification::with_options(&g, Some(&orient), StubCorner::FirstVisit);
            let base = DirectedModification::new(&g);
            for (a, b) in [
                (vec![], vec![]),
                (vec![0], vec![2]),
                (vec![0, 1], vec![3, 2]),
            ] {
                assert_eq!(
                    z_aflow(&dm, &a, &b).unwrap(),
                    z_aflow(&base, &a, &b).unwrap(),
                    "flip {flip} A={a:?} B={b:?}"
                );
            }
        }
    }

    #[test]
    fn aggregate_total_mass_is_product_of_polynomials() {
        for (name, g) in corpus::acceptance_corpus() {
            if g.edge_count() > 12 {
                continue;
            }
            let bnd = g.boundary_vertices();
            for sigma in [vec![], vec![bnd[0], bnd[1]]] {
                let agg = aggregate_gamma(&g, &sigma).unwrap();
                assert_eq!(
                    agg.total_mass(),
                    expected_total_mass(&g, &sigma).unwrap(),
                    "{name} sigma={sigma:?}"
                );
            }
        }
    }
}
