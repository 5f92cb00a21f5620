//! Current configuration spaces and the induced single/double random current
//! measures. Integer currents are never materialized: every event and measure
//! factors through the pair (odd edges, even nonzero edges), which is a
//! finite space.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, PlanarGraph};
use crate::ising::{enumerate_even_subgraphs, even_polynomial};
use crate::rational::{sqrt_exact, to_f64, Rat};

/// Edge cap for full enumeration of a Gamma space.
pub const GAMMA_EDGE_CAP: usize = 24;
/// Edge cap for the two-current convolution oracle.
pub const CONVOLUTION_EDGE_CAP: usize = 10;
/// Edge cap for brute-force sourceless counting.
pub const BRUTE_COUNT_CAP: usize = 20;

/// The shadow of a current: odd-valued edges and even-positive-valued edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmegaPair {
    pub omega1: EdgeSet,
    pub omega2: EdgeSet,
}

impl OmegaPair {
    pub fn new(omega1: EdgeSet, omega2: EdgeSet) -> OmegaPair {
        debug_assert!(omega1.intersect(omega2).is_empty());
        OmegaPair { omega1, omega2 }
    }

    /// The union, identified with a plain edge set.
    pub fn support(&self) -> EdgeSet {
        self.omega1.union(self.omega2)
    }
}

/// Odd-degree vertex set of an edge set.
pub fn sources_of(g: &PlanarGraph, edges: EdgeSet) -> Vec<usize> {
    let mut deg = vec![0usize; g.vertex_count()];
    for e in edges.iter() {
        deg[g.edge(e).u] += 1;
        deg[g.edge(e).v] += 1;
    }
    (0..g.vertex_count()).filter(|&v| deg[v] % 2 == 1).collect()
}

/// Union-find over vertices.
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let r = self.find(self.parent[v]);
            self.parent[v] = r;
        }
        self.parent[v]
    }

    pub fn union(&mut self, u: usize, v: usize) {
        let (ru, rv) = (self.find(u), self.find(v));
        if ru != rv {
            self.parent[ru] = rv;
        }
    }
}

/// Connected-component structure of an edge set.
pub struct Components {
    root: Vec<Option<usize>>,
    /// Number of components (of the edge set, isolated vertices not counted).
    pub count: usize,
    /// Number of touched vertices.
    pub vertex_count: usize,
}

impl Components {
    pub fn of(g: &PlanarGraph, edges: EdgeSet) -> Components {
        let mut dsu = Dsu::new(g.vertex_count());
        let mut touched = vec![false; g.vertex_count()];
        for e in edges.iter() {
            let edge = g.edge(e);
            touched[edge.u] = true;
            touched[edge.v] = true;
            dsu.union(edge.u, edge.v);
        }
        let mut root = vec![None; g.vertex_count()];
        let mut reps = std::collections::BTreeSet::new();
        let mut vertex_count = 0;
        for v in 0..g.vertex_count() {
            if touched[v] {
                vertex_count += 1;
                let r = dsu.find(v);
                root[v] = Some(r);
                reps.insert(r);
            }
        }
        Components {
            root,
            count: reps.len(),
            vertex_count,
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.root[v].is_some()
    }

    pub fn same(&self, u: usize, v: usize) -> bool {
        match (self.root[u], self.root[v]) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Classes restricted to the declared boundary, each sorted, the list
    /// sorted; the canonical signature used by the aggregation caches.
    pub fn boundary_classes(&self, g: &PlanarGraph) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(v, _) in g.boundary() {
            if let Some(r) = self.root[v] {
                by_root.entry(r).or_default().push(v);
            }
        }
        let mut classes: Vec<Vec<usize>> = by_root.into_values().collect();
        for c in classes.iter_mut() {
            c.sort_unstable();
        }
        classes.sort();
        classes
    }
}

/// `|E_0(omega)| = 2^(|omega| - |V(omega)| + k(omega))`.
pub fn count_sourceless(g: &PlanarGraph, edges: EdgeSet) -> u64 {
    let c = Components::of(g, edges);
    1u64 << (edges.len() + c.count - c.vertex_count)
}

/// Brute-force count of even-degree subsets of `edges`.
pub fn count_sourceless_brute(g: &PlanarGraph, edges: EdgeSet) -> Result<u64> {
    if edges.len() > BRUTE_COUNT_CAP {
        return Err(Error::capacity(
            "brute-force sourceless count",
            BRUTE_COUNT_CAP,
        ));
    }
    let ids: Vec<usize> = edges.iter().collect();
    let mut count = 0;
    for mask in 0u64..1 << ids.len() {
        let subset: EdgeSet = ids
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if sources_of(g, subset).is_empty() {
            count += 1;
        }
    }
    Ok(count)
}

/// Lazily yields every element of Gamma_A exactly once.
pub fn gamma_space(g: &PlanarGraph, sources: &[usize]) -> Result<impl Iterator<Item = OmegaPair>> {
    if g.edge_count() > GAMMA_EDGE_CAP {
        return Err(Error::capacity("Gamma space enumeration", GAMMA_EDGE_CAP));
    }
    let all = g.all_edges();
    let odd_sets: Vec<EdgeSet> = enumerate_even_subgraphs(g, sources)?.collect();
    let mut outer = odd_sets.into_iter();
    let mut current: Option<(EdgeSet, Vec<usize>, u64)> = None;
    Ok(std::iter::from_fn(move || loop {
        if let Some((omega1, free, mask)) = current.as_mut() {
            if *mask < 1u64 << free.len() {
                let omega2: EdgeSet = free
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| *mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                *mask += 1;
                return Some(OmegaPair::new(*omega1, omega2));
            }
            current = None;
        }
        let omega1 = outer.next()?;
        let free: Vec<usize> = all.minus(omega1).iter().collect();
        current = Some((omega1, free, 0));
    }))
}

/// Unnormalized induced double-current weight of a pair.
pub fn double_current_weight(g: &PlanarGraph, omega: &OmegaPair) -> Rat {
    let mut w = Rat::from_integer(BigInt::from(count_sourceless(g, omega.support())));
    for e in omega.omega1.iter() {
        w *= g.x(e);
    }
    for e in omega.omega2.iter() {
        w *= g.x(e) * g.x(e);
    }
    for e in g.all_edges().minus(omega.support()).iter() {
        w *= Rat::one() - g.x(e) * g.x(e);
    }
    w
}

/// Decidable event on the component partition of omega1 union omega2.
#[derive(Debug, Clone)]
pub enum EventPredicate {
    True,
    /// u and v lie in the same component.
    Connected(usize, usize),
    /// All listed vertices lie in one component.
    AllConnected(Vec<usize>),
    /// a_i connected to b_i for every i, and a_i disconnected from b_j for
    /// every i != j.
    Parallel {
        a: Vec<usize>,
        b: Vec<usize>,
    },
    Not(Box<EventPredicate>),
    And(Vec<EventPredicate>),
    Or(Vec<EventPredicate>),
}

impl EventPredicate {
    pub fn eval(&self, comps: &Components) -> bool {
        match self {
            EventPredicate::True => true,
            EventPredicate::Connected(u, v) => *u == *v || comps.same(*u, *v),
            EventPredicate::AllConnected(vs) => vs
                .windows(2)
                .all(|w| w[0] == w[1] || comps.same(w[0], w[1])),
            EventPredicate::Parallel { a, b } => {
                for (i, &ai) in a.iter().enumerate() {
                    for (j, &bj) in b.iter().enumerate() {
                        let conn = ai == bj || comps.same(ai, bj);
                        if (i == j) != conn {
                            return false;
                        }
                    }
                }
                true
            }
            EventPredicate::Not(p) => !p.eval(comps),
            EventPredicate::And(ps) => ps.iter().all(|p| p.eval(comps)),
            EventPredicate::Or(ps) => ps.iter().any(|p| p.eval(comps)),
        }
    }
}

/// Exact probability of an event under the induced double random current
/// measure with source set A. The normalization is `S_A * S_0`.
pub fn double_current_prob(
    g: &PlanarGraph,
    sources: &[usize],
    event: &EventPredicate,
) -> Result<Rat> {
    let s_a = even_polynomial(g, sources)?;
    if s_a.is_zero() {
        return Err(Error::InfeasibleSources(sources.to_vec()));
    }
    let s_0 = even_polynomial(g, &[])?;
    let mut mass = Rat::zero();
    for omega in gamma_space(g, sources)? {
        let comps = Components::of(g, omega.support());
        if event.eval(&comps) {
            mass += double_current_weight(g, &omega);
        }
    }
    Ok(mass / (s_a * s_0))
}

/// Checks that reading `a` then `b` reversed is a counterclockwise cyclic
/// subsequence of the boundary (the contiguity hypothesis for M matrices and
/// parallel connections). All vertices must be distinct boundary vertices.
pub fn validate_contiguous(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::OrderingViolation("need |A| = |B| >= 1".into()));
    }
    let seq: Vec<usize> = a.iter().chain(b.iter().rev()).copied().collect();
    let mut positions = Vec::new();
    for &v in &seq {
        match g.boundary_pos(v) {
            Some(p) => positions.push(p),
            None => return Err(Error::NotBoundary(v)),
        }
    }
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != positions.len() {
        return Err(Error::OrderingViolation(
            "A and B must be disjoint vertex sets".into(),
        ));
    }
    let descents = (0..positions.len())
        .filter(|&i| positions[i] > positions[(i + 1) % positions.len()])
        .count();
    if descents > 1 {
        return Err(Error::OrderingViolation(format!(
            "a_1..a_k, b_k..b_1 = {seq:?} is not a counterclockwise order on the boundary"
        )));
    }
    Ok(())
}

/// Probability of parallel and disjoint connections between the contiguous
/// boundary sets A and B under the double current measure with sources
/// A union B.
pub fn prob_parallel(g: &PlanarGraph, a: &[usize], b: &[usize]) -> Result<Rat> {
    validate_contiguous(g, a, b)?;
    let mut sources: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    sources.sort_unstable();
    let event = EventPredicate::Parallel {
        a: a.to_vec(),
        b: b.to_vec(),
    };
    double_current_prob(g, &sources, &event)
}

/// Rational y_e with x_e^2 + y_e^2 = 1, when it exists.
pub fn pythagorean_y(x: &Rat) -> Result<Rat> {
    sqrt_exact(&(Rat::one() - x * x))
        .ok_or_else(|| Error::NonPythagorean(crate::rational::format_rat(x)))
}

/// Unnormalized single-current induced weight, exact (requires Pythagorean
/// weights).
pub fn single_current_weight_exact(g: &PlanarGraph, omega: &OmegaPair) -> Result<Rat> {
    let mut w = Rat::one();
    for e in 0..g.edge_count() {
        let x = g.x(e);
        let y = pythagorean_y(x)?;
        if omega.omega1.contains(e) {
            w *= x;
        } else if omega.omega2.contains(e) {
            w *= Rat::one() - y;
        } else {
            w *= y;
        }
    }
    Ok(w)
}

/// Floating-point variant for general weights.
pub fn single_current_weight_f64(g: &PlanarGraph, omega: &OmegaPair) -> f64 {
    let mut w = 1.0;
    for e in 0..g.edge_count() {
        let x = to_f64(g.x(e));
        let y = (1.0 - x * x).sqrt();
        if omega.omega1.contains(e) {
            w *= x;
        } else if omega.omega2.contains(e) {
            w *= 1.0 - y;
        } else {
            w *= y;
        }
    }
    w
}

/// The shadow of a sum of two currents with the given shadows.
pub fn combine_pair(w1: &OmegaPair, w2: &OmegaPair) -> OmegaPair {
    let odd = w1.omega1.sym_diff(w2.omega1);
    let nonzero = w1.support().union(w2.support());
    OmegaPair::new(odd, nonzero.minus(odd))
}

/// Distribution of the shadow of n1 + n2 for independent single currents
/// with sources A and the empty set, by direct convolution. Exact; requires
/// Pythagorean weights.
pub fn convolve_two_currents(
    g: &PlanarGraph,
    sources: &[usize],
) -> Result<BTreeMap<OmegaPair, Rat>> {
    if g.edge_count() > CONVOLUTION_EDGE_CAP {
        return Err(Error::capacity(
            "two-current convolution",
            CONVOLUTION_EDGE_CAP,
        ));
    }
    let pairs_a: Vec<(OmegaPair, Rat)> = gamma_space(g, sources)?
        .map(|w| single_current_weight_exact(g, &w).map(|wt| (w, wt)))
        .collect::<Result<_>>()?;
    let pairs_0: Vec<(OmegaPair, Rat)> = gamma_space(g, &[])?
        .map(|w| single_current_weight_exact(g, &w).map(|wt| (w, wt)))
        .collect::<Result<_>>()?;
    let mut dist: BTreeMap<OmegaPair, Rat> = BTreeMap::new();
    let mut total = Rat::zero();
    for (w1, wt1) in &pairs_a {
        for (w2, wt2) in &pairs_0 {
            let w = combine_pair(w1, w2);
            let wt = wt1 * wt2;
            total += &wt;
            *dist.entry(w).or_insert_with(Rat::zero) += wt;
        }
    }
    if total.is_zero() {
        return Err(Error::InfeasibleSources(sources.to_vec()));
    }
    for v in dist.values_mut() {
        *v /= &total;
    }
    Ok(dist)
}

/// Normalized closed-form induced double-current distribution on Gamma_A.
pub fn induced_double_current_distribution(
    g: &PlanarGraph,
    sources: &[usize],
) -> Result<BTreeMap<OmegaPair, Rat>> {
    let s_a = even_polynomial(g, sources)?;
    if s_a.is_zero() {
        return Err(Error::InfeasibleSources(sources.to_vec()));
    }
    let norm = s_a * even_polynomial(g, &[])?;
    let mut dist = BTreeMap::new();
    for omega in gamma_space(g, sources)? {
        dist.insert(omega, double_current_weight(g, &omega) / &norm);
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// I.i.d. draws from the exact categorical distribution over Gamma_A.
    Exact,
    /// Reversible Metropolis chain; no enumeration, so no capacity cap.
    Mcmc,
}

/// Seeded sampler for the induced double random current measure.
pub fn sample_double_current(
    g: &PlanarGraph,
    sources: &[usize],
    count: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Vec<OmegaPair>> {
    let s_a = even_polynomial(g, sources)?;
    if s_a.is_zero() {
        return Err(Error::InfeasibleSources(sources.to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        SampleMode::Exact => {
            let states: Vec<OmegaPair> = gamma_space(g, sources)?.collect();
            // Scale every weight by prod q_e^2 to land in the integers.
            let mut scale = BigInt::one();
            for e in 0..g.edge_count() {
                scale *= g.x(e).denom() * g.x(e).denom();
            }
            let scaled: Vec<BigUint> = states
                .iter()
                .map(|w| {
                    let v = double_current_weight(g, w) * &scale;
                    debug_assert!(v.is_integer() && !v.is_negative());
                    v.to_integer()
                        .to_biguint()
                        .expect("nonnegative integer weight")
                })
                .collect();
            let mut cumulative = Vec::with_capacity(scaled.len());
            let mut acc = BigUint::zero();
            for w in &scaled {
                acc += w;
                cumulative.push(acc.clone());
            }
            let total = acc;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let r = rng.gen_biguint_below(&total);
                let idx = cumulative.partition_point(|c| *c <= r);
                out.push(states[idx]);
            }
            Ok(out)
        }
        SampleMode::Mcmc => Ok(sample_mcmc(g, sources, count, &mut rng)?),
    }
}

fn sample_mcmc(
    g: &PlanarGraph,
    sources: &[usize],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<OmegaPair>> {
    let basis = crate::ising::CycleBasis::new(g);
    let mut omega1 = EdgeSet::EMPTY;
    for &v in sources {
        omega1 = omega1.sym_diff(basis.tree_path_to_root(v));
    }
    if sources.len() % 2 == 1 {
        return Err(Error::InfeasibleSources(sources.to_vec()));
    }
    let mut state = OmegaPair::new(omega1, EdgeSet::EMPTY);
    let mut weight = double_current_weight(g, &state);
    let m = g.edge_count();
    let sweep = m;
    let burn_in = 10 * m * sweep;
    let thin = m * sweep;

    let step = |state: &mut OmegaPair, weight: &mut Rat, rng: &mut ChaCha8Rng| {
        let type_toggle = basis.cycles.is_empty() || rng.gen_bool(0.5);
        if type_toggle {
            // Toggle membership of one edge outside omega1 in omega2.
            let free: Vec<usize> = g.all_edges().minus(state.omega1).iter().collect();
            if free.is_empty() {
                return;
            }
            let e = free[rng.gen_range(0..free.len())];
            let mut proposal = *state;
            proposal.omega2.toggle(e);
            let w_new = double_current_weight(g, &proposal);
            let ratio = &w_new / &*weight;
            if rng.gen::<f64>() < to_f64(&ratio).min(1.0) {
                *state = proposal;
                *weight = w_new;
            }
        } else {
            // Symmetric-difference omega1 with a basis cycle; edges leaving
            // omega1 fall into omega2 or absence by a fair coin each.
            let c = basis.cycles[rng.gen_range(0..basis.cycles.len())];
            let leaving = c.intersect(state.omega1);
            let entering = c.minus(state.omega1);
            let mut proposal = *state;
            proposal.omega1 = state.omega1.sym_diff(c);
            for e in entering.iter() {
                proposal.omega2.remove(e);
            }
            for e in leaving.iter() {
                if rng.gen_bool(0.5) {
                    proposal.omega2.insert(e);
                } else {
                    proposal.omega2.remove(e);
                }
            }
            let w_new = double_current_weight(g, &proposal);
            // Proposal asymmetry: the coin count differs between directions.
            let log2_qratio = leaving.len() as i64 - entering.len() as i64;
            let ratio = &w_new / &*weight * crate::rational::pow2(log2_qratio);
            if rng.gen::<f64>() < to_f64(&ratio).min(1.0) {
                *state = proposal;
                *weight = w_new;
            }
        }
    };

    for _ in 0..burn_in {
        step(&mut state, &mut weight, rng);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..thin {
            step(&mut state, &mut weight, rng);
        }
        out.push(state);
    }
    Ok(out)
}
