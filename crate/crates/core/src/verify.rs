//! Identity suites: every named identity is evaluated on both sides in exact
//! arithmetic and reported as a check row. The CLI `verify` command and the
//! acceptance tests drive these.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::currents::{convolve_two_currents, induced_double_current_distribution, pythagorean_y};
use crate::directed::{DirectedModification, StubCorner};
use crate::error::Result;
use crate::flows::{
    aggregate_gamma, induced_flow_weight, interlaces, pushforward, z_aflow, GammaAggregates,
};
use crate::graph::PlanarGraph;
use crate::ising::{even_polynomial, CorrelationTable};
use crate::linalg::{
    all_minors_nonneg, build_k, build_m, build_n, det_exact, disjoint_paths_exist,
    expand_det_via_pairings, expand_pf_via_pairings, pfaffian_exact,
};
use crate::rational::{format_rat, Rat};

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub params: String,
    pub lhs: String,
    pub rhs: String,
    pub ok: bool,
}

impl Check {
    fn exact(
        suite: &'static str,
        name: &'static str,
        params: String,
        lhs: &Rat,
        rhs: &Rat,
    ) -> Check {
        Check {
            suite,
            name,
            params,
            lhs: format_rat(lhs),
            rhs: format_rat(rhs),
            ok: lhs == rhs,
        }
    }

    fn flag(suite: &'static str, name: &'static str, params: String, ok: bool) -> Check {
        Check {
            suite,
            name,
            params,
            lhs: String::new(),
            rhs: String::new(),
            ok,
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},\"{}\",{},{},{}",
            self.suite,
            self.name,
            self.params,
            self.lhs,
            self.rhs,
            if self.ok { "ok" } else { "FAIL" }
        )
    }
}

fn combos(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(
        items: &[usize],
        start: usize,
        k: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, k, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, k, &mut cur, &mut out);
    out
}

/// Cache of Gamma aggregations per source parity, shared across checks.
pub struct AggregateCache<'g> {
    g: &'g PlanarGraph,
    cache: BTreeMap<Vec<usize>, GammaAggregates>,
}

impl<'g> AggregateCache<'g> {
    pub fn new(g: &'g PlanarGraph) -> AggregateCache<'g> {
        AggregateCache {
            g,
            cache: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, sigma: &[usize]) -> Result<&GammaAggregates> {
        let mut key = sigma.to_vec();
        key.sort_unstable();
        if !self.cache.contains_key(&key) {
            let agg = aggregate_gamma(self.g, &key)?;
            self.cache.insert(key.clone(), agg);
        }
        Ok(self.cache.get(&key).unwrap())
    }
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a
        .iter()
        .filter(|v| !b.contains(v))
        .chain(b.iter().filter(|v| !a.contains(v)))
        .copied()
        .collect();
    out.sort_unstable();
    out
}

/// det N^{A,B} = Z^{A,B} / Z^{0,0} for every A, B of size up to k_max
/// (the partition-function side through the induced-measure route).
pub fn det_suite(g: &PlanarGraph, k_max: usize) -> Result<Vec<Check>> {
    let table = CorrelationTable::new(g)?;
    let mut agg = AggregateCache::new(g);
    let bnd = g.boundary_vertices();
    let z00 = agg.get(&[])?.z_aflow(g, &[], &[])?;
    let mut checks = Vec::new();
    for k in 1..=k_max.min(bnd.len()) {
        for a in combos(&bnd, k) {
            for b in combos(&bnd, k) {
                let n = build_n(&table, &a, &b)?;
                let det = det_exact(&n.entries);
                let z = agg.get(&sym_diff(&a, &b))?.z_aflow(g, &a, &b)?;
                let ratio = z / &z00;
                checks.push(Check::exact(
                    "det",
                    "detN-equals-flow-ratio",
                    format!("A={a:?} B={b:?}"),
                    &det,
                    &ratio,
                ));
                if det < Rat::zero() {
                    checks.push(Check::flag(
                        "det",
                        "detN-nonnegative",
                        format!("A={a:?} B={b:?}"),
                        false,
                    ));
                }
                let expansion = expand_det_via_pairings(&table, &a, &b)?;
                checks.push(Check::exact(
                    "det",
                    "detN-pairing-expansion",
                    format!("A={a:?} B={b:?}"),
                    &det,
                    &expansion,
                ));
            }
        }
    }
    Ok(checks)
}

/// pf K^S = S_S / S_0 for every even boundary subset of size at most 6,
/// plus the crossing-signed pairing expansion.
pub fn pf_suite(g: &PlanarGraph) -> Result<Vec<Check>> {
    let table = CorrelationTable::new(g)?;
    let bnd = g.boundary_vertices();
    let s0 = even_polynomial(g, &[])?;
    let mut checks = Vec::new();
    for k in [2usize, 4, 6] {
        if k > bnd.len() {
            break;
        }
        for s in combos(&bnd, k) {
            let km = build_k(&table, &s)?;
            let pf = pfaffian_exact(&km.entries)?;
            let ratio = even_polynomial(g, &s)? / &s0;
            checks.push(Check::exact(
                "pf",
                "pfK-equals-polynomial-ratio",
                format!("S={s:?}"),
                &pf,
                &ratio,
            ));
            let expansion = expand_pf_via_pairings(&table, &s)?;
            checks.push(Check::exact(
                "pf",
                "pfK-pairing-expansion",
                format!("S={s:?}"),
                &pf,
                &expansion,
            ));
        }
    }
    Ok(checks)
}

fn terminal_cases(g: &PlanarGraph, k_max: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let bnd = g.boundary_vertices();
    let mut cases = vec![(vec![], vec![])];
    for k in 1..=k_max.min(bnd.len()) {
        for a in combos(&bnd, k) {
            for b in combos(&bnd, k) {
                cases.push((a.clone(), b));
            }
        }
    }
    cases
}

/// Pushforward of the flow measure equals the closed-form induced weight,
/// pointwise, and the support is exactly the interlacing shadows. Raw
/// enumeration; intended for graphs with at most 8 edges.
pub fn flow_suite(g: &PlanarGraph) -> Result<Vec<Check>> {
    let dm = DirectedModification::new(g);
    let factor = crate::flows::barred_factor(g);
    let mut checks = Vec::new();
    for (a, b) in terminal_cases(g, 3) {
        let push = pushforward(&dm, &a, &b)?;
        let mut pointwise = true;
        for (omega, mass) in &push {
            if mass * &factor != induced_flow_weight(g, omega, &a, &b) {
                pointwise = false;
            }
        }
        checks.push(Check::flag(
            "flow",
            "pushforward-pointwise",
            format!("A={a:?} B={b:?} shadows={}", push.len()),
            pointwise,
        ));
        let sigma = sym_diff(&a, &b);
        let image: std::collections::BTreeSet<_> = crate::currents::gamma_space(g, &sigma)?
            .filter(|w| interlaces(g, w, &a, &b))
            .collect();
        let support: std::collections::BTreeSet<_> = push.keys().copied().collect();
        checks.push(Check::flag(
            "flow",
            "image-is-interlacing-shadows",
            format!("A={a:?} B={b:?}"),
            image == support,
        ));
        // Symmetry of the induced measure under swapping terminals. For
        // overlapping sets the supports differ (the shared vertex keeps its
        // color-fixed stub order while the others swap roles), so the check
        // applies to disjoint terminal sets.
        if a.iter().all(|v| !b.contains(v)) {
            let push_swapped = pushforward(&dm, &b, &a)?;
            checks.push(Check::flag(
                "flow",
                "induced-measure-terminal-symmetry",
                format!("A={a:?} B={b:?}"),
                push == push_swapped,
            ));
        }
    }
    Ok(checks)
}

/// Raw partition functions are invariant under middle-edge reorientation and
/// under the choice of stub corner.
pub fn invariance_suite(g: &PlanarGraph, cases: &[(Vec<usize>, Vec<usize>)]) -> Result<Vec<Check>> {
    let flipped: Vec<bool> = g.edges().iter().map(|e| e.u >= e.v).collect();
    let dm_default = DirectedModification::new(g);
    let dm_flipped = DirectedModification::with_options(g, Some(&flipped), StubCorner::FirstVisit);
    let dm_corner = DirectedModification::with_options(g, None, StubCorner::LastVisit);
    let mut checks = Vec::new();
    for (a, b) in cases {
        let z0 = z_aflow(&dm_default, a, b)?;
        let z1 = z_aflow(&dm_flipped, a, b)?;
        let z2 = z_aflow(&dm_corner, a, b)?;
        checks.push(Check::exact(
            "flow",
            "orientation-invariance",
            format!("A={a:?} B={b:?}"),
            &z0,
            &z1,
        ));
        checks.push(Check::exact(
            "flow",
            "stub-corner-invariance",
            format!("A={a:?} B={b:?}"),
            &z0,
            &z2,
        ));
    }
    Ok(checks)
}

/// Contiguous terminal configurations (A, B) of order k: every 2k-subset of
/// the boundary, cut at each of its 2k rotations.
pub fn contiguous_configs(g: &PlanarGraph, k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let bnd = g.boundary_vertices();
    if 2 * k > bnd.len() {
        return Vec::new();
    }
    let idx: Vec<usize> = (0..bnd.len()).collect();
    let mut out = Vec::new();
    for subset in combos(&idx, 2 * k) {
        for r in 0..2 * k {
            let seq: Vec<usize> = (0..2 * k).map(|i| bnd[subset[(r + i) % (2 * k)]]).collect();
            let a: Vec<usize> = seq[..k].to_vec();
            let b: Vec<usize> = seq[k..].iter().rev().copied().collect();
            out.push((a, b));
        }
    }
    out
}

/// Double-current identities: partition of unity, the parallel-connection
/// probability against det M / pf K, the k = 2 completeness split, and the
/// convolution oracle on Pythagorean-weight graphs.
pub fn dcurr_suite(g: &PlanarGraph) -> Result<Vec<Check>> {
    let table = CorrelationTable::new(g)?;
    let mut agg = AggregateCache::new(g);
    let bnd = g.boundary_vertices();
    let s0 = even_polynomial(g, &[])?;
    let mut checks = Vec::new();

    let mut sigmas: Vec<Vec<usize>> = vec![vec![]];
    sigmas.extend(combos(&bnd, 2));
    if bnd.len() >= 4 {
        sigmas.extend(combos(&bnd, 4).into_iter().take(6));
    }
    if bnd.len() >= 6 {
        sigmas.extend(combos(&bnd, 6).into_iter().take(2));
    }
    for sigma in &sigmas {
        let total = agg.get(sigma)?.total_mass();
        let expect = even_polynomial(g, sigma)? * &s0;
        checks.push(Check::exact(
            "dcurr",
            "partition-of-unity",
            format!("A={sigma:?}"),
            &total,
            &expect,
        ));
    }

    for k in [2usize, 3] {
        for (a, b) in contiguous_configs(g, k) {
            let mut union: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
            union.sort_unstable();
            let s_union = even_polynomial(g, &union)?;
            if s_union.is_zero() {
                continue;
            }
            let aggregates = agg.get(&union)?;
            let mass = aggregates.event_mass(|classes| parallel_event(classes, &a, &b));
            let prob = mass / (&s_union * &s0);
            let m = build_m(&table, &a, &b)?;
            let kmat = build_k(&table, &union)?;
            let ratio = det_exact(&m.entries) / pfaffian_exact(&kmat.entries)?;
            checks.push(Check::exact(
                "dcurr",
                "parallel-prob-equals-detM-over-pfK",
                format!("A={a:?} B={b:?}"),
                &prob,
                &ratio,
            ));
        }
    }

    if bnd.len() >= 4 {
        for quad in combos(&bnd, 4).into_iter().take(8) {
            let (a, b, c, d) = (quad[0], quad[1], quad[2], quad[3]);
            let union = vec![a, b, c, d];
            let aggregates = agg.get(&union)?;
            let s_union = even_polynomial(g, &union)?;
            if s_union.is_zero() {
                continue;
            }
            let norm = &s_union * &s0;
            let p1 = aggregates.event_mass(|cl| parallel_event(cl, &[a, b], &[d, c])) / &norm;
            let p2 = aggregates.event_mass(|cl| parallel_event(cl, &[d, a], &[c, b])) / &norm;
            let px = aggregates.event_mass(|cl| {
                cl.iter()
                    .any(|class| [a, b, c, d].iter().all(|v| class.contains(v)))
            }) / &norm;
            let sum = p1 + p2 + px;
            checks.push(Check::exact(
                "dcurr",
                "k2-events-complete",
                format!("S={union:?}"),
                &sum,
                &Rat::one(),
            ));
        }
    }

    let pythagorean = (0..g.edge_count()).all(|e| pythagorean_y(g.x(e)).is_ok());
    if pythagorean && g.edge_count() <= crate::currents::CONVOLUTION_EDGE_CAP {
        for sigma in [vec![], vec![bnd[0], bnd[1]]] {
            let conv = convolve_two_currents(g, &sigma)?;
            let closed = induced_double_current_distribution(g, &sigma)?;
            checks.push(Check::flag(
                "dcurr",
                "convolution-matches-closed-form",
                format!("A={sigma:?} states={}", conv.len()),
                conv == closed,
            ));
        }
    }
    Ok(checks)
}

fn parallel_event(classes: &[Vec<usize>], a: &[usize], b: &[usize]) -> bool {
    let class_of = |v: usize| classes.iter().position(|c| c.contains(&v));
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let conn = ai == bj || (class_of(ai).is_some() && class_of(ai) == class_of(bj));
            if (i == j) != conn {
                return false;
            }
        }
    }
    true
}

/// Total nonnegativity: every minor of every contiguous M is nonnegative and
/// each minor's strict positivity coincides with the vertex-disjoint-path
/// criterion for its row and column blocks.
pub fn tnn_suite(g: &PlanarGraph, k_max: usize) -> Result<Vec<Check>> {
    let table = CorrelationTable::new(g)?;
    let mut checks = Vec::new();
    for k in 1..=k_max {
        for (a, b) in contiguous_configs(g, k) {
            let m = build_m(&table, &a, &b)?;
            let cert = all_minors_nonneg(&m)?;
            checks.push(Check::flag(
                "tnn",
                "all-minors-nonnegative",
                format!("A={a:?} B={b:?} min={}", format_rat(&cert.min_minor)),
                cert.all_nonnegative,
            ));
            // For contiguous blocks the signed and unsigned determinants
            // coincide.
            let n = build_n(&table, &a, &b)?;
            let det_m = det_exact(&m.entries);
            let det_n = det_exact(&n.entries);
            checks.push(Check::exact(
                "tnn",
                "detM-equals-detN",
                format!("A={a:?} B={b:?}"),
                &det_m,
                &det_n,
            ));
            // Per-minor positivity against vertex-disjoint paths.
            let idx: Vec<usize> = (0..k).collect();
            let mut agree = true;
            for l in 1..=k {
                for rows in combos(&idx, l) {
                    for cols in combos(&idx, l) {
                        let sub: Vec<Vec<Rat>> = rows
                            .iter()
                            .map(|&i| cols.iter().map(|&j| m.entries[i][j].clone()).collect())
                            .collect();
                        let d = det_exact(&sub);
                        let a_sub: Vec<usize> = rows.iter().map(|&i| a[i]).collect();
                        let b_sub: Vec<usize> = cols.iter().map(|&j| b[j]).collect();
                        let paths = disjoint_paths_exist(g, &a_sub, &b_sub)?;
                        if (d > Rat::zero()) != paths {
                            agree = false;
                        }
                    }
                }
            }
            checks.push(Check::flag(
                "tnn",
                "minor-positivity-iff-disjoint-paths",
                format!("A={a:?} B={b:?}"),
                agree,
            ));
        }
    }
    Ok(checks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Det,
    Pf,
    Flow,
    Dcurr,
    Tnn,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "all" => Some(Suite::All),
            "det" => Some(Suite::Det),
            "pf" => Some(Suite::Pf),
            "flow" => Some(Suite::Flow),
            "dcurr" => Some(Suite::Dcurr),
            "tnn" => Some(Suite::Tnn),
            _ => None,
        }
    }
}

/// Runs a named identity suite on a graph with its own coloring.
pub fn run_suite(g: &PlanarGraph, suite: Suite, k_max: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let small = g.edge_count() <= 8;
    match suite {
        Suite::Det => checks.extend(det_suite(g, k_max)?),
        Suite::Pf => checks.extend(pf_suite(g)?),
        Suite::Flow => {
            if small {
                checks.extend(flow_suite(g)?);
            }
            let bnd = g.boundary_vertices();
            let mut cases = vec![(vec![], vec![]), (vec![bnd[0]], vec![bnd[1]])];
            if !small {
                cases = vec![(vec![bnd[0]], vec![bnd[1]])];
            }
            checks.extend(invariance_suite(g, &cases)?);
        }
        Suite::Dcurr => checks.extend(dcurr_suite(g)?),
        Suite::Tnn => checks.extend(tnn_suite(g, k_max.min(4))?),
        Suite::All => {
            for s in [Suite::Det, Suite::Pf, Suite::Flow, Suite::Dcurr, Suite::Tnn] {
                checks.extend(run_suite(g, s, k_max)?);
            }
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn triangle_all_suites_pass() {
        let g = corpus::triangle_mixed();
        let checks = run_suite(&g, Suite::All, 3).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.ok, "{}", c.to_csv_row());
        }
    }

    #[test]
    fn cycle4_pf_suite_passes() {
        let g = corpus::cycle4_mixed();
        let checks = run_suite(&g, Suite::Pf, 3).unwrap();
        assert!(checks.iter().all(|c| c.ok));
    }

    #[test]
    fn contiguous_config_counts() {
        let g = corpus::cycle4_mixed();
        assert_eq!(contiguous_configs(&g, 2).len(), 4);
        assert_eq!(contiguous_configs(&g, 3).len(), 0);
        let g = corpus::grid3_mixed();
        assert_eq!(contiguous_configs(&g, 2).len(), 280);
    }
}
