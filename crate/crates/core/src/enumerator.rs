//! Brute-force side of the crate: build the full successor table, split it
//! into components, and classify each component's shape so the result can
//! be compared against the closed-form predictions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{ComponentSpec, GraphStructure};
use crate::error::Error;
use crate::iprng::{Params, PeriodInfo};

/// Largest state space the enumerator will touch unless overridden.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

const DOT_LIMIT: u64 = 10_000;

/// The complete functional graph of the map on Z_{p^e}: one successor and
/// one in-degree per state.
#[derive(Clone, Debug)]
pub struct FunctionalGraph {
    q: u64,
    p: u64,
    successor: Vec<u32>,
    in_degree: Vec<u32>,
}

/// Evaluates the map at every state. Refuses state spaces above `budget`.
pub fn build_graph(g: &Params, budget: u64) -> Result<FunctionalGraph, Error> {
    let m = *g.modulus();
    let q = m.q();
    if q > budget || q > u64::from(u32::MAX) {
        return Err(Error::BudgetExceeded { q, budget });
    }
    let successor: Vec<u32> = (0..q)
        .into_par_iter()
        .map(|x| g.step(m.elem(x)).value() as u32)
        .collect();
    Ok(FunctionalGraph::from_successors(m.p(), successor))
}

impl FunctionalGraph {
    pub fn from_successors(p: u64, successor: Vec<u32>) -> FunctionalGraph {
        let q = successor.len() as u64;
        let mut in_degree = vec![0u32; successor.len()];
        for &y in &successor {
            in_degree[y as usize] += 1;
        }
        FunctionalGraph { q, p, successor, in_degree }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn successor(&self, x: u64) -> u64 {
        u64::from(self.successor[x as usize])
    }

    pub fn in_degree(&self, x: u64) -> u64 {
        u64::from(self.in_degree[x as usize])
    }

    /// Graphviz rendering, one edge per state; deterministic line order.
    pub fn export_dot(&self) -> Result<String, Error> {
        if self.q > DOT_LIMIT {
            return Err(Error::BudgetExceeded { q: self.q, budget: DOT_LIMIT });
        }
        let mut out = String::from("digraph iprng {\n");
        for (x, &y) in self.successor.iter().enumerate() {
            writeln!(out, "  {x} -> {y};").unwrap();
        }
        out.push('}');
        out.push('\n');
        Ok(out)
    }

    /// Walks every state once, finding each component's cycle and every
    /// state's distance to it, then classifies component shapes.
    pub fn decompose(&self) -> ExactStructure {
        let n = self.successor.len();
        let mut state = vec![0u8; n];
        let mut comp = vec![u32::MAX; n];
        let mut dist = vec![0u32; n];
        let mut cycle_lens: Vec<u64> = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut x = start;
            while state[x] == 0 {
                state[x] = 1;
                path.push(x);
                x = self.successor[x] as usize;
            }
            let (cid, mut d) = if state[x] == 1 {
                // closed a fresh cycle inside the current path
                let pos = path.iter().position(|&y| y == x).unwrap();
                let cid = cycle_lens.len() as u32;
                cycle_lens.push((path.len() - pos) as u64);
                for &y in &path[pos..] {
                    state[y] = 2;
                    comp[y] = cid;
                    dist[y] = 0;
                }
                path.truncate(pos);
                (cid, 0)
            } else {
                (comp[x], dist[x])
            };
            for &y in path.iter().rev() {
                d += 1;
                state[y] = 2;
                comp[y] = cid;
                dist[y] = d;
            }
        }

        let k = cycle_lens.len();
        let mut size = vec![0u64; k];
        let mut cycle_min = vec![u64::MAX; k];
        let mut cycle_all_units = vec![true; k];
        let mut hub = vec![usize::MAX; k];
        let mut hub_count = vec![0u64; k];
        let mut tree_max_in = vec![0u32; k];
        let mut tree_hist: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); k];
        for x in 0..n {
            let c = comp[x] as usize;
            size[c] += 1;
            if dist[x] == 0 {
                cycle_min[c] = cycle_min[c].min(x as u64);
                if (x as u64) % self.p == 0 {
                    cycle_all_units[c] = false;
                }
                if self.in_degree[x] >= 2 {
                    hub_count[c] += 1;
                    hub[c] = x;
                }
            } else {
                *tree_hist[c].entry(u64::from(dist[x])).or_insert(0) += 1;
                tree_max_in[c] = tree_max_in[c].max(self.in_degree[x]);
            }
        }

        let components = (0..k)
            .map(|c| {
                let cycle_len = cycle_lens[c];
                let tree_nodes = size[c] - cycle_len;
                let shape = if size[c] == 1 {
                    ComponentShape::SelfLoop
                } else if tree_nodes == 0 {
                    ComponentShape::PureCycle
                } else if self.is_uniform_tailed(cycle_len, tree_nodes, hub_count[c], hub[c], tree_max_in[c], &tree_hist[c]) {
                    ComponentShape::Unilateral { branches: tree_nodes / cycle_len }
                } else if cycle_len == 1 {
                    let mut depth_profile = tree_hist[c].clone();
                    depth_profile.insert(0, 1);
                    ComponentShape::ConvergentTree { depth_profile }
                } else {
                    ComponentShape::Other
                };
                ObservedComponent {
                    cycle_len,
                    size: size[c],
                    cycle_min: cycle_min[c],
                    cycle_all_units: cycle_all_units[c],
                    shape,
                }
            })
            .collect();

        ExactStructure {
            q: self.q,
            components,
            node_component: comp,
            node_dist: dist,
        }
    }

    /// Shape test for a cycle with uniform disjoint tails: one hub taking
    /// all the branches, every tail a bare path, equal counts per depth.
    fn is_uniform_tailed(
        &self,
        cycle_len: u64,
        tree_nodes: u64,
        hub_count: u64,
        hub: usize,
        tree_max_in: u32,
        hist: &BTreeMap<u64, u64>,
    ) -> bool {
        if hub_count != 1 || tree_max_in > 1 || tree_nodes % cycle_len != 0 {
            return false;
        }
        let branches = tree_nodes / cycle_len;
        u64::from(self.in_degree[hub]) == branches + 1
            && hist.len() as u64 == cycle_len
            && (1..=cycle_len).all(|d| hist.get(&d) == Some(&branches))
    }
}

/// Shape of one component, as observed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentShape {
    SelfLoop,
    PureCycle,
    Unilateral { branches: u64 },
    ConvergentTree { depth_profile: BTreeMap<u64, u64> },
    Other,
}

/// One component of the enumerated graph.
#[derive(Clone, Debug)]
pub struct ObservedComponent {
    pub cycle_len: u64,
    pub size: u64,
    pub cycle_min: u64,
    pub cycle_all_units: bool,
    pub shape: ComponentShape,
}

/// Full decomposition: per-component shapes plus, for every state, its
/// component and its distance to that component's cycle.
#[derive(Clone, Debug)]
pub struct ExactStructure {
    q: u64,
    components: Vec<ObservedComponent>,
    node_component: Vec<u32>,
    node_dist: Vec<u32>,
}

impl ExactStructure {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn components(&self) -> &[ObservedComponent] {
        &self.components
    }

    /// Exact pre-period and period of the orbit of x, read off the graph.
    pub fn period_of(&self, x: u64) -> PeriodInfo {
        let c = self.node_component[x as usize] as usize;
        PeriodInfo {
            pre_period: u64::from(self.node_dist[x as usize]),
            period: self.components[c].cycle_len,
        }
    }

    /// The observed decomposition in the predictions' vocabulary, or None
    /// if some component has none of the nameable shapes.
    pub fn to_graph_structure(&self) -> Option<GraphStructure> {
        let mut parts = Vec::with_capacity(self.components.len());
        for c in &self.components {
            parts.push(match &c.shape {
                ComponentShape::SelfLoop => ComponentSpec::SelfLoops { count: 1 },
                ComponentShape::PureCycle => {
                    ComponentSpec::Cycles { length: c.cycle_len, count: 1 }
                }
                ComponentShape::Unilateral { branches } => {
                    ComponentSpec::Unilateral { cycle_len: c.cycle_len, branches: *branches }
                }
                ComponentShape::ConvergentTree { depth_profile } => ComponentSpec::ConvergentTree {
                    fixed_point: c.cycle_min,
                    depth_profile: depth_profile.clone(),
                },
                ComponentShape::Other => return None,
            });
        }
        Some(GraphStructure::new(parts))
    }

    /// Cycle length -> number of cycles. With `units_only`, cycles through
    /// any non-unit state are left out.
    pub fn cycle_histogram(&self, units_only: bool) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        for c in &self.components {
            if units_only && !c.cycle_all_units {
                continue;
            }
            *hist.entry(c.cycle_len).or_insert(0) += 1;
        }
        hist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Modulus;

    fn params(p: u64, e: u32, a: u64, b: u64) -> Params {
        Params::new(Modulus::new(p, e).unwrap(), a, b)
    }

    fn graph(p: u64, e: u32, a: u64, b: u64) -> FunctionalGraph {
        build_graph(&params(p, e, a, b), DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn constant_map_in_degrees() {
        let g = graph(13, 1, 0, 3);
        // every state maps to b = 3
        assert_eq!(g.in_degree(3), 13);
        assert_eq!(g.successor(3), 3);
        for x in 0..13 {
            assert_eq!(g.successor(x), 3);
            if x != 3 {
                assert_eq!(g.in_degree(x), 0);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = params(5, 7, 2, 3);
        assert!(matches!(
            build_graph(&g, 100),
            Err(Error::BudgetExceeded { q: 78125, budget: 100 })
        ));
        assert!(build_graph(&g, DEFAULT_BUDGET).is_ok());
    }

    #[test]
    fn decompose_field_example() {
        let s = graph(13, 1, 7, 5).decompose();
        let got = s.to_graph_structure().unwrap();
        let want = GraphStructure::new(vec![
            ComponentSpec::Cycles { length: 3, count: 1 },
            ComponentSpec::Cycles { length: 4, count: 2 },
            ComponentSpec::SelfLoops { count: 2 },
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn decompose_tailed_cycle_example() {
        let s = graph(5, 2, 6, 6).decompose();
        let got = s.to_graph_structure().unwrap();
        let want = GraphStructure::new(vec![
            ComponentSpec::Unilateral { cycle_len: 4, branches: 4 },
            ComponentSpec::Cycles { length: 5, count: 1 },
        ]);
        assert_eq!(got, want);
        // the 4-cycle through b = 6 carries the tails
        let tailed = s
            .components()
            .iter()
            .find(|c| matches!(c.shape, ComponentShape::Unilateral { .. }))
            .unwrap();
        assert_eq!(tailed.size, 20);
        assert!(!tailed.cycle_all_units);
    }

    #[test]
    fn decompose_mixed_example() {
        let s = graph(5, 2, 6, 5).decompose();
        let got = s.to_graph_structure().unwrap();
        let want = GraphStructure::new(vec![
            ComponentSpec::Unilateral { cycle_len: 1, branches: 4 },
            ComponentSpec::Cycles { length: 10, count: 1 },
            ComponentSpec::Cycles { length: 2, count: 4 },
            ComponentSpec::SelfLoops { count: 2 },
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn period_of_matches_direct_measurement() {
        for (p, e, a, b) in [(13, 1, 7, 5), (5, 2, 6, 8), (5, 2, 5, 6), (3, 3, 3, 2)] {
            let g = params(p, e, a, b);
            let s = build_graph(&g, DEFAULT_BUDGET).unwrap().decompose();
            for x in 0..g.modulus().q() {
                assert_eq!(s.period_of(x), g.measure_period(g.modulus().elem(x)));
            }
        }
    }

    #[test]
    fn cycle_histogram_unit_filter() {
        // b = 0 in Z_25: nine 2-cycles on units, tails into 0, two square roots of 6
        let s = graph(5, 2, 6, 0).decompose();
        assert_eq!(s.cycle_histogram(false), BTreeMap::from([(1, 3), (2, 9)]));
        assert_eq!(s.cycle_histogram(true), BTreeMap::from([(1, 2), (2, 9)]));

        let s = graph(5, 3, 6, 25).decompose();
        assert_eq!(s.cycle_histogram(true), BTreeMap::from([(1, 2), (2, 24), (10, 5)]));
    }

    #[test]
    fn dot_export_is_deterministic() {
        let g = FunctionalGraph::from_successors(3, vec![0, 0, 1]);
        let dot = g.export_dot().unwrap();
        assert_eq!(dot, "digraph iprng {\n  0 -> 0;\n  1 -> 0;\n  2 -> 1;\n}\n");
        assert_eq!(g.export_dot().unwrap(), dot);
    }

    #[test]
    fn dot_export_refuses_large_graphs() {
        let g = graph(5, 7, 2, 3);
        assert!(matches!(g.export_dot(), Err(Error::BudgetExceeded { .. })));
    }
}
