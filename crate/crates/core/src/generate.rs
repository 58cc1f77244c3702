//! Exhaustive generation of small connected graphs.
//!
//! Raw candidates are built from a valence sequence, a placement of the ports
//! and a perfect matching of the remaining flags; they are then validated,
//! canonicalized and deduplicated.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_graph, canonical_ngraph};
use crate::graph::{FeynmanGraph, Flag};

/// Cutoffs for the otherwise infinite sums over graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TruncationBounds {
    pub max_vertices: usize,
    pub max_inner_edges: usize,
}

impl TruncationBounds {
    pub fn new(max_vertices: usize, max_inner_edges: usize) -> Self {
        Self {
            max_vertices,
            max_inner_edges,
        }
    }

    pub fn admits(&self, g: &FeynmanGraph) -> bool {
        g.num_vertices() <= self.max_vertices && g.num_inner_edges() <= self.max_inner_edges
    }
}

/// Nonincreasing sequences of `parts` values in `min..=max` summing to `total`.
fn valence_sequences(parts: usize, total: usize, min: usize, max: usize) -> Vec<Vec<usize>> {
    fn go(parts: usize, total: usize, min: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if total < parts * min || total > parts * cap {
            return;
        }
        for x in (min..=cap.min(total)).rev() {
            prefix.push(x);
            go(parts - 1, total - x, min, x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(parts, total, min, max, &mut Vec::new(), &mut out);
    out
}

/// All perfect matchings of `items`.
pub(crate) fn perfect_matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    if items.len() % 2 == 1 {
        return Vec::new();
    }
    let first = items[0];
    let mut out = Vec::new();
    for j in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|&(i, _)| i + 1 != j).map(|(_, &x)| x).collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, items[j]));
            out.push(m);
        }
    }
    out
}

/// Builds the graph whose flag `f` sits at `vertex_of[f]`, port `j` faces
/// flag `port_flags[j]` and the remaining flags are paired by `matching`.
///
/// Port `j` gets arc `2j + 1` and its flag carries arc `2j`. Returns the graph
/// and its ports in label order, or `None` if it is disconnected.
fn assemble(vertex_of: &[usize], vertices: usize, port_flags: &[usize], matching: &[(usize, usize)]) -> Option<(FeynmanGraph, Vec<usize>)> {
    let n = port_flags.len();
    let arcs = 2 * (n + matching.len());
    let involution: Vec<usize> = (0..arcs).map(|a| a ^ 1).collect();
    let mut flags = vec![Flag { arc: 0, vertex: 0 }; vertex_of.len()];
    for (j, &h) in port_flags.iter().enumerate() {
        flags[h] = Flag {
            arc: 2 * j,
            vertex: vertex_of[h],
        };
    }
    for (e, &(h, k)) in matching.iter().enumerate() {
        let a = 2 * (n + e);
        flags[h] = Flag { arc: a, vertex: vertex_of[h] };
        flags[k] = Flag {
            arc: a + 1,
            vertex: vertex_of[k],
        };
    }
    let g = FeynmanGraph::new(involution, vertices, flags).ok()?;
    Some((g, (0..n).map(|j| 2 * j + 1).collect()))
}

/// Calls `visit` on every raw connected candidate with `vertices` vertices,
/// `inner` inner edges and `n` labeled ports, valences capped by `max_valence`.
///
/// With `ordered_ports` false, only one port labeling per placement is produced.
fn for_each_candidate(
    n: usize,
    vertices: usize,
    inner: usize,
    max_valence: Option<usize>,
    ordered_ports: bool,
    visit: &mut dyn FnMut(FeynmanGraph, Vec<usize>),
) {
    if vertices == 0 {
        if n == 2 && inner == 0 {
            visit(FeynmanGraph::trivial(), vec![0, 1]);
        }
        return;
    }
    if vertices >= 2 && inner + 1 < vertices {
        return;
    }
    let m = n + 2 * inner;
    let min = usize::from(vertices >= 2);
    let max = max_valence.unwrap_or(m).min(m);
    for valences in valence_sequences(vertices, m, min, max) {
        let mut vertex_of = Vec::with_capacity(m);
        let mut first_flag = Vec::with_capacity(vertices);
        for (v, &k) in valences.iter().enumerate() {
            first_flag.push(vertex_of.len());
            vertex_of.extend(std::iter::repeat_n(v, k));
        }
        // flags at one vertex are interchangeable, so ports at a vertex take
        // its lowest flags
        let mut placement = vec![0; n];
        loop {
            let mut used = vec![0; vertices];
            let mut ok = true;
            let mut port_flags = vec![0; n];
            for j in 0..n {
                let v = placement[j];
                if used[v] == valences[v] {
                    ok = false;
                    break;
                }
                port_flags[j] = first_flag[v] + used[v];
                used[v] += 1;
            }
            let canonical_placement = ordered_ports || placement.windows(2).all(|w| w[0] <= w[1]);
            if ok && canonical_placement {
                let rest: Vec<usize> = (0..m).filter(|h| !port_flags.contains(h)).collect();
                for matching in perfect_matchings(&rest) {
                    if let Some((g, ports)) = assemble(&vertex_of, vertices, &port_flags, &matching) {
                        visit(g, ports);
                    }
                }
            }
            // next placement in 0..vertices ^ n
            let mut j = 0;
            while j < n {
                placement[j] += 1;
                if placement[j] < vertices {
                    break;
                }
                placement[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
    }
}

/// Connected n-graphs within bounds, up to port-fixing isomorphism.
///
/// Each class is given by its canonical form, whose port `k` is arc `k`.
/// The list is sorted.
pub fn n_graph_classes(n: usize, bounds: TruncationBounds) -> Vec<(FeynmanGraph, Vec<usize>)> {
    let mut classes = BTreeSet::new();
    for v in 0..=bounds.max_vertices {
        for k in 0..=bounds.max_inner_edges {
            for_each_candidate(n, v, k, None, true, &mut |g, ports| {
                classes.insert(canonical_ngraph(&g, &ports));
            });
        }
    }
    let ports: Vec<usize> = (0..n).collect();
    classes.into_iter().map(|g| (g, ports.clone())).collect()
}

/// Connected graphs up to isomorphism with at most `max_vertices` vertices,
/// `max_inner` inner edges and every valence at most `max_valence`.
/// Includes ⋆. Sorted by canonical form.
pub fn connected_graphs(max_vertices: usize, max_inner: usize, max_valence: usize) -> Vec<FeynmanGraph> {
    let mut classes = BTreeSet::new();
    for v in 0..=max_vertices {
        for k in 0..=max_inner {
            for n in 0..=(v * max_valence).max(2) {
                if 2 * k + n > v * max_valence && v > 0 {
                    continue;
                }
                for_each_candidate(n, v, k, Some(max_valence), false, &mut |g, _| {
                    classes.insert(canonical_graph(&g));
                });
            }
        }
    }
    classes.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphisms::automorphisms_fixing;

    #[test]
    fn matchings_count() {
        assert_eq!(perfect_matchings(&[0, 1, 2, 3, 4, 5]).len(), 15);
        assert_eq!(perfect_matchings(&[0, 1, 2]).len(), 0);
    }

    #[test]
    fn small_class_lists() {
        let star = n_graph_classes(2, TruncationBounds::new(0, 0));
        assert_eq!(star.len(), 1);
        assert_eq!(star[0].0.num_vertices(), 0);
        assert_eq!(n_graph_classes(1, TruncationBounds::new(1, 0)).len(), 1);
        let zero = n_graph_classes(0, TruncationBounds::new(1, 1));
        assert_eq!(zero.len(), 2);
        let orders: BTreeSet<usize> = zero.iter().map(|(g, p)| automorphisms_fixing(g, p).len()).collect();
        assert_eq!(orders, BTreeSet::from([1, 2]));
    }

    #[test]
    fn universe_contains_elementary_graphs() {
        let u = connected_graphs(1, 0, 3);
        // ⋆ and corollas 0..=3
        assert_eq!(u.len(), 5);
    }
}
