//! Canonical labelings.
//!
//! Candidate relabelings are produced by a breadth-first traversal: vertices
//! are numbered in the order they are reached, and the flags around a vertex
//! are ordered by discovery rank first, then by a local invariant. Only flags
//! with equal invariants are permuted, so the candidate set is small but still
//! closed under isomorphism. The canonical form is the minimum relabeled
//! object over all candidates.

use std::collections::VecDeque;

use crate::graph::{FeynmanGraph, Flag};
use crate::morphisms::GraphMap;
use crate::perm;

/// Applies a bijective relabeling `iso` to `g`, producing the image graph.
pub fn relabel(g: &FeynmanGraph, iso: &GraphMap) -> FeynmanGraph {
    let mut involution = vec![0; g.num_arcs()];
    for a in 0..g.num_arcs() {
        involution[iso.arc_map[a]] = iso.arc_map[g.inv(a)];
    }
    let mut flags = vec![Flag { arc: 0, vertex: 0 }; g.num_flags()];
    for (h, fl) in g.flags().iter().enumerate() {
        flags[iso.flag_map[h]] = Flag {
            arc: iso.arc_map[fl.arc],
            vertex: iso.vertex_map[fl.vertex],
        };
    }
    FeynmanGraph::from_parts_unchecked(involution, g.num_vertices(), flags)
}

type FlagKey = (u64, u64, u64, u64);

fn flag_key(g: &FeynmanGraph, h: usize, arc_key: &[u64]) -> FlagKey {
    let out = g.flag(h).arc;
    let back = g.inv(out);
    let (kind, detail) = match g.flag_of_arc(back) {
        None => (0, 0),
        Some(k) if g.flag(k).vertex == g.flag(h).vertex => (1, 0),
        Some(k) => (2, g.valence(g.flag(k).vertex) as u64),
    };
    (kind, detail, arc_key[out], arc_key[back])
}

#[derive(Clone)]
struct State {
    vertex_order: Vec<usize>,
    flag_order: Vec<usize>,
    rank: Vec<Option<usize>>,
    next_rank: usize,
    queue: VecDeque<usize>,
    enqueued: Vec<bool>,
}

/// Candidate isomorphisms `g -> g'` whose images are compared to pick a
/// canonical form.
///
/// With `pinned` ports, port `k` is sent to arc `k` and the traversal starts
/// from the port flags in label order. `arc_key` assigns an isomorphism
/// invariant (e.g. a color) to each arc and is used for pruning.
pub fn candidate_labelings(g: &FeynmanGraph, pinned: Option<&[usize]>, arc_key: &[u64]) -> Vec<GraphMap> {
    let mut out = Vec::new();
    if g.num_vertices() == 0 {
        let starts: Vec<usize> = match pinned {
            Some(ports) => vec![ports[0]],
            None => vec![0, 1],
        };
        for a in starts {
            let mut arc_map = vec![0; 2];
            arc_map[a] = 0;
            arc_map[g.inv(a)] = 1;
            out.push(GraphMap {
                vertex_map: vec![],
                flag_map: vec![],
                arc_map,
            });
        }
        return out;
    }
    let keys: Vec<FlagKey> = (0..g.num_flags()).map(|h| flag_key(g, h, arc_key)).collect();
    let base = State {
        vertex_order: Vec::new(),
        flag_order: Vec::new(),
        rank: vec![None; g.num_flags()],
        next_rank: 0,
        queue: VecDeque::new(),
        enqueued: vec![false; g.num_vertices()],
    };
    let pinned_ports = pinned.filter(|p| !p.is_empty());
    match pinned_ports {
        Some(ports) => {
            let mut state = base;
            for &p in ports {
                let h = g.flag_of_arc(g.inv(p)).expect("ports of a non-trivial graph face a flag");
                state.rank[h] = Some(state.next_rank);
                state.next_rank += 1;
                let v = g.flag(h).vertex;
                if !state.enqueued[v] {
                    state.enqueued[v] = true;
                    state.queue.push_back(v);
                }
            }
            expand(g, &keys, state, pinned, &mut out);
        }
        None => {
            // start from every vertex with the smallest local signature
            let signature = |v: usize| {
                let mut ks: Vec<FlagKey> = g.flags_at(v).iter().map(|&h| keys[h]).collect();
                ks.sort_unstable();
                (g.valence(v), ks)
            };
            let best = (0..g.num_vertices()).map(signature).min().unwrap();
            for v in 0..g.num_vertices() {
                if signature(v) != best {
                    continue;
                }
                let mut state = base.clone();
                state.enqueued[v] = true;
                state.queue.push_back(v);
                expand(g, &keys, state, pinned, &mut out);
            }
        }
    }
    out
}

fn expand(g: &FeynmanGraph, keys: &[FlagKey], mut state: State, pinned: Option<&[usize]>, out: &mut Vec<GraphMap>) {
    let Some(v) = state.queue.pop_front() else {
        out.push(finish(g, &state, pinned));
        return;
    };
    state.vertex_order.push(v);
    let mut discovered: Vec<usize> = g.flags_at(v).iter().copied().filter(|&h| state.rank[h].is_some()).collect();
    discovered.sort_by_key(|&h| state.rank[h]);
    let mut rest: Vec<usize> = g.flags_at(v).iter().copied().filter(|&h| state.rank[h].is_none()).collect();
    rest.sort_by_key(|&h| keys[h]);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for h in rest {
        match cells.last_mut() {
            Some(cell) if keys[cell[0]] == keys[h] => cell.push(h),
            _ => cells.push(vec![h]),
        }
    }
    let mut orders = vec![discovered];
    for cell in &cells {
        let perms = perm::permutations(cell.len());
        orders = orders
            .iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut o = prefix.clone();
                    o.extend(p.iter().map(|&i| cell[i]));
                    o
                })
            })
            .collect();
    }
    for order in orders {
        let mut next = state.clone();
        for &h in &order {
            next.flag_order.push(h);
            if let Some(k) = g.flag_of_arc(g.inv(g.flag(h).arc)) {
                if next.rank[k].is_none() {
                    next.rank[k] = Some(next.next_rank);
                    next.next_rank += 1;
                }
                let w = g.flag(k).vertex;
                if !next.enqueued[w] {
                    next.enqueued[w] = true;
                    next.queue.push_back(w);
                }
            }
        }
        expand(g, keys, next, pinned, out);
    }
}

fn finish(g: &FeynmanGraph, state: &State, pinned: Option<&[usize]>) -> GraphMap {
    let mut vertex_map = vec![0; g.num_vertices()];
    for (k, &v) in state.vertex_order.iter().enumerate() {
        vertex_map[v] = k;
    }
    let mut flag_map = vec![0; g.num_flags()];
    for (k, &h) in state.flag_order.iter().enumerate() {
        flag_map[h] = k;
    }
    let mut arc_map = vec![usize::MAX; g.num_arcs()];
    let mut next = 0;
    if let Some(ports) = pinned {
        for &p in ports {
            arc_map[p] = next;
            next += 1;
        }
    }
    for &h in &state.flag_order {
        let a = g.flag(h).arc;
        for x in [a, g.inv(a)] {
            if arc_map[x] == usize::MAX {
                arc_map[x] = next;
                next += 1;
            }
        }
    }
    GraphMap {
        vertex_map,
        flag_map,
        arc_map,
    }
}

/// Canonical representative of the isomorphism class of a plain graph.
pub fn canonical_graph(g: &FeynmanGraph) -> FeynmanGraph {
    let keys = vec![0; g.num_arcs()];
    candidate_labelings(g, None, &keys)
        .iter()
        .map(|iso| relabel(g, iso))
        .min()
        .expect("every graph has a candidate labeling")
}

/// Canonical representative of an n-graph under port-fixing isomorphism.
///
/// The returned graph has port `k` at arc `k`.
pub fn canonical_ngraph(g: &FeynmanGraph, ports: &[usize]) -> FeynmanGraph {
    let keys = vec![0; g.num_arcs()];
    candidate_labelings(g, Some(ports), &keys)
        .iter()
        .map(|iso| relabel(g, iso))
        .min()
        .expect("every graph has a candidate labeling")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphisms::automorphisms_fixing;

    fn path3() -> FeynmanGraph {
        // three vertices in a row, two ports at each end
        let involution = (0..12).map(|a| a ^ 1).collect();
        let flags = [(0, 0), (1, 1), (2, 1), (3, 2), (4, 0), (6, 0), (8, 2), (10, 2)]
            .into_iter()
            .map(|(arc, vertex)| Flag { arc, vertex })
            .collect();
        FeynmanGraph::new(involution, 3, flags).unwrap()
    }

    #[test]
    fn pinned_ports_distinguish_orders() {
        let g = path3();
        let ports = g.ports();
        let same_end: Vec<usize> = vec![ports[0], ports[1], ports[2], ports[3]];
        let swapped_in_end: Vec<usize> = vec![ports[1], ports[0], ports[2], ports[3]];
        let across: Vec<usize> = vec![ports[0], ports[2], ports[1], ports[3]];
        let a = canonical_ngraph(&g, &same_end);
        assert_eq!(a.ports(), vec![0, 1, 2, 3]);
        // swapping the two ports at one end is an automorphism
        assert_eq!(a, canonical_ngraph(&g, &swapped_in_end));
        assert_ne!(a, canonical_ngraph(&g, &across));
        assert_eq!(automorphisms_fixing(&g, &same_end).len(), 1);
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let c = canonical_graph(&path3());
        assert_eq!(canonical_graph(&c), c);
    }
}
