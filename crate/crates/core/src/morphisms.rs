//! Etale maps between Feynman graphs.
//!
//! A map `G -> G'` is a triple of arrays on arcs, flags and vertices that
//! commutes with `i`, `s` and `t`. It is etale when the flag/vertex square is a
//! pullback, i.e. the flags around each vertex are sent bijectively onto the
//! flags around its image.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::graph::FeynmanGraph;
use crate::perm;

/// A graph map, stored without its endpoints.
///
/// The derived ordering is lexicographic on `(vertex_map, flag_map, arc_map)`,
/// which is the order enumeration results are reported in.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphMap {
    pub vertex_map: Vec<usize>,
    pub flag_map: Vec<usize>,
    pub arc_map: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("{component} map has length {found}, expected {expected}")]
    WrongLength {
        component: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("{component} map sends {index} to {value}, outside the target")]
    IndexOutOfRange {
        component: &'static str,
        index: usize,
        value: usize,
    },
}

impl GraphMap {
    pub fn identity(g: &FeynmanGraph) -> Self {
        Self {
            vertex_map: (0..g.num_vertices()).collect(),
            flag_map: (0..g.num_flags()).collect(),
            arc_map: (0..g.num_arcs()).collect(),
        }
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &GraphMap) -> GraphMap {
        GraphMap {
            vertex_map: self.vertex_map.iter().map(|&v| other.vertex_map[v]).collect(),
            flag_map: self.flag_map.iter().map(|&h| other.flag_map[h]).collect(),
            arc_map: self.arc_map.iter().map(|&a| other.arc_map[a]).collect(),
        }
    }

    pub fn is_bijective(&self, target: &FeynmanGraph) -> bool {
        self.vertex_map.len() == target.num_vertices()
            && self.flag_map.len() == target.num_flags()
            && self.arc_map.len() == target.num_arcs()
            && perm::is_permutation(&self.vertex_map)
            && perm::is_permutation(&self.flag_map)
            && perm::is_permutation(&self.arc_map)
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> GraphMap {
        GraphMap {
            vertex_map: perm::inverse(&self.vertex_map),
            flag_map: perm::inverse(&self.flag_map),
            arc_map: perm::inverse(&self.arc_map),
        }
    }

    pub fn fixes_ports(&self, source_ports: &[usize], target_ports: &[usize]) -> bool {
        source_ports.len() == target_ports.len()
            && source_ports
                .iter()
                .zip(target_ports)
                .all(|(&p, &q)| self.arc_map[p] == q)
    }
}

fn check_shape(src: &FeynmanGraph, tgt: &FeynmanGraph, f: &GraphMap) -> Result<(), MorphismError> {
    let parts: [(&'static str, &Vec<usize>, usize, usize); 3] = [
        ("vertex", &f.vertex_map, src.num_vertices(), tgt.num_vertices()),
        ("flag", &f.flag_map, src.num_flags(), tgt.num_flags()),
        ("arc", &f.arc_map, src.num_arcs(), tgt.num_arcs()),
    ];
    for (component, map, expected, bound) in parts {
        if map.len() != expected {
            return Err(MorphismError::WrongLength {
                component,
                found: map.len(),
                expected,
            });
        }
        if let Some((index, &value)) = map.iter().enumerate().find(|(_, &x)| x >= bound) {
            return Err(MorphismError::IndexOutOfRange {
                component,
                index,
                value,
            });
        }
    }
    Ok(())
}

/// Whether `f` commutes with the structure maps (without the pullback condition).
pub fn is_graph_map(src: &FeynmanGraph, tgt: &FeynmanGraph, f: &GraphMap) -> Result<bool, MorphismError> {
    check_shape(src, tgt, f)?;
    let inv_ok = (0..src.num_arcs()).all(|a| f.arc_map[src.inv(a)] == tgt.inv(f.arc_map[a]));
    let flags_ok = src.flags().iter().enumerate().all(|(h, fl)| {
        let image = tgt.flag(f.flag_map[h]);
        image.arc == f.arc_map[fl.arc] && image.vertex == f.vertex_map[fl.vertex]
    });
    Ok(inv_ok && flags_ok)
}

/// Full etale test: commutation plus local bijectivity at every vertex.
pub fn check_etale(src: &FeynmanGraph, tgt: &FeynmanGraph, f: &GraphMap) -> Result<bool, MorphismError> {
    if !is_graph_map(src, tgt, f)? {
        return Ok(false);
    }
    for v in 0..src.num_vertices() {
        let here = src.flags_at(v);
        let there = tgt.flags_at(f.vertex_map[v]);
        if here.len() != there.len() {
            return Ok(false);
        }
        let mut images: Vec<usize> = here.iter().map(|&h| f.flag_map[h]).collect();
        images.sort_unstable();
        images.dedup();
        if images.len() != here.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Search<'a> {
    src: &'a FeynmanGraph,
    tgt: &'a FeynmanGraph,
    vertex_map: Vec<Option<usize>>,
    flag_map: Vec<Option<usize>>,
}

impl Search<'_> {
    /// Assigns `h -> h'` and everything forced by it; returns the undo log or
    /// `None` on a contradiction (after undoing).
    fn assign(&mut self, h: usize, h2: usize) -> Option<Vec<Change>> {
        let mut log = Vec::new();
        let mut stack = vec![(h, h2)];
        while let Some((h, h2)) = stack.pop() {
            match self.flag_map[h] {
                Some(x) if x == h2 => continue,
                Some(_) => {
                    self.undo(log);
                    return None;
                }
                None => {}
            }
            let v = self.src.flag(h).vertex;
            let w = self.tgt.flag(h2).vertex;
            match self.vertex_map[v] {
                Some(x) if x != w => {
                    self.undo(log);
                    return None;
                }
                Some(_) => {}
                None => {
                    if self.src.valence(v) != self.tgt.valence(w) {
                        self.undo(log);
                        return None;
                    }
                    self.vertex_map[v] = Some(w);
                    log.push(Change::Vertex(v));
                }
            }
            // local injectivity at v
            if self.src.flags_at(v).iter().any(|&g| self.flag_map[g] == Some(h2)) {
                self.undo(log);
                return None;
            }
            self.flag_map[h] = Some(h2);
            log.push(Change::Flag(h));
            let partner = self.src.inv(self.src.flag(h).arc);
            if let Some(g) = self.src.flag_of_arc(partner) {
                let image_partner = self.tgt.inv(self.tgt.flag(h2).arc);
                match self.tgt.flag_of_arc(image_partner) {
                    Some(g2) => stack.push((g, g2)),
                    None => {
                        self.undo(log);
                        return None;
                    }
                }
            }
        }
        Some(log)
    }

    fn undo(&mut self, log: Vec<Change>) {
        for c in log.into_iter().rev() {
            match c {
                Change::Vertex(v) => self.vertex_map[v] = None,
                Change::Flag(h) => self.flag_map[h] = None,
            }
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(GraphMap) -> ControlFlow<()>) -> ControlFlow<()> {
        // a mapped vertex with unmapped flags
        let pending = (0..self.src.num_vertices()).find(|&v| {
            self.vertex_map[v].is_some()
                && self.src.flags_at(v).iter().any(|&h| self.flag_map[h].is_none())
        });
        let Some(v) = pending else {
            return visit(self.finish());
        };
        let w = self.vertex_map[v].unwrap();
        let h = *self
            .src
            .flags_at(v)
            .iter()
            .find(|&&h| self.flag_map[h].is_none())
            .unwrap();
        for &h2 in self.tgt.flags_at(w) {
            if let Some(log) = self.assign(h, h2) {
                let flow = self.run(visit);
                self.undo(log);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    fn finish(&self) -> GraphMap {
        let flag_map: Vec<usize> = self.flag_map.iter().map(|x| x.unwrap()).collect();
        let mut arc_map = vec![usize::MAX; self.src.num_arcs()];
        for (h, fl) in self.src.flags().iter().enumerate() {
            let target_arc = self.tgt.flag(flag_map[h]).arc;
            arc_map[fl.arc] = target_arc;
            arc_map[self.src.inv(fl.arc)] = self.tgt.inv(target_arc);
        }
        GraphMap {
            vertex_map: self.vertex_map.iter().map(|x| x.unwrap()).collect(),
            flag_map,
            arc_map,
        }
    }
}

enum Change {
    Vertex(usize),
    Flag(usize),
}

/// Calls `visit` on every etale map `src -> tgt` (in search order) until it breaks.
pub fn for_each_etale(
    src: &FeynmanGraph,
    tgt: &FeynmanGraph,
    mut visit: impl FnMut(GraphMap) -> ControlFlow<()>,
) {
    if src.num_vertices() == 0 {
        // ⋆: one map per target arc
        for a in 0..tgt.num_arcs() {
            let mut arc_map = vec![0; 2];
            arc_map[0] = a;
            arc_map[src.inv(0)] = tgt.inv(a);
            let map = GraphMap {
                vertex_map: Vec::new(),
                flag_map: Vec::new(),
                arc_map,
            };
            if visit(map).is_break() {
                return;
            }
        }
        return;
    }
    let mut search = Search {
        src,
        tgt,
        vertex_map: vec![None; src.num_vertices()],
        flag_map: vec![None; src.num_flags()],
    };
    // the source is connected, so fixing the image of vertex 0 determines the rest
    for w in 0..tgt.num_vertices() {
        if tgt.valence(w) != src.valence(0) {
            continue;
        }
        search.vertex_map[0] = Some(w);
        let flow = search.run(&mut visit);
        search.vertex_map[0] = None;
        if flow.is_break() {
            return;
        }
    }
}

/// All etale maps `src -> tgt`, sorted by `(vertex_map, flag_map, arc_map)`.
pub fn enumerate_etale(src: &FeynmanGraph, tgt: &FeynmanGraph) -> Vec<GraphMap> {
    let mut out = Vec::new();
    for_each_etale(src, tgt, |m| {
        out.push(m);
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

fn same_counts(a: &FeynmanGraph, b: &FeynmanGraph) -> bool {
    a.num_arcs() == b.num_arcs() && a.num_flags() == b.num_flags() && a.num_vertices() == b.num_vertices()
}

/// An isomorphism `g -> h`, if any.
pub fn is_isomorphic(g: &FeynmanGraph, h: &FeynmanGraph) -> Option<GraphMap> {
    isomorphism_fixing(g, None, h, None)
}

/// An isomorphism sending `g_ports[k]` to `h_ports[k]` when ports are given.
pub fn isomorphism_fixing(
    g: &FeynmanGraph,
    g_ports: Option<&[usize]>,
    h: &FeynmanGraph,
    h_ports: Option<&[usize]>,
) -> Option<GraphMap> {
    if !same_counts(g, h) {
        return None;
    }
    let mut found = None;
    for_each_etale(g, h, |m| {
        let ports_ok = match (g_ports, h_ports) {
            (Some(p), Some(q)) => m.fixes_ports(p, q),
            _ => true,
        };
        if ports_ok && m.is_bijective(h) {
            found = Some(m);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

/// All isomorphisms `g -> h` matching the given port lists.
pub fn isomorphisms_fixing(g: &FeynmanGraph, g_ports: &[usize], h: &FeynmanGraph, h_ports: &[usize]) -> Vec<GraphMap> {
    if !same_counts(g, h) {
        return Vec::new();
    }
    let mut out: Vec<GraphMap> = enumerate_etale(g, h)
        .into_iter()
        .filter(|m| m.is_bijective(h) && m.fixes_ports(g_ports, h_ports))
        .collect();
    out.sort();
    out
}

/// The automorphism group of `g`; with `fix_ports`, only automorphisms that
/// are the identity on every port.
pub fn automorphism_group(g: &FeynmanGraph, fix_ports: bool) -> Vec<GraphMap> {
    let ports = g.ports();
    enumerate_etale(g, g)
        .into_iter()
        .filter(|m| m.is_bijective(g) && (!fix_ports || m.fixes_ports(&ports, &ports)))
        .collect()
}

/// Port-fixing automorphisms of an n-graph with the given port labeling.
pub fn automorphisms_fixing(g: &FeynmanGraph, ports: &[usize]) -> Vec<GraphMap> {
    isomorphisms_fixing(g, ports, g, ports)
}

/// A canonical representative of the isomorphism class of `g`.
pub fn canonical_form(g: &FeynmanGraph) -> FeynmanGraph {
    canon::canonical_graph(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Flag;

    fn loop_graph() -> FeynmanGraph {
        FeynmanGraph::new(vec![1, 0], 1, vec![Flag { arc: 0, vertex: 0 }, Flag { arc: 1, vertex: 0 }]).unwrap()
    }

    #[test]
    fn identity_is_etale() {
        for g in [FeynmanGraph::trivial(), FeynmanGraph::corolla(3), loop_graph()] {
            assert_eq!(check_etale(&g, &g, &GraphMap::identity(&g)), Ok(true));
        }
    }

    #[test]
    fn star_swap_is_etale() {
        let s = FeynmanGraph::trivial();
        let swap = GraphMap {
            vertex_map: vec![],
            flag_map: vec![],
            arc_map: vec![1, 0],
        };
        assert_eq!(check_etale(&s, &s, &swap), Ok(true));
    }

    #[test]
    fn valence_mismatch_is_not_etale() {
        let c2 = FeynmanGraph::corolla(2);
        let c3 = FeynmanGraph::corolla(3);
        let f = GraphMap {
            vertex_map: vec![0],
            flag_map: vec![0, 1],
            arc_map: vec![0, 1, 2, 3],
        };
        assert_eq!(check_etale(&c2, &c3, &f), Ok(false));
    }

    #[test]
    fn malformed_maps_are_reported() {
        let c2 = FeynmanGraph::corolla(2);
        let f = GraphMap {
            vertex_map: vec![0],
            flag_map: vec![0, 5],
            arc_map: vec![0, 1, 2, 3],
        };
        assert!(matches!(
            check_etale(&c2, &c2, &f),
            Err(MorphismError::IndexOutOfRange { component: "flag", .. })
        ));
        let short = GraphMap {
            vertex_map: vec![0],
            flag_map: vec![0],
            arc_map: vec![0, 1, 2, 3],
        };
        assert!(matches!(check_etale(&c2, &c2, &short), Err(MorphismError::WrongLength { .. })));
    }

    #[test]
    fn hom_table() {
        let star = FeynmanGraph::trivial();
        assert_eq!(enumerate_etale(&star, &star).len(), 2);
        assert_eq!(enumerate_etale(&FeynmanGraph::corolla(3), &FeynmanGraph::corolla(3)).len(), 6);
        assert_eq!(enumerate_etale(&star, &FeynmanGraph::corolla(3)).len(), 6);
        assert_eq!(enumerate_etale(&FeynmanGraph::corolla(2), &star).len(), 0);
    }

    #[test]
    fn loop_graph_port_fixing_automorphisms() {
        let g = loop_graph();
        assert_eq!(automorphism_group(&g, true).len(), 2);
        assert_eq!(automorphism_group(&FeynmanGraph::corolla(4), true).len(), 1);
        assert_eq!(automorphism_group(&FeynmanGraph::trivial(), false).len(), 2);
    }

    #[test]
    fn enumeration_is_sorted_and_duplicate_free() {
        let g = loop_graph();
        let maps = enumerate_etale(&FeynmanGraph::corolla(2), &g);
        let mut sorted = maps.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(maps, sorted);
        assert_eq!(maps.len(), 2);
    }
}
