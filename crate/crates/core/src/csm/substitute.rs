//! Replacing a vertex by a graph with the same interface.

use crate::graph::{FeynmanGraph, Flag};

use super::CsmError;

/// A graph together with an ordering of its ports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct NGraph {
    pub graph: FeynmanGraph,
    pub ports: Vec<usize>,
}

impl NGraph {
    /// Fails unless `ports` lists every port exactly once.
    pub fn new(graph: FeynmanGraph, ports: Vec<usize>) -> Result<Self, CsmError> {
        let mut sorted = ports.clone();
        sorted.sort_unstable();
        if sorted != graph.ports() {
            return Err(CsmError::BadPortLabeling);
        }
        Ok(Self { graph, ports })
    }

    /// The corolla with its ports in flag order.
    pub fn corolla(n: usize) -> Self {
        Self {
            graph: FeynmanGraph::corolla(n),
            ports: (0..n).map(|k| 2 * k + 1).collect(),
        }
    }

    pub fn trivial() -> Self {
        Self {
            graph: FeynmanGraph::trivial(),
            ports: vec![0, 1],
        }
    }

    pub fn arity(&self) -> usize {
        self.ports.len()
    }
}

/// The result of a substitution with the index maps from both inputs.
#[derive(Clone, Debug)]
pub struct Substitution {
    pub graph: FeynmanGraph,
    /// New index of each vertex of the outer graph; `None` for the replaced one.
    pub outer_vertex: Vec<Option<usize>>,
    pub outer_flag: Vec<Option<usize>>,
    pub outer_arc: Vec<usize>,
    pub inner_vertex: Vec<usize>,
    pub inner_flag: Vec<usize>,
    pub inner_arc: Vec<usize>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Replaces vertex `v` of `g` by `k`, matching the `j`-th flag at `v` with
/// port `glue[j]` of `k`.
///
/// The port `p` matched with flag `h` is fused with `i(s(h))` and `i(p)` with
/// `s(h)`. The remaining flags of `g` keep their relative order and come
/// before the flags of `k`, so per-vertex flag orders are preserved.
pub fn substitute(g: &FeynmanGraph, v: usize, k: &NGraph, glue: &[usize]) -> Result<Substitution, CsmError> {
    let at_v = g.flags_at(v);
    if k.arity() != at_v.len() || glue.len() != at_v.len() {
        return Err(CsmError::ArityMismatch {
            vertex: v,
            valence: at_v.len(),
            arity: k.arity(),
        });
    }
    let kg = &k.graph;
    let ng = g.num_arcs();
    let total = ng + kg.num_arcs();
    let mut parent: Vec<usize> = (0..total).collect();
    for (j, &h) in at_v.iter().enumerate() {
        let p = k.ports[glue[j]];
        let a = g.flag(h).arc;
        union(&mut parent, g.inv(a), ng + p);
        union(&mut parent, a, ng + kg.inv(p));
    }
    // number the classes in order of first appearance
    let mut class_index = vec![usize::MAX; total];
    let mut arc_of = vec![0; total];
    let mut classes = 0;
    for x in 0..total {
        let r = find(&mut parent, x);
        if class_index[r] == usize::MAX {
            class_index[r] = classes;
            classes += 1;
        }
        arc_of[x] = class_index[r];
    }
    let mut involution = vec![usize::MAX; classes];
    for x in 0..total {
        let partner = if x < ng { g.inv(x) } else { ng + kg.inv(x - ng) };
        involution[arc_of[x]] = arc_of[partner];
    }
    let mut outer_vertex = vec![None; g.num_vertices()];
    let mut vertices = 0;
    for (w, slot) in outer_vertex.iter_mut().enumerate() {
        if w != v {
            *slot = Some(vertices);
            vertices += 1;
        }
    }
    let inner_vertex: Vec<usize> = (0..kg.num_vertices()).map(|w| vertices + w).collect();
    vertices += kg.num_vertices();
    let mut flags = Vec::new();
    let mut outer_flag = vec![None; g.num_flags()];
    for (h, fl) in g.flags().iter().enumerate() {
        if fl.vertex != v {
            outer_flag[h] = Some(flags.len());
            flags.push(Flag {
                arc: arc_of[fl.arc],
                vertex: outer_vertex[fl.vertex].unwrap(),
            });
        }
    }
    let mut inner_flag = Vec::with_capacity(kg.num_flags());
    for fl in kg.flags() {
        inner_flag.push(flags.len());
        flags.push(Flag {
            arc: arc_of[ng + fl.arc],
            vertex: inner_vertex[fl.vertex],
        });
    }
    // an arc pair carrying no flag is a closed circle unless it is the
    // interface of the outer graph
    let mut carried = vec![false; classes];
    for fl in &flags {
        carried[fl.arc] = true;
    }
    let mut interface = vec![false; classes];
    for a in g.ports() {
        interface[arc_of[a]] = true;
    }
    for c in 0..classes {
        if !carried[c] && !carried[involution[c]] && !interface[c] && !interface[involution[c]] {
            return Err(CsmError::CircleUnrepresentable { vertex: v });
        }
    }
    let graph = FeynmanGraph::new(involution, vertices, flags).map_err(CsmError::InvalidResult)?;
    let outer_arc = arc_of[..ng].to_vec();
    let inner_arc = arc_of[ng..].to_vec();
    let inner_here = g.flags_at(v).iter().filter(|&&h| !g.is_port(g.inv(g.flag(h).arc))).count();
    let expected_inner =
        g.num_inner_edges() + kg.num_inner_edges() - usize::from(kg.num_vertices() == 0 && inner_here > 0);
    assert_eq!(graph.num_inner_edges(), expected_inner, "inner edge count after substitution");
    debug_assert_eq!(graph.arity(), g.arity());
    Ok(Substitution {
        graph,
        outer_vertex,
        outer_flag,
        outer_arc,
        inner_vertex,
        inner_flag,
        inner_arc,
    })
}

/// Substitutes every vertex `v` of `g` by `pieces[v]`, gluing the `j`-th flag
/// at `v` to port `j`, in the order given by `order`.
///
/// Returns the result and, for each arc of `g`, its image.
pub fn substitute_all(g: &FeynmanGraph, pieces: &[NGraph], order: &[usize]) -> Result<Refined, CsmError> {
    let mut current = g.clone();
    let mut vertex_now: Vec<Option<usize>> = (0..g.num_vertices()).map(Some).collect();
    let mut arc_now: Vec<usize> = (0..g.num_arcs()).collect();
    // origin (outer vertex, piece vertex) of every vertex of the current graph
    let mut origin: Vec<Option<(usize, usize)>> = vec![None; g.num_vertices()];
    let mut piece_arcs: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];
    for &v in order {
        let at = vertex_now[v].expect("each vertex is substituted once");
        let glue: Vec<usize> = (0..pieces[v].arity()).collect();
        let s = substitute(&current, at, &pieces[v], &glue)?;
        for slot in vertex_now.iter_mut() {
            *slot = slot.and_then(|w| s.outer_vertex[w]);
        }
        for a in arc_now.iter_mut() {
            *a = s.outer_arc[*a];
        }
        for arcs in piece_arcs.iter_mut() {
            for a in arcs.iter_mut() {
                *a = s.outer_arc[*a];
            }
        }
        piece_arcs[v] = s.inner_arc.clone();
        let mut next_origin = vec![None; s.graph.num_vertices()];
        for (w, o) in origin.iter().enumerate() {
            if let Some(nw) = s.outer_vertex[w] {
                next_origin[nw] = *o;
            }
        }
        for (pw, &nw) in s.inner_vertex.iter().enumerate() {
            next_origin[nw] = Some((v, pw));
        }
        origin = next_origin;
        current = s.graph;
    }
    Ok(Refined {
        graph: current,
        arc_image: arc_now,
        vertex_origin: origin.into_iter().map(|o| o.expect("every vertex was substituted")).collect(),
        piece_arcs,
    })
}

/// A graph with every vertex replaced.
#[derive(Clone, Debug)]
pub struct Refined {
    pub graph: FeynmanGraph,
    /// Image of each arc of the outer graph.
    pub arc_image: Vec<usize>,
    /// `(outer vertex, piece vertex)` each vertex came from.
    pub vertex_origin: Vec<(usize, usize)>,
    /// Image of each arc of each piece.
    pub piece_arcs: Vec<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphisms::{is_isomorphic, isomorphism_fixing};

    fn path3() -> FeynmanGraph {
        // a - v - b with a port at each end
        let involution = (0..8).map(|a| a ^ 1).collect();
        let flags = vec![
            Flag { arc: 0, vertex: 0 },
            Flag { arc: 2, vertex: 0 },
            Flag { arc: 3, vertex: 1 },
            Flag { arc: 4, vertex: 1 },
            Flag { arc: 5, vertex: 2 },
            Flag { arc: 6, vertex: 2 },
        ];
        FeynmanGraph::new(involution, 3, flags).unwrap()
    }

    fn loop_graph() -> FeynmanGraph {
        FeynmanGraph::new(vec![1, 0], 1, vec![Flag { arc: 0, vertex: 0 }, Flag { arc: 1, vertex: 0 }]).unwrap()
    }

    #[test]
    fn corolla_is_a_unit() {
        let g = path3();
        for v in 0..3 {
            let k = NGraph::corolla(g.valence(v));
            let glue: Vec<usize> = (0..k.arity()).collect();
            let s = substitute(&g, v, &k, &glue).unwrap();
            let iso = isomorphism_fixing(&g, Some(&g.ports()), &s.graph, Some(&g.ports().iter().map(|&a| s.outer_arc[a]).collect::<Vec<_>>()));
            assert!(iso.is_some());
        }
    }

    #[test]
    fn star_shortens_a_path() {
        let s = substitute(&path3(), 1, &NGraph::trivial(), &[0, 1]).unwrap();
        assert_eq!(s.graph.num_vertices(), 2);
        let two_path = FeynmanGraph::new(
            (0..6).map(|a| a ^ 1).collect(),
            2,
            vec![
                Flag { arc: 0, vertex: 0 },
                Flag { arc: 2, vertex: 0 },
                Flag { arc: 3, vertex: 1 },
                Flag { arc: 4, vertex: 1 },
            ],
        )
        .unwrap();
        assert!(is_isomorphic(&s.graph, &two_path).is_some());
    }

    #[test]
    fn star_in_a_loop_is_a_circle() {
        let err = substitute(&loop_graph(), 0, &NGraph::trivial(), &[0, 1]).unwrap_err();
        assert!(matches!(err, CsmError::CircleUnrepresentable { .. }));
    }

    #[test]
    fn star_in_a_corolla_is_a_star() {
        let s = substitute(&FeynmanGraph::corolla(2), 0, &NGraph::trivial(), &[0, 1]).unwrap();
        assert_eq!(s.graph.num_vertices(), 0);
        assert_eq!(s.graph.num_arcs(), 2);
    }

    #[test]
    fn arity_must_match() {
        let err = substitute(&path3(), 1, &NGraph::corolla(3), &[0, 1]).unwrap_err();
        assert!(matches!(err, CsmError::ArityMismatch { .. }));
    }
}
