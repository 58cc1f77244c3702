//! Kleisli maps: each vertex is replaced by a graph with the same interface,
//! and the refined graph maps etale into the target.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canon::canonical_graph;
use crate::generate::{n_graph_classes, TruncationBounds};
use crate::graph::FeynmanGraph;
use crate::morphisms::{check_etale, enumerate_etale, isomorphisms_fixing, GraphMap};
use crate::perm;

use super::substitute::{substitute_all, NGraph, Refined};
use super::CsmError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KleisliMap {
    pub source: FeynmanGraph,
    pub target: FeynmanGraph,
    /// The graph replacing each vertex; the `j`-th flag at the vertex is glued
    /// to port `j`.
    pub pieces: Vec<NGraph>,
    /// Etale map from the refined graph to the target.
    pub etale: GraphMap,
}

/// Vertex and flag components of a map determined by its arc component,
/// with vertices without flags sent as `vertex_hint` says.
fn complete_map(src: &FeynmanGraph, tgt: &FeynmanGraph, arc_map: Vec<usize>, vertex_hint: &[usize]) -> GraphMap {
    let flag_map: Vec<usize> = src
        .flags()
        .iter()
        .map(|f| tgt.flag_of_arc(arc_map[f.arc]).expect("flags map to flags"))
        .collect();
    let vertex_map = (0..src.num_vertices())
        .map(|v| match src.flags_at(v).first() {
            Some(&h) => tgt.flag(flag_map[h]).vertex,
            None => vertex_hint[v],
        })
        .collect();
    GraphMap {
        vertex_map,
        flag_map,
        arc_map,
    }
}

/// The isomorphism from `g` refined by its own corollas back to `g`.
fn unrefine(g: &FeynmanGraph, refined: &Refined) -> GraphMap {
    let arc_map = perm::inverse(&refined.arc_image);
    let hint: Vec<usize> = refined.vertex_origin.iter().map(|&(v, _)| v).collect();
    complete_map(&refined.graph, g, arc_map, &hint)
}

fn corollas(g: &FeynmanGraph) -> Vec<NGraph> {
    (0..g.num_vertices()).map(|v| NGraph::corolla(g.valence(v))).collect()
}

impl KleisliMap {
    /// Validates the pieces' arities and the etale component.
    pub fn new(source: FeynmanGraph, target: FeynmanGraph, pieces: Vec<NGraph>, etale: GraphMap) -> Result<Self, CsmError> {
        let map = KleisliMap {
            source,
            target,
            pieces,
            etale,
        };
        let refined = map.refined()?;
        match check_etale(&refined.graph, &map.target, &map.etale) {
            Ok(true) => Ok(map),
            Ok(false) => Err(CsmError::InvalidKleisli("the etale component is not etale".into())),
            Err(e) => Err(CsmError::InvalidKleisli(e.to_string())),
        }
    }

    /// The identity of `g` in the Kleisli category.
    pub fn identity(g: &FeynmanGraph) -> Self {
        Self::from_etale(g, g, &GraphMap::identity(g))
    }

    /// An etale map seen as a Kleisli map that refines nothing.
    pub fn from_etale(source: &FeynmanGraph, target: &FeynmanGraph, f: &GraphMap) -> Self {
        let pieces = corollas(source);
        let order: Vec<usize> = (0..source.num_vertices()).collect();
        let refined = substitute_all(source, &pieces, &order).expect("corollas always substitute");
        KleisliMap {
            source: source.clone(),
            target: target.clone(),
            pieces,
            etale: unrefine(source, &refined).then(f),
        }
    }

    /// The source with every vertex replaced by its piece.
    pub fn refined(&self) -> Result<Refined, CsmError> {
        if self.pieces.len() != self.source.num_vertices() {
            return Err(CsmError::InvalidKleisli(format!(
                "{} pieces for {} vertices",
                self.pieces.len(),
                self.source.num_vertices()
            )));
        }
        for (v, p) in self.pieces.iter().enumerate() {
            if p.arity() != self.source.valence(v) {
                return Err(CsmError::ArityMismatch {
                    vertex: v,
                    valence: self.source.valence(v),
                    arity: p.arity(),
                });
            }
        }
        let order: Vec<usize> = (0..self.source.num_vertices()).collect();
        substitute_all(&self.source, &self.pieces, &order)
    }

    /// Postcomposition with an etale map out of the target.
    pub fn then_etale(&self, target: &FeynmanGraph, f: &GraphMap) -> Self {
        KleisliMap {
            source: self.source.clone(),
            target: target.clone(),
            pieces: self.pieces.clone(),
            etale: self.etale.then(f),
        }
    }

    /// Whether every piece is a corolla, so the map only has an etale part.
    pub fn is_etale(&self) -> bool {
        self.pieces.iter().all(|p| p.graph.num_vertices() == 1 && p.graph.num_inner_edges() == 0)
    }
}

/// Splits `phi` into a refinement `G -> R` (whose etale part is the identity
/// of `R`) followed by the etale map `R -> G'`.
pub fn factorize_kleisli(phi: &KleisliMap) -> Result<(KleisliMap, GraphMap), CsmError> {
    let refined = phi.refined()?;
    let refinement = KleisliMap {
        source: phi.source.clone(),
        target: refined.graph.clone(),
        pieces: phi.pieces.clone(),
        etale: GraphMap::identity(&refined.graph),
    };
    Ok((refinement, phi.etale.clone()))
}

/// Equality of Kleisli maps: an isomorphism of refined graphs that respects
/// the pieces, fixes the glued arcs and commutes with the etale parts.
pub fn kleisli_equal(a: &KleisliMap, b: &KleisliMap) -> Result<bool, CsmError> {
    if a.source != b.source || a.target != b.target {
        return Ok(false);
    }
    let (ra, rb) = (a.refined()?, b.refined()?);
    if ra.graph.num_arcs() != rb.graph.num_arcs() || ra.graph.num_vertices() != rb.graph.num_vertices() {
        return Ok(false);
    }
    let candidates = isomorphisms_fixing(&ra.graph, &ra.arc_image, &rb.graph, &rb.arc_image);
    Ok(candidates.iter().any(|psi| {
        (0..ra.graph.num_vertices()).all(|w| ra.vertex_origin[w].0 == rb.vertex_origin[psi.vertex_map[w]].0)
            && psi.then(&b.etale) == a.etale
    }))
}

/// All factorizations `G -> R' -> G'` of `phi` whose middle graph has at
/// most `max_arcs` arcs: pieces range over n-graph classes within `bounds`
/// with every port order, etale parts over all etale maps.
///
/// Returns the canonical forms of the middle graphs found.
pub fn search_factorizations(
    phi: &KleisliMap,
    bounds: TruncationBounds,
    max_arcs: usize,
) -> Result<Vec<FeynmanGraph>, CsmError> {
    let g = &phi.source;
    // a piece of arity n adds its arcs minus 2n; only ⋆ adds a negative amount
    let shrinkable = (0..g.num_vertices()).filter(|&v| g.valence(v) == 2).count();
    let per_vertex: Vec<Vec<NGraph>> = (0..g.num_vertices())
        .map(|v| {
            let n = g.valence(v);
            let others = 2 * (shrinkable - usize::from(n == 2));
            let mut options = Vec::new();
            for (class, ports) in n_graph_classes(n, bounds) {
                if class.num_arcs() + g.num_arcs() > max_arcs + 2 * n + others {
                    continue;
                }
                for order in perm::permutations(n) {
                    options.push(NGraph {
                        graph: class.clone(),
                        ports: order.iter().map(|&k| ports[k]).collect(),
                    });
                }
            }
            options
        })
        .collect();
    let mut found = BTreeSet::new();
    let mut choice = vec![0; g.num_vertices()];
    if per_vertex.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    loop {
        let pieces: Vec<NGraph> = choice.iter().enumerate().map(|(v, &i)| per_vertex[v][i].clone()).collect();
        let candidate = KleisliMap {
            source: g.clone(),
            target: phi.target.clone(),
            pieces,
            etale: GraphMap::identity(&phi.target),
        };
        if let Ok(refined) = candidate.refined() {
            if refined.graph.num_arcs() <= max_arcs {
                for e in enumerate_etale(&refined.graph, &phi.target) {
                    let k = KleisliMap {
                        etale: e,
                        ..candidate.clone()
                    };
                    if kleisli_equal(&k, phi)? {
                        found.insert(canonical_graph(&refined.graph));
                    }
                }
            }
        }
        let mut v = 0;
        while v < choice.len() {
            choice[v] += 1;
            if choice[v] < per_vertex[v].len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
        if v == choice.len() {
            break;
        }
    }
    Ok(found.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Flag;
    use crate::morphisms::is_isomorphic;

    fn bubble() -> NGraph {
        // two vertices joined by two edges, one port at each
        let involution = (0..8).map(|a| a ^ 1).collect();
        let flags = vec![
            Flag { arc: 0, vertex: 0 },
            Flag { arc: 4, vertex: 0 },
            Flag { arc: 6, vertex: 0 },
            Flag { arc: 2, vertex: 1 },
            Flag { arc: 5, vertex: 1 },
            Flag { arc: 7, vertex: 1 },
        ];
        NGraph::new(FeynmanGraph::new(involution, 2, flags).unwrap(), vec![1, 3]).unwrap()
    }

    #[test]
    fn identity_factors_trivially() {
        let g = bubble().graph;
        let id = KleisliMap::identity(&g);
        let (r, e) = factorize_kleisli(&id).unwrap();
        assert!(r.is_etale());
        assert!(is_isomorphic(&r.target, &g).is_some());
        assert!(kleisli_equal(&r.then_etale(&g, &e), &id).unwrap());
        assert_eq!(e, id.etale);
    }

    #[test]
    fn refining_a_corolla_into_a_bubble() {
        let b = bubble();
        let c2 = FeynmanGraph::corolla(2);
        let phi = KleisliMap::new(c2.clone(), b.graph.clone(), vec![b.clone()], {
            let r = substitute_all(&c2, std::slice::from_ref(&b), &[0]).unwrap();
            let ports_r: Vec<usize> = (0..2).map(|k| r.arc_image[2 * k + 1]).collect();
            crate::morphisms::isomorphism_fixing(&r.graph, Some(&ports_r), &b.graph, Some(&b.ports)).unwrap()
        })
        .unwrap();
        let (r, e) = factorize_kleisli(&phi).unwrap();
        assert_eq!(canonical_graph(&r.target), canonical_graph(&b.graph));
        assert!(kleisli_equal(&r.then_etale(&b.graph, &e), &phi).unwrap());
        let middles = search_factorizations(&phi, TruncationBounds::new(2, 2), 8).unwrap();
        assert_eq!(middles, vec![canonical_graph(&b.graph)]);
    }

    #[test]
    fn different_etale_parts_differ() {
        let c2 = FeynmanGraph::corolla(2);
        let swap = crate::morphisms::enumerate_etale(&c2, &c2);
        assert_eq!(swap.len(), 2);
        let a = KleisliMap::from_etale(&c2, &c2, &swap[0]);
        let b = KleisliMap::from_etale(&c2, &c2, &swap[1]);
        assert!(!kleisli_equal(&a, &b).unwrap());
        assert!(kleisli_equal(&a, &a).unwrap());
    }
}
