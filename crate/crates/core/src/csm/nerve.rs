//! The nerve of an algebra: the presheaf sending a graph to its decorations
//! by the algebra's carrier.

use crate::graph::FeynmanGraph;
use crate::site::{presheaf_from, FinitePresheaf};
use crate::species::{decorations_with, restrict, DecoratedGraph, Decoration, Label};

use super::algebra::CsmAlgebra;
use super::kleisli::KleisliMap;
use super::CsmError;

/// The nerve restricted to a finite universe of graphs, with the decoration
/// each element index stands for.
#[derive(Clone, Debug)]
pub struct Nerve<L> {
    pub presheaf: FinitePresheaf,
    /// `elements[i][x]`: the decoration of graph `i` that element `x` is.
    pub elements: Vec<Vec<Decoration<L>>>,
}

/// Builds the nerve of `alg` on `universe`, with restriction maps along every
/// etale map between universe graphs.
pub fn nerve<L: Label>(alg: &CsmAlgebra<L>, universe: &[FeynmanGraph]) -> Result<Nerve<L>, CsmError> {
    for g in universe {
        if !alg.bounds.admits(g) {
            return Err(CsmError::BoundsNotClosed(format!(
                "a universe graph with {} vertices and {} inner edges",
                g.num_vertices(),
                g.num_inner_edges()
            )));
        }
    }
    let elements: Vec<Vec<Decoration<L>>> = universe
        .iter()
        .map(|g| decorations_with(&alg.species, g, &alg.carrier, None))
        .collect();
    let sizes: Vec<usize> = elements.iter().map(Vec::len).collect();
    let presheaf = presheaf_from(universe, &sizes, |i, j, m| {
        elements[j]
            .iter()
            .map(|d| {
                let r = restrict(&alg.species, &universe[i], &universe[j], m, d);
                elements[i].binary_search(&r).expect("restrictions of decorations are decorations")
            })
            .collect()
    });
    Ok(Nerve { presheaf, elements })
}

/// The action of a Kleisli map `G -> G'` on the nerve: restrict along the
/// etale part, then evaluate each piece with the structure map.
pub fn refine_action<L: Label>(alg: &CsmAlgebra<L>, phi: &KleisliMap, x: &Decoration<L>) -> Result<Decoration<L>, CsmError> {
    let refined = phi.refined()?;
    let on_refined = restrict(&alg.species, &refined.graph, &phi.target, &phi.etale, x);
    let g = &phi.source;
    let mut labels = Vec::with_capacity(g.num_vertices());
    for v in 0..g.num_vertices() {
        let piece = &phi.pieces[v];
        let colors = refined.piece_arcs[v].iter().map(|&a| on_refined.colors[a]).collect();
        let mut piece_labels = vec![None; piece.graph.num_vertices()];
        for (w, &(outer, inner)) in refined.vertex_origin.iter().enumerate() {
            if outer == v {
                piece_labels[inner] = Some(on_refined.labels[w].clone());
            }
        }
        let decorated = DecoratedGraph {
            graph: piece.graph.clone(),
            ports: piece.ports.clone(),
            decoration: Decoration {
                colors,
                labels: piece_labels.into_iter().map(|l| l.expect("every piece vertex is refined")).collect(),
            },
        };
        labels.push(alg.act(&decorated)?);
    }
    Ok(Decoration {
        colors: refined.arc_image.iter().map(|&a| on_refined.colors[a]).collect(),
        labels,
    })
}
