//! The free species `F̄`, its unit and its multiplication.
//!
//! An element of `F̄[n]` is a connected n-graph decorated by `F`, up to
//! port-fixing isomorphism. It is stored in canonical form, with port `k` at
//! arc `k`, so equality of elements is equality of values.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::relabel;
use crate::generate::{n_graph_classes, TruncationBounds};
use crate::graph::{FeynmanGraph, Flag};
use crate::morphisms::{automorphisms_fixing, isomorphisms_fixing, GraphMap};
use crate::species::{
    decoration_orbits, decorations_with, transport, Carrier, Color, DecoratedGraph, Decoration, GraphicalSpecies, Label,
    OpLabel,
};

use super::substitute::{substitute, NGraph};
use super::CsmError;

/// A decorated n-graph in canonical form; its ports are the arcs `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FreeElement<L> {
    pub graph: FeynmanGraph,
    pub decoration: Decoration<L>,
}

impl<L: Label> FreeElement<L> {
    /// The class of a decorated n-graph.
    pub fn from_decorated(species: &GraphicalSpecies, d: &DecoratedGraph<L>) -> Self {
        let c = d.canonical(species);
        debug_assert!(c.ports.iter().enumerate().all(|(k, &p)| k == p));
        FreeElement {
            graph: c.graph,
            decoration: c.decoration,
        }
    }

    pub fn to_decorated(&self) -> DecoratedGraph<L> {
        DecoratedGraph {
            graph: self.graph.clone(),
            ports: (0..self.graph.arity()).collect(),
            decoration: self.decoration.clone(),
        }
    }

    pub fn ngraph(&self) -> NGraph {
        NGraph {
            graph: self.graph.clone(),
            ports: (0..self.graph.arity()).collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    /// ⋆ with its first port colored `c`.
    pub fn trivial(species: &GraphicalSpecies, c: Color) -> Self {
        FreeElement {
            graph: FeynmanGraph::trivial(),
            decoration: Decoration {
                colors: vec![c, species.tau(c)],
                labels: Vec::new(),
            },
        }
    }
}

impl<L: Label> Label for FreeElement<L> {
    fn arity(&self) -> usize {
        self.graph.arity()
    }

    fn pull(&self, perm: &[usize], species: &GraphicalSpecies) -> Self {
        let d = DecoratedGraph {
            graph: self.graph.clone(),
            ports: perm.to_vec(),
            decoration: self.decoration.clone(),
        };
        FreeElement::from_decorated(species, &d)
    }

    fn port_colors(&self, _species: &GraphicalSpecies) -> Vec<Color> {
        self.decoration.colors[..self.graph.arity()].to_vec()
    }

    fn weight(&self) -> usize {
        self.decoration.labels.iter().map(Label::weight).sum()
    }
}

/// The corolla labeled by `x`, as an element of the free species.
pub fn unit_of<L: Label>(species: &GraphicalSpecies, x: &L) -> FreeElement<L> {
    let n = x.arity();
    let ports = x.port_colors(species);
    let colors = (0..2 * n)
        .map(|a| if a % 2 == 1 { ports[a / 2] } else { species.tau(ports[a / 2]) })
        .collect();
    FreeElement::from_decorated(
        species,
        &DecoratedGraph {
            graph: FeynmanGraph::corolla(n),
            ports: (0..n).map(|k| 2 * k + 1).collect(),
            decoration: Decoration {
                colors,
                labels: vec![x.clone()],
            },
        },
    )
}

/// The unit `F → F̄` on a label of the species.
pub fn unit(species: &GraphicalSpecies, x: OpLabel) -> FreeElement<OpLabel> {
    unit_of(species, &x)
}

/// An n-graph class with its port-fixing automorphism group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGraphClass {
    pub graph: FeynmanGraph,
    pub ports: Vec<usize>,
    pub automorphisms: Vec<GraphMap>,
}

/// Connected n-graphs within bounds up to port-fixing isomorphism, sorted by
/// canonical form.
pub fn enumerate_n_graphs(n: usize, bounds: TruncationBounds) -> Vec<NGraphClass> {
    n_graph_classes(n, bounds)
        .into_iter()
        .map(|(graph, ports)| {
            let automorphisms = automorphisms_fixing(&graph, &ports);
            NGraphClass {
                graph,
                ports,
                automorphisms,
            }
        })
        .collect()
}

/// An element of `F̄[n]` with the size of its decoration orbit on the class
/// representative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreeOrbit {
    pub element: FreeElement<OpLabel>,
    pub orbit_size: usize,
}

/// `F̄[n]` within bounds, computed three ways and cross-checked: as orbits
/// of decorations under the automorphism groups, as a colimit over a groupoid
/// of n-graphs, and as components of the groupoid of decorated n-graphs.
pub fn free_apply(species: &GraphicalSpecies, n: usize, bounds: TruncationBounds) -> Result<Vec<FreeOrbit>, CsmError> {
    let carrier = Carrier::of_species(species);
    let classes = enumerate_n_graphs(n, bounds);
    let by_orbits = orbit_formula(species, &carrier, &classes);
    let by_colimit = colimit_formula(species, &carrier, &classes, n)?;
    let by_components = component_formula(species, &carrier, &classes, n)?;
    let mismatch = |detail: &str| CsmError::FormulaMismatch {
        arity: n,
        detail: detail.to_string(),
    };
    if by_orbits != by_colimit {
        return Err(mismatch("orbit sum and colimit"));
    }
    if by_orbits != by_components {
        return Err(mismatch("orbit sum and connected components"));
    }
    Ok(by_orbits)
}

/// The elements of `F̄[n]`, without cross-checking.
pub fn free_elements(species: &GraphicalSpecies, n: usize, bounds: TruncationBounds) -> Vec<FreeElement<OpLabel>> {
    let carrier = Carrier::of_species(species);
    orbit_formula(species, &carrier, &enumerate_n_graphs(n, bounds))
        .into_iter()
        .map(|o| o.element)
        .collect()
}

fn orbit_formula(species: &GraphicalSpecies, carrier: &Carrier<OpLabel>, classes: &[NGraphClass]) -> Vec<FreeOrbit> {
    let mut out = Vec::new();
    for c in classes {
        let decos = decorations_with(species, &c.graph, carrier, None);
        for (rep, size) in decoration_orbits(species, &c.graph, &c.ports, &decos) {
            let d = DecoratedGraph {
                graph: c.graph.clone(),
                ports: c.ports.clone(),
                decoration: rep,
            };
            out.push(FreeOrbit {
                element: FreeElement::from_decorated(species, &d),
                orbit_size: size,
            });
        }
    }
    out.sort();
    out
}

/// A random relabeling of an n-graph, as a bijection onto its image.
fn random_relabeling(g: &FeynmanGraph, rng: &mut ChaCha8Rng) -> GraphMap {
    let mut shuffle = |k: usize| {
        let mut xs: Vec<usize> = (0..k).collect();
        xs.shuffle(rng);
        xs
    };
    GraphMap {
        vertex_map: shuffle(g.num_vertices()),
        flag_map: shuffle(g.num_flags()),
        arc_map: shuffle(g.num_arcs()),
    }
}

/// The class representative and two relabeled copies of it.
fn copies(c: &NGraphClass, rng: &mut ChaCha8Rng) -> Vec<(FeynmanGraph, Vec<usize>)> {
    let mut out = vec![(c.graph.clone(), c.ports.clone())];
    for _ in 0..2 {
        let r = random_relabeling(&c.graph, rng);
        out.push((relabel(&c.graph, &r), c.ports.iter().map(|&p| r.arc_map[p]).collect()));
    }
    out
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

fn colimit_formula(
    species: &GraphicalSpecies,
    carrier: &Carrier<OpLabel>,
    classes: &[NGraphClass],
    n: usize,
) -> Result<Vec<FreeOrbit>, CsmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
    let mut out = Vec::new();
    for c in classes {
        let objects = copies(c, &mut rng);
        let decos: Vec<Vec<Decoration<OpLabel>>> = objects
            .iter()
            .map(|(g, _)| decorations_with(species, g, carrier, None))
            .collect();
        let mut offset = vec![0];
        for d in &decos {
            offset.push(offset.last().unwrap() + d.len());
        }
        let mut parent: Vec<usize> = (0..*offset.last().unwrap()).collect();
        for (i, (gi, pi)) in objects.iter().enumerate() {
            for (j, (gj, pj)) in objects.iter().enumerate() {
                for iso in isomorphisms_fixing(gi, pi, gj, pj) {
                    for (a, d) in decos[i].iter().enumerate() {
                        let image = transport(species, gi, gj, &iso, d);
                        let b = decos[j].binary_search(&image).map_err(|_| CsmError::FormulaMismatch {
                            arity: n,
                            detail: "transported decoration is not a decoration".into(),
                        })?;
                        let (ra, rb) = (find(&mut parent, offset[i] + a), find(&mut parent, offset[j] + b));
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        // components, named by the canonical form of their members
        let mut components: BTreeMap<usize, (BTreeSet<FreeElement<OpLabel>>, usize)> = BTreeMap::new();
        for (i, (g, p)) in objects.iter().enumerate() {
            for (a, d) in decos[i].iter().enumerate() {
                let root = find(&mut parent, offset[i] + a);
                let name = FreeElement::from_decorated(
                    species,
                    &DecoratedGraph {
                        graph: g.clone(),
                        ports: p.clone(),
                        decoration: d.clone(),
                    },
                );
                let entry = components.entry(root).or_default();
                entry.0.insert(name);
                if i == 0 {
                    entry.1 += 1;
                }
            }
        }
        let mut names = BTreeSet::new();
        for (members, size) in components.into_values() {
            if members.len() != 1 {
                return Err(CsmError::FormulaMismatch {
                    arity: n,
                    detail: "a colimit component has several classes".into(),
                });
            }
            let element = members.into_iter().next().unwrap();
            if !names.insert(element.clone()) {
                return Err(CsmError::FormulaMismatch {
                    arity: n,
                    detail: "two colimit components share a class".into(),
                });
            }
            out.push(FreeOrbit {
                element,
                orbit_size: size,
            });
        }
    }
    out.sort();
    Ok(out)
}

fn component_formula(
    species: &GraphicalSpecies,
    carrier: &Carrier<OpLabel>,
    classes: &[NGraphClass],
    n: usize,
) -> Result<Vec<FreeOrbit>, CsmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de ^ n as u64);
    let mut out = Vec::new();
    for c in classes {
        let mut counts: Vec<BTreeMap<FreeElement<OpLabel>, usize>> = Vec::new();
        for (g, p) in copies(c, &mut rng) {
            let mut here = BTreeMap::new();
            for d in decorations_with(species, &g, carrier, None) {
                let key = FreeElement::from_decorated(
                    species,
                    &DecoratedGraph {
                        graph: g.clone(),
                        ports: p.clone(),
                        decoration: d,
                    },
                );
                *here.entry(key).or_insert(0) += 1;
            }
            counts.push(here);
        }
        if counts.iter().any(|c| *c != counts[0]) {
            return Err(CsmError::FormulaMismatch {
                arity: n,
                detail: "isomorphic n-graphs give different components".into(),
            });
        }
        out.extend(
            counts
                .swap_remove(0)
                .into_iter()
                .map(|(element, orbit_size)| FreeOrbit { element, orbit_size }),
        );
    }
    out.sort();
    Ok(out)
}

/// `F̄[⋆] = F[⋆]`.
pub fn free_colors(species: &GraphicalSpecies) -> Vec<Color> {
    (0..species.num_colors()).collect()
}

/// Multiplication: substitutes the element labeling each vertex of `outer`
/// and returns the class of the result.
pub fn flatten<L: Label>(
    species: &GraphicalSpecies,
    outer: &DecoratedGraph<FreeElement<L>>,
) -> Result<FreeElement<L>, CsmError> {
    let order: Vec<usize> = (0..outer.graph.num_vertices()).collect();
    let result = flatten_in_order(species, outer, &order)?;
    if cfg!(debug_assertions) && order.len() > 1 {
        let reversed: Vec<usize> = order.iter().rev().copied().collect();
        let other = flatten_in_order(species, outer, &reversed)?;
        assert_eq!(result, other, "flatten depends on the substitution order");
    }
    Ok(result)
}

/// Flattening with an explicit vertex processing order.
pub fn flatten_in_order<L: Label>(
    species: &GraphicalSpecies,
    outer: &DecoratedGraph<FreeElement<L>>,
    order: &[usize],
) -> Result<FreeElement<L>, CsmError> {
    let mut graph = outer.graph.clone();
    let mut colors = outer.decoration.colors.clone();
    let mut labels: Vec<Option<L>> = vec![None; graph.num_vertices()];
    let mut ports = outer.ports.clone();
    let mut position: Vec<Option<usize>> = (0..graph.num_vertices()).map(Some).collect();
    for &v in order {
        let at = position[v].expect("each vertex is substituted once");
        let piece = &outer.decoration.labels[v];
        let glue: Vec<usize> = (0..piece.arity()).collect();
        let s = substitute(&graph, at, &piece.ngraph(), &glue)?;
        let mut next_colors: Vec<Option<Color>> = vec![None; s.graph.num_arcs()];
        let sources = colors
            .iter()
            .zip(&s.outer_arc)
            .chain(piece.decoration.colors.iter().zip(&s.inner_arc));
        for (&c, &a) in sources {
            match next_colors[a] {
                Some(existing) if existing != c => return Err(CsmError::ColorMismatch { vertex: v }),
                _ => next_colors[a] = Some(c),
            }
        }
        let mut next_labels = vec![None; s.graph.num_vertices()];
        for (w, label) in labels.into_iter().enumerate() {
            if let Some(nw) = s.outer_vertex[w] {
                next_labels[nw] = label;
            }
        }
        for (pw, &nw) in s.inner_vertex.iter().enumerate() {
            next_labels[nw] = Some(piece.decoration.labels[pw].clone());
        }
        for slot in position.iter_mut() {
            *slot = slot.and_then(|w| s.outer_vertex[w]);
        }
        for p in ports.iter_mut() {
            *p = s.outer_arc[*p];
        }
        colors = next_colors.into_iter().map(|c| c.expect("every arc is colored")).collect();
        labels = next_labels;
        graph = s.graph;
    }
    let flat = DecoratedGraph {
        graph,
        ports,
        decoration: Decoration {
            colors,
            labels: labels.into_iter().map(|l| l.expect("every vertex was substituted")).collect(),
        },
    };
    Ok(FreeElement::from_decorated(species, &flat))
}

/// Splits a decorated graph into pieces: the inner edges marked in `keep`
/// stay inside pieces, whose vertex sets are the components they span; all
/// other edges become edges of the outer graph.
///
/// Flattening the result gives back the class of `d`.
pub fn decompose<L: Label>(
    species: &GraphicalSpecies,
    d: &DecoratedGraph<L>,
    keep: &[bool],
) -> Result<DecoratedGraph<FreeElement<L>>, CsmError> {
    let g = &d.graph;
    let edges = g.inner_edges();
    assert_eq!(keep.len(), edges.len());
    let mut internal = vec![false; g.num_arcs()];
    let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
    for (e, &k) in edges.iter().zip(keep) {
        if k {
            internal[e.0] = true;
            internal[e.1] = true;
            let u = g.flag(g.flag_of_arc(e.0).unwrap()).vertex;
            let w = g.flag(g.flag_of_arc(e.1).unwrap()).vertex;
            let (ru, rw) = (find(&mut parent, u), find(&mut parent, w));
            parent[ru.max(rw)] = ru.min(rw);
        }
    }
    let mut cluster_of = vec![0; g.num_vertices()];
    let mut cluster_ids = BTreeMap::new();
    for v in 0..g.num_vertices() {
        let r = find(&mut parent, v);
        let next = cluster_ids.len();
        cluster_of[v] = *cluster_ids.entry(r).or_insert(next);
    }
    let clusters = cluster_ids.len();
    // outer graph
    let mut outer_arc = vec![usize::MAX; g.num_arcs()];
    let mut outer_arcs = 0;
    for (a, slot) in outer_arc.iter_mut().enumerate() {
        if !internal[a] {
            *slot = outer_arcs;
            outer_arcs += 1;
        }
    }
    let involution: Vec<usize> = (0..g.num_arcs())
        .filter(|&a| !internal[a])
        .map(|a| outer_arc[g.inv(a)])
        .collect();
    let boundary: Vec<usize> = (0..g.num_flags()).filter(|&h| !internal[g.flag(h).arc]).collect();
    let flags: Vec<Flag> = boundary
        .iter()
        .map(|&h| Flag {
            arc: outer_arc[g.flag(h).arc],
            vertex: cluster_of[g.flag(h).vertex],
        })
        .collect();
    let outer_graph = FeynmanGraph::new(involution, clusters, flags).map_err(CsmError::InvalidResult)?;
    let outer_colors: Vec<Color> = (0..g.num_arcs())
        .filter(|&a| !internal[a])
        .map(|a| d.decoration.colors[a])
        .collect();
    // pieces
    let mut labels = Vec::with_capacity(clusters);
    for c in 0..clusters {
        let vertices: Vec<usize> = (0..g.num_vertices()).filter(|&v| cluster_of[v] == c).collect();
        let local_vertex: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let piece_flags: Vec<usize> = (0..g.num_flags())
            .filter(|&h| cluster_of[g.flag(h).vertex] == c)
            .collect();
        let mut arc_index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut inv: Vec<usize> = Vec::new();
        let mut colors: Vec<Color> = Vec::new();
        let mut ports = Vec::new();
        let mut flags = Vec::new();
        for &h in &piece_flags {
            let a = g.flag(h).arc;
            let ia = piece_arc(&mut arc_index, &mut inv, &mut colors, a, d.decoration.colors[a]);
            if internal[a] {
                let b = g.inv(a);
                let ib = piece_arc(&mut arc_index, &mut inv, &mut colors, b, d.decoration.colors[b]);
                inv[ia] = ib;
                inv[ib] = ia;
            } else {
                let p = inv.len();
                inv.push(ia);
                inv[ia] = p;
                colors.push(d.decoration.colors[g.inv(a)]);
                ports.push(p);
            }
            flags.push(Flag {
                arc: ia,
                vertex: local_vertex[&g.flag(h).vertex],
            });
        }
        let piece_graph = FeynmanGraph::new(inv, vertices.len(), flags).map_err(CsmError::InvalidResult)?;
        let piece = DecoratedGraph {
            graph: piece_graph,
            ports,
            decoration: Decoration {
                colors,
                labels: vertices.iter().map(|&v| d.decoration.labels[v].clone()).collect(),
            },
        };
        labels.push(FreeElement::from_decorated(species, &piece));
    }
    Ok(DecoratedGraph {
        graph: outer_graph,
        ports: d.ports.iter().map(|&p| outer_arc[p]).collect(),
        decoration: Decoration {
            colors: outer_colors,
            labels,
        },
    })
}

fn piece_arc(
    index: &mut BTreeMap<usize, usize>,
    inv: &mut Vec<usize>,
    colors: &mut Vec<Color>,
    arc: usize,
    color: Color,
) -> usize {
    *index.entry(arc).or_insert_with(|| {
        inv.push(usize::MAX);
        colors.push(color);
        inv.len() - 1
    })
}

/// Inserts a new two-valent vertex labeled by ⋆ on the edge through arc `a`.
pub fn subdivide<L: Label>(
    species: &GraphicalSpecies,
    d: &DecoratedGraph<FreeElement<L>>,
    a: usize,
) -> DecoratedGraph<FreeElement<L>> {
    let g = &d.graph;
    let b = g.inv(a);
    let (x, y) = (g.num_arcs(), g.num_arcs() + 1);
    let mut involution = g.involution().to_vec();
    involution[a] = x;
    involution[b] = y;
    involution.push(a);
    involution.push(b);
    let w = g.num_vertices();
    let mut flags = g.flags().to_vec();
    flags.push(Flag { arc: x, vertex: w });
    flags.push(Flag { arc: y, vertex: w });
    let graph = FeynmanGraph::new(involution, w + 1, flags).expect("subdividing an edge keeps the graph valid");
    let ca = d.decoration.colors[a];
    let mut colors = d.decoration.colors.clone();
    colors.push(species.tau(ca));
    colors.push(ca);
    let mut labels = d.decoration.labels.clone();
    labels.push(FreeElement::trivial(species, ca));
    DecoratedGraph {
        graph,
        ports: d.ports.clone(),
        decoration: Decoration { colors, labels },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{qed_species, terminal_species, PHOTON};

    #[test]
    fn small_free_counts() {
        let qed = qed_species();
        assert_eq!(free_apply(&qed, 3, TruncationBounds::new(1, 0)).unwrap().len(), 6);
        assert_eq!(free_apply(&qed, 2, TruncationBounds::new(0, 0)).unwrap().len(), 3);
        assert_eq!(free_colors(&qed).len(), 3);
    }

    #[test]
    fn unit_is_injective_and_keeps_colors() {
        let qed = qed_species();
        let images: BTreeSet<FreeElement<OpLabel>> = (0..6).map(|index| unit(&qed, OpLabel { arity: 3, index })).collect();
        assert_eq!(images.len(), 6);
        for index in 0..6 {
            let x = OpLabel { arity: 3, index };
            assert_eq!(unit(&qed, x).port_colors(&qed), x.port_colors(&qed));
            assert_eq!(unit(&qed, x).num_vertices(), 1);
        }
    }

    #[test]
    fn pulling_a_unit_matches_the_species_action() {
        let qed = qed_species();
        for index in 0..6 {
            let x = OpLabel { arity: 3, index };
            for p in crate::perm::permutations(3) {
                assert_eq!(unit(&qed, x).pull(&p, &qed), unit(&qed, x.pull(&p, &qed)));
            }
        }
    }

    #[test]
    fn flatten_of_units_is_identity() {
        let qed = qed_species();
        for e in free_elements(&qed, 2, TruncationBounds::new(2, 1)) {
            let outer = DecoratedGraph {
                graph: e.graph.clone(),
                ports: (0..2).collect(),
                decoration: Decoration {
                    colors: e.decoration.colors.clone(),
                    labels: e.decoration.labels.iter().map(|x| unit(&qed, *x)).collect(),
                },
            };
            assert_eq!(flatten(&qed, &outer).unwrap(), e);
        }
    }

    #[test]
    fn bubble_insertion_matches_direct_construction() {
        let qed = qed_species();
        let bubble = free_elements(&qed, 2, TruncationBounds::new(2, 2))
            .into_iter()
            .find(|e| e.num_vertices() == 2 && e.decoration.colors[0] == PHOTON)
            .unwrap();
        // two vertices joined by a photon, each with two electron legs
        let trees: Vec<_> = free_elements(&qed, 4, TruncationBounds::new(2, 1))
            .into_iter()
            .filter(|e| {
                let inner = e.graph.inner_edges();
                inner.len() == 1 && e.decoration.colors[inner[0].0] == PHOTON
            })
            .collect();
        assert!(!trees.is_empty());
        // the same tree with a bubble on the photon line, built by hand
        let involution = (0..16).map(|a| a ^ 1).collect();
        let at = |arc, vertex| Flag { arc, vertex };
        let flags = vec![at(0, 0), at(2, 0), at(4, 1), at(6, 1), at(8, 0), at(9, 2), at(10, 2), at(12, 2), at(11, 3), at(13, 3), at(14, 3), at(15, 1)];
        let big = FeynmanGraph::new(involution, 4, flags).unwrap();
        let mut direct = BTreeSet::new();
        for d in decorations_with(&qed, &big, &Carrier::of_species(&qed), None) {
            for order in crate::perm::permutations(4) {
                let ports = order.iter().map(|&k| 2 * k + 1).collect();
                direct.insert(FreeElement::from_decorated(
                    &qed,
                    &DecoratedGraph {
                        graph: big.clone(),
                        ports,
                        decoration: d.clone(),
                    },
                ));
            }
        }
        for tree in &trees {
            let outer = decompose(&qed, &tree.to_decorated(), &[false]).unwrap();
            let photon = (0..outer.graph.num_arcs())
                .find(|&a| outer.graph.flag_of_arc(a).is_some() && !outer.graph.is_port(outer.graph.inv(a)) && outer.decoration.colors[a] == PHOTON)
                .unwrap();
            let mut sub = subdivide(&qed, &outer, photon);
            let w = sub.graph.num_vertices() - 1;
            *sub.decoration.labels.last_mut().unwrap() = bubble.clone();
            assert_eq!(sub.decoration.labels[w].port_colors(&qed), vec![PHOTON, PHOTON]);
            let flat = flatten(&qed, &sub).unwrap();
            assert_eq!(flat.num_vertices(), 4);
            assert!(direct.contains(&flat));
        }
    }

    #[test]
    fn terminal_species_counts_graph_classes() {
        let t = terminal_species(3);
        let bounds = TruncationBounds::new(2, 2);
        for n in 0..=3 {
            let free = free_apply(&t, n, bounds).unwrap();
            let valence_ok = enumerate_n_graphs(n, bounds)
                .iter()
                .filter(|c| (0..c.graph.num_vertices()).all(|v| c.graph.valence(v) <= 3))
                .count();
            assert_eq!(free.len(), valence_ok);
            assert!(free.iter().all(|o| o.orbit_size == 1));
        }
    }
}
