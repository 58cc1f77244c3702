//! The etale site of graphs.
//!
//! For a graph `G`, the category of elements `elGr ↓ G` has one object per
//! etale map from an elementary graph into `G` and one arrow per commuting
//! triangle over `G`. Its objects form the canonical cover of `G`, and the
//! limit of a presheaf over it is what the Segal condition compares `X(G)`
//! against.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{validate, Elementary, FeynmanGraph, GraphDocument};
use crate::morphisms::{check_etale, enumerate_etale, GraphMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementObject {
    pub shape: Elementary,
    /// The etale map from the elementary graph into `G`.
    pub map: GraphMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementArrow {
    pub source: usize,
    pub target: usize,
    /// Map between the elementary graphs, commuting over `G`.
    pub map: GraphMap,
}

#[derive(Clone, Debug)]
pub struct ElementsDiagram {
    pub objects: Vec<ElementObject>,
    pub arrows: Vec<ElementArrow>,
}

impl ElementsDiagram {
    pub fn object_graph(&self, o: usize) -> FeynmanGraph {
        FeynmanGraph::elementary(self.objects[o].shape)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SiteError {
    #[error("the presheaf has no value set for {0:?}")]
    MissingValueSet(Elementary),
    #[error("the presheaf has no restriction along {0:?}")]
    MissingRestriction(GraphMap),
    #[error("cover member {0} does not map into the graph")]
    WrongTarget(usize),
    #[error("malformed presheaf document: {0}")]
    BadDocument(String),
}

/// The full category of elements of `g`: every map from ⋆ (one per arc),
/// every map from a corolla (one per flag bijection onto a vertex), and
/// every commuting triangle between them.
pub fn elements_diagram(g: &FeynmanGraph) -> ElementsDiagram {
    let mut objects: Vec<ElementObject> = enumerate_etale(&FeynmanGraph::trivial(), g)
        .into_iter()
        .map(|map| ElementObject {
            shape: Elementary::Trivial,
            map,
        })
        .collect();
    let valences: BTreeSet<usize> = (0..g.num_vertices()).map(|v| g.valence(v)).collect();
    for n in valences {
        objects.extend(
            enumerate_etale(&FeynmanGraph::corolla(n), g)
                .into_iter()
                .map(|map| ElementObject {
                    shape: Elementary::Corolla(n),
                    map,
                }),
        );
    }
    let mut homs: HashMap<(Elementary, Elementary), Vec<GraphMap>> = HashMap::new();
    let mut arrows = Vec::new();
    for (s, os) in objects.iter().enumerate() {
        for (t, ot) in objects.iter().enumerate() {
            let possible = match (os.shape, ot.shape) {
                (Elementary::Corolla(_), Elementary::Trivial) => false,
                (Elementary::Corolla(_), Elementary::Corolla(_)) => os.map.vertex_map == ot.map.vertex_map,
                _ => true,
            };
            if !possible {
                continue;
            }
            let maps = homs.entry((os.shape, ot.shape)).or_insert_with(|| {
                enumerate_etale(&FeynmanGraph::elementary(os.shape), &FeynmanGraph::elementary(ot.shape))
            });
            for m in maps.iter() {
                if m.then(&ot.map) == os.map {
                    arrows.push(ElementArrow {
                        source: s,
                        target: t,
                        map: m.clone(),
                    });
                }
            }
        }
    }
    ElementsDiagram { objects, arrows }
}

/// Whether the family is jointly surjective on arcs and vertices of `g`.
pub fn is_cover(g: &FeynmanGraph, family: &[(FeynmanGraph, GraphMap)]) -> Result<bool, SiteError> {
    let mut arcs = vec![false; g.num_arcs()];
    let mut vertices = vec![false; g.num_vertices()];
    for (k, (src, map)) in family.iter().enumerate() {
        if !matches!(check_etale(src, g, map), Ok(true)) {
            return Err(SiteError::WrongTarget(k));
        }
        for &a in &map.arc_map {
            arcs[a] = true;
        }
        for &v in &map.vertex_map {
            vertices[v] = true;
        }
    }
    Ok(!family.is_empty() && arcs.iter().all(|&x| x) && vertices.iter().all(|&x| x))
}

/// The cover given by the objects of the category of elements.
pub fn canonical_cover(g: &FeynmanGraph) -> Vec<(FeynmanGraph, GraphMap)> {
    elements_diagram(g)
        .objects
        .into_iter()
        .map(|o| (FeynmanGraph::elementary(o.shape), o.map))
        .collect()
}

/// A finite presheaf on etale maps: a value-set size for each graph of a
/// finite universe and a restriction table `X(B) -> X(A)` for each stored
/// map `A -> B`.
#[derive(Clone, Debug, Default)]
pub struct FinitePresheaf {
    graphs: Vec<FeynmanGraph>,
    index: HashMap<FeynmanGraph, usize>,
    sizes: Vec<usize>,
    restrictions: HashMap<(usize, usize, GraphMap), Vec<usize>>,
}

/// One stored restriction table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub from: usize,
    pub to: usize,
    pub map: GraphMap,
    pub table: Vec<usize>,
}

impl FinitePresheaf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `g` with `size` elements, or updates its size; returns its index.
    pub fn insert_graph(&mut self, g: FeynmanGraph, size: usize) -> usize {
        if let Some(&i) = self.index.get(&g) {
            self.sizes[i] = size;
            return i;
        }
        let i = self.graphs.len();
        self.index.insert(g.clone(), i);
        self.graphs.push(g);
        self.sizes.push(size);
        i
    }

    pub fn graph_index(&self, g: &FeynmanGraph) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn graphs(&self) -> &[FeynmanGraph] {
        &self.graphs
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn size_of(&self, g: &FeynmanGraph) -> Option<usize> {
        self.graph_index(g).map(|i| self.sizes[i])
    }

    /// Stores the restriction along `map: graphs[from] -> graphs[to]`.
    pub fn set_restriction(&mut self, from: usize, to: usize, map: GraphMap, table: Vec<usize>) {
        self.restrictions.insert((from, to, map), table);
    }

    pub fn restriction(&self, from: usize, to: usize, map: &GraphMap) -> Option<&[usize]> {
        // HashMap lookups need an owned key; maps are small
        self.restrictions.get(&(from, to, map.clone())).map(Vec::as_slice)
    }

    pub fn restriction_mut(&mut self, from: usize, to: usize, map: &GraphMap) -> Option<&mut Vec<usize>> {
        self.restrictions.get_mut(&(from, to, map.clone()))
    }

    /// All stored restrictions in a deterministic order.
    pub fn restrictions(&self) -> Vec<Restriction> {
        let mut out: Vec<Restriction> = self
            .restrictions
            .iter()
            .map(|((from, to, map), table)| Restriction {
                from: *from,
                to: *to,
                map: map.clone(),
                table: table.clone(),
            })
            .collect();
        out.sort_by(|a, b| (a.from, a.to, &a.map).cmp(&(b.from, b.to, &b.map)));
        out
    }

    pub fn num_restrictions(&self) -> usize {
        self.restrictions.len()
    }

    /// Appends an element to `X(graphs[i])` whose restrictions copy those of
    /// `template`. Returns the new element.
    pub fn add_element_like(&mut self, i: usize, template: usize) -> usize {
        let new = self.sizes[i];
        self.sizes[i] += 1;
        for ((_, to, _), table) in self.restrictions.iter_mut() {
            if *to == i {
                let value = table[template];
                table.push(value);
            }
        }
        new
    }

    /// Restriction tables that break functoriality: identities that are not
    /// identities, and stored composites that disagree with composing.
    pub fn functoriality_failures(&self) -> Vec<FunctorialityFailure> {
        let mut failures = Vec::new();
        let mut by_source: HashMap<usize, Vec<(&(usize, usize, GraphMap), &Vec<usize>)>> = HashMap::new();
        for (key, table) in &self.restrictions {
            by_source.entry(key.0).or_default().push((key, table));
            let (from, to, map) = key;
            if from == to && *map == GraphMap::identity(&self.graphs[*from]) {
                if let Some(x) = table.iter().enumerate().find(|&(k, &v)| k != v) {
                    failures.push(FunctorialityFailure {
                        first: Restriction {
                            from: *from,
                            to: *to,
                            map: map.clone(),
                            table: table.clone(),
                        },
                        second: None,
                        element: x.0,
                    });
                }
            }
        }
        for (key_f, table_f) in self.restrictions.iter() {
            let (a, b, f) = key_f;
            let Some(outgoing) = by_source.get(b) else { continue };
            for ((_, c, g), table_g) in outgoing {
                let composite = f.then(g);
                let Some(table_gf) = self.restrictions.get(&(*a, *c, composite)) else {
                    continue;
                };
                if let Some(z) = (0..table_gf.len()).find(|&z| table_gf[z] != table_f[table_g[z]]) {
                    failures.push(FunctorialityFailure {
                        first: Restriction {
                            from: *a,
                            to: *b,
                            map: f.clone(),
                            table: table_f.clone(),
                        },
                        second: Some(Restriction {
                            from: *b,
                            to: *c,
                            map: g.clone(),
                            table: (*table_g).clone(),
                        }),
                        element: z,
                    });
                }
            }
        }
        failures.sort_by(|x, y| {
            (x.first.from, x.first.to, &x.first.map, x.element).cmp(&(y.first.from, y.first.to, &y.first.map, y.element))
        });
        failures
    }
}

/// Interchange form of a finite presheaf: value-set sizes keyed by graph
/// names, and restriction tables referring to those names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafDocument {
    pub graphs: std::collections::BTreeMap<String, PresheafValue>,
    pub restrictions: Vec<RestrictionDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafValue {
    pub graph: GraphDocument,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionDocument {
    pub from: String,
    pub to: String,
    pub map: GraphMap,
    pub table: Vec<usize>,
}

impl FinitePresheaf {
    /// The document form, naming each graph with `key`.
    pub fn to_document(&self, mut key: impl FnMut(&FeynmanGraph) -> String) -> PresheafDocument {
        let keys: Vec<String> = self.graphs.iter().map(&mut key).collect();
        let mut doc = PresheafDocument {
            graphs: self
                .graphs
                .iter()
                .zip(&keys)
                .zip(&self.sizes)
                .map(|((g, k), &size)| {
                    (
                        k.clone(),
                        PresheafValue {
                            graph: g.to_document(),
                            size,
                        },
                    )
                })
                .collect(),
            restrictions: self
                .restrictions()
                .into_iter()
                .map(|r| RestrictionDocument {
                    from: keys[r.from].clone(),
                    to: keys[r.to].clone(),
                    map: r.map,
                    table: r.table,
                })
                .collect(),
        };
        doc.restrictions
            .sort_by(|a, b| (&a.from, &a.to, &a.map).cmp(&(&b.from, &b.to, &b.map)));
        doc
    }

    /// Builds a presheaf from its document, checking that every restriction
    /// joins named graphs along a graph map with a table of the right shape.
    pub fn from_document(doc: &PresheafDocument) -> Result<Self, SiteError> {
        let bad = |m: String| SiteError::BadDocument(m);
        let mut x = FinitePresheaf::new();
        let mut index = HashMap::new();
        for (k, value) in &doc.graphs {
            let g = validate(&value.graph).map_err(|errors| {
                bad(format!("graph {k:?}: {}", errors.iter().map(|e| e.message.as_str()).collect::<Vec<_>>().join("; ")))
            })?;
            if x.graph_index(&g).is_some() {
                return Err(bad(format!("graph {k:?} appears twice")));
            }
            index.insert(k.as_str(), x.insert_graph(g, value.size));
        }
        for r in &doc.restrictions {
            let lookup = |k: &str| index.get(k).copied().ok_or_else(|| bad(format!("unknown graph {k:?}")));
            let (from, to) = (lookup(&r.from)?, lookup(&r.to)?);
            let etale = check_etale(&x.graphs[from], &x.graphs[to], &r.map).map_err(|e| bad(e.to_string()))?;
            if !etale {
                return Err(bad(format!("map {:?} from {:?} to {:?} is not etale", r.map, r.from, r.to)));
            }
            if r.table.len() != x.sizes[to] || r.table.iter().any(|&v| v >= x.sizes[from]) {
                return Err(bad(format!("table from {:?} to {:?} has the wrong shape", r.from, r.to)));
            }
            x.set_restriction(from, to, r.map.clone(), r.table.clone());
        }
        Ok(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorialityFailure {
    pub first: Restriction,
    pub second: Option<Restriction>,
    pub element: usize,
}

/// Matching families of `x` over the category of elements of `g`, keyed by
/// object index, in lexicographic order.
pub fn limit_over_elements(x: &FinitePresheaf, g: &FeynmanGraph) -> Result<Vec<Vec<usize>>, SiteError> {
    let diagram = elements_diagram(g);
    limit_over_diagram(x, g, &diagram)
}

pub fn limit_over_diagram(
    x: &FinitePresheaf,
    g: &FeynmanGraph,
    diagram: &ElementsDiagram,
) -> Result<Vec<Vec<usize>>, SiteError> {
    let n = diagram.objects.len();
    let mut graph_of = Vec::with_capacity(n);
    for o in &diagram.objects {
        let e = FeynmanGraph::elementary(o.shape);
        let i = x.graph_index(&e).ok_or(SiteError::MissingValueSet(o.shape))?;
        graph_of.push(i);
    }
    // processing order: each vertex's corolla objects, then the arcs around it
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let star_of_arc: HashMap<usize, usize> = diagram
        .objects
        .iter()
        .enumerate()
        .filter(|(_, o)| o.shape == Elementary::Trivial)
        .map(|(k, o)| (o.map.arc_map[0], k))
        .collect();
    for v in 0..g.num_vertices() {
        for (k, o) in diagram.objects.iter().enumerate() {
            if o.shape != Elementary::Trivial && o.map.vertex_map[0] == v && !placed[k] {
                placed[k] = true;
                order.push(k);
            }
        }
        for &h in g.flags_at(v) {
            let a = g.flag(h).arc;
            for arc in [a, g.inv(a)] {
                let k = star_of_arc[&arc];
                if !placed[k] {
                    placed[k] = true;
                    order.push(k);
                }
            }
        }
    }
    for k in 0..n {
        if !placed[k] {
            order.push(k);
        }
    }
    let mut position = vec![0; n];
    for (p, &k) in order.iter().enumerate() {
        position[k] = p;
    }
    // constraints checked when the later endpoint is assigned
    struct Check<'a> {
        other: usize,
        // the object being assigned is the arrow's source
        assigned_is_source: bool,
        table: &'a [usize],
    }
    let mut checks: Vec<Vec<Check>> = (0..n).map(|_| Vec::new()).collect();
    for arrow in &diagram.arrows {
        let table = x
            .restriction(graph_of[arrow.source], graph_of[arrow.target], &arrow.map)
            .ok_or_else(|| SiteError::MissingRestriction(arrow.map.clone()))?;
        let (later, other, assigned_is_source) = if position[arrow.source] >= position[arrow.target] {
            (arrow.source, arrow.target, true)
        } else {
            (arrow.target, arrow.source, false)
        };
        checks[later].push(Check {
            other,
            assigned_is_source,
            table,
        });
    }
    let mut out = Vec::new();
    let mut family = vec![usize::MAX; n];
    fn search(
        depth: usize,
        order: &[usize],
        graph_of: &[usize],
        x: &FinitePresheaf,
        checks: &[Vec<Check>],
        family: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == order.len() {
            out.push(family.clone());
            return;
        }
        let o = order[depth];
        // a restriction from an assigned object forces the value
        let forced = checks[o]
            .iter()
            .find(|c| c.assigned_is_source && c.other != o)
            .map(|c| c.table[family[c.other]]);
        let candidates: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => (0..x.size(graph_of[o])).collect(),
        };
        for value in candidates {
            family[o] = value;
            let ok = checks[o].iter().all(|c| {
                let other_value = family[c.other];
                if c.assigned_is_source {
                    value == c.table[other_value]
                } else {
                    other_value == c.table[value]
                }
            });
            if ok {
                search(depth + 1, order, graph_of, x, checks, family, out);
            }
        }
        family[o] = usize::MAX;
    }
    search(0, &order, &graph_of, x, &checks, &mut family, &mut out);
    out.sort();
    Ok(out)
}

/// Outcome of the Segal check for one graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCheck {
    pub graph: FeynmanGraph,
    pub values: usize,
    pub limit: usize,
    pub injective: bool,
    pub surjective: bool,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegalReport {
    pub pass: bool,
    pub graphs: Vec<GraphCheck>,
    pub functoriality: Vec<FunctorialityFailure>,
}

impl SegalReport {
    pub fn failures(&self) -> impl Iterator<Item = &GraphCheck> {
        self.graphs.iter().filter(|c| !c.ok)
    }
}

/// Adds ⋆ and the corollas of every occurring valence.
pub fn close_under_elementary(universe: &[FeynmanGraph]) -> Vec<FeynmanGraph> {
    let mut out: Vec<FeynmanGraph> = universe.to_vec();
    let mut seen: std::collections::HashSet<FeynmanGraph> = out.iter().cloned().collect();
    let mut extra = vec![FeynmanGraph::trivial()];
    for g in universe {
        for v in 0..g.num_vertices() {
            extra.push(FeynmanGraph::corolla(g.valence(v)));
        }
    }
    for e in extra {
        if seen.insert(e.clone()) {
            out.push(e);
        }
    }
    out
}

/// Checks that `X(G) -> lim_{elGr ↓ G} X` is a bijection for every graph of
/// the universe (closed under elementary subobjects), and that the stored
/// restrictions are functorial.
pub fn segal_check(x: &FinitePresheaf, universe: &[FeynmanGraph]) -> SegalReport {
    let graphs = close_under_elementary(universe);
    let checks: Vec<GraphCheck> = graphs.iter().map(|g| check_graph(x, g)).collect();
    let functoriality = x.functoriality_failures();
    SegalReport {
        pass: checks.iter().all(|c| c.ok) && functoriality.is_empty(),
        graphs: checks,
        functoriality,
    }
}

fn check_graph(x: &FinitePresheaf, g: &FeynmanGraph) -> GraphCheck {
    let failed = |error: String| GraphCheck {
        graph: g.clone(),
        values: x.size_of(g).unwrap_or(0),
        limit: 0,
        injective: false,
        surjective: false,
        ok: false,
        error: Some(error),
    };
    let Some(gi) = x.graph_index(g) else {
        return failed("no value set for this graph".into());
    };
    let diagram = elements_diagram(g);
    let limit = match limit_over_diagram(x, g, &diagram) {
        Ok(l) => l,
        Err(e) => return failed(e.to_string()),
    };
    let mut projections = Vec::with_capacity(diagram.objects.len());
    for o in &diagram.objects {
        let e = FeynmanGraph::elementary(o.shape);
        let ei = x.graph_index(&e).expect("limit computation found every elementary graph");
        match x.restriction(ei, gi, &o.map) {
            Some(t) => projections.push(t),
            None => return failed(SiteError::MissingRestriction(o.map.clone()).to_string()),
        }
    }
    let size = x.size(gi);
    let images: Vec<Vec<usize>> = (0..size)
        .map(|v| projections.iter().map(|t| t[v]).collect())
        .collect();
    let distinct: BTreeSet<&Vec<usize>> = images.iter().collect();
    let injective = distinct.len() == images.len();
    let limit_set: BTreeSet<&Vec<usize>> = limit.iter().collect();
    let lands = distinct.iter().all(|f| limit_set.contains(*f));
    let surjective = limit_set.iter().all(|f| distinct.contains(*f));
    GraphCheck {
        graph: g.clone(),
        values: size,
        limit: limit.len(),
        injective,
        surjective,
        ok: injective && surjective && lands,
        error: (!lands).then(|| "some element restricts to a non-matching family".to_string()),
    }
}

/// The presheaf generated by a graph's etale maps: stores every etale map
/// among the given graphs with the tables computed by `restrict`.
pub fn presheaf_from<F>(graphs: &[FeynmanGraph], sizes: &[usize], mut restrict: F) -> FinitePresheaf
where
    F: FnMut(usize, usize, &GraphMap) -> Vec<usize>,
{
    let mut x = FinitePresheaf::new();
    for (g, &s) in graphs.iter().zip(sizes) {
        x.insert_graph(g.clone(), s);
    }
    for (i, a) in graphs.iter().enumerate() {
        for (j, b) in graphs.iter().enumerate() {
            for m in enumerate_etale(a, b) {
                let table = restrict(i, j, &m);
                x.set_restriction(i, j, m, table);
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Flag;
    use crate::species::{elementary_presheaf, qed_species};

    fn dumbbell() -> FeynmanGraph {
        let involution = (0..6).map(|a| a ^ 1).collect();
        let flags = [(0, 0), (1, 0), (2, 0), (3, 1), (4, 1), (5, 1)]
            .into_iter()
            .map(|(arc, vertex)| Flag { arc, vertex })
            .collect();
        FeynmanGraph::new(involution, 2, flags).unwrap()
    }

    /// The species presheaf extended to `g` by its limit, with restrictions
    /// to every elementary object.
    fn species_on(g: &FeynmanGraph) -> FinitePresheaf {
        let arities = (0..g.num_vertices()).map(|v| g.valence(v)).collect();
        let mut x = elementary_presheaf(&qed_species(), &arities);
        let diagram = elements_diagram(g);
        let families = limit_over_diagram(&x, g, &diagram).unwrap();
        let gi = x.insert_graph(g.clone(), families.len());
        for (o, obj) in diagram.objects.iter().enumerate() {
            let ei = x.graph_index(&diagram.object_graph(o)).unwrap();
            x.set_restriction(ei, gi, obj.map.clone(), families.iter().map(|f| f[o]).collect());
        }
        x.set_restriction(gi, gi, GraphMap::identity(g), (0..families.len()).collect());
        x
    }

    #[test]
    fn elements_of_a_corolla() {
        let d = elements_diagram(&FeynmanGraph::corolla(3));
        // six arcs, six flag orderings
        assert_eq!(d.objects.len(), 12);
        assert!(is_cover(&FeynmanGraph::corolla(3), &canonical_cover(&FeynmanGraph::corolla(3))).unwrap());
        assert!(!is_cover(&FeynmanGraph::corolla(3), &[]).unwrap());
    }

    #[test]
    fn limit_presheaf_is_segal() {
        let g = dumbbell();
        let x = species_on(&g);
        // a photon joins two tadpoles: each loop carries e- one way or the other
        assert_eq!(x.size_of(&g), Some(4));
        let report = segal_check(&x, &[g]);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn extra_element_breaks_segal() {
        let g = dumbbell();
        let mut x = species_on(&g);
        let gi = x.graph_index(&g).unwrap();
        x.add_element_like(gi, 0);
        let report = segal_check(&x, &[g]);
        assert!(!report.pass);
        assert!(report.failures().any(|c| !c.injective));
    }

    #[test]
    fn missing_value_set_is_reported() {
        let g = dumbbell();
        let report = segal_check(&FinitePresheaf::new(), &[g]);
        assert!(!report.pass);
        assert!(report.graphs.iter().all(|c| c.error.is_some()));
    }

    #[test]
    fn documents_round_trip() {
        let g = dumbbell();
        let x = species_on(&g);
        let doc = x.to_document(|h| format!("{h:?}"));
        let y = FinitePresheaf::from_document(&doc).unwrap();
        assert_eq!(y.to_document(|h| format!("{h:?}")), doc);
        assert!(segal_check(&y, &[g]).pass);

        let mut broken = doc.clone();
        broken.restrictions[0].table.push(0);
        assert!(matches!(FinitePresheaf::from_document(&broken), Err(SiteError::BadDocument(_))));
    }
}
