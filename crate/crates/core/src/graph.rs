//! Feynman graphs as diagrams of finite sets.
//!
//! A graph is given by a set of arcs (oriented edges) `E` with a fixpoint-free
//! involution `i`, a set of flags `H` and a set of vertices `V`, together with
//! maps `s: H -> E` (injective) and `t: H -> V`:
//!
//! ```text
//!   i ⟲ E <--s-- H --t--> V
//! ```
//!
//! All finite sets are index ranges `0..n` and all maps are arrays. A flag is
//! a vertex together with the germ of an emanating edge; `s` returns the arc
//! pointing away from the vertex. Arcs outside the image of `s` are *ports*
//! and form the interface of the graph.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A flag (half-edge): the outgoing arc `s(h)` and the incident vertex `t(h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Flag {
    pub arc: usize,
    pub vertex: usize,
}

/// The unvalidated graph file document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub arcs: usize,
    pub involution: Vec<usize>,
    pub vertices: usize,
    pub flags: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationCode {
    InvolutionNotInvolutive,
    InvolutionHasFixpoint,
    SNotInjective,
    DanglingIndex,
    Disconnected,
}

/// One violated graph invariant; serializes as `{code, message, index}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationError {
    pub code: ValidationCode,
    pub message: String,
    pub index: Option<usize>,
}

impl ValidationError {
    fn new(code: ValidationCode, index: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            index,
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid graph: {}", .0.iter().map(|e| e.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationError>),
}

/// A validated, connected Feynman graph.
///
/// Equality, ordering and hashing only look at the defining data
/// (arc count, involution, vertex count, flags); the incidence caches are
/// derived from it.
#[derive(Clone)]
pub struct FeynmanGraph {
    involution: Vec<usize>,
    flags: Vec<Flag>,
    vertices: usize,
    // caches
    flag_of_arc: Vec<Option<usize>>,
    flags_at: Vec<Vec<usize>>,
}

impl FeynmanGraph {
    /// Builds and validates a graph from its structure maps.
    pub fn new(
        involution: Vec<usize>,
        vertices: usize,
        flags: Vec<Flag>,
    ) -> Result<Self, Vec<ValidationError>> {
        validate(&GraphDocument {
            arcs: involution.len(),
            involution,
            vertices,
            flags: flags.iter().map(|f| [f.arc, f.vertex]).collect(),
        })
    }

    pub(crate) fn from_parts_unchecked(involution: Vec<usize>, vertices: usize, flags: Vec<Flag>) -> Self {
        let mut flag_of_arc = vec![None; involution.len()];
        let mut flags_at = vec![Vec::new(); vertices];
        for (h, f) in flags.iter().enumerate() {
            flag_of_arc[f.arc] = Some(h);
            flags_at[f.vertex].push(h);
        }
        Self {
            involution,
            flags,
            vertices,
            flag_of_arc,
            flags_at,
        }
    }

    /// The trivial graph: two arcs, no flags, no vertices.
    pub fn trivial() -> Self {
        Self::from_parts_unchecked(vec![1, 0], 0, Vec::new())
    }

    /// The corolla with `n` flags: flag `k` carries arc `2k`, whose partner
    /// `2k + 1` is a port.
    pub fn corolla(n: usize) -> Self {
        let involution = (0..2 * n).map(|a| a ^ 1).collect();
        let flags = (0..n).map(|k| Flag { arc: 2 * k, vertex: 0 }).collect();
        Self::from_parts_unchecked(involution, 1, flags)
    }

    pub fn elementary(kind: Elementary) -> Self {
        match kind {
            Elementary::Trivial => Self::trivial(),
            Elementary::Corolla(n) => Self::corolla(n),
        }
    }

    pub fn num_arcs(&self) -> usize {
        self.involution.len()
    }

    pub fn num_flags(&self) -> usize {
        self.flags.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices
    }

    pub fn involution(&self) -> &[usize] {
        &self.involution
    }

    /// The partner `i(a)` of an arc.
    pub fn inv(&self, arc: usize) -> usize {
        self.involution[arc]
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn flag(&self, h: usize) -> Flag {
        self.flags[h]
    }

    /// The flag carrying `arc`, if the arc is in the image of `s`.
    pub fn flag_of_arc(&self, arc: usize) -> Option<usize> {
        self.flag_of_arc[arc]
    }

    /// Flags incident to `v`, in ascending index order.
    pub fn flags_at(&self, v: usize) -> &[usize] {
        &self.flags_at[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.flags_at[v].len()
    }

    pub fn is_port(&self, arc: usize) -> bool {
        self.flag_of_arc[arc].is_none()
    }

    /// Ports in ascending arc order.
    pub fn ports(&self) -> Vec<usize> {
        (0..self.num_arcs()).filter(|&a| self.is_port(a)).collect()
    }

    pub fn arity(&self) -> usize {
        self.num_arcs() - self.num_flags()
    }

    /// Inner edges as pairs `(a, i(a))` with `a < i(a)`.
    pub fn inner_edges(&self) -> Vec<InnerEdge> {
        (0..self.num_arcs())
            .filter(|&a| a < self.inv(a) && !self.is_port(a) && !self.is_port(self.inv(a)))
            .map(|a| InnerEdge(a, self.inv(a)))
            .collect()
    }

    pub fn num_inner_edges(&self) -> usize {
        self.inner_edges().len()
    }

    /// Whether the graph has no inner edges.
    pub fn is_elementary(&self) -> bool {
        self.inner_edges().is_empty()
    }

    /// Recognizes ⋆ and corollas (in any indexing).
    pub fn elementary_kind(&self) -> Option<Elementary> {
        match self.vertices {
            0 => Some(Elementary::Trivial),
            1 if self.is_elementary() => Some(Elementary::Corolla(self.num_flags())),
            _ => None,
        }
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            arcs: self.num_arcs(),
            involution: self.involution.clone(),
            vertices: self.vertices,
            flags: self.flags.iter().map(|f| [f.arc, f.vertex]).collect(),
        }
    }
}

impl PartialEq for FeynmanGraph {
    fn eq(&self, other: &Self) -> bool {
        self.involution == other.involution
            && self.vertices == other.vertices
            && self.flags == other.flags
    }
}

impl Eq for FeynmanGraph {}

impl Hash for FeynmanGraph {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.involution.hash(state);
        self.vertices.hash(state);
        self.flags.hash(state);
    }
}

impl PartialOrd for FeynmanGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeynmanGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num_arcs(), &self.involution, self.vertices, &self.flags).cmp(&(
            other.num_arcs(),
            &other.involution,
            other.vertices,
            &other.flags,
        ))
    }
}

impl fmt::Debug for FeynmanGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeynmanGraph")
            .field("involution", &self.involution)
            .field("vertices", &self.vertices)
            .field("flags", &self.flags.iter().map(|f| (f.arc, f.vertex)).collect::<Vec<_>>())
            .finish()
    }
}

impl Serialize for FeynmanGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeynmanGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = GraphDocument::deserialize(deserializer)?;
        validate(&doc).map_err(|errs| {
            serde::de::Error::custom(
                errs.iter()
                    .map(|e| e.message.as_str())
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elementary {
    Trivial,
    Corolla(usize),
}

/// An inner edge `{a, i(a)}` with both arcs carried by flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InnerEdge(pub usize, pub usize);

/// The port list (ascending arc order) and the inner edges of a graph.
pub fn boundary(g: &FeynmanGraph) -> (Vec<usize>, Vec<InnerEdge>) {
    (g.ports(), g.inner_edges())
}

/// Checks every graph invariant and returns the full list of violations.
pub fn validate(doc: &GraphDocument) -> Result<FeynmanGraph, Vec<ValidationError>> {
    use ValidationCode::*;
    let mut errors = Vec::new();
    let n = doc.arcs;
    if doc.involution.len() != n {
        errors.push(ValidationError::new(
            DanglingIndex,
            None,
            format!(
                "involution has {} entries but the graph has {} arcs",
                doc.involution.len(),
                n
            ),
        ));
        return Err(errors);
    }
    let mut involution_ok = true;
    for (a, &b) in doc.involution.iter().enumerate() {
        if b >= n {
            errors.push(ValidationError::new(
                DanglingIndex,
                Some(a),
                format!("involution sends arc {a} to missing arc {b}"),
            ));
            involution_ok = false;
        } else if b == a {
            errors.push(ValidationError::new(
                InvolutionHasFixpoint,
                Some(a),
                format!("arc {a} is fixed by the involution"),
            ));
            involution_ok = false;
        } else if doc.involution[b] != a {
            errors.push(ValidationError::new(
                InvolutionNotInvolutive,
                Some(a),
                format!("i(i({a})) = {} != {a}", doc.involution[b]),
            ));
            involution_ok = false;
        }
    }
    let mut flags_ok = true;
    let mut seen = vec![None; n];
    for (h, &[arc, vertex]) in doc.flags.iter().enumerate() {
        if arc >= n {
            errors.push(ValidationError::new(
                DanglingIndex,
                Some(h),
                format!("flag {h} carries missing arc {arc}"),
            ));
            flags_ok = false;
        } else if let Some(other) = seen[arc] {
            errors.push(ValidationError::new(
                SNotInjective,
                Some(h),
                format!("flags {other} and {h} both carry arc {arc}"),
            ));
            flags_ok = false;
        } else {
            seen[arc] = Some(h);
        }
        if vertex >= doc.vertices {
            errors.push(ValidationError::new(
                DanglingIndex,
                Some(h),
                format!("flag {h} is attached to missing vertex {vertex}"),
            ));
            flags_ok = false;
        }
    }
    if involution_ok && flags_ok && !is_connected(doc) {
        errors.push(ValidationError::new(
            Disconnected,
            None,
            "the graph is empty or not connected",
        ));
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let flags = doc
        .flags
        .iter()
        .map(|&[arc, vertex]| Flag { arc, vertex })
        .collect();
    Ok(FeynmanGraph::from_parts_unchecked(
        doc.involution.clone(),
        doc.vertices,
        flags,
    ))
}

// Nodes are vertices and arc orbits; each flag links t(h) with the orbit of s(h).
fn is_connected(doc: &GraphDocument) -> bool {
    let n = doc.arcs;
    let node_of_arc = |a: usize| doc.vertices + a.min(doc.involution[a]);
    let total = doc.vertices + n;
    let present: Vec<bool> = (0..total)
        .map(|x| x < doc.vertices || doc.involution[x - doc.vertices] > x - doc.vertices)
        .collect();
    let live = present.iter().filter(|&&p| p).count();
    if live == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); total];
    for &[arc, vertex] in &doc.flags {
        let o = node_of_arc(arc);
        adj[vertex].push(o);
        adj[o].push(vertex);
    }
    let start = present.iter().position(|&p| p).unwrap();
    let mut visited = vec![false; total];
    visited[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !visited[y] {
                visited[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count == live
}

/// Parses a graph document (JSON) and validates it.
pub fn parse_graph(text: &str) -> Result<FeynmanGraph, GraphError> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let shape_error = |message: String| {
        let (line, column) = locate(text, "\"involution\"");
        GraphError::Syntax {
            line,
            column,
            message,
        }
    };
    if doc.involution.len() % 2 == 1 {
        return Err(shape_error(format!(
            "involution array has odd length {}",
            doc.involution.len()
        )));
    }
    if doc.involution.len() != doc.arcs {
        return Err(shape_error(format!(
            "involution array has length {} but \"arcs\" is {}",
            doc.involution.len(),
            doc.arcs
        )));
    }
    validate(&doc).map_err(GraphError::Invalid)
}

fn locate(text: &str, needle: &str) -> (usize, usize) {
    let Some(offset) = text.find(needle) else {
        return (1, 1);
    };
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

/// Deterministic single-line JSON document.
pub fn serialize_graph(g: &FeynmanGraph) -> String {
    serde_json::to_string(&g.to_document()).expect("graph documents always serialize")
}

/// Graphviz rendering: one node per vertex, one edge per inner edge and a
/// `shape=point` stub `p<k>` for each port.
pub fn to_dot(g: &FeynmanGraph) -> String {
    let mut out = String::from("graph {\n");
    for v in 0..g.num_vertices() {
        out.push_str(&format!("  v{v} [label=\"{v}\"];\n"));
    }
    let ports = g.ports();
    for (k, &p) in ports.iter().enumerate() {
        out.push_str(&format!("  p{k} [shape=point];\n"));
        let partner = g.inv(p);
        match g.flag_of_arc(partner) {
            Some(h) => out.push_str(&format!(
                "  v{} -- p{k} [label=\"{p}\"];\n",
                g.flag(h).vertex
            )),
            None => {
                // both arcs of the orbit are ports: ⋆
                if p < partner {
                    let q = ports.iter().position(|&x| x == partner).unwrap();
                    out.push_str(&format!("  p{k} -- p{q} [label=\"{p}\"];\n"));
                }
            }
        }
    }
    for InnerEdge(a, b) in g.inner_edges() {
        let u = g.flag(g.flag_of_arc(a).unwrap()).vertex;
        let w = g.flag(g.flag_of_arc(b).unwrap()).vertex;
        out.push_str(&format!("  v{u} -- v{w} [label=\"{a}\"];\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(involution: Vec<usize>, vertices: usize, flags: Vec<[usize; 2]>) -> GraphDocument {
        GraphDocument {
            arcs: involution.len(),
            involution,
            vertices,
            flags,
        }
    }

    fn codes(d: &GraphDocument) -> Vec<ValidationCode> {
        validate(d).unwrap_err().into_iter().map(|e| e.code).collect()
    }

    #[test]
    fn elementary_graphs() {
        let star = FeynmanGraph::trivial();
        assert_eq!((star.num_arcs(), star.num_vertices(), star.arity()), (2, 0, 2));
        assert_eq!(star.elementary_kind(), Some(Elementary::Trivial));
        let c = FeynmanGraph::corolla(3);
        assert_eq!(c.ports(), vec![1, 3, 5]);
        assert_eq!(c.elementary_kind(), Some(Elementary::Corolla(3)));
        assert_eq!(FeynmanGraph::corolla(0).arity(), 0);
    }

    #[test]
    fn loops_and_inner_edges() {
        // one vertex with a loop and a port
        let g = validate(&doc(vec![1, 0, 3, 2], 1, vec![[0, 0], [1, 0], [2, 0]])).unwrap();
        assert_eq!(g.ports(), vec![3]);
        assert_eq!(g.inner_edges(), vec![InnerEdge(0, 1)]);
        assert!(!g.is_elementary());
        assert_eq!(boundary(&g), (vec![3], vec![InnerEdge(0, 1)]));
    }

    #[test]
    fn invalid_documents_are_rejected() {
        assert_eq!(codes(&doc(vec![0, 1], 0, vec![])), vec![ValidationCode::InvolutionHasFixpoint; 2]);
        assert!(codes(&doc(vec![1, 2, 0], 0, vec![])).contains(&ValidationCode::InvolutionNotInvolutive));
        assert!(codes(&doc(vec![1, 0], 1, vec![[0, 0], [0, 0]])).contains(&ValidationCode::SNotInjective));
        assert!(codes(&doc(vec![1, 0], 1, vec![[0, 3]])).contains(&ValidationCode::DanglingIndex));
        assert!(codes(&doc(vec![1, 0, 3, 2], 2, vec![[0, 0], [2, 1]])).contains(&ValidationCode::Disconnected));
    }

    #[test]
    fn parse_reports_positions() {
        let err = parse_graph("{\"arcs\": 2,\n \"involution\": [1]}").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { .. }));
        let err = parse_graph(r#"{"arcs": 3, "involution": [1, 0, 2], "vertices": 0, "flags": []}"#).unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, .. }));
        let g = FeynmanGraph::corolla(2);
        assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
    }

    #[test]
    fn dot_lists_ports_and_edges() {
        let dot = to_dot(&FeynmanGraph::corolla(2));
        assert!(dot.starts_with("graph {"));
        assert_eq!(dot.matches("shape=point").count(), 2);
        let star = to_dot(&FeynmanGraph::trivial());
        assert!(star.contains("p0 -- p1"));
    }
}
