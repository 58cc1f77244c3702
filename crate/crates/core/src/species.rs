//! Graphical species: presheaves on the elementary graphs.
//!
//! A species has an involutive color set `C = F[⋆]` and, for each arity `n`,
//! a finite label set `F[n]`. Each label colors the `2n` arcs of the corolla
//! and the symmetric group `S_n` acts on labels by permuting flags.
//!
//! Conventions: the corolla's flag `k` carries arc `2k` and its port is
//! `2k + 1`. The left action satisfies `col(σ·x, a) = col(x, σ⁻¹(a))`, and
//! restriction along the corolla self-map `k ↦ π(k)` is `π^* x = π⁻¹·x`.
//! A label on a vertex `v` of a graph is read relative to the flags at `v`
//! in ascending index order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::generate::{n_graph_classes, TruncationBounds};
use crate::graph::{Elementary, FeynmanGraph};
use crate::morphisms::{automorphisms_fixing, GraphMap};
use crate::perm;
use crate::site::{elements_diagram, limit_over_diagram, presheaf_from, FinitePresheaf};

pub type Color = usize;

// full action tables are cached up to this arity
const CACHED_ARITY: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationSet {
    arity: usize,
    coloring: Vec<Vec<Color>>,
    generators: Vec<Vec<usize>>,
    action: Vec<Vec<usize>>,
}

impl OperationSet {
    pub fn len(&self) -> usize {
        self.coloring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coloring.is_empty()
    }

    pub fn coloring(&self, x: usize) -> &[Color] {
        &self.coloring[x]
    }

    /// `σ·x` for a flag permutation `σ`.
    pub fn act(&self, sigma: &[usize], x: usize) -> usize {
        if self.arity <= CACHED_ARITY {
            return self.action[perm::rank(sigma)][x];
        }
        perm::adjacent_word(sigma)
            .into_iter()
            .fold(x, |y, j| self.generators[j][y])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphicalSpecies {
    color_names: Vec<String>,
    involution: Vec<Color>,
    ops: BTreeMap<usize, OperationSet>,
}

/// The species file document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeciesDocument {
    pub colors: Vec<String>,
    pub involution: Vec<usize>,
    pub ops: BTreeMap<String, OperationsDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationsDocument {
    pub labels: usize,
    /// `coloring[x][a]`: color of arc `a` of the corolla under label `x`.
    pub coloring: Vec<Vec<usize>>,
    /// `generators[j][x] = s_j · x` for the transposition `s_j = (j j+1)`.
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeciesError {
    #[error("color involution is not an involution at color {0}")]
    NotInvolutive(usize),
    #[error("arity {arity}, label {label}, arc {arc}: {message}")]
    EquivarianceViolation {
        arity: usize,
        label: usize,
        arc: usize,
        message: String,
    },
    #[error("arity {arity}: {message}")]
    ActionNotFunctorial { arity: usize, message: String },
    #[error("malformed species: {0}")]
    Malformed(String),
}

impl GraphicalSpecies {
    pub fn num_colors(&self) -> usize {
        self.color_names.len()
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    /// The involution `τ` on colors.
    pub fn tau(&self, c: Color) -> Color {
        self.involution[c]
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.keys().copied()
    }

    pub fn max_arity(&self) -> usize {
        self.ops.keys().copied().max().unwrap_or(0)
    }

    pub fn operations(&self, n: usize) -> Option<&OperationSet> {
        self.ops.get(&n)
    }

    /// `|F[n]|`.
    pub fn num_labels(&self, n: usize) -> usize {
        self.ops.get(&n).map_or(0, OperationSet::len)
    }

    pub fn color(&self, n: usize, x: usize, arc: usize) -> Color {
        self.ops[&n].coloring[x][arc]
    }

    pub fn act(&self, n: usize, sigma: &[usize], x: usize) -> usize {
        self.ops[&n].act(sigma, x)
    }

    /// Restriction along the corolla self-map with flag permutation `pi`.
    pub fn pull(&self, n: usize, pi: &[usize], x: usize) -> usize {
        self.ops[&n].act(&perm::inverse(pi), x)
    }

    pub fn to_document(&self) -> SpeciesDocument {
        SpeciesDocument {
            colors: self.color_names.clone(),
            involution: self.involution.clone(),
            ops: self
                .ops
                .iter()
                .map(|(n, o)| {
                    (
                        n.to_string(),
                        OperationsDocument {
                            labels: o.len(),
                            coloring: o.coloring.clone(),
                            generators: o.generators.clone(),
                        },
                    )
                })
                .collect(),
        }
    }
}

fn transposition_on_arcs(j: usize, arc: usize) -> usize {
    let (k, side) = (arc / 2, arc % 2);
    let k2 = if k == j {
        j + 1
    } else if k == j + 1 {
        j
    } else {
        k
    };
    2 * k2 + side
}

fn compose_tables(first: &[usize], second: &[usize]) -> Vec<usize> {
    first.iter().map(|&y| second[y]).collect()
}

/// Validates a species document, generating the full symmetric action from
/// the transposition tables.
pub fn validate_species(doc: &SpeciesDocument) -> Result<GraphicalSpecies, Vec<SpeciesError>> {
    let mut errors = Vec::new();
    let nc = doc.colors.len();
    if doc.involution.len() != nc {
        return Err(vec![SpeciesError::Malformed(format!(
            "{} colors but {} involution entries",
            nc,
            doc.involution.len()
        ))]);
    }
    for (c, &d) in doc.involution.iter().enumerate() {
        if d >= nc || doc.involution[d] != c {
            errors.push(SpeciesError::NotInvolutive(c));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut ops = BTreeMap::new();
    for (key, od) in &doc.ops {
        let Ok(n) = key.parse::<usize>() else {
            errors.push(SpeciesError::Malformed(format!("arity key {key:?} is not a number")));
            continue;
        };
        match validate_operations(n, od, &doc.involution) {
            Ok(o) => {
                if !o.is_empty() {
                    ops.insert(n, o);
                }
            }
            Err(mut es) => errors.append(&mut es),
        }
    }
    if errors.is_empty() {
        Ok(GraphicalSpecies {
            color_names: doc.colors.clone(),
            involution: doc.involution.clone(),
            ops,
        })
    } else {
        Err(errors)
    }
}

fn validate_operations(n: usize, od: &OperationsDocument, tau: &[usize]) -> Result<OperationSet, Vec<SpeciesError>> {
    let mut errors = Vec::new();
    let malformed = |m: String| SpeciesError::Malformed(format!("arity {n}: {m}"));
    if od.coloring.len() != od.labels {
        return Err(vec![malformed(format!(
            "{} labels but {} coloring rows",
            od.labels,
            od.coloring.len()
        ))]);
    }
    for (x, row) in od.coloring.iter().enumerate() {
        if row.len() != 2 * n || row.iter().any(|&c| c >= tau.len()) {
            errors.push(malformed(format!("coloring row {x} must list {} valid colors", 2 * n)));
        }
    }
    let expected_generators = n.saturating_sub(1);
    if od.generators.len() != expected_generators {
        errors.push(malformed(format!(
            "expected {expected_generators} transposition tables, found {}",
            od.generators.len()
        )));
    }
    for (j, g) in od.generators.iter().enumerate() {
        if g.len() != od.labels || g.iter().any(|&y| y >= od.labels) {
            errors.push(malformed(format!("generator {j} must map labels to labels")));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let functorial = |message: String| SpeciesError::ActionNotFunctorial { arity: n, message };
    for (x, row) in od.coloring.iter().enumerate() {
        for k in 0..n {
            if row[2 * k + 1] != tau[row[2 * k]] {
                errors.push(SpeciesError::EquivarianceViolation {
                    arity: n,
                    label: x,
                    arc: 2 * k + 1,
                    message: "col(x, i(a)) != τ(col(x, a))".into(),
                });
            }
        }
    }
    let identity: Vec<usize> = (0..od.labels).collect();
    let g = &od.generators;
    for j in 0..g.len() {
        if !perm::is_permutation(&g[j]) {
            errors.push(functorial(format!("generator {j} is not a bijection")));
            continue;
        }
        if compose_tables(&g[j], &g[j]) != identity {
            errors.push(functorial(format!("s_{j}^2 is not the identity")));
        }
        for k in j + 1..g.len() {
            let st = compose_tables(&g[k], &g[j]);
            let power = if k == j + 1 { 3 } else { 2 };
            let mut acc = identity.clone();
            for _ in 0..power {
                acc = compose_tables(&acc, &st);
            }
            if acc != identity {
                errors.push(functorial(format!("(s_{j} s_{k})^{power} is not the identity")));
            }
        }
        for (x, row) in od.coloring.iter().enumerate() {
            for a in 0..2 * n {
                if od.coloring[g[j][x]][a] != row[transposition_on_arcs(j, a)] {
                    errors.push(SpeciesError::EquivarianceViolation {
                        arity: n,
                        label: x,
                        arc: a,
                        message: format!("col(s_{j}·x, a) != col(x, s_{j}(a))"),
                    });
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut action: Vec<Vec<usize>> = Vec::new();
    if n <= CACHED_ARITY {
        for sigma in perm::permutations(n) {
            let table = (0..od.labels)
                .map(|x| perm::adjacent_word(&sigma).into_iter().fold(x, |y, j| g[j][y]))
                .collect();
            action.push(table);
        }
        // closure: the tables form an action of S_n
        if n <= 4 {
            let perms = perm::permutations(n);
            'outer: for s in &perms {
                for r in &perms {
                    let sr: Vec<usize> = r.iter().map(|&i| s[i]).collect();
                    let lhs = &action[perm::rank(&sr)];
                    let rhs = compose_tables(&action[perm::rank(r)], &action[perm::rank(s)]);
                    if *lhs != rhs {
                        errors.push(functorial("generated tables are not a group action".into()));
                        break 'outer;
                    }
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(OperationSet {
        arity: n,
        coloring: od.coloring.clone(),
        generators: od.generators.clone(),
        action,
    })
}

pub fn parse_species(text: &str) -> Result<GraphicalSpecies, Vec<SpeciesError>> {
    let doc: SpeciesDocument =
        serde_json::from_str(text).map_err(|e| vec![SpeciesError::Malformed(e.to_string())])?;
    validate_species(&doc)
}

/// Colors of QED.
pub const ELECTRON: Color = 0;
pub const POSITRON: Color = 1;
pub const PHOTON: Color = 2;

/// The QED species: colors `e-`, `e+`, `γ` with `τ` swapping the electron
/// colors, and one trivalent interaction applied in all `3!` ways.
///
/// Label `x` assigns the roles `(e-, e+, γ)` permuted by the `x`-th
/// permutation (lexicographic) to the three flags; the role color sits on the
/// port arc `2k + 1` and its dual on the flag arc `2k`.
pub fn qed_species() -> GraphicalSpecies {
    let tau = vec![POSITRON, ELECTRON, PHOTON];
    let roles = perm::permutations(3);
    let coloring: Vec<Vec<usize>> = roles
        .iter()
        .map(|r| (0..6).map(|a| if a % 2 == 1 { r[a / 2] } else { tau[r[a / 2]] }).collect())
        .collect();
    let generators = (0..2)
        .map(|j| {
            roles
                .iter()
                .map(|r| {
                    let mut s = r.clone();
                    s.swap(j, j + 1);
                    roles.iter().position(|q| *q == s).unwrap()
                })
                .collect()
        })
        .collect();
    let doc = SpeciesDocument {
        colors: vec!["e-".into(), "e+".into(), "gamma".into()],
        involution: tau,
        ops: BTreeMap::from([(
            "3".to_string(),
            OperationsDocument {
                labels: 6,
                coloring,
                generators,
            },
        )]),
    };
    validate_species(&doc).expect("the QED species is valid")
}

/// One self-dual color and a single label in each arity `0..=max_arity`.
pub fn terminal_species(max_arity: usize) -> GraphicalSpecies {
    let ops = (0..=max_arity)
        .map(|n| {
            (
                n.to_string(),
                OperationsDocument {
                    labels: 1,
                    coloring: vec![vec![0; 2 * n]],
                    generators: vec![vec![0]; n.saturating_sub(1)],
                },
            )
        })
        .collect();
    validate_species(&SpeciesDocument {
        colors: vec!["c".into()],
        involution: vec![0],
        ops,
    })
    .expect("the terminal species is valid")
}

/// A vertex label: anything the symmetric groups act on and that colors the
/// ports of a corolla.
pub trait Label: Clone + Eq + Ord + Hash + Debug {
    fn arity(&self) -> usize;
    /// Restriction along the corolla self-map `k ↦ perm[k]`.
    fn pull(&self, perm: &[usize], species: &GraphicalSpecies) -> Self;
    /// Colors of the corolla's ports `2k + 1`.
    fn port_colors(&self, species: &GraphicalSpecies) -> Vec<Color>;
    /// Number of base vertices once everything is flattened.
    fn weight(&self) -> usize;
}

/// A label of the species itself: an element of `F[arity]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpLabel {
    pub arity: usize,
    pub index: usize,
}

impl Label for OpLabel {
    fn arity(&self) -> usize {
        self.arity
    }

    fn pull(&self, perm: &[usize], species: &GraphicalSpecies) -> Self {
        OpLabel {
            arity: self.arity,
            index: species.pull(self.arity, perm, self.index),
        }
    }

    fn port_colors(&self, species: &GraphicalSpecies) -> Vec<Color> {
        (0..self.arity)
            .map(|k| species.color(self.arity, self.index, 2 * k + 1))
            .collect()
    }

    fn weight(&self) -> usize {
        1
    }
}

/// Labels available per arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Carrier<L> {
    pub by_arity: BTreeMap<usize, Vec<L>>,
}

impl<L: Label> Carrier<L> {
    pub fn labels(&self, n: usize) -> &[L] {
        self.by_arity.get(&n).map_or(&[], Vec::as_slice)
    }
}

impl Carrier<OpLabel> {
    pub fn of_species(species: &GraphicalSpecies) -> Self {
        Carrier {
            by_arity: species
                .ops
                .iter()
                .map(|(&n, o)| (n, (0..o.len()).map(|index| OpLabel { arity: n, index }).collect()))
                .collect(),
        }
    }
}

/// A decoration in normalized form: an involutive arc coloring plus one label
/// per vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Decoration<L> {
    pub colors: Vec<Color>,
    pub labels: Vec<L>,
}

/// `π` with `f(k-th flag at v) = π(k)-th flag at f(v)`.
pub fn local_permutation(src: &FeynmanGraph, tgt: &FeynmanGraph, f: &GraphMap, v: usize) -> Vec<usize> {
    let there = tgt.flags_at(f.vertex_map[v]);
    src.flags_at(v)
        .iter()
        .map(|&h| there.iter().position(|&x| x == f.flag_map[h]).expect("etale maps are locally bijective"))
        .collect()
}

/// Restriction of a decoration of `tgt` along an etale map `f: src -> tgt`.
pub fn restrict<L: Label>(
    species: &GraphicalSpecies,
    src: &FeynmanGraph,
    tgt: &FeynmanGraph,
    f: &GraphMap,
    d: &Decoration<L>,
) -> Decoration<L> {
    Decoration {
        colors: f.arc_map.iter().map(|&a| d.colors[a]).collect(),
        labels: (0..src.num_vertices())
            .map(|v| d.labels[f.vertex_map[v]].pull(&local_permutation(src, tgt, f, v), species))
            .collect(),
    }
}

/// Transport of a decoration of `g` along an isomorphism `iso: g -> g'`.
pub fn transport<L: Label>(
    species: &GraphicalSpecies,
    g: &FeynmanGraph,
    target: &FeynmanGraph,
    iso: &GraphMap,
    d: &Decoration<L>,
) -> Decoration<L> {
    restrict(species, target, g, &iso.inverse(), d)
}

/// Whether `d` is a decoration of `g`: involutive colors, arities matching
/// valences and port colors matching the arcs around each vertex.
pub fn is_compatible<L: Label>(species: &GraphicalSpecies, g: &FeynmanGraph, d: &Decoration<L>) -> bool {
    if d.colors.len() != g.num_arcs() || d.labels.len() != g.num_vertices() {
        return false;
    }
    if d.colors.iter().any(|&c| c >= species.num_colors()) {
        return false;
    }
    if (0..g.num_arcs()).any(|a| d.colors[g.inv(a)] != species.tau(d.colors[a])) {
        return false;
    }
    (0..g.num_vertices()).all(|v| {
        let label = &d.labels[v];
        label.arity() == g.valence(v)
            && label
                .port_colors(species)
                .iter()
                .zip(g.flags_at(v))
                .all(|(&c, &h)| d.colors[g.inv(g.flag(h).arc)] == c)
    })
}

/// All decorations of `g` with labels from `carrier`, sorted.
///
/// `max_weight` bounds the total weight of the vertex labels.
pub fn decorations_with<L: Label>(
    species: &GraphicalSpecies,
    g: &FeynmanGraph,
    carrier: &Carrier<L>,
    max_weight: Option<usize>,
) -> Vec<Decoration<L>> {
    let mut out = Vec::new();
    if g.num_vertices() == 0 {
        for c in 0..species.num_colors() {
            let mut colors = vec![0; 2];
            colors[0] = c;
            colors[g.inv(0)] = species.tau(c);
            out.push(Decoration { colors, labels: Vec::new() });
        }
        out.sort();
        return out;
    }
    let mut colors: Vec<Option<Color>> = vec![None; g.num_arcs()];
    let mut labels: Vec<L> = Vec::with_capacity(g.num_vertices());
    fn go<L: Label>(
        v: usize,
        weight: usize,
        species: &GraphicalSpecies,
        g: &FeynmanGraph,
        carrier: &Carrier<L>,
        max_weight: Option<usize>,
        colors: &mut Vec<Option<Color>>,
        labels: &mut Vec<L>,
        out: &mut Vec<Decoration<L>>,
    ) {
        if v == g.num_vertices() {
            out.push(Decoration {
                colors: colors.iter().map(|c| c.expect("every arc faces a flag")).collect(),
                labels: labels.clone(),
            });
            return;
        }
        for label in carrier.labels(g.valence(v)) {
            let w = weight + label.weight();
            if max_weight.is_some_and(|m| w > m) {
                continue;
            }
            let ports = label.port_colors(species);
            let mut touched = Vec::new();
            let mut ok = true;
            for (k, &h) in g.flags_at(v).iter().enumerate() {
                let into = g.inv(g.flag(h).arc);
                let out_arc = g.flag(h).arc;
                for (arc, c) in [(into, ports[k]), (out_arc, species.tau(ports[k]))] {
                    match colors[arc] {
                        Some(existing) if existing != c => ok = false,
                        Some(_) => {}
                        None => {
                            colors[arc] = Some(c);
                            touched.push(arc);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                labels.push(label.clone());
                go(v + 1, w, species, g, carrier, max_weight, colors, labels, out);
                labels.pop();
            }
            for arc in touched {
                colors[arc] = None;
            }
        }
    }
    go(0, 0, species, g, carrier, max_weight, &mut colors, &mut labels, &mut out);
    out.sort();
    out
}

/// Decorations of `g` by the species' own labels, enumerated directly.
pub fn decorations(species: &GraphicalSpecies, g: &FeynmanGraph) -> Vec<Decoration<OpLabel>> {
    decorations_with(species, g, &Carrier::of_species(species), None)
}

/// The species as a presheaf on ⋆ and the corollas of the given arities.
pub fn elementary_presheaf(species: &GraphicalSpecies, arities: &BTreeSet<usize>) -> FinitePresheaf {
    let mut shapes = vec![Elementary::Trivial];
    shapes.extend(arities.iter().map(|&n| Elementary::Corolla(n)));
    let graphs: Vec<FeynmanGraph> = shapes.iter().map(|&s| FeynmanGraph::elementary(s)).collect();
    let sizes: Vec<usize> = shapes
        .iter()
        .map(|s| match s {
            Elementary::Trivial => species.num_colors(),
            Elementary::Corolla(n) => species.num_labels(*n),
        })
        .collect();
    presheaf_from(&graphs, &sizes, |i, j, m| match (shapes[i], shapes[j]) {
        (Elementary::Trivial, Elementary::Trivial) => (0..species.num_colors())
            .map(|c| if m.arc_map[0] == 0 { c } else { species.tau(c) })
            .collect(),
        (Elementary::Trivial, Elementary::Corolla(n)) => (0..species.num_labels(n))
            .map(|x| species.color(n, x, m.arc_map[0]))
            .collect(),
        (Elementary::Corolla(n), Elementary::Corolla(_)) => (0..species.num_labels(n))
            .map(|x| species.pull(n, &m.flag_map, x))
            .collect(),
        (Elementary::Corolla(_), Elementary::Trivial) => unreachable!("no etale maps from corollas to ⋆"),
    })
}

/// `F[G]` computed as the limit over the category of elements of `g`, and
/// reported in normalized form.
pub fn evaluate(species: &GraphicalSpecies, g: &FeynmanGraph) -> Vec<Decoration<OpLabel>> {
    let arities: BTreeSet<usize> = (0..g.num_vertices()).map(|v| g.valence(v)).collect();
    let x = elementary_presheaf(species, &arities);
    let diagram = elements_diagram(g);
    let families = limit_over_diagram(&x, g, &diagram).expect("the species presheaf covers every elementary graph");
    let star_object: Vec<usize> = (0..g.num_arcs())
        .map(|a| {
            diagram
                .objects
                .iter()
                .position(|o| o.shape == Elementary::Trivial && o.map.arc_map[0] == a)
                .unwrap()
        })
        .collect();
    let vertex_object: Vec<usize> = (0..g.num_vertices())
        .map(|v| {
            diagram
                .objects
                .iter()
                .position(|o| o.shape != Elementary::Trivial && o.map.vertex_map[0] == v && o.map.flag_map == g.flags_at(v))
                .unwrap()
        })
        .collect();
    let mut out: Vec<Decoration<OpLabel>> = families
        .iter()
        .map(|fam| Decoration {
            colors: star_object.iter().map(|&o| fam[o]).collect(),
            labels: vertex_object
                .iter()
                .enumerate()
                .map(|(v, &o)| OpLabel {
                    arity: g.valence(v),
                    index: fam[o],
                })
                .collect(),
        })
        .collect();
    out.sort();
    out
}

/// A decorated n-graph: a graph, its port labeling and a decoration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecoratedGraph<L> {
    pub graph: FeynmanGraph,
    pub ports: Vec<usize>,
    pub decoration: Decoration<L>,
}

impl<L: Label> DecoratedGraph<L> {
    pub fn arity(&self) -> usize {
        self.ports.len()
    }

    /// Colors on the ports, in label order.
    pub fn port_colors(&self) -> Vec<Color> {
        self.ports.iter().map(|&p| self.decoration.colors[p]).collect()
    }

    pub fn relabel(&self, species: &GraphicalSpecies, iso: &GraphMap) -> Self {
        let graph = canon::relabel(&self.graph, iso);
        let decoration = transport(species, &self.graph, &graph, iso, &self.decoration);
        DecoratedGraph {
            ports: self.ports.iter().map(|&p| iso.arc_map[p]).collect(),
            graph,
            decoration,
        }
    }

    /// Canonical representative under port-fixing isomorphisms preserving
    /// the decoration. Port `k` ends up at arc `k`.
    pub fn canonical(&self, species: &GraphicalSpecies) -> Self {
        let keys: Vec<u64> = self.decoration.colors.iter().map(|&c| c as u64).collect();
        canon::candidate_labelings(&self.graph, Some(&self.ports), &keys)
            .iter()
            .map(|iso| self.relabel(species, iso))
            .min()
            .expect("every graph has a candidate labeling")
    }
}

/// Orbits of decorations under the port-fixing automorphisms of an n-graph,
/// each given by its minimal member and its size.
pub fn decoration_orbits<L: Label>(
    species: &GraphicalSpecies,
    g: &FeynmanGraph,
    ports: &[usize],
    decorations: &[Decoration<L>],
) -> Vec<(Decoration<L>, usize)> {
    let auts = automorphisms_fixing(g, ports);
    let mut seen: BTreeSet<Decoration<L>> = BTreeSet::new();
    let mut out = Vec::new();
    for d in decorations {
        if seen.contains(d) {
            continue;
        }
        let orbit: BTreeSet<Decoration<L>> = auts.iter().map(|a| transport(species, g, g, a, d)).collect();
        let rep = orbit.iter().next().unwrap().clone();
        out.push((rep, orbit.len()));
        seen.extend(orbit);
    }
    out.sort();
    out
}

/// `F`-structured n-graphs up to port-fixing isomorphism, within bounds.
pub fn structured_graphs(
    species: &GraphicalSpecies,
    arity: usize,
    max_vertices: usize,
    max_inner: usize,
) -> Vec<DecoratedGraph<OpLabel>> {
    let bounds = TruncationBounds::new(max_vertices, max_inner);
    let carrier = Carrier::of_species(species);
    let mut out = Vec::new();
    for (g, ports) in n_graph_classes(arity, bounds) {
        let decos = decorations_with(species, &g, &carrier, None);
        for (d, _) in decoration_orbits(species, &g, &ports, &decos) {
            out.push(DecoratedGraph {
                graph: g.clone(),
                ports: ports.clone(),
                decoration: d,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qed_counts() {
        let qed = qed_species();
        assert_eq!(qed.num_colors(), 3);
        assert_eq!(qed.num_labels(3), 6);
        assert_eq!(qed.num_labels(2), 0);
        assert_eq!((0..3).filter(|&c| qed.tau(c) == c).count(), 1);
    }

    #[test]
    fn qed_action_is_free() {
        let qed = qed_species();
        let orbit: BTreeSet<usize> = perm::permutations(3).iter().map(|s| qed.act(3, s, 0)).collect();
        assert_eq!(orbit.len(), 6);
    }

    #[test]
    fn action_moves_colors() {
        let qed = qed_species();
        for s in perm::permutations(3) {
            let sinv = perm::inverse(&s);
            for x in 0..6 {
                for a in 0..6 {
                    let moved = 2 * sinv[a / 2] + a % 2;
                    assert_eq!(qed.color(3, qed.act(3, &s, x), a), qed.color(3, x, moved));
                }
            }
        }
    }

    #[test]
    fn equivariance_violation_is_reported() {
        let mut doc = terminal_species(2).to_document();
        doc.colors.push("d".into());
        doc.involution.push(1);
        doc.ops.get_mut("1").unwrap().coloring = vec![vec![0, 1]];
        let errs = validate_species(&doc).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SpeciesError::EquivarianceViolation { .. })));
    }

    #[test]
    fn non_involution_is_reported() {
        let mut doc = terminal_species(1).to_document();
        doc.colors = vec!["a".into(), "b".into(), "c".into()];
        doc.involution = vec![1, 2, 0];
        let errs = validate_species(&doc).unwrap_err();
        assert!(matches!(errs[0], SpeciesError::NotInvolutive(_)));
    }

    #[test]
    fn broken_action_is_reported() {
        // two labels, transposition tables that do not satisfy the braid relation
        let doc = SpeciesDocument {
            colors: vec!["c".into()],
            involution: vec![0],
            ops: BTreeMap::from([(
                "3".to_string(),
                OperationsDocument {
                    labels: 3,
                    coloring: vec![vec![0; 6]; 3],
                    generators: vec![vec![1, 0, 2], vec![0, 2, 1]],
                },
            )]),
        };
        // (s0 s1) is a 3-cycle here, so that relation holds; make s1 = s0 instead
        assert!(validate_species(&doc).is_ok());
        let mut bad = doc.clone();
        bad.ops.get_mut("3").unwrap().generators = vec![vec![1, 0, 2], vec![1, 2, 0]];
        let errs = validate_species(&bad).unwrap_err();
        assert!(errs.iter().all(|e| matches!(e, SpeciesError::ActionNotFunctorial { .. })));
    }

    #[test]
    fn evaluate_corolla_and_star() {
        let qed = qed_species();
        assert_eq!(evaluate(&qed, &FeynmanGraph::corolla(3)).len(), 6);
        assert_eq!(evaluate(&qed, &FeynmanGraph::trivial()).len(), 3);
        assert_eq!(evaluate(&qed, &FeynmanGraph::corolla(2)).len(), 0);
        let t = terminal_species(3);
        assert_eq!(evaluate(&t, &FeynmanGraph::corolla(0)).len(), 1);
    }

    #[test]
    fn structured_corollas() {
        let qed = qed_species();
        assert_eq!(structured_graphs(&qed, 3, 1, 0).len(), 6);
        let t = terminal_species(3);
        let one = structured_graphs(&t, 1, 1, 0);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].graph.num_vertices(), 1);
    }
}
