//! Algebras of the free monad, given by structure tables on canonical keys.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::generate::{n_graph_classes, TruncationBounds};
use crate::species::{decorations_with, Carrier, DecoratedGraph, Decoration, GraphicalSpecies, Label, OpLabel};

use super::free::{decompose, flatten, free_elements, subdivide, FreeElement};
use super::laws::{corolla_of, LawReport};
use super::CsmError;

/// A species `X` (the carrier) with a structure map sending every
/// `X`-decorated n-graph within bounds to an element of `X[n]`.
#[derive(Clone, Debug)]
pub struct CsmAlgebra<L> {
    pub species: GraphicalSpecies,
    pub bounds: TruncationBounds,
    pub carrier: Carrier<L>,
    pub table: BTreeMap<FreeElement<L>, L>,
}

impl<L: Label> CsmAlgebra<L> {
    /// The structure map on a decorated n-graph.
    pub fn act(&self, d: &DecoratedGraph<L>) -> Result<L, CsmError> {
        let key = FreeElement::from_decorated(&self.species, d);
        self.table
            .get(&key)
            .cloned()
            .ok_or_else(|| CsmError::BoundsNotClosed(format!("a {}-vertex configuration", key.num_vertices())))
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.carrier.by_arity.keys().copied()
    }
}

/// Largest arity carried by the free algebra: a connected graph on `v`
/// vertices of valence at most `d` has at most `v d - 2 (v - 1)` ports.
fn max_free_arity(species: &GraphicalSpecies, bounds: TruncationBounds) -> usize {
    let d = species.max_arity();
    (1..=bounds.max_vertices)
        .map(|v| (v * d).saturating_sub(2 * (v - 1)))
        .max()
        .unwrap_or(0)
        .max(2)
}

/// The free algebra on `species`: carrier `F̄` within bounds, structure map
/// given by flattening.
///
/// The table covers every carrier-decorated n-graph within bounds whose
/// flattening also stays within bounds.
pub fn free_csm(
    species: &GraphicalSpecies,
    bounds: TruncationBounds,
) -> Result<CsmAlgebra<FreeElement<OpLabel>>, CsmError> {
    if bounds.max_vertices == 0 {
        return Err(CsmError::BoundsNotClosed(
            "bounds without vertices cannot hold the unit".into(),
        ));
    }
    let max_arity = max_free_arity(species, bounds);
    let carrier = Carrier {
        by_arity: (0..=max_arity)
            .map(|n| (n, free_elements(species, n, bounds)))
            .filter(|(_, xs)| !xs.is_empty())
            .collect(),
    };
    let mut table = BTreeMap::new();
    for n in 0..=max_arity {
        for (g, ports) in n_graph_classes(n, bounds) {
            for decoration in decorations_with(species, &g, &carrier, Some(bounds.max_vertices)) {
                let key = FreeElement::from_decorated(
                    species,
                    &DecoratedGraph {
                        graph: g.clone(),
                        ports: ports.clone(),
                        decoration,
                    },
                );
                if table.contains_key(&key) {
                    continue;
                }
                // a loop labeled by ⋆ closes into a circle and has no value
                match flatten(species, &key.to_decorated()) {
                    Ok(value) if bounds.admits(&value.graph) => {
                        table.insert(key, value);
                    }
                    Ok(_) | Err(CsmError::CircleUnrepresentable { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(CsmAlgebra {
        species: species.clone(),
        bounds,
        carrier,
        table,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub seed: u64,
    pub samples: usize,
    pub unit: LawReport,
    pub composition: LawReport,
    pub equivariance: LawReport,
    pub colors: LawReport,
}

impl AlgebraReport {
    pub fn pass(&self) -> bool {
        [&self.unit, &self.composition, &self.equivariance, &self.colors]
            .iter()
            .all(|r| r.failed == 0)
    }
}

/// One-shot versus two-step evaluation of a decomposition.
fn composes<L: Label>(alg: &CsmAlgebra<L>, outer: &DecoratedGraph<FreeElement<L>>, expected: &L) -> Result<bool, CsmError> {
    let labels = outer
        .decoration
        .labels
        .iter()
        .map(|piece| alg.act(&piece.to_decorated()))
        .collect::<Result<Vec<L>, CsmError>>()?;
    let stepwise = alg.act(&DecoratedGraph {
        graph: outer.graph.clone(),
        ports: outer.ports.clone(),
        decoration: Decoration {
            colors: outer.decoration.colors.clone(),
            labels,
        },
    })?;
    Ok(stepwise == *expected)
}

fn describe<L: Label>(key: &FreeElement<L>) -> String {
    format!("{key:?}")
}

/// Checks the algebra axioms.
///
/// The unit axiom is checked on every carrier element and the composition
/// axiom on every decomposition of every table key; `samples` further seeded
/// decompositions insert a ⋆ piece. Equivariance is checked on every key with
/// a seeded random port relabeling.
pub fn check_algebra<L: Label>(alg: &CsmAlgebra<L>, samples: usize, seed: u64) -> AlgebraReport {
    let species = &alg.species;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AlgebraReport {
        seed,
        samples,
        unit: LawReport::default(),
        composition: LawReport::default(),
        equivariance: LawReport::default(),
        colors: LawReport::default(),
    };
    for xs in alg.carrier.by_arity.values() {
        for x in xs {
            let got = alg.act(&corolla_of(species, x));
            report
                .unit
                .record(got.as_ref() == Ok(x), || format!("unit fails on {x:?}: {got:?}"));
        }
    }
    for (key, value) in &alg.table {
        let d = key.to_decorated();
        let edges = d.graph.num_inner_edges();
        for mask in 0..(1usize << edges) {
            let keep: Vec<bool> = (0..edges).map(|e| mask >> e & 1 == 1).collect();
            let result = decompose(species, &d, &keep).and_then(|outer| composes(alg, &outer, value));
            report.composition.record(result == Ok(true), || {
                format!("composition fails on {} splitting {keep:?}: {result:?}", describe(key))
            });
        }
        let n = key.graph.arity();
        report.colors.record(value.port_colors(species) == key.port_colors(species), || {
            format!("structure map changes port colors on {}", describe(key))
        });
        if n >= 2 {
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(&mut rng);
            let moved = alg.act(&key.pull(&sigma, species).to_decorated());
            let expected = value.pull(&sigma, species);
            report.equivariance.record(moved.as_ref() == Ok(&expected), || {
                format!("not equivariant under {sigma:?} on {}", describe(key))
            });
        }
    }
    let keys: Vec<(&FreeElement<L>, &L)> = alg.table.iter().collect();
    for _ in 0..samples {
        let Some(&(key, value)) = keys.choose(&mut rng) else { break };
        let d = key.to_decorated();
        let keep: Vec<bool> = d.graph.inner_edges().iter().map(|_| rng.gen_bool(0.5)).collect();
        let result = decompose(species, &d, &keep).and_then(|outer| {
            if outer.graph.num_arcs() == 0 || outer.graph.num_vertices() >= alg.bounds.max_vertices {
                return Ok(true);
            }
            let a = rng.gen_range(0..outer.graph.num_arcs());
            composes(alg, &subdivide(species, &outer, a), value)
        });
        report
            .composition
            .record(result == Ok(true), || format!("composition with ⋆ fails on {}: {result:?}", describe(key)));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{qed_species, terminal_species};

    #[test]
    fn free_algebra_passes() {
        for species in [qed_species(), terminal_species(3)] {
            let alg = free_csm(&species, TruncationBounds::new(2, 2)).unwrap();
            let report = check_algebra(&alg, 50, 3);
            assert!(report.pass(), "{report:?}");
            assert!(report.composition.passed > alg.table.len());
        }
    }

    #[test]
    fn corolla_keys_are_units() {
        let alg = free_csm(&qed_species(), TruncationBounds::new(2, 2)).unwrap();
        for x in alg.carrier.labels(3) {
            assert_eq!(alg.act(&corolla_of(&alg.species, x)).unwrap(), *x);
        }
    }

    #[test]
    fn perturbed_entry_is_detected() {
        let mut alg = free_csm(&qed_species(), TruncationBounds::new(2, 2)).unwrap();
        let key = alg
            .table
            .keys()
            .find(|k| k.num_vertices() == 2 && k.graph.arity() == 2)
            .unwrap()
            .clone();
        let value = alg.table[&key].clone();
        let other = alg
            .carrier
            .labels(2)
            .iter()
            .find(|x| **x != value && x.port_colors(&alg.species) == value.port_colors(&alg.species))
            .unwrap()
            .clone();
        alg.table.insert(key, other);
        let report = check_algebra(&alg, 0, 3);
        assert!(report.composition.failed > 0);
        assert!(!report.composition.counterexamples.is_empty());
    }

    #[test]
    fn empty_bounds_are_rejected() {
        assert!(free_csm(&qed_species(), TruncationBounds::new(0, 0)).is_err());
    }
}
