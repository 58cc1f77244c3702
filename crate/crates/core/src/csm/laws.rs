//! Seeded property checks of the monad laws.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::generate::TruncationBounds;
use crate::graph::FeynmanGraph;
use crate::species::{DecoratedGraph, Decoration, GraphicalSpecies, Label, OpLabel};

use super::free::{decompose, flatten, free_elements, subdivide, unit_of, FreeElement};
use super::CsmError;

/// Pass/fail counts for one law, with reproducers for failures.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub passed: usize,
    pub failed: usize,
    pub counterexamples: Vec<String>,
}

impl LawReport {
    pub(crate) fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.counterexamples.len() < 5 {
                self.counterexamples.push(witness());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonadLawReport {
    pub seed: u64,
    pub samples: usize,
    pub bounds: TruncationBounds,
    pub left_unit: LawReport,
    pub right_unit: LawReport,
    pub associativity: LawReport,
}

impl MonadLawReport {
    pub fn pass(&self) -> bool {
        [&self.left_unit, &self.right_unit, &self.associativity]
            .iter()
            .all(|r| r.failed == 0 && r.passed == self.samples)
    }
}

/// Largest arity sampled from.
const MAX_SAMPLED_ARITY: usize = 4;

/// Elements of `F̄[n]` for small `n` within bounds, the pool samples are
/// drawn from.
pub fn sample_pool(species: &GraphicalSpecies, bounds: TruncationBounds) -> Vec<FreeElement<OpLabel>> {
    (0..=MAX_SAMPLED_ARITY)
        .flat_map(|n| free_elements(species, n, bounds))
        .collect()
}

/// Outer graph equal to `e` with each vertex labeled by the unit of its label.
pub fn unit_decorated<L: Label>(species: &GraphicalSpecies, e: &FreeElement<L>) -> DecoratedGraph<FreeElement<L>> {
    DecoratedGraph {
        graph: e.graph.clone(),
        ports: (0..e.graph.arity()).collect(),
        decoration: Decoration {
            colors: e.decoration.colors.clone(),
            labels: e.decoration.labels.iter().map(|x| unit_of(species, x)).collect(),
        },
    }
}

/// The corolla labeled by `e`.
pub fn corolla_of<L: Label>(species: &GraphicalSpecies, e: &L) -> DecoratedGraph<L> {
    let n = e.arity();
    let ports = e.port_colors(species);
    DecoratedGraph {
        graph: FeynmanGraph::corolla(n),
        ports: (0..n).map(|k| 2 * k + 1).collect(),
        decoration: Decoration {
            colors: (0..2 * n)
                .map(|a| if a % 2 == 1 { ports[a / 2] } else { species.tau(ports[a / 2]) })
                .collect(),
            labels: vec![e.clone()],
        },
    }
}

/// A random decomposition of `d`, followed by at most one ⋆ insertion.
pub fn random_split<L: Label>(
    species: &GraphicalSpecies,
    d: &DecoratedGraph<L>,
    rng: &mut ChaCha8Rng,
) -> Result<DecoratedGraph<FreeElement<L>>, CsmError> {
    let keep: Vec<bool> = d.graph.inner_edges().iter().map(|_| rng.gen_bool(0.5)).collect();
    let outer = decompose(species, d, &keep)?;
    if outer.graph.num_arcs() > 0 && rng.gen_bool(0.3) {
        let a = rng.gen_range(0..outer.graph.num_arcs());
        return Ok(subdivide(species, &outer, a));
    }
    Ok(outer)
}

fn associativity(
    species: &GraphicalSpecies,
    e: &FreeElement<OpLabel>,
    rng: &mut ChaCha8Rng,
) -> Result<bool, CsmError> {
    let level1 = random_split(species, &e.to_decorated(), rng)?;
    let level2 = random_split(species, &level1, rng)?;
    // flatten the inner pieces first, then the outer graph
    let labels = level2
        .decoration
        .labels
        .iter()
        .map(|piece| flatten(species, &piece.to_decorated()))
        .collect::<Result<Vec<FreeElement<OpLabel>>, CsmError>>()?;
    let inner_first = flatten(
        species,
        &DecoratedGraph {
            graph: level2.graph.clone(),
            ports: level2.ports.clone(),
            decoration: Decoration {
                colors: level2.decoration.colors.clone(),
                labels,
            },
        },
    )?;
    // flatten the outer graph first, then the result
    let outer_first = flatten(species, &flatten(species, &level2)?.to_decorated())?;
    Ok(inner_first == outer_first && inner_first == *e)
}

/// Checks the unit and associativity laws of flattening on `samples` seeded
/// random configurations built from elements within `bounds`.
pub fn check_monad_laws(
    species: &GraphicalSpecies,
    bounds: TruncationBounds,
    samples: usize,
    seed: u64,
) -> MonadLawReport {
    let mut report = MonadLawReport {
        seed,
        samples,
        bounds,
        left_unit: LawReport::default(),
        right_unit: LawReport::default(),
        associativity: LawReport::default(),
    };
    if samples == 0 {
        return report;
    }
    let pool = sample_pool(species, bounds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let Some(e) = pool.choose(&mut rng) else {
            let missing = || "the species has no structured graphs within bounds".to_string();
            report.left_unit.record(false, missing);
            report.right_unit.record(false, missing);
            report.associativity.record(false, missing);
            continue;
        };
        let witness = |law: &str, detail: String| format!("sample {i} ({law}): {} {detail}", serde_json::to_string(e).unwrap_or_default());
        let left = flatten(species, &unit_decorated(species, e));
        report
            .left_unit
            .record(left.as_ref() == Ok(e), || witness("left unit", format!("{left:?}")));
        let right = flatten(species, &corolla_of(species, e));
        report
            .right_unit
            .record(right.as_ref() == Ok(e), || witness("right unit", format!("{right:?}")));
        let assoc = associativity(species, e, &mut rng);
        report
            .associativity
            .record(assoc == Ok(true), || witness("associativity", format!("{assoc:?}")));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{qed_species, terminal_species};

    #[test]
    fn no_samples_pass_vacuously() {
        let r = check_monad_laws(&qed_species(), TruncationBounds::new(2, 2), 0, 1);
        assert!(r.pass());
    }

    #[test]
    fn small_runs_pass() {
        for species in [qed_species(), terminal_species(3)] {
            let r = check_monad_laws(&species, TruncationBounds::new(2, 2), 30, 7);
            assert!(r.pass(), "{r:?}");
        }
    }
}
