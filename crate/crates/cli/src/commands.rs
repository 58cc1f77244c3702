//! One function per subcommand.

use std::collections::{BTreeMap, HashSet};

use feynman_core::canon::canonical_graph;
use feynman_core::csm::kleisli::search_factorizations;
use feynman_core::csm::{
    check_algebra, check_monad_laws, enumerate_n_graphs, factorize_kleisli, free_apply, free_csm, kleisli_equal, nerve,
    CsmError, KleisliMap, TruncationBounds,
};
use feynman_core::generate::connected_graphs;
use feynman_core::graph::{serialize_graph, to_dot};
use feynman_core::morphisms::{automorphism_group, enumerate_etale};
use feynman_core::site::{segal_check, FinitePresheaf, PresheafDocument};
use feynman_core::species::evaluate;
use feynman_core::FeynmanGraph;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::input::{canonical_hash, graph_json, read_graph, read_graph_dir, read_json, read_species, InputError};
use crate::{BoundsArgs, Command, Outcome, Output};

fn output(json: Value, summary: String) -> Output {
    Output {
        json,
        summary,
        dot: None,
    }
}

fn verdict(pass: bool, o: Output) -> Outcome {
    if pass {
        Outcome::Pass(o)
    } else {
        Outcome::CheckFailed(o)
    }
}

fn bounds(b: &BoundsArgs) -> TruncationBounds {
    TruncationBounds::new(b.max_vertices, b.max_inner_edges)
}

fn computation(e: CsmError) -> InputError {
    InputError::Computation(e.to_string())
}

fn hex_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn run(command: &Command) -> Result<Outcome, InputError> {
    match command {
        Command::Validate { graph, canon } => {
            let g = read_graph(graph)?;
            let summary = format!(
                "valid graph: {} vertices, {} inner edges, {} ports",
                g.num_vertices(),
                g.num_inner_edges(),
                g.arity()
            );
            let mut json = json!({
                "valid": true,
                "vertices": g.num_vertices(),
                "inner_edges": g.num_inner_edges(),
                "ports": g.ports(),
                "hash": canonical_hash(&g),
            });
            if *canon {
                json["canonical"] = graph_json(&canonical_graph(&g));
            }
            Ok(Outcome::Pass(Output {
                json,
                summary,
                dot: Some(to_dot(&g)),
            }))
        }
        Command::Canon { graph } => {
            let g = read_graph(graph)?;
            let c = canonical_graph(&g);
            let hash = canonical_hash(&g);
            Ok(Outcome::Pass(Output {
                json: json!({"canonical": graph_json(&c), "hash": hash}),
                summary: hash,
                dot: Some(to_dot(&c)),
            }))
        }
        Command::Dot { graph } => {
            let g = read_graph(graph)?;
            let dot = to_dot(&g);
            Ok(Outcome::Pass(Output {
                json: json!({"dot": dot}),
                summary: format!("{} vertices", g.num_vertices()),
                dot: Some(dot),
            }))
        }
        Command::Homs { from, to, list } => {
            let (a, b) = (read_graph(from)?, read_graph(to)?);
            let maps = enumerate_etale(&a, &b);
            let mut json = json!({"count": maps.len()});
            if *list {
                json["maps"] = json!(maps);
            }
            Ok(Outcome::Pass(output(json, format!("{} etale maps", maps.len()))))
        }
        Command::Aut { graph, fix_ports } => {
            let g = read_graph(graph)?;
            let group = automorphism_group(&g, *fix_ports);
            Ok(Outcome::Pass(output(
                json!({"order": group.len(), "fix_ports": fix_ports, "automorphisms": group}),
                format!("automorphism group of order {}", group.len()),
            )))
        }
        Command::Enumerate { arity, bounds: b } => {
            let classes = enumerate_n_graphs(*arity, bounds(b));
            let items: Vec<Value> = classes
                .iter()
                .map(|c| {
                    json!({
                        "graph": graph_json(&c.graph),
                        "ports": c.ports,
                        "automorphisms": c.automorphisms.len(),
                        "key": hex_digest(&serialize_graph(&c.graph)),
                    })
                })
                .collect();
            Ok(Outcome::Pass(output(
                json!({"arity": arity, "bounds": bounds(b), "count": items.len(), "classes": items}),
                format!("{} classes of {arity}-graphs", items.len()),
            )))
        }
        Command::Species { species } => {
            let s = read_species(species)?;
            let arities: Vec<String> = s.arities().map(|n| format!("{n}: {}", s.num_labels(n))).collect();
            Ok(Outcome::Pass(output(
                json!(s.to_document()),
                format!("{} colors; labels by arity {{{}}}", s.num_colors(), arities.join(", ")),
            )))
        }
        Command::Eval { species, graph } => {
            let s = read_species(species)?;
            let g = read_graph(graph)?;
            let decorations = evaluate(&s, &g);
            let items: Vec<Value> = decorations
                .iter()
                .map(|d| json!({"colors": d.colors, "labels": d.labels.iter().map(|l| l.index).collect::<Vec<_>>()}))
                .collect();
            Ok(Outcome::Pass(output(
                json!({"count": items.len(), "decorations": items}),
                format!("{} decorations", items.len()),
            )))
        }
        Command::Free { species, arity, bounds: b } => {
            let s = read_species(species)?;
            let orbits = free_apply(&s, *arity, bounds(b)).map_err(computation)?;
            let items: Vec<Value> = orbits
                .iter()
                .map(|o| {
                    json!({
                        "graph": graph_json(&o.element.graph),
                        "colors": o.element.decoration.colors,
                        "labels": o.element.decoration.labels,
                        "orbit_size": o.orbit_size,
                    })
                })
                .collect();
            Ok(Outcome::Pass(output(
                json!({"arity": arity, "bounds": bounds(b), "count": items.len(), "elements": items}),
                format!("{} elements in arity {arity}", items.len()),
            )))
        }
        Command::Laws {
            species,
            samples,
            seed,
            bounds: b,
        } => {
            let s = read_species(species)?;
            let report = check_monad_laws(&s, bounds(b), *samples, *seed);
            let pass = report.pass();
            let summary = format!(
                "left unit {}/{samples}, right unit {}/{samples}, associativity {}/{samples}",
                report.left_unit.passed, report.right_unit.passed, report.associativity.passed
            );
            let mut json = json!(report);
            json["pass"] = json!(pass);
            Ok(verdict(pass, output(json, summary)))
        }
        Command::Algebra {
            species,
            samples,
            seed,
            bounds: b,
        } => {
            let s = read_species(species)?;
            let alg = free_csm(&s, bounds(b)).map_err(computation)?;
            let report = check_algebra(&alg, *samples, *seed);
            let pass = report.pass();
            let carrier: BTreeMap<String, usize> =
                alg.carrier.by_arity.iter().map(|(n, xs)| (n.to_string(), xs.len())).collect();
            let summary = format!(
                "{} table entries; {} composition checks, {} failed",
                alg.table.len(),
                report.composition.passed + report.composition.failed,
                report.composition.failed + report.unit.failed + report.equivariance.failed + report.colors.failed
            );
            Ok(verdict(
                pass,
                output(
                    json!({"pass": pass, "table_size": alg.table.len(), "carrier": carrier, "report": report}),
                    summary,
                ),
            ))
        }
        Command::Nerve {
            species,
            bounds: b,
            max_valence,
            universe,
            segal,
        } => {
            let x = match universe {
                Some(dir) => nerve_on(species, b, read_graph_dir(dir)?)?,
                None => nerve_presheaf(species, b, *max_valence)?,
            };
            if *segal {
                return Ok(segal_report(&x));
            }
            let doc = presheaf_document(&x);
            let summary = format!("{} graphs, {} restrictions", doc.graphs.len(), doc.restrictions.len());
            Ok(Outcome::Pass(output(json!(doc), summary)))
        }
        Command::Segal {
            presheaf,
            species,
            bounds: b,
            max_valence,
        } => {
            let x = match (presheaf, species) {
                (Some(path), _) => {
                    let doc: PresheafDocument = read_json(path)?;
                    FinitePresheaf::from_document(&doc).map_err(|e| InputError::Syntax {
                        path: path.clone(),
                        message: e.to_string(),
                    })?
                }
                (None, Some(s)) => nerve_presheaf(s, b, *max_valence)?,
                (None, None) => return Err(InputError::Usage("give --presheaf or --species".into())),
            };
            Ok(segal_report(&x))
        }
        Command::Factor {
            kleisli,
            search,
            max_arcs,
            bounds: b,
        } => {
            let raw: KleisliMap = read_json(kleisli)?;
            let phi = KleisliMap::new(raw.source, raw.target, raw.pieces, raw.etale).map_err(|e| InputError::Syntax {
                path: kleisli.clone(),
                message: e.to_string(),
            })?;
            let (r, e) = factorize_kleisli(&phi).map_err(computation)?;
            let composite = kleisli_equal(&r.then_etale(&phi.target, &e), &phi).map_err(computation)?;
            let mut json = json!({
                "refined": graph_json(&r.target),
                "refined_hash": canonical_hash(&r.target),
                "etale": e,
                "composite_equal": composite,
            });
            let mut pass = composite;
            let mut summary = format!("factors through a graph with {} vertices", r.target.num_vertices());
            if *search {
                let max_arcs = max_arcs.unwrap_or(r.target.num_arcs());
                let middles = search_factorizations(&phi, bounds(b), max_arcs).map_err(computation)?;
                let hashes: Vec<String> = middles.iter().map(canonical_hash).collect();
                let expected = if r.target.num_arcs() <= max_arcs {
                    vec![canonical_hash(&r.target)]
                } else {
                    Vec::new()
                };
                let unique = hashes == expected;
                pass &= unique;
                summary.push_str(&format!("; {} middle objects found", hashes.len()));
                json["search"] = json!({"max_arcs": max_arcs, "middles": hashes, "unique": unique});
            }
            json["pass"] = json!(pass);
            Ok(verdict(pass, output(json, summary)))
        }
    }
}

fn segal_report(x: &FinitePresheaf) -> Outcome {
    let universe = x.graphs().to_vec();
    let report = segal_check(x, &universe);
    let mut graphs: Vec<Value> = report
        .graphs
        .iter()
        .map(|c| {
            json!({
                "hash": canonical_hash(&c.graph),
                "vertices": c.graph.num_vertices(),
                "values": c.values,
                "limit": c.limit,
                "injective": c.injective,
                "surjective": c.surjective,
                "ok": c.ok,
                "error": c.error,
            })
        })
        .collect();
    graphs.sort_by(|a, b| a["hash"].as_str().cmp(&b["hash"].as_str()));
    let failures = report.failures().count();
    let summary = format!(
        "{} graphs checked, {failures} fail, {} functoriality failures",
        graphs.len(),
        report.functoriality.len()
    );
    verdict(
        report.pass,
        output(
            json!({
                "pass": report.pass,
                "graphs": graphs,
                "functoriality_failures": report.functoriality.len(),
            }),
            summary,
        ),
    )
}

fn nerve_presheaf(species: &str, b: &BoundsArgs, max_valence: usize) -> Result<FinitePresheaf, InputError> {
    nerve_on(species, b, connected_graphs(b.max_vertices, b.max_inner_edges, max_valence))
}

fn nerve_on(species: &str, b: &BoundsArgs, universe: Vec<FeynmanGraph>) -> Result<FinitePresheaf, InputError> {
    let s = read_species(species)?;
    let alg = free_csm(&s, bounds(b)).map_err(computation)?;
    Ok(nerve(&alg, &universe).map_err(computation)?.presheaf)
}

/// Graphs are keyed by canonical hash; isomorphic copies get a suffix.
fn presheaf_document(x: &FinitePresheaf) -> PresheafDocument {
    let mut used = HashSet::new();
    x.to_document(|g: &FeynmanGraph| {
        let base = canonical_hash(g);
        let mut key = base.clone();
        let mut k = 1;
        while !used.insert(key.clone()) {
            key = format!("{base}-{k}");
            k += 1;
        }
        key
    })
}
