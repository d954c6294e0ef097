//! Named example instances and a seeded generator of random ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::netmodel::{parse_instance_with, Edge, EdgeLabel, ModelError, NetworkInstance, NodeId, ParseOptions};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Given with the example itself.
    Stated,
    /// Computed by the exhaustive search and frozen.
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expected {
    pub solvable: bool,
    pub solvable_from: Provenance,
    pub min_rounds: Option<usize>,
    pub min_rounds_from: Option<Provenance>,
    pub notes: &'static str,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub instance: NetworkInstance,
    pub expected: Expected,
}

struct Entry {
    name: &'static str,
    text: &'static str,
    expected: Expected,
}

fn entries() -> [Entry; 5] {
    use Provenance::*;
    [
        Entry {
            name: "fig1_trivial",
            text: include_str!("../../data/fixtures/fig1_trivial.json"),
            expected: Expected {
                solvable: true,
                solvable_from: Stated,
                min_rounds: Some(2),
                min_rounds_from: Some(Search),
                notes: "D must be updated before A; C -> B is kept by both configurations",
            },
        },
        Entry {
            name: "fig2_double_diamond",
            text: include_str!("../../data/fixtures/fig2_double_diamond.json"),
            expected: Expected {
                solvable: false,
                solvable_from: Stated,
                min_rounds: None,
                min_rounds_from: None,
                notes: "only the cut-off D can move; no order of the rest stays consistent",
            },
        },
        Entry {
            name: "fig4_removable_dd",
            text: include_str!("../../data/fixtures/fig4_removable_dd.json"),
            expected: Expected {
                solvable: true,
                solvable_from: Stated,
                min_rounds: Some(4),
                min_rounds_from: Some(Stated),
                notes: "detours through L and M break the double diamond; E -> G, H -> J, M -> K are kept",
            },
        },
        Entry {
            name: "fig5_wait_example",
            text: include_str!("../../data/fixtures/fig5_wait_example.json"),
            expected: Expected {
                solvable: true,
                solvable_from: Stated,
                min_rounds: Some(3),
                min_rounds_from: Some(Search),
                notes: "A, then B, then C, each separated by a wait; X* nodes are sinks",
            },
        },
        Entry {
            name: "fig6_multi_source",
            text: include_str!("../../data/fixtures/fig6_multi_source.json"),
            expected: Expected {
                solvable: true,
                solvable_from: Search,
                min_rounds: Some(1),
                min_rounds_from: Some(Search),
                notes: "three sources joined under a synthetic master; all sources switch in one round",
            },
        },
    ]
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{name}`; known: {known}", known = fixture_names().join(", "))]
    Unknown { name: String },
    #[error("fixture `{name}` is malformed: {source}")]
    Malformed { name: String, source: ModelError },
}

pub fn fixture_names() -> Vec<&'static str> {
    entries().iter().map(|e| e.name).collect()
}

/// Raw instance file of a fixture.
pub fn fixture_text(name: &str) -> Result<&'static str, FixtureError> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.text)
        .ok_or_else(|| FixtureError::Unknown { name: name.to_owned() })
}

pub fn fixture(name: &str) -> Result<Fixture, FixtureError> {
    let entry = entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| FixtureError::Unknown { name: name.to_owned() })?;
    let opts = ParseOptions {
        reduce_multi_source: true,
    };
    let instance = parse_instance_with(entry.text, opts).map_err(|source| FixtureError::Malformed {
        name: name.to_owned(),
        source,
    })?;
    Ok(Fixture {
        name: entry.name,
        instance,
        expected: entry.expected,
    })
}

pub fn all_fixtures() -> Vec<Fixture> {
    fixture_names()
        .into_iter()
        .map(|n| fixture(n).expect("bundled fixtures parse"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    /// Initial and final configurations sampled from independent orders.
    Independent,
    /// The final configuration copies the initial one except for `rewire`
    /// nodes whose out-edges are sampled afresh.
    Perturb { rewire: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub nodes: usize,
    pub density: f64,
    pub seed: u64,
    pub mode: GenMode,
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("density must lie in (0, 1], got {0}")]
    Density(f64),
    #[error("cannot rewire {rewire} of {nodes} nodes")]
    Rewire { rewire: usize, nodes: usize },
}

/// Independent-mode instance; see [`generate`].
pub fn generate_random(nodes: usize, density: f64, seed: u64) -> Result<NetworkInstance, GenError> {
    generate(GenParams {
        nodes,
        density,
        seed,
        mode: GenMode::Independent,
    })
}

/// Node names: `H1` for the source, then `N01`, `N02`, ...
fn node_names(n: usize) -> Vec<NodeId> {
    let width = (n - 1).to_string().len().max(2);
    std::iter::once(NodeId::from("H1"))
        .chain((1..n).map(|i| NodeId::new(format!("N{i:0width$}"))))
        .collect()
}

/// Source first, the rest shuffled.
fn order(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = (1..n).collect();
    rest.shuffle(rng);
    std::iter::once(0).chain(rest).collect()
}

/// Forward edges of `order` leaving position `i`, each kept with
/// probability `density`.
fn sample_out(rng: &mut ChaCha8Rng, order: &[usize], i: usize, density: f64, out: &mut Vec<(usize, usize)>) {
    for &v in &order[i + 1..] {
        if rng.gen_bool(density) {
            out.push((order[i], v));
        }
    }
}

/// Random instance whose configurations are both proper by construction:
/// each follows a topological order that starts at the source.
/// Deterministic for a given parameter set.
pub fn generate(params: GenParams) -> Result<NetworkInstance, GenError> {
    let GenParams {
        nodes: n,
        density,
        seed,
        mode,
    } = params;
    if n < 2 {
        return Err(GenError::TooFewNodes(n));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(GenError::Density(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut initial = Vec::new();
    let mut fin = Vec::new();
    match mode {
        GenMode::Independent => {
            let oi = order(&mut rng, n);
            let of = order(&mut rng, n);
            for i in 0..n {
                sample_out(&mut rng, &oi, i, density, &mut initial);
            }
            for i in 0..n {
                sample_out(&mut rng, &of, i, density, &mut fin);
            }
        }
        GenMode::Perturb { rewire } => {
            if rewire > n {
                return Err(GenError::Rewire { rewire, nodes: n });
            }
            let o = order(&mut rng, n);
            for i in 0..n {
                sample_out(&mut rng, &o, i, density, &mut initial);
            }
            let mut positions: Vec<usize> = (0..n).collect();
            positions.shuffle(&mut rng);
            let mut moved = vec![false; n];
            for &p in &positions[..rewire] {
                moved[o[p]] = true;
            }
            fin.extend(initial.iter().copied().filter(|&(u, _)| !moved[u]));
            for p in 0..n {
                if moved[o[p]] {
                    sample_out(&mut rng, &o, p, density, &mut fin);
                }
            }
        }
    }
    initial.sort_unstable();
    fin.sort_unstable();
    let names = node_names(n);
    let mut edges = Vec::new();
    let (mut a, mut b) = (initial.iter().peekable(), fin.iter().peekable());
    loop {
        let (pair, label) = match (a.peek(), b.peek()) {
            (Some(&&x), Some(&&y)) if x == y => {
                a.next();
                b.next();
                (x, EdgeLabel::Both)
            }
            (Some(&&x), Some(&&y)) if x < y => {
                a.next();
                (x, EdgeLabel::InitialOnly)
            }
            (Some(&&x), None) => {
                a.next();
                (x, EdgeLabel::InitialOnly)
            }
            (_, Some(&&y)) => {
                b.next();
                (y, EdgeLabel::FinalOnly)
            }
            (None, None) => break,
        };
        edges.push(Edge::new(names[pair.0].clone(), names[pair.1].clone(), label));
    }
    Ok(NetworkInstance::new(names, NodeId::from("H1"), edges).expect("generated configurations are proper"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        for name in fixture_names() {
            let f = fixture(name).unwrap();
            assert_eq!(f.name, name);
        }
        assert!(matches!(fixture("fig3"), Err(FixtureError::Unknown { .. })));
        assert!(!fixture("fig2_double_diamond").unwrap().expected.solvable);
        assert_eq!(fixture("fig4_removable_dd").unwrap().expected.min_rounds, Some(4));
        assert_eq!(fixture("fig1_trivial").unwrap().expected.min_rounds, Some(2));
    }

    #[test]
    fn fig6_has_master() {
        let f = fixture("fig6_multi_source").unwrap();
        let net = &f.instance;
        let m = net.synthetic_source().unwrap();
        assert_eq!(net.out_links(m).len(), 3);
    }

    #[test]
    fn two_node_instances() {
        for seed in 0..20 {
            let net = generate_random(2, 1.0, seed).unwrap();
            assert_eq!(net.node_count(), 2);
            assert!(net.initial().len() <= 1 && net.final_config().len() <= 1);
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let p = GenParams {
            nodes: 12,
            density: 0.3,
            seed: 7,
            mode: GenMode::Perturb { rewire: 3 },
        };
        assert_eq!(generate(p).unwrap(), generate(p).unwrap());
        assert_eq!(generate_random(9, 0.4, 1).unwrap(), generate_random(9, 0.4, 1).unwrap());
        assert!(matches!(generate_random(1, 0.4, 1), Err(GenError::TooFewNodes(1))));
        assert!(matches!(generate_random(5, 0.0, 1), Err(GenError::Density(_))));
        assert!(matches!(generate_random(5, 1.5, 1), Err(GenError::Density(_))));
        assert!(matches!(
            generate(GenParams {
                mode: GenMode::Perturb { rewire: 13 },
                ..p
            }),
            Err(GenError::Rewire { .. })
        ));
    }

    #[test]
    fn ids_are_padded() {
        let net = generate_random(120, 0.05, 3).unwrap();
        assert!(net.node_index(&"N001".into()).is_some());
        assert!(net.node_index(&"N119".into()).is_some());
    }
}
