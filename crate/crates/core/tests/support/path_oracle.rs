//! Random ontologies of up to twelve classes and exhaustive simple-path
//! enumeration over them.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;

use ontoquery_core::pathfind::{find_paths, EdgeIndex, Hop, PathConfig};
use ontoquery_core::OntologyInfo;
use ontoquery_rdf::{parse_turtle, Iri};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn class(i: usize) -> String {
    format!("http://r/C{i}")
}

/// (start class, hops as (subject, predicate, object) indices)
pub type PathSet = BTreeSet<(usize, Vec<(usize, usize, usize)>)>;

pub struct World {
    pub n: usize,
    /// (sub, super), sub always has the larger index
    subclass: Vec<(usize, usize)>,
    /// (predicate, domain, range)
    properties: Vec<(usize, usize, usize)>,
}

impl World {
    pub fn random(seed: u64) -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=12);
        let mut subclass = Vec::new();
        for sub in 1..n {
            if rng.random_bool(0.2) {
                subclass.push((sub, rng.random_range(0..sub)));
            }
        }
        let properties = (0..rng.random_range(0..=(n + 4)))
            .map(|p| (p, rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        World { n, subclass, properties }
    }

    pub fn turtle(&self) -> String {
        let mut t = String::from(
            "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n",
        );
        for i in 0..self.n {
            writeln!(t, "<{}> a owl:Class .", class(i)).unwrap();
        }
        for (s, p) in &self.subclass {
            writeln!(t, "<{}> rdfs:subClassOf <{}> .", class(*s), class(*p)).unwrap();
        }
        for (p, d, r) in &self.properties {
            writeln!(
                t,
                "<http://r/p{p}> a owl:ObjectProperty ; rdfs:domain <{}> ; rdfs:range <{}> .",
                class(*d),
                class(*r)
            )
            .unwrap();
        }
        t
    }

    fn descendants(&self, c: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([c]);
        loop {
            let before = out.len();
            for (s, p) in &self.subclass {
                if out.contains(p) {
                    out.insert(*s);
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }

    /// (subject, predicate, object) edges with both ends widened to
    /// subclasses, self-loops dropped.
    fn edges(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for (p, d, r) in &self.properties {
            for s in self.descendants(*d) {
                for o in self.descendants(*r) {
                    if s != o {
                        out.insert((s, *p, o));
                    }
                }
            }
        }
        out
    }

    /// Every simple path from an anchor to `target` of at most `max` hops.
    pub fn all_paths(&self, target: usize, anchors: &[usize], max: usize) -> PathSet {
        let edges = self.edges();
        let mut out = BTreeSet::new();
        fn dfs(
            edges: &BTreeSet<(usize, usize, usize)>,
            target: usize,
            max: usize,
            start: usize,
            visited: &mut Vec<usize>,
            hops: &mut Vec<(usize, usize, usize)>,
            out: &mut PathSet,
        ) {
            let cur = *visited.last().unwrap();
            if cur == target {
                out.insert((start, hops.clone()));
                return;
            }
            if hops.len() == max {
                return;
            }
            for &e in edges {
                let next = match e {
                    (s, _, o) if s == cur => o,
                    (s, _, o) if o == cur => s,
                    _ => continue,
                };
                if visited.contains(&next) {
                    continue;
                }
                visited.push(next);
                hops.push(e);
                dfs(edges, target, max, start, visited, hops, out);
                hops.pop();
                visited.pop();
            }
        }
        for &a in anchors {
            dfs(&edges, target, max, a, &mut vec![a], &mut Vec::new(), &mut out);
        }
        out
    }
}

pub fn index_of(iri: &Iri) -> usize {
    iri.as_str().trim_start_matches("http://r/C").trim_start_matches("http://r/p").parse().unwrap()
}

pub fn run(world: &World, target: usize, anchors: &[usize], cfg: &PathConfig) -> PathSet {
    let o = OntologyInfo::load_from_graph(&parse_turtle(&world.turtle(), None).unwrap(), "^http://r/").unwrap();
    let index = EdgeIndex::build(&o);
    let anchors: Vec<Iri> = anchors.iter().map(|a| Iri::new(class(*a)).unwrap()).collect();
    let paths = find_paths(&index, &Iri::new(class(target)).unwrap(), &anchors, cfg).unwrap();
    let lens: Vec<usize> = paths.iter().map(|p| p.len()).collect();
    assert!(lens.windows(2).all(|w| w[0] <= w[1]), "paths not ranked by length");
    for p in &paths {
        assert!(p.hops.iter().all(|h| index.contains(h)));
        assert_eq!(index_of(&p.end_class()), target);
    }
    paths
        .iter()
        .map(|p| {
            let hops = p
                .hops
                .iter()
                .map(|Hop { subject, predicate, object }| (index_of(subject), index_of(predicate), index_of(object)))
                .collect();
            (index_of(&p.start_class), hops)
        })
        .collect()
}

pub fn pick(seed: u64, n: usize) -> (usize, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let target = rng.random_range(0..n);
    let anchors = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..n)).collect();
    (target, anchors)
}

pub const MAX: usize = 6;

/// Search with slack `m` against enumeration filtered to the shortest
/// length plus `m`.
pub fn check_world(seed: u64, m: usize) -> Result<(), String> {
    let world = World::random(seed);
    let (target, anchors) = pick(seed, world.n);
    let cfg = PathConfig { max_length: MAX, extra_depth_m: m, ..PathConfig::default() };
    let everything = world.all_paths(target, &anchors, MAX);
    let expected: BTreeSet<_> = match everything.iter().map(|(_, h)| h.len()).min() {
        Some(d) => everything.into_iter().filter(|(_, h)| h.len() <= d + m).collect(),
        None => BTreeSet::new(),
    };
    let got = run(&world, target, &anchors, &cfg);
    if got == expected {
        Ok(())
    } else {
        Err(format!("seed {seed}, m {m}: got {} paths, expected {}", got.len(), expected.len()))
    }
}
