//! Shared test support: an independent SHA-256, brute-force oracles for
//! query evaluation / access control / view materialization, random case
//! generators, and fixture-backed gateway builders. Everything here stays
//! independent of the code paths it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use viewgate_core::gateway::{Clock, Config, Gateway};
use viewgate_core::ledger::{AccessControlState, Privilege, PrivilegeAction};
use viewgate_core::query::{Filter, FilterOp, Projection, Query};
use viewgate_core::rdf::{Slot, Term, Triple, TriplePattern};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------------------
// Independent SHA-256 (FIPS 180-4), used to cross-check every fingerprint,
// tx id, and data hash produced through the sha2 crate.
// ---------------------------------------------------------------------------

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

pub fn ref_sha256(message: &[u8]) -> [u8; 32] {
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab,
        0x5be0cd19,
    ];
    let bit_len = (message.len() as u64).wrapping_mul(8);
    let mut padded = message.to_vec();
    padded.push(0x80);
    while padded.len() % 64 != 56 {
        padded.push(0);
    }
    padded.extend_from_slice(&bit_len.to_be_bytes());

    for chunk in padded.chunks_exact(64) {
        let mut w = [0u32; 64];
        for (i, word) in chunk.chunks_exact(4).enumerate() {
            w[i] = u32::from_be_bytes([word[0], word[1], word[2], word[3]]);
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16]
                .wrapping_add(s0)
                .wrapping_add(w[i - 7])
                .wrapping_add(s1);
        }
        let (mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh) =
            (h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]);
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ ((!e) & g);
            let t1 = hh
                .wrapping_add(s1)
                .wrapping_add(ch)
                .wrapping_add(K[i])
                .wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        h[0] = h[0].wrapping_add(a);
        h[1] = h[1].wrapping_add(b);
        h[2] = h[2].wrapping_add(c);
        h[3] = h[3].wrapping_add(d);
        h[4] = h[4].wrapping_add(e);
        h[5] = h[5].wrapping_add(f);
        h[6] = h[6].wrapping_add(g);
        h[7] = h[7].wrapping_add(hh);
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[i * 4..i * 4 + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

pub fn ref_sha256_hex(message: &[u8]) -> String {
    ref_sha256(message)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force query oracle: enumerate every assignment of the query's
// variables over a term universe and keep the ones where each grounded
// pattern is a triple of the store and every filter holds.
// ---------------------------------------------------------------------------

fn slot_matches(slot: &Slot, term: &Term, assignment: &BTreeMap<String, Term>) -> bool {
    match slot {
        Slot::Term(t) => t == term,
        Slot::Var(v) => assignment.get(v).expect("assignment is total") == term,
    }
}

fn pattern_holds(
    pattern: &TriplePattern,
    triples: &BTreeSet<Triple>,
    assignment: &BTreeMap<String, Term>,
) -> bool {
    triples.iter().any(|t| {
        slot_matches(&pattern.subject, &t.subject, assignment)
            && slot_matches(&pattern.predicate, &t.predicate, assignment)
            && slot_matches(&pattern.object, &t.object, assignment)
    })
}

fn filter_holds(filter: &Filter, assignment: &BTreeMap<String, Term>) -> bool {
    let bound = assignment.get(&filter.var).expect("filter var in scope");
    match filter.op {
        FilterOp::Eq => *bound == filter.value,
        FilterOp::Ne => *bound != filter.value,
    }
}

/// All projected rows, as a set, by exhaustive assignment enumeration.
pub fn oracle_evaluate(
    query: &Query,
    triples: &BTreeSet<Triple>,
    universe: &[Term],
) -> BTreeSet<Vec<Term>> {
    let vars = query.bgp_vars();
    let projected: Vec<String> = match &query.projection {
        Projection::All => vars.clone(),
        Projection::Vars(vs) => vs.clone(),
    };
    let mut rows = BTreeSet::new();
    let mut assignment: BTreeMap<String, Term> = BTreeMap::new();
    enumerate(query, triples, universe, &vars, 0, &mut assignment, &projected, &mut rows);
    rows
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    query: &Query,
    triples: &BTreeSet<Triple>,
    universe: &[Term],
    vars: &[String],
    depth: usize,
    assignment: &mut BTreeMap<String, Term>,
    projected: &[String],
    rows: &mut BTreeSet<Vec<Term>>,
) {
    if depth == vars.len() {
        let holds = query
            .bgp
            .iter()
            .all(|p| pattern_holds(p, triples, assignment))
            && query.filters.iter().all(|f| filter_holds(f, assignment));
        if holds {
            rows.insert(
                projected
                    .iter()
                    .map(|v| assignment[v].clone())
                    .collect(),
            );
        }
        return;
    }
    for term in universe {
        assignment.insert(vars[depth].clone(), term.clone());
        enumerate(query, triples, universe, vars, depth + 1, assignment, projected, rows);
    }
    assignment.remove(&vars[depth]);
}

// ---------------------------------------------------------------------------
// Random stores and queries over a small vocabulary (10 terms, 4 variables).
// ---------------------------------------------------------------------------

pub struct CaseGen {
    pub rng: StdRng,
    pub universe: Vec<Term>,
}

impl CaseGen {
    pub fn new(seed: u64) -> CaseGen {
        let mut universe: Vec<Term> = Vec::new();
        for i in 0..6 {
            universe.push(Term::iri(format!("urn:v:i{i}")).unwrap());
        }
        universe.push(Term::blank("b0").unwrap());
        universe.push(Term::blank("b1").unwrap());
        universe.push(Term::literal("lit0"));
        universe.push(Term::literal_lang("lit1", "en"));
        CaseGen {
            rng: StdRng::seed_from_u64(seed),
            universe,
        }
    }

    fn pick(&mut self) -> Term {
        let i = self.rng.random_range(0..self.universe.len());
        self.universe[i].clone()
    }

    /// Up to `max` random well-formed triples over the vocabulary.
    pub fn store(&mut self, max: usize) -> BTreeSet<Triple> {
        let n = self.rng.random_range(0..=max);
        let mut triples = BTreeSet::new();
        let mut attempts = 0;
        while triples.len() < n && attempts < n * 4 + 16 {
            attempts += 1;
            let (s, p, o) = (self.pick(), self.pick(), self.pick());
            if let Ok(t) = Triple::new(s, p, o) {
                triples.insert(t);
            }
        }
        triples
    }

    fn slot(&mut self) -> Slot {
        if self.rng.random_bool(0.45) {
            Slot::Term(self.pick())
        } else {
            let names = ["a", "b", "c", "d"];
            Slot::Var(names[self.rng.random_range(0..names.len())].to_string())
        }
    }

    /// A random query: 1..=max_patterns patterns, optional filters,
    /// sometimes `*`, sometimes an explicit projection.
    pub fn query(&mut self, max_patterns: usize) -> Query {
        let n = self.rng.random_range(1..=max_patterns);
        let mut bgp = Vec::new();
        for _ in 0..n {
            bgp.push(TriplePattern::new(self.slot(), self.slot(), self.slot()));
        }
        // make sure at least one variable exists so projections are non-trivial
        if bgp.iter().all(|p| p.vars().is_empty()) {
            bgp[0].subject = Slot::Var("a".to_string());
        }
        let vars: Vec<String> = {
            let mut seen = Vec::new();
            for p in &bgp {
                for v in p.vars() {
                    if !seen.contains(&v.to_string()) {
                        seen.push(v.to_string());
                    }
                }
            }
            seen
        };
        let projection = if self.rng.random_bool(0.4) {
            Projection::All
        } else {
            let keep = self.rng.random_range(1..=vars.len());
            Projection::Vars(vars.iter().take(keep).cloned().collect())
        };
        let mut filters = Vec::new();
        if self.rng.random_bool(0.3) {
            let var = vars[self.rng.random_range(0..vars.len())].clone();
            let op = if self.rng.random_bool(0.5) {
                FilterOp::Eq
            } else {
                FilterOp::Ne
            };
            filters.push(Filter {
                var,
                op,
                value: self.pick(),
            });
        }
        Query {
            distinct: true,
            projection,
            bgp,
            filters,
        }
    }
}

/// Load a triple set into a fresh indexed graph.
pub fn graph_of(id: &str, triples: &BTreeSet<Triple>) -> viewgate_core::rdf::Graph {
    let mut g = viewgate_core::rdf::Graph::new(id);
    for t in triples {
        g.insert(t.clone());
    }
    g
}

// ---------------------------------------------------------------------------
// Access-control oracle: exhaustive scan over (roles x privileges).
// ---------------------------------------------------------------------------

pub fn oracle_check_access(state: &AccessControlState, user: &str, requested: &Privilege) -> bool {
    if state.super_users.contains(user) {
        return true;
    }
    let mut roles: BTreeSet<&String> = BTreeSet::new();
    roles.extend(state.role_members.keys());
    roles.extend(state.role_privileges.keys());
    for role in roles {
        let privileges = match state.role_privileges.get(role) {
            Some(p) => p,
            None => continue,
        };
        for privilege in privileges {
            let matches = privilege.action == requested.action
                && privilege.resource == requested.resource;
            let member = state
                .role_members
                .get(role)
                .is_some_and(|m| m.contains(user));
            if matches && member {
                return true;
            }
        }
    }
    false
}

pub fn all_actions() -> [PrivilegeAction; 3] {
    [
        PrivilegeAction::Read,
        PrivilegeAction::Write,
        PrivilegeAction::Delegate,
    ]
}

// ---------------------------------------------------------------------------
// Fixture-backed gateways in a temp directory.
// ---------------------------------------------------------------------------

pub const FIXTURE_NT: &str = include_str!("../../fixtures/arabidopsis.nt");
pub const FIXTURE_VIEWS: &str = include_str!("../../fixtures/views.vg");

pub const ADMIN_TOKEN: &str = "0123456789abcdef0123456789abcdef";
pub const ALICE_TOKEN: &str = "aaaa1111bbbb2222cccc3333dddd4444";
pub const BOB_TOKEN: &str = "eeee5555ffff6666aaaa7777bbbb8888";

/// Write config + fixture data into `dir` and return the parsed Config.
pub fn fixture_config(dir: &Path, flush_size: usize) -> Config {
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    std::fs::write(data.join("arabidopsis.nt"), FIXTURE_NT).unwrap();
    std::fs::write(data.join("views.vg"), FIXTURE_VIEWS).unwrap();
    let config = serde_json::json!({
        "graphs": { "arabidopsis": "data/arabidopsis.nt" },
        "views": "data/views.vg",
        "chain": "run/chain.log",
        "credentials": {
            "admin": ADMIN_TOKEN,
            "alice": ALICE_TOKEN,
            "bob": BOB_TOKEN,
        },
        "super_users": ["admin"],
        "block_flush_size": flush_size,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    Config::load(&path).unwrap()
}

/// Deterministic clock: monotonically increasing seconds from 1_000_000.
pub fn test_clock() -> Clock {
    use std::sync::atomic::{AtomicU64, Ordering};
    let counter = std::sync::Arc::new(AtomicU64::new(1_000_000));
    std::sync::Arc::new(move || counter.fetch_add(1, Ordering::SeqCst))
}

pub fn fixture_gateway(dir: &Path, flush_size: usize) -> Gateway {
    let config = fixture_config(dir, flush_size);
    Gateway::open_with_clock(config, test_clock()).unwrap()
}

/// Reopen a gateway over the same directory (restart simulation).
pub fn reopen_gateway(dir: &Path) -> Gateway {
    let config = Config::load(&dir.join("config.json")).unwrap();
    Gateway::open_with_clock(config, test_clock()).unwrap()
}

pub fn fixture_ns(local: &str) -> String {
    format!("http://example.org/arabidopsis#{local}")
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

pub fn config_path(dir: &Path) -> PathBuf {
    dir.join("config.json")
}
