//! Triple-file ingestion, vocabulary construction, inverse-relation
//! augmentation, the filtered-candidate index, and structural diagnostics.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};

/// One (head, relation, tail) fact with dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub head: u32,
    pub rel: u32,
    pub tail: u32,
}

/// Name <-> dense id bijection with lexicographic id assignment.
#[derive(Debug, Clone)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Builds a vocab from a name set; ids follow the sorted order so they
    /// are stable across runs and machines.
    pub fn from_names(names: impl IntoIterator<Item = String>) -> Self {
        let mut names: Vec<String> =
            names.into_iter().collect::<HashSet<_>>().into_iter().collect();
        names.sort();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Self { names, index }
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// FNV-1a over the names in id order; used to pair checkpoints with the
    /// dataset they were trained on.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for name in &self.names {
            for b in name.as_bytes() {
                h ^= *b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
            h ^= b'\n' as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// Raw string triples of one split file.
pub type RawTriples = Vec<(String, String, String)>;

/// Parses one triple file: UTF-8, one `head TAB relation TAB tail` per
/// nonempty line, exactly two tab separators.
pub fn read_triple_file(path: &Path) -> Result<RawTriples> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!(
                    "expected head<TAB>relation<TAB>tail, got {} fields",
                    fields.len()
                ),
            });
        }
        out.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(out)
}

/// Maps raw triples through existing vocabularies; any unseen token is a
/// hard error (no unseen-entity handling in evaluation splits).
pub fn resolve_triples(
    raw: &RawTriples,
    entities: &Vocab,
    relations: &Vocab,
    split: &str,
) -> Result<Vec<Triple>> {
    raw.iter()
        .map(|(h, r, t)| {
            let head = entities
                .id(h)
                .ok_or_else(|| Error::Vocab(format!("{split}: unknown entity '{h}'")))?;
            let rel = relations
                .id(r)
                .ok_or_else(|| Error::Vocab(format!("{split}: unknown relation '{r}'")))?;
            let tail = entities
                .id(t)
                .ok_or_else(|| Error::Vocab(format!("{split}: unknown entity '{t}'")))?;
            Ok(Triple { head, rel, tail })
        })
        .collect()
}

/// A loaded benchmark: id-resolved splits, vocabularies, and the filtered
/// evaluation index. The training list carries the inverse augmentation
/// (`(t, r + |R|, h)` for every `(h, r, t)`); evaluation splits keep the
/// original direction and are queried under the inverse id at rank time.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    pub entities: Vocab,
    pub relations: Vocab,
    pub n_base_relations: usize,
    filter: HashMap<(u32, u32), HashSet<u32>>,
}

impl Dataset {
    /// Builds a dataset from raw string triples. Vocabularies span all three
    /// splits so the loader reproduces the published entity counts even when
    /// an evaluation split mentions an entity absent from train.
    pub fn from_raw(train: RawTriples, valid: RawTriples, test: RawTriples) -> Result<Self> {
        let entity_names = train
            .iter()
            .chain(&valid)
            .chain(&test)
            .flat_map(|(h, _, t)| [h.clone(), t.clone()]);
        let entities = Vocab::from_names(entity_names);
        let base_names: HashSet<String> = train
            .iter()
            .chain(&valid)
            .chain(&test)
            .map(|(_, r, _)| r.clone())
            .collect();
        let n_base = base_names.len();

        let mut sorted_base: Vec<String> = base_names.into_iter().collect();
        sorted_base.sort();
        // Inverse relations take ids j + |R|, named after their base relation.
        let mut all_names = sorted_base.clone();
        for name in &sorted_base {
            let inv = format!("{name}^-1");
            if all_names.contains(&inv) {
                return Err(Error::Vocab(format!(
                    "relation name '{inv}' collides with the inverse-relation naming scheme"
                )));
            }
            all_names.push(inv);
        }
        let relations = Vocab {
            index: all_names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), i as u32))
                .collect(),
            names: all_names,
        };

        let mut train = resolve_triples(&train, &entities, &relations, "train")?;
        let valid = resolve_triples(&valid, &entities, &relations, "valid")?;
        let test = resolve_triples(&test, &entities, &relations, "test")?;

        // Augment training with the inverse direction.
        let originals = train.clone();
        for t in &originals {
            train.push(Triple {
                head: t.tail,
                rel: t.rel + n_base as u32,
                tail: t.head,
            });
        }

        // Filter index over all splits, both directions.
        let mut filter: HashMap<(u32, u32), HashSet<u32>> = HashMap::new();
        for t in originals.iter().chain(&valid).chain(&test) {
            filter.entry((t.head, t.rel)).or_default().insert(t.tail);
            filter
                .entry((t.tail, t.rel + n_base as u32))
                .or_default()
                .insert(t.head);
        }

        Ok(Self {
            train,
            valid,
            test,
            entities,
            relations,
            n_base_relations: n_base,
            filter,
        })
    }

    /// Loads `train`, `valid`, and `test` files (plain or `.txt`) from a
    /// dataset directory.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("dataset directory not found: {}", dir.display()),
            )));
        }
        let find = |stem: &str| -> Result<PathBuf> {
            let plain = dir.join(stem);
            if plain.is_file() {
                return Ok(plain);
            }
            let txt = dir.join(format!("{stem}.txt"));
            if txt.is_file() {
                return Ok(txt);
            }
            Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("missing split file '{stem}' in {}", dir.display()),
            )))
        };
        let train = read_triple_file(&find("train")?)?;
        let valid = read_triple_file(&find("valid")?)?;
        let test = read_triple_file(&find("test")?)?;
        Self::from_raw(train, valid, test)
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    /// Relation count including inverses (`2 |R|`).
    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    /// Total fact count across the original (unaugmented) splits.
    pub fn n_facts(&self) -> usize {
        self.train.len() / 2 + self.valid.len() + self.test.len()
    }

    /// The inverse id of a relation (maps base to inverse and back).
    pub fn inverse_relation(&self, rel: u32) -> u32 {
        let k = self.n_base_relations as u32;
        if rel < k {
            rel + k
        } else {
            rel - k
        }
    }

    /// All known-true tails for a `(head, relation)` query, across splits
    /// and directions.
    pub fn filter_tails(&self, head: u32, rel: u32) -> Option<&HashSet<u32>> {
        self.filter.get(&(head, rel))
    }

    /// Original-direction triples of one base relation across all splits;
    /// input to the hierarchy diagnostics.
    pub fn relation_edges(&self, rel: u32) -> Vec<(u32, u32)> {
        let originals = &self.train[..self.train.len() / 2];
        originals
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .filter(|t| t.rel == rel)
            .map(|t| (t.head, t.tail))
            .collect()
    }

    /// Per-relation (name, Khs, edge count) diagnostic rows for the base
    /// relations, in id order.
    pub fn khs_table(&self) -> Result<Vec<(String, f64, usize)>> {
        (0..self.n_base_relations as u32)
            .map(|r| {
                let edges = self.relation_edges(r);
                let khs = khs_score(&edges)?;
                Ok((self.relations.name(r).to_string(), khs, edges.len()))
            })
            .collect()
    }
}

/// Krackhardt hierarchy score of a directed edge set: the fraction of
/// ordered reachable pairs `(i, j)`, `i != j`, whose reverse is unreachable.
/// 1 for strict hierarchies, 0 when every reachable pair is symmetric.
pub fn khs_score(edges: &[(u32, u32)]) -> Result<f64> {
    if edges.is_empty() {
        return Err(Error::Domain("khs_score needs a nonempty edge set".into()));
    }

    // Dense-relabel the nodes of this subgraph.
    let mut ids: HashMap<u32, usize> = HashMap::new();
    for &(h, t) in edges {
        let next = ids.len();
        ids.entry(h).or_insert(next);
        let next = ids.len();
        ids.entry(t).or_insert(next);
    }
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(h, t) in edges {
        adj[ids[&h]].push(ids[&t]);
    }

    // Reachable ordered pairs via a sweep from each node; `seen` is stamped
    // with the start id so it never needs clearing.
    let mut reachable_pairs: u64 = 0;
    let mut seen = vec![u32::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..n {
        stack.clear();
        stack.extend(&adj[start]);
        while let Some(v) = stack.pop() {
            if seen[v] == start as u32 {
                continue;
            }
            seen[v] = start as u32;
            if v != start {
                reachable_pairs += 1;
            }
            stack.extend(&adj[v]);
        }
    }

    // Mutually reachable pairs are exactly the intra-SCC ordered pairs.
    let mutual_pairs: u64 = scc_sizes(&adj)
        .into_iter()
        .map(|s| (s as u64) * (s as u64 - 1))
        .sum();

    if reachable_pairs == 0 {
        // Only self-loops; no off-diagonal pairs to grade.
        return Ok(0.0);
    }
    Ok((reachable_pairs - mutual_pairs) as f64 / reachable_pairs as f64)
}

/// Strongly connected component sizes (iterative Kosaraju).
fn scc_sizes(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        visited[start] = true;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let next = adj[v][*idx];
                *idx += 1;
                if !visited[next] {
                    visited[next] = true;
                    stack.push((next, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut radj = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }

    let mut sizes = Vec::new();
    let mut assigned = vec![false; n];
    for &start in order.iter().rev() {
        if assigned[start] {
            continue;
        }
        let mut size = 0;
        let mut stack = vec![start];
        assigned[start] = true;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in &radj[v] {
                if !assigned[w] {
                    assigned[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Draws `k` candidate tails uniformly with replacement from `[0, n_entities)`.
/// Accidental true tails are not excluded.
pub fn negative_sample(k: usize, n_entities: usize, rng: &mut impl Rng) -> Result<Vec<u32>> {
    if k == 0 {
        return Err(Error::Config("negative sample count must be >= 1".into()));
    }
    if n_entities == 0 {
        return Err(Error::Config(
            "cannot sample from an empty vocabulary".into(),
        ));
    }
    Ok((0..k)
        .map(|_| rng.random_range(0..n_entities as u32))
        .collect())
}
