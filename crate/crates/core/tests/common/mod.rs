//! Shared fixtures: the synthetic tree benchmark used by the learning and
//! diagnostics tests.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A 3-ary tree of depth 5 (121 nodes) with its full transitive closure as a
/// single hypernym-style relation: one (descendant, up, ancestor) triple per
/// proper ancestor pair, split 90/5/5.
pub struct ToyTree {
    pub train: Vec<(String, String, String)>,
    pub valid: Vec<(String, String, String)>,
    pub test: Vec<(String, String, String)>,
}

pub const TOY_RELATION: &str = "up";

pub fn toy_tree(seed: u64) -> ToyTree {
    let nodes = 121usize; // 1 + 3 + 9 + 27 + 81
    let mut closure = Vec::new();
    for child in 1..nodes {
        let mut anc = child;
        while anc != 0 {
            anc = (anc - 1) / 3;
            closure.push((
                format!("n{child:03}"),
                TOY_RELATION.to_string(),
                format!("n{anc:03}"),
            ));
        }
    }
    assert_eq!(closure.len(), 426);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    closure.shuffle(&mut rng);
    let n_train = closure.len() * 90 / 100;
    let n_valid = closure.len() * 5 / 100;
    let valid = closure.split_off(n_train + n_valid);
    let mid = closure.split_off(n_train);
    ToyTree {
        train: closure,
        valid: mid,
        test: valid,
    }
}

pub fn write_split(path: &Path, triples: &[(String, String, String)]) {
    let text: String = triples
        .iter()
        .map(|(h, r, t)| format!("{h}\t{r}\t{t}\n"))
        .collect();
    fs::write(path, text).unwrap();
}

pub fn write_toy_tree(dir: &Path, seed: u64) -> ToyTree {
    let tree = toy_tree(seed);
    write_split(&dir.join("train"), &tree.train);
    write_split(&dir.join("valid"), &tree.valid);
    write_split(&dir.join("test"), &tree.test);
    tree
}
