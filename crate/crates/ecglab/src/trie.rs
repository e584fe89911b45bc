//! Prefix tree over reduced words.
//!
//! Stores a finite subset `S` of `F_d` (typically `H ∩ B_m`) with per-node
//! subtree counts and minimal remaining depths, supporting exact
//! branch-and-bound nearest-point queries `d(x.o, S.o)`.

use crate::subgroup::SubgroupSpec;
use crate::words::{Letter, ReducedWord};
use crate::{EcgError, Result};

/// Default cap on trie nodes (~hundreds of MB of tree at most).
pub const DEFAULT_NODE_CAP: usize = 50_000_000;

const NO_CHILD: u32 = u32::MAX;

/// Prefix tree over reduced words with per-node counts.
pub struct OrbitTrie {
    rank: u32,
    /// children[node * 2d + slot], slot = letter code
    children: Vec<u32>,
    /// number of stored words in the subtree at each node
    counts: Vec<u64>,
    /// minimal extra depth below each node at which a stored word ends
    min_suffix: Vec<u32>,
    /// whether the node itself is a stored word
    terminal: Vec<bool>,
    node_cap: usize,
}

fn slot(l: Letter) -> usize {
    // 1 -> 0, -1 -> 1, 2 -> 2, -2 -> 3, ...
    let idx = (l.unsigned_abs() as usize - 1) * 2;
    if l > 0 {
        idx
    } else {
        idx + 1
    }
}

fn slot_to_letter(s: usize) -> Letter {
    let gen = (s / 2 + 1) as Letter;
    if s.is_multiple_of(2) {
        gen
    } else {
        -gen
    }
}

impl OrbitTrie {
    pub fn new(rank: u32) -> Self {
        Self::with_node_cap(rank, DEFAULT_NODE_CAP)
    }

    pub fn with_node_cap(rank: u32, node_cap: usize) -> Self {
        let mut t = OrbitTrie {
            rank,
            children: Vec::new(),
            counts: Vec::new(),
            min_suffix: Vec::new(),
            terminal: Vec::new(),
            node_cap,
        };
        t.push_node();
        t
    }

    fn push_node(&mut self) -> u32 {
        let id = self.counts.len() as u32;
        self.children
            .resize(self.children.len() + 2 * self.rank as usize, NO_CHILD);
        self.counts.push(0);
        self.min_suffix.push(u32::MAX);
        self.terminal.push(false);
        id
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn node_count(&self) -> usize {
        self.counts.len()
    }

    /// Number of stored words.
    pub fn len(&self) -> u64 {
        self.counts[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn child(&self, node: u32, l: Letter) -> Option<u32> {
        let c = self.children[node as usize * 2 * self.rank as usize + slot(l)];
        (c != NO_CHILD).then_some(c)
    }

    pub fn insert(&mut self, word: &ReducedWord) -> Result<()> {
        if word.rank() != self.rank {
            return Err(EcgError::RankMismatch(word.rank(), self.rank));
        }
        self.insert_letters(word.letters())
    }

    pub fn insert_letters(&mut self, letters: &[Letter]) -> Result<()> {
        let mut node = 0u32;
        let depth = letters.len() as u32;
        self.counts[0] += 1;
        self.min_suffix[0] = self.min_suffix[0].min(depth);
        for (i, &l) in letters.iter().enumerate() {
            let idx = node as usize * 2 * self.rank as usize + slot(l);
            let next = if self.children[idx] == NO_CHILD {
                if self.counts.len() >= self.node_cap {
                    return Err(EcgError::CapExceeded(format!(
                        "orbit trie node cap {} reached",
                        self.node_cap
                    )));
                }
                let id = self.push_node();
                self.children[idx] = id;
                id
            } else {
                self.children[idx]
            };
            node = next;
            self.counts[node as usize] += 1;
            let remaining = depth - (i as u32 + 1);
            self.min_suffix[node as usize] = self.min_suffix[node as usize].min(remaining);
        }
        self.terminal[node as usize] = true;
        Ok(())
    }

    /// Number of stored words extending the given prefix.
    pub fn count_with_prefix(&self, prefix: &[Letter]) -> u64 {
        let mut node = 0u32;
        for &l in prefix {
            match self.child(node, l) {
                Some(c) => node = c,
                None => return 0,
            }
        }
        self.counts[node as usize]
    }

    pub fn contains(&self, word: &ReducedWord) -> bool {
        let mut node = 0u32;
        for &l in word.letters() {
            match self.child(node, l) {
                Some(c) => node = c,
                None => return false,
            }
        }
        self.terminal[node as usize]
    }

    /// Exact `min_{s in S} (|x| + |s| - 2 (x∧s))` by branch and bound.
    ///
    /// Walking down the shared prefix of `x`, the best achievable distance
    /// through a node at depth `t` is `(|x| - t) + min_suffix(t)`; descending
    /// only along `x` itself visits at most `|x| + 1` nodes.
    pub fn distance_to_set(&self, x: &ReducedWord) -> Result<u32> {
        if x.rank() != self.rank {
            return Err(EcgError::RankMismatch(x.rank(), self.rank));
        }
        if self.is_empty() {
            return Err(EcgError::EmptyInput("distance to an empty set".into()));
        }
        let xl = x.letters();
        let mut node = 0u32;
        let mut best = u32::MAX;
        for t in 0..=xl.len() {
            // any stored word whose common prefix with x is exactly >= t
            let bound = (xl.len() - t) as u32 + self.min_suffix[node as usize];
            best = best.min(bound);
            if t == xl.len() {
                break;
            }
            match self.child(node, xl[t]) {
                Some(c) => node = c,
                None => break,
            }
        }
        Ok(best)
    }

    /// Stored words in sorted order, one per line.
    pub fn export_sorted(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut letters: Vec<Letter> = Vec::new();
        self.export_rec(0, &mut letters, &mut out);
        out.sort();
        out
    }

    fn export_rec(&self, node: u32, letters: &mut Vec<Letter>, out: &mut Vec<String>) {
        if self.terminal[node as usize] {
            let w = ReducedWord::from_letters(self.rank, letters).expect("trie stores reduced");
            out.push(w.to_string());
        }
        for s in 0..2 * self.rank as usize {
            let c = self.children[node as usize * 2 * self.rank as usize + s];
            if c != NO_CHILD {
                letters.push(slot_to_letter(s));
                self.export_rec(c, letters, out);
                letters.pop();
            }
        }
    }
}

/// Materializes `H ∩ B_m` as a trie.
pub fn subgroup_ball_elements(spec: &SubgroupSpec, rank: u32, m: u32) -> Result<OrbitTrie> {
    subgroup_ball_elements_capped(spec, rank, m, DEFAULT_NODE_CAP)
}

pub fn subgroup_ball_elements_capped(
    spec: &SubgroupSpec,
    rank: u32,
    m: u32,
    node_cap: usize,
) -> Result<OrbitTrie> {
    spec.validate(rank)?;
    let mut trie = OrbitTrie::with_node_cap(rank, node_cap);
    trie.insert_letters(&[])?; // identity is always a member
    let mut images = vec![spec.identity_image()];
    let mut failure: Option<EcgError> = None;
    crate::words::visit_ball(rank, m as usize, &mut |letters| {
        if failure.is_some() {
            return;
        }
        images.truncate(letters.len());
        let img = spec.step(&images[letters.len() - 1], letters[letters.len() - 1]);
        if spec.is_identity_image(&img) {
            if let Err(e) = trie.insert_letters(letters) {
                failure = Some(e);
            }
        }
        images.push(img);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(trie),
    }
}
