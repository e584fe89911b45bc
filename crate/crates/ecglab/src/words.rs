//! Reduced words in the free group `F_d` and the exact tree geometry built
//! on them: Gromov products, Busemann cocycles and ball enumeration.
//!
//! A letter is a nonzero signed index: `+k` is the k-th generator (1-based),
//! `-k` its inverse.  Words are kept freely reduced at all times, so word
//! length equals the Cayley-graph distance `d(o, g.o)`.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::{EcgError, Result};

/// Signed generator index; `0` is never a valid letter.
pub type Letter = i32;

/// A freely reduced word in `F_d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    rank: u32,
    letters: Vec<Letter>,
}

impl ReducedWord {
    /// The identity element of `F_d`.
    pub fn identity(rank: u32) -> Self {
        assert!(rank >= 1, "rank must be positive");
        ReducedWord {
            rank,
            letters: Vec::new(),
        }
    }

    /// The `i`-th generator (1-based).
    pub fn generator(rank: u32, i: u32) -> Result<Self> {
        if i == 0 || i > rank {
            return Err(EcgError::InvalidWord(format!(
                "generator index {i} out of range 1..={rank}"
            )));
        }
        Ok(ReducedWord {
            rank,
            letters: vec![i as Letter],
        })
    }

    /// Builds a word from letters, requiring that they are already reduced.
    pub fn from_letters(rank: u32, letters: &[Letter]) -> Result<Self> {
        for &l in letters {
            if l == 0 || l.unsigned_abs() > rank {
                return Err(EcgError::InvalidWord(format!(
                    "letter {l} out of range for rank {rank}"
                )));
            }
        }
        for pair in letters.windows(2) {
            if pair[0] == -pair[1] {
                return Err(EcgError::InvalidWord(format!(
                    "adjacent inverse letters {} {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(ReducedWord {
            rank,
            letters: letters.to_vec(),
        })
    }

    /// Reduces an arbitrary letter sequence.
    pub fn reduce(rank: u32, letters: &[Letter]) -> Result<Self> {
        let mut buf: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l.unsigned_abs() > rank {
                return Err(EcgError::InvalidWord(format!(
                    "letter {l} out of range for rank {rank}"
                )));
            }
            if buf.last() == Some(&-l) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Ok(ReducedWord { rank, letters: buf })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Prefix of length `min(k, len)`.
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters[..k.min(self.letters.len())].to_vec(),
        }
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// Freely reduced product `self * other`.
    ///
    /// `|uv| = |u| + |v| - 2c` where `c` is the cancellation length.
    pub fn multiply(&self, other: &ReducedWord) -> Result<ReducedWord> {
        if self.rank != other.rank {
            return Err(EcgError::RankMismatch(self.rank, other.rank));
        }
        let mut buf = self.letters.clone();
        for &l in &other.letters {
            if buf.last() == Some(&-l) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Ok(ReducedWord {
            rank: self.rank,
            letters: buf,
        })
    }

    /// Parses words like `"a b A B"` or `"abAB"` (rank <= 26).
    pub fn parse(rank: u32, s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for ch in s.chars() {
            if ch.is_whitespace() {
                continue;
            }
            let l = match ch {
                'a'..='z' => (ch as u8 - b'a') as Letter + 1,
                'A'..='Z' => -((ch as u8 - b'A') as Letter + 1),
                _ => {
                    return Err(EcgError::InvalidWord(format!("bad letter '{ch}'")));
                }
            };
            letters.push(l);
        }
        Self::from_letters(rank, &letters)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, &l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let idx = l.unsigned_abs() - 1;
            if idx < 26 {
                let ch = if l > 0 {
                    (b'a' + idx as u8) as char
                } else {
                    (b'A' + idx as u8) as char
                };
                write!(f, "{ch}")?;
            } else if l > 0 {
                write!(f, "g{}", l)?;
            } else {
                write!(f, "G{}", -l)?;
            }
        }
        Ok(())
    }
}

/// Gromov product `(|u| + |v| - |u^{-1}v|)/2`: on the tree, the length of
/// the longest common prefix.
pub fn gromov_product(u: &ReducedWord, v: &ReducedWord) -> Result<usize> {
    if u.rank != v.rank {
        return Err(EcgError::RankMismatch(u.rank, v.rank));
    }
    let mut k = 0;
    while k < u.len() && k < v.len() && u.letters[k] == v.letters[k] {
        k += 1;
    }
    Ok(k)
}

/// Busemann cocycle `β_ξ(o, g.o) = 2 (ξ ∧ g) - |g|` on the tree.
///
/// The limsup defining the Busemann function has stabilized once the ray
/// prefix is at least as deep as `|g|`; shorter prefixes are rejected.
pub fn busemann_tree(xi_prefix: &ReducedWord, g: &ReducedWord) -> Result<i64> {
    if xi_prefix.rank != g.rank {
        return Err(EcgError::RankMismatch(xi_prefix.rank, g.rank));
    }
    if xi_prefix.len() < g.len() {
        return Err(EcgError::PrefixTooShort {
            need: g.len(),
            have: xi_prefix.len(),
        });
    }
    let cp = gromov_product(xi_prefix, g)? as i64;
    Ok(2 * cp - g.len() as i64)
}

/// Number of reduced words of length exactly `n`: `2d (2d-1)^{n-1}`.
pub fn sphere_size(rank: u32, n: u32) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let q = BigUint::from(2 * rank as u64 - 1);
    BigUint::from(2 * rank as u64) * q.pow(n - 1)
}

/// Number of reduced words of length at most `n`.
pub fn ball_size(rank: u32, n: u32) -> BigUint {
    (0..=n).map(|k| sphere_size(rank, k)).sum()
}

/// Breadth-first enumeration of the ball `B_n` in `F_d`.
///
/// Words are extended by every letter except the inverse of the last one,
/// which yields each reduced word exactly once with no hashing.
pub fn ball(rank: u32, n: u32) -> Ball {
    let mut queue = VecDeque::new();
    queue.push_back(ReducedWord::identity(rank));
    Ball {
        rank,
        max_len: n as usize,
        queue,
    }
}

pub struct Ball {
    rank: u32,
    max_len: usize,
    queue: VecDeque<ReducedWord>,
}

impl Iterator for Ball {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        let word = self.queue.pop_front()?;
        if word.len() < self.max_len {
            for l in legal_continuations(self.rank, word.last()) {
                let mut letters = word.letters.clone();
                letters.push(l);
                self.queue.push_back(ReducedWord {
                    rank: self.rank,
                    letters,
                });
            }
        }
        Some(word)
    }
}

/// Letters that keep a word reduced when appended after `last`.
pub fn legal_continuations(rank: u32, last: Option<Letter>) -> impl Iterator<Item = Letter> {
    let forbidden = last.map(|l| -l);
    (1..=rank as Letter)
        .flat_map(|i| [i, -i])
        .filter(move |&l| Some(l) != forbidden)
}

/// Depth-first visit of all reduced words of length in `[1, n]`, in-place.
///
/// `f` receives the current word as a letter slice after each push.  Used by
/// the enumeration-heavy internals to avoid allocating one `ReducedWord`
/// per element.
pub(crate) fn visit_ball<F: FnMut(&[Letter])>(rank: u32, n: usize, f: &mut F) {
    let mut stack: Vec<Letter> = Vec::with_capacity(n);
    visit_rec(rank, n, &mut stack, f);
}

fn visit_rec<F: FnMut(&[Letter])>(rank: u32, n: usize, stack: &mut Vec<Letter>, f: &mut F) {
    if stack.len() >= n {
        return;
    }
    let last = stack.last().copied();
    for l in legal_continuations(rank, last) {
        stack.push(l);
        f(stack);
        visit_rec(rank, n, stack, f);
        stack.pop();
    }
}

/// Slope of `log(counts)` against the index over the last half of the range.
pub fn growth_exponent(counts: &[f64]) -> Result<f64> {
    if counts.len() < 4 {
        return Err(EcgError::InvalidParameter(
            "growth exponent needs at least 4 counts".into(),
        ));
    }
    if counts.iter().any(|&c| c <= 0.0) {
        return Err(EcgError::InvalidParameter("counts must be positive".into()));
    }
    let start = counts.len() / 2;
    let xs: Vec<f64> = (start..counts.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = counts[start..].iter().map(|c| c.ln()).collect();
    crate::stats::ls_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(2, s).unwrap()
    }

    #[test]
    fn multiply_cancels_inverses() {
        let a = w("a");
        let a_inv = w("A");
        assert_eq!(a.multiply(&a_inv).unwrap(), ReducedWord::identity(2));
    }

    #[test]
    fn multiply_partial_cancellation() {
        // a b * b^{-1} a = a a
        assert_eq!(w("ab").multiply(&w("Ba")).unwrap(), w("aa"));
    }

    #[test]
    fn multiply_identity_law() {
        let id = ReducedWord::identity(2);
        assert_eq!(w("ab").multiply(&id).unwrap(), w("ab"));
        assert_eq!(id.multiply(&w("ab")).unwrap(), w("ab"));
    }

    #[test]
    fn multiply_rejects_rank_mismatch() {
        let u = ReducedWord::identity(2);
        let v = ReducedWord::identity(3);
        assert!(matches!(u.multiply(&v), Err(EcgError::RankMismatch(2, 3))));
    }

    #[test]
    fn gromov_product_common_prefix() {
        assert_eq!(gromov_product(&w("abab"), &w("abb")).unwrap(), 2);
        assert_eq!(gromov_product(&w("abab"), &w("abab")).unwrap(), 4);
        assert_eq!(gromov_product(&w("a"), &w("A")).unwrap(), 0);
    }

    #[test]
    fn gromov_product_matches_length_formula() {
        let u = w("abaB");
        let v = w("abbA");
        let d = u.inverse().multiply(&v).unwrap().len();
        let cp = gromov_product(&u, &v).unwrap();
        assert_eq!(u.len() + v.len(), 2 * cp + d);
    }

    #[test]
    fn busemann_on_the_ray() {
        let xi = w("abab");
        assert_eq!(busemann_tree(&xi, &w("ab")).unwrap(), 2);
        assert_eq!(busemann_tree(&xi, &ReducedWord::identity(2)).unwrap(), 0);
        assert_eq!(busemann_tree(&xi, &w("aB")).unwrap(), 0);
    }

    #[test]
    fn busemann_requires_deep_prefix() {
        let xi = w("a");
        assert!(matches!(
            busemann_tree(&xi, &w("ab")),
            Err(EcgError::PrefixTooShort { need: 2, have: 1 })
        ));
    }

    #[test]
    fn ball_counts_match_closed_form() {
        assert_eq!(ball(2, 0).count(), 1);
        assert_eq!(ball(2, 1).count(), 5);
        assert_eq!(ball(2, 3).count(), 53);
        for n in 0..=10u32 {
            let expected = 2u64 * 3u64.pow(n) - 1;
            assert_eq!(ball_size(2, n), BigUint::from(expected));
        }
        assert_eq!(ball(3, 2).count() as u64, 1 + 6 + 30);
    }

    #[test]
    fn ball_emits_each_element_once() {
        let words: Vec<_> = ball(2, 4).collect();
        let set: std::collections::HashSet<_> = words.iter().cloned().collect();
        assert_eq!(words.len(), set.len());
        assert_eq!(BigUint::from(words.len() as u64), ball_size(2, 4));
    }

    #[test]
    fn visit_ball_agrees_with_iterator() {
        let mut n = 0u64;
        visit_ball(2, 5, &mut |_| n += 1);
        // visit_ball skips the identity
        assert_eq!(n + 1, ball(2, 5).count() as u64);
    }

    #[test]
    fn growth_exponent_free_group() {
        let counts: Vec<f64> = (1..=20u32)
            .map(|n| 2.0 * 3f64.powi(n as i32) - 1.0)
            .collect();
        let v = growth_exponent(&counts).unwrap();
        assert!((v - 3f64.ln()).abs() < 0.01, "v = {v}");
    }

    #[test]
    fn growth_exponent_edge_cases() {
        assert!((growth_exponent(&[7.0; 10]).unwrap()).abs() < 1e-12);
        assert!(growth_exponent(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let u = w("abAB");
        assert_eq!(u.to_string(), "a b A B");
        assert_eq!(ReducedWord::parse(2, &u.to_string()).unwrap(), u);
    }

    proptest! {
        #[test]
        fn free_reduction_is_associative(
            xs in proptest::collection::vec(-2i32..=2, 0..12),
            ys in proptest::collection::vec(-2i32..=2, 0..12),
            zs in proptest::collection::vec(-2i32..=2, 0..12),
        ) {
            let clean = |v: Vec<i32>| v.into_iter().filter(|&l| l != 0).collect::<Vec<_>>();
            let u = ReducedWord::reduce(2, &clean(xs)).unwrap();
            let v = ReducedWord::reduce(2, &clean(ys)).unwrap();
            let t = ReducedWord::reduce(2, &clean(zs)).unwrap();
            let left = u.multiply(&v).unwrap().multiply(&t).unwrap();
            let right = u.multiply(&v.multiply(&t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn busemann_bounded_by_length(
            xs in proptest::collection::vec(-2i32..=2, 0..8),
        ) {
            let g = ReducedWord::reduce(2, &xs.into_iter().filter(|&l| l != 0).collect::<Vec<_>>()).unwrap();
            // extend g to a ray deep enough, then perturb the tail
            let mut letters = g.letters().to_vec();
            while letters.len() < g.len() + 4 {
                let next = legal_continuations(2, letters.last().copied()).next().unwrap();
                letters.push(next);
            }
            let xi = ReducedWord::from_letters(2, &letters).unwrap();
            let b = busemann_tree(&xi, &g).unwrap();
            prop_assert!(b <= g.len() as i64);
            prop_assert_eq!(b == g.len() as i64, gromov_product(&xi, &g).unwrap() == g.len());
        }
    }
}
