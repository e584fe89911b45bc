//! Homomorphism-kernel subgroups of `F_d` and their exact orbit counting.
//!
//! Two kernel families are supported: kernels of homomorphisms to `Z^k`
//! (given by a weight vector per generator) and kernels of homomorphisms to
//! the free product `Z/2 * Z/3` (given by an image per generator, reduced in
//! normal form).  Membership is decided by evaluating the homomorphism.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::words::{legal_continuations, sphere_size, Letter, ReducedWord};
use crate::{EcgError, Result};

/// Default letter-length cap for brute-force `Z/2 * Z/3` kernel counting.
pub const C2C3_BRUTE_CAP: u32 = 16;

/// Syllable of a normal-form word in `Z/2 * Z/3 = <x | x^2> * <y | y^3>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Syllable {
    X,
    Y,
    Y2,
}

/// Element of `Z/2 * Z/3` in normal form (syllables alternate between the
/// `x` letter and a nontrivial power of `y`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct C2c3 {
    syllables: Vec<Syllable>,
}

impl C2c3 {
    pub fn identity() -> Self {
        C2c3::default()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllable_len(&self) -> usize {
        self.syllables.len()
    }

    /// Parses products of `x` and `y`, e.g. `"x"`, `"y"`, `"yy"`, `"xy"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = C2c3::identity();
        for ch in s.chars() {
            match ch {
                'x' => out = out.mul_syllable(Syllable::X),
                'y' => out = out.mul_syllable(Syllable::Y),
                'e' | ' ' => {}
                _ => {
                    return Err(EcgError::InvalidParameter(format!(
                        "bad Z/2*Z/3 letter '{ch}' (use x, y, e)"
                    )))
                }
            }
        }
        Ok(out)
    }

    fn mul_syllable(&self, s: Syllable) -> C2c3 {
        let mut syl = self.syllables.clone();
        match (syl.last().copied(), s) {
            (Some(Syllable::X), Syllable::X) => {
                syl.pop();
            }
            (Some(Syllable::Y), Syllable::Y) => {
                syl.pop();
                syl.push(Syllable::Y2);
            }
            (Some(Syllable::Y2), Syllable::Y) | (Some(Syllable::Y), Syllable::Y2) => {
                syl.pop();
            }
            (Some(Syllable::Y2), Syllable::Y2) => {
                syl.pop();
                syl.push(Syllable::Y);
            }
            _ => syl.push(s),
        }
        C2c3 { syllables: syl }
    }

    pub fn mul(&self, other: &C2c3) -> C2c3 {
        let mut acc = self.clone();
        for &s in &other.syllables {
            acc = acc.mul_syllable(s);
        }
        acc
    }

    pub fn inverse(&self) -> C2c3 {
        let mut out = C2c3::identity();
        for &s in self.syllables.iter().rev() {
            let inv = match s {
                Syllable::X => Syllable::X,
                Syllable::Y => Syllable::Y2,
                Syllable::Y2 => Syllable::Y,
            };
            out.syllables.push(inv);
        }
        out
    }
}

impl fmt::Display for C2c3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "e");
        }
        for s in &self.syllables {
            match s {
                Syllable::X => write!(f, "x")?,
                Syllable::Y => write!(f, "y")?,
                Syllable::Y2 => write!(f, "yy")?,
            }
        }
        Ok(())
    }
}

/// Which subgroup of `F_d` is being studied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// The whole group.
    FullGroup,
    /// Kernel of `F_d -> Z^k`; `weights[i]` is the image of generator `i+1`.
    KernelToZk { weights: Vec<Vec<i64>> },
    /// Kernel of `F_d -> Z/2 * Z/3`; `images[i]` is the image of generator `i+1`.
    KernelToC2C3 { images: Vec<C2c3> },
}

/// Image of a word under the defining homomorphism, used as a DP state key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Image {
    Unit,
    Zk(Vec<i64>),
    C2c3(C2c3),
}

impl SubgroupSpec {
    /// Kernel of `F_2 -> Z` sending `a -> 1`, `b -> 0`; the standard example
    /// of an infinite normal subgroup of infinite index with amenable
    /// quotient.
    pub fn zk_exponent_kernel() -> Self {
        SubgroupSpec::KernelToZk {
            weights: vec![vec![1], vec![0]],
        }
    }

    /// Kernel of the standard surjection `F_2 -> Z/2 * Z/3` with `a -> x`,
    /// `b -> y` (non-amenable quotient).
    pub fn c2c3_standard_kernel() -> Self {
        SubgroupSpec::KernelToC2C3 {
            images: vec![C2c3::parse("x").unwrap(), C2c3::parse("y").unwrap()],
        }
    }

    /// Checks the generator data against the ambient rank.
    pub fn validate(&self, rank: u32) -> Result<()> {
        let arity = match self {
            SubgroupSpec::FullGroup => return Ok(()),
            SubgroupSpec::KernelToZk { weights } => {
                if let Some(k) = weights.first().map(|w| w.len()) {
                    if k == 0 || weights.iter().any(|w| w.len() != k) {
                        return Err(EcgError::InvalidParameter(
                            "Z^k weights must be nonempty and equally sized".into(),
                        ));
                    }
                }
                weights.len()
            }
            SubgroupSpec::KernelToC2C3 { images } => images.len(),
        };
        if arity != rank as usize {
            return Err(EcgError::InvalidParameter(format!(
                "subgroup data has {arity} generators, group has {rank}"
            )));
        }
        Ok(())
    }

    pub fn identity_image(&self) -> Image {
        match self {
            SubgroupSpec::FullGroup => Image::Unit,
            SubgroupSpec::KernelToZk { weights } => {
                Image::Zk(vec![0; weights.first().map_or(1, |w| w.len())])
            }
            SubgroupSpec::KernelToC2C3 { .. } => Image::C2c3(C2c3::identity()),
        }
    }

    /// Image after appending letter `l` to a word of image `img`.
    pub fn step(&self, img: &Image, l: Letter) -> Image {
        let idx = (l.unsigned_abs() - 1) as usize;
        match (self, img) {
            (SubgroupSpec::FullGroup, Image::Unit) => Image::Unit,
            (SubgroupSpec::KernelToZk { weights }, Image::Zk(v)) => {
                let mut v = v.clone();
                for (c, w) in v.iter_mut().zip(&weights[idx]) {
                    *c += if l > 0 { *w } else { -*w };
                }
                Image::Zk(v)
            }
            (SubgroupSpec::KernelToC2C3 { images }, Image::C2c3(g)) => {
                let step = if l > 0 {
                    images[idx].clone()
                } else {
                    images[idx].inverse()
                };
                Image::C2c3(g.mul(&step))
            }
            _ => unreachable!("image kind does not match spec"),
        }
    }

    pub fn image_of(&self, w: &ReducedWord) -> Image {
        let mut img = self.identity_image();
        for &l in w.letters() {
            img = self.step(&img, l);
        }
        img
    }

    pub fn is_identity_image(&self, img: &Image) -> bool {
        match img {
            Image::Unit => true,
            Image::Zk(v) => v.iter().all(|&c| c == 0),
            Image::C2c3(g) => g.is_identity(),
        }
    }

    /// Membership test `w in H`.
    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.is_identity_image(&self.image_of(w))
    }

    /// Cheap lower bound on the number of letters still needed to bring the
    /// image back to the identity.  Sound for pruning enumeration.
    pub fn min_letters_to_identity(&self, img: &Image) -> usize {
        match img {
            Image::Unit => 0,
            Image::Zk(v) => {
                let maxw = self.max_weight_magnitude().max(1);
                let linf = v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
                linf.div_ceil(maxw as u64) as usize
            }
            Image::C2c3(g) => {
                let per = self.max_image_syllables().max(1);
                g.syllable_len().div_ceil(per)
            }
        }
    }

    fn max_weight_magnitude(&self) -> i64 {
        match self {
            SubgroupSpec::KernelToZk { weights } => weights
                .iter()
                .flat_map(|w| w.iter().map(|c| c.abs()))
                .max()
                .unwrap_or(0),
            _ => 0,
        }
    }

    fn max_image_syllables(&self) -> usize {
        match self {
            SubgroupSpec::KernelToC2C3 { images } => {
                images.iter().map(|g| g.syllable_len()).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Exact count of `{h in H : |h| <= m}` (the growth function
    /// `V_H(1,1,m)` of the subgroup acting on the Cayley graph of `F_d`).
    ///
    /// `Z^k` kernels use dynamic programming over
    /// `(length, clamped image vector, last letter)`; `Z/2 * Z/3` kernels are
    /// counted by a pruned brute-force walk capped at `C2C3_BRUTE_CAP`.
    pub fn ball_count(&self, rank: u32, m: u32) -> Result<BigUint> {
        self.validate(rank)?;
        match self {
            SubgroupSpec::FullGroup => Ok(crate::words::ball_size(rank, m)),
            SubgroupSpec::KernelToZk { .. } => Ok(self.ball_count_zk_dp(rank, m)),
            SubgroupSpec::KernelToC2C3 { .. } => {
                if m > C2C3_BRUTE_CAP {
                    return Err(EcgError::CapExceeded(format!(
                        "Z/2*Z/3 kernel counting capped at m = {C2C3_BRUTE_CAP}, got {m}"
                    )));
                }
                Ok(self.ball_count_brute(rank, m))
            }
        }
    }

    fn ball_count_zk_dp(&self, rank: u32, m: u32) -> BigUint {
        // States outside the clamp |coordinate| <= m * max|weight| are
        // unreachable by words of length <= m.
        let mut layer: HashMap<(Image, Letter), BigUint> = HashMap::new();
        layer.insert((self.identity_image(), 0), BigUint::one());
        let mut total = BigUint::one();
        for _ in 1..=m {
            let mut next: HashMap<(Image, Letter), BigUint> = HashMap::new();
            for ((img, last), count) in &layer {
                let last_opt = if *last == 0 { None } else { Some(*last) };
                for l in legal_continuations(rank, last_opt) {
                    let img2 = self.step(img, l);
                    *next.entry((img2, l)).or_insert_with(BigUint::zero) += count;
                }
            }
            for ((img, _), count) in &next {
                if self.is_identity_image(img) {
                    total += count;
                }
            }
            layer = next;
        }
        total
    }

    /// Brute-force count by depth-first enumeration with a soundness-only
    /// prune; oracle for the DP path.
    pub fn ball_count_brute(&self, rank: u32, m: u32) -> BigUint {
        let mut count = BigUint::one();
        let mut images: Vec<Image> = vec![self.identity_image()];
        crate::words::visit_ball(rank, m as usize, &mut |letters| {
            images.truncate(letters.len());
            let img = self.step(&images[letters.len() - 1], letters[letters.len() - 1]);
            if self.is_identity_image(&img) {
                count += BigUint::one();
            }
            images.push(img);
        });
        count
    }
}

/// Parses a subgroup spec from a compact string:
/// `full`, `zk:1,0` (one weight vector per generator, `;`-separated
/// components for k > 1, e.g. `zk:1,0;0,1`), or `c2c3:x,y`.
impl std::str::FromStr for SubgroupSpec {
    type Err = EcgError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(SubgroupSpec::FullGroup);
        }
        if let Some(rest) = s.strip_prefix("zk:") {
            let weights: Vec<Vec<i64>> = rest
                .split(';')
                .map(|gen| {
                    gen.split(',')
                        .map(|c| {
                            c.trim().parse::<i64>().map_err(|_| {
                                EcgError::Config(format!("bad Z^k weight '{c}' in '{s}'"))
                            })
                        })
                        .collect::<Result<Vec<i64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            // 'zk:1,0' means one component per generator: generators a,b
            // with weights 1 and 0.  'zk:1,0;0,1' means two components.
            let weights = if weights.len() == 1 && weights[0].len() > 1 {
                weights[0].iter().map(|&w| vec![w]).collect()
            } else {
                weights
            };
            return Ok(SubgroupSpec::KernelToZk { weights });
        }
        if let Some(rest) = s.strip_prefix("c2c3:") {
            let images = rest
                .split(',')
                .map(|t| C2c3::parse(t.trim()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(SubgroupSpec::KernelToC2C3 { images });
        }
        Err(EcgError::Config(format!(
            "unknown subgroup spec '{s}' (expected full, zk:..., c2c3:...)"
        )))
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupSpec::FullGroup => write!(f, "full"),
            SubgroupSpec::KernelToZk { weights } => {
                write!(f, "zk:")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    for (j, c) in w.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
            SubgroupSpec::KernelToC2C3 { images } => {
                write!(f, "c2c3:")?;
                for (i, g) in images.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

/// Exact minimal extension lengths to re-enter the subgroup.
///
/// `dist(img, last)` is the length of the shortest reduced word `e` whose
/// first letter is not `last^{-1}` and whose image is `img^{-1}` — i.e. the
/// minimal number of letters needed to extend a prefix with image `img` and
/// final letter `last` into an element of `H`.  Built once per `(spec, n)`
/// by breadth-first search from the identity layer; shared read-only
/// afterwards.
pub struct CompletionTable {
    spec: SubgroupSpec,
    dist: HashMap<(Image, Letter), u32>,
    radius: u32,
}

impl CompletionTable {
    pub fn build(spec: &SubgroupSpec, rank: u32, radius: u32) -> Result<Self> {
        spec.validate(rank)?;
        let mut dist: HashMap<(Image, Letter), u32> = HashMap::new();
        let mut queue: VecDeque<(Image, Letter)> = VecDeque::new();
        let zero = spec.identity_image();
        // Reverse BFS from the target layer: every last-letter state (0
        // stands for "no letter yet") already at the identity image needs
        // no extension.
        let mut seed_letters: Vec<Letter> = vec![0];
        seed_letters.extend((1..=rank as Letter).flat_map(|i| [i, -i]));
        for &l in &seed_letters {
            dist.insert((zero.clone(), l), 0);
            queue.push_back((zero.clone(), l));
        }
        while let Some((img, c)) = queue.pop_front() {
            let d = dist[&(img.clone(), c)];
            if d >= radius || c == 0 {
                continue;
            }
            // A state (img', last) reaches (img, c) by appending c, allowed
            // whenever c != last^{-1}; img' = img with the step undone.
            let prev = spec.step(&img, -c);
            if spec.min_letters_to_identity(&prev) > radius as usize {
                continue;
            }
            for &last in &seed_letters {
                if last != 0 && c == -last {
                    continue;
                }
                let key = (prev.clone(), last);
                if !dist.contains_key(&key) {
                    dist.insert(key.clone(), d + 1);
                    queue.push_back(key);
                }
            }
        }
        Ok(CompletionTable {
            spec: spec.clone(),
            dist,
            radius,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn spec(&self) -> &SubgroupSpec {
        &self.spec
    }

    /// Minimal extension length from `(img, last)`, if within the radius.
    pub fn min_extension(&self, img: &Image, last: Letter) -> Option<u32> {
        self.dist.get(&(img.clone(), last)).copied()
    }

    /// `d(x.o, (H ∩ B_r).o)` on the tree: the minimum over prefix depths `t`
    /// of `(|x| - t) + ext(t)` where `ext(t)` is the shortest completion of
    /// the depth-`t` prefix into an element of length at most `r`.
    pub fn distance_to_subgroup_ball(&self, x: &[Letter], r: u32) -> u32 {
        let mut img = self.spec.identity_image();
        // t = 0 term: the identity is always available.
        let mut best = x.len() as u32;
        for (t, &l) in x.iter().enumerate() {
            img = self.spec.step(&img, l);
            let t = (t + 1) as u32;
            if let Some(ext) = self.min_extension(&img, l) {
                if t + ext <= r {
                    best = best.min((x.len() as u32 - t) + ext);
                }
            }
        }
        best
    }

    /// `max_{h in H ∩ B_n} (2 (ξ∧h) - |h|)` for a boundary prefix of depth
    /// at least `n`; the maximizing `h` shares a prefix of depth `t` with ξ
    /// and exits with the shortest completion.
    pub fn max_busemann(&self, xi_prefix: &[Letter], n: u32) -> Result<i64> {
        if (xi_prefix.len() as u32) < n {
            return Err(EcgError::PrefixTooShort {
                need: n as usize,
                have: xi_prefix.len(),
            });
        }
        let mut img = self.spec.identity_image();
        let mut best: i64 = 0; // t = 0: the identity gives 2*0 - 0 = 0
        for t in 1..=n {
            let l = xi_prefix[(t - 1) as usize];
            img = self.spec.step(&img, l);
            if let Some(ext) = self.min_extension(&img, l) {
                if t + ext <= n {
                    best = best.max(t as i64 - ext as i64);
                }
            }
        }
        Ok(best)
    }
}

/// Fraction of the radius-`r` sphere within tree distance `C` of the orbit
/// `(H ∩ B_r).o`, as an exact rational.
pub fn shell_mass(spec: &SubgroupSpec, rank: u32, r: u32, c: u32) -> Result<Ratio<BigUint>> {
    if r < 1 {
        return Err(EcgError::InvalidParameter("shell mass needs r >= 1".into()));
    }
    let cap = 14;
    if r > cap {
        return Err(EcgError::CapExceeded(format!(
            "shell mass enumeration capped at r = {cap}"
        )));
    }
    if matches!(spec, SubgroupSpec::FullGroup) {
        // every sphere vertex is an orbit point
        return Ok(Ratio::one());
    }
    if c >= r {
        // the identity is within distance r <= C of every sphere vertex
        return Ok(Ratio::one());
    }
    let table = CompletionTable::build(spec, rank, r)?;
    let mut hits: u64 = 0;
    let mut total: u64 = 0;
    crate::words::visit_ball(rank, r as usize, &mut |letters| {
        if letters.len() == r as usize {
            total += 1;
            if table.distance_to_subgroup_ball(letters, r) <= c {
                hits += 1;
            }
        }
    });
    debug_assert_eq!(BigUint::from(total), sphere_size(rank, r));
    Ok(Ratio::new(BigUint::from(hits), BigUint::from(total)))
}

/// `shell_mass` as a double, for consumers without big-rational arithmetic.
pub fn shell_mass_f64(spec: &SubgroupSpec, rank: u32, r: u32, c: u32) -> Result<f64> {
    use num_traits::ToPrimitive;
    let mass = shell_mass(spec, rank, r, c)?;
    Ok(mass.numer().to_f64().unwrap_or(f64::NAN) / mass.denom().to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn zk() -> SubgroupSpec {
        SubgroupSpec::zk_exponent_kernel()
    }

    #[test]
    fn c2c3_normal_form() {
        let x = C2c3::parse("x").unwrap();
        let y = C2c3::parse("y").unwrap();
        assert!(x.mul(&x).is_identity());
        assert!(y.mul(&y).mul(&y).is_identity());
        assert_eq!(y.mul(&y), C2c3::parse("yy").unwrap());
        let xy = x.mul(&y);
        assert!(xy.mul(&xy.inverse()).is_identity());
        assert_eq!(xy.to_string(), "xy");
    }

    #[test]
    fn membership_by_homomorphism() {
        let h = zk();
        assert!(h.contains(&ReducedWord::identity(2)));
        assert!(h.contains(&ReducedWord::parse(2, "b").unwrap()));
        assert!(h.contains(&ReducedWord::parse(2, "abA").unwrap()));
        assert!(!h.contains(&ReducedWord::parse(2, "a").unwrap()));
        assert!(!h.contains(&ReducedWord::parse(2, "aab").unwrap()));
    }

    #[test]
    fn zk_ball_counts_small() {
        let h = zk();
        assert_eq!(h.ball_count(2, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(h.ball_count(2, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(h.ball_count(2, 3).unwrap(), BigUint::from(11u32));
    }

    #[test]
    fn full_group_count_equals_ball_size() {
        for m in 0..=6u32 {
            assert_eq!(
                SubgroupSpec::FullGroup.ball_count(2, m).unwrap(),
                crate::words::ball_size(2, m)
            );
        }
    }

    #[test]
    fn dp_matches_brute_force_up_to_8() {
        let h = zk();
        for m in 0..=8u32 {
            assert_eq!(
                h.ball_count(2, m).unwrap(),
                h.ball_count_brute(2, m),
                "m = {m}"
            );
        }
        let k = SubgroupSpec::c2c3_standard_kernel();
        for m in 0..=8u32 {
            assert_eq!(
                k.ball_count(2, m).unwrap(),
                k.ball_count_brute(2, m),
                "m = {m}"
            );
        }
    }

    #[test]
    fn counting_is_rank_generic() {
        // F_3 with a rank-2 image: kernel of (a,b,c) -> ((1,0), (0,1), (0,0))
        let h = SubgroupSpec::KernelToZk {
            weights: vec![vec![1, 0], vec![0, 1], vec![0, 0]],
        };
        assert!(h.validate(3).is_ok());
        assert!(h.validate(2).is_err());
        for m in 0..=5u32 {
            assert_eq!(
                h.ball_count(3, m).unwrap(),
                h.ball_count_brute(3, m),
                "m = {m}"
            );
        }
        // m = 1: only c and c^{-1} have trivial image
        assert_eq!(h.ball_count(3, 1).unwrap(), BigUint::from(3u32));
        let table = CompletionTable::build(&h, 3, 6).unwrap();
        let x = ReducedWord::parse(3, "ab").unwrap();
        // shortest return to the kernel from ab is B A (2 letters)
        assert_eq!(
            table.min_extension(&h.image_of(&x), x.last().unwrap()),
            Some(2)
        );
    }

    #[test]
    fn c2c3_cap_is_enforced() {
        let k = SubgroupSpec::c2c3_standard_kernel();
        assert!(matches!(
            k.ball_count(2, C2C3_BRUTE_CAP + 1),
            Err(EcgError::CapExceeded(_))
        ));
    }

    #[test]
    fn growth_ratio_is_eventually_non_increasing() {
        let h = zk();
        let ratios: Vec<f64> = (1..=24u32)
            .map(|m| {
                let v = h.ball_count(2, m).unwrap();
                v.to_f64().unwrap() / 3f64.powi(m as i32)
            })
            .collect();
        for m in 5..ratios.len() {
            assert!(
                ratios[m] <= ratios[m - 1] + 1e-12,
                "ratio increased at m = {}",
                m + 1
            );
        }
    }

    #[test]
    fn completion_table_matches_brute_minimum() {
        // ext(img(p), last(p)) must equal the shortest reduced extension of p
        // landing in H, by exhaustive search over prefixes and extensions.
        let h = zk();
        let table = CompletionTable::build(&h, 2, 8).unwrap();
        let mut prefixes: Vec<ReducedWord> = vec![ReducedWord::identity(2)];
        prefixes.extend(crate::words::ball(2, 3).filter(|w| !w.is_identity()));
        for p in &prefixes {
            let by_table = table
                .min_extension(&h.image_of(p), p.last().unwrap_or(0))
                .expect("within radius");
            // brute force: shortest e with p*e in H and e a legal extension
            let mut best: Option<u32> = if h.contains(p) { Some(0) } else { None };
            crate::words::visit_ball(2, 8, &mut |letters| {
                if let (Some(first), Some(last)) = (letters.first(), p.last()) {
                    if *first == -last {
                        return;
                    }
                }
                let ext = ReducedWord::from_letters(2, letters).unwrap();
                let full = p.multiply(&ext).unwrap();
                if full.len() == p.len() + ext.len()
                    && h.contains(&full)
                    && best.is_none_or(|b| (ext.len() as u32) < b)
                {
                    best = Some(ext.len() as u32);
                }
            });
            assert_eq!(Some(by_table), best, "prefix {p}");
        }
    }

    #[test]
    fn shell_mass_trivial_cases() {
        assert_eq!(
            shell_mass(&SubgroupSpec::FullGroup, 2, 5, 0).unwrap(),
            Ratio::one()
        );
        assert_eq!(shell_mass(&zk(), 2, 4, 4).unwrap(), Ratio::one());
        assert_eq!(shell_mass(&zk(), 2, 4, 7).unwrap(), Ratio::one());
    }

    #[test]
    fn shell_mass_c0_counts_sphere_members() {
        // at C = 0 the mass is the fraction of sphere words lying in H
        let h = zk();
        for r in 2..=8u32 {
            let mass = shell_mass(&h, 2, r, 0).unwrap();
            let mut members = 0u64;
            let mut total = 0u64;
            crate::words::visit_ball(2, r as usize, &mut |letters| {
                if letters.len() == r as usize {
                    total += 1;
                    let w = ReducedWord::from_letters(2, letters).unwrap();
                    if h.contains(&w) {
                        members += 1;
                    }
                }
            });
            assert_eq!(
                mass,
                Ratio::new(BigUint::from(members), BigUint::from(total))
            );
        }
    }

    #[test]
    fn shell_mass_c0_decreases_for_zk_kernel() {
        // transient parity effects die out by r = 4; from there the fraction
        // of sphere words with zero exponent decays (the 1/sqrt(r) law)
        let h = zk();
        let masses: Vec<f64> = (4..=10u32)
            .map(|r| {
                let m = shell_mass(&h, 2, r, 0).unwrap();
                m.numer().to_f64().unwrap() / m.denom().to_f64().unwrap()
            })
            .collect();
        for w in masses.windows(2) {
            assert!(
                w[1] < w[0],
                "sphere membership fraction must decay from r = 4"
            );
        }
        // frozen values from the exact letter-walk recursion
        assert!((masses[0] - 22.0 / 108.0).abs() < 1e-12);
        assert!((masses[6] - 9634.0 / 78732.0).abs() < 1e-12);
    }

    #[test]
    fn spec_roundtrip_parse_display() {
        for s in ["full", "zk:1,0", "zk:1,0;0,1", "c2c3:x,y"] {
            let spec: SubgroupSpec = s.parse().unwrap();
            let again: SubgroupSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        assert!("nope:1".parse::<SubgroupSpec>().is_err());
    }
}
