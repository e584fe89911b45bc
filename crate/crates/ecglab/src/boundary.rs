//! Boundary measure models and the canonical Radon-Nikodym derivative
//! evaluator, with exact cylinder arithmetic on the tree boundary.
//!
//! Conventions.  All conformal-density models use
//! `D_g(ξ) = dμ_{g.o}/dμ_o(ξ) = exp(v β_ξ(o, g.o))` with
//! `β_ξ(p,q) = limsup_{z→ξ} (d(p,z) - d(q,z))`, where `μ_{g.o} = g_*μ` and
//! `(g_*μ)(A) = μ(g^{-1}A)`.  Under this convention mass concentrates toward
//! ξ and the chain rule reads
//!
//! `D_{gh}(ξ) = D_g(ξ) · D_h(g^{-1} ξ)`,
//!
//! the boundary shift being `φ_g(x) = g^{-1}·x`.  The Lebesgue model of the
//! half-plane worked example instead uses the forward fractional-linear
//! action, whose chain rule shifts the other factor:
//! `D_{gh}(ξ) = D_g(h·ξ) · D_h(ξ)`.  `cocycle_check` tests each model
//! against its own identity; the residual is exactly zero on trees.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mobius::{self, CirclePoint, UnimodularMatrix};
use crate::subgroup::SubgroupSpec;
use crate::words::{self, gromov_product, Letter, ReducedWord};
use crate::{EcgError, Result};

/// Critical exponent of `F_d` with the word metric: `log(2d-1)`.
pub fn tree_dimension(rank: u32) -> f64 {
    ((2 * rank - 1) as f64).ln()
}

/// A group element of whichever model is in play.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Word(ReducedWord),
    Matrix(UnimodularMatrix),
}

impl GroupElement {
    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Word(w) => GroupElement::Word(w.inverse()),
            GroupElement::Matrix(m) => GroupElement::Matrix(m.inverse()),
        }
    }

    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Word(u), GroupElement::Word(v)) => {
                Ok(GroupElement::Word(u.multiply(v)?))
            }
            (GroupElement::Matrix(g), GroupElement::Matrix(h)) => {
                Ok(GroupElement::Matrix(g.mul(h)))
            }
            _ => Err(EcgError::InvalidParameter("mixed group elements".into())),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Word(w) => w.is_identity(),
            GroupElement::Matrix(m) => *m == UnimodularMatrix::identity(),
        }
    }

    /// `d(o, g.o)` in the model's metric.
    pub fn radius(&self) -> f64 {
        match self {
            GroupElement::Word(w) => w.len() as f64,
            GroupElement::Matrix(m) => m.dist_to_base(),
        }
    }
}

/// A boundary point: a lazily extendable ray prefix on the tree, or a circle
/// point.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum BoundaryPoint {
    Tree(TreeRay),
    Circle(CirclePoint),
}

impl BoundaryPoint {
    pub fn tree_prefix(&self) -> Result<&TreeRay> {
        match self {
            BoundaryPoint::Tree(r) => Ok(r),
            _ => Err(EcgError::InvalidParameter(
                "expected a tree boundary point".into(),
            )),
        }
    }

    pub fn circle(&self) -> Result<CirclePoint> {
        match self {
            BoundaryPoint::Circle(c) => Ok(*c),
            _ => Err(EcgError::InvalidParameter(
                "expected a circle boundary point".into(),
            )),
        }
    }
}

/// A tree boundary point materialized as a finite prefix that can be grown
/// on demand; letters beyond the initial prefix are drawn uniformly over the
/// legal continuations from the ray's private stream.
#[derive(Debug, Clone)]
pub struct TreeRay {
    rank: u32,
    letters: Vec<Letter>,
    stream: ChaCha8Rng,
}

impl TreeRay {
    pub fn new(rank: u32, prefix: Vec<Letter>, stream: ChaCha8Rng) -> Self {
        TreeRay {
            rank,
            letters: prefix,
            stream,
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn prefix_word(&self, k: usize) -> Result<ReducedWord> {
        if self.letters.len() < k {
            return Err(EcgError::PrefixTooShort {
                need: k,
                have: self.letters.len(),
            });
        }
        ReducedWord::from_letters(self.rank, &self.letters[..k])
    }

    /// Uniform extension: the first letter over `2d` choices, later letters
    /// over the `2d-1` legal continuations.
    pub fn ensure_depth(&mut self, k: usize) {
        while self.letters.len() < k {
            let opts: Vec<Letter> =
                words::legal_continuations(self.rank, self.letters.last().copied()).collect();
            let pick = self.stream.gen_range(0..opts.len());
            self.letters.push(opts[pick]);
        }
    }
}

/// Which Radon-Nikodym model is evaluated.
#[derive(Debug, Clone)]
pub enum RnEvaluator {
    /// `F_d` with the uniform boundary measure, `v = log(2d-1)`.
    TreeFull { rank: u32 },
    /// Subgroup `H <= F_d`; `v` is the subgroup's dimension.
    TreeSubgroup {
        rank: u32,
        spec: SubgroupSpec,
        v: f64,
    },
    /// `PSL(2,Z)` with the harmonic (Cauchy) density at `i`; `v = 1`.
    CircleHarmonic,
    /// The Lebesgue-reference worked example `1/(c xi + d)^2`.
    CircleLebesgue,
}

impl RnEvaluator {
    pub fn dimension(&self) -> f64 {
        match self {
            RnEvaluator::TreeFull { rank } => tree_dimension(*rank),
            RnEvaluator::TreeSubgroup { v, .. } => *v,
            RnEvaluator::CircleHarmonic | RnEvaluator::CircleLebesgue => 1.0,
        }
    }

    /// `dμ_{g.o}/dμ_o(ξ)` (for the Lebesgue model, the worked-example form).
    pub fn rn_derivative(&self, g: &GroupElement, xi: &BoundaryPoint) -> Result<f64> {
        match self {
            RnEvaluator::TreeFull { .. } | RnEvaluator::TreeSubgroup { .. } => {
                let b = self.tree_busemann(g, xi)?;
                Ok((self.dimension() * b as f64).exp())
            }
            RnEvaluator::CircleHarmonic => match g {
                GroupElement::Matrix(m) => mobius::poisson_ratio(m, xi.circle()?),
                _ => Err(EcgError::InvalidParameter(
                    "circle model needs matrices".into(),
                )),
            },
            RnEvaluator::CircleLebesgue => match g {
                GroupElement::Matrix(m) => mobius::rn_lebesgue(m, xi.circle()?),
                _ => Err(EcgError::InvalidParameter(
                    "circle model needs matrices".into(),
                )),
            },
        }
    }

    /// Integer Busemann value on trees, exact.
    fn tree_busemann(&self, g: &GroupElement, xi: &BoundaryPoint) -> Result<i64> {
        let word = match g {
            GroupElement::Word(w) => w,
            _ => return Err(EcgError::InvalidParameter("tree model needs words".into())),
        };
        let ray = xi.tree_prefix()?;
        let prefix = ray.prefix_word(ray.depth())?;
        words::busemann_tree(&prefix, word)
    }

    /// Applies the model's boundary shift to ξ.
    ///
    /// Conformal-density models use `φ_g(ξ) = g^{-1}·ξ`; the Lebesgue model
    /// uses the forward fractional-linear map.
    fn shift(&self, g: &GroupElement, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        match self {
            RnEvaluator::TreeFull { .. } | RnEvaluator::TreeSubgroup { .. } => {
                let word = match g {
                    GroupElement::Word(w) => w,
                    _ => return Err(EcgError::InvalidParameter("tree model needs words".into())),
                };
                let ray = xi.tree_prefix()?;
                let shifted = word.inverse().multiply(&ray.prefix_word(ray.depth())?)?;
                Ok(BoundaryPoint::Tree(TreeRay::new(
                    ray.rank(),
                    shifted.letters().to_vec(),
                    ray.stream.clone(),
                )))
            }
            RnEvaluator::CircleHarmonic => match g {
                GroupElement::Matrix(m) => Ok(BoundaryPoint::Circle(
                    m.inverse().apply_boundary(xi.circle()?),
                )),
                _ => Err(EcgError::InvalidParameter(
                    "circle model needs matrices".into(),
                )),
            },
            RnEvaluator::CircleLebesgue => match g {
                GroupElement::Matrix(m) => {
                    Ok(BoundaryPoint::Circle(m.apply_boundary(xi.circle()?)))
                }
                _ => Err(EcgError::InvalidParameter(
                    "circle model needs matrices".into(),
                )),
            },
        }
    }
}

/// Chain-rule residual `|log D_{gh}(ξ) - log RHS|` in the model's own
/// convention; exactly zero on trees, floating-point small on the circle.
pub fn cocycle_check(
    eval: &RnEvaluator,
    g: &GroupElement,
    h: &GroupElement,
    xi: &BoundaryPoint,
) -> Result<f64> {
    let gh = g.multiply(h)?;
    match eval {
        RnEvaluator::TreeFull { .. } | RnEvaluator::TreeSubgroup { .. } => {
            // integer Busemann arithmetic: β_ξ(o,(gh).o) = β_ξ(o,g.o) + β_{g^{-1}ξ}(o,h.o)
            let lhs = eval.tree_busemann(&gh, xi)?;
            let shifted = eval.shift(g, xi)?;
            let rhs = eval.tree_busemann(g, xi)? + eval.tree_busemann(h, &shifted)?;
            Ok(if lhs == rhs {
                0.0
            } else {
                (lhs - rhs).abs() as f64 * eval.dimension()
            })
        }
        RnEvaluator::CircleHarmonic => {
            let lhs = eval.rn_derivative(&gh, xi)?.ln();
            let shifted = eval.shift(g, xi)?;
            let rhs = eval.rn_derivative(g, xi)?.ln() + eval.rn_derivative(h, &shifted)?.ln();
            Ok((lhs - rhs).abs())
        }
        RnEvaluator::CircleLebesgue => {
            let lhs = eval.rn_derivative(&gh, xi)?.ln();
            let shifted = eval.shift(h, xi)?;
            let rhs = eval.rn_derivative(g, &shifted)?.ln() + eval.rn_derivative(h, xi)?.ln();
            Ok((lhs - rhs).abs())
        }
    }
}

/// Mass of a depth-`k` cylinder under the uniform boundary measure of `F_d`:
/// `1/(2d (2d-1)^{k-1})`, and 1 at `k = 0`.
pub fn uniform_cylinder_mass(rank: u32, depth: usize) -> BigRational {
    if depth == 0 {
        return BigRational::one();
    }
    let q = BigInt::from(2 * rank as i64 - 1);
    let den = BigInt::from(2 * rank as i64) * q.pow(depth as u32 - 1);
    BigRational::new(BigInt::one(), den)
}

/// The uniform measure restricted to cylinders up to a depth cap, as exact
/// rationals.
pub struct CylinderMeasure {
    rank: u32,
    depth_cap: usize,
    masses: BTreeMap<Vec<Letter>, BigRational>,
}

impl CylinderMeasure {
    pub fn uniform(rank: u32, depth_cap: usize) -> Self {
        let mut masses = BTreeMap::new();
        let mut stack: Vec<Letter> = Vec::new();
        masses.insert(stack.clone(), BigRational::one());
        fill_uniform(rank, depth_cap, &mut stack, &mut masses);
        CylinderMeasure {
            rank,
            depth_cap,
            masses,
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    pub fn mass(&self, prefix: &[Letter]) -> Option<&BigRational> {
        self.masses.get(prefix)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Letter>, &BigRational)> {
        self.masses.iter()
    }

    /// CSV rows `prefix,numerator,denominator`, the empty prefix printed as
    /// `e` and letters as `a b A B`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.masses
            .iter()
            .map(|(prefix, mass)| {
                let word = ReducedWord::from_letters(self.rank, prefix).expect("stored reduced");
                format!("{},{},{}", word, mass.numer(), mass.denom())
            })
            .collect()
    }

    /// Parent mass equals the sum of the children, exactly, at every
    /// internal prefix.
    pub fn check_consistency(&self) -> bool {
        for (prefix, mass) in &self.masses {
            if prefix.len() >= self.depth_cap {
                continue;
            }
            let mut sum = BigRational::zero();
            let last = prefix.last().copied();
            for l in words::legal_continuations(self.rank, last) {
                let mut child = prefix.clone();
                child.push(l);
                match self.masses.get(&child) {
                    Some(m) => sum += m,
                    None => return false,
                }
            }
            if sum != *mass {
                return false;
            }
        }
        true
    }
}

fn fill_uniform(
    rank: u32,
    cap: usize,
    stack: &mut Vec<Letter>,
    masses: &mut BTreeMap<Vec<Letter>, BigRational>,
) {
    if stack.len() >= cap {
        return;
    }
    let last = stack.last().copied();
    for l in words::legal_continuations(rank, last) {
        stack.push(l);
        masses.insert(stack.clone(), uniform_cylinder_mass(rank, stack.len()));
        fill_uniform(rank, cap, stack, masses);
        stack.pop();
    }
}

/// `(g_*μ)([w]) = μ(g^{-1}·[w])` exactly, by case analysis of how `g^{-1}`
/// interacts with the cylinder.
pub fn pushforward_cylinder(g: &ReducedWord, w: &ReducedWord) -> Result<BigRational> {
    if g.rank() != w.rank() {
        return Err(EcgError::RankMismatch(g.rank(), w.rank()));
    }
    let rank = g.rank();
    if w.is_empty() {
        // the cylinder is the whole boundary
        return Ok(BigRational::one());
    }
    let u = g.inverse();
    let ul = u.letters();
    let wl = w.letters();
    // cancellation length between the tail of u and the head of w
    let mut c = 0usize;
    while c < ul.len() && c < wl.len() && ul[ul.len() - 1 - c] == -wl[c] {
        c += 1;
    }
    if c < wl.len() {
        // some of w survives: u·[w] is the single cylinder [u' w']
        let depth = (ul.len() - c) + (wl.len() - c);
        Ok(uniform_cylinder_mass(rank, depth))
    } else {
        // w cancels entirely into u: the image is {u'·η : η_1 != w_last^{-1}},
        // where η may keep cancelling into u'
        let remaining = &ul[..ul.len() - c];
        let forbidden = -wl[wl.len() - 1];
        Ok(cone_mass_excluding(rank, remaining, forbidden))
    }
}

/// μ({p·η : η infinite reduced, η_1 != f}), with f never the inverse of
/// p's last letter (the caller maintains this).
fn cone_mass_excluding(rank: u32, p: &[Letter], f: Letter) -> BigRational {
    match p.last() {
        None => {
            // all rays except the cylinder [f]
            let q = BigInt::from(2 * rank as i64);
            BigRational::new(q.clone() - BigInt::one(), q)
        }
        Some(&last) => {
            debug_assert_ne!(f, -last);
            // η_1 over the 2d letters minus {f, p_last^{-1}} gives whole
            // cylinders at depth |p|+1; η_1 = p_last^{-1} cancels one letter
            let whole = uniform_cylinder_mass(rank, p.len() + 1)
                * BigRational::from_integer(BigInt::from(2 * rank as i64 - 2));
            whole + cone_mass_excluding(rank, &p[..p.len() - 1], last)
        }
    }
}

/// `∫_{[w]} D_g dμ` exactly, splitting `[w]` into sub-cylinders on which the
/// Busemann value `2 (ξ∧g) - |g|` is constant.  The weight `exp(v m)` is the
/// exact rational `(2d-1)^m`.
pub fn integral_rn_over_cylinder(g: &ReducedWord, w: &ReducedWord) -> Result<BigRational> {
    if g.rank() != w.rank() {
        return Err(EcgError::RankMismatch(g.rank(), w.rank()));
    }
    let rank = g.rank();
    let glen = g.len() as i64;
    let k = gromov_product(w, g)? as i64;
    let weight = |m: i64| -> BigRational {
        let q = BigInt::from(2 * rank as i64 - 1);
        if m >= 0 {
            BigRational::from_integer(q.pow(m as u32))
        } else {
            BigRational::new(BigInt::one(), q.pow((-m) as u32))
        }
    };
    if k < w.len() as i64 && k < glen {
        // ξ ∈ [w] all share prefix length k with g
        return Ok(weight(2 * k - glen) * uniform_cylinder_mass(rank, w.len()));
    }
    if k == glen {
        // g is a prefix of w
        return Ok(weight(glen) * uniform_cylinder_mass(rank, w.len()));
    }
    // w is a strict prefix of g: split by the depth at which ξ leaves g's path
    let gl = g.letters();
    let mut total = BigRational::zero();
    for t in w.len()..g.len() {
        // deviating letters: != g[t], and != inverse of g[t-1] when t >= 1
        let choices = if t == 0 {
            2 * rank as i64 - 1
        } else {
            2 * rank as i64 - 2
        };
        let _ = gl;
        total += weight(2 * t as i64 - glen)
            * BigRational::from_integer(BigInt::from(choices))
            * uniform_cylinder_mass(rank, t + 1);
    }
    total += weight(glen) * uniform_cylinder_mass(rank, g.len());
    Ok(total)
}

/// Exact conformality: `∫_{[w]} D_g dμ = (g_*μ)([w])` as rationals.
pub fn conformality_check(g: &ReducedWord, w: &ReducedWord) -> Result<bool> {
    Ok(integral_rn_over_cylinder(g, w)? == pushforward_cylinder(g, w)?)
}
