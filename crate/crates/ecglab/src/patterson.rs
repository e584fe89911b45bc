//! Empirical Patterson measures for subgroups of `F_d`.
//!
//! The measure is the normalized sum over `h ∈ H ∩ B_N` of
//! `e^{-s|h|} ×` (uniform measure on the extension cone of `h`): each orbit
//! Dirac mass is smeared over the rays extending the orbit word.  Cylinder
//! weights refine consistently, sampling draws an orbit word proportionally
//! to its weight and extends it uniformly, and all weights are exact
//! rationals in the exact representation of `e^{-s}`, so symmetry identities
//! hold exactly.
//!
//! Counting and sampling both run on one table: `R[r][(img, last)]`, the
//! number of reduced extensions of length `r` with first letter compatible
//! with `last` whose image cancels `img`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::boundary::TreeRay;
use crate::subgroup::{Image, SubgroupSpec};
use crate::words::{legal_continuations, Letter};
use crate::{EcgError, Result};

/// Default cylinder depth cap for weight queries.
pub const DEFAULT_CYLINDER_CAP: u32 = 8;

/// Empirical Patterson measure of `H ∩ B_N` with weights `e^{-s|h|}`.
pub struct EmpiricalPattersonMeasure {
    rank: u32,
    spec: SubgroupSpec,
    depth_n: u32,
    s: f64,
    cylinder_cap: u32,
    /// completions[r] maps (img, last) to the number of reduced words `e`
    /// of length r with first(e) != -last and img·img(e) = identity.
    /// Counts fit f64 exactly for the supported depths.
    completions: Vec<HashMap<(Image, Letter), f64>>,
    /// number of subgroup elements per word length
    counts_per_len: Vec<f64>,
    /// sampling CDF over word lengths, weights `count_l e^{-s l}`
    length_cdf: Vec<f64>,
}

impl EmpiricalPattersonMeasure {
    pub fn build(
        spec: &SubgroupSpec,
        rank: u32,
        depth_n: u32,
        s: f64,
        cylinder_cap: u32,
    ) -> Result<Self> {
        spec.validate(rank)?;
        if s.is_nan() || s <= 0.0 {
            return Err(EcgError::InvalidParameter(format!(
                "exponent s must be > 0, got {s}"
            )));
        }
        if depth_n > 30 {
            return Err(EcgError::CapExceeded(format!(
                "empirical Patterson depth capped at 30, got {depth_n}"
            )));
        }
        let mut completions: Vec<HashMap<(Image, Letter), f64>> =
            Vec::with_capacity(depth_n as usize + 1);
        let zero_img = spec.identity_image();
        let mut letters: Vec<Letter> = vec![0];
        letters.extend((1..=rank as Letter).flat_map(|i| [i, -i]));
        let mut base = HashMap::new();
        for &l in &letters {
            base.insert((zero_img.clone(), l), 1.0);
        }
        completions.push(base);
        for r in 1..=depth_n as usize {
            let mut next: HashMap<(Image, Letter), f64> = HashMap::new();
            for ((img, c), v) in &completions[r - 1] {
                if *c == 0 {
                    continue;
                }
                // predecessors: append c after any last with c != -last
                let prev = spec.step(img, -c);
                if spec.min_letters_to_identity(&prev) > depth_n as usize {
                    continue;
                }
                for &last in &letters {
                    if last != 0 && *c == -last {
                        continue;
                    }
                    *next.entry((prev.clone(), last)).or_insert(0.0) += v;
                }
            }
            completions.push(next);
        }
        let counts_per_len: Vec<f64> = (0..=depth_n as usize)
            .map(|r| {
                completions[r]
                    .get(&(zero_img.clone(), 0))
                    .copied()
                    .unwrap_or(0.0)
            })
            .collect();
        let q = (-s).exp();
        let mut length_cdf = Vec::with_capacity(counts_per_len.len());
        let mut acc = 0.0;
        for (l, c) in counts_per_len.iter().enumerate() {
            acc += c * q.powi(l as i32);
            length_cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(EcgError::DegenerateSample(
                "empirical Patterson measure has no mass".into(),
            ));
        }
        Ok(EmpiricalPattersonMeasure {
            rank,
            spec: spec.clone(),
            depth_n,
            s,
            cylinder_cap,
            completions,
            counts_per_len,
            length_cdf,
        })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn spec(&self) -> &SubgroupSpec {
        &self.spec
    }

    pub fn depth(&self) -> u32 {
        self.depth_n
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn cylinder_cap(&self) -> u32 {
        self.cylinder_cap
    }

    /// Number of subgroup elements of each word length up to `N`.
    pub fn counts_per_len(&self) -> &[f64] {
        &self.counts_per_len
    }

    fn q_exact(&self) -> BigRational {
        BigRational::from_f64((-self.s).exp()).expect("finite weight base")
    }

    /// Number of stored words extending `prefix` with total length `len`.
    fn extension_count(&self, img: &Image, last: Letter, remaining: usize) -> f64 {
        self.completions
            .get(remaining)
            .and_then(|m| m.get(&(img.clone(), last)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Exact normalized cylinder weight of `[prefix]`, `|prefix| <= cap`.
    ///
    /// A stored word `h` contributes `e^{-s|h|}` when `prefix` extends to it,
    /// and `e^{-s|h|}` times the uniform cone fraction when `h` is a strict
    /// prefix of `prefix`.
    pub fn cylinder_weight(&self, prefix: &[Letter]) -> Result<BigRational> {
        if prefix.len() > self.cylinder_cap as usize {
            return Err(EcgError::CapExceeded(format!(
                "cylinder depth {} exceeds cap {}",
                prefix.len(),
                self.cylinder_cap
            )));
        }
        let q = self.q_exact();
        // deep part: words through the prefix node
        let mut img = self.spec.identity_image();
        let mut last: Letter = 0;
        let mut shallow = BigRational::zero();
        for (t, &l) in prefix.iter().enumerate() {
            // h = prefix of length t, smeared uniformly over its cone
            if self.spec.is_identity_image(&img) && t <= self.depth_n as usize {
                shallow += q.pow(t as i32) * cone_fraction(self.rank, t, prefix.len());
            }
            img = self.spec.step(&img, l);
            last = l;
        }
        let mut deep = BigRational::zero();
        for len in prefix.len()..=self.depth_n as usize {
            let cnt = self.extension_count(&img, last, len - prefix.len());
            if cnt > 0.0 {
                deep += BigRational::from_f64(cnt).unwrap() * q.pow(len as i32);
            }
        }
        Ok((shallow + deep) / self.total_weight_exact())
    }

    fn total_weight_exact(&self) -> BigRational {
        let q = self.q_exact();
        let mut z = BigRational::zero();
        for (l, c) in self.counts_per_len.iter().enumerate() {
            if *c > 0.0 {
                z += BigRational::from_f64(*c).unwrap() * q.pow(l as i32);
            }
        }
        z
    }

    /// CSV rows `prefix,numerator,denominator,weight` for all cylinders of
    /// the given depth.
    pub fn cylinder_csv_rows(&self, depth: u32) -> Result<Vec<String>> {
        use num_traits::ToPrimitive;
        let mut rows = Vec::new();
        let mut stack: Vec<Letter> = Vec::new();
        let mut visit = |letters: &[Letter]| -> Result<()> {
            if letters.len() == depth as usize {
                let w = self.cylinder_weight(letters)?;
                let word = crate::words::ReducedWord::from_letters(self.rank, letters)
                    .expect("reduced by construction");
                rows.push(format!(
                    "{},{},{},{}",
                    word,
                    w.numer(),
                    w.denom(),
                    w.to_f64().unwrap_or(f64::NAN)
                ));
            }
            Ok(())
        };
        visit_prefixes(self.rank, depth as usize, &mut stack, &mut visit)?;
        rows.sort();
        Ok(rows)
    }

    /// Draws one boundary ray: an orbit word `h` with probability
    /// proportional to `e^{-s|h|}`, extended uniformly by the ray's stream.
    pub fn sample_ray(&self, mut stream: ChaCha8Rng) -> TreeRay {
        let total = *self.length_cdf.last().unwrap();
        let u: f64 = stream.gen::<f64>() * total;
        let len = self
            .length_cdf
            .partition_point(|&acc| acc < u)
            .min(self.depth_n as usize);
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        let mut img = self.spec.identity_image();
        let mut last: Letter = 0;
        for t in 0..len {
            let remaining = len - t - 1;
            let options: Vec<(Letter, f64)> =
                legal_continuations(self.rank, (last != 0).then_some(last))
                    .map(|c| {
                        let img2 = self.spec.step(&img, c);
                        (c, self.extension_count(&img2, c, remaining))
                    })
                    .filter(|(_, w)| *w > 0.0)
                    .collect();
            let total_w: f64 = options.iter().map(|(_, w)| w).sum();
            let mut pick = stream.gen::<f64>() * total_w;
            let mut chosen = options[options.len() - 1].0;
            for (c, w) in &options {
                if pick < *w {
                    chosen = *c;
                    break;
                }
                pick -= w;
            }
            img = self.spec.step(&img, chosen);
            last = chosen;
            letters.push(chosen);
        }
        TreeRay::new(self.rank, letters, stream)
    }
}

fn visit_prefixes<F: FnMut(&[Letter]) -> Result<()>>(
    rank: u32,
    depth: usize,
    stack: &mut Vec<Letter>,
    f: &mut F,
) -> Result<()> {
    f(stack)?;
    if stack.len() >= depth {
        return Ok(());
    }
    for l in legal_continuations(rank, stack.last().copied()) {
        stack.push(l);
        visit_prefixes(rank, depth, stack, f)?;
        stack.pop();
    }
    Ok(())
}

/// Probability that a uniform extension of a depth-`from` word passes
/// through a fixed compatible depth-`to` prefix.
fn cone_fraction(rank: u32, from: usize, to: usize) -> BigRational {
    if from == to {
        return BigRational::one();
    }
    let q = BigInt::from(2 * rank as i64 - 1);
    let first = if from == 0 {
        BigInt::from(2 * rank as i64)
    } else {
        q.clone()
    };
    BigRational::new(BigInt::one(), first * q.pow((to - from - 1) as u32))
}

/// Convenience: counts `|H ∩ S_l|` for `l <= n` as exact floats.
pub fn subgroup_sphere_counts(spec: &SubgroupSpec, rank: u32, n: u32) -> Result<Vec<f64>> {
    let m = EmpiricalPattersonMeasure::build(spec, rank, n, 1.0, 0)?;
    Ok(m.counts_per_len().to_vec())
}
