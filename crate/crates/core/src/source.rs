//! PAM alphabets, shaping distributions and the symbol sampler.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, CHUNK_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Bipolar,
    Unipolar,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Bipolar => "bipolar",
            Polarity::Unipolar => "unipolar",
        }
    }
}

/// A PAM-M alphabet with a binary-reflected Gray labeling.
///
/// Bipolar levels are `{±1, ±3, …, ±(M−1)}`; unipolar levels are the bipolar
/// ones shifted by the bias `β ≥ M−1`. Levels are stored in ascending order
/// and level `k` carries the label `k ^ (k >> 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PamAlphabet {
    order: usize,
    polarity: Polarity,
    bias: f64,
    levels: Vec<f64>,
    labels: Vec<u32>,
}

impl PamAlphabet {
    /// Builds a PAM-`order` alphabet. `bias` is ignored for bipolar alphabets
    /// and defaults to `order − 1` for unipolar ones.
    pub fn new(order: usize, polarity: Polarity, bias: Option<f64>) -> Result<Self> {
        if !(2..=64).contains(&order) || !order.is_power_of_two() {
            return Err(Error::InvalidOrder(order));
        }
        let min_bias = (order - 1) as f64;
        let bias = match polarity {
            Polarity::Bipolar => 0.0,
            Polarity::Unipolar => {
                let b = bias.unwrap_or(min_bias);
                if !b.is_finite() || b < min_bias {
                    return Err(Error::InvalidBias { bias: b, min: min_bias });
                }
                b
            }
        };
        let levels = (0..order)
            .map(|k| (2 * k) as f64 - min_bias + bias)
            .collect();
        let labels = (0..order as u32).map(|k| k ^ (k >> 1)).collect();
        Ok(Self {
            order,
            polarity,
            bias,
            levels,
            labels,
        })
    }

    pub fn bipolar(order: usize) -> Result<Self> {
        Self::new(order, Polarity::Bipolar, None)
    }

    pub fn unipolar(order: usize, bias: Option<f64>) -> Result<Self> {
        Self::new(order, Polarity::Unipolar, bias)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Levels in ascending order (unscaled).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Levels with the bias removed, i.e. centred on zero.
    pub fn centred_levels(&self) -> Vec<f64> {
        self.levels.iter().map(|x| x - self.bias).collect()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Bit `i` (0 = most significant) of the label of level `index`.
    pub fn bit(&self, index: usize, i: usize) -> u8 {
        let m = self.bits_per_symbol();
        ((self.labels[index] >> (m - 1 - i)) & 1) as u8
    }

    /// Label of level `index` as a string of `m` binary digits.
    pub fn label_string(&self, index: usize) -> String {
        format!("{:0width$b}", self.labels[index], width = self.bits_per_symbol())
    }

    pub fn max_abs_level(&self) -> f64 {
        self.levels.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

/// Shaping family of a [`SymbolDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "uniform")]
    Uniform,
    /// Maxwell-Boltzmann, `P(x) ∝ exp(−λx²)` in centred coordinates.
    #[serde(rename = "mb")]
    MaxwellBoltzmann,
    /// Asymmetric MB over raw unipolar levels, `P(x⁺) ∝ exp(−λ(x⁺)²)`.
    #[serde(rename = "as-mb")]
    AsymmetricMb,
    /// Reverse MB, `P(x) ∝ exp(+λx²)`, favouring the outer levels.
    #[serde(rename = "r-mb")]
    ReverseMb,
    /// Arbitrary user-supplied probabilities.
    #[serde(rename = "custom")]
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::MaxwellBoltzmann => "mb",
            Family::AsymmetricMb => "as-mb",
            Family::ReverseMb => "r-mb",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(Family::Uniform),
            "mb" => Some(Family::MaxwellBoltzmann),
            "as-mb" => Some(Family::AsymmetricMb),
            "r-mb" => Some(Family::ReverseMb),
            _ => None,
        }
    }

    /// Open lower and closed upper bound of the entropy this family reaches
    /// on `alphabet`, in bits.
    pub fn entropy_range(self, alphabet: &PamAlphabet) -> Result<(f64, f64)> {
        let max = alphabet.bits_per_symbol() as f64;
        match (self, alphabet.polarity()) {
            (Family::Uniform, _) => Ok((max, max)),
            (Family::MaxwellBoltzmann, _) => Ok((1.0, max)),
            (Family::ReverseMb, Polarity::Bipolar) => Ok((1.0, max)),
            (Family::AsymmetricMb, Polarity::Unipolar) => Ok((0.0, max)),
            (family, polarity) => Err(unsupported(family, polarity)),
        }
    }

    /// Builds the member of this family with shape parameter `lambda`.
    pub fn distribution(self, alphabet: &PamAlphabet, lambda: f64) -> Result<SymbolDistribution> {
        match self {
            Family::Uniform => Ok(SymbolDistribution::uniform(alphabet)),
            Family::MaxwellBoltzmann => SymbolDistribution::mb(alphabet, lambda),
            Family::AsymmetricMb => SymbolDistribution::asmb(alphabet, lambda),
            Family::ReverseMb => SymbolDistribution::rmb(alphabet, lambda),
            Family::Custom => Err(Error::InvalidArgument(
                "custom distributions have no shape parameter".into(),
            )),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn unsupported(family: Family, polarity: Polarity) -> Error {
    Error::UnsupportedFamily {
        family: family.name(),
        polarity: polarity.name(),
    }
}

/// Entropy in bits of a probability vector; zero-probability terms count as 0.
pub fn entropy(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// A probability vector aligned with the levels of an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    probabilities: Vec<f64>,
    family: Family,
    lambda: f64,
    entropy: f64,
}

impl SymbolDistribution {
    pub fn uniform(alphabet: &PamAlphabet) -> Self {
        let m = alphabet.order();
        Self::from_parts(vec![1.0 / m as f64; m], Family::Uniform, 0.0)
    }

    /// Maxwell-Boltzmann over centred levels; symmetric about the bias.
    pub fn mb(alphabet: &PamAlphabet, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let logits = alphabet
            .centred_levels()
            .iter()
            .map(|x| -lambda * x * x)
            .collect::<Vec<_>>();
        Ok(Self::from_logits(&logits, Family::MaxwellBoltzmann, lambda))
    }

    /// Reverse MB on a bipolar alphabet.
    pub fn rmb(alphabet: &PamAlphabet, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if alphabet.polarity() != Polarity::Bipolar {
            return Err(unsupported(Family::ReverseMb, alphabet.polarity()));
        }
        let logits = alphabet
            .levels()
            .iter()
            .map(|x| lambda * x * x)
            .collect::<Vec<_>>();
        Ok(Self::from_logits(&logits, Family::ReverseMb, lambda))
    }

    /// Asymmetric MB over the raw levels of a unipolar alphabet.
    pub fn asmb(alphabet: &PamAlphabet, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if alphabet.polarity() != Polarity::Unipolar {
            return Err(unsupported(Family::AsymmetricMb, alphabet.polarity()));
        }
        let logits = alphabet
            .levels()
            .iter()
            .map(|x| -lambda * x * x)
            .collect::<Vec<_>>();
        Ok(Self::from_logits(&logits, Family::AsymmetricMb, lambda))
    }

    /// Wraps an arbitrary probability vector; entries must be non-negative
    /// and sum to one within 1e-12.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self::from_parts(probabilities, Family::Custom, 0.0))
    }

    fn from_logits(logits: &[f64], family: Family, lambda: f64) -> Self {
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        Self::from_parts(weights.iter().map(|w| w / total).collect(), family, lambda)
    }

    fn from_parts(probabilities: Vec<f64>, family: Family, lambda: f64) -> Self {
        let entropy = entropy(&probabilities);
        Self {
            probabilities,
            family,
            lambda,
            entropy,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cached entropy in bits per symbol.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeLambda(lambda))
    }
}

const LAMBDA_TOL_BITS: f64 = 1e-9;
const LAMBDA_MAX_ITER: usize = 200;

/// Finds the shape parameter giving entropy `target` for `family` on
/// `alphabet`.
///
/// Entropy is strictly decreasing in λ for every supported family, so the
/// root is bracketed by doubling an upper bound from 1 and then bisected.
pub fn solve_lambda_for_entropy(family: Family, alphabet: &PamAlphabet, target: f64) -> Result<f64> {
    let (min, max) = family.entropy_range(alphabet)?;
    if !target.is_finite() || target > max + 1e-12 || target <= min {
        if family == Family::Uniform && (target - max).abs() <= 1e-12 {
            return Ok(0.0);
        }
        return Err(Error::UnreachableEntropy { target, min, max });
    }
    if (target - max).abs() <= 1e-12 {
        return Ok(0.0);
    }
    let h = |lambda: f64| family.distribution(alphabet, lambda).map(|d| d.entropy());

    let mut hi = 1.0;
    let mut iter = 0;
    while h(hi)? >= target {
        hi *= 2.0;
        iter += 1;
        if iter > 1100 || !hi.is_finite() {
            return Err(Error::UnreachableEntropy { target, min, max });
        }
    }
    let mut lo = 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..LAMBDA_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let hm = h(mid)?;
        if (hm - target).abs() <= 1e-13 || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if hm > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let achieved = h(mid)?;
    if (achieved - target).abs() > LAMBDA_TOL_BITS {
        return Err(Error::UnreachableEntropy { target, min, max });
    }
    Ok(mid)
}

/// An alphabet, its distribution and the constellation scale Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedSource {
    alphabet: PamAlphabet,
    distribution: SymbolDistribution,
    scale: f64,
}

impl ShapedSource {
    pub fn new(alphabet: PamAlphabet, distribution: SymbolDistribution, scale: f64) -> Result<Self> {
        if distribution.len() != alphabet.order() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} levels",
                distribution.len(),
                alphabet.order()
            )));
        }
        check_scale(scale)?;
        Ok(Self {
            alphabet,
            distribution,
            scale,
        })
    }

    /// Source of `family` with entropy `target` on `alphabet`, at unit scale.
    pub fn with_entropy(alphabet: PamAlphabet, family: Family, target: f64) -> Result<Self> {
        let lambda = solve_lambda_for_entropy(family, &alphabet, target)?;
        let distribution = family.distribution(&alphabet, lambda)?;
        Self::new(alphabet, distribution, 1.0)
    }

    pub fn uniform(alphabet: PamAlphabet) -> Self {
        let distribution = SymbolDistribution::uniform(&alphabet);
        Self {
            alphabet,
            distribution,
            scale: 1.0,
        }
    }

    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            scale,
            ..self.clone()
        })
    }

    pub fn alphabet(&self) -> &PamAlphabet {
        &self.alphabet
    }

    pub fn distribution(&self) -> &SymbolDistribution {
        &self.distribution
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn entropy(&self) -> f64 {
        self.distribution.entropy()
    }

    /// Transmitted amplitudes Δ·level.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.alphabet.levels().iter().map(|x| self.scale * x).collect()
    }

    /// `Σ P(x)·(Δx)²`.
    pub fn average_energy(&self) -> f64 {
        self.alphabet
            .levels()
            .iter()
            .zip(self.distribution.probabilities())
            .map(|(x, p)| p * (self.scale * x).powi(2))
            .sum()
    }

    /// Largest `(Δx)²` over levels with non-zero probability.
    pub fn peak_power(&self) -> f64 {
        self.alphabet
            .levels()
            .iter()
            .zip(self.distribution.probabilities())
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| (self.scale * x).powi(2))
            .fold(0.0, f64::max)
    }

    /// Mean of the intensity waveform, `Σ P(x⁺)·Δx⁺`. Unipolar sources only.
    pub fn mean_intensity(&self) -> Result<f64> {
        if self.alphabet.polarity() != Polarity::Unipolar {
            return Err(Error::InvalidArgument(
                "mean intensity is defined for unipolar sources only".into(),
            ));
        }
        Ok(self
            .alphabet
            .levels()
            .iter()
            .zip(self.distribution.probabilities())
            .map(|(x, p)| p * self.scale * x)
            .sum())
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidScale(scale))
    }
}

/// Drawn symbol indices together with their labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    pub indices: Vec<u8>,
    /// `m` bits per symbol, most significant first.
    pub bits: Vec<u8>,
}

/// Draws `n` i.i.d. symbols by inverse-CDF sampling.
///
/// Chunk `c` of [`CHUNK_LEN`] symbols uses the generator seeded with
/// `derive_seed(seed, c)`, one uniform draw per symbol.
pub fn sample_indices(source: &ShapedSource, n: usize, seed: u64) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let probs = source.distribution().probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    // Any draw past the accumulated mass maps to the last level in the support.
    let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    let mut out = vec![0u8; n];
    out.par_chunks_mut(CHUNK_LEN)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = rng_from_seed(derive_seed(seed, c as u64));
            for v in chunk.iter_mut() {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c <= u).min(last);
                *v = k as u8;
            }
        });
    Ok(out)
}

/// Symbol indices plus their bit labels; see [`sample_indices`].
pub fn sample_symbols(source: &ShapedSource, n: usize, seed: u64) -> Result<SymbolStream> {
    let indices = sample_indices(source, n, seed)?;
    let alphabet = source.alphabet();
    let m = alphabet.bits_per_symbol();
    let mut bits = Vec::with_capacity(n * m);
    for &k in &indices {
        for i in 0..m {
            bits.push(alphabet.bit(k as usize, i));
        }
    }
    Ok(SymbolStream { indices, bits })
}
