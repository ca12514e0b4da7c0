//! The convolution *-algebra of complex measures supported on a finite
//! equivalence relation, and its block-matrix realization.
//!
//! A measure on a finite relation is just its density on pairs; pairs absent
//! from the weight map carry weight zero. Convolution sums over the common
//! block, involution conjugate-transposes the weights, and stacking each
//! block's weights into a matrix realizes the algebra as a direct sum of
//! full matrix algebras.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::linop::ComplexMatrix;
use crate::qspace::FiniteQuantumSpace;

/// A complex measure on the relation of a finite quantum space: weights on
/// ordered pairs, supported inside the relation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMeasure {
    space: FiniteQuantumSpace,
    weights: BTreeMap<(String, String), Complex64>,
}

impl BlockMeasure {
    /// Validates that the support lies inside the relation; zero weights are
    /// dropped so the representation is canonical.
    pub fn new(
        space: FiniteQuantumSpace,
        weights: BTreeMap<(String, String), Complex64>,
    ) -> Result<Self> {
        for ((x, y), w) in &weights {
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::InvalidMatrix(format!(
                    "weight at ({x:?}, {y:?}) is not finite"
                )));
            }
            let (cx, cy) = (space.class_of(x), space.class_of(y));
            match (cx, cy) {
                (Some(a), Some(b)) if a == b => {}
                _ => {
                    return Err(Error::InvalidSpace(format!(
                        "weight at ({x:?}, {y:?}) lies outside the relation"
                    )))
                }
            }
        }
        let weights = weights
            .into_iter()
            .filter(|(_, w)| w.norm_sqr() != 0.0)
            .collect();
        Ok(Self { space, weights })
    }

    /// The identity for convolution: weight 1 on every diagonal pair.
    pub fn unit(space: FiniteQuantumSpace) -> Self {
        let weights = space
            .points()
            .iter()
            .map(|p| ((p.clone(), p.clone()), Complex64::new(1.0, 0.0)))
            .collect();
        Self { space, weights }
    }

    /// Independent standard complex Gaussian weight on every relation pair.
    pub fn random<R: Rng + ?Sized>(space: FiniteQuantumSpace, rng: &mut R) -> Self {
        let normal = StandardNormal;
        let weights = space
            .relation_pairs()
            .into_iter()
            .map(|pair| (pair, Complex64::new(normal.sample(rng), normal.sample(rng))))
            .collect();
        Self { space, weights }
    }

    pub fn space(&self) -> &FiniteQuantumSpace {
        &self.space
    }

    pub fn weight(&self, x: &str, y: &str) -> Complex64 {
        self.weights
            .get(&(x.to_string(), y.to_string()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn weights(&self) -> &BTreeMap<(String, String), Complex64> {
        &self.weights
    }

    /// Convolution: `(μ*ν)(x, z) = Σ_y μ(x, y)·ν(y, z)` over the common block.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "convolution operands live on different spaces".into(),
            ));
        }
        let mut weights = BTreeMap::new();
        for block in self.space.blocks() {
            for x in &block.members {
                for z in &block.members {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for y in &block.members {
                        acc += self.weight(x, y) * other.weight(y, z);
                    }
                    if acc.norm_sqr() != 0.0 {
                        weights.insert((x.clone(), z.clone()), acc);
                    }
                }
            }
        }
        Ok(Self {
            space: self.space.clone(),
            weights,
        })
    }

    /// Involution: `μ*(x, y) = conj(μ(y, x))`.
    pub fn involution(&self) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|((x, y), w)| ((y.clone(), x.clone()), w.conj()))
            .collect();
        Self {
            space: self.space.clone(),
            weights,
        }
    }

    /// One matrix per block: row/column order is the sorted member order of
    /// the block. This map is a *-isomorphism onto the direct sum.
    pub fn to_block_matrices(&self) -> Vec<ComplexMatrix> {
        self.space
            .blocks()
            .iter()
            .map(|block| {
                let k = block.members.len();
                ComplexMatrix::from_fn(k, |i, j| self.weight(&block.members[i], &block.members[j]))
                    .expect("block size bounded by point count")
            })
            .collect()
    }

    /// The C*-norm: the largest operator norm over block images.
    pub fn cstar_norm(&self) -> f64 {
        self.to_block_matrices()
            .iter()
            .map(ComplexMatrix::operator_norm)
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "sum operands live on different spaces".into(),
            ));
        }
        let mut weights = self.weights.clone();
        for (pair, w) in &other.weights {
            *weights
                .entry(pair.clone())
                .or_insert(Complex64::new(0.0, 0.0)) += *w;
        }
        Ok(Self {
            space: self.space.clone(),
            weights: weights
                .into_iter()
                .filter(|(_, w)| w.norm_sqr() != 0.0)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            weights: self
                .weights
                .iter()
                .filter(|(_, w)| (*w * s).norm_sqr() != 0.0)
                .map(|(pair, w)| (pair.clone(), w * s))
                .collect(),
        }
    }
}

// JSON form:
// {"space": <space JSON>, "weights": [{"from": x, "to": y, "re": r, "im": i}, ...]}
impl<'de> Deserialize<'de> for BlockMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct RawWeight {
            from: String,
            to: String,
            re: f64,
            im: f64,
        }
        #[derive(Deserialize)]
        struct Raw {
            space: FiniteQuantumSpace,
            weights: Vec<RawWeight>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut weights = BTreeMap::new();
        for w in raw.weights {
            let prev = weights.insert((w.from.clone(), w.to.clone()), Complex64::new(w.re, w.im));
            if prev.is_some() {
                return Err(D::Error::custom(format!(
                    "duplicate weight for pair ({:?}, {:?})",
                    w.from, w.to
                )));
            }
        }
        BlockMeasure::new(raw.space, weights).map_err(D::Error::custom)
    }
}
