//! Dense complex matrix primitives and the spectral kernels built on them.
//!
//! Everything here is desk scale: dimensions are capped at [`MAX_DIM`], values
//! are immutable after construction, and all operations are pure functions.

mod hermitian;
pub(crate) mod schur;

pub use hermitian::{hermitian_eigen, HermitianEigen};
pub use schur::{schur_decompose, SchurForm};

pub(crate) use hermitian::{gram_null_space, hermitian_eigen_raw};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};

/// Hard cap on matrix dimension; this is a desk-scale tool.
pub const MAX_DIM: usize = 64;

/// Singular values below this relative level are indistinguishable from
/// zero when ranks are decided through a Gram matrix: eigenvalues of `m*m`
/// carry absolute noise of order `eps·σ_max²`, so σ plateaus near
/// `sqrt(eps)·σ_max` for truly singular directions.
const GRAM_SIGMA_FLOOR: f64 = 1.2e-7;

/// Relative tolerances used for rank, cluster, and orthonormality decisions.
///
/// All thresholds are relative: rank cuts scale with the operator norm and
/// eigenvalue clusters with `1 + ‖m‖`, so the decisions are invariant under
/// rescaling of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative eigenvalue-cluster radius.
    pub tol_eig: f64,
    /// Relative residual bound for rank and membership decisions.
    pub tol_resid: f64,
    /// Orthonormality bound for subspace bases.
    pub tol_ortho: f64,
}

impl Tolerances {
    pub fn new(tol_eig: f64, tol_resid: f64, tol_ortho: f64) -> Result<Self> {
        for (name, t) in [
            ("tol_eig", tol_eig),
            ("tol_resid", tol_resid),
            ("tol_ortho", tol_ortho),
        ] {
            if !(t > 0.0 && t <= 1e-2) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1e-2], got {t:e}"
                )));
            }
        }
        Ok(Self {
            tol_eig,
            tol_resid,
            tol_ortho,
        })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_eig: 1e-8,
            tol_resid: 1e-8,
            tol_ortho: 1e-8,
        }
    }
}

/// Dense square matrix of complex scalars, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// One spectral cluster: an eigenvalue with its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating the desk-scale cap
    /// and finiteness of every entry.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::InvalidMatrix(format!(
                "dimension {dim} exceeds cap {MAX_DIM}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self { dim, entries })
    }

    /// Internal constructor for values produced by arithmetic on validated
    /// inputs; skips the finiteness scan.
    pub(crate) fn unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix("rows must form a square".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    /// Convenience constructor from real row data.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix("rows must form a square".into()));
        }
        Self::new(
            dim,
            rows.iter()
                .flatten()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![Complex64::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Matrix with independent standard complex Gaussian entries.
    pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let normal = StandardNormal;
        Self::from_fn(dim, |_, _| {
            Complex64::new(normal.sample(rng), normal.sample(rng))
        })
    }

    /// Haar-ish random unitary: Gram-Schmidt applied to a Gaussian matrix.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let g = Self::random_gaussian(dim, rng)?;
        let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|j| g.column(j)).collect();
        orthonormalize(&mut cols);
        Self::from_fn(dim, |i, j| cols[j][i])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub(crate) fn entry_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.entry(i, j)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.entry(j, i).conj()).expect("adjoint preserves validity")
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::unchecked(self.dim, self.entries.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in add");
        Self::unchecked(
            self.dim,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in sub");
        Self::unchecked(
            self.dim,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in mul");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * other.entries[k * n + j];
                }
            }
        }
        Self::unchecked(n, out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch in apply");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.entry(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::identity(self.dim).expect("identity in range");
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Largest singular value, computed from the top eigenvalue of `m* m`.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let eig = hermitian_eigen(&gram);
        eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Eigenvalues with algebraic multiplicities, obtained by unitary
    /// triangularization and then clustered: two raw eigenvalues share a
    /// cluster when their distance is at most `tol_eig · (1 + ‖m‖)`.
    pub fn spectrum(&self, tol: &Tolerances) -> Result<Vec<EigenCluster>> {
        let form = schur_decompose(self)?;
        let raw: Vec<Complex64> = (0..self.dim).map(|i| form.t.entry(i, i)).collect();
        let radius = tol.tol_eig * (1.0 + self.operator_norm());
        Ok(cluster_points(&raw, radius))
    }

    /// Orthonormal basis of the numerical null space: singular directions
    /// with singular value at most `tol_resid · ‖m‖`. The zero matrix has
    /// full kernel.
    pub fn kernel(&self, tol: &Tolerances) -> Result<Subspace> {
        let gram = self.adjoint().mul(self);
        let eig = hermitian_eigen(&gram);
        let sigma_max = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        let cutoff = tol.tol_resid.max(GRAM_SIGMA_FLOOR) * sigma_max;
        let mut basis = Vec::new();
        for (idx, &lambda) in eig.values.iter().enumerate() {
            let sigma = lambda.max(0.0).sqrt();
            if sigma <= cutoff {
                basis.push(eig.vectors[idx].clone());
            }
        }
        Subspace::from_columns(self.dim, basis, tol.tol_ortho)
    }

    /// Orthonormal basis of the column space: left singular directions with
    /// singular value above `tol_resid · ‖m‖`.
    pub fn range_closure(&self, tol: &Tolerances) -> Result<Subspace> {
        let gram = self.mul(&self.adjoint());
        let eig = hermitian_eigen(&gram);
        let sigma_max = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        let cutoff = tol.tol_resid.max(GRAM_SIGMA_FLOOR) * sigma_max;
        let mut basis = Vec::new();
        for (idx, &lambda) in eig.values.iter().enumerate() {
            let sigma = lambda.max(0.0).sqrt();
            if sigma > cutoff && sigma > 0.0 {
                basis.push(eig.vectors[idx].clone());
            }
        }
        Subspace::from_columns(self.dim, basis, tol.tol_ortho)
    }

    /// Commutator residual `‖m*m − mm*‖`; zero for normal operators.
    pub fn normality_residual(&self) -> f64 {
        let adj = self.adjoint();
        adj.mul(self).sub(&self.mul(&adj)).operator_norm()
    }

    pub fn is_normal(&self, tol: &Tolerances) -> bool {
        let norm = self.operator_norm();
        self.normality_residual() <= tol.tol_resid * norm * norm.max(1.0)
    }
}

/// Single-linkage clustering of points in the complex plane.
pub(crate) fn cluster_points(points: &[Complex64], radius: f64) -> Vec<EigenCluster> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut clusters: Vec<EigenCluster> = groups
        .values()
        .map(|members| {
            let sum: Complex64 = members.iter().map(|&i| points[i]).sum();
            EigenCluster {
                value: sum / members.len() as f64,
                multiplicity: members.len(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .expect("finite eigenvalues")
    });
    clusters
}

/// Modified Gram-Schmidt, in place; vectors assumed independent.
pub(crate) fn orthonormalize(cols: &mut [Vec<Complex64>]) {
    for j in 0..cols.len() {
        // Two passes keep near-dependent inputs numerically orthogonal.
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[k].clone();
                for (x, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *x -= proj * p;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
}

/// A subspace of `C^n` given by an orthonormal (possibly empty) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Complex64>>,
}

impl Subspace {
    /// Validates pairwise orthonormality of `basis` within `tol_ortho`.
    pub fn from_columns(
        ambient_dim: usize,
        basis: Vec<Vec<Complex64>>,
        tol_ortho: f64,
    ) -> Result<Self> {
        if ambient_dim == 0 || ambient_dim > MAX_DIM {
            return Err(Error::InvalidMatrix(format!(
                "ambient dimension {ambient_dim} out of range"
            )));
        }
        if basis.len() > ambient_dim {
            return Err(Error::InvalidMatrix(format!(
                "rank {} exceeds ambient dimension {ambient_dim}",
                basis.len()
            )));
        }
        for v in &basis {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch(
                    "basis vector length differs from ambient dimension".into(),
                ));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidMatrix("basis entries must be finite".into()));
            }
        }
        for i in 0..basis.len() {
            for j in 0..=i {
                let inner: Complex64 = basis[j]
                    .iter()
                    .zip(basis[i].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (inner - expected).norm() > tol_ortho {
                    return Err(Error::InvalidMatrix(format!(
                        "basis not orthonormal: |<v{j}, v{i}> - {expected}| = {:.3e}",
                        (inner - expected).norm()
                    )));
                }
            }
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); ambient_dim];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// The coordinate line spanned by `e_k`.
    pub fn coordinate(ambient_dim: usize, k: usize) -> Self {
        assert!(k < ambient_dim);
        let mut v = vec![Complex64::new(0.0, 0.0); ambient_dim];
        v[k] = Complex64::new(1.0, 0.0);
        Self {
            ambient_dim,
            basis: vec![v],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0 || self.rank() == self.ambient_dim
    }

    /// Orthogonal projection `Σ v v*` onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.ambient_dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for v in &self.basis {
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += v[i] * v[j].conj();
                }
            }
        }
        ComplexMatrix::unchecked(n, entries)
    }

    /// Largest deviation `|<v_i, v_j> - δ_ij|` over basis pairs.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.basis.len() {
            for j in 0..=i {
                let inner: Complex64 = self.basis[j]
                    .iter()
                    .zip(self.basis[i].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner - expected).norm());
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// JSON input form: {"dim": n, "entries": [[re, im], ...]} row-major.
// ---------------------------------------------------------------------------

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            entries: Vec<(f64, f64)>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ComplexMatrix::new(
            raw.dim,
            raw.entries
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}
