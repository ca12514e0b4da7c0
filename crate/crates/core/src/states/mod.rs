//! Finite-dimensional *-algebras presented inside a matrix algebra, states
//! on them, GNS representations, equivalence of representations, and the
//! pure-state equivalence relation.
//!
//! States are density matrices: every functional on a presented subalgebra
//! of the n×n matrices extends to the trace form `x ↦ tr(ρx)`. Pure-state
//! spaces are sampled with explicit seeds, never enumerated as continua.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linop::{gram_null_space, hermitian_eigen, ComplexMatrix, Tolerances};
use crate::qspace::FiniteQuantumSpace;

/// Ambient cap for algebra closure; products of basis elements are projected
/// against a basis of size up to `dim²`.
pub const MAX_ALGEBRA_AMBIENT_DIM: usize = 16;

/// Fixed seed for the internal randomness of equivalence checks; results are
/// reproducible across runs by construction.
const INTERTWINER_SEED: u64 = 0x0defaced;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A unital *-closed subalgebra of the n×n matrices, presented by an
/// orthonormal basis under the trace inner product `<x, y> = tr(y* x)`.
#[derive(Debug, Clone)]
pub struct AlgebraPresentation {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    generators: Vec<ComplexMatrix>,
    tol: Tolerances,
}

impl AlgebraPresentation {
    /// Closes `{1} ∪ generators ∪ adjoints` under products until the span
    /// stabilizes, orthonormalizing along the way.
    pub fn generate(
        ambient_dim: usize,
        generators: &[ComplexMatrix],
        tol: Tolerances,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::DimensionMismatch("ambient dimension is zero".into()));
        }
        if ambient_dim > MAX_ALGEBRA_AMBIENT_DIM {
            return Err(Error::CapExceeded(format!(
                "ambient dimension {ambient_dim} exceeds the algebra cap {MAX_ALGEBRA_AMBIENT_DIM}"
            )));
        }
        for g in generators {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator has dimension {}, ambient is {ambient_dim}",
                    g.dim()
                )));
            }
        }
        let mut closure_generators = vec![];
        for g in generators {
            closure_generators.push(g.clone());
            closure_generators.push(g.adjoint());
        }

        let mut basis: Vec<ComplexMatrix> = Vec::new();
        let identity = ComplexMatrix::identity(ambient_dim)?;
        let cap = ambient_dim * ambient_dim;
        let insert = |basis: &mut Vec<ComplexMatrix>, m: &ComplexMatrix| -> Result<bool> {
            let mut residual = m.clone();
            // Two projection passes keep the basis orthonormal to machine
            // precision even for nearly dependent inputs.
            for _ in 0..2 {
                for b in basis.iter() {
                    let coeff = trace_inner(b, &residual);
                    residual = residual.sub(&b.scale(coeff));
                }
            }
            let norm = residual.frobenius_norm();
            if norm <= tol.tol_resid * (1.0 + m.frobenius_norm()) {
                return Ok(false);
            }
            if basis.len() + 1 > cap {
                return Err(Error::CapExceeded(format!(
                    "algebra span would exceed dimension {cap}"
                )));
            }
            basis.push(residual.scale(Complex64::new(1.0 / norm, 0.0)));
            Ok(true)
        };

        insert(&mut basis, &identity)?;
        for g in &closure_generators {
            insert(&mut basis, g)?;
        }
        loop {
            let mut grew = false;
            let snapshot = basis.clone();
            for x in &snapshot {
                for y in &snapshot {
                    if insert(&mut basis, &x.mul(y))? {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        Ok(Self {
            ambient_dim,
            basis,
            generators: closure_generators,
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Linear dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Coordinates of `m` in the orthonormal basis plus the projection
    /// residual `‖m − Σ c_k x_k‖_F`.
    pub fn project(&self, m: &ComplexMatrix) -> (Vec<Complex64>, f64) {
        let coords: Vec<Complex64> = self.basis.iter().map(|b| trace_inner(b, m)).collect();
        let mut residual = m.clone();
        for (b, c) in self.basis.iter().zip(&coords) {
            residual = residual.sub(&b.scale(*c));
        }
        (coords, residual.frobenius_norm())
    }

    /// Coordinates of `m`, or `NotInAlgebra` when the projection residual
    /// exceeds `tol_resid · (1 + ‖m‖_F)`.
    pub fn coords_checked(&self, m: &ComplexMatrix) -> Result<Vec<Complex64>> {
        if m.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "element has dimension {}, ambient is {}",
                m.dim(),
                self.ambient_dim
            )));
        }
        let (coords, residual) = self.project(m);
        if residual > self.tol.tol_resid * (1.0 + m.frobenius_norm()) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(coords)
    }

    pub fn element(&self, coords: &[Complex64]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.ambient_dim).expect("dim validated");
        for (b, c) in self.basis.iter().zip(coords) {
            acc = acc.add(&b.scale(*c));
        }
        acc
    }

    /// A random element with standard complex Gaussian coordinates.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let normal = StandardNormal;
        let coords: Vec<Complex64> = (0..self.dim())
            .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
            .collect();
        self.element(&coords)
    }

    /// True when all basis commutators vanish within `tol_resid`.
    pub fn is_commutative(&self) -> bool {
        for (i, x) in self.basis.iter().enumerate() {
            for y in &self.basis[i + 1..] {
                if x.commutator(y).operator_norm() > self.tol.tol_resid {
                    return false;
                }
            }
        }
        true
    }

    /// Structural identity used by space-mismatch checks: same ambient
    /// dimension and bitwise-equal basis.
    pub fn same_presentation(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.basis.len() == other.basis.len()
            && self
                .basis
                .iter()
                .zip(&other.basis)
                .all(|(a, b)| a.entries() == b.entries())
    }

    /// Orthonormal basis of the commutant `{t : tg = gt for all generators}`
    /// inside the ambient matrix algebra.
    fn commutant_basis(&self) -> Vec<ComplexMatrix> {
        let n = self.ambient_dim;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for g in &self.generators {
            for i in 0..n {
                for j in 0..n {
                    let mut row = vec![czero(); n * n];
                    for b in 0..n {
                        row[i * n + b] += g.entry(b, j);
                    }
                    for a in 0..n {
                        row[a * n + j] -= g.entry(i, a);
                    }
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            // No generators: the commutant is everything.
            rows.push(vec![czero(); n * n]);
        }
        gram_null_space(n * n, &rows, self.tol.tol_resid)
            .into_iter()
            .map(|v| ComplexMatrix::new(n, v).expect("null vectors are finite"))
            .collect()
    }
}

fn trace_inner(b: &ComplexMatrix, m: &ComplexMatrix) -> Complex64 {
    // <m, b> = tr(b* m) for the coefficient of m along b.
    b.entries()
        .iter()
        .zip(m.entries())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// A state on a presented algebra: a hermitian, positive semidefinite,
/// unit-trace density matrix evaluated through `α(x) = tr(ρx)`.
#[derive(Debug, Clone)]
pub struct State {
    algebra: Arc<AlgebraPresentation>,
    density: ComplexMatrix,
}

impl State {
    pub fn new(algebra: Arc<AlgebraPresentation>, density: ComplexMatrix) -> Result<Self> {
        let tol = algebra.tol;
        if density.dim() != algebra.ambient_dim {
            return Err(Error::InvalidState(format!(
                "density has dimension {}, ambient is {}",
                density.dim(),
                algebra.ambient_dim
            )));
        }
        let herm = density.sub(&density.adjoint()).operator_norm();
        if herm > tol.tol_resid * (1.0 + density.operator_norm()) {
            return Err(Error::InvalidState(format!(
                "density is not hermitian (residual {herm:.3e})"
            )));
        }
        let eig = hermitian_eigen(&density);
        let min = eig.values.last().copied().unwrap_or(0.0);
        let max = eig.values.first().copied().unwrap_or(0.0);
        if min < -tol.tol_resid * (1.0 + max.abs()) {
            return Err(Error::InvalidState(format!(
                "density has negative eigenvalue {min:.3e}"
            )));
        }
        let trace = density.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > tol.tol_resid * 10.0 {
            return Err(Error::InvalidState(format!(
                "density trace is {trace}, expected 1"
            )));
        }
        Ok(Self { algebra, density })
    }

    /// The vector state `x ↦ <xv, v>/‖v‖²` as a rank-one density.
    pub fn vector_state(algebra: Arc<AlgebraPresentation>, v: &[Complex64]) -> Result<Self> {
        let n = algebra.ambient_dim;
        if v.len() != n {
            return Err(Error::InvalidState(format!(
                "vector has length {}, ambient is {n}",
                v.len()
            )));
        }
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::InvalidState(
                "vector state needs a nonzero vector".into(),
            ));
        }
        let density = ComplexMatrix::from_fn(n, |i, j| v[i] * v[j].conj() / norm_sq)?;
        Self::new(algebra, density)
    }

    pub fn algebra(&self) -> &Arc<AlgebraPresentation> {
        &self.algebra
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    /// `α(x) = tr(ρx)`.
    pub fn evaluate(&self, x: &ComplexMatrix) -> Complex64 {
        self.density.mul(x).trace()
    }

    /// Values on the algebra basis, the fingerprint of the functional.
    pub fn functional_values(&self) -> Vec<Complex64> {
        self.algebra
            .basis
            .iter()
            .map(|b| self.evaluate(b))
            .collect()
    }
}

/// The GNS data of a state: Hilbert dimension, the representation matrix of
/// every algebra basis element, and the cyclic vector implementing the state.
#[derive(Debug, Clone)]
pub struct GNSRep {
    source: State,
    hilbert_dim: usize,
    rep: Vec<ComplexMatrix>,
    cyclic: Vec<Complex64>,
}

impl GNSRep {
    pub fn source(&self) -> &State {
        &self.source
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Representation matrices, parallel to the algebra basis.
    pub fn rep(&self) -> &[ComplexMatrix] {
        &self.rep
    }

    pub fn cyclic(&self) -> &[Complex64] {
        &self.cyclic
    }

    /// Image of an arbitrary algebra element, through its coordinates.
    pub fn represent(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.source.algebra.coords_checked(m)?;
        let mut acc = ComplexMatrix::zeros(self.hilbert_dim).expect("dim validated");
        for (r, c) in self.rep.iter().zip(&coords) {
            acc = acc.add(&r.scale(*c));
        }
        Ok(acc)
    }

    /// Images of the algebra's generator set; enough to decide commutants
    /// and intertwiners, and much smaller than the full basis.
    fn generator_images(&self) -> Vec<ComplexMatrix> {
        let algebra = &self.source.algebra;
        if algebra.generators.is_empty() {
            return vec![ComplexMatrix::identity(self.hilbert_dim).expect("dim validated")];
        }
        algebra
            .generators
            .iter()
            .map(|g| {
                let (coords, _) = algebra.project(g);
                let mut acc = ComplexMatrix::zeros(self.hilbert_dim).expect("dim validated");
                for (r, c) in self.rep.iter().zip(&coords) {
                    acc = acc.add(&r.scale(*c));
                }
                acc
            })
            .collect()
    }

    /// Worst deviation of `π` from a unital *-homomorphism over basis pairs.
    pub fn homomorphism_residual(&self) -> f64 {
        let algebra = &self.source.algebra;
        let mut worst: f64 = 0.0;
        let (id_coords, _) =
            algebra.project(&ComplexMatrix::identity(algebra.ambient_dim).expect("dim validated"));
        let mut unit = ComplexMatrix::zeros(self.hilbert_dim).expect("dim validated");
        for (r, c) in self.rep.iter().zip(&id_coords) {
            unit = unit.add(&r.scale(*c));
        }
        worst = worst.max(
            unit.sub(&ComplexMatrix::identity(self.hilbert_dim).expect("dim validated"))
                .operator_norm(),
        );
        for (i, x) in algebra.basis.iter().enumerate() {
            // π(x*) = π(x)*.
            let (adj_coords, _) = algebra.project(&x.adjoint());
            let mut adj_img = ComplexMatrix::zeros(self.hilbert_dim).expect("dim validated");
            for (r, c) in self.rep.iter().zip(&adj_coords) {
                adj_img = adj_img.add(&r.scale(*c));
            }
            worst = worst.max(adj_img.sub(&self.rep[i].adjoint()).operator_norm());
            for (j, y) in algebra.basis.iter().enumerate() {
                let (prod_coords, _) = algebra.project(&x.mul(y));
                let mut prod_img = ComplexMatrix::zeros(self.hilbert_dim).expect("dim validated");
                for (r, c) in self.rep.iter().zip(&prod_coords) {
                    prod_img = prod_img.add(&r.scale(*c));
                }
                worst = worst.max(prod_img.sub(&self.rep[i].mul(&self.rep[j])).operator_norm());
            }
        }
        worst
    }

    /// `max_k |<π(x_k)·ξ, ξ> − α(x_k)|`: how well the cyclic vector
    /// implements the state.
    pub fn state_recovery_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, b) in self.rep.iter().zip(self.source.algebra.basis.iter()) {
            let image = r.apply(&self.cyclic);
            let mut val = czero();
            for i in 0..self.hilbert_dim {
                val += self.cyclic[i].conj() * image[i];
            }
            worst = worst.max((val - self.source.evaluate(b)).norm());
        }
        worst
    }

    /// Rank of `span{π(x_k)·ξ}`: equals the Hilbert dimension exactly when
    /// the vector is cyclic.
    pub fn cyclic_span_rank(&self) -> usize {
        let r = self.hilbert_dim;
        let rows: Vec<Vec<Complex64>> = self.rep.iter().map(|m| m.apply(&self.cyclic)).collect();
        let null = gram_null_space(r, &conjugate_rows(&rows), self.source.algebra.tol.tol_resid);
        r - null.len()
    }
}

fn conjugate_rows(rows: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    // The span of vectors v equals the orthocomplement of the null space of
    // the rows conj(v), since conj(v)·x = <x, v>... the Gram trick wants
    // rows whose dot with x vanishes exactly when x ⟂ span.
    rows.iter()
        .map(|v| v.iter().map(|z| z.conj()).collect())
        .collect()
}

/// Builds the GNS representation of a state: the Gram matrix
/// `G[i][j] = α(x_i* x_j)` on the algebra basis, its numerical-rank quotient,
/// and left multiplication compressed to that quotient.
pub fn gns(alpha: &State) -> Result<GNSRep> {
    let algebra = alpha.algebra.clone();
    let d = algebra.dim();
    let n = algebra.ambient_dim;
    let tol = algebra.tol;

    // Gram matrix of the state's inner product.
    let mut gram = vec![czero(); d * d];
    for i in 0..d {
        for j in 0..d {
            gram[i * d + j] = alpha.evaluate(&algebra.basis[i].adjoint().mul(&algebra.basis[j]));
        }
    }
    let eig = crate::linop::hermitian_eigen_raw(d, gram.clone());
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::InvalidState(
            "state annihilates the whole algebra".into(),
        ));
    }
    let cutoff = tol.tol_resid * lambda_max;
    let kept: Vec<(f64, &Vec<Complex64>)> = eig
        .values
        .iter()
        .zip(eig.vectors.iter())
        .filter(|(&l, _)| l > cutoff)
        .map(|(&l, v)| (l, v))
        .collect();
    let r = kept.len();
    if r > crate::linop::MAX_DIM {
        return Err(Error::CapExceeded(format!(
            "GNS dimension {r} exceeds the matrix cap {}",
            crate::linop::MAX_DIM
        )));
    }

    // Orthonormal basis of the quotient: u_a = v_a / sqrt(λ_a).
    let quotient: Vec<Vec<Complex64>> = kept
        .iter()
        .map(|(l, v)| v.iter().map(|z| z / l.sqrt()).collect())
        .collect();

    let gram_apply = |u: &[Complex64]| -> Vec<Complex64> {
        (0..d)
            .map(|i| (0..d).map(|j| gram[i * d + j] * u[j]).sum())
            .collect()
    };

    // Coordinates of every product x_i · x_j.
    let mut prod_coords = vec![vec![czero(); d]; d * d];
    for i in 0..d {
        for j in 0..d {
            let (coords, _) = algebra.project(&algebra.basis[i].mul(&algebra.basis[j]));
            prod_coords[i * d + j] = coords;
        }
    }

    // π(x_i)[a][b] = <L_i u_b, u_a>_G.
    let mut rep = Vec::with_capacity(d);
    for i in 0..d {
        let mut entries = vec![czero(); r * r];
        for b in 0..r {
            // L_i u_b in basis coordinates.
            let mut lu = vec![czero(); d];
            for j in 0..d {
                let c = quotient[b][j];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                for (slot, pc) in lu.iter_mut().zip(&prod_coords[i * d + j]) {
                    *slot += c * pc;
                }
            }
            let glu = gram_apply(&lu);
            for a in 0..r {
                let mut val = czero();
                for k in 0..d {
                    val += quotient[a][k].conj() * glu[k];
                }
                entries[a * r + b] = val;
            }
        }
        rep.push(ComplexMatrix::new(r, entries)?);
    }

    // Cyclic vector: the class of the identity.
    let (id_coords, _) = algebra.project(&ComplexMatrix::identity(n).expect("dim validated"));
    let gid = gram_apply(&id_coords);
    let cyclic: Vec<Complex64> = (0..r)
        .map(|a| {
            let mut val = czero();
            for k in 0..d {
                val += quotient[a][k].conj() * gid[k];
            }
            val
        })
        .collect();

    Ok(GNSRep {
        source: alpha.clone(),
        hilbert_dim: r,
        rep,
        cyclic,
    })
}

/// Dimension of the commutant of the represented algebra, computed as the
/// null space of the stacked system `t·π(g) − π(g)·t = 0` over generators.
pub fn commutant_dimension(rep: &GNSRep, tol: &Tolerances) -> usize {
    let r = rep.hilbert_dim;
    let images = rep.generator_images();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for g in &images {
        for img in [g.clone(), g.adjoint()] {
            for i in 0..r {
                for j in 0..r {
                    let mut row = vec![czero(); r * r];
                    for b in 0..r {
                        row[i * r + b] += img.entry(b, j);
                    }
                    for a in 0..r {
                        row[a * r + j] -= img.entry(i, a);
                    }
                    rows.push(row);
                }
            }
        }
    }
    gram_null_space(r * r, &rows, tol.tol_resid).len()
}

/// A representation is irreducible exactly when its commutant is the
/// scalars.
pub fn is_irreducible(rep: &GNSRep, tol: &Tolerances) -> bool {
    commutant_dimension(rep, tol) == 1
}

/// Basis of the intertwiner space `{t : t·π₂(g) = π₁(g)·t}`.
fn intertwiner_basis(r1: &GNSRep, r2: &GNSRep, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let r = r1.hilbert_dim;
    debug_assert_eq!(r, r2.hilbert_dim);
    let img1 = r1.generator_images();
    let img2 = r2.generator_images();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (g1, g2) in img1.iter().zip(&img2) {
        for (m1, m2) in [(g1.clone(), g2.clone()), (g1.adjoint(), g2.adjoint())] {
            // (t·m2 − m1·t)[i][j] as a row over vec(t).
            for i in 0..r {
                for j in 0..r {
                    let mut row = vec![czero(); r * r];
                    for b in 0..r {
                        row[i * r + b] += m2.entry(b, j);
                    }
                    for a in 0..r {
                        row[a * r + j] -= m1.entry(i, a);
                    }
                    rows.push(row);
                }
            }
        }
    }
    gram_null_space(r * r, &rows, tol.tol_resid)
        .into_iter()
        .map(|v| ComplexMatrix::new(r, v).expect("null vectors finite"))
        .collect()
}

/// Searches the intertwiner space for an invertible element by maximizing
/// the smallest singular value over the basis and a fixed-seed random
/// sample; returns the best candidate when its relative smallest singular
/// value clears `tol_resid`. Heuristic by nature, deterministic by seed.
fn invertible_intertwiner(r1: &GNSRep, r2: &GNSRep, tol: &Tolerances) -> Option<ComplexMatrix> {
    let basis = intertwiner_basis(r1, r2, tol);
    if basis.is_empty() {
        return None;
    }
    let r = r1.hilbert_dim;
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let consider = |t: &ComplexMatrix, best: &mut Option<(f64, ComplexMatrix)>| {
        let gram = t.adjoint().mul(t);
        let eig = hermitian_eigen(&gram);
        let smax = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        if smax == 0.0 {
            return;
        }
        let smin = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
        let score = smin / smax;
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            *best = Some((score, t.clone()));
        }
    };
    for t in &basis {
        consider(t, &mut best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INTERTWINER_SEED);
    let normal = StandardNormal;
    for _ in 0..64 {
        let mut combo = ComplexMatrix::zeros(r).expect("dim validated");
        for t in &basis {
            let c = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            combo = combo.add(&t.scale(c));
        }
        consider(&combo, &mut best);
    }
    match best {
        Some((score, t)) if score > tol.tol_resid => Some(t),
        _ => None,
    }
}

/// Two GNS representations of the same algebra are equivalent when their
/// Hilbert dimensions agree and an invertible intertwiner exists.
pub fn are_equivalent(r1: &GNSRep, r2: &GNSRep, tol: &Tolerances) -> Result<bool> {
    if !r1.source.algebra.same_presentation(&r2.source.algebra) {
        return Err(Error::AlgebraMismatch);
    }
    if r1.hilbert_dim != r2.hilbert_dim {
        return Ok(false);
    }
    Ok(invertible_intertwiner(r1, r2, tol).is_some())
}

/// Deterministic sample of pure states.
///
/// Commutative algebras have finitely many pure states (their characters);
/// these come from the joint eigenspaces of a generic hermitian element and
/// the result is the full list, capped at `count`. Otherwise eigenspaces of
/// a generic hermitian element of the commutant carry irreducible
/// subrepresentations, and unit vectors drawn there give pure states; each
/// sampled state is verified through its GNS commutant.
pub fn sample_pure_states(
    algebra: &Arc<AlgebraPresentation>,
    count: usize,
    seed: u64,
) -> Result<Vec<State>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if algebra.is_commutative() {
        sample_characters(algebra, count, &mut rng)
    } else {
        sample_vector_states(algebra, count, &mut rng)
    }
}

fn sample_characters(
    algebra: &Arc<AlgebraPresentation>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<State>> {
    let tol = algebra.tol;
    'attempt: for _ in 0..8 {
        let w = algebra.random_element(rng);
        let h = w.add(&w.adjoint()).scale(Complex64::new(0.5, 0.0));
        let eig = hermitian_eigen(&h);
        let scale = 1.0 + eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Group eigenvectors into joint eigenspaces of the algebra.
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (idx, &v) in eig.values.iter().enumerate() {
            match groups
                .iter_mut()
                .find(|(rep, _)| (rep - v).abs() <= tol.tol_eig * scale)
            {
                Some((_, members)) => members.push(idx),
                None => groups.push((v, vec![idx])),
            }
        }
        let mut states = Vec::new();
        for (_, members) in &groups {
            let v = &eig.vectors[members[0]];
            let state = State::vector_state(algebra.clone(), v)?;
            states.push(state);
        }
        // Distinct atoms must give distinct functionals; collisions mean the
        // random element failed to separate, so draw again.
        for i in 0..states.len() {
            for j in 0..i {
                let (fi, fj) = (states[i].functional_values(), states[j].functional_values());
                let close = fi
                    .iter()
                    .zip(&fj)
                    .all(|(a, b)| (a - b).norm() <= 100.0 * tol.tol_resid);
                if close {
                    continue 'attempt;
                }
            }
        }
        for (index, state) in states.iter().enumerate() {
            let rep = gns(state)?;
            if !is_irreducible(&rep, &tol) {
                let dim = commutant_dimension(&rep, &tol);
                return Err(Error::ImpureState {
                    index,
                    commutant_dim: dim,
                });
            }
        }
        states.sort_by(|a, b| {
            let (fa, fb) = (a.functional_values(), b.functional_values());
            fa.iter()
                .map(|z| (z.re, z.im))
                .partial_cmp(fb.iter().map(|z| (z.re, z.im)))
                .expect("finite functionals")
        });
        states.truncate(count);
        return Ok(states);
    }
    Err(Error::SamplingFailed(
        "could not separate the characters of a commutative algebra".into(),
    ))
}

fn sample_vector_states(
    algebra: &Arc<AlgebraPresentation>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<State>> {
    let tol = algebra.tol;
    let commutant = algebra.commutant_basis();
    let normal = StandardNormal;
    'attempt: for _ in 0..8 {
        // Generic hermitian element of the commutant; its eigenspaces are
        // invariant and carry irreducible subrepresentations.
        let n = algebra.ambient_dim;
        let mut w = ComplexMatrix::zeros(n).expect("dim validated");
        for t in &commutant {
            let c = Complex64::new(normal.sample(rng), normal.sample(rng));
            w = w.add(&t.scale(c));
        }
        let k = w.add(&w.adjoint()).scale(Complex64::new(0.5, 0.0));
        let eig = hermitian_eigen(&k);
        let scale = 1.0 + eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (idx, &v) in eig.values.iter().enumerate() {
            match groups
                .iter_mut()
                .find(|(rep, _)| (rep - v).abs() <= tol.tol_eig * scale)
            {
                Some((_, members)) => members.push(idx),
                None => groups.push((v, vec![idx])),
            }
        }
        let mut states: Vec<State> = Vec::new();
        let mut failures = 0usize;
        while states.len() < count {
            let group = &groups[states.len() % groups.len()].1;
            let v: Vec<Complex64> = {
                let mut acc = vec![czero(); algebra.ambient_dim];
                for &idx in group {
                    let c = Complex64::new(normal.sample(rng), normal.sample(rng));
                    for (slot, x) in acc.iter_mut().zip(&eig.vectors[idx]) {
                        *slot += c * x;
                    }
                }
                acc
            };
            let state = State::vector_state(algebra.clone(), &v)?;
            let rep = gns(&state)?;
            if is_irreducible(&rep, &tol) {
                states.push(state);
            } else {
                failures += 1;
                if failures > 4 {
                    continue 'attempt;
                }
            }
        }
        return Ok(states);
    }
    Err(Error::SamplingFailed(
        "eigenspace sampling kept producing reducible representations".into(),
    ))
}

/// The functional representation: the value sequence `α_i(a)`.
pub fn functional_representation(
    a_elem: &ComplexMatrix,
    states: &[State],
) -> Result<Vec<Complex64>> {
    if let Some(first) = states.first() {
        first.algebra.coords_checked(a_elem)?;
    }
    Ok(states.iter().map(|s| s.evaluate(a_elem)).collect())
}

/// Outcome of the multiplicativity probe for the evaluation map.
#[derive(Debug, Clone, Copy)]
pub struct MultiplicativityCheck {
    pub multiplicative: bool,
    /// Worst `|α(xy) − α(x)·α(y)| / (1 + ‖x‖·‖y‖)` observed.
    pub worst_deviation: f64,
}

/// Probes whether `(xy)↦α(xy)` factors as `α(x)·α(y)` on the given states,
/// over `trials` random pairs drawn from a fixed seed.
pub fn hat_is_multiplicative(
    algebra: &AlgebraPresentation,
    states: &[State],
    trials: usize,
) -> MultiplicativityCheck {
    let tol = algebra.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(INTERTWINER_SEED ^ 0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let x = algebra.random_element(&mut rng);
        let y = algebra.random_element(&mut rng);
        let xy = x.mul(&y);
        let scale = 1.0 + x.operator_norm() * y.operator_norm();
        for s in states {
            let dev = (s.evaluate(&xy) - s.evaluate(&x) * s.evaluate(&y)).norm() / scale;
            worst = worst.max(dev);
        }
    }
    MultiplicativityCheck {
        multiplicative: worst <= tol.tol_resid,
        worst_deviation: worst,
    }
}

/// The pure-state equivalence relation over a finite sample: points are the
/// given states, classes are equivalence classes of their GNS
/// representations. Errors on impure inputs, and on tolerance-induced
/// transitivity failures rather than absorbing them.
pub fn build_ra(states: &[State], tol: &Tolerances) -> Result<FiniteQuantumSpace> {
    let reps: Vec<GNSRep> = states.iter().map(gns).collect::<Result<_>>()?;
    for (index, rep) in reps.iter().enumerate() {
        if !is_irreducible(rep, tol) {
            return Err(Error::ImpureState {
                index,
                commutant_dim: commutant_dimension(rep, tol),
            });
        }
    }
    let m = reps.len();
    let mut related = vec![vec![false; m]; m];
    for i in 0..m {
        related[i][i] = true;
        for j in 0..i {
            let eq = are_equivalent(&reps[i], &reps[j], tol)?;
            related[i][j] = eq;
            related[j][i] = eq;
        }
    }
    for i in 0..m {
        for j in 0..m {
            if !related[i][j] {
                continue;
            }
            for k in 0..m {
                if related[j][k] && !related[i][k] {
                    return Err(Error::EquivalenceNotTransitive(i, j, k));
                }
            }
        }
    }
    let width = if m <= 1 { 1 } else { (m - 1).to_string().len() };
    let mut class_of = std::collections::BTreeMap::new();
    let mut class_names: Vec<Option<String>> = vec![None; m];
    let mut next_class = 0usize;
    for i in 0..m {
        if class_names[i].is_none() {
            let name = format!("c{next_class:0width$}");
            next_class += 1;
            for j in i..m {
                if related[i][j] {
                    class_names[j] = Some(name.clone());
                }
            }
        }
        class_of.insert(
            format!("s{i:0width$}"),
            class_names[i].clone().expect("assigned above"),
        );
    }
    let points: Vec<String> = (0..m).map(|i| format!("s{i:0width$}")).collect();
    FiniteQuantumSpace::new(points, class_of)
}

/// Support of an element over a state sample: the ordered pairs of related
/// states whose GNS matrix coefficient of the element is nonzero beyond
/// `tol_resid · (1 + ‖a‖)`.
pub fn support(
    a_elem: &ComplexMatrix,
    states: &[State],
    tol: &Tolerances,
) -> Result<BTreeSet<(usize, usize)>> {
    if let Some(first) = states.first() {
        first.algebra.coords_checked(a_elem)?;
    }
    let reps: Vec<GNSRep> = states.iter().map(gns).collect::<Result<_>>()?;
    let bound = tol.tol_resid * (1.0 + a_elem.operator_norm());
    let mut pairs = BTreeSet::new();
    for i in 0..reps.len() {
        let pi_a = reps[i].represent(a_elem)?;
        for j in 0..reps.len() {
            let coefficient = if i == j {
                let image = pi_a.apply(reps[i].cyclic());
                let mut val = czero();
                for k in 0..reps[i].hilbert_dim {
                    val += reps[i].cyclic[k].conj() * image[k];
                }
                val
            } else {
                if reps[i].hilbert_dim != reps[j].hilbert_dim {
                    continue;
                }
                let Some(t) = invertible_intertwiner(&reps[i], &reps[j], tol) else {
                    continue;
                };
                let u = unitary_polar_factor(&t);
                let carried = u.apply(reps[j].cyclic());
                let image = pi_a.apply(&carried);
                let mut val = czero();
                for k in 0..reps[i].hilbert_dim {
                    val += reps[i].cyclic[k].conj() * image[k];
                }
                val
            };
            if coefficient.norm() > bound {
                pairs.insert((i, j));
            }
        }
    }
    Ok(pairs)
}

/// The unitary factor of the polar decomposition `t = u·(t*t)^{1/2}`.
fn unitary_polar_factor(t: &ComplexMatrix) -> ComplexMatrix {
    let gram = t.adjoint().mul(t);
    let eig = hermitian_eigen(&gram);
    let r = t.dim();
    // (t*t)^{-1/2} from the eigendecomposition; tiny eigenvalues are left
    // untouched rather than amplified.
    let mut inv_sqrt = ComplexMatrix::zeros(r).expect("dim validated");
    for (lambda, v) in eig.values.iter().zip(eig.vectors.iter()) {
        let l = lambda.max(0.0);
        if l <= 0.0 {
            continue;
        }
        let w = 1.0 / l.sqrt();
        for i in 0..r {
            for j in 0..r {
                *inv_sqrt.entry_mut(i, j) += Complex64::new(w, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    t.mul(&inv_sqrt)
}
