//! Riesz spectral projections, the strongly spectral decomposition
//! `a = Σ (λ_i P_i + N_i)`, operator splitting along a label subset, and
//! invariant-subspace extraction.
//!
//! Projections come from reordered Schur forms with Sylvester-equation block
//! decoupling; Jordan chains and contour integrals are never formed, which
//! keeps defective inputs safe.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::schur::{move_selected_front, schur_decompose, SchurForm};
use crate::linop::{cluster_points, ComplexMatrix, Subspace, Tolerances};
use crate::speccalc::{FiniteSpectralMeasure, SpectralLabel};

/// One spectral cluster of a Schur form: representative value and the
/// diagonal positions it owns.
#[derive(Debug, Clone)]
pub(crate) struct ClusterGroup {
    pub value: Complex64,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct SchurClusters {
    pub form: SchurForm,
    pub groups: Vec<ClusterGroup>,
}

/// Schur form plus single-linkage clustering of its diagonal at radius
/// `tol_eig · (1 + ‖a‖)`, groups sorted by (re, im) of the representative.
pub(crate) fn schur_clusters(a: &ComplexMatrix, tol: &Tolerances) -> Result<SchurClusters> {
    let form = schur_decompose(a)?;
    let raw = form.eigenvalues();
    let radius = tol.tol_eig * (1.0 + a.operator_norm());
    let groups = group_positions(&raw, radius);
    Ok(SchurClusters { form, groups })
}

fn group_positions(points: &[Complex64], radius: f64) -> Vec<ClusterGroup> {
    let clusters = cluster_points(points, radius);
    // Re-derive membership: nearest representative wins; representatives are
    // farther than `radius` apart by construction, so assignment by nearest
    // cluster value reproduces the linkage classes.
    let mut groups: Vec<ClusterGroup> = clusters
        .iter()
        .map(|c| ClusterGroup {
            value: c.value,
            positions: Vec::new(),
        })
        .collect();
    for (pos, z) in points.iter().enumerate() {
        let (best, _) = groups
            .iter()
            .enumerate()
            .map(|(i, g)| (i, (g.value - z).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"))
            .expect("at least one cluster");
        groups[best].positions.push(pos);
    }
    groups.retain(|g| !g.positions.is_empty());
    for g in &mut groups {
        let sum: Complex64 = g.positions.iter().map(|&p| points[p]).sum();
        g.value = sum / g.positions.len() as f64;
    }
    groups.sort_by(|x, y| {
        (x.value.re, x.value.im)
            .partial_cmp(&(y.value.re, y.value.im))
            .expect("finite eigenvalues")
    });
    groups
}

/// One strongly spectral part `j(y) = λ·P + N`: an eigenvalue times a Riesz
/// idempotent plus a commuting nilpotent.
#[derive(Debug, Clone)]
pub struct StronglySpectralBlock {
    pub label: String,
    pub eigenvalue: Complex64,
    pub projection: ComplexMatrix,
    pub nilpotent: ComplexMatrix,
    pub nilpotency_index: usize,
    pub rank: usize,
    pub hermitian: bool,
    pub residuals: BlockResiduals,
}

/// Measured residuals of one block's structural identities.
#[derive(Debug, Clone, Copy)]
pub struct BlockResiduals {
    /// `‖P² − P‖`
    pub idempotency: f64,
    /// `‖aP − Pa‖`
    pub commutation: f64,
    /// `‖N^rank(P)‖`
    pub nilpotency: f64,
}

/// A full strongly spectral decomposition with its spectral measure.
#[derive(Debug, Clone)]
pub struct DunfordDecomposition {
    pub blocks: Vec<StronglySpectralBlock>,
    pub measure: FiniteSpectralMeasure,
    /// Set when clusters closer than ten cluster radii had to be merged;
    /// the decomposition is still returned, over the merged clusters.
    pub merged_clusters: bool,
    /// `‖a − Σ (λ_i P_i + N_i)‖ / ‖a‖`.
    pub reconstruction_residual: f64,
}

/// Splits the spectrum of `a` into clusters and produces one strongly
/// spectral block per cluster. Projections are Riesz idempotents: they
/// commute with `a`, annihilate each other, and sum to the identity; they
/// are hermitian only when the cluster subspace is reducing, and the flag
/// records what was actually measured.
pub fn dunford_decompose(a: &ComplexMatrix, tol: &Tolerances) -> Result<DunfordDecomposition> {
    let n = a.dim();
    let norm = a.operator_norm();
    let radius = tol.tol_eig * (1.0 + norm);
    let clusters = schur_clusters(a, tol)?;
    let (groups, merged_clusters) = merge_close_groups(clusters.groups, 10.0 * radius);

    let identity = ComplexMatrix::identity(n).expect("dim validated");
    let mut blocks = Vec::with_capacity(groups.len());
    let mut labels = Vec::new();
    let mut idempotents = Vec::new();
    let mut hermitian_flags = Vec::new();

    for (index, group) in groups.iter().enumerate() {
        let projection = if group.positions.len() == n {
            identity.clone()
        } else {
            riesz_projection(&clusters.form, &group.positions)?
        };
        let lambda = group.value;
        let nilpotent = a.sub(&identity.scale(lambda)).mul(&projection);
        let rank = group.positions.len();

        let nilp_residual = nilpotent.pow(rank).operator_norm();
        let mut nilpotency_index = rank;
        let mut power = ComplexMatrix::identity(n).expect("dim validated");
        for j in 1..=rank {
            power = power.mul(&nilpotent);
            if power.operator_norm() <= tol.tol_resid * (1.0 + norm).powi(j as i32) {
                nilpotency_index = j;
                break;
            }
        }

        let idem_residual = projection.mul(&projection).sub(&projection).operator_norm();
        let comm_residual = a.mul(&projection).sub(&projection.mul(a)).operator_norm();
        let herm = projection.sub(&projection.adjoint()).operator_norm()
            <= tol.tol_resid * (1.0 + projection.operator_norm());

        let label = format!("y{index}");
        labels.push(SpectralLabel {
            name: label.clone(),
            value: lambda,
        });
        idempotents.push(projection.clone());
        hermitian_flags.push(herm);
        blocks.push(StronglySpectralBlock {
            label,
            eigenvalue: lambda,
            projection,
            nilpotent,
            nilpotency_index,
            rank,
            hermitian: herm,
            residuals: BlockResiduals {
                idempotency: idem_residual,
                commutation: comm_residual,
                nilpotency: nilp_residual,
            },
        });
    }

    let mut recon = ComplexMatrix::zeros(n).expect("dim validated");
    for b in &blocks {
        recon = recon
            .add(&b.projection.scale(b.eigenvalue))
            .add(&b.nilpotent);
    }
    let reconstruction_residual = if norm > 0.0 {
        recon.sub(a).operator_norm() / norm
    } else {
        recon.operator_norm()
    };

    let measure = FiniteSpectralMeasure::new(labels, idempotents, hermitian_flags)?;
    Ok(DunfordDecomposition {
        blocks,
        measure,
        merged_clusters,
        reconstruction_residual,
    })
}

/// Merges cluster groups whose representatives fall within `gap`, repeating
/// until stable. Jordan structure is discontinuous, so close clusters are
/// merged and flagged rather than resolved with false precision.
fn merge_close_groups(mut groups: Vec<ClusterGroup>, gap: f64) -> (Vec<ClusterGroup>, bool) {
    let mut merged_any = false;
    loop {
        let mut merged = false;
        'outer: for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                if (groups[i].value - groups[j].value).norm() < gap {
                    let other = groups.remove(j);
                    let gi = &mut groups[i];
                    let wi = gi.positions.len() as f64;
                    let wj = other.positions.len() as f64;
                    gi.value = (gi.value * wi + other.value * wj) / (wi + wj);
                    gi.positions.extend(other.positions);
                    gi.positions.sort_unstable();
                    merged = true;
                    merged_any = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    groups.sort_by(|x, y| {
        (x.value.re, x.value.im)
            .partial_cmp(&(y.value.re, y.value.im))
            .expect("finite eigenvalues")
    });
    (groups, merged_any)
}

/// Riesz projection onto the invariant subspace of the selected diagonal
/// positions: reorder them to the front, then decouple the leading block by
/// solving the triangular Sylvester equation `T₁₁ Y − Y T₂₂ = T₁₂`. In the
/// reordered Schur basis the projection is `[[I, Y], [0, 0]]`.
fn riesz_projection(form: &SchurForm, positions: &[usize]) -> Result<ComplexMatrix> {
    let n = form.t.dim();
    let mut reordered = form.clone();
    let mut selected = vec![false; n];
    for &p in positions {
        selected[p] = true;
    }
    move_selected_front(&mut reordered, &selected);
    let k = positions.len();
    let m = n - k;

    let t11 = submatrix(&reordered.t, 0, 0, k, k);
    let t22 = submatrix(&reordered.t, k, k, m, m);
    let t12 = submatrix(&reordered.t, 0, k, k, m);
    let y = solve_triangular_sylvester(&t11, &t22, &t12)?;

    // P = Q [[I, Y], [0, 0]] Q*.
    let q = &reordered.q;
    let mut inner = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..k {
        inner[i][i] = Complex64::new(1.0, 0.0);
        for j in 0..m {
            inner[i][k + j] = y[i][j];
        }
    }
    let mut qp = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..k {
                acc += q.entry(i, l) * inner[l][j];
            }
            qp[i][j] = acc;
        }
    }
    ComplexMatrix::from_fn(n, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..n {
            acc += qp[i][l] * q.entry(j, l).conj();
        }
        acc
    })
}

fn submatrix(
    t: &ComplexMatrix,
    row: usize,
    col: usize,
    rows: usize,
    cols: usize,
) -> Vec<Vec<Complex64>> {
    (0..rows)
        .map(|i| (0..cols).map(|j| t.entry(row + i, col + j)).collect())
        .collect()
}

/// Solves `T₁₁ Y − Y T₂₂ = C` for upper-triangular `T₁₁` (k×k) and `T₂₂`
/// (m×m) with disjoint diagonals, column by column with back-substitution.
fn solve_triangular_sylvester(
    t11: &[Vec<Complex64>],
    t22: &[Vec<Complex64>],
    c: &[Vec<Complex64>],
) -> Result<Vec<Vec<Complex64>>> {
    let k = t11.len();
    let m = t22.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); m]; k];
    for j in 0..m {
        // rhs_j = C[:, j] + Σ_{i<j} Y[:, i] · T₂₂[i][j]
        let mut rhs: Vec<Complex64> = (0..k).map(|r| c[r][j]).collect();
        for i in 0..j {
            let w = t22[i][j];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..k {
                rhs[r] += y[r][i] * w;
            }
        }
        // (T₁₁ − T₂₂[j][j] I) y_j = rhs, upper triangular.
        let shift = t22[j][j];
        for r in (0..k).rev() {
            let mut acc = rhs[r];
            for s in (r + 1)..k {
                acc -= t11[r][s] * y[s][j];
            }
            let pivot = t11[r][r] - shift;
            if pivot.norm() == 0.0 {
                return Err(Error::PreconditionViolated(
                    "Sylvester pivot vanished: cluster diagonals overlap".into(),
                ));
            }
            y[r][j] = acc / pivot;
        }
    }
    Ok(y)
}

/// The complementary pair `b = a·P_subset`, `c = a·(1 − P_subset)`.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

/// Splits `a` along a subset of spectral labels: `b` collects the strongly
/// spectral parts of the subset, `c` the rest, so `a = b + c` and
/// `bc = cb = 0` up to the measure's residuals.
pub fn split(
    a: &ComplexMatrix,
    measure: &FiniteSpectralMeasure,
    subset: &BTreeSet<String>,
) -> Result<SplitPair> {
    if measure.ambient_dim() != a.dim() {
        return Err(Error::DimensionMismatch(
            "measure ambient dimension differs from operator".into(),
        ));
    }
    for name in subset {
        if measure.idempotent_for(name).is_none() {
            return Err(Error::LabelMismatch(name.clone()));
        }
    }
    let n = a.dim();
    let mut p = ComplexMatrix::zeros(n).expect("dim validated");
    for label in measure.labels() {
        if subset.contains(&label.name) {
            p = p.add(
                measure
                    .idempotent_for(&label.name)
                    .expect("label checked above"),
            );
        }
    }
    let b = a.mul(&p);
    let c = a.sub(&b);
    Ok(SplitPair { b, c })
}

/// Relative leakage of a subspace under an operator:
/// `‖(1 − P_S)·x·P_S‖ / ‖x‖`. Zero means `x(S) ⊆ S`.
pub fn invariance_residual(x: &ComplexMatrix, s: &Subspace) -> f64 {
    let norm = x.operator_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let p = s.projector();
    let identity = ComplexMatrix::identity(x.dim()).expect("dim validated");
    identity.sub(&p).mul(x).mul(&p).operator_norm() / norm
}

/// For nonzero `b`, `c` with `bc ≈ 0`: the kernel of `b` and the closed
/// range of `c` are nontrivial subspaces invariant under both operators.
pub fn common_invariant_subspace(
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(Subspace, Subspace)> {
    if b.dim() != c.dim() {
        return Err(Error::DimensionMismatch(
            "operands must share a dimension".into(),
        ));
    }
    let nb = b.operator_norm();
    let nc = c.operator_norm();
    if nb == 0.0 || nc == 0.0 {
        return Err(Error::PreconditionViolated(
            "both operators must be nonzero".into(),
        ));
    }
    let product = b.mul(c).operator_norm();
    if product > tol.tol_resid * nb * nc {
        return Err(Error::PreconditionViolated(format!(
            "‖bc‖ = {product:.3e} exceeds {:.3e}",
            tol.tol_resid * nb * nc
        )));
    }
    let s1 = b.kernel(tol)?;
    let s2 = c.range_closure(tol)?;
    Ok((s1, s2))
}

/// A nontrivial invariant subspace of any non-scalar operator with
/// `dim ≥ 2`:
///
/// 1. two or more spectral clusters — the range of the first cluster's
///    Riesz projection;
/// 2. one cluster `λ` but `a ≠ λ·1` — the kernel of `a − λ` (the shifted
///    operator is nilpotent at this tolerance), falling back to the leading
///    Schur vector when that kernel is numerically degenerate;
/// 3. `a = λ·1` — every line is invariant; the first coordinate line is the
///    deterministic choice.
pub fn invariant_subspace(a: &ComplexMatrix, tol: &Tolerances) -> Result<Subspace> {
    let n = a.dim();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let decomposition = dunford_decompose(a, tol)?;
    if decomposition.blocks.len() >= 2 {
        return decomposition.blocks[0].projection.range_closure(tol);
    }
    let lambda = decomposition.blocks[0].eigenvalue;
    let identity = ComplexMatrix::identity(n).expect("dim validated");
    let shifted = a.sub(&identity.scale(lambda));
    if shifted.operator_norm() <= tol.tol_resid * (1.0 + a.operator_norm()) {
        return Ok(Subspace::coordinate(n, 0));
    }
    let kernel = shifted.kernel(tol)?;
    if kernel.rank() > 0 && kernel.rank() < n {
        return Ok(kernel);
    }
    // The cluster is numerically nilpotent only marginally; the leading
    // Schur vector always spans an invariant line.
    let form = schur_decompose(a)?;
    Subspace::from_columns(n, vec![form.q.column(0)], tol.tol_ortho)
}
