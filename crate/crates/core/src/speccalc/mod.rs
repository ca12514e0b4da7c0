//! Numerical range, finite spectral measures, the spectral-integral form of
//! the functional calculus, and the claims auditor.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::linop::{hermitian_eigen, ComplexMatrix, Tolerances};

/// A labeled point of the finite spectrum: an opaque name plus the complex
/// value the label evaluates to.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLabel {
    pub name: String,
    pub value: Complex64,
}

/// A labeled family of mutually annihilating idempotents summing to the
/// identity. Idempotents need not be hermitian; each one's hermitian flag is
/// recorded honestly and audited rather than assumed.
#[derive(Debug, Clone)]
pub struct FiniteSpectralMeasure {
    labels: Vec<SpectralLabel>,
    idempotents: Vec<ComplexMatrix>,
    hermitian: Vec<bool>,
}

/// Worst-case residuals of the three structural identities of a spectral
/// measure.
#[derive(Debug, Clone, Copy)]
pub struct MeasureResiduals {
    pub idempotency: f64,
    pub annihilation: f64,
    pub completeness: f64,
}

impl FiniteSpectralMeasure {
    pub fn new(
        labels: Vec<SpectralLabel>,
        idempotents: Vec<ComplexMatrix>,
        hermitian: Vec<bool>,
    ) -> Result<Self> {
        if labels.len() != idempotents.len() || labels.len() != hermitian.len() {
            return Err(Error::DimensionMismatch(
                "labels, idempotents, and flags must align".into(),
            ));
        }
        if labels.is_empty() {
            return Err(Error::InvalidMatrix(
                "a spectral measure needs at least one label".into(),
            ));
        }
        let dim = idempotents[0].dim();
        if idempotents.iter().any(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "idempotents must share one ambient dimension".into(),
            ));
        }
        let mut names: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != labels.len() {
            return Err(Error::InvalidMatrix("duplicate spectral labels".into()));
        }
        Ok(Self {
            labels,
            idempotents,
            hermitian,
        })
    }

    pub fn labels(&self) -> &[SpectralLabel] {
        &self.labels
    }

    pub fn idempotents(&self) -> &[ComplexMatrix] {
        &self.idempotents
    }

    pub fn hermitian_flags(&self) -> &[bool] {
        &self.hermitian
    }

    pub fn ambient_dim(&self) -> usize {
        self.idempotents[0].dim()
    }

    pub fn idempotent_for(&self, name: &str) -> Option<&ComplexMatrix> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .map(|i| &self.idempotents[i])
    }

    /// Worst residuals of `E_i² = E_i`, `E_i E_j = 0`, and `Σ E_i = 1`.
    pub fn residuals(&self) -> MeasureResiduals {
        let n = self.ambient_dim();
        let mut idem: f64 = 0.0;
        let mut annih: f64 = 0.0;
        for (i, e) in self.idempotents.iter().enumerate() {
            idem = idem.max(e.mul(e).sub(e).operator_norm());
            for (j, f) in self.idempotents.iter().enumerate() {
                if i != j {
                    annih = annih.max(e.mul(f).operator_norm());
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(n).expect("dim validated");
        for e in &self.idempotents {
            sum = sum.add(e);
        }
        let completeness = sum
            .sub(&ComplexMatrix::identity(n).expect("dim validated"))
            .operator_norm();
        MeasureResiduals {
            idempotency: idem,
            annihilation: annih,
            completeness,
        }
    }

    /// Structural identities within `tol_resid`, scaled by the largest
    /// idempotent norm.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let r = self.residuals();
        let scale = 1.0
            + self
                .idempotents
                .iter()
                .map(ComplexMatrix::operator_norm)
                .fold(0.0, f64::max)
                .powi(2);
        let bound = tol.tol_resid * scale;
        if r.idempotency > bound || r.annihilation > bound || r.completeness > bound {
            return Err(Error::InvalidMatrix(format!(
                "spectral measure residuals exceed tolerance: idem {:.3e}, annihilation {:.3e}, completeness {:.3e} > {bound:.3e}",
                r.idempotency, r.annihilation, r.completeness
            )));
        }
        Ok(())
    }
}

/// Scalar or operator values assignable to spectral labels in [`integrate`].
#[derive(Debug, Clone)]
pub enum SpectralValue {
    Scalar(Complex64),
    Operator(ComplexMatrix),
}

/// The finite spectral integral `Σ values(y_i)·E_i`; scalar values are
/// promoted to scalar multiples of the identity.
pub fn integrate(
    values: &BTreeMap<String, SpectralValue>,
    measure: &FiniteSpectralMeasure,
) -> Result<ComplexMatrix> {
    let n = measure.ambient_dim();
    let mut acc = ComplexMatrix::zeros(n).expect("dim validated");
    for (label, e) in measure.labels().iter().zip(measure.idempotents()) {
        let value = values
            .get(&label.name)
            .ok_or_else(|| Error::MissingLabel(label.name.clone()))?;
        let term = match value {
            SpectralValue::Scalar(s) => e.scale(*s),
            SpectralValue::Operator(v) => {
                if v.dim() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "operator value for label {:?} has dim {}, ambient is {n}",
                        label.name,
                        v.dim()
                    )));
                }
                v.mul(e)
            }
        };
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// The value map realizing the identity function `λ ↦ λ` on a measure's
/// labels.
pub fn identity_values(measure: &FiniteSpectralMeasure) -> BTreeMap<String, SpectralValue> {
    measure
        .labels()
        .iter()
        .map(|l| (l.name.clone(), SpectralValue::Scalar(l.value)))
        .collect()
}

/// Boundary samples of the numerical range `{⟨av, v⟩ : ‖v‖ = 1}`.
#[derive(Debug, Clone)]
pub struct NumericalRange {
    angles: Vec<f64>,
    boundary: Vec<Complex64>,
}

impl NumericalRange {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn boundary(&self) -> &[Complex64] {
        &self.boundary
    }

    pub fn max_modulus(&self) -> f64 {
        self.boundary.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Support-function distance of `z` from the sampled hull: the largest
    /// violation `Re(e^{iθ}·z) − h(θ)` over the angle grid, clamped at zero.
    /// Zero means `z` lies inside the hull as far as the grid can tell.
    pub fn hull_violation(&self, z: Complex64) -> f64 {
        let mut worst: f64 = 0.0;
        for (theta, p) in self.angles.iter().zip(&self.boundary) {
            let dir = Complex64::new(0.0, *theta).exp();
            let h = (dir * p).re;
            worst = worst.max((dir * z).re - h);
        }
        worst
    }

    /// CSV with header `angle,re,im`, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,re,im\n");
        for (theta, p) in self.angles.iter().zip(&self.boundary) {
            out.push_str(&format!("{theta:.16e},{:.16e},{:.16e}\n", p.re, p.im));
        }
        out
    }
}

/// Traces the boundary of the numerical range by the support-function method:
/// for each angle θ the top eigenvector v of the hermitian part of `e^{iθ}a`
/// attains the support value, and `⟨av, v⟩` is the boundary point.
pub fn numerical_range(a: &ComplexMatrix, angle_count: usize) -> Result<NumericalRange> {
    if angle_count < 3 {
        return Err(Error::PreconditionViolated(format!(
            "angle_count must be at least 3, got {angle_count}"
        )));
    }
    let n = a.dim();
    let mut angles = Vec::with_capacity(angle_count);
    let mut boundary = Vec::with_capacity(angle_count);
    for k in 0..angle_count {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / angle_count as f64;
        let phase = Complex64::new(0.0, theta).exp();
        let rotated = a.scale(phase);
        let herm = rotated
            .add(&rotated.adjoint())
            .scale(Complex64::new(0.5, 0.0));
        let eig = hermitian_eigen(&herm);
        let v = &eig.vectors[0];
        let av = a.apply(v);
        let mut point = Complex64::new(0.0, 0.0);
        for i in 0..n {
            point += v[i].conj() * av[i];
        }
        angles.push(theta);
        boundary.push(point);
    }
    Ok(NumericalRange { angles, boundary })
}

/// Per-eigenvalue distance to the numerical-range hull.
#[derive(Debug, Clone)]
pub struct SpectrumSigmaReport {
    pub entries: Vec<SpectrumSigmaEntry>,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumSigmaEntry {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    pub hull_distance: f64,
}

/// Checks that every eigenvalue lies inside the numerical-range hull within
/// `tol_resid · (1 + ‖a‖)`, sampling the boundary at 64 angles.
pub fn check_spectrum_in_sigma(a: &ComplexMatrix, tol: &Tolerances) -> Result<SpectrumSigmaReport> {
    check_spectrum_in_sigma_with(a, tol, 64)
}

pub fn check_spectrum_in_sigma_with(
    a: &ComplexMatrix,
    tol: &Tolerances,
    angle_count: usize,
) -> Result<SpectrumSigmaReport> {
    let range = numerical_range(a, angle_count)?;
    let spectrum = a.spectrum(tol)?;
    let bound = tol.tol_resid * (1.0 + a.operator_norm());
    let entries: Vec<SpectrumSigmaEntry> = spectrum
        .iter()
        .map(|cl| SpectrumSigmaEntry {
            eigenvalue: cl.value,
            multiplicity: cl.multiplicity,
            hull_distance: range.hull_violation(cl.value),
        })
        .collect();
    let pass = entries.iter().all(|e| e.hull_distance <= bound);
    Ok(SpectrumSigmaReport {
        entries,
        bound,
        pass,
    })
}

/// Orthogonal spectral measure of a normal operator: one hermitian
/// eigenprojection per spectral cluster, built from reordered Schur bases.
/// Rejects operators whose commutator `‖a*a − aa*‖` exceeds
/// `tol_resid · ‖a‖²`.
pub fn spectral_measure_normal(
    a: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<FiniteSpectralMeasure> {
    let norm = a.operator_norm();
    let residual = a.normality_residual();
    let bound = tol.tol_resid * norm * norm.max(1.0);
    if residual > bound {
        return Err(Error::NotNormal { residual, bound });
    }
    let clusters = crate::jordan::schur_clusters(a, tol)?;
    let mut labels = Vec::new();
    let mut idempotents = Vec::new();
    let mut hermitian = Vec::new();
    for (index, cluster) in clusters.groups.iter().enumerate() {
        // Orthogonal projection onto the cluster's invariant subspace: for a
        // normal operator that subspace is reducing, so Q₁Q₁* is the
        // spectral projection and is hermitian by construction.
        let mut form = clusters.form.clone();
        let mut selected = vec![false; a.dim()];
        for &pos in &cluster.positions {
            selected[pos] = true;
        }
        crate::linop::schur::move_selected_front(&mut form, &selected);
        let k = cluster.positions.len();
        let q1: Vec<Vec<Complex64>> = (0..k).map(|j| form.q.column(j)).collect();
        let n = a.dim();
        let proj =
            ComplexMatrix::from_fn(n, |i, j| (0..k).map(|c| q1[c][i] * q1[c][j].conj()).sum())
                .expect("projection entries finite");
        labels.push(SpectralLabel {
            name: format!("y{index}"),
            value: cluster.value,
        });
        idempotents.push(proj);
        hermitian.push(true);
    }
    FiniteSpectralMeasure::new(labels, idempotents, hermitian)
}

/// One audited claim: an identity that is expected to hold or fail for the
/// given operator, with the measured residual and an optional witness.
#[derive(Debug, Clone)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub pass: bool,
    pub residual: f64,
    pub note: Option<String>,
    pub witness: Option<ComplexMatrix>,
}

/// Structured pass/fail report over the five audited claims.
#[derive(Debug, Clone)]
pub struct ClaimsReport {
    pub claims: Vec<Claim>,
}

impl ClaimsReport {
    /// JSON form `{"claims": [{"id", "description", "pass", "residual",
    /// ...}]}` with deterministic float rendering.
    pub fn to_json(&self) -> Value {
        let claims: Vec<Value> = self
            .claims
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("id".into(), Value::String(c.id.clone()));
                m.insert("description".into(), Value::String(c.description.clone()));
                m.insert("pass".into(), Value::Bool(c.pass));
                m.insert("residual".into(), jsonfmt::float(c.residual));
                if let Some(note) = &c.note {
                    m.insert("note".into(), Value::String(note.clone()));
                }
                if let Some(w) = &c.witness {
                    m.insert("witness".into(), jsonfmt::matrix(w));
                }
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("claims".into(), Value::Array(claims));
        Value::Object(root)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }
}

/// Audits five structural claims about the spectral decomposition of `a`:
///
/// * c1 — the Riesz idempotents are idempotent, mutually annihilating, and
///   complete (expected to hold for every operator);
/// * c2 — those idempotents are hermitian (fails for generic non-normal
///   operators; the worst offender is attached as witness);
/// * c3 — the spectrum lies inside the numerical-range hull;
/// * c4 — the operator is reconstructed by the spectral integral of its
///   strongly spectral parts;
/// * c5 — the evaluation map on sampled pure states of the generated algebra
///   is multiplicative (holds exactly when `a` is normal).
///
/// Sampling in c5 is deterministic: 8 states, 16 trials, seed 0.
pub fn audit_claims(a: &ComplexMatrix, tol: &Tolerances) -> Result<ClaimsReport> {
    let decomposition = crate::jordan::dunford_decompose(a, tol)?;
    let measure = &decomposition.measure;
    let proj_scale = measure
        .idempotents()
        .iter()
        .map(ComplexMatrix::operator_norm)
        .fold(0.0, f64::max);

    let mut claims = Vec::new();

    // c1: idempotency, mutual annihilation, completeness.
    let r = measure.residuals();
    let c1_residual = r.idempotency.max(r.annihilation).max(r.completeness);
    let c1_bound = tol.tol_resid * (1.0 + proj_scale * proj_scale);
    claims.push(Claim {
        id: "c1".into(),
        description: "spectral idempotents are idempotent, mutually annihilating, and complete"
            .into(),
        pass: c1_residual <= c1_bound,
        residual: c1_residual,
        note: None,
        witness: None,
    });

    // c2: hermitian idempotents; exhibit the worst offender on failure.
    let mut c2_residual: f64 = 0.0;
    let mut witness: Option<ComplexMatrix> = None;
    for e in measure.idempotents() {
        let dev = e.sub(&e.adjoint()).operator_norm();
        if dev > c2_residual {
            c2_residual = dev;
            witness = Some(e.clone());
        }
    }
    let c2_bound = tol.tol_resid * (1.0 + proj_scale);
    let c2_pass = c2_residual <= c2_bound;
    claims.push(Claim {
        id: "c2".into(),
        description: "spectral idempotents are hermitian".into(),
        pass: c2_pass,
        residual: c2_residual,
        note: None,
        witness: if c2_pass { None } else { witness },
    });

    // c3: spectrum inside the numerical-range hull.
    let sigma = check_spectrum_in_sigma(a, tol)?;
    let c3_residual = sigma
        .entries
        .iter()
        .map(|e| e.hull_distance)
        .fold(0.0, f64::max);
    claims.push(Claim {
        id: "c3".into(),
        description: "spectrum lies inside the numerical-range hull".into(),
        pass: sigma.pass,
        residual: c3_residual,
        note: None,
        witness: None,
    });

    // c4: reconstruction from strongly spectral parts.
    let c4_residual = decomposition.reconstruction_residual;
    claims.push(Claim {
        id: "c4".into(),
        description: "operator equals the spectral integral of its strongly spectral parts".into(),
        pass: c4_residual <= tol.tol_resid,
        residual: c4_residual,
        note: None,
        witness: None,
    });

    // c5: multiplicativity of the evaluation map on pure states of the
    // algebra generated by a.
    claims.push(audit_multiplicativity(a, tol)?);

    Ok(ClaimsReport { claims })
}

fn audit_multiplicativity(a: &ComplexMatrix, tol: &Tolerances) -> Result<Claim> {
    use crate::states::{hat_is_multiplicative, sample_pure_states, AlgebraPresentation};

    let description = "evaluation on pure states is multiplicative".to_string();
    if a.dim() > crate::states::MAX_ALGEBRA_AMBIENT_DIM {
        // Algebra closure is capped; for a singly generated algebra
        // multiplicativity is equivalent to normality, so decide from the
        // commutator residual instead and say so.
        let residual = a.normality_residual();
        let norm = a.operator_norm();
        let pass = residual <= tol.tol_resid * norm * norm.max(1.0);
        return Ok(Claim {
            id: "c5".into(),
            description,
            pass,
            residual,
            note: Some(format!(
                "ambient dimension {} exceeds the algebra-closure cap {}; decided via the normality commutator",
                a.dim(),
                crate::states::MAX_ALGEBRA_AMBIENT_DIM
            )),
            witness: None,
        });
    }
    let algebra = std::sync::Arc::new(AlgebraPresentation::generate(a.dim(), std::slice::from_ref(a), *tol)?);
    let states = sample_pure_states(&algebra, 8, 0)?;
    let check = hat_is_multiplicative(&algebra, &states, 16);
    Ok(Claim {
        id: "c5".into(),
        description,
        pass: check.multiplicative,
        residual: check.worst_deviation,
        note: None,
        witness: None,
    })
}

#[cfg(test)]
mod tests;
