use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::jordan::dunford_decompose;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Brute-force oracle: samples `⟨av, v⟩` over random unit vectors.
fn sampled_range_points(a: &ComplexMatrix, samples: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.dim();
    let mut points = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                c(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= norm;
        }
        let av = a.apply(&v);
        points.push(v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum());
    }
    points
}

#[test]
fn numerical_range_of_identity_is_the_point_one() {
    let a = ComplexMatrix::identity(2).unwrap();
    let range = numerical_range(&a, 16).unwrap();
    for p in range.boundary() {
        assert!((p - c(1.0, 0.0)).norm() < 1e-12);
    }
    assert!((range.max_modulus() - 1.0).abs() < 1e-12);
}

#[test]
fn numerical_range_of_diag01_is_the_unit_segment() {
    let a = ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let range = numerical_range(&a, 64).unwrap();
    let mut saw_zero = false;
    let mut saw_one = false;
    for p in range.boundary() {
        assert!(p.im.abs() < 1e-10, "boundary point not real: {p}");
        assert!((-1e-12..=1.0 + 1e-12).contains(&p.re));
        saw_zero |= p.re.abs() < 1e-10;
        saw_one |= (p.re - 1.0).abs() < 1e-10;
    }
    assert!(saw_zero && saw_one, "endpoints must be attained");
    // Brute-force oracle agrees on the extremes.
    let sampled = sampled_range_points(&a, 20_000, 9);
    let max_sampled = sampled.iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let min_sampled = sampled.iter().map(|z| z.re).fold(f64::MAX, f64::min);
    assert!(max_sampled <= 1.0 + 1e-9 && min_sampled >= -1e-9);
}

#[test]
fn numerical_range_of_nilpotent_is_half_disk_radius() {
    let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let range = numerical_range(&a, 64).unwrap();
    let max_mod = range.max_modulus();
    assert!((0.49..=0.51).contains(&max_mod), "max modulus {max_mod}");
    // Every boundary sample sits on the circle of radius 1/2.
    for p in range.boundary() {
        assert!((p.norm() - 0.5).abs() < 1e-10);
    }
    // Brute-force oracle over 1e5 random unit vectors stays inside.
    let sampled = sampled_range_points(&a, 100_000, 31);
    let oracle_max = sampled.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(oracle_max <= 0.5 + 1e-9);
    assert!(oracle_max >= 0.45, "sampling should approach the boundary");
}

#[test]
fn numerical_range_rejects_small_angle_counts() {
    let a = ComplexMatrix::identity(2).unwrap();
    assert!(matches!(
        numerical_range(&a, 2),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn hull_contains_normalized_trace_and_is_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..10 {
        let dim = 2 + trial % 4;
        let a = ComplexMatrix::random_gaussian(dim, &mut rng).unwrap();
        let range = numerical_range(&a, 64).unwrap();
        let center = a.trace() / dim as f64;
        assert!(range.hull_violation(center) <= 1e-10 * (1.0 + a.operator_norm()));

        let u = ComplexMatrix::random_unitary(dim, &mut rng).unwrap();
        let conj = u.mul(&a).mul(&u.adjoint());
        let range2 = numerical_range(&conj, 64).unwrap();
        // Support functions over the grid agree within tolerance.
        for (theta, p) in range.angles().iter().zip(range.boundary()) {
            let dir = c(0.0, *theta).exp();
            let h1 = (dir * p).re;
            let idx = range2
                .angles()
                .iter()
                .position(|t| (t - theta).abs() < 1e-12)
                .unwrap();
            let h2 = (dir * range2.boundary()[idx]).re;
            assert!((h1 - h2).abs() <= 1e-9 * (1.0 + a.operator_norm()));
        }
    }
}

#[test]
fn spectrum_lies_in_hull_for_examples_and_random_matrices() {
    let t = tol();
    let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
    let report = check_spectrum_in_sigma(&a, &t).unwrap();
    assert!(report.pass);
    for e in &report.entries {
        assert!(e.hull_distance <= 1e-12);
    }

    let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let report = check_spectrum_in_sigma(&nil, &t).unwrap();
    assert!(report.pass);
    assert!(report.entries[0].hull_distance <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = ComplexMatrix::random_gaussian(6, &mut rng).unwrap();
    let report = check_spectrum_in_sigma(&a, &t).unwrap();
    assert!(report.pass);
    for e in &report.entries {
        assert!(e.hull_distance <= 1e-8 * (1.0 + a.operator_norm()));
    }
}

#[test]
fn spectral_measure_of_diagonal_matrix() {
    let t = tol();
    let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
    let measure = spectral_measure_normal(&a, &t).unwrap();
    assert_eq!(measure.labels().len(), 2);
    let e1 = measure.idempotent_for("y0").unwrap();
    let e2 = measure.idempotent_for("y1").unwrap();
    let p1 = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    let p2 = ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!(e1.sub(&p1).operator_norm() < 1e-12);
    assert!(e2.sub(&p2).operator_norm() < 1e-12);
    assert!(measure.hermitian_flags().iter().all(|&h| h));
    measure.validate(&t).unwrap();
}

#[test]
fn spectral_measure_of_identity_is_single_block() {
    let t = tol();
    let a = ComplexMatrix::identity(3).unwrap();
    let measure = spectral_measure_normal(&a, &t).unwrap();
    assert_eq!(measure.labels().len(), 1);
    assert!((measure.labels()[0].value - c(1.0, 0.0)).norm() < 1e-12);
    assert!(
        measure.idempotents()[0]
            .sub(&ComplexMatrix::identity(3).unwrap())
            .operator_norm()
            < 1e-12
    );
}

#[test]
fn spectral_measure_reconstructs_random_hermitian() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = ComplexMatrix::random_gaussian(5, &mut rng).unwrap();
    let a = g.add(&g.adjoint()).scale(c(0.5, 0.0));
    let measure = spectral_measure_normal(&a, &t).unwrap();
    measure.validate(&t).unwrap();
    let recon = integrate(&identity_values(&measure), &measure).unwrap();
    assert!(recon.sub(&a).operator_norm() <= 1e-10);
    for (e, h) in measure.idempotents().iter().zip(measure.hermitian_flags()) {
        assert!(h);
        assert!(e.sub(&e.adjoint()).operator_norm() <= 1e-12);
    }
}

#[test]
fn spectral_measure_rejects_non_normal() {
    let t = tol();
    let a = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
    assert!(matches!(
        spectral_measure_normal(&a, &t),
        Err(Error::NotNormal { .. })
    ));
}

#[test]
fn integrate_cases() {
    let t = tol();
    let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
    let measure = spectral_measure_normal(&a, &t).unwrap();

    // Constant 1 integrates to the identity.
    let ones: BTreeMap<String, SpectralValue> = measure
        .labels()
        .iter()
        .map(|l| (l.name.clone(), SpectralValue::Scalar(c(1.0, 0.0))))
        .collect();
    let id = integrate(&ones, &measure).unwrap();
    assert!(id.sub(&ComplexMatrix::identity(2).unwrap()).operator_norm() < 1e-12);

    // The identity function recovers the operator.
    let recon = integrate(&identity_values(&measure), &measure).unwrap();
    assert!(recon.sub(&a).operator_norm() < 1e-12);

    // λ² gives diag(1, 4).
    let squares: BTreeMap<String, SpectralValue> = measure
        .labels()
        .iter()
        .map(|l| (l.name.clone(), SpectralValue::Scalar(l.value * l.value)))
        .collect();
    let sq = integrate(&squares, &measure).unwrap();
    let expect = ComplexMatrix::diag(&[c(1.0, 0.0), c(4.0, 0.0)]).unwrap();
    assert!(sq.sub(&expect).operator_norm() < 1e-12);

    // Missing labels are an error.
    let empty: BTreeMap<String, SpectralValue> = BTreeMap::new();
    assert!(matches!(
        integrate(&empty, &measure),
        Err(Error::MissingLabel(_))
    ));
}

#[test]
fn integrate_is_linear_and_multiplicative_on_scalars() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let u = ComplexMatrix::random_unitary(4, &mut rng).unwrap();
    let d = ComplexMatrix::diag(&[c(1.0, 1.0), c(-1.0, 0.0), c(2.0, -1.0), c(0.5, 0.5)]).unwrap();
    let a = u.mul(&d).mul(&u.adjoint());
    let measure = spectral_measure_normal(&a, &t).unwrap();

    let mut rng2 = ChaCha8Rng::seed_from_u64(31);
    let f: BTreeMap<String, SpectralValue> = measure
        .labels()
        .iter()
        .map(|l| {
            (
                l.name.clone(),
                SpectralValue::Scalar(c(rng2.random::<f64>(), rng2.random::<f64>())),
            )
        })
        .collect();
    let g: BTreeMap<String, SpectralValue> = measure
        .labels()
        .iter()
        .map(|l| {
            (
                l.name.clone(),
                SpectralValue::Scalar(c(rng2.random::<f64>(), rng2.random::<f64>())),
            )
        })
        .collect();
    let fg: BTreeMap<String, SpectralValue> = measure
        .labels()
        .iter()
        .map(|l| {
            let (SpectralValue::Scalar(x), SpectralValue::Scalar(y)) = (&f[&l.name], &g[&l.name])
            else {
                unreachable!()
            };
            (l.name.clone(), SpectralValue::Scalar(x * y))
        })
        .collect();
    let lhs = integrate(&fg, &measure).unwrap();
    let rhs = integrate(&f, &measure)
        .unwrap()
        .mul(&integrate(&g, &measure).unwrap());
    assert!(lhs.sub(&rhs).operator_norm() <= 1e-10);
}

#[test]
fn audit_passes_all_claims_for_normal_input() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let u = ComplexMatrix::random_unitary(3, &mut rng).unwrap();
    let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 1.0), c(0.0, -1.0)]).unwrap();
    let a = u.mul(&d).mul(&u.adjoint());
    let report = audit_claims(&a, &t).unwrap();
    assert_eq!(report.claims.len(), 5);
    for claim in &report.claims {
        assert!(
            claim.pass,
            "claim {} failed: {:.3e}",
            claim.id, claim.residual
        );
    }
}

#[test]
fn audit_flags_non_hermitian_idempotent_with_witness() {
    let t = tol();
    let a = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
    let report = audit_claims(&a, &t).unwrap();
    let c1 = report.claim("c1").unwrap();
    assert!(c1.pass);
    let c2 = report.claim("c2").unwrap();
    assert!(!c2.pass, "the Riesz idempotent of [[1,1],[0,2]] is oblique");
    let witness = c2.witness.as_ref().expect("failing claim carries witness");
    // The failing projection is [[1, -1], [0, 0]] (or its complement).
    let p1 = ComplexMatrix::from_real_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
    let p2 = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let close = witness.sub(&p1).operator_norm() < 1e-9 || witness.sub(&p2).operator_norm() < 1e-9;
    assert!(close, "witness should be one of the oblique idempotents");
    let c3 = report.claim("c3").unwrap();
    assert!(c3.pass);
    let c4 = report.claim("c4").unwrap();
    assert!(c4.pass);
    // The generated algebra is the full 2x2 algebra, so the evaluation map
    // fails multiplicativity.
    let c5 = report.claim("c5").unwrap();
    assert!(!c5.pass);
}

#[test]
fn audit_of_nilpotent_passes_structure_claims() {
    let t = tol();
    let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let report = audit_claims(&a, &t).unwrap();
    assert!(report.claim("c1").unwrap().pass);
    assert!(report.claim("c3").unwrap().pass);
    assert!(report.claim("c4").unwrap().pass);
    // Single cluster: the lone idempotent is the identity, hermitian.
    assert!(report.claim("c2").unwrap().pass);
}

#[test]
fn claims_report_json_shape() {
    let t = tol();
    let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
    let report = audit_claims(&a, &t).unwrap();
    let json = report.to_json();
    let claims = json.get("claims").unwrap().as_array().unwrap();
    assert_eq!(claims.len(), 5);
    for claim in claims {
        assert!(claim.get("id").unwrap().is_string());
        assert!(claim.get("pass").unwrap().is_boolean());
        assert!(claim.get("residual").is_some());
    }
}

#[test]
fn dunford_measure_validates_for_random_input() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = ComplexMatrix::random_gaussian(5, &mut rng).unwrap();
    let d = dunford_decompose(&a, &t).unwrap();
    d.measure.validate(&t).unwrap();
    let r = d.measure.residuals();
    assert!(r.idempotency <= 1e-9);
    assert!(r.annihilation <= 1e-9);
    assert!(r.completeness <= 1e-9);
}

#[test]
fn numerical_range_csv_is_deterministic() {
    let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let r1 = numerical_range(&a, 8).unwrap().to_csv();
    let r2 = numerical_range(&a, 8).unwrap().to_csv();
    assert_eq!(r1, r2);
    assert!(r1.starts_with("angle,re,im\n"));
    assert_eq!(r1.lines().count(), 9);
}

#[test]
fn measure_constructor_rejects_malformed_input() {
    let id = ComplexMatrix::identity(2).unwrap();
    let label = |name: &str| SpectralLabel {
        name: name.into(),
        value: c(0.0, 0.0),
    };
    assert!(FiniteSpectralMeasure::new(vec![label("a")], vec![], vec![]).is_err());
    assert!(FiniteSpectralMeasure::new(
        vec![label("a"), label("a")],
        vec![id.clone(), id.clone()],
        vec![true, true]
    )
    .is_err());
    assert!(FiniteSpectralMeasure::new(vec![], vec![], vec![]).is_err());
}
