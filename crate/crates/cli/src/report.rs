//! Report assembly. Every float goes through the fixed 17-significant-digit
//! renderer so identical runs produce identical bytes.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use ncg_core::convalg::BlockMeasure;
use ncg_core::jordan;
use ncg_core::jsonfmt;
use ncg_core::qspace::FiniteQuantumSpace;
use ncg_core::speccalc;
use ncg_core::states::{self, AlgebraPresentation, State};
use ncg_core::ComplexMatrix;

use crate::{AnalysisConfig, Failure};

fn envelope(command: &str, input: &str, config: &AnalysisConfig) -> Map<String, Value> {
    let mut root = Map::new();
    root.insert(
        "version".into(),
        Value::String(env!("CARGO_PKG_VERSION").to_string()),
    );
    root.insert("command".into(), Value::String(command.to_string()));
    root.insert("input".into(), Value::String(input.to_string()));
    let mut cfg = Map::new();
    cfg.insert("tol_eig".into(), jsonfmt::float(config.tolerances.tol_eig));
    cfg.insert(
        "tol_resid".into(),
        jsonfmt::float(config.tolerances.tol_resid),
    );
    cfg.insert(
        "tol_ortho".into(),
        jsonfmt::float(config.tolerances.tol_ortho),
    );
    cfg.insert("angles".into(), Value::from(config.angle_count));
    cfg.insert("samples".into(), Value::from(config.sample_count));
    cfg.insert("seed".into(), Value::from(config.seed));
    root.insert("config".into(), Value::Object(cfg));
    root
}

fn render(root: Map<String, Value>) -> String {
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
    text.push('\n');
    text
}

pub fn analyze(
    matrix: &ComplexMatrix,
    input: String,
    config: &AnalysisConfig,
) -> Result<String, Failure> {
    let tol = &config.tolerances;
    let mut root = envelope("analyze", &input, config);
    root.insert("matrix".into(), serde_json::json!({"dim": matrix.dim()}));

    let spectrum = matrix.spectrum(tol).map_err(Failure::from)?;
    let spectrum_json: Vec<Value> = spectrum
        .iter()
        .map(|cl| {
            let mut m = Map::new();
            m.insert("re".into(), jsonfmt::float(cl.value.re));
            m.insert("im".into(), jsonfmt::float(cl.value.im));
            m.insert("multiplicity".into(), Value::from(cl.multiplicity));
            Value::Object(m)
        })
        .collect();
    root.insert("spectrum".into(), Value::Array(spectrum_json));

    let sigma = speccalc::check_spectrum_in_sigma_with(matrix, tol, config.angle_count)
        .map_err(Failure::from)?;
    let range = speccalc::numerical_range(matrix, config.angle_count).map_err(Failure::from)?;
    let max_distance = sigma
        .entries
        .iter()
        .map(|e| e.hull_distance)
        .fold(0.0, f64::max);
    let mut range_json = Map::new();
    range_json.insert("angles".into(), Value::from(config.angle_count));
    range_json.insert("max_modulus".into(), jsonfmt::float(range.max_modulus()));
    range_json.insert("spectrum_inside".into(), Value::Bool(sigma.pass));
    range_json.insert("max_hull_distance".into(), jsonfmt::float(max_distance));
    root.insert("numerical_range".into(), Value::Object(range_json));

    let decomposition = jordan::dunford_decompose(matrix, tol).map_err(Failure::from)?;
    root.insert("dunford".into(), dunford_json(&decomposition));

    let claims = speccalc::audit_claims(matrix, tol).map_err(Failure::from)?;
    root.insert(
        "claims".into(),
        claims
            .to_json()
            .get("claims")
            .cloned()
            .unwrap_or(Value::Null),
    );

    if matrix.dim() >= 2 {
        let subspace = jordan::invariant_subspace(matrix, tol).map_err(Failure::from)?;
        let residual = jordan::invariance_residual(matrix, &subspace);
        let mut sub_json = Map::new();
        sub_json.insert("rank".into(), Value::from(subspace.rank()));
        sub_json.insert("residual".into(), jsonfmt::float(residual));
        sub_json.insert(
            "basis".into(),
            Value::Array(
                subspace
                    .basis()
                    .iter()
                    .map(|v| jsonfmt::vector(v))
                    .collect(),
            ),
        );
        root.insert("invariant_subspace".into(), Value::Object(sub_json));
    }

    Ok(render(root))
}

fn dunford_json(d: &jordan::DunfordDecomposition) -> Value {
    let blocks: Vec<Value> = d
        .blocks
        .iter()
        .map(|b| {
            let mut m = Map::new();
            m.insert("label".into(), Value::String(b.label.clone()));
            m.insert("eigenvalue".into(), jsonfmt::complex(b.eigenvalue));
            m.insert("rank".into(), Value::from(b.rank));
            m.insert("nilpotency_index".into(), Value::from(b.nilpotency_index));
            m.insert("hermitian".into(), Value::Bool(b.hermitian));
            let mut r = Map::new();
            r.insert(
                "idempotency".into(),
                jsonfmt::float(b.residuals.idempotency),
            );
            r.insert(
                "commutation".into(),
                jsonfmt::float(b.residuals.commutation),
            );
            r.insert("nilpotency".into(), jsonfmt::float(b.residuals.nilpotency));
            m.insert("residuals".into(), Value::Object(r));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("merged_clusters".into(), Value::Bool(d.merged_clusters));
    m.insert(
        "reconstruction_residual".into(),
        jsonfmt::float(d.reconstruction_residual),
    );
    m.insert("blocks".into(), Value::Array(blocks));
    Value::Object(m)
}

pub fn audit(
    matrix: &ComplexMatrix,
    input: String,
    config: &AnalysisConfig,
) -> Result<String, Failure> {
    let mut root = envelope("audit", &input, config);
    root.insert("matrix".into(), serde_json::json!({"dim": matrix.dim()}));
    let claims = speccalc::audit_claims(matrix, &config.tolerances).map_err(Failure::from)?;
    root.insert(
        "claims".into(),
        claims
            .to_json()
            .get("claims")
            .cloned()
            .unwrap_or(Value::Null),
    );
    Ok(render(root))
}

pub fn nrange_csv(matrix: &ComplexMatrix, config: &AnalysisConfig) -> Result<String, Failure> {
    let range = speccalc::numerical_range(matrix, config.angle_count).map_err(Failure::from)?;
    Ok(range.to_csv())
}

pub fn gns(
    algebra: &Arc<AlgebraPresentation>,
    states: &[State],
    input: String,
    config: &AnalysisConfig,
) -> Result<String, Failure> {
    let tol = &config.tolerances;
    let mut root = envelope("gns", &input, config);
    root.insert(
        "algebra".into(),
        serde_json::json!({
            "ambient_dim": algebra.ambient_dim(),
            "dim": algebra.dim(),
            "commutative": algebra.is_commutative(),
        }),
    );

    let mut state_entries = Vec::new();
    let mut all_pure = true;
    for (index, state) in states.iter().enumerate() {
        let rep = states::gns(state).map_err(Failure::from)?;
        let commutant = states::commutant_dimension(&rep, tol);
        let irreducible = commutant == 1;
        all_pure &= irreducible;
        let mut m = Map::new();
        m.insert("index".into(), Value::from(index));
        m.insert("hilbert_dim".into(), Value::from(rep.hilbert_dim()));
        m.insert("irreducible".into(), Value::Bool(irreducible));
        m.insert("commutant_dim".into(), Value::from(commutant));
        state_entries.push(Value::Object(m));
    }
    root.insert("states".into(), Value::Array(state_entries));

    if states.len() >= 2 && all_pure {
        let space = states::build_ra(states, tol).map_err(Failure::from)?;
        root.insert("partition".into(), space_json(&space));
    }
    Ok(render(root))
}

fn space_json(space: &FiniteQuantumSpace) -> Value {
    let classes: Map<String, Value> = space
        .assignments()
        .iter()
        .map(|(p, c)| (p.clone(), Value::String(c.clone())))
        .collect();
    serde_json::json!({
        "points": space.points(),
        "classes": classes,
    })
}

pub fn convalg(
    space: &FiniteQuantumSpace,
    mut measures: Vec<BlockMeasure>,
    input: String,
    config: &AnalysisConfig,
) -> Result<String, Failure> {
    let mut root = envelope("convalg", &input, config);
    root.insert("space".into(), space_json(space));
    let block_dims: Vec<usize> = space.blocks().iter().map(|b| b.members.len()).collect();
    root.insert(
        "block_dims".into(),
        Value::Array(block_dims.iter().map(|&d| Value::from(d)).collect()),
    );
    root.insert(
        "pair_count".into(),
        Value::from(space.relation_pairs().len()),
    );

    let generated = measures.is_empty();
    if generated {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.sample_count.max(2) {
            measures.push(BlockMeasure::random(space.clone(), &mut rng));
        }
    }
    root.insert("generated_measures".into(), Value::Bool(generated));
    root.insert("measure_count".into(), Value::from(measures.len()));

    // C*-identity residual per measure: |‖μ*μ‖ − ‖μ‖²|.
    let mut cstar = Vec::new();
    for mu in &measures {
        let lhs = mu
            .involution()
            .convolve(mu)
            .map_err(Failure::from)?
            .cstar_norm();
        let rhs = mu.cstar_norm().powi(2);
        cstar.push(jsonfmt::float((lhs - rhs).abs()));
    }

    // Associativity residual per consecutive triple.
    let mut associativity = Vec::new();
    if measures.len() >= 3 {
        for window in measures.windows(3) {
            let left = window[0]
                .convolve(&window[1])
                .and_then(|m| m.convolve(&window[2]))
                .map_err(Failure::from)?;
            let right = window[1]
                .convolve(&window[2])
                .and_then(|m| window[0].convolve(&m))
                .map_err(Failure::from)?;
            let diff = left.sub(&right).map_err(Failure::from)?.cstar_norm();
            associativity.push(jsonfmt::float(diff));
        }
    }

    // Commutativity residual over consecutive pairs: zero exactly when the
    // relation is diagonal.
    let mut commutativity: f64 = 0.0;
    if measures.len() >= 2 {
        for window in measures.windows(2) {
            let ab = window[0].convolve(&window[1]).map_err(Failure::from)?;
            let ba = window[1].convolve(&window[0]).map_err(Failure::from)?;
            commutativity = commutativity.max(ab.sub(&ba).map_err(Failure::from)?.cstar_norm());
        }
    }

    let mut residuals = Map::new();
    residuals.insert("cstar_identity".into(), Value::Array(cstar));
    residuals.insert("associativity".into(), Value::Array(associativity));
    residuals.insert("commutativity".into(), jsonfmt::float(commutativity));
    root.insert("residuals".into(), Value::Object(residuals));

    let dims_match = {
        let total: usize = block_dims.iter().map(|d| d * d).sum();
        total == space.relation_pairs().len()
    };
    root.insert(
        "block_dimension_count_matches".into(),
        Value::Bool(dims_match),
    );

    Ok(render(root))
}
