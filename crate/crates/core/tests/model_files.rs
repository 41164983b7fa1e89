//! Model files on disk: loading, serialization round trips and the link
//! consistency check against the bundled link model.

use std::path::PathBuf;

use icoh::models::{check_link_consistency, load_model, load_model_str, serialize_model};
use icoh::strata::StratumId;
use icoh::testkit::{random_gysin_model, Rng};

fn builtin_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("builtins").join(format!("{name}.model"))
}

#[test]
fn files_on_disk_load_and_round_trip() {
    for name in ["phi1", "phi2", "phi3", "phi1_scaled", "ext_gamma", "ext_gamma_u2", "hopf_link"] {
        let g = load_model(builtin_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = serialize_model(&g);
        let again = load_model_str(&text).unwrap();
        assert_eq!(g, again, "{name} does not survive a round trip");
    }
}

#[test]
fn serialization_of_random_models_round_trips() {
    let mut rng = Rng::new(99);
    for _ in 0..20 {
        let g = random_gysin_model(&mut rng, 12);
        let text = serialize_model(&g);
        let again = load_model_str(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(g, again, "random model does not survive a round trip:\n{text}");
    }
}

#[test]
fn the_bundled_link_model_detects_the_perverse_vertex() {
    let phi1 = load_model(builtin_path("phi1")).unwrap();
    let link = load_model(builtin_path("hopf_link")).unwrap();
    assert!(link.base().poset().is_empty());
    let report = check_link_consistency(&phi1, &StratumId::new("v"), &link).unwrap();
    assert!(report.applicable);
    assert!(report.link_euler_nonzero);
    assert!(report.consistent);
}

#[test]
fn missing_files_surface_as_errors() {
    assert!(load_model("/definitely/not/here.model").is_err());
}
