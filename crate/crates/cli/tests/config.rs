use std::path::Path;

use proptest::prelude::*;
use superint::config::{InitialState, KValue, PotentialConfig, SchemeName};
use superint::{ExperimentConfig, Purpose};
use superint_core::Rational;

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let doc = std::fs::read_to_string(&path).unwrap();
        let cfg = ExperimentConfig::parse(&doc, Purpose::Verify).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml(), Purpose::Verify).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
}

#[test]
fn rational_k_serialises_as_fraction() {
    let doc = "[potential]\nfamily = \"v2\"\nomega0 = 1.0\nk = 1.5\nka = 1.0\nkb = 0.4\n";
    let cfg = ExperimentConfig::parse(doc, Purpose::Verify).unwrap();
    assert!(cfg.to_toml().contains("k = \"3/2\""), "{}", cfg.to_toml());
}

fn potential() -> impl Strategy<Value = PotentialConfig> {
    let k = (1u64..12, 1u64..6).prop_map(|(p, q)| KValue(Rational::new(p, q).unwrap()));
    prop_oneof![
        (0.1..3.0f64, 0.1..3.0f64).prop_map(|(omega1, omega2)| PotentialConfig::Ho { omega1, omega2 }),
        (0.1..3.0f64, 1u32..5, 1u32..5, -1.0..1.0f64, -1.0..1.0f64)
            .prop_map(|(omega0, nx, ny, k1, k2)| PotentialConfig::Gensw { omega0, nx, ny, k1, k2 }),
        (0.1..3.0f64, k.clone(), 0.1..2.0f64, 0.1..2.0f64)
            .prop_map(|(omega0, k, alpha, beta)| PotentialConfig::Ttw { omega0, k, alpha, beta }),
        (0.1..3.0f64, k.clone(), 0.5..2.0f64, -0.4..0.4f64)
            .prop_map(|(omega0, k, ka, kb)| PotentialConfig::V1 { omega0, k, ka, kb }),
        (0.1..3.0f64, k, 0.5..2.0f64, -0.4..0.4f64)
            .prop_map(|(omega0, k, ka, kb)| PotentialConfig::V2 { omega0, k, ka, kb }),
    ]
}

proptest! {
    #[test]
    fn parse_serialise_round_trip(
        pot in potential(),
        polar in any::<bool>(),
        a in 0.5..2.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
        scheme in prop_oneof![Just(SchemeName::Leapfrog), Just(SchemeName::Rk4), Just(SchemeName::Yoshida4)],
        step in 1e-5..1e-2f64,
        seed in any::<u64>(),
        samples in 1usize..1000,
    ) {
        let mut cfg = ExperimentConfig::parse(
            "[potential]\nfamily = \"ho\"\nomega1 = 1.0\nomega2 = 1.0\n",
            Purpose::Verify,
        ).unwrap();
        cfg.potential = pot;
        cfg.initial_state = Some(if polar {
            InitialState::Polar { r: a, phi: b, pr: c, pphi: d }
        } else {
            InitialState::Cartesian { x: a, y: b, px: c, py: d }
        });
        cfg.integrator.scheme = scheme;
        cfg.integrator.step = step;
        cfg.verification.seed = seed;
        cfg.verification.samples = samples;
        let doc = cfg.to_toml();
        let back = ExperimentConfig::parse(&doc, Purpose::Verify).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), doc);
    }
}

#[test]
fn full_width_seeds_survive() {
    let doc = "[potential]\nfamily = \"ho\"\nomega1 = 1.0\nomega2 = 1.0\n[verification]\nseed = \"18446744073709551615\"\n";
    let cfg = ExperimentConfig::parse(doc, Purpose::Verify).unwrap();
    assert_eq!(cfg.verification.seed, u64::MAX);
    let back = ExperimentConfig::parse(&cfg.to_toml(), Purpose::Verify).unwrap();
    assert_eq!(back.verification.seed, u64::MAX);
    assert!(ExperimentConfig::parse(&doc.replace("\"18446744073709551615\"", "-3"), Purpose::Verify).is_err());
}
