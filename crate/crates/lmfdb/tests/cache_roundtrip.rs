use proptest::prelude::*;
use rootbias_lmfdb::{Cache, CacheDocument, NewformOrbitRecord, SignSource, SCHEMA_VERSION};

fn record(level: u64, weight: u32) -> impl Strategy<Value = NewformOrbitRecord> {
    (
        "[a-z]{1,3}",
        1u64..500,
        prop_oneof![Just(1i8), Just(-1i8)],
        proptest::option::of(any::<bool>()),
        proptest::option::of(any::<bool>()),
        prop_oneof![Just(SignSource::FrickeEigenval), Just(SignSource::AtkinLehnerEigenvals)],
    )
        .prop_map(move |(suffix, orbit_dim, root_number_sign, is_twist_minimal, is_cm, sign_source)| {
            NewformOrbitRecord {
                level,
                weight,
                orbit_label: format!("{level}.{weight}.a.{suffix}"),
                orbit_dim,
                root_number_sign,
                is_twist_minimal,
                is_cm,
                sign_source,
            }
        })
}

fn document() -> impl Strategy<Value = CacheDocument> {
    (1u64..10_000, 1u32..40, 0i64..4_000_000_000)
        .prop_flat_map(|(level, half_k, secs)| {
            let weight = 2 * half_k;
            (Just(level), Just(weight), Just(secs), proptest::collection::vec(record(level, weight), 0..8))
        })
        .prop_map(|(level, weight, secs, orbits)| CacheDocument {
            schema_version: SCHEMA_VERSION,
            level,
            weight,
            fetched_at: chrono::DateTime::from_timestamp(secs, 0).unwrap(),
            source: "proptest".into(),
            orbits,
        })
}

proptest! {
    #[test]
    fn serialize_deserialize_is_identity(doc in document()) {
        let text = doc.to_toml().unwrap();
        prop_assert_eq!(CacheDocument::from_toml(&text).unwrap(), doc.clone());

        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        cache.store(&doc).unwrap();
        prop_assert_eq!(cache.load(doc.level, doc.weight).unwrap(), Some(doc));
    }
}
