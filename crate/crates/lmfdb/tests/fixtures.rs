use rootbias_lmfdb::{
    bundled_fixture, validate_delta, validate_minimal, Cache, Client, ClientConfig, DataSource, LmfdbError,
    MinimalOutcome,
};

fn offline_client(dir: &std::path::Path) -> Client {
    Client::new(ClientConfig { offline: true, ..ClientConfig::default() }, Cache::new(dir))
}

const FIXTURES: [(u64, u32); 7] = [(1, 12), (9, 10), (37, 2), (45, 4), (45, 6), (49, 14), (58, 2)];

#[test]
fn every_fixture_matches_computed_delta_and_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let client = offline_client(dir.path());
    for (n, k) in FIXTURES {
        let r = validate_delta(&client, n, k).unwrap();
        assert!(r.matched, "{r:?}");
        assert!(r.dims_match(), "{r:?}");
        assert_eq!(r.source, DataSource::Bundled);
    }
}

#[test]
fn worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let client = offline_client(dir.path());

    let r = validate_delta(&client, 9, 10).unwrap();
    assert_eq!((r.computed_delta, r.external_sum, r.orbit_count), (1, 1, 3));
    let r = validate_delta(&client, 49, 14).unwrap();
    assert_eq!((r.computed_delta, r.external_sum), (2, 2));
    let r = validate_delta(&client, 37, 2).unwrap();
    assert_eq!((r.computed_delta, r.external_sum, r.orbit_count), (0, 0, 2));
    let r = validate_delta(&client, 1, 12).unwrap();
    assert_eq!((r.external_sum, r.orbit_count), (1, 1));

    // S_10(9): one CM minimal form with root number -1, two twists from level 3 with +1.
    let doc = bundled_fixture(9, 10).unwrap();
    let mut signs: Vec<i8> = doc.orbits.iter().map(|o| o.root_number_sign).collect();
    signs.sort();
    assert_eq!(signs, vec![-1, 1, 1]);
    let cm: Vec<_> = doc.orbits.iter().filter(|o| o.is_cm == Some(true)).collect();
    assert_eq!(cm.len(), 1);
    assert_eq!((cm[0].root_number_sign, cm[0].is_twist_minimal), (-1, Some(true)));

    // S_14^min(49): dims 1 (CM), 6 and 12 with signs +1, +1, -1.
    let doc = bundled_fixture(49, 14).unwrap();
    let mut minimal: Vec<(u64, i8, Option<bool>)> = doc
        .orbits
        .iter()
        .filter(|o| o.is_twist_minimal == Some(true))
        .map(|o| (o.orbit_dim, o.root_number_sign, o.is_cm))
        .collect();
    minimal.sort();
    assert_eq!(minimal, vec![(1, 1, Some(true)), (6, 1, Some(false)), (12, -1, Some(false))]);
}

fn minimal_sum(client: &Client, n: u64, k: u32) -> (i64, bool, bool) {
    match validate_minimal(client, n, k).unwrap() {
        MinimalOutcome::Report(r) => (r.minimal_sum, r.balance_predicted, r.consistent),
        other => panic!("{other:?}"),
    }
}

#[test]
fn minimal_sums() {
    let dir = tempfile::tempdir().unwrap();
    let client = offline_client(dir.path());
    assert_eq!(minimal_sum(&client, 9, 10), (-1, false, true));
    assert_eq!(minimal_sum(&client, 49, 14), (-5, false, true));
    // 45 = 5·3², (-5/3) = 1: minimal root numbers balance.
    assert_eq!(minimal_sum(&client, 45, 4), (0, true, true));
    assert_eq!(minimal_sum(&client, 45, 6), (0, true, true));
}

#[test]
fn missing_minimality_is_reported_not_guessed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let mut doc = bundled_fixture(9, 10).unwrap();
    doc.orbits[0].is_twist_minimal = None;
    cache.store(&doc).unwrap();
    let client = offline_client(dir.path());
    match validate_minimal(&client, 9, 10).unwrap() {
        MinimalOutcome::InsufficientData { unflagged, .. } => assert_eq!(unflagged, vec!["9.10.a.a".to_owned()]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn offline_miss_is_explicit() {
    let dir = tempfile::tempdir().unwrap();
    let client = offline_client(dir.path());
    assert!(matches!(client.fetch_newform_orbits(11, 2), Err(LmfdbError::OfflineMiss { level: 11, weight: 2 })));
    assert!(matches!(client.fetch_newform_orbits(11, 3), Err(LmfdbError::Core(_))));
}

#[test]
fn warm_cache_wins_over_bundled() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    cache.store(&bundled_fixture(37, 2).unwrap()).unwrap();
    let client = offline_client(dir.path());
    assert_eq!(client.fetch_newform_orbits(37, 2).unwrap().source, DataSource::Cache);
    let r = validate_delta(&client, 37, 2).unwrap();
    assert!(r.matched);
    assert_eq!(r.source, DataSource::Cache);
}
