use std::io::Write;

use ratewarp_core::{Error, GeneratorConfig, WeightStore};

fn cfg(c: usize) -> GeneratorConfig {
    GeneratorConfig {
        base_channels: c,
        ..GeneratorConfig::default()
    }
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.rwv");
    let store = WeightStore::init_random(&cfg(16), 9).unwrap();
    store.save(&path).unwrap();
    let back = WeightStore::load(&path).unwrap();
    assert_eq!(back.config(), store.config());
    for entry in store.manifest() {
        let a = store.get(&entry.name).unwrap();
        let b = back.get(&entry.name).unwrap();
        assert_eq!(a.shape(), b.shape());
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn seeds_differ() {
    let a = WeightStore::init_random(&cfg(16), 1).unwrap();
    let b = WeightStore::init_random(&cfg(16), 2).unwrap();
    let name = "conv_pre.weight";
    assert_ne!(a.get(name).unwrap(), b.get(name).unwrap());
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.rwv");
    WeightStore::init_random(&cfg(16), 0)
        .unwrap()
        .save(&path)
        .unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
    assert!(matches!(
        WeightStore::load(&path),
        Err(Error::Truncated { .. })
    ));
}

#[test]
fn trailing_bytes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.rwv");
    WeightStore::init_random(&cfg(16), 0)
        .unwrap()
        .save(&path)
        .unwrap();
    std::fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .unwrap()
        .write_all(&[0; 4])
        .unwrap();
    assert!(WeightStore::load(&path).is_err());
}

#[test]
fn config_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.rwv");
    WeightStore::init_random(&cfg(16), 0)
        .unwrap()
        .save(&path)
        .unwrap();
    assert!(WeightStore::load_for(&path, &cfg(32)).is_err());
}

#[test]
fn missing_file_is_io() {
    let err = WeightStore::load("/nonexistent/w.rwv").unwrap_err();
    assert!(err.is_io());
}
