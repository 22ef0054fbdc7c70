use ndkv::bench::{generate_dataset, generate_query, Distribution};
use ndkv::io::{load_csv, load_structure, save_structure, write_csv};
use ndkv::{BuildConfig, Error, PreprocessedDatabase, Variant};

#[test]
fn structure_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_dataset(5_000, 4, Distribution::Clustered, 3);
    let q = generate_query(&ds, 0.01, 1);
    for v in Variant::ALL {
        let pre =
            PreprocessedDatabase::build(&ds, &BuildConfig::default().with_variant(v)).unwrap();
        let path = dir.path().join(format!("{}.ndkv", v.name()));
        save_structure(&pre, &path).unwrap();
        let loaded = load_structure(&path).unwrap();
        assert_eq!(loaded, pre, "{}", v.name());
        assert_eq!(
            loaded.search(&q).unwrap().sorted(),
            pre.search(&q).unwrap().sorted()
        );
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let ds = generate_dataset(1_000, 5, Distribution::Uniform, 8);
    write_csv(&ds, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), ds);
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.ndkv");
    let ds = generate_dataset(500, 2, Distribution::Uniform, 1);
    save_structure(
        &PreprocessedDatabase::build(&ds, &BuildConfig::default()).unwrap(),
        &path,
    )
    .unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(load_structure(&path), Err(Error::Truncated(_))));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_structure(dir.path().join("absent")),
        Err(Error::Io(_))
    ));
    assert!(matches!(
        load_csv(dir.path().join("absent.csv")),
        Err(Error::Io(_))
    ));
}
