use sublorentz::io::{load_measure, parse_measure, sample_chronological_pair, save_measure, IoError};

#[test]
fn measure_file_roundtrip_is_exact() {
    let (mu, _) = sample_chronological_pair(7, 3, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.txt");
    save_measure(&mu, &path).unwrap();
    assert_eq!(load_measure(&path).unwrap(), mu);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_measure(dir.path().join("absent.txt")), Err(IoError::Io(_))));
}

#[test]
fn malformed_lines_report_their_position() {
    let text = "sublorentz-measure v1\natom 0 0 0 0.5\natom 1 2 x 0.5\n";
    match parse_measure(text) {
        Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}
