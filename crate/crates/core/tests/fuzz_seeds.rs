use std::path::Path;

use cylfock::pointset::parse_descriptor;

#[test]
fn descriptor_corpus_seeds_parse_as_expected() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/pointset_descriptor");
    let mut seen = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let path = e.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let parsed = parse_descriptor(&text);
        assert_eq!(
            parsed.is_ok(),
            !name.starts_with("invalid"),
            "{name}: {parsed:?}"
        );
        seen += 1;
    }
    assert!(seen >= 4);
}
