#![no_main]

use cylfock::pointset::parse_descriptor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(set) = parse_descriptor(text) {
        assert!(set.len() <= cylfock::pointset::MAX_POINTS);
        for w in set.points().windows(2) {
            assert!(w[0].y <= w[1].y);
        }
        for p in set.points() {
            assert!((0.0..1.0).contains(&p.x) && p.y.is_finite());
        }
    }
});
