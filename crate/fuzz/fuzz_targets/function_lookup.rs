#![no_main]

use libfuzzer_sys::fuzz_target;
use quads_core::testbed::objective;

fuzz_target!(|data: &[u8]| {
    let Some((&d, name)) = data.split_first() else { return };
    let Ok(name) = std::str::from_utf8(name) else { return };
    let d = (d % 8) as usize;
    if let Ok(spec) = objective(name, d) {
        assert_eq!(spec.name(), name);
        let mid = vec![0.5; d];
        let _ = spec.evaluate(&mid);
    }
});
