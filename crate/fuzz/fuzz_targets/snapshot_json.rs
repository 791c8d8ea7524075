#![no_main]

use libfuzzer_sys::fuzz_target;
use quads_core::cma::StateSnapshot;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(snap) = StateSnapshot::from_json(text) else { return };
    if let Ok(state) = snap.to_state() {
        assert_eq!(state.snapshot(), snap);
    }
});
