#![no_main]

use libfuzzer_sys::fuzz_target;
use quads_core::TrialRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(r) = TrialRecord::from_json_line(line) {
        let again = TrialRecord::from_json_line(&r.to_json_line()).unwrap();
        assert_eq!(again.to_json_line(), r.to_json_line());
    }
});
