#![no_main]

use libfuzzer_sys::fuzz_target;
use quads_harness::ExperimentPlan;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(plan) = ExperimentPlan::from_json(text) {
        if plan.validate().is_ok() {
            let cells = plan.cells();
            assert_eq!(cells.len(), plan.methods.len() * plan.functions.len() * plan.dimensions.len());
        }
        // Anything that parsed must survive its own serialization.
        assert_eq!(ExperimentPlan::from_json(&plan.to_json()).unwrap(), plan);
    }
});
