#![no_main]

use libfuzzer_sys::fuzz_target;
use quads_core::quantum::{decode_amplitudes, Statevector};
use quads_core::testbed::Grid;

fuzz_target!(|data: &[u8]| {
    let _ = decode_amplitudes(data);
    let Some((&shape, bytes)) = data.split_first() else { return };
    let d = 1 + (shape & 0x3) as usize;
    let bits = 1 + ((shape >> 2) & 0x3) as u32;
    let grid = Grid::new(d, bits).unwrap();
    if let Ok(s) = Statevector::from_bytes(grid, bytes) {
        assert_eq!(s.len() as u64, grid.total_points());
        assert_eq!(s.to_bytes(), bytes);
    }
});
