// SPDX-License-Identifier: Apache-2.0

#![no_main]

use detffsim::engine::parse_stimulus;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let Ok(stim) = parse_stimulus(s) else { return };
    let back = parse_stimulus(&stim.to_string()).expect("printed stimulus parses");
    assert_eq!(back, stim);
    let _ = stim.expand(1_000_000);
});
