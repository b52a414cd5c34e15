// SPDX-License-Identifier: Apache-2.0

#![no_main]

use detffsim::engine::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(cfg) = parse_config(s) {
        cfg.validate().expect("parsed config is valid");
    }
});
