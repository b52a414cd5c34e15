// SPDX-License-Identifier: Apache-2.0

#![no_main]

use detffsim::netlist::{parse_netlist_with, ParseOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    for check_sizing in [false, true] {
        let opts = ParseOptions {
            check_sizing,
            ..ParseOptions::default()
        };
        if let Ok(n) = parse_netlist_with(s, opts) {
            let _ = n.flatten();
        }
    }
});
