// SPDX-License-Identifier: Apache-2.0

#![no_main]

use detffsim::netlist::{parse_netlist, serialize_netlist};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let Ok(n) = parse_netlist(s) else { return };
    let text = serialize_netlist(&n);
    let back = parse_netlist(&text).expect("serialized netlist parses");
    assert!(back.structurally_eq(&n));
    assert_eq!(serialize_netlist(&back), text);
});
