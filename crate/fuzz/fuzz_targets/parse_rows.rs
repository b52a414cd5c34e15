// SPDX-License-Identifier: Apache-2.0

#![no_main]

use detffsim::metrics::{build_comparison, parse_rows, render_csv, render_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let Ok(rows) = parse_rows(s) else { return };
    let names: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let c = build_comparison(rows, &refs);
    let _ = render_text(&c);
    let _ = render_csv(&c);
});
