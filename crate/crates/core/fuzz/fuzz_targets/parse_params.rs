#![no_main]

use libfuzzer_sys::fuzz_target;
use streamsec::scenario::parse_params;
use streamsec::tls::TlsParams;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(labels) = parse_params(s) {
        // Accepted labels must build a consistent atom table.
        TlsParams::new(&labels).unwrap();
    }
});
