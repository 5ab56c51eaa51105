#![no_main]

use libfuzzer_sys::fuzz_target;
use streamsec::text::{parse_expression, parse_item};
use streamsec::tls::TlsParams;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let p = TlsParams::default();
    if let Ok(e) = parse_expression(s, p.atoms()) {
        assert_eq!(parse_expression(&e.to_string(), p.atoms()).as_ref(), Ok(&e));
    }
    if let Ok(i) = parse_item(s, p.atoms()) {
        assert_eq!(parse_item(&i.to_string(), p.atoms()).as_ref(), Ok(&i));
    }
});
