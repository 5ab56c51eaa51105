#![no_main]

use libfuzzer_sys::fuzz_target;
use streamsec::text::parse_message;
use streamsec::tls::TlsParams;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let p = TlsParams::default();
    if let Ok(m) = parse_message(s, p.atoms()) {
        assert_eq!(parse_message(&m.to_string(), p.atoms()).as_ref(), Ok(&m));
        let _ = m.to_expression();
    }
});
