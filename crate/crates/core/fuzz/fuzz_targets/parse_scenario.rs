#![no_main]

use libfuzzer_sys::fuzz_target;
use streamsec::cli::evaluate;
use streamsec::component::check_interfaces;
use streamsec::scenario::parse_scenario;
use streamsec::tls::TlsParams;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let p = TlsParams::default();
    let Ok(sc) = parse_scenario(s, "fuzz", &p) else { return };
    let report = check_interfaces(&sc.parts, &sc.connections);
    let (verdict, _, _) = evaluate(&sc, 6);
    assert_eq!(report.ok(), verdict.interface_ok);
});
