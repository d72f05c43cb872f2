#![no_main]
use libfuzzer_sys::fuzz_target;
use wpb_core::replay::{parse_trace, write_trace};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_trace(text) {
        let mut buf = Vec::new();
        write_trace(&table, &mut buf).expect("writing to memory");
        let again =
            parse_trace(std::str::from_utf8(&buf).unwrap()).expect("re-parsing our own output");
        assert_eq!(again, table);
    }
});
