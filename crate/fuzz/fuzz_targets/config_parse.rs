#![no_main]
use libfuzzer_sys::fuzz_target;
use wpb_experiments::Config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = Config::parse(text) else { return };
    if cfg.validate().is_ok() {
        let rendered = cfg.to_text();
        let again = Config::parse(&rendered).expect("re-parsing rendered config");
        assert_eq!(again.to_text(), rendered);
    }
});
