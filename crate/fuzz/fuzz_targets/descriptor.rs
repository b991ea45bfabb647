#![no_main]

use libfuzzer_sys::fuzz_target;
use tmlab_core::IndexFunction;

fuzz_target!(|data: &str| {
    if let Ok(f) = data.parse::<IndexFunction>() {
        let canonical = f.to_string();
        let again: IndexFunction = canonical.parse().expect("canonical form parses");
        assert_eq!(again.family(), f.family());
    }
});
