#![no_main]

use libfuzzer_sys::fuzz_target;
use tmlab_core::fourier::{CorrectionVector, PhaseKind, PhaseVector};

fuzz_target!(|data: &str| {
    for kind in [PhaseKind::Alpha, PhaseKind::Beta] {
        if let Ok(v) = PhaseVector::parse(data, kind) {
            assert_eq!(v.bits()[0], 1);
            let again = PhaseVector::parse(&v.to_string(), kind).expect("display form parses");
            assert_eq!(again, v);
        }
    }
    if let Ok(i) = CorrectionVector::parse(data) {
        assert_eq!(i.entries()[0], 0);
    }
});
