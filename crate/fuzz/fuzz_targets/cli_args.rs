#![no_main]

use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; only parsing is exercised, nothing runs.
fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let text = String::from_utf8_lossy(data);
    let argv = std::iter::once("tmlab").chain(text.split('\0'));
    let _ = tmlab::parse_args(argv);
});
