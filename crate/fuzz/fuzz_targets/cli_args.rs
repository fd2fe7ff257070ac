#![no_main]

use clap::Parser;
use cylab::Cli;
use libfuzzer_sys::fuzz_target;

// NUL-separated argument list, parsed but never executed
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("cylab").chain(text.split('\0'));
    let _ = Cli::try_parse_from(args);
});
