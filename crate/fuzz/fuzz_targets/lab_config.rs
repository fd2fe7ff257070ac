#![no_main]

use cylab::config::parse_config;
use libfuzzer_sys::fuzz_target;

const COMMANDS: [&str; 9] = [
    "density",
    "frame-bounds",
    "riesz-bounds",
    "sweep",
    "interpolate",
    "reconstruct",
    "growth",
    "kernel-check",
    "theta-eval",
];

// first byte picks the command, the rest is the config text
fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let command = COMMANDS[sel as usize % COMMANDS.len()];
    if let Ok(echo) = parse_config(command, text) {
        // the echo is itself a valid config
        let again = parse_config(command, &echo.to_string()).expect("echo reparses");
        assert_eq!(again, echo);
    }
});
