#![no_main]

use libfuzzer_sys::fuzz_target;

// First line: dotted path. Remainder: a TOML table.
fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let (path, body) = s.split_once('\n').unwrap_or((s, ""));
        if let Ok(mut table) = toml::from_str::<toml::Table>(body) {
            let _ = gie_cli::config::set_path(&mut table, path, 1.5);
        }
    }
});
