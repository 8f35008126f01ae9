#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // Must not panic; accepted configs must also survive a sweep edit.
        if let Ok(loaded) = gie_cli::config::parse(s) {
            if let Some(sweep) = &loaded.config.sweep {
                let _ = gie_cli::run::sweep_point_config(&loaded, sweep.to);
            }
        }
    }
});
