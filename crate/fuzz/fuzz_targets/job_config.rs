#![no_main]

use fejer_cli::parse_job_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(job) = parse_job_config(text) {
            let _ = job.check_sources();
            let _ = job.orders();
        }
    }
});
