//! Writes the STOI cross-check fixtures as WAV files and prints this
//! crate's scores, so an external reference implementation can be run on
//! the same audio (see tools/stoi_reference.py).

#[path = "../tests/common/stoi_fixtures.rs"]
mod stoi_fixtures;

use clearwave_core::audio::write_wav;
use clearwave_core::metrics::stoi;

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "stoi_fixtures".to_string());
    std::fs::create_dir_all(&out_dir).expect("create output dir");
    for (i, (clean, processed)) in stoi_fixtures::stoi_crosscheck_fixtures().iter().enumerate() {
        let clean_path = format!("{out_dir}/clean_{i:02}.wav");
        let proc_path = format!("{out_dir}/proc_{i:02}.wav");
        write_wav(clean, &clean_path).expect("write clean");
        write_wav(processed, &proc_path).expect("write processed");
        let score = stoi(clean, processed).expect("stoi");
        println!("fixture {i:02}: stoi = {score:.6}");
    }
}
