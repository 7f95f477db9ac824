#![no_main]

use libfuzzer_sys::fuzz_target;

// Transcript JSON decoding must never panic, and every accepted document
// must re-encode and decode to the same value.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(transcript) = npab::report::parse_transcript(text) {
        let encoded = npab::report::transcript_json(&transcript);
        let back = npab::report::parse_transcript(&encoded).unwrap();
        assert_eq!(transcript, back);
    }
});
