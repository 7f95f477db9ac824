//! Runs the fuzz harness assertions over the checked-in corpus seeds, so
//! the seeds stay valid and the parser post-conditions hold under plain
//! `cargo test` even where libFuzzer is unavailable.

use std::fs;
use std::path::PathBuf;

fn corpus(name: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fuzz/corpus/{name}"));
    let mut entries: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("missing corpus {}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    entries.sort();
    assert!(!entries.is_empty(), "empty corpus {name}");
    entries
}

#[test]
fn config_corpus_seeds_parse_and_validate() {
    for (path, bytes) in corpus("config_parse") {
        let text = std::str::from_utf8(&bytes).unwrap();
        let config = npab::config::parse_config(text)
            .unwrap_or_else(|e| panic!("{} must parse: {e}", path.display()));
        if let (Some(n), Some(r)) = (config.n, config.r) {
            assert!(r >= 1 && (2 * n) % r == 0, "{}", path.display());
        }
        assert!(config.abort_threshold > 0.0 && config.abort_threshold < 1.0);
    }
}

#[test]
fn code_pair_corpus_seeds_parse_and_round_trip() {
    for (path, bytes) in corpus("code_pair_parse") {
        let text = std::str::from_utf8(&bytes).unwrap();
        let pair = npab::gf2codes::parse_code_pair(text)
            .unwrap_or_else(|e| panic!("{} must parse: {e}", path.display()));
        assert!(pair.key_length() >= 1);
        assert_eq!(
            pair.key_length(),
            pair.c1().dimension() - pair.c2().dimension()
        );
        let zero = npab::gf2codes::BitVector::zeros(pair.block_len());
        assert_eq!(pair.decode_to_c1(&zero).unwrap(), zero);
        assert_eq!(pair.coset_label(&zero).unwrap().weight(), 0);
        let round_trip = npab::gf2codes::code_pair_to_string(&pair);
        let reparsed = npab::gf2codes::parse_code_pair(&round_trip).unwrap();
        assert_eq!(reparsed.key_length(), pair.key_length());
    }
}

#[test]
fn transcript_corpus_seeds_round_trip() {
    for (path, bytes) in corpus("transcript_json") {
        let text = std::str::from_utf8(&bytes).unwrap();
        let transcript = npab::report::parse_transcript(text)
            .unwrap_or_else(|e| panic!("{} must parse: {e}", path.display()));
        let encoded = npab::report::transcript_json(&transcript);
        let back = npab::report::parse_transcript(&encoded).unwrap();
        assert_eq!(transcript, back);
    }
}

#[test]
fn parsers_survive_mutated_corpus_seeds() {
    // A deterministic miniature of what the fuzzers do: byte-level
    // mutations of every corpus seed must never panic a parser.
    use rand::Rng;
    let mut rng = npab::rng::stream(991, "mutation-smoke");
    for (name, parse) in [
        (
            "config_parse",
            (|text| {
                let _ = npab::config::parse_config(text);
            }) as fn(&str),
        ),
        ("code_pair_parse", |text| {
            let _ = npab::gf2codes::parse_code_pair(text);
        }),
        ("transcript_json", |text| {
            let _ = npab::report::parse_transcript(text);
        }),
    ] {
        for (_, bytes) in corpus(name) {
            for _ in 0..500 {
                let mut mutated = bytes.clone();
                for _ in 0..rng.gen_range(1..8) {
                    match rng.gen_range(0..3) {
                        0 if !mutated.is_empty() => {
                            let at = rng.gen_range(0..mutated.len());
                            mutated[at] = rng.gen();
                        }
                        1 if !mutated.is_empty() => {
                            let at = rng.gen_range(0..mutated.len());
                            mutated.remove(at);
                        }
                        _ => {
                            let at = rng.gen_range(0..=mutated.len());
                            mutated.insert(at, rng.gen());
                        }
                    }
                }
                if let Ok(text) = std::str::from_utf8(&mutated) {
                    parse(text);
                }
            }
        }
    }
}

#[test]
fn parsers_survive_hostile_inputs() {
    // A small in-tree sample of the adversarial shapes the fuzzers explore.
    let hostile = [
        "",
        "=",
        "a=b",
        "experiment.kind = single\nsession.n = 99999999999999999999",
        "7 4 3",
        "0 0 0",
        "18446744073709551615 1 1\n1\n1",
        "2 2 1\n10\n01\n1",
        "{\"alice_bits\": []}",
        "{}",
        "[1,2,3]",
        "\u{0}\u{0}\u{0}",
    ];
    for text in hostile {
        let _ = npab::config::parse_config(text);
        let _ = npab::gf2codes::parse_code_pair(text);
        let _ = npab::report::parse_transcript(text);
    }
}
