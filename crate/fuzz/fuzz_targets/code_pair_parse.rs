#![no_main]

use libfuzzer_sys::fuzz_target;

// Any pair the parser accepts must be a genuinely nested pair with a
// working decoder and coset labelling: decoding a codeword of C1 is the
// identity and its label is stable under C2 shifts.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pair) = npab::gf2codes::parse_code_pair(text) {
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
});
