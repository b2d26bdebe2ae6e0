//! The fuzz entry points on the checked-in corpus and on mutated inputs.
//! Decoders must return errors, never panic, and anything they accept must
//! round-trip: byte for byte in binary, value for value in the text formats.

use std::fs;
use std::path::PathBuf;

use ho_coulomb::tensor_store::{ExportFormat, Tensor};
use ho_coulomb::ElementKey;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn check(bytes: &[u8], format: ExportFormat) -> bool {
    match Tensor::decode(bytes, format) {
        Ok(t) => {
            let again = t.encode(format).unwrap();
            if format == ExportFormat::Binary {
                assert_eq!(again, bytes);
            } else {
                assert_eq!(Tensor::decode(&again, format).unwrap(), t);
            }
            true
        }
        Err(_) => false,
    }
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut b = seed.to_vec();
    match rng.random_range(0..4) {
        0 if !b.is_empty() => {
            let i = rng.random_range(0..b.len());
            b[i] ^= 1 << rng.random_range(0..8);
        }
        1 => b.truncate(rng.random_range(0..=b.len())),
        2 if !b.is_empty() => {
            let i = rng.random_range(0..b.len());
            b.insert(i, rng.random());
        }
        _ => {
            let i = rng.random_range(0..=b.len());
            b.splice(i..i, seed[..seed.len().min(16)].iter().copied());
        }
    }
    b
}

#[test]
fn corpus_seeds_decode_as_named() {
    for (target, format) in [
        ("decode_binary", ExportFormat::Binary),
        ("decode_json", ExportFormat::Json),
        ("decode_csv", ExportFormat::Csv),
    ] {
        let seeds = corpus(target);
        assert!(seeds.len() >= 3, "{target}");
        for (name, bytes) in seeds {
            let valid = name.starts_with("shells") || name.starts_with("per_axis");
            assert_eq!(check(&bytes, format), valid, "{target}/{name}");
        }
    }
    for (name, bytes) in corpus("parse_key") {
        let parsed = std::str::from_utf8(&bytes).unwrap().parse::<ElementKey>();
        let valid = matches!(name.as_str(), "ground" | "commas" | "mixed_space");
        assert_eq!(parsed.is_ok(), valid, "parse_key/{name}");
    }
}

#[test]
fn mutated_seeds_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (target, format) in [
        ("decode_binary", ExportFormat::Binary),
        ("decode_json", ExportFormat::Json),
        ("decode_csv", ExportFormat::Csv),
    ] {
        for (_, seed) in corpus(target) {
            let mut accepted = 0;
            for _ in 0..300 {
                accepted += check(&mutate(&mut rng, &seed), format) as u32;
            }
            // most mutations break the digest
            assert!(accepted < 300);
        }
    }
}

proptest! {
    #[test]
    fn arbitrary_bytes(data in prop::collection::vec(any::<u8>(), 0..256)) {
        for f in [ExportFormat::Binary, ExportFormat::Json, ExportFormat::Csv] {
            check(&data, f);
        }
    }

    #[test]
    fn magic_prefixed_bytes(tail in prop::collection::vec(any::<u8>(), 0..200)) {
        let mut data = b"OSCV\x01\x00".to_vec();
        data.extend(tail);
        prop_assert!(!check(&data, ExportFormat::Binary));
    }

    #[test]
    fn arbitrary_key_text(s in "[0-9 ,\\-]{0,60}") {
        if let Ok(k) = s.parse::<ElementKey>() {
            let text = k.indices().map(|n| n.to_string()).join(",");
            prop_assert_eq!(text.parse::<ElementKey>().unwrap(), k);
        }
    }
}
