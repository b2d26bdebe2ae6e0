#![no_main]

use ho_coulomb::{canonical_key, ElementKey};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(k) = data.parse::<ElementKey>() {
        let text = k.indices().map(|n| n.to_string()).join(" ");
        assert_eq!(text.parse::<ElementKey>().unwrap(), k);
        assert!(canonical_key(&k).key <= k);
    }
});
