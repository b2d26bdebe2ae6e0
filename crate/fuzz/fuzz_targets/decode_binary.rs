#![no_main]

use ho_coulomb::tensor_store::{ExportFormat, Tensor};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // anything that decodes must re-encode to the same bytes
    if let Ok(t) = Tensor::from_binary(data) {
        assert_eq!(t.encode(ExportFormat::Binary).unwrap(), data);
    }
});
