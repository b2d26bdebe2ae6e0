#![no_main]

use ho_coulomb::tensor_store::Tensor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(t) = Tensor::from_json_str(data) {
        let again = Tensor::from_json_str(&t.to_json_string().unwrap()).unwrap();
        assert_eq!(again, t);
    }
});
