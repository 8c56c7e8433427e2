#![no_main]

use deadcore::free_boundary::BracketParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(params) = serde_json::from_slice::<BracketParams>(data) else {
        return;
    };
    if params.validate().is_ok() {
        let again: BracketParams = serde_json::from_str(&serde_json::to_string(&params).unwrap()).unwrap();
        assert_eq!(params, again);
    }
});
