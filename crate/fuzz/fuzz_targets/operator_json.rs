#![no_main]

use deadcore::operator::RadialOperator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Anything accepted must survive a write/read cycle unchanged.
    if let Ok(op) = RadialOperator::from_json_str(text) {
        let again = RadialOperator::from_json_str(&op.to_json_string().unwrap()).unwrap();
        assert_eq!(op, again);
    }
});
