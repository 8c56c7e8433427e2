#![no_main]

use deadcore::nonradial::field::FieldSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = FieldSpec::from_json_str(text) {
        let again = FieldSpec::from_json_str(&field.to_json_string().unwrap()).unwrap();
        assert_eq!(field, again);
        let _ = field.is_exact();
    }
});
