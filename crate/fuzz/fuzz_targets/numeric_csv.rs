#![no_main]

use deadcore::io::{parse_numeric_csv, write_table};
use libfuzzer_sys::fuzz_target;

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y || (x.is_nan() && y.is_nan()),
        (None, None) => true,
        _ => false,
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_numeric_csv(text) else {
        return;
    };
    assert!(table.rows.iter().all(|r| r.len() == table.header.len()));
    // Written values are printed with 17 significant digits, so re-reading
    // them must give back the same numbers.
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    let mut buf = Vec::new();
    write_table(&mut buf, &header, table.rows.iter().cloned()).unwrap();
    let again = parse_numeric_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(table.header, again.header);
    assert_eq!(table.rows.len(), again.rows.len());
    for (a, b) in table.rows.iter().zip(&again.rows) {
        assert!(a.iter().zip(b).all(|(x, y)| same(*x, *y)), "{a:?} != {b:?}");
    }
});
