//! The recorded-dataset loader must never panic on arbitrary CSV pairs, and
//! every dataset it accepts must satisfy its own invariants: aligned ids,
//! rectangular features, yields normalized into [0, 1].
#![no_main]

use std::io::Cursor;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // One input drives both files: everything before the first NUL is the
    // features document, everything after is the yields document.
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let features = &data[..split];
    let yields = data.get(split + 1..).unwrap_or(&[]);
    if let Ok(dataset) =
        asd::replay::load_dataset_from_readers(Cursor::new(features), Cursor::new(yields))
    {
        assert!(!dataset.is_empty());
        let dim = dataset.dim();
        assert!(dataset.features.iter().all(|row| row.len() == dim));
        for name in dataset.target_names() {
            let values = dataset.target(name).expect("listed target resolves");
            assert_eq!(values.len(), dataset.len());
            assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
});
