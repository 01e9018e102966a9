mod common;

use common::*;
use einv::io::{read_tensor, tensor_from_json, tensor_to_json, write_tensor};
use einv::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_bit_exact(
        left in prop::collection::vec(1usize..=3, 1..=3),
        right in prop::collection::vec(1usize..=3, 0..=2),
        seed: u64,
        scale in -300i32..300,
    ) {
        let t = gaussian(shape(&left, &right), seed).scale(einv::Complex64::new(10f64.powi(scale), 0.0));
        let back = tensor_from_json(&tensor_to_json(&t)).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("einv-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let t = gaussian(shape(&[2, 3], &[2]), 17);
    write_tensor(&path, &t).unwrap();
    assert_eq!(read_tensor(&path).unwrap(), t);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_inputs_name_the_problem() {
    let cases = [
        (r#"[1,2]"#, "$"),
        (r#"{"right_shape":[1],"re":[1]}"#, "left_shape"),
        (
            r#"{"left_shape":[1],"right_shape":[1],"re":[1],"im":[1,2]}"#,
            "im",
        ),
        (
            r#"{"left_shape":[1],"right_shape":[1,-2],"re":[1]}"#,
            "right_shape[1]",
        ),
        (r#"{"left_shape":[1],"right_shape":[1],"re":"x"}"#, "re"),
        (r#"{"left_shape":[1],"right_shape":[1]"#, "$"),
    ];
    for (text, want) in cases {
        match tensor_from_json(text) {
            Err(Error::Json { path, .. }) => assert_eq!(path, want, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    let missing = read_tensor("/nonexistent/einv.json").unwrap_err();
    assert_eq!(missing.kind(), "io");
}
