use twisted_blocks::linalg::{fmt_q, q};
use twisted_blocks_wasm::{dc_json, graded_dims_json, virasoro_json};

#[test]
fn dc_rows_carry_coefficients() {
    let v = dc_json("A", 3, "flip", "", 2, 2).unwrap();
    let rows = v["weights"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["n"].as_array().unwrap().len(), 3);
    }
    assert_eq!(v["zero_in_dc"], true);
    assert!(dc_json("A", 1, "id", "", 1, 0).is_err());
    assert!(dc_json("Q", 1, "id", "", 1, 1).is_err());
}

#[test]
fn twisted_defect_matches_central_term() {
    // A2 with the flip at level 2: dim g = 8, dual Coxeter number 3
    let cv = q(8) * q(2) / q(5);
    let mut checked = 0;
    for n in -2i64..=2 {
        for k in -2i64..=2 {
            let v = virasoro_json("A", 2, "flip", "", 2, "", 2, 4, n, k);
            let Ok(v) = v else { continue };
            let expect = if n == -k { q(n * n * n - n) / q(12) * &cv } else { q(0) };
            for l in v["layers"].as_array().unwrap() {
                assert_eq!(l["scalar"], fmt_q(&expect), "n={n} k={k}");
                checked += 1;
            }
        }
    }
    assert!(checked > 40);
}

#[test]
fn graded_dims_grow() {
    let v = graded_dims_json("A", 2, "flip", "", 2, "2", 2, 3).unwrap();
    let dims: Vec<u64> = v["dims"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(dims.len(), 4);
    assert!(dims.windows(2).all(|w| w[0] <= w[1]));
    assert!(graded_dims_json("A", 2, "flip", "", 2, "7", 2, 3).is_err());
}
