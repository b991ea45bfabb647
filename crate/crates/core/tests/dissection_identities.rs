use tmlab_core::dissection::{dissect, good_set, interval_j, range_anchors, verify_floor_decomposition};
use tmlab_core::{IndexFunction, IndexMap};

#[test]
fn decomposition_holds_across_families_and_scales() {
    for text in ["power:6/5", "power:5/4", "sum:11/10,13/10", "nlogn"] {
        let f: IndexFunction = text.parse().unwrap();
        for e in [12u32, 14, 16] {
            let a = (1u64 << e).max(2 * f.x0());
            for (l, m) in [(2u64, 3u64), (3, 4), (4, 2)] {
                let (_, cells) = dissect(&f, a, l, m).unwrap();
                for cell in cells.iter().filter(|c| c.good) {
                    let v = verify_floor_decomposition(&f, cell).unwrap();
                    assert!(v.is_empty(), "{text} A = {a} cell {cell:?}: {:?}", v.first());
                }
            }
        }
    }
}

#[test]
fn intervals_tile_the_range_disjointly() {
    let f: IndexFunction = "power:6/5".parse().unwrap();
    for e in [15u32, 18, 20] {
        let a = 1u64 << e;
        let anchors = range_anchors(&f, a).unwrap();
        for (l, m) in [(2u64, 3u64), (3, 5)] {
            let lm = l * m;
            let mut previous_end = 0;
            let mut total = 0;
            for k in anchors.d0 * lm..anchors.d1 * lm {
                let j = interval_j(&f, k, l, m).unwrap();
                if !j.is_empty() {
                    assert!(j.start >= previous_end);
                    previous_end = j.end;
                }
                total += j.len();
                let lhs = f.derivative(j.start as f64) * lm as f64;
                assert!(j.is_empty() || lhs >= k as f64);
            }
            assert!(total <= a);
        }
    }
}

#[test]
fn observed_good_set_constant() {
    let mut worst = 0.0f64;
    for l in 2..10u64 {
        for m in 1..60u64 {
            for k in (0..5000u64).step_by(7) {
                let missing = m - good_set(k, l, m).unwrap().len() as u64;
                worst = worst.max(missing as f64 / l as f64);
            }
        }
    }
    assert!(worst <= 4.0, "observed constant {worst}");
}
