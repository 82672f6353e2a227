use covert_core::channel::families;
use covert_core::{parse_channel, reduce, Channel};
use proptest::prelude::*;

fn stochastic_row(width: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, width).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn channel() -> impl Strategy<Value = Channel> {
    (2usize..5, 2usize..5)
        .prop_flat_map(|(rows, cols)| (prop::collection::vec(stochastic_row(cols), rows), 0..rows))
        .prop_filter_map("duplicate rows", |(m, off)| {
            Channel::from_matrix(m, off).ok()
        })
}

proptest! {
    #[test]
    fn json_round_trip(ch in channel()) {
        let back = parse_channel(&ch.to_json()).unwrap();
        prop_assert_eq!(back.off_index(), ch.off_index());
        prop_assert_eq!(back.input_labels(), ch.input_labels());
        for (a, b) in back.rows().iter().zip(ch.rows()) {
            prop_assert!(a.max_abs_diff(b) <= 1e-15);
        }
    }

    #[test]
    fn reduce_is_idempotent(ch in channel()) {
        if let Ok(once) = reduce(&ch) {
            let twice = reduce(once.channel()).unwrap();
            prop_assert!(twice.is_unchanged());
            prop_assert_eq!(twice.channel(), once.channel());
        }
    }
}

#[test]
fn reduce_drops_outputs_outside_off_support() {
    let ch = Channel::from_matrix(
        vec![
            vec![0.5, 0.5, 0.0],
            vec![0.2, 0.3, 0.5],
            vec![0.3, 0.7, 0.0],
        ],
        0,
    )
    .unwrap();
    let r = reduce(&ch).unwrap();
    assert_eq!(r.num_inputs(), 2);
    assert_eq!(r.num_outputs(), 2);
    assert_eq!(r.input_labels(), ["0", "2"]);
}

#[test]
fn families_have_expected_shape() {
    let k = families::kary_uniform_error(4, 0.2).unwrap();
    assert_eq!((k.num_inputs(), k.num_outputs()), (4, 4));
    let t = families::ternary_cyclic();
    assert_eq!(t.entry(0, 2), 0.62);
    let f = families::bsc_with_off(0.1).unwrap();
    assert_eq!(f.off_index(), 1);
    assert_eq!(f.off_output().probs(), [0.5, 0.5]);
}

#[test]
fn rejects_bad_files() {
    assert!(parse_channel("{").is_err());
    assert!(parse_channel(r#"{"off": 0, "matrix": [[0.5, 0.6], [0.1, 0.9]]}"#).is_err());
    assert!(parse_channel(r#"{"off": "z", "matrix": [[0.5, 0.5], [0.1, 0.9]]}"#).is_err());
    assert!(parse_channel(r#"{"off": 0, "matrix": [[0.5, 0.5], [0.5, 0.5]]}"#).is_err());
}
