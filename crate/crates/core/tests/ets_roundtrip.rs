use chansel_core::dataio::{fingerprint, read_ets, read_ets_file, write_ets, write_ets_file};
use chansel_core::{Montage, TrialSet};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = f32> {
    prop_oneof![
        4 => any::<f32>().prop_filter("finite", |v| v.is_finite()),
        1 => Just(-0.0f32),
        1 => Just(0.0f32),
        2 => (1u32..0x0080_0000, any::<bool>()).prop_map(|(m, neg)| f32::from_bits(m | if neg { 0x8000_0000 } else { 0 })),
        1 => Just(f32::MAX),
        1 => Just(f32::MIN),
    ]
}

fn trial_set() -> impl Strategy<Value = TrialSet> {
    (1usize..5, 1usize..4, 1usize..24, 1.0f64..4000.0).prop_flat_map(|(n, c, t, fs)| {
        let names = proptest::collection::vec("[A-Za-z][A-Za-z0-9 _α-]{0,6}", c)
            .prop_filter("unique", |v| {
                let mut s = v.clone();
                s.sort();
                s.dedup();
                s.len() == v.len()
            });
        let classes = 1u32..=(n as u32);
        (names, classes, proptest::collection::vec(sample(), n * c * t)).prop_flat_map(move |(names, k, samples)| {
            let labels: Vec<u32> = (0..n).map(|i| i as u32 % k + 1).collect();
            Just(labels).prop_shuffle().prop_map(move |labels| {
                TrialSet::new(Montage::new(names.clone(), fs).unwrap(), t, labels, samples.clone()).unwrap()
            })
        })
    })
}

fn bits(t: &TrialSet) -> Vec<u32> {
    t.samples().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn write_read_is_bit_exact(t in trial_set()) {
        let mut bytes = Vec::new();
        write_ets(&t, &mut bytes).unwrap();
        let back = read_ets(bytes.as_slice()).unwrap();
        prop_assert_eq!(bits(&t), bits(&back));
        prop_assert_eq!(t.labels(), back.labels());
        prop_assert_eq!(t.montage().channel_names(), back.montage().channel_names());
        prop_assert_eq!(t.montage().fs_hz().to_bits(), back.montage().fs_hz().to_bits());
        prop_assert_eq!(fingerprint(&t), fingerprint(&back));
        let mut again = Vec::new();
        write_ets(&back, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn any_truncation_is_rejected(t in trial_set(), cut in 0.0f64..1.0) {
        let mut bytes = Vec::new();
        write_ets(&t, &mut bytes).unwrap();
        let keep = ((bytes.len() - 1) as f64 * cut) as usize;
        prop_assert!(read_ets(&bytes[..keep]).is_err());
    }
}

#[test]
fn file_helpers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.ets");
    let t = TrialSet::new(Montage::numbered(2, 100.0).unwrap(), 3, vec![1, 2], vec![-0.0, 1e-45, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0])
        .unwrap();
    let written = write_ets_file(&t, &path).unwrap();
    assert_eq!(written, std::fs::metadata(&path).unwrap().len());
    let back = read_ets_file(&path).unwrap();
    assert_eq!(bits(&t), bits(&back));
}
