use proptest::prelude::*;
use stokes_green::{parse_config, FieldSnapshot};

fn snapshot() -> impl Strategy<Value = FieldSnapshot> {
    ([1u32..4, 1..4, 1..4], 1u32..4, 1u32..3).prop_flat_map(|(dims, ncomp, ntimes)| {
        let len = FieldSnapshot::payload_len(dims, ncomp, ntimes).unwrap();
        // raw bit patterns cover NaN payloads, signed zeros and subnormals
        (
            prop::array::uniform3(any::<u64>()),
            any::<u64>(),
            any::<u64>(),
            prop::collection::vec(any::<u64>(), len),
        )
            .prop_map(move |(l, rho, t, data)| {
                FieldSnapshot::new(
                    dims,
                    ncomp,
                    ntimes,
                    l.map(f64::from_bits),
                    f64::from_bits(rho),
                    f64::from_bits(t),
                    data.into_iter().map(f64::from_bits).collect(),
                )
                .unwrap()
            })
    })
}

fn bits(s: &FieldSnapshot) -> Vec<u64> {
    let head = s
        .lengths
        .iter()
        .chain([&s.rho, &s.t_final])
        .map(|v| v.to_bits());
    head.chain(s.data.iter().map(|v| v.to_bits())).collect()
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(s in snapshot()) {
        let bytes = s.to_bytes();
        let back = FieldSnapshot::read_from(&bytes[..]).unwrap();
        prop_assert_eq!((back.dims, back.ncomp, back.ntimes), (s.dims, s.ncomp, s.ntimes));
        prop_assert_eq!(bits(&back), bits(&s));
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn truncated_files_are_rejected(s in snapshot(), cut in 1usize..64) {
        let bytes = s.to_bytes();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(FieldSnapshot::read_from(&bytes[..keep]).is_err());
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.sgf");
    let s = FieldSnapshot::new(
        [2, 1, 1],
        2,
        1,
        [1.0, 0.5, 2.0],
        1.0,
        0.5,
        vec![f64::NAN, -0.0, 1e-310, 3.0],
    )
    .unwrap();
    s.save(&path).unwrap();
    let back = FieldSnapshot::load(&path).unwrap();
    assert_eq!(bits(&back), bits(&s));
}

#[test]
fn config_errors_are_collected() {
    let err = parse_config("[disc]\nN = 12\nM = 16\n[physics]\nrho = -1.0\n[extra]\nbogus = 3\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("M >= 2N violated: M=16, N=12"), "{err}");
    assert!(err.contains("rho"), "{err}");
    assert!(err.contains("unknown key extra.bogus"), "{err}");
}
