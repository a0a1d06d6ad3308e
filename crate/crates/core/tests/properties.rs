use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hosc::codec::{Decoder, DecoderConfig, Encoder, Freeze, Rectangle};
use hosc::construction::{build_spec, ConstraintId, HoscSpec, Layout, PositionRef};
use hosc::dts::{DifferenceTriangleSet, Ruler};
use hosc::hamming::{self, ComponentCode, DecodeOutcome};
use hosc::net::{check_pair, example_shift_net, GridPermutation, Mat2, NetRing};

fn ring_strategy() -> impl Strategy<Value = NetRing> {
    prop_oneof![
        (2u64..=12).prop_map(|m| NetRing::integers(m).unwrap()),
        prop::sample::select(vec![4u32, 8, 9]).prop_map(|q| NetRing::field(q).unwrap()),
    ]
}

fn rows_of(p: &GridPermutation, side: usize) -> Vec<HashSet<(usize, usize)>> {
    (0..side).map(|i| (0..side).map(|j| p.map(i, j)).collect()).collect()
}

fn reference() -> HoscSpec {
    let dts = DifferenceTriangleSet::from_marks(&[&[0, 6, 7], &[0, 2, 5]]).unwrap();
    build_spec(2, dts, example_shift_net(2, 8).unwrap(), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pair_condition_matches_row_intersections(
        ring in ring_strategy(),
        e in prop::array::uniform8(0u32..64),
    ) {
        let n = ring.size() as u32;
        let a = Mat2::new(e[0] % n, e[1] % n, e[2] % n, e[3] % n);
        let b = Mat2::new(e[4] % n, e[5] % n, e[6] % n, e[7] % n);
        prop_assume!(a.is_invertible(&ring) && b.is_invertible(&ring));
        let side = ring.size();
        let ra = rows_of(&GridPermutation::from_matrix(&a, &ring).unwrap(), side);
        let rb = rows_of(&GridPermutation::from_matrix(&b, &ring).unwrap(), side);
        let brute = ra.iter().all(|x| rb.iter().all(|y| x.intersection(y).count() == 1));
        prop_assert_eq!(check_pair(&a, &b, &ring).unwrap(), brute);
    }

    #[test]
    fn memberships_invert_constraint_members(
        chain in 0usize..2, block in -20i64..60, row in 0usize..8, col in 0usize..8,
    ) {
        let spec = reference();
        let lay: &Layout = &spec;
        let pos = PositionRef { chain, block, row, col };
        let ms = lay.memberships(pos).unwrap();
        prop_assert_eq!(ms.len(), 3);
        for (id, c) in ms {
            let members = lay.constraint_members(id).unwrap();
            prop_assert!(members.contains(&(pos, c)));
        }
    }

    #[test]
    fn constraint_members_are_distinct(chain in 0usize..2, t in -5i64..30, row in 0usize..8) {
        let spec = reference();
        let id = ConstraintId { chain, time: 2 * t, row };
        let members = spec.constraint_members(id).unwrap();
        prop_assert_eq!(members.len(), spec.codeword_len());
        let cells: HashSet<_> = members.iter().map(|m| m.0).collect();
        prop_assert_eq!(cells.len(), members.len());
        let cols: HashSet<_> = members.iter().map(|m| m.1).collect();
        prop_assert_eq!(cols.len(), members.len());
    }

    #[test]
    fn noiseless_streams_need_no_flips(seed in any::<u64>(), len in 1usize..30) {
        let spec = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut enc = Encoder::new(&spec);
        let mut cfg = DecoderConfig::new(10, 2);
        cfg.recheck = true;
        let mut dec = Decoder::new(&spec, cfg).unwrap();
        let mut sent = Vec::new();
        let mut out = Vec::new();
        for _ in 0..len {
            let info: Vec<u8> = (0..enc.info_len()).map(|_| rng.random_range(0..2)).collect();
            let r = enc.encode_step(&info).unwrap();
            prop_assert_eq!(r.info_bits(spec.info_per_row()), info);
            sent.push(r.clone());
            out.extend(dec.decode_advance(&r).unwrap());
        }
        out.extend(dec.flush(&enc.terminate(9), Freeze::All).unwrap());
        prop_assert_eq!(sent, out);
        prop_assert_eq!(dec.stats().flips, 0);
    }

    #[test]
    fn rectangle_serialization_round_trips(rows in 1usize..20, cols in 1usize..90, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..rows * cols).map(|_| rng.random_range(0..2)).collect();
        let r = Rectangle::from_bits(rows, cols, bits).unwrap();
        prop_assert_eq!(&Rectangle::unpack(rows, cols, &r.pack()).unwrap(), &r);
        let bytes = r.to_bytes();
        prop_assert_eq!(bytes.len(), Rectangle::byte_len(rows, cols));
        prop_assert_eq!(&Rectangle::from_bytes(rows, cols, &bytes).unwrap(), &r);
    }

    #[test]
    fn canonical_form_ignores_order_and_reflection(flips in prop::array::uniform3(any::<bool>()), rot in 0usize..3) {
        let base: Vec<Vec<i64>> = vec![vec![0, 4, 5], vec![0, 2, 8], vec![0, 3, 10]];
        let dts = DifferenceTriangleSet::validate(base.iter().map(|m| Ruler::new(m.clone()).unwrap()).collect()).unwrap();
        let mut moved: Vec<Ruler> = base
            .iter()
            .zip(flips)
            .map(|(m, f)| {
                let r = Ruler::new(m.clone()).unwrap();
                if f { r.reflected() } else { r }
            })
            .collect();
        moved.rotate_left(rot);
        let other = DifferenceTriangleSet::validate(moved).unwrap();
        prop_assert_eq!(other.canonical(), dts.canonical());
        prop_assert_eq!(other.certify().distance_set, dts.certify().distance_set);
    }

    #[test]
    fn hamming_corrects_any_single_error(n in 8usize..200, seed in any::<u64>()) {
        let code = hamming::build(n, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode_systematic(&info).unwrap();
        prop_assert_eq!(code.syndrome_of(&cw), 0);
        let pos = rng.random_range(0..n);
        let mut rx = cw.clone();
        rx[pos] ^= 1;
        prop_assert_eq!(code.decode_syndrome(code.syndrome_of(&rx)), DecodeOutcome::Flip(pos));
    }
}

#[test]
fn spec_json_round_trip_keeps_hash() {
    let spec = reference();
    let back = HoscSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(back.hash(), spec.hash());
    assert_eq!(back.combined_ruler(), spec.combined_ruler());
}
