use mimo_ofdm_rx::dataset::{split, split_sizes};
use mimo_ofdm_rx::harness::{wilson_interval, BerRecord, ReceiverId};
use mimo_ofdm_rx::modem::{hard_demap, map_bits, QamConstellation};
use mimo_ofdm_rx::neural::{decode_network, encode_network, MlpNetwork};
use mimo_ofdm_rx::numerics::FftPlan;
use mimo_ofdm_rx::pa::RappPaModel;
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn complex_vec(max_len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| C::new(a, b)), 1..=max_len)
}

proptest! {
    #[test]
    fn dft_is_unitary_and_invertible(x in complex_vec(70)) {
        let fft = FftPlan::<f64>::new(x.len());
        let y = fft.dft(&x);
        let e_x: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let e_y: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e_x - e_y).abs() <= 1e-10 * e_x.max(1.0));
        let back = fft.idft(&y);
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rapp_is_bounded_monotone_and_phase_preserving(
        clipping_db in -5.0..20.0f64,
        delta in 0.5..10.0f64,
        r1 in 0.0..50.0f64,
        r2 in 0.0..50.0f64,
        phase in -3.1..3.1f64,
    ) {
        let pa = RappPaModel::new(clipping_db, delta, 1.0).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(pa.amam(lo) <= pa.amam(hi));
        prop_assert!(pa.amam(hi) <= pa.v_sat());
        prop_assert!(pa.amam(hi) <= hi);
        if hi > 1e-9 {
            let out = pa.apply_one(C::from_polar(hi, phase));
            let diff = (out.arg() - phase).abs();
            prop_assert!(diff < 1e-9 || (diff - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn qam_mapping_round_trips(bits in prop::collection::vec(0u8..2, 0..64usize).prop_map(|mut v| { v.truncate(v.len() / 4 * 4); v }), scale in 0.1..5.0f64) {
        let con = QamConstellation::<f64>::qam16().scaled(scale);
        let symbols = map_bits(&bits, &con).unwrap();
        prop_assert_eq!(hard_demap(&symbols, &con), bits);
    }

    #[test]
    fn split_is_a_partition(n in 0usize..300, a in 0.0..1.0f64, b in 0.0..1.0f64, seed in any::<u64>()) {
        let (a, b) = if a + b > 1.0 { (a / 2.0, b / 2.0) } else { (a, b) };
        let fractions = [a, b, 1.0 - a - b];
        let sizes = split_sizes(n, fractions).unwrap();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        for (s, f) in sizes.iter().zip(fractions) {
            prop_assert!((*s as f64 - f * n as f64).abs() < 1.0 + 1e-9);
        }
        let (x, y, z) = split((0..n).collect::<Vec<_>>(), fractions, seed).unwrap();
        prop_assert_eq!([x.len(), y.len(), z.len()], sizes);
        let mut all: Vec<usize> = x.into_iter().chain(y).chain(z).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1u64..1_000_000, frac in 0.0..=1.0f64) {
        let errors = ((n as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(errors, n);
        let p = errors as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12);
        prop_assert!(p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn csv_rows_round_trip(
        r in 0usize..7,
        snr in -20.0..40.0f64,
        clip in prop_oneof![Just(f64::INFINITY), 0.0..20.0f64],
        bits in 10_000u64..10_000_000,
        frac in 0.0..=1.0f64,
        ms in 0u64..10_000_000,
        seed in any::<u64>(),
    ) {
        let errors = ((bits as f64) * frac) as u64;
        let rec = BerRecord {
            receiver: ReceiverId::ALL[r],
            snr_db: snr,
            clipping_db: clip,
            bits_simulated: bits,
            bit_errors: errors,
            ber: errors as f64 / bits as f64,
            wall_time_s: ms as f64 / 1e3,
            seed,
        };
        prop_assert_eq!(BerRecord::from_csv_row(&rec.to_csv_row()).unwrap(), rec);
    }

    #[test]
    fn checkpoints_round_trip(dims in prop::collection::vec(1usize..12, 2..5), seed in any::<u64>()) {
        let net = MlpNetwork::<f32>::new(&dims, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(decode_network::<f32>(&encode_network(&net)).unwrap(), net);
    }
}
