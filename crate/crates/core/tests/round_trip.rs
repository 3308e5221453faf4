use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lkss::leaky::{self, Randomness, RngRandomness};
use lkss::rational::ratio;
use lkss::{sharefile, Error, PrimeField, SchemeParams};

fn scheme() -> impl Strategy<Value = SchemeParams> {
    (2usize..=6, prop::sample::select(vec![7u64, 11, 13, 257, 65_537]))
        .prop_flat_map(|(servers, q)| (Just(servers), 2..=servers, Just(q)))
        .prop_flat_map(|(servers, tau, q)| (Just(servers), Just(tau), 1..tau, 0u64..=8, Just(q)))
        .prop_map(|(servers, tau, z, k, q)| {
            SchemeParams::new(servers, tau, z, ratio(k as i128, 8), PrimeField::new(q).unwrap()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn files_survive_the_share_format(
        params in scheme(),
        data in prop::collection::vec(any::<u8>(), 0..1500),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut source = RngRandomness::new(ChaCha8Rng::seed_from_u64(seed ^ 1));
        let bundles = sharefile::split_bytes(&data, &params, &mut source).unwrap();
        let files: Vec<Vec<u8>> = bundles.iter().map(|b| sharefile::write_share(b).unwrap()).collect();

        let mut order: Vec<usize> = (0..params.servers).collect();
        order.shuffle(&mut rng);
        let read: Vec<_> = order[..params.tau].iter().map(|&i| sharefile::read_share(&files[i]).unwrap()).collect();
        prop_assert_eq!(&sharefile::recover_bytes(&read).unwrap(), &data);

        let short = &read[..params.tau - 1];
        prop_assert!(
            matches!(sharefile::recover_bytes(short), Err(Error::InsufficientShares { .. })),
            "recovered from fewer than tau shares"
        );
    }

    #[test]
    fn sizes_and_randomness_match_the_layout(
        params in scheme(),
        len in 0usize..3000,
        seed in any::<u64>(),
    ) {
        let data = vec![0x5au8; len];
        let mut source = RngRandomness::new(ChaCha8Rng::seed_from_u64(seed));
        let bundles = sharefile::split_bytes(&data, &params, &mut source).unwrap();
        let lay = leaky::layout(&params);
        let bits = sharefile::bits_per_symbol(params.field) as usize;
        let superblocks = (len * 8).div_ceil(bits).div_ceil(lay.n_prime);
        for b in &bundles {
            prop_assert_eq!(b.payload.len(), superblocks * lay.share_symbols_per_server);
        }
        prop_assert_eq!(source.consumed() as usize, superblocks * lay.rand_per_superblock);
    }

    #[test]
    fn byte_and_symbol_paths_agree(params in scheme(), data in prop::collection::vec(any::<u8>(), 0..600), seed in any::<u64>()) {
        let via_bytes = sharefile::split_bytes(&data, &params, &mut RngRandomness::new(ChaCha8Rng::seed_from_u64(seed))).unwrap();

        let n_prime = leaky::layout(&params).n_prime;
        let mut symbols = sharefile::bytes_to_symbols(&data, params.field);
        symbols.resize(symbols.len().next_multiple_of(n_prime), params.field.zero());
        let via_symbols = leaky::encode(&symbols, &params, &mut RngRandomness::new(ChaCha8Rng::seed_from_u64(seed))).unwrap();

        for (a, b) in via_bytes.iter().zip(&via_symbols) {
            prop_assert_eq!(&a.payload, &b.payload);
            prop_assert_eq!(a.scheme_id, b.scheme_id);
        }
        prop_assert_eq!(leaky::decode(&via_symbols).unwrap(), symbols);
    }
}

#[test]
fn one_mebibyte_round_trip_and_storage_overhead() {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut data = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut data);
    for (servers, tau, z, alpha) in [(4, 3, 2, ratio(1, 4)), (3, 2, 1, ratio(1, 2)), (6, 4, 2, ratio(1, 3)), (12, 7, 6, ratio(0, 1))] {
        let params = SchemeParams::new(servers, tau, z, alpha, PrimeField::new(65_537).unwrap()).unwrap();
        let bundles = sharefile::split_bytes(&data, &params, &mut RngRandomness::new(ChaCha8Rng::seed_from_u64(1))).unwrap();
        assert_eq!(sharefile::recover_bytes(&bundles[servers - tau..]).unwrap(), data, "{params}");

        // Two data bytes per symbol, four stored bytes per symbol.
        let stored: usize = bundles.iter().map(|b| 4 * b.payload.len()).sum();
        let lambda = lkss::planner::lambda_ratio(tau, z, alpha);
        let want = (servers as f64) * (*lambda.numer() as f64 / *lambda.denom() as f64) * 2.0;
        let got = stored as f64 / data.len() as f64;
        let pad = leaky::layout(&params).n_prime as f64 * 2.0 / data.len() as f64;
        assert!((got - want).abs() <= want * pad + 1e-12, "{params}: overhead {got}, want {want}");
    }
}
