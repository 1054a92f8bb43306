use proptest::prelude::*;

use qpke_sim::adversary::{ev_keyspace_bits, keysearch_attack, run_exp_computational, Identity, Outcome, SearchMode};
use qpke_sim::params::SchemeParams;
use qpke_sim::primitives::{RngStream, ToeplitzHash};
use qpke_sim::qkd::{honest_session, QkdParams, QkdTranscript};
use qpke_sim::qpke::{
    comp_dec, comp_enc, comp_pkgen, comp_skgen, ev_dec, ev_enc, ev_pkgen, ev_skgen, ev_skgen_from_coins,
    multibit_dec, multibit_enc, Everlasting, MultiCiphertext,
};
use qpke_sim::qsim::BitString;

fn toy() -> SchemeParams {
    SchemeParams::new(4, 6).unwrap().with_ots_seed_bits(5)
}

#[test]
fn sampled_key_search_is_geometric() {
    let p = toy();
    let bits = ev_keyspace_bits(&p);
    let space = 1u64 << bits;
    let mut rng = RngStream::new(5, 0);
    let sk = ev_skgen(&p, &mut rng).unwrap();
    let pk = ev_pkgen(&sk).unwrap().classical;
    // exact success probability per draw, by enumeration
    let matching = (0..space)
        .filter(|&c| {
            let cand = ev_skgen_from_coins(&p, &BitString::from_u64(c, bits).unwrap()).unwrap();
            cand.vk0 == pk.vk0 && cand.vk1 == pk.vk1
        })
        .count() as f64;
    let q = matching / space as f64;
    let runs = 100;
    let total: u64 = (0..runs)
        .map(|i| {
            let out = keysearch_attack(&pk, &p, u64::MAX, SearchMode::Sample, &mut RngStream::new(6, i)).unwrap();
            assert!(out.hit.is_some());
            out.iterations
        })
        .sum();
    let mean = total as f64 / runs as f64;
    let sigma = ((1.0 - q) / (q * q) / runs as f64).sqrt();
    assert!((mean - 1.0 / q).abs() <= 3.0 * sigma, "mean {mean}, expected {} +/- {}", 1.0 / q, 3.0 * sigma);
}

#[test]
fn enumeration_finds_a_decrypting_key_within_the_keyspace() {
    let p = toy();
    for t in 0..20 {
        let mut rng = RngStream::new(8, t);
        let sk = ev_skgen(&p, &mut rng).unwrap();
        let pk = ev_pkgen(&sk).unwrap();
        let out = keysearch_attack(&pk.classical, &p, u64::MAX, SearchMode::Enumerate, &mut rng).unwrap();
        assert!(out.iterations <= 1 << ev_keyspace_bits(&p));
        let hit = out.hit.unwrap();
        for m in [false, true] {
            let ct = ev_enc(&hit.pk.state, &hit.pk.classical, m, &mut rng).unwrap();
            assert_eq!(ev_dec(&hit.sk, &ct).unwrap(), m);
        }
    }
}

#[test]
fn computational_copies_draw_fresh_randomness() {
    // P(all distinct) for n draws from 2^(2 lambda) values
    let (lambda, n, trials) = (4usize, 5usize, 2000u64);
    let p = SchemeParams::new(lambda, 8).unwrap();
    let space = (1u64 << (2 * lambda)) as f64;
    let expect: f64 = (0..n).map(|i| 1.0 - i as f64 / space).product();
    let distinct = (0..trials)
        .filter(|&t| {
            let r = run_exp_computational(&Identity, t % 2 == 0, n, &p, &mut RngStream::new(9, t)).unwrap();
            let Outcome::Computational { distinct_r, dec, m, .. } = r.outcome else { unreachable!() };
            assert_eq!(dec, Some(m));
            distinct_r
        })
        .count() as f64;
    let sigma = (trials as f64 * expect * (1.0 - expect)).sqrt();
    assert!((distinct - trials as f64 * expect).abs() <= 3.0 * sigma, "{distinct}");
}

#[test]
fn every_computational_copy_decrypts_under_one_key() {
    let p = SchemeParams::new(8, 8).unwrap();
    let mut rng = RngStream::new(10, 0);
    let sk = comp_skgen(&p, &mut rng).unwrap();
    for i in 0..50 {
        let pk = comp_pkgen(&sk, &mut rng).unwrap();
        let m = i % 3 == 0;
        let ct = comp_enc(&pk.state, &pk.classical, m, &mut rng).unwrap();
        assert_eq!(comp_dec(&sk, &ct, &mut rng).unwrap(), m);
    }
}

fn pair(lambda: usize) -> impl Strategy<Value = (u64, u64)> {
    let n = 4 * lambda as u32;
    (0u64..1 << n, 1u64..1 << n).prop_map(move |(x, d)| (x, x ^ d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // exact universality over the full seed space
    #[test]
    fn toeplitz_pair_collides_with_probability_two_to_minus_lambda((x, y) in pair(2)) {
        let lambda = 2;
        let seed_len = ToeplitzHash::seed_len(lambda);
        let (bx, by) = (BitString::from_u64(x, 4 * lambda).unwrap(), BitString::from_u64(y, 4 * lambda).unwrap());
        let collisions = (0..1u64 << seed_len)
            .filter(|&s| {
                let h = ToeplitzHash::from_seed(lambda, BitString::from_u64(s, seed_len).unwrap()).unwrap();
                h.eval(&bx).unwrap() == h.eval(&by).unwrap()
            })
            .count();
        prop_assert_eq!(collisions as u64 * (1 << lambda), 1u64 << seed_len);
    }

    #[test]
    fn toeplitz_is_linear(seed in any::<u64>(), x in any::<u32>(), y in any::<u32>()) {
        let lambda = 8;
        let h = ToeplitzHash::sample(&mut RngStream::new(seed, 0), lambda).unwrap();
        let (bx, by) = (BitString::from_u64(x as u64, 32).unwrap(), BitString::from_u64(y as u64, 32).unwrap());
        let lhs = h.eval(&bx.xor(&by).unwrap()).unwrap();
        let rhs = h.eval(&bx).unwrap().xor(&h.eval(&by).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transcript_wire_round_trip(seed in any::<u64>(), cut in 0usize..1000) {
        let q = QkdParams::new(SchemeParams::new(2, 4).unwrap()).unwrap();
        let t = honest_session(&q, &mut RngStream::new(seed, 0)).unwrap();
        let bytes = t.encode();
        prop_assert_eq!(QkdTranscript::decode(&bytes).unwrap(), t);
        let cut = cut % bytes.len();
        prop_assert!(QkdTranscript::decode(&bytes[..cut]).is_err());
    }

    #[test]
    fn multibit_everlasting_round_trip(seed in any::<u64>(), msg in prop::collection::vec(any::<bool>(), 1..12)) {
        let p = SchemeParams::new(4, 6).unwrap();
        let mut rng = RngStream::new(seed, 1);
        let sks = (0..msg.len()).map(|_| ev_skgen(&p, &mut rng).unwrap()).collect::<Vec<_>>();
        let pks = sks.iter().map(|sk| ev_pkgen(sk).unwrap()).collect::<Vec<_>>();
        let m = BitString::from_bits(msg.iter().copied());
        let ct = multibit_enc::<Everlasting, _>(&pks, &m, &mut rng).unwrap();
        prop_assert!(matches!(ct, MultiCiphertext::Valid(_)));
        prop_assert_eq!(multibit_dec::<Everlasting, _>(&sks, &ct, &mut rng).unwrap(), m);
    }
}
