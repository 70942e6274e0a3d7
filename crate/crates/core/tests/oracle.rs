//! Implementation-independent oracles for the feature weights and fragment
//! extraction.

use proptest::prelude::*;
use rand::SeedableRng;
use sift_core::fragment::fragment_count;
use sift_core::rng::PipelineRng;
use sift_core::{extract_from_file, fit_doc_freq, weight_vector, FragmentSize};

/// TF-IDF by nested loops straight from the definitions.
fn brute_force_weights(corpus: &[Vec<u8>], fragment: &[u8]) -> Vec<f64> {
    let n = corpus.len() as f64;
    (0..256usize)
        .map(|v| {
            let mut occurrences = 0usize;
            for &b in fragment {
                if usize::from(b) == v {
                    occurrences += 1;
                }
            }
            let mut containing = 0usize;
            for doc in corpus {
                let mut found = false;
                for &b in doc {
                    if usize::from(b) == v {
                        found = true;
                    }
                }
                if found {
                    containing += 1;
                }
            }
            let tf = occurrences as f64 / fragment.len() as f64;
            let idf = if containing == 0 { 0.0 } else { (n / containing as f64).ln() };
            tf * idf
        })
        .collect()
}

fn micro_corpus() -> impl Strategy<Value = Vec<Vec<u8>>> {
    (prop_oneof![Just(2usize), Just(4), Just(8)], 1u8..=255).prop_flat_map(|(r, alphabet)| {
        proptest::collection::vec(proptest::collection::vec(0..=alphabet, r), 2..=10)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn weights_match_brute_force(corpus in micro_corpus()) {
        let stats = fit_doc_freq(&corpus).unwrap();
        for fragment in &corpus {
            let got = weight_vector(fragment, &stats);
            let want = brute_force_weights(&corpus, fragment);
            for v in 0..256 {
                prop_assert!((got[v] - want[v]).abs() <= 1e-12, "byte {v}: {} vs {}", got[v], want[v]);
            }
        }
    }

    #[test]
    fn extraction_provenance(
        r in prop_oneof![Just(32u32), Just(64), Just(512)],
        mult in 2usize..40,
        extra in 0usize..4096,
        seed: u64,
    ) {
        let size = FragmentSize::new(r).unwrap();
        let r = r as usize;
        let len = mult * r + extra % r;
        let mut gen = PipelineRng::seed_from_u64(seed ^ 0xABCD);
        let contents: Vec<u8> = (0..len).map(|_| rand::Rng::random::<u8>(&mut gen)).collect();
        let mut rng = PipelineRng::seed_from_u64(seed);
        let frags = extract_from_file(&contents, size, &mut rng).unwrap();

        let full = len / r - 1;
        let rem = len % r;
        prop_assert_eq!(frags.len(), full + usize::from(rem > 0));
        prop_assert_eq!(frags.len(), fragment_count(len, size));
        prop_assert!(frags.iter().all(|f| f.len() == r));
        prop_assert_eq!(frags[..full].concat(), contents[r..r * (full + 1)].to_vec());
        if rem > 0 {
            let padded = &frags[full];
            prop_assert_eq!(&padded[..rem], &contents[len - rem..]);
            let pad = &padded[rem..];
            prop_assert!(frags[..full].iter().any(|f| f.windows(pad.len()).any(|w| w == pad)));
        }
    }
}
