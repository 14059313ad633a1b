#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Zipf};
use rmd_core::{codeword_counts, decode_codeword_reference, BitString, CodeSpec, IndexParams, RmdArray};

/// `n` Zipf(1.1) ranks over a vocabulary of `vocab`, shifted to start at 0.
pub fn zipf_values(n: usize, vocab: u64, seed: u64) -> Vec<u64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let zipf = Zipf::new(vocab as f64, 1.1).unwrap();
    (0..n).map(|_| zipf.sample(&mut rng) as u64 - 1).collect()
}

fn value_of(spec: &CodeSpec, word: &str) -> u64 {
    let counts = codeword_counts(spec).unwrap();
    let bits: BitString = word.parse().unwrap();
    decode_codeword_reference(spec, &counts, &bits).unwrap()
}

/// `count` fillers `011 0^k` spread evenly over `bits` bits.
fn fillers(spec: &CodeSpec, count: u64, bits: u64, out: &mut Vec<u64>) {
    for i in 0..count {
        let len = (i + 1) * bits / count - i * bits / count;
        assert!(len >= 5);
        out.push(value_of(spec, &format!("011{}", "0".repeat(len as usize - 3))));
    }
}

/// A 2048-element R_{2,4-inf} sequence laid out so that with L1 = 1024 and
/// L2 = 32 level-1 block 1 starts at byte 1200, averages 40 bytes per
/// level-2 block, level-2 block 1 starts one byte early (byte 1239) behind
/// one earlier codeword start, and element 1060 is `01101` at bit 9939.
pub fn worked_example() -> (Vec<u64>, RmdArray) {
    let spec = CodeSpec::r24_inf();
    let mut values = Vec::with_capacity(2048);
    fillers(&spec, 1024, 9600, &mut values);
    fillers(&spec, 31, 314, &mut values);
    for w in ["011", "0110", "011", "011000000000", "011", "01101"] {
        values.push(value_of(&spec, w));
    }
    fillers(&spec, 987, 19840 - 9944, &mut values);
    assert_eq!(values.len(), 2048);
    let array = RmdArray::build(spec, &values, IndexParams::with_blocks(10, 5).unwrap()).unwrap();
    (values, array)
}
