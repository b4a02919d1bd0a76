//! Kept in its own test binary so no other test competes for the CPU while
//! it is timed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use udlearn::metrics::count_distinct_substrings;

fn input(len: usize) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(len as u64);
    let mut strings = Vec::new();
    let mut left = len;
    // Sentence-sized pieces, as in derivation corpora.
    while left > 0 {
        let n = rng.gen_range(10..60).min(left);
        strings.push((0..n).map(|_| rng.gen_range(0..4u32)).collect());
        left -= n;
    }
    strings
}

fn seconds(strings: &[Vec<u32>]) -> f64 {
    let start = Instant::now();
    std::hint::black_box(count_distinct_substrings(strings));
    start.elapsed().as_secs_f64()
}

fn doubling_ratio(small: &[Vec<u32>], large: &[Vec<u32>]) -> f64 {
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    // Interleaved runs, best of each, to filter out scheduling noise.
    for _ in 0..9 {
        a = a.min(seconds(small));
        b = b.min(seconds(large));
    }
    b / a
}

#[test]
fn suffix_tree_construction_scales_linearly() {
    let (small, large) = (input(20_000), input(40_000));
    let many = doubling_ratio(&small, &large);
    assert!(many <= 2.5, "many strings: doubling took {many:.2}x the time");

    let (small, large) = (vec![small.concat()], vec![large.concat()]);
    let one = doubling_ratio(&small, &large);
    assert!(one <= 2.5, "one string: doubling took {one:.2}x the time");
}
