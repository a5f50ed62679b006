//! Seeded random systems with small integer Gram matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::padic::FieldContext;
use crate::qform::FormSystem;

/// Entries are drawn uniformly from `-RANGE..=RANGE`.
pub const RANGE: i64 = 9;

/// `t` symmetric `n x n` integer matrices, fully determined by `seed`.
pub fn random_int_grams(seed: u64, t: usize, n: usize) -> Vec<Vec<Vec<i64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..t)
        .map(|_| {
            let mut g = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i..n {
                    let x = rng.gen_range(-RANGE..=RANGE);
                    g[i][j] = x;
                    g[j][i] = x;
                }
            }
            g
        })
        .collect()
}

pub fn random_system(ctx: &FieldContext, seed: u64, t: usize, n: usize) -> Result<FormSystem> {
    FormSystem::from_int_grams(ctx, &random_int_grams(seed, t, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_symmetric() {
        let a = random_int_grams(7, 2, 6);
        assert_eq!(a, random_int_grams(7, 2, 6));
        assert_ne!(a, random_int_grams(8, 2, 6));
        for g in &a {
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(g[i][j], g[j][i]);
                    assert!(g[i][j].abs() <= RANGE);
                }
            }
        }
    }
}
