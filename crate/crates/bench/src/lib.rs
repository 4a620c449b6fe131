//! Shared input builders for the benchmark suite.

use sprec_core::dataset::{RatingTriple, RatingsDataset};
use sprec_core::rng;

/// Dense synthetic ratings with planted structure: users and items sit on
/// a shared circle and the rating of a pair decreases stepwise with their
/// angular distance, plus seeded index jitter so runs are reproducible.
pub fn planted_ratings(n_users: usize, n_items: usize, seed: u64) -> RatingsDataset {
    let mut r = rng::substream(seed, "bench-data", 0);
    let mut triples = Vec::with_capacity(n_users * n_items);
    for u in 0..n_users {
        for i in 0..n_items {
            let du = 2.0 * std::f64::consts::PI * (u as f64 + rng::uniform_f64(&mut r) * 0.3)
                / n_users as f64;
            let di = 2.0 * std::f64::consts::PI * (i as f64 + rng::uniform_f64(&mut r) * 0.3)
                / n_items as f64;
            let d = (du.cos() - di.cos()).hypot(du.sin() - di.sin());
            let rating = match d {
                d if d < 0.5 => 5.0,
                d if d < 1.0 => 4.0,
                d if d < 1.4 => 3.0,
                d if d < 1.8 => 2.0,
                _ => 1.0,
            };
            triples.push(RatingTriple {
                user: u as u32,
                item: i as u32,
                rating,
            });
        }
    }
    RatingsDataset::from_triples(n_users, n_items, triples, Some((1.0, 5.0)))
        .expect("synthetic ratings are well formed")
}
