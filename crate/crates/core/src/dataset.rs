//! Rating-file ingestion, preprocessing, and deterministic fold splits.
//!
//! Preprocessing order is fixed: parse, collapse duplicate (user, item)
//! pairs keeping the last occurrence, drop users with fewer than
//! `min_ratings_per_user` ratings, then densely reindex the survivors in
//! first-appearance order. Averages are accumulated by scanning the triple
//! list front to back, so recomputing them the same way reproduces the
//! stored values bit for bit.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// One observation with dense indices into the dataset's id tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingTriple {
    pub user: u32,
    pub item: u32,
    pub rating: f64,
}

/// Column-separator hint for ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    /// Tab if the first data line contains one, else comma, else whitespace.
    #[default]
    Auto,
    Tab,
    Comma,
    /// Any run of whitespace.
    Space,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub delimiter: Delimiter,
    /// Scale bounds declared up front; observed bounds are used when absent.
    /// Declared bounds win even if the data never hits the extremes.
    pub declared_scale: Option<(f64, f64)>,
    /// Users with fewer ratings than this are dropped (after dedup).
    pub min_ratings_per_user: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: Delimiter::Auto,
            declared_scale: None,
            min_ratings_per_user: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingsDataset {
    ratings: Vec<RatingTriple>,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    r_min: f64,
    r_max: f64,
    declared_scale: Option<(f64, f64)>,
    user_count: Vec<u32>,
    item_count: Vec<u32>,
    /// NaN where the node has no ratings in this view.
    user_average: Vec<f64>,
    item_average: Vec<f64>,
    global_mean: f64,
}

impl RatingsDataset {
    /// Reads a delimiter-separated rating file: user, item, rating, ignored
    /// extras. A single leading header line is skipped when its rating
    /// column is non-numeric; any later unparsable line is an error.
    pub fn ingest(path: &Path, opts: &IngestOptions) -> Result<RatingsDataset> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        let text = String::from_utf8_lossy(&bytes);
        let mut records: Vec<(String, String, f64)> = Vec::new();
        let mut delimiter = opts.delimiter;
        let mut saw_data_line = false;
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if delimiter == Delimiter::Auto {
                delimiter = if line.contains('\t') {
                    Delimiter::Tab
                } else if line.contains(',') {
                    Delimiter::Comma
                } else {
                    Delimiter::Space
                };
            }
            match parse_line(line, delimiter) {
                Some(rec) => {
                    records.push(rec);
                    saw_data_line = true;
                }
                None if !saw_data_line => {} // header line
                None => {
                    return Err(Error::BadRecord {
                        path: path.into(),
                        line: line_no + 1,
                        message: "expected: user, item, numeric rating".into(),
                    });
                }
            }
        }
        if records.is_empty() {
            return Err(Error::NoParsableRatings { path: path.into() });
        }
        Self::from_records(records, opts)
    }

    /// Builds a dataset from already-parsed (user, item, rating) records,
    /// applying dedup, the minimum-ratings filter, and dense reindexing.
    pub fn from_records(
        records: impl IntoIterator<Item = (String, String, f64)>,
        opts: &IngestOptions,
    ) -> Result<RatingsDataset> {
        // dedup keeps the first-appearance position with the last-seen value
        let mut position: HashMap<(String, String), usize> = HashMap::new();
        let mut unique: Vec<(String, String, f64)> = Vec::new();
        for (user, item, rating) in records {
            if !rating.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "non-finite rating {rating} for user {user:?}, item {item:?}"
                )));
            }
            match position.entry((user.clone(), item.clone())) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    unique[*e.get()].2 = rating;
                }
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(unique.len());
                    unique.push((user, item, rating));
                }
            }
        }

        // the filter runs after dedup so duplicates cannot carry a user
        // over the threshold
        if opts.min_ratings_per_user > 1 {
            let mut per_user: HashMap<&str, usize> = HashMap::new();
            for (user, _, _) in &unique {
                *per_user.entry(user.as_str()).or_insert(0) += 1;
            }
            let keep: Vec<bool> = unique
                .iter()
                .map(|(user, _, _)| per_user[user.as_str()] >= opts.min_ratings_per_user)
                .collect();
            let mut kept = Vec::with_capacity(unique.len());
            for (rec, keep) in unique.into_iter().zip(keep) {
                if keep {
                    kept.push(rec);
                }
            }
            unique = kept;
            if unique.is_empty() {
                return Err(Error::AllUsersFiltered {
                    min_ratings: opts.min_ratings_per_user,
                });
            }
        }
        if unique.is_empty() {
            return Err(Error::EmptySubset);
        }

        let mut user_index: HashMap<String, u32> = HashMap::new();
        let mut item_index: HashMap<String, u32> = HashMap::new();
        let mut user_ids = Vec::new();
        let mut item_ids = Vec::new();
        let mut ratings = Vec::with_capacity(unique.len());
        for (user, item, rating) in unique {
            let u = *user_index.entry(user.clone()).or_insert_with(|| {
                user_ids.push(user);
                (user_ids.len() - 1) as u32
            });
            let i = *item_index.entry(item.clone()).or_insert_with(|| {
                item_ids.push(item);
                (item_ids.len() - 1) as u32
            });
            ratings.push(RatingTriple {
                user: u,
                item: i,
                rating,
            });
        }
        Self::from_parts(ratings, user_ids, item_ids, opts.declared_scale)
    }

    /// Builds a dataset from dense-indexed triples; `n_users`/`n_items` fix
    /// the index spaces so nodes without ratings stay addressable. No
    /// dedup or filtering is applied.
    pub fn from_triples(
        n_users: usize,
        n_items: usize,
        ratings: Vec<RatingTriple>,
        declared_scale: Option<(f64, f64)>,
    ) -> Result<RatingsDataset> {
        let user_ids = (0..n_users).map(|i| format!("u{i}")).collect();
        let item_ids = (0..n_items).map(|j| format!("i{j}")).collect();
        Self::from_parts(ratings, user_ids, item_ids, declared_scale)
    }

    fn from_parts(
        ratings: Vec<RatingTriple>,
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        declared_scale: Option<(f64, f64)>,
    ) -> Result<RatingsDataset> {
        if ratings.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = user_ids.len();
        let m = item_ids.len();
        let mut user_sum = vec![0.0f64; n];
        let mut item_sum = vec![0.0f64; m];
        let mut user_count = vec![0u32; n];
        let mut item_count = vec![0u32; m];
        let mut total = 0.0f64;
        let mut observed_min = f64::INFINITY;
        let mut observed_max = f64::NEG_INFINITY;
        for t in &ratings {
            let (u, i) = (t.user as usize, t.item as usize);
            if u >= n {
                return Err(Error::InvalidIndex { index: u, len: n });
            }
            if i >= m {
                return Err(Error::InvalidIndex { index: i, len: m });
            }
            user_sum[u] += t.rating;
            item_sum[i] += t.rating;
            user_count[u] += 1;
            item_count[i] += 1;
            total += t.rating;
            observed_min = observed_min.min(t.rating);
            observed_max = observed_max.max(t.rating);
        }
        let (r_min, r_max) = match declared_scale {
            Some((lo, hi)) => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidConfig(format!(
                        "declared scale [{lo}, {hi}] must be finite with min < max"
                    )));
                }
                if observed_min < lo || observed_max > hi {
                    return Err(Error::RatingOutOfBounds {
                        rating: if observed_min < lo {
                            observed_min
                        } else {
                            observed_max
                        },
                        r_min: lo,
                        r_max: hi,
                    });
                }
                (lo, hi)
            }
            None => {
                if observed_min >= observed_max {
                    return Err(Error::InvalidConfig(format!(
                        "degenerate rating scale: every rating equals {observed_min}; declare a scale instead"
                    )));
                }
                (observed_min, observed_max)
            }
        };
        let user_average = user_sum
            .iter()
            .zip(&user_count)
            .map(|(&s, &c)| if c > 0 { s / f64::from(c) } else { f64::NAN })
            .collect();
        let item_average = item_sum
            .iter()
            .zip(&item_count)
            .map(|(&s, &c)| if c > 0 { s / f64::from(c) } else { f64::NAN })
            .collect();
        let global_mean = total / ratings.len() as f64;
        Ok(RatingsDataset {
            ratings,
            user_ids,
            item_ids,
            r_min,
            r_max,
            declared_scale,
            user_count,
            item_count,
            user_average,
            item_average,
            global_mean,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn ratings(&self) -> &[RatingTriple] {
        &self.ratings
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn scale_bounds(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    pub fn declared_scale(&self) -> Option<(f64, f64)> {
        self.declared_scale
    }

    /// Mean rating of user `i`, None when the user has no ratings here.
    pub fn user_average(&self, i: usize) -> Option<f64> {
        (self.user_count[i] > 0).then(|| self.user_average[i])
    }

    pub fn item_average(&self, j: usize) -> Option<f64> {
        (self.item_count[j] > 0).then(|| self.item_average[j])
    }

    pub fn user_count(&self, i: usize) -> usize {
        self.user_count[i] as usize
    }

    pub fn item_count(&self, j: usize) -> usize {
        self.item_count[j] as usize
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    /// Fraction of the n × m grid that is observed.
    pub fn density(&self) -> f64 {
        self.ratings.len() as f64 / (self.n_users() as f64 * self.n_items() as f64)
    }

    /// Copy whose current bounds become declared, so every view restricted
    /// from it keeps the same rating scale even if a subset never hits the
    /// extremes.
    pub fn pin_scale(&self) -> RatingsDataset {
        let mut ds = self.clone();
        ds.declared_scale = Some((self.r_min, self.r_max));
        ds
    }

    /// View containing the ratings at `subset` positions (in the given
    /// order). Index spaces and id tables are unchanged; statistics and
    /// observed flags are recomputed on the subset. Bounds stay declared if
    /// they were, else they are re-observed.
    pub fn restrict(&self, subset: &[usize]) -> Result<RatingsDataset> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut picked = Vec::with_capacity(subset.len());
        for &idx in subset {
            let t = self.ratings.get(idx).ok_or(Error::InvalidIndex {
                index: idx,
                len: self.ratings.len(),
            })?;
            picked.push(*t);
        }
        Self::from_parts(
            picked,
            self.user_ids.clone(),
            self.item_ids.clone(),
            self.declared_scale,
        )
    }
}

fn parse_line(line: &str, delimiter: Delimiter) -> Option<(String, String, f64)> {
    let sep = match delimiter {
        Delimiter::Tab => '\t',
        Delimiter::Comma => ',',
        Delimiter::Space | Delimiter::Auto => return parse_whitespace(line),
    };
    let mut fields = line.split(sep).map(str::trim).filter(|f| !f.is_empty());
    let user = fields.next()?;
    let item = fields.next()?;
    let rating: f64 = fields.next()?.parse().ok()?;
    Some((user.to_string(), item.to_string(), rating))
}

fn parse_whitespace(line: &str) -> Option<(String, String, f64)> {
    let mut fields = line.split_whitespace();
    let user = fields.next()?;
    let item = fields.next()?;
    let rating: f64 = fields.next()?.parse().ok()?;
    Some((user.to_string(), item.to_string(), rating))
}

/// Assignment of every rating to one of `k` folds, plus the parameters
/// needed to re-derive the inner validation split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub k: usize,
    /// Fold index per rating position.
    pub assignments: Vec<u32>,
    /// Share of each training portion held out for model selection.
    pub validation_fraction: f64,
    /// Shuffle and stream identifier; see [`crate::rng`].
    pub rng_algorithm: String,
}

pub const DEFAULT_FOLDS: usize = 5;
pub const VALIDATION_FRACTION: f64 = 0.10;

/// Shuffles rating positions with the "folds" substream of `seed` and deals
/// them round-robin into `k` folds, so fold sizes differ by at most one.
pub fn make_folds(ds: &RatingsDataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > ds.len() {
        return Err(Error::FoldCount {
            k,
            ratings: ds.len(),
        });
    }
    let mut order: Vec<u32> = (0..ds.len() as u32).collect();
    rng::shuffle(&mut rng::substream(seed, "folds", 0), &mut order);
    let mut assignments = vec![0u32; ds.len()];
    for (pos, &r) in order.iter().enumerate() {
        assignments[r as usize] = (pos % k) as u32;
    }
    Ok(FoldPlan {
        seed,
        k,
        assignments,
        validation_fraction: VALIDATION_FRACTION,
        rng_algorithm: rng::RNG_ALGORITHM.to_string(),
    })
}

impl FoldPlan {
    /// Rating positions held out when `fold` is the test fold, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(fold, true)
    }

    /// Rating positions trained on when `fold` is the test fold, ascending.
    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(fold, false)
    }

    fn indices_where(&self, fold: usize, held_out: bool) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| (a as usize == fold) == held_out)
            .map(|(i, _)| i)
            .collect()
    }

    /// Splits the training portion of `fold` into a proper-training part and
    /// a validation part of `validation_fraction` (each at least one
    /// rating). Both lists come back ascending; the draw uses the
    /// "validation" substream of the plan's seed, indexed by fold.
    pub fn validation_split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = self.training_indices(fold);
        rng::shuffle(
            &mut rng::substream(self.seed, "validation", fold as u64),
            &mut train,
        );
        let want = (train.len() as f64 * self.validation_fraction).round() as usize;
        let n_val = want.clamp(1, train.len().saturating_sub(1).max(1));
        let (val, proper) = train.split_at(n_val);
        let mut val: Vec<usize> = val.to_vec();
        let mut proper: Vec<usize> = proper.to_vec();
        val.sort_unstable();
        proper.sort_unstable();
        (proper, val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn opts(min: usize) -> IngestOptions {
        IngestOptions {
            min_ratings_per_user: min,
            ..IngestOptions::default()
        }
    }

    #[test]
    fn threshold_drops_light_users() {
        let mut lines = String::new();
        for j in 0..6 {
            lines.push_str(&format!("alice\tm{j}\t{}\n", 1 + (j % 5)));
        }
        for j in 0..4 {
            lines.push_str(&format!("bob\tm{j}\t3\n"));
        }
        let f = write_file(&lines);
        let ds = RatingsDataset::ingest(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(ds.n_users(), 1);
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.user_ids(), ["alice".to_string()]);
    }

    #[test]
    fn observed_bounds_and_global_mean() {
        let f = write_file("u,a,1\nu,b,5\nu,c,3\n");
        let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
        assert_eq!(ds.scale_bounds(), (1.0, 5.0));
        assert_eq!(ds.global_mean(), 3.0);
    }

    #[test]
    fn duplicates_keep_last_value() {
        let raw = "u\ta\t3\nu\tb\t2\nu\ta\t5\n";
        let f = write_file(raw);
        let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
        // oracle: last occurrence per pair in a raw scan of the file
        let mut last = std::collections::HashMap::new();
        for line in raw.lines() {
            let mut parts = line.split('\t');
            let (u, i, r) = (
                parts.next().unwrap(),
                parts.next().unwrap(),
                parts.next().unwrap().parse::<f64>().unwrap(),
            );
            last.insert((u.to_string(), i.to_string()), r);
        }
        assert_eq!(ds.len(), last.len());
        for t in ds.ratings() {
            let key = (
                ds.user_ids()[t.user as usize].clone(),
                ds.item_ids()[t.item as usize].clone(),
            );
            assert_eq!(t.rating, last[&key]);
        }
        let a = ds
            .ratings()
            .iter()
            .find(|t| ds.item_ids()[t.item as usize] == "a")
            .unwrap();
        assert_eq!(a.rating, 5.0);
    }

    #[test]
    fn header_line_is_skipped_but_later_garbage_errors() {
        let f = write_file("user,item,rating\nu,a,4\nu,b,2\n");
        let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
        assert_eq!(ds.len(), 2);

        let g = write_file("u,a,4\nu,b,oops\n");
        let err = RatingsDataset::ingest(g.path(), &opts(1)).unwrap_err();
        assert!(matches!(err, Error::BadRecord { line: 2, .. }), "{err}");
    }

    #[test]
    fn delimiters_are_auto_detected() {
        for raw in [
            "u\ta\t4\nu\tb\t2\n",
            "u,a,4\nu,b,2\n",
            "u a 4\nu b 2\n",
            "u  a   4\nu b 2\n",
        ] {
            let f = write_file(raw);
            let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
            assert_eq!(ds.len(), 2, "raw={raw:?}");
        }
    }

    #[test]
    fn extra_columns_are_ignored() {
        let f = write_file("196\t242\t3\t881250949\n196\t302\t4\t891717742\n");
        let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.ratings()[0].rating, 3.0);
    }

    #[test]
    fn ingest_failure_modes() {
        let missing = RatingsDataset::ingest(Path::new("/nonexistent/x.tsv"), &opts(1));
        assert!(matches!(missing.unwrap_err(), Error::Io { .. }));

        let empty = write_file("");
        assert!(matches!(
            RatingsDataset::ingest(empty.path(), &opts(1)).unwrap_err(),
            Error::NoParsableRatings { .. }
        ));

        let only_header = write_file("user,item,rating\n");
        assert!(matches!(
            RatingsDataset::ingest(only_header.path(), &opts(1)).unwrap_err(),
            Error::NoParsableRatings { .. }
        ));

        let light = write_file("u,a,4\nu,b,2\nv,a,1\n");
        assert!(matches!(
            RatingsDataset::ingest(light.path(), &IngestOptions::default()).unwrap_err(),
            Error::AllUsersFiltered { min_ratings: 5 }
        ));
    }

    #[test]
    fn declared_scale_wins_and_validates() {
        let f = write_file("u,a,2\nu,b,4\n");
        let declared = IngestOptions {
            declared_scale: Some((1.0, 5.0)),
            ..opts(1)
        };
        let ds = RatingsDataset::ingest(f.path(), &declared).unwrap();
        assert_eq!(ds.scale_bounds(), (1.0, 5.0));

        let narrow = IngestOptions {
            declared_scale: Some((3.0, 5.0)),
            ..opts(1)
        };
        assert!(matches!(
            RatingsDataset::ingest(f.path(), &narrow).unwrap_err(),
            Error::RatingOutOfBounds { .. }
        ));
    }

    #[test]
    fn averages_match_recomputation_exactly() {
        let f = write_file("a,x,1\na,y,4\nb,x,5\nb,z,2\na,z,3\n");
        let ds = RatingsDataset::ingest(f.path(), &opts(1)).unwrap();
        let mut sums = vec![0.0; ds.n_users()];
        let mut counts = vec![0u32; ds.n_users()];
        for t in ds.ratings() {
            sums[t.user as usize] += t.rating;
            counts[t.user as usize] += 1;
        }
        for i in 0..ds.n_users() {
            assert_eq!(ds.user_average(i).unwrap(), sums[i] / f64::from(counts[i]));
        }
        let total: f64 = ds.ratings().iter().map(|t| t.rating).sum();
        assert_eq!(ds.global_mean(), total / ds.len() as f64);
    }

    fn toy(n_ratings: usize) -> RatingsDataset {
        let triples = (0..n_ratings)
            .map(|p| RatingTriple {
                user: (p % 4) as u32,
                item: (p % 7) as u32,
                rating: 1.0 + (p % 5) as f64,
            })
            .collect();
        RatingsDataset::from_triples(4, 7, triples, Some((1.0, 5.0))).unwrap()
    }

    #[test]
    fn folds_partition_evenly() {
        let plan = make_folds(&toy(10), 5, 7).unwrap();
        let mut sizes = [0usize; 5];
        for &a in &plan.assignments {
            sizes[a as usize] += 1;
        }
        assert_eq!(sizes, [2, 2, 2, 2, 2]);

        let plan = make_folds(&toy(11), 5, 7).unwrap();
        let mut sizes: Vec<usize> = vec![0; 5];
        for &a in &plan.assignments {
            sizes[a as usize] += 1;
        }
        sizes.sort_unstable();
        assert_eq!(sizes, [2, 2, 2, 2, 3]);
    }

    #[test]
    fn folds_are_deterministic_and_recorded() {
        let ds = toy(23);
        let a = make_folds(&ds, 5, 99).unwrap();
        let b = make_folds(&ds, 5, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rng_algorithm, rng::RNG_ALGORITHM);
        assert_eq!(a.validation_fraction, VALIDATION_FRACTION);
        let c = make_folds(&ds, 5, 100).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn fold_count_bounds() {
        assert!(matches!(
            make_folds(&toy(4), 5, 1).unwrap_err(),
            Error::FoldCount { k: 5, ratings: 4 }
        ));
        assert!(matches!(
            make_folds(&toy(4), 1, 1).unwrap_err(),
            Error::FoldCount { .. }
        ));
    }

    #[test]
    fn test_and_training_indices_partition() {
        let ds = toy(23);
        let plan = make_folds(&ds, 5, 3).unwrap();
        for fold in 0..5 {
            let test = plan.test_indices(fold);
            let train = plan.training_indices(fold);
            assert_eq!(test.len() + train.len(), ds.len());
            let mut all: Vec<usize> = test.iter().chain(&train).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn validation_split_holds_out_a_tenth() {
        let ds = toy(100);
        let plan = make_folds(&ds, 5, 5).unwrap();
        let (proper, val) = plan.validation_split(0);
        assert_eq!(val.len(), 8); // 80 training ratings, 10% rounded
        assert_eq!(proper.len() + val.len(), 80);
        let again = plan.validation_split(0);
        assert_eq!((proper, val), again);
    }

    #[test]
    fn restrict_identity_and_singleton() {
        let ds = toy(14);
        let all: Vec<usize> = (0..ds.len()).collect();
        assert_eq!(ds.restrict(&all).unwrap(), ds);

        let one = ds.restrict(&[3]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.global_mean(), ds.ratings()[3].rating);
    }

    #[test]
    fn restrict_marks_unobserved_nodes() {
        let triples = vec![
            RatingTriple {
                user: 0,
                item: 0,
                rating: 2.0,
            },
            RatingTriple {
                user: 0,
                item: 1,
                rating: 4.0,
            },
            RatingTriple {
                user: 1,
                item: 1,
                rating: 5.0,
            },
        ];
        let ds = RatingsDataset::from_triples(2, 2, triples, Some((1.0, 5.0))).unwrap();
        let view = ds.restrict(&[0]).unwrap();
        assert_eq!(view.item_average(0), Some(2.0));
        assert_eq!(view.item_average(1), None);
        assert_eq!(view.user_average(1), None);
        assert_eq!(view.n_users(), 2, "index space must survive restriction");
    }

    #[test]
    fn restrict_complement_partitions() {
        let ds = toy(23);
        let subset: Vec<usize> = (0..23).filter(|i| i % 3 == 0).collect();
        let complement: Vec<usize> = (0..23).filter(|i| i % 3 != 0).collect();
        let a = ds.restrict(&subset).unwrap();
        let b = ds.restrict(&complement).unwrap();
        assert_eq!(a.len() + b.len(), ds.len());
    }

    #[test]
    fn restrict_input_validation() {
        let ds = toy(6);
        assert!(matches!(ds.restrict(&[]).unwrap_err(), Error::EmptySubset));
        assert!(matches!(
            ds.restrict(&[99]).unwrap_err(),
            Error::InvalidIndex { index: 99, len: 6 }
        ));
    }

    #[test]
    fn pin_scale_freezes_bounds_through_restriction() {
        let f = write_file("u,a,1\nu,b,5\nu,c,3\n");
        let ds = RatingsDataset::ingest(f.path(), &opts(1))
            .unwrap()
            .pin_scale();
        let view = ds.restrict(&[2]).unwrap(); // only the rating 3
        assert_eq!(view.scale_bounds(), (1.0, 5.0));
    }
}
