//! Ratings-matrix ingestion (Jester-style comma-separated files).
//!
//! Each line is one user. With `has_count_column` the first field is the
//! number of items that user rated. Missing ratings carry a marker value
//! (99 in the public Jester dumps).

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::datagen::partition_uniform;
use crate::error::{Error, Result};
use crate::instance::{normalize_unit_sum, Instance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingsConfig {
    pub missing_marker: f64,
    /// Inclusive legal rating range.
    pub value_range: (f64, f64),
    pub has_count_column: bool,
}

impl Default for RatingsConfig {
    fn default() -> Self {
        Self {
            missing_marker: 99.0,
            value_range: (-10.0, 10.0),
            has_count_column: true,
        }
    }
}

impl RatingsConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.value_range;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Config(format!("empty rating range [{lo}, {hi}]")));
        }
        if (lo..=hi).contains(&self.missing_marker) {
            return Err(Error::Config(format!(
                "missing marker {} lies inside the rating range [{lo}, {hi}]",
                self.missing_marker
            )));
        }
        Ok(())
    }
}

/// Users x items, `None` where the user gave no rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    ratings: Vec<Vec<Option<f64>>>,
    rated_counts: Vec<usize>,
    items: usize,
    value_range: (f64, f64),
}

impl RatingsMatrix {
    pub fn users(&self) -> usize {
        self.ratings.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        self.ratings[user][item]
    }

    pub fn user(&self, user: usize) -> &[Option<f64>] {
        &self.ratings[user]
    }

    /// Rated-item count per user, as read from the count column when present.
    pub fn rated_counts(&self) -> &[usize] {
        &self.rated_counts
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.value_range
    }

    /// The `count` items with the most ratings, lower index first on ties,
    /// returned in ascending index order.
    pub fn most_rated(&self, count: usize) -> Vec<usize> {
        let mut by_count: Vec<(usize, usize)> = (0..self.items)
            .map(|j| (j, self.ratings.iter().filter(|r| r[j].is_some()).count()))
            .collect();
        by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut chosen: Vec<usize> = by_count.into_iter().take(count).map(|(j, _)| j).collect();
        chosen.sort_unstable();
        chosen
    }

    /// Users who rated every item in `items`.
    pub fn complete_users(&self, items: &[usize]) -> Vec<usize> {
        (0..self.users())
            .filter(|&u| items.iter().all(|&j| self.ratings[u][j].is_some()))
            .collect()
    }
}

pub fn load_ratings(path: impl AsRef<Path>, config: &RatingsConfig) -> Result<RatingsMatrix> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_ratings(&text, config)
}

pub fn parse_ratings(text: &str, config: &RatingsConfig) -> Result<RatingsMatrix> {
    config.validate()?;
    let (lo, hi) = config.value_range;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut ratings = Vec::new();
    let mut rated_counts = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(ratings.len() + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric field `{f}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let (count, values) = if config.has_count_column {
            let (c, rest) = fields.split_first().ok_or_else(|| Error::Parse {
                line,
                message: "missing count column".into(),
            })?;
            if *c < 0.0 || c.fract() != 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("rated count `{c}` is not a non-negative integer"),
                });
            }
            (Some(*c as usize), rest)
        } else {
            (None, fields.as_slice())
        };
        let row = values
            .iter()
            .map(|&v| {
                if v == config.missing_marker {
                    Ok(None)
                } else if (lo..=hi).contains(&v) {
                    Ok(Some(v))
                } else {
                    Err(Error::Parse {
                        line,
                        message: format!("rating {v} outside [{lo}, {hi}]"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rated_counts.push(count.unwrap_or_else(|| row.iter().filter(|r| r.is_some()).count()));
        ratings.push(row);
    }
    let items = width.map_or(0, |w| w - usize::from(config.has_count_column));
    Ok(RatingsMatrix {
        ratings,
        rated_counts,
        items,
        value_range: config.value_range,
    })
}

/// Unit-sum valuations sampled from a ratings matrix, before districting.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsSample {
    pub valuations: Vec<Vec<f64>>,
    /// Selected item columns, ascending.
    pub items: Vec<usize>,
    /// Sampled users, in row order of `valuations`.
    pub users: Vec<usize>,
    /// Rows that were all zero after the shift and became uniform.
    pub zero_rows: usize,
}

/// Picks the `items` most-rated columns, samples `users` complete raters,
/// shifts ratings by `-lo` so the range starts at zero, and normalizes.
pub fn sample_ratings_valuations<R: Rng + ?Sized>(
    ratings: &RatingsMatrix,
    users: usize,
    items: usize,
    rng: &mut R,
) -> Result<RatingsSample> {
    if items < 2 || items > ratings.items() {
        return Err(Error::InvalidParameter(format!(
            "cannot select {items} items from {}",
            ratings.items()
        )));
    }
    let columns = ratings.most_rated(items);
    let complete = ratings.complete_users(&columns);
    if complete.len() < users || users == 0 {
        return Err(Error::InsufficientUsers {
            needed: users,
            available: complete.len(),
        });
    }
    let chosen: Vec<usize> = index::sample(rng, complete.len(), users)
        .into_iter()
        .map(|i| complete[i])
        .collect();
    let shift = -ratings.value_range().0;
    let raw: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&u| {
            columns
                .iter()
                .map(|&j| (ratings.rating(u, j).expect("complete user") + shift).max(0.0))
                .collect()
        })
        .collect();
    let zero_rows = raw.iter().filter(|r| r.iter().all(|&v| v == 0.0)).count();
    Ok(RatingsSample {
        valuations: normalize_unit_sum(&raw)?,
        items: columns,
        users: chosen,
        zero_rows,
    })
}

/// [`sample_ratings_valuations`] followed by a uniform partition into `k`
/// districts.
pub fn build_ratings_instance<R: Rng + ?Sized>(
    ratings: &RatingsMatrix,
    users: usize,
    items: usize,
    k: usize,
    rng: &mut R,
) -> Result<(Instance, RatingsSample)> {
    let sample = sample_ratings_valuations(ratings, users, items, rng)?;
    let districts = partition_uniform(users, k, rng)?;
    let instance = Instance::new(sample.valuations.clone(), districts)?;
    Ok((instance, sample))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_marker_and_count() {
        let m = parse_ratings("2, 4.5, 99, -3.2\n", &RatingsConfig::default()).unwrap();
        assert_eq!(m.users(), 1);
        assert_eq!(m.items(), 3);
        assert_eq!(m.rated_counts(), &[2]);
        let rated: Vec<usize> = (0..3).filter(|&j| m.rating(0, j).is_some()).collect();
        assert_eq!(rated, vec![0, 2]);
        assert_eq!(m.rating(0, 2), Some(-3.2));
    }

    #[test]
    fn empty_input_gives_no_users() {
        let m = parse_ratings("", &RatingsConfig::default()).unwrap();
        assert_eq!(m.users(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_ratings_valuations(&m, 1, 2, &mut rng).is_err());
    }

    #[test]
    fn marker_collision_is_config_error() {
        let cfg = RatingsConfig {
            missing_marker: 10.0,
            ..RatingsConfig::default()
        };
        assert!(matches!(parse_ratings("1, 2\n", &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn malformed_rows_report_line() {
        let cfg = RatingsConfig::default();
        let err = parse_ratings("2, 1, 2\n2, 1\n", &cfg).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_ratings("2, 1, 2\n2, x, 2\n", &cfg).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_ratings("1, 11, 99\n", &cfg).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn count_computed_without_column() {
        let cfg = RatingsConfig {
            has_count_column: false,
            ..RatingsConfig::default()
        };
        let m = parse_ratings("1, 99, 3\n99, 99, 2\n", &cfg).unwrap();
        assert_eq!(m.rated_counts(), &[2, 1]);
    }

    #[test]
    fn most_rated_ties_prefer_lower_index() {
        let text = "3, 1, 1, 1, 99\n3, 1, 1, 99, 1\n";
        let m = parse_ratings(text, &RatingsConfig::default()).unwrap();
        // counts: 2, 2, 1, 1
        assert_eq!(m.most_rated(3), vec![0, 1, 2]);
    }

    #[test]
    fn shift_and_zero_rows() {
        let text = "2, -10, -10\n2, 10, -10\n";
        let m = parse_ratings(text, &RatingsConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_ratings_valuations(&m, 2, 2, &mut rng).unwrap();
        assert_eq!(s.zero_rows, 1);
        for (row, &u) in s.valuations.iter().zip(&s.users) {
            let expected = if u == 0 { vec![0.5, 0.5] } else { vec![1.0, 0.0] };
            assert_eq!(row, &expected);
        }
    }
}
