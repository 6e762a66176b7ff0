#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempvec::corpus::{
    load_interactions, preprocess, Column, Dataset, InputFormat, Interaction, PreprocessConfig,
};
use tempvec_cli::artifacts::Splits;

/// Rows of `user item rating timestamp`. Item popularity is skewed and users
/// alternate bursts of activity with long pauses, spread over the whole
/// period so every split sees most users.
pub fn synthetic_rows(
    seed: u64,
    users: usize,
    items: usize,
    events: usize,
) -> Vec<(String, String, u8, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for u in 0..users {
        let mut t: i64 = rng.random_range(0..50_000);
        for _ in 0..events {
            t += if rng.random_bool(0.7) {
                rng.random_range(60..3_600)
            } else {
                rng.random_range(20_000..400_000)
            };
            let r: f64 = rng.random();
            let item = ((r * r) * items as f64) as usize;
            let rating = rng.random_range(1..=5);
            rows.push((format!("u{u:03}"), format!("i{item:03}"), rating, t));
        }
    }
    rows
}

pub fn synthetic_tsv(seed: u64, users: usize, items: usize, events: usize) -> String {
    let mut s = String::new();
    for (u, i, r, t) in synthetic_rows(seed, users, items, events) {
        writeln!(s, "{u}\t{i}\t{r}\t{t}").unwrap();
    }
    s
}

pub fn synthetic_dataset(seed: u64, users: usize, items: usize, events: usize) -> Dataset {
    Dataset::new(
        synthetic_rows(seed, users, items, events)
            .into_iter()
            .map(|(u, i, _, t)| Interaction::new(u, i, t))
            .collect(),
        None,
    )
}

/// Column mapping for `user item rating timestamp` tab-separated files.
pub fn udata_format() -> InputFormat {
    InputFormat {
        delimiter: b'\t',
        has_header: false,
        user: Column::Index(0),
        item: Column::Index(1),
        rating: Some(Column::Index(2)),
        timestamp: Column::Index(3),
        rating_range: Some((1.0, 5.0)),
        ..InputFormat::default()
    }
}

/// MovieLens-100k `u.data`, from `TEMPVEC_ML100K` or `data/ml-100k/u.data`
/// under the workspace root.
pub fn ml100k_path() -> PathBuf {
    std::env::var_os("TEMPVEC_ML100K")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-100k/u.data")
        })
}

pub fn ml100k_splits() -> Result<Splits, String> {
    let path = ml100k_path();
    let file = std::fs::File::open(&path).map_err(|e| {
        format!(
            "MovieLens-100k not found at {} ({e}); run scripts/fetch-ml100k.sh or set TEMPVEC_ML100K",
            path.display()
        )
    })?;
    let (raw, _) = load_interactions(std::io::BufReader::new(file), &udata_format())
        .map_err(|e| e.to_string())?;
    let cfg = PreprocessConfig {
        rating_range: Some((1.0, 5.0)),
        ..PreprocessConfig::default()
    };
    Ok(preprocess(&raw, &cfg).map_err(|e| e.to_string())?.into())
}
