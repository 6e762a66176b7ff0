//! Split files, content hashes and output helpers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempvec::corpus::{load_interactions, write_interactions, Dataset, InputFormat, SplitResult};

use crate::error::{CliError, Result};

pub const TRAIN_FILE: &str = "train.tsv";
pub const VALIDATION_FILE: &str = "validation.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Which preprocessed interactions a command works on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Part {
    Train,
    Validation,
    Test,
    /// Train and validation merged: everything before the test period.
    TrainVal,
    All,
}

impl Part {
    pub fn as_str(&self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Validation => "validation",
            Part::Test => "test",
            Part::TrainVal => "train-val",
            Part::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

impl From<SplitResult> for Splits {
    fn from(s: SplitResult) -> Self {
        Splits {
            train: s.train,
            validation: s.validation,
            test: s.test,
        }
    }
}

impl Splits {
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<Dataset> {
            let path = dir.join(name);
            let file = File::open(&path).map_err(|e| {
                CliError::new(
                    "missing-input",
                    format!(
                        "cannot open {} ({e}); run `preprocess` first",
                        path.display()
                    ),
                )
            })?;
            match load_interactions(BufReader::new(file), &InputFormat::canonical(b'\t')) {
                Ok((d, _)) => Ok(d),
                Err(tempvec::Error::NoRows { skipped: 0 }) => Ok(Dataset::default()),
                Err(e) => Err(e.into()),
            }
        };
        Ok(Splits {
            train: read(TRAIN_FILE)?,
            validation: read(VALIDATION_FILE)?,
            test: read(TEST_FILE)?,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (name, d) in [
            (TRAIN_FILE, &self.train),
            (VALIDATION_FILE, &self.validation),
            (TEST_FILE, &self.test),
        ] {
            let path = dir.join(name);
            write_interactions(d, b'\t', BufWriter::new(File::create(&path)?))?;
            out.push(path);
        }
        Ok(out)
    }

    pub fn part(&self, part: Part) -> Dataset {
        let join = |ds: &[&Dataset]| {
            Dataset::new(
                ds.iter()
                    .flat_map(|d| d.interactions.iter().cloned())
                    .collect(),
                self.train.rating_range,
            )
        };
        match part {
            Part::Train => self.train.clone(),
            Part::Validation => self.validation.clone(),
            Part::Test => self.test.clone(),
            Part::TrainVal => join(&[&self.train, &self.validation]),
            Part::All => join(&[&self.train, &self.validation, &self.test]),
        }
    }
}

/// Short hex digest identifying an artifact's inputs.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())[..16].to_string()
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_text(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = BufWriter::new(File::create(&path)?);
    f.write_all(contents.as_bytes())?;
    f.flush()?;
    Ok(path)
}
