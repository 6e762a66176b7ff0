use std::collections::HashMap;

use crate::corpus::Dataset;
use crate::error::{Error, Result};

/// Dense item indexing, most frequent item first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    items: Vec<String>,
    index: HashMap<String, usize>,
    frequency: Vec<u64>,
}

impl Vocabulary {
    /// Counts training interactions per item and assigns indices by
    /// descending frequency, ties broken by item id.
    pub fn build(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for i in train.iter() {
            *counts.entry(i.item_id.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_counts(
            ranked
                .into_iter()
                .map(|(id, c)| (id.to_string(), c))
                .collect(),
        ))
    }

    /// A vocabulary in the given order. Frequencies are unknown and set to 1;
    /// used when loading a persisted model.
    pub fn from_ids(ids: Vec<String>) -> Self {
        Self::from_counts(ids.into_iter().map(|id| (id, 1)).collect())
    }

    fn from_counts(entries: Vec<(String, u64)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.clone(), i))
            .collect();
        let (items, frequency) = entries.into_iter().unzip();
        Vocabulary {
            items,
            index,
            frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index(&self, item_id: &str) -> Option<usize> {
        self.index.get(item_id).copied()
    }

    pub fn item(&self, index: usize) -> &str {
        &self.items[index]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn frequency(&self, index: usize) -> u64 {
        self.frequency[index]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequency
    }

    pub fn total(&self) -> u64 {
        self.frequency.iter().sum()
    }
}
