//! Candidate pools: the finite set of unlabeled points a run selects from.
//!
//! Items never change once a pool is built; a step deactivates exactly one
//! item and nothing ever reactivates, so the active set shrinks by one per
//! label.

use crate::error::{Error, Result};

/// What an item actually is, depending on the environment family.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// Feature vector for regression-style environments.
    Features(Vec<f64>),
    /// Node id in a graph environment.
    Node(usize),
    /// Matrix cell in a low-rank environment.
    Cell { row: usize, col: usize },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Features(_) => "features",
            Payload::Node(_) => "node",
            Payload::Cell { .. } => "cell",
        }
    }

    pub fn features(&self) -> Option<&[f64]> {
        match self {
            Payload::Features(x) => Some(x),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Item {
    pub index: usize,
    pub payload: Payload,
}

#[derive(Clone, Debug)]
pub struct CandidatePool {
    items: Vec<Item>,
    active: Vec<bool>,
    active_count: usize,
}

impl CandidatePool {
    pub fn new(payloads: Vec<Payload>) -> Self {
        let items = payloads
            .into_iter()
            .enumerate()
            .map(|(index, payload)| Item { index, payload })
            .collect::<Vec<_>>();
        let n = items.len();
        Self {
            items,
            active: vec![true; n],
            active_count: n,
        }
    }

    /// Pool of feature vectors, one item per row.
    pub fn from_features(rows: Vec<Vec<f64>>) -> Self {
        Self::new(rows.into_iter().map(Payload::Features).collect())
    }

    /// Pool of all `n` node ids.
    pub fn from_nodes(n: usize) -> Self {
        Self::new((0..n).map(Payload::Node).collect())
    }

    /// Pool of all cells of an `rows x cols` matrix, row-major.
    pub fn from_cells(rows: usize, cols: usize) -> Self {
        Self::new(
            (0..rows)
                .flat_map(|row| (0..cols).map(move |col| Payload::Cell { row, col }))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn item(&self, index: usize) -> &Item {
        &self.items[index]
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    /// Active items in index order.
    pub fn active_items(&self) -> Vec<&Item> {
        self.items
            .iter()
            .filter(|item| self.active[item.index])
            .collect()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.items.len()).filter(|&i| self.active[i]).collect()
    }

    /// Retire an item after labeling it. Fails on unknown or already
    /// inactive items; nothing ever reactivates.
    pub fn deactivate(&mut self, index: usize) -> Result<()> {
        if index >= self.items.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.items.len(),
            });
        }
        if !self.active[index] {
            return Err(Error::InactiveItem(index));
        }
        self.active[index] = false;
        self.active_count -= 1;
        Ok(())
    }
}
