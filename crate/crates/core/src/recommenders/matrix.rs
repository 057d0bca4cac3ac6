//! Binary user × item matrix in compressed sparse row form.
use std::collections::{BTreeSet, HashMap};

use crate::ingestion::InteractionRecord;

/// Compressed sparse row structure for a 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    n_cols: usize,
    ptr: Vec<usize>,
    indices: Vec<u32>,
}

impl Csr {
    /// Build from `(row, col)` pairs. Duplicates collapse; columns within a row are sorted.
    pub fn from_pairs(n_rows: usize, n_cols: usize, pairs: &[(u32, u32)]) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _) in pairs {
            counts[r as usize + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0u32; pairs.len()];
        for &(r, c) in pairs {
            indices[fill[r as usize]] = c;
            fill[r as usize] += 1;
        }

        // sort and dedup each row, compacting in place
        let mut ptr = Vec::with_capacity(n_rows + 1);
        ptr.push(0);
        let mut write = 0;
        for r in 0..n_rows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            indices[lo..hi].sort_unstable();
            let mut last = None;
            for k in lo..hi {
                let c = indices[k];
                if last != Some(c) {
                    indices[write] = c;
                    write += 1;
                    last = Some(c);
                }
            }
            ptr.push(write);
        }
        indices.truncate(write);
        Csr {
            n_cols,
            ptr,
            indices,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.indices[self.ptr[r]..self.ptr[r + 1]]
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.ptr[r + 1] - self.ptr[r]
    }

    pub fn contains(&self, r: usize, c: u32) -> bool {
        self.row(r).binary_search(&c).is_ok()
    }

    /// Column of the `k`-th stored entry.
    pub fn entry(&self, k: usize) -> u32 {
        self.indices[k]
    }

    /// Row of the `k`-th stored entry.
    pub fn row_of_entry(&self, k: usize) -> usize {
        // first row whose end pointer is past k
        self.ptr.partition_point(|&p| p <= k) - 1
    }

    pub fn transpose(&self) -> Csr {
        let mut pairs = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows() {
            for &c in self.row(r) {
                pairs.push((c, r as u32));
            }
        }
        Csr::from_pairs(self.n_cols, self.n_rows(), &pairs)
    }
}

/// Binary user × item matrix for one training window.
///
/// User and item indices follow ascending id order, so index order doubles as
/// the deterministic tie-break order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionMatrix {
    users: Vec<String>,
    items: Vec<String>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    by_user: Csr,
    by_item: Csr,
}

impl InteractionMatrix {
    pub fn from_records<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a InteractionRecord>,
    {
        Self::from_pairs(records.into_iter().map(|r| (r.user_id.as_str(), r.item_id.as_str())))
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let users: BTreeSet<&str> = pairs.iter().map(|p| p.0).collect();
        let items: BTreeSet<&str> = pairs.iter().map(|p| p.1).collect();
        let users: Vec<String> = users.into_iter().map(String::from).collect();
        let items: Vec<String> = items.into_iter().map(String::from).collect();
        let user_index: HashMap<String, usize> =
            users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        let item_index: HashMap<String, usize> =
            items.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        let coords: Vec<(u32, u32)> = pairs
            .iter()
            .map(|(u, i)| (user_index[*u] as u32, item_index[*i] as u32))
            .collect();
        let by_user = Csr::from_pairs(users.len(), items.len(), &coords);
        let by_item = by_user.transpose();
        InteractionMatrix {
            users,
            items,
            user_index,
            item_index,
            by_user,
            by_item,
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn nnz(&self) -> usize {
        self.by_user.nnz()
    }

    pub fn is_empty(&self) -> bool {
        self.nnz() == 0
    }

    pub fn user_id(&self, u: usize) -> &str {
        &self.users[u]
    }

    pub fn item_id(&self, i: usize) -> &str {
        &self.items[i]
    }

    pub fn user_ids(&self) -> &[String] {
        &self.users
    }

    pub fn item_ids(&self) -> &[String] {
        &self.items
    }

    pub fn user_idx(&self, user_id: &str) -> Option<usize> {
        self.user_index.get(user_id).copied()
    }

    pub fn item_idx(&self, item_id: &str) -> Option<usize> {
        self.item_index.get(item_id).copied()
    }

    /// Items of user `u`, ascending.
    pub fn user_items(&self, u: usize) -> &[u32] {
        self.by_user.row(u)
    }

    /// Users of item `i`, ascending.
    pub fn item_users(&self, i: usize) -> &[u32] {
        self.by_item.row(i)
    }

    pub fn contains(&self, u: usize, i: usize) -> bool {
        self.by_user.contains(u, i as u32)
    }

    pub fn by_user(&self) -> &Csr {
        &self.by_user
    }

    pub fn by_item(&self) -> &Csr {
        &self.by_item
    }
}
