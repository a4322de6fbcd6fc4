//! Linear algebra over GF(2) on bitset rows.

use fixedbitset::FixedBitSet;

/// Reduced row echelon form in place; returns the pivot column of each
/// leading row.
pub fn rref(rows: &mut [FixedBitSet], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].contains(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.contains(col) {
                row.symmetric_difference_with(&pivot_row);
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[FixedBitSet]) -> usize {
    let ncols = rows.iter().map(FixedBitSet::len).max().unwrap_or(0);
    let mut work = rows.to_vec();
    rref(&mut work, ncols).len()
}

/// Basis of {x : row·x = 0 for every row} over `ncols` coordinates.
pub fn null_space(rows: &[FixedBitSet], ncols: usize) -> Vec<FixedBitSet> {
    let mut work: Vec<FixedBitSet> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.grow(ncols);
            r
        })
        .collect();
    let pivots = rref(&mut work, ncols);
    let mut is_pivot = FixedBitSet::with_capacity(ncols);
    for &p in &pivots {
        is_pivot.insert(p);
    }
    (0..ncols)
        .filter(|&f| !is_pivot.contains(f))
        .map(|f| {
            let mut x = FixedBitSet::with_capacity(ncols);
            x.insert(f);
            for (row, &p) in work.iter().zip(&pivots) {
                if row.contains(f) {
                    x.insert(p);
                }
            }
            x
        })
        .collect()
}

/// Row space that grows one vector at a time, keyed by highest set bit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IncrementalBasis {
    by_pivot: Vec<Option<FixedBitSet>>,
    rank: usize,
}

impl IncrementalBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Adds the vector with the given set positions; true when it was
    /// independent of what is already stored.
    pub fn insert(&mut self, support: &[u32]) -> bool {
        let Some(&top) = support.iter().max() else {
            return false;
        };
        let mut v = FixedBitSet::with_capacity(top as usize + 1);
        for &i in support {
            v.toggle(i as usize);
        }
        while let Some(p) = v.maximum() {
            if p >= self.by_pivot.len() {
                self.by_pivot.resize(p + 1, None);
            }
            match &self.by_pivot[p] {
                Some(row) => v.symmetric_difference_with(row),
                None => {
                    self.by_pivot[p] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}
