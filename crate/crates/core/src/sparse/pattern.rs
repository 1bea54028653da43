use std::collections::BTreeSet;
use std::ops::Range;

use crate::error::{Error, Result};

/// Block CSR structure shared by the mean-flow operator and every harmonic
/// operator. Column indices in each row are sorted and always contain the
/// diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSparsityPattern {
    block: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    diag: Vec<usize>,
}

impl BlockSparsityPattern {
    /// Builds a structurally symmetric pattern from undirected node pairs.
    pub fn from_edges(n: usize, block: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if block == 0 {
            return Err(Error::Shape("block size must be positive".into()));
        }
        let mut rows: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Shape(format!("edge ({a}, {b}) outside {n} nodes")));
            }
            rows[a].insert(b);
            rows[b].insert(a);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            for &j in row {
                if j == i {
                    diag.push(col_idx.len());
                }
                col_idx.push(j);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { block, row_ptr, col_idx, diag })
    }

    /// Same structure with a different block size (used by the real embedding).
    pub fn with_block(&self, block: usize) -> Self {
        Self { block, ..self.clone() }
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn block_len(&self) -> usize {
        self.block * self.block
    }

    pub fn n_rows(&self) -> usize {
        self.diag.len()
    }

    /// Number of stored blocks.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Length of a flat vector conforming to this pattern.
    pub fn vec_len(&self) -> usize {
        self.n_rows() * self.block
    }

    pub fn row(&self, i: usize) -> Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn col(&self, pos: usize) -> usize {
        self.col_idx[pos]
    }

    pub fn cols(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row(i)]
    }

    pub fn diag_pos(&self, i: usize) -> usize {
        self.diag[i]
    }

    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row(i);
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n_rows()).all(|i| self.cols(i).iter().all(|&j| self.find(j, i).is_some()))
    }
}
