//! Sparse matrices over the rationals, indexed by element ids.
//!
//! A `RationalMatrix` declares its row and column id lists explicitly;
//! the list order is the order used by triangularity arguments. Columns
//! are stored sparsely, keyed by row id.

use crate::scalar::Scalar;
use crate::sparse::{ElemId, SparseVec};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("undeclared row id {0}")]
    UndeclaredRow(ElemId),
    #[error("undeclared column id {0}")]
    UndeclaredColumn(ElemId),
    #[error("shape mismatch: left is {lr}x{lc}, right is {rr}x{rc}")]
    ShapeMismatch { lr: usize, lc: usize, rr: usize, rc: usize },
    #[error("matrix is not unitriangular: {0}")]
    NotUnitriangular(String),
    #[error("inverse verification failed at entry ({0}, {1})")]
    InverseCheckFailed(ElemId, ElemId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: Vec<ElemId>,
    cols: Vec<ElemId>,
    row_pos: BTreeMap<ElemId, usize>,
    col_pos: BTreeMap<ElemId, usize>,
    columns: Vec<SparseVec>,
}

fn positions(ids: &[ElemId]) -> BTreeMap<ElemId, usize> {
    ids.iter().enumerate().map(|(i, id)| (*id, i)).collect()
}

impl RationalMatrix {
    pub fn zero(rows: Vec<ElemId>, cols: Vec<ElemId>) -> Self {
        let row_pos = positions(&rows);
        let col_pos = positions(&cols);
        assert_eq!(row_pos.len(), rows.len(), "duplicate row id");
        assert_eq!(col_pos.len(), cols.len(), "duplicate column id");
        let columns = vec![SparseVec::new(); cols.len()];
        Self { rows, cols, row_pos, col_pos, columns }
    }

    pub fn identity(ids: Vec<ElemId>) -> Self {
        let mut m = Self::zero(ids.clone(), ids);
        for id in m.cols.clone() {
            m.set(id, id, Scalar::one());
        }
        m
    }

    pub fn from_columns(rows: Vec<ElemId>, cols: Vec<ElemId>, columns: Vec<SparseVec>) -> Self {
        let mut m = Self::zero(rows, cols);
        assert_eq!(columns.len(), m.cols.len());
        for col in &columns {
            for (id, _) in col.iter() {
                assert!(m.row_pos.contains_key(&id), "undeclared row id {id}");
            }
        }
        m.columns = columns;
        m
    }

    pub fn row_ids(&self) -> &[ElemId] {
        &self.rows
    }

    pub fn col_ids(&self) -> &[ElemId] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    pub fn entry_count(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn get(&self, row: ElemId, col: ElemId) -> Scalar {
        match self.col_pos.get(&col) {
            Some(&j) => self.columns[j].coeff(row),
            None => Scalar::zero(),
        }
    }

    pub fn set(&mut self, row: ElemId, col: ElemId, value: Scalar) {
        let j = *self.col_pos.get(&col).expect("undeclared column id");
        assert!(self.row_pos.contains_key(&row), "undeclared row id {row}");
        self.columns[j].set(row, value);
    }

    pub fn add_to(&mut self, row: ElemId, col: ElemId, delta: &Scalar) {
        let j = *self.col_pos.get(&col).expect("undeclared column id");
        assert!(self.row_pos.contains_key(&row), "undeclared row id {row}");
        self.columns[j].add_to(row, delta);
    }

    pub fn column(&self, col: ElemId) -> &SparseVec {
        let j = *self.col_pos.get(&col).expect("undeclared column id");
        &self.columns[j]
    }

    pub fn set_column(&mut self, col: ElemId, v: SparseVec) {
        let j = *self.col_pos.get(&col).expect("undeclared column id");
        for (id, _) in v.iter() {
            assert!(self.row_pos.contains_key(&id), "undeclared row id {id}");
        }
        self.columns[j] = v;
    }

    /// y = M x, where x is keyed by column ids and y by row ids.
    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut y = SparseVec::new();
        for (col, c) in x.iter() {
            if let Some(&j) = self.col_pos.get(&col) {
                y.add_scaled(&self.columns[j], c);
            }
        }
        y
    }

    /// t = Mᵀ x: one dot product per column.
    pub fn apply_transpose(&self, x: &SparseVec) -> SparseVec {
        let mut t = SparseVec::new();
        for (j, col) in self.columns.iter().enumerate() {
            let v = crate::sparse::duality_pair(col, x);
            t.set(self.cols[j], v);
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols.clone(), self.rows.clone());
        for (j, col) in self.columns.iter().enumerate() {
            let col_id = self.cols[j];
            for (row_id, v) in col.iter() {
                t.set(col_id, row_id, v.clone());
            }
        }
        t
    }

    pub fn scale(&self, factor: &Scalar) -> Self {
        let mut out = self.clone();
        for col in &mut out.columns {
            *col = col.scale(factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "row universe mismatch");
        assert_eq!(self.cols, other.cols, "column universe mismatch");
        let mut out = self.clone();
        for (j, col) in other.columns.iter().enumerate() {
            let mut merged = out.columns[j].clone();
            merged.add_scaled(col, &Scalar::one());
            out.columns[j] = merged;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::ShapeMismatch {
                lr: self.n_rows(),
                lc: self.n_cols(),
                rr: other.n_rows(),
                rc: other.n_cols(),
            });
        }
        let mut out = Self::zero(self.rows.clone(), other.cols.clone());
        for (j, col) in other.columns.iter().enumerate() {
            out.columns[j] = self.apply(col);
        }
        Ok(out)
    }

    /// New matrix with the same entries but a larger declared row set.
    pub fn embed_rows(&self, rows: Vec<ElemId>) -> Self {
        let mut out = Self::zero(rows, self.cols.clone());
        for id in &self.rows {
            assert!(out.row_pos.contains_key(id), "row id {id} lost in embedding");
        }
        out.columns = self.columns.clone();
        out
    }

    /// Keeps only the named columns, in the given order.
    pub fn restrict_cols(&self, cols: Vec<ElemId>) -> Self {
        let mut out = Self::zero(self.rows.clone(), cols);
        for (j, id) in out.cols.clone().iter().enumerate() {
            let src = *self.col_pos.get(id).expect("undeclared column id");
            out.columns[j] = self.columns[src].clone();
        }
        out
    }

    /// Keeps only the named rows (entries outside are dropped).
    pub fn restrict_rows(&self, rows: Vec<ElemId>) -> Self {
        let keep = positions(&rows);
        let mut out = Self::zero(rows, self.cols.clone());
        for (j, col) in self.columns.iter().enumerate() {
            out.columns[j] = col.restrict(|id| keep.contains_key(&id));
        }
        out
    }

    /// Exact ℓ₁→ℓ₁ operator norm: the largest column coefficient sum.
    pub fn opnorm_l1(&self) -> Scalar {
        let mut best = Scalar::zero();
        for col in &self.columns {
            let s = col.l1_norm();
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Exact ℓ∞→ℓ∞ operator norm over the full coordinate box: the
    /// largest row coefficient sum. Valid only when the domain ball is
    /// the whole box of its coordinates.
    pub fn opnorm_sup_full(&self) -> Scalar {
        let mut row_sums: BTreeMap<ElemId, Scalar> = BTreeMap::new();
        for col in &self.columns {
            for (row, v) in col.iter() {
                let e = row_sums.entry(row).or_insert_with(Scalar::zero);
                *e += crate::scalar::abs(v);
            }
        }
        row_sums.into_values().max().unwrap_or_else(Scalar::zero)
    }

    fn check_unitriangular(&self) -> Result<(), MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotUnitriangular(
                "row and column id lists differ".into(),
            ));
        }
        for (j, col) in self.columns.iter().enumerate() {
            let col_id = self.cols[j];
            for (row_id, v) in col.iter() {
                let i = self.row_pos[&row_id];
                if i == j {
                    if !v.is_one() {
                        return Err(MatrixError::NotUnitriangular(format!(
                            "diagonal entry at id {col_id} is {v}, not 1"
                        )));
                    }
                } else if i > j {
                    return Err(MatrixError::NotUnitriangular(format!(
                        "entry ({row_id}, {col_id}) lies below the diagonal order"
                    )));
                }
            }
            if col.get(col_id).is_none() {
                return Err(MatrixError::NotUnitriangular(format!(
                    "diagonal entry at id {col_id} is 0, not 1"
                )));
            }
        }
        Ok(())
    }

    /// Solves M x = b for unitriangular M (diagonal 1, support strictly
    /// earlier in the declared order), by back-substitution from the
    /// last position. The caller guarantees the shape.
    fn unitriangular_solve(&self, b: &SparseVec) -> SparseVec {
        let mut work: BTreeMap<usize, Scalar> = b
            .iter()
            .map(|(id, v)| (self.row_pos[&id], v.clone()))
            .collect();
        let mut x = SparseVec::new();
        while let Some((&p, _)) = work.last_key_value() {
            let v = work.remove(&p).unwrap();
            if v.is_zero() {
                continue;
            }
            let id = self.rows[p];
            x.set(id, v.clone());
            for (row_id, a) in self.columns[p].iter() {
                let q = self.row_pos[&row_id];
                if q == p {
                    continue;
                }
                let e = work.entry(q).or_insert_with(Scalar::zero);
                *e -= a * &v;
            }
        }
        x
    }

    /// Exact inverse of a unitriangular matrix, without the product check.
    pub fn unitriangular_invert_unverified(&self) -> Result<Self, MatrixError> {
        self.check_unitriangular()?;
        let mut inv = Self::zero(self.rows.clone(), self.cols.clone());
        for id in self.cols.clone() {
            let col = self.unitriangular_solve(&SparseVec::unit(id));
            inv.set_column(id, col);
        }
        Ok(inv)
    }

    /// Exact inverse of a unitriangular matrix; verifies M·M⁻¹ = I
    /// entrywise before returning.
    pub fn unitriangular_invert(&self) -> Result<Self, MatrixError> {
        let inv = self.unitriangular_invert_unverified()?;
        let prod = self.mul(&inv)?;
        for id in &self.cols {
            let col = prod.column(*id);
            if col.len() != 1 || !col.coeff(*id).is_one() {
                return Err(MatrixError::InverseCheckFailed(
                    col.min_id().unwrap_or(*id),
                    *id,
                ));
            }
        }
        Ok(inv)
    }

    /// Exact rank by sparse Gaussian elimination over ℚ.
    pub fn rank(&self) -> usize {
        rank_of_columns(self.columns.iter())
    }
}

/// Rank of a family of sparse vectors (shared by matrix rank and basis
/// independence checks).
pub fn rank_of_columns<'a, I: IntoIterator<Item = &'a SparseVec>>(columns: I) -> usize {
    // Pivot list: (pivot id, reduced vector with leading coefficient 1).
    let mut pivots: Vec<(ElemId, SparseVec)> = Vec::new();
    for col in columns {
        let mut v = col.clone();
        loop {
            let Some(lead) = v.min_id() else { break };
            match pivots.binary_search_by_key(&lead, |(p, _)| *p) {
                Ok(k) => {
                    let coeff = v.coeff(lead);
                    let pivot = pivots[k].1.clone();
                    v.add_scaled(&pivot, &-coeff);
                }
                Err(k) => {
                    let inv = Scalar::one() / v.coeff(lead);
                    pivots.insert(k, (lead, v.scale(&inv)));
                    break;
                }
            }
        }
    }
    pivots.len()
}
