use crate::error::{Error, Result};
use crate::model::SquareMatrix;

/// Off-diagonal entries of one row, sorted by decreasing magnitude.
///
/// `map[k]` is the column holding the `k`-th largest magnitude. Equal
/// magnitudes are ordered by ascending column index, so the ranking does not
/// depend on the sort algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub owner: usize,
    pub magnitudes: Vec<f64>,
    pub map: Vec<usize>,
    pub signs: Vec<i8>,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

impl RankedRow {
    /// Ranks `row` excluding position `owner`.
    pub fn from_slice(row: &[f64], owner: usize) -> Result<Self> {
        if owner >= row.len() {
            return Err(Error::Dimension(format!(
                "row index {owner} out of range for length {}",
                row.len()
            )));
        }
        let mut map: Vec<usize> = (0..row.len()).filter(|&j| j != owner).collect();
        // stable sort over ascending indices keeps the column tie-break
        map.sort_by(|&a, &b| row[b].abs().total_cmp(&row[a].abs()));
        let magnitudes = map.iter().map(|&j| row[j].abs()).collect();
        let signs = map.iter().map(|&j| sign_of(row[j])).collect();
        Ok(Self {
            owner,
            magnitudes,
            map,
            signs,
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Scatters ranked magnitudes back to column order with the stored signs.
    /// The owner's slot is filled with `diagonal`.
    pub fn scatter(&self, ranked_values: &[f64], diagonal: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len() + 1];
        out[self.owner] = diagonal;
        for (k, &col) in self.map.iter().enumerate() {
            out[col] = f64::from(self.signs[k]) * ranked_values[k];
        }
        out
    }

    /// Sum of `magnitudes[k] * weights[k]`.
    pub fn weighted_sum(&self, weights: &[f64]) -> f64 {
        self.magnitudes
            .iter()
            .zip(weights)
            .map(|(m, w)| m * w)
            .sum()
    }
}

/// Ranks row `i` of `x` by decreasing magnitude, skipping the diagonal.
pub fn rank_row(x: &SquareMatrix, i: usize) -> Result<RankedRow> {
    if i >= x.order() {
        return Err(Error::Dimension(format!(
            "row {i} out of range for order {}",
            x.order()
        )));
    }
    RankedRow::from_slice(&x.row(i), i)
}
