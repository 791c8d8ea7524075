use serde::{Deserialize, Serialize};

use super::TestbedError;

/// Fixed-point discretization of `[0, 1]^D` with `bits` bits per dimension.
///
/// Digit `j_i` of dimension `i` sits at the cell midpoint `(j_i + 0.5) / 2^bits`.
/// Indices are dimension-major with dimension 0 in the most significant bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dimension: usize,
    bits: u32,
}

/// Total index width must fit a `u64` with room to spare.
pub const MAX_INDEX_BITS: u32 = 62;

impl Grid {
    pub fn new(dimension: usize, bits: u32) -> Result<Self, TestbedError> {
        if dimension == 0 || bits == 0 {
            return Err(TestbedError::InvalidGrid(format!(
                "dimension {dimension} and bits {bits} must both be positive"
            )));
        }
        let total = (dimension as u64).saturating_mul(u64::from(bits));
        if total > u64::from(MAX_INDEX_BITS) {
            return Err(TestbedError::InvalidGrid(format!(
                "{dimension} x {bits} index bits exceed {MAX_INDEX_BITS}"
            )));
        }
        Ok(Self { dimension, bits })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn index_bits(&self) -> u32 {
        self.dimension as u32 * self.bits
    }

    /// Points per dimension, `2^bits`.
    pub fn levels(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn total_points(&self) -> u64 {
        1u64 << self.index_bits()
    }

    pub fn digit_to_coordinate(&self, digit: u64) -> f64 {
        (digit as f64 + 0.5) / self.levels() as f64
    }

    /// Nearest cell digit for a coordinate; values outside `[0, 1]` snap to the edge cells.
    pub fn coordinate_to_digit(&self, x: f64) -> u64 {
        let levels = self.levels();
        let cell = (x * levels as f64).floor();
        if cell.is_nan() || cell < 0.0 {
            0
        } else if cell >= levels as f64 {
            levels - 1
        } else {
            cell as u64
        }
    }

    pub fn digits(&self, index: u64) -> Result<Vec<u64>, TestbedError> {
        self.check(index)?;
        let mask = self.levels() - 1;
        Ok((0..self.dimension)
            .map(|i| {
                let shift = (self.dimension - 1 - i) as u32 * self.bits;
                (index >> shift) & mask
            })
            .collect())
    }

    pub fn index_from_digits(&self, digits: &[u64]) -> Result<u64, TestbedError> {
        if digits.len() != self.dimension {
            return Err(TestbedError::DimensionMismatch {
                expected: self.dimension,
                got: digits.len(),
            });
        }
        let mut index = 0u64;
        for &d in digits {
            if d >= self.levels() {
                return Err(TestbedError::IndexOutOfRange {
                    index: d,
                    size: self.levels(),
                });
            }
            index = (index << self.bits) | d;
        }
        Ok(index)
    }

    pub fn index_to_point(&self, index: u64) -> Result<Vec<f64>, TestbedError> {
        Ok(self
            .digits(index)?
            .into_iter()
            .map(|d| self.digit_to_coordinate(d))
            .collect())
    }

    /// Writes the point for `index` into `out` without allocating. `index` must be in range.
    pub(crate) fn fill_point(&self, index: u64, out: &mut [f64]) {
        let mask = self.levels() - 1;
        for (i, slot) in out.iter_mut().enumerate() {
            let shift = (self.dimension - 1 - i) as u32 * self.bits;
            *slot = self.digit_to_coordinate((index >> shift) & mask);
        }
    }

    /// Index of the cell containing `x`.
    pub fn point_to_index(&self, x: &[f64]) -> Result<u64, TestbedError> {
        if x.len() != self.dimension {
            return Err(TestbedError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(x.iter()
            .fold(0u64, |acc, &c| (acc << self.bits) | self.coordinate_to_digit(c)))
    }

    /// Grid point nearest to `x`.
    pub fn snap(&self, x: &[f64]) -> Result<Vec<f64>, TestbedError> {
        let index = self.point_to_index(x)?;
        self.index_to_point(index)
    }

    fn check(&self, index: u64) -> Result<(), TestbedError> {
        if index >= self.total_points() {
            Err(TestbedError::IndexOutOfRange {
                index,
                size: self.total_points(),
            })
        } else {
            Ok(())
        }
    }
}
