use serde::{Deserialize, Serialize};

/// Dense `slots × regions` matrix stored slot-major.
///
/// Every time-varying quantity in the planner (user densities, baseline
/// demand, MBS schedule, excess capacity) is indexed by `(slot, region)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRegionMatrix {
    slots: usize,
    regions: usize,
    data: Vec<f64>,
}

impl SlotRegionMatrix {
    pub fn zeros(slots: usize, regions: usize) -> Self {
        Self {
            slots,
            regions,
            data: vec![0.0; slots * regions],
        }
    }

    pub fn from_fn(slots: usize, regions: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(slots * regions);
        for j in 0..slots {
            for z in 0..regions {
                data.push(f(j, z));
            }
        }
        Self {
            slots,
            regions,
            data,
        }
    }

    /// Builds a matrix from rows, one row per slot.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let regions = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == regions),
            "ragged rows in SlotRegionMatrix::from_rows"
        );
        Self {
            slots: rows.len(),
            regions,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn regions(&self) -> usize {
        self.regions
    }

    #[inline]
    pub fn get(&self, slot: usize, region: usize) -> f64 {
        debug_assert!(slot < self.slots && region < self.regions);
        self.data[slot * self.regions + region]
    }

    #[inline]
    pub fn set(&mut self, slot: usize, region: usize, value: f64) {
        debug_assert!(slot < self.slots && region < self.regions);
        self.data[slot * self.regions + region] = value;
    }

    pub fn row(&self, slot: usize) -> &[f64] {
        &self.data[slot * self.regions..(slot + 1) * self.regions]
    }

    pub fn column(&self, region: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.slots).map(move |j| self.get(j, region))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.regions.max(1)).take(self.slots)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Maximum of each column; zero for an empty column.
    pub fn column_max(&self) -> Vec<f64> {
        (0..self.regions)
            .map(|z| self.column(z).fold(0.0, f64::max))
            .collect()
    }

    pub fn column_min(&self) -> Vec<f64> {
        (0..self.regions)
            .map(|z| self.column(z).fold(f64::INFINITY, f64::min))
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            slots: self.slots,
            regions: self.regions,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
