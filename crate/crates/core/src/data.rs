//! Point storage and the squared Euclidean distance.

use crate::error::{Error, Result};

/// Squared Euclidean distance between two points of equal dimension.
pub fn squared_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(sq_dist(a, b))
}

/// Unchecked kernel shared by every code path so that serial and parallel
/// distances agree to the bit.
#[inline(always)]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// An immutable, row-major store of `n` points with `dims` coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    dims: usize,
}

impl Dataset {
    /// Builds a dataset from row-major coordinates.
    ///
    /// Fails when the storage is empty, does not divide evenly into `dims`,
    /// or contains non-finite values.
    pub fn new(points: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidDataset("dims must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidDataset(
                "dataset must contain at least one point".into(),
            ));
        }
        if !points.len().is_multiple_of(dims) {
            return Err(Error::InvalidDataset(format!(
                "storage length {} is not a multiple of dims {}",
                points.len(),
                dims
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite coordinate at point {}",
                pos / dims
            )));
        }
        let n = points.len() / dims;
        Ok(Self { points, n, dims })
    }

    /// Builds a dataset from a list of equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * dims);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::InvalidDataset(format!(
                    "row {} has {} coordinates, expected {}",
                    i,
                    row.len(),
                    dims
                )));
            }
            points.extend_from_slice(row);
        }
        Self::new(points, dims)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// The full row-major coordinate buffer.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Coordinates of point `i`.
    ///
    /// Panics if `i >= n`.
    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dims..(i + 1) * self.dims]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dims)
    }

    /// Bytes occupied by the coordinate storage.
    pub fn size_bytes(&self) -> usize {
        self.points.len() * std::mem::size_of::<f64>()
    }
}

/// A set of `k` centers together with the dataset indices they came from.
///
/// During seeding every entry has a source index. After a Lloyd update the
/// centers are synthetic means and the index is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSet {
    coords: Vec<f64>,
    indices: Vec<Option<usize>>,
    dims: usize,
}

impl CentroidSet {
    pub fn empty(dims: usize) -> Self {
        Self {
            coords: Vec::new(),
            indices: Vec::new(),
            dims,
        }
    }

    pub fn with_capacity(dims: usize, k: usize) -> Self {
        Self {
            coords: Vec::with_capacity(k * dims),
            indices: Vec::with_capacity(k),
            dims,
        }
    }

    /// Centers copied from the given dataset indices.
    pub fn from_indices(data: &Dataset, indices: &[usize]) -> Result<Self> {
        let mut set = Self::with_capacity(data.dims(), indices.len());
        for &i in indices {
            if i >= data.n() {
                return Err(Error::InvalidRequest(format!(
                    "index {} out of range for {} points",
                    i,
                    data.n()
                )));
            }
            set.push_indexed(data, i);
        }
        Ok(set)
    }

    /// Synthetic centers that do not correspond to dataset points.
    pub fn from_coords(coords: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 || !coords.len().is_multiple_of(dims) {
            return Err(Error::InvalidRequest(format!(
                "centroid storage length {} is not a multiple of dims {}",
                coords.len(),
                dims
            )));
        }
        let k = coords.len() / dims;
        Ok(Self {
            coords,
            indices: vec![None; k],
            dims,
        })
    }

    pub(crate) fn push_indexed(&mut self, data: &Dataset, index: usize) {
        self.coords.extend_from_slice(data.point(index));
        self.indices.push(Some(index));
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn center(&self, c: usize) -> &[f64] {
        &self.coords[c * self.dims..(c + 1) * self.dims]
    }

    /// Source index of each center; `None` for synthetic centers.
    pub fn indices(&self) -> &[Option<usize>] {
        &self.indices
    }

    /// Source indices, or `None` if any center is synthetic.
    pub fn source_indices(&self) -> Option<Vec<usize>> {
        self.indices.iter().copied().collect()
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(squared_distance(&[7.5, -2.0], &[7.5, -2.0]).unwrap(), 0.0);
        assert_eq!(
            squared_distance(&[1.0, 2.0, 3.0], &[4.0, 6.0, 3.0]).unwrap(),
            25.0
        );
    }

    #[test]
    fn distance_dimension_mismatch() {
        let err = squared_distance(&[0.0, 0.0], &[1.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                actual: 1
            }
        ));
    }

    #[test]
    fn dataset_rejects_bad_shapes() {
        assert!(Dataset::new(vec![], 2).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(Dataset::new(vec![1.0], 0).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], 2).is_err());
        assert!(Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn dataset_accessors() {
        let d = Dataset::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.dims(), 2);
        assert_eq!(d.point(1), &[2.0, 3.0]);
        assert_eq!(d.points().len(), 6);
        assert_eq!(d.iter().count(), 3);
    }

    #[test]
    fn centroids_track_source_indices() {
        let d = Dataset::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]).unwrap();
        let c = CentroidSet::from_indices(&d, &[2, 0]).unwrap();
        assert_eq!(c.k(), 2);
        assert_eq!(c.center(0), d.point(2));
        assert_eq!(c.source_indices(), Some(vec![2, 0]));
        assert!(CentroidSet::from_indices(&d, &[3]).is_err());

        let s = CentroidSet::from_coords(vec![1.0, 1.0], 2).unwrap();
        assert_eq!(s.indices(), &[None]);
        assert_eq!(s.source_indices(), None);
    }
}
