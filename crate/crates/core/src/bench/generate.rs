use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Side length of the cube blob centers are drawn from.
pub const CENTER_RANGE: f64 = 100.0;

/// Points together with the blob each was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub data: Dataset,
    pub labels: Vec<usize>,
    /// Row-major blob centers.
    pub centers: Vec<f64>,
}

/// `n` points around `blobs` centers drawn uniformly in `[0, 100)^dims`.
///
/// Point `i` belongs to blob `i % blobs` and is offset by isotropic
/// Gaussian noise with standard deviation `spread`.
pub fn generate_points(
    n: usize,
    dims: usize,
    blobs: usize,
    spread: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    generate_labeled(n, dims, blobs, spread, rng).map(|l| l.data)
}

pub fn generate_labeled(
    n: usize,
    dims: usize,
    blobs: usize,
    spread: f64,
    rng: &mut RngStream,
) -> Result<LabeledPoints> {
    if dims == 0 {
        return Err(Error::InvalidRequest("dims must be at least 1".into()));
    }
    if blobs == 0 || n < blobs {
        return Err(Error::InvalidRequest(format!(
            "need n >= blobs >= 1, got n = {n}, blobs = {blobs}"
        )));
    }
    let centers: Vec<f64> = (0..blobs * dims)
        .map(|_| rng.uniform() * CENTER_RANGE)
        .collect();
    let weights = vec![1; blobs];
    generate_from_centers(n, &centers, dims, &weights, spread, rng)
}

/// Points around explicit `centers`, with blob sizes proportional to
/// `weights`. Blobs are visited round-robin in proportion to their weight,
/// so with equal weights point `i` belongs to blob `i % blobs`.
pub fn generate_from_centers(
    n: usize,
    centers: &[f64],
    dims: usize,
    weights: &[usize],
    spread: f64,
    rng: &mut RngStream,
) -> Result<LabeledPoints> {
    if dims == 0 || centers.is_empty() || !centers.len().is_multiple_of(dims) {
        return Err(Error::InvalidRequest(
            "centers must be a non-empty multiple of dims".into(),
        ));
    }
    let blobs = centers.len() / dims;
    if weights.len() != blobs || weights.contains(&0) {
        return Err(Error::InvalidRequest(
            "one positive weight per blob is required".into(),
        ));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(Error::InvalidRequest(format!(
            "spread {spread} must be finite and >= 0"
        )));
    }
    // A cycle of sum(weights) slots; slot s belongs to the first blob whose
    // cumulative weight exceeds s.
    let cycle: Vec<usize> = weights
        .iter()
        .enumerate()
        .flat_map(|(b, &w)| std::iter::repeat_n(b, w))
        .collect();
    let mut points = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let b = cycle[i % cycle.len()];
        labels.push(b);
        for c in &centers[b * dims..(b + 1) * dims] {
            points.push(c + spread * rng.normal());
        }
    }
    Ok(LabeledPoints {
        data: Dataset::new(points, dims)?,
        labels,
        centers: centers.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_yields_centers() {
        let mut rng = RngStream::new(4);
        let l = generate_labeled(3, 2, 3, 0.0, &mut rng).unwrap();
        assert_eq!(l.data.points(), l.centers.as_slice());
        assert_eq!(l.labels, vec![0, 1, 2]);
        assert!(l.centers.iter().all(|c| (0.0..100.0).contains(c)));
    }

    #[test]
    fn shape() {
        let mut rng = RngStream::new(1);
        let d = generate_points(1_000_000, 2, 10, 1.0, &mut rng).unwrap();
        assert_eq!(d.n(), 1_000_000);
        assert_eq!(d.points().len(), 2_000_000);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_points(500, 3, 4, 0.5, &mut RngStream::new(8)).unwrap();
        let b = generate_points(500, 3, 4, 0.5, &mut RngStream::new(8)).unwrap();
        let c = generate_points(500, 3, 4, 0.5, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn weighted_blob_sizes() {
        let mut rng = RngStream::new(2);
        let l =
            generate_from_centers(100, &[0.0, 50.0, 90.0], 1, &[8, 1, 1], 0.1, &mut rng).unwrap();
        let count = |b| l.labels.iter().filter(|&&x| x == b).count();
        assert_eq!((count(0), count(1), count(2)), (80, 10, 10));
    }

    #[test]
    fn preconditions() {
        let mut rng = RngStream::new(0);
        assert!(generate_points(2, 2, 3, 1.0, &mut rng).is_err());
        assert!(generate_points(2, 2, 0, 1.0, &mut rng).is_err());
        assert!(generate_points(2, 0, 1, 1.0, &mut rng).is_err());
        assert!(generate_points(2, 2, 1, -1.0, &mut rng).is_err());
    }
}
