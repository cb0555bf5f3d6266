//! Datasets on `[0,1]^d`: the trimodal Gaussian mixture, MNIST in IDX
//! format, plain CSV, and PCA reduction with an invertible rescaling.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatNormal};

use crate::{Error, Result};

/// Lower and upper edge of the box that rescaled coordinates are mapped into.
pub const RESCALE_MARGIN: (f64, f64) = (0.02, 0.98);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Gmm,
    MnistIdx,
    Csv,
}

/// Per-dimension affine map `y = slope · x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescale {
    pub slope: Vec<f64>,
    pub intercept: Vec<f64>,
}

impl Rescale {
    pub fn identity(dim: usize) -> Self {
        Rescale {
            slope: vec![1.0; dim],
            intercept: vec![0.0; dim],
        }
    }

    /// Maps the per-column `[min, max]` of `points` onto `[lo, hi]`.
    pub fn min_max(points: &[Vec<f64>], lo: f64, hi: f64) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        let mut slope = Vec::with_capacity(dim);
        let mut intercept = Vec::with_capacity(dim);
        for i in 0..dim {
            let (mn, mx) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                    (a.min(p[i]), b.max(p[i]))
                });
            if !(mx > mn) {
                return Err(Error::ZeroVariance { dim: i });
            }
            let s = (hi - lo) / (mx - mn);
            slope.push(s);
            intercept.push(lo - s * mn);
        }
        Ok(Rescale { slope, intercept })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.slope.iter().zip(&self.intercept))
            .map(|(v, (s, c))| s * v + c)
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.slope.iter().zip(&self.intercept))
            .map(|(v, (s, c))| (v - c) / s)
            .collect()
    }

    /// `|det|` of the map, i.e. the density factor from `x` to `y` space.
    pub fn jacobian(&self) -> f64 {
        self.slope.iter().map(|s| s.abs()).product()
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<i64>>,
    pub provenance: Provenance,
    /// Map from the source coordinates to `points`.
    pub rescale: Rescale,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// Checks that points are pairwise distinct and lie in `[0,1]^d`.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let mut seen = HashSet::with_capacity(self.len());
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::OutOfDomain { index: i });
            }
            let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::Degenerate(format!("point {i} is a duplicate")));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.len(),
                    got: l.len(),
                });
            }
        }
        Ok(())
    }

    /// Indices carrying each label, in label order.
    pub fn class_indices(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        if let Some(labels) = &self.labels {
            for (i, &l) in labels.iter().enumerate() {
                out.entry(l).or_default().push(i);
            }
        }
        out
    }
}

const GMM_STD: f64 = 0.2;

/// The three mixture centers in `[−1,1]²`.
pub fn gmm_centers() -> [[f64; 2]; 3] {
    [
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        [-FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        [0.0, 0.0],
    ]
}

/// Balanced three-component Gaussian mixture (std 0.2) truncated to
/// `(−1,1)²` by rejection, then mapped to `[0,1]²` by `(x + 1) / 2`.
/// Point `i` belongs to component `i mod 3`.
pub fn gen_gmm_trimodal(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, GMM_STD).expect("valid std");
    let centers = gmm_centers();
    let rescale = Rescale {
        slope: vec![0.5; 2],
        intercept: vec![0.5; 2],
    };
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = centers[i % 3];
        let raw = loop {
            let x = [
                c[0] + normal.sample(&mut rng),
                c[1] + normal.sample(&mut rng),
            ];
            if x.iter().all(|v| v.abs() < 1.0) {
                break x;
            }
        };
        points.push(rescale.apply(&raw));
        labels.push((i % 3) as i64);
    }
    Ok(Dataset {
        points,
        labels: Some(labels),
        provenance: Provenance::Gmm,
        rescale,
    })
}

/// Density of the mixture produced by [`gen_gmm_trimodal`] at a point of
/// `[0,1]²`, in the rescaled coordinates.
pub fn gmm_density(y: &[f64]) -> f64 {
    let std = StatNormal::new(0.0, GMM_STD).expect("valid std");
    let x = [2.0 * y[0] - 1.0, 2.0 * y[1] - 1.0];
    if x.iter().any(|v| v.abs() >= 1.0) {
        return 0.0;
    }
    let mut total = 0.0;
    for c in gmm_centers() {
        let mut dens = 1.0;
        let mut mass = 1.0;
        for i in 0..2 {
            dens *= std.pdf(x[i] - c[i]);
            mass *= std.cdf(1.0 - c[i]) - std.cdf(-1.0 - c[i]);
        }
        total += dens / mass / 3.0;
    }
    // Jacobian of x = 2y − 1 in two dimensions
    4.0 * total
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format("truncated IDX header".into()))
}

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

/// Parses an IDX image file into `(rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let magic = read_u32(bytes, 0)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "image magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}"
        )));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * size {
        return Err(Error::Format(format!(
            "image file truncated: {} bytes for {count} images of {size}",
            body.len()
        )));
    }
    let images = body
        .chunks_exact(size.max(1))
        .take(count)
        .map(|c| c.to_vec())
        .collect();
    Ok((rows, cols, images))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0)?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::Format(format!(
            "label magic {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}"
        )));
    }
    let count = read_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Format(format!(
            "label file truncated: {} of {count} labels",
            body.len()
        )));
    }
    Ok(body[..count].to_vec())
}

/// Loads MNIST-style IDX files, keeps the requested digits, and takes the
/// first `limit / |digits|` images of each digit in file order. Pixels are
/// scaled to `[0,1]`.
pub fn load_mnist_idx(
    images: &Path,
    labels: &Path,
    digits: &[u8],
    limit: usize,
) -> Result<Dataset> {
    if digits.is_empty() {
        return Err(Error::InvalidParameter("digit filter is empty".into()));
    }
    let (_, _, imgs) = parse_idx_images(&std::fs::read(images)?)?;
    let labs = parse_idx_labels(&std::fs::read(labels)?)?;
    if imgs.len() != labs.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            imgs.len(),
            labs.len()
        )));
    }
    let per_class = limit / digits.len();
    let mut taken: BTreeMap<u8, usize> = digits.iter().map(|&d| (d, 0)).collect();
    let mut points = Vec::new();
    let mut out_labels = Vec::new();
    for (img, &lab) in imgs.iter().zip(&labs) {
        if let Some(count) = taken.get_mut(&lab) {
            if *count < per_class {
                *count += 1;
                points.push(img.iter().map(|&p| p as f64 / 255.0).collect::<Vec<f64>>());
                out_labels.push(lab as i64);
            }
        }
    }
    if let Some((d, c)) = taken.iter().find(|(_, &c)| c < per_class) {
        return Err(Error::Degenerate(format!(
            "only {c} images of digit {d}, {per_class} requested"
        )));
    }
    let dim = points.first().map_or(0, |p| p.len());
    Ok(Dataset {
        points,
        labels: Some(out_labels),
        provenance: Provenance::MnistIdx,
        rescale: Rescale::identity(dim),
    })
}

/// Reads a headed CSV of numbers. A column named `label` becomes the labels;
/// all other columns are coordinates, taken as is.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_col = headers.iter().position(|h| h.trim() == "label");
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let mut p = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Format(format!(
                    "row {row}, column {col}: `{field}` is not a number"
                ))
            })?;
            if Some(col) == label_col {
                labels.push(v as i64);
            } else {
                p.push(v);
            }
        }
        points.push(p);
    }
    let dim = points.first().map_or(0, |p| p.len());
    Ok(Dataset {
        points,
        labels: label_col.map(|_| labels),
        provenance: Provenance::Csv,
        rescale: Rescale::identity(dim),
    })
}

/// Min-max rescales every coordinate into [`RESCALE_MARGIN`], composing the
/// new map with the existing rescale record.
pub fn rescale_to_margin(mut data: Dataset) -> Result<Dataset> {
    let r = Rescale::min_max(&data.points, RESCALE_MARGIN.0, RESCALE_MARGIN.1)?;
    for p in data.points.iter_mut() {
        *p = r.apply(p);
    }
    if data.rescale.slope.len() == r.slope.len() {
        data.rescale = Rescale {
            slope: r
                .slope
                .iter()
                .zip(&data.rescale.slope)
                .map(|(a, b)| a * b)
                .collect(),
            intercept: r
                .slope
                .iter()
                .zip(&data.rescale.intercept)
                .zip(&r.intercept)
                .map(|((a, c), e)| a * c + e)
                .collect(),
        };
    } else {
        data.rescale = r;
    }
    Ok(data)
}

/// Result of [`pca_project`]: the reduced dataset plus the principal axes.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    pub data: Dataset,
    pub mean: Vec<f64>,
    /// Principal directions, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

/// Centers, projects onto the top `target` eigenvectors of the sample
/// covariance, and min-max rescales into [`RESCALE_MARGIN`]. The rescale
/// record maps PCA scores to the stored points.
pub fn pca_project(data: &Dataset, target: usize) -> Result<PcaProjection> {
    let n = data.len();
    let d = data.dim();
    if target == 0 || target > d {
        return Err(Error::InvalidParameter(format!(
            "cannot project {d}-dimensional data onto {target} components"
        )));
    }
    if n < 2 {
        return Err(Error::Degenerate("PCA needs at least 2 points".into()));
    }
    let mut x = DMatrix::from_fn(n, d, |i, j| data.points[i][j]);
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
    for j in 0..d {
        x.column_mut(j).add_scalar_mut(-mean[j]);
    }
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let kept = &order[..target];
    if let Some(&k) = kept
        .iter()
        .find(|&&k| !(eig.eigenvalues[k] > 1e-12 * top.max(f64::MIN_POSITIVE)))
    {
        return Err(Error::Degenerate(format!(
            "covariance rank is below {target} (eigenvalue {:.3e})",
            eig.eigenvalues[k]
        )));
    }
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(target);
    for &k in kept {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
        components.push(v);
    }
    let scores: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| x.row(i).iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let rescale = Rescale::min_max(&scores, RESCALE_MARGIN.0, RESCALE_MARGIN.1)?;
    let points = scores.iter().map(|s| rescale.apply(s)).collect();
    Ok(PcaProjection {
        data: Dataset {
            points,
            labels: data.labels.clone(),
            provenance: data.provenance,
            rescale,
        },
        mean,
        variances: kept.iter().map(|&k| eig.eigenvalues[k]).collect(),
        components,
    })
}

/// Two Gaussian classes with labels `±1`: class `+1` centred at
/// `(0.5, 0.5)`, class `−1` at `(−0.5, −0.5)`, both with std `0.5`.
/// Stored points are min-max rescaled into [`RESCALE_MARGIN`]; the rescale
/// record recovers the raw coordinates.
pub fn gen_two_class(n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::InvalidParameter(
            "need at least one point per class".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5).expect("valid std");
    let mut raw = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (label, c) in [(1i64, 0.5), (-1, -0.5)] {
        for _ in 0..n_per_class {
            raw.push(vec![
                c + normal.sample(&mut rng),
                c + normal.sample(&mut rng),
            ]);
            labels.push(label);
        }
    }
    rescale_to_margin(Dataset {
        points: raw,
        labels: Some(labels),
        provenance: Provenance::Gmm,
        rescale: Rescale::identity(2),
    })
}

/// `n` i.i.d. uniform points in `[0,1)^d`.
pub fn uniform_points<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate;

    #[test]
    fn gmm_shape_and_balance() {
        let ds = gen_gmm_trimodal(1024, 3).unwrap();
        assert_eq!(ds.len(), 1024);
        ds.validate().unwrap();
        let classes = ds.class_indices();
        let counts: Vec<usize> = classes.values().map(|v| v.len()).collect();
        let (mn, mx) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(mx - mn <= 2);
    }

    #[test]
    fn gmm_mean_is_centered() {
        let ds = gen_gmm_trimodal(30_000, 11).unwrap();
        for i in 0..2 {
            let raw: Vec<f64> = ds.points.iter().map(|p| ds.rescale.invert(p)[i]).collect();
            let m = crate::stats::mean(&raw);
            let se = crate::stats::standard_error(&raw);
            assert!(m.abs() < 3.0 * se, "axis {i}: {m} vs se {se}");
        }
    }

    #[test]
    fn gmm_density_integrates_to_one() {
        let total = integrate::integrate_unit_square(|x, y| gmm_density(&[x, y]), &[], 1e-9);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    fn idx_images(count: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_IMAGE_MAGIC, count, 2, 2] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(pixels);
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_LABEL_MAGIC, labels.len() as u32] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn idx_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..24).map(|i| i * 10).collect();
        let img = dir.path().join("img");
        let lab = dir.path().join("lab");
        std::fs::write(&img, idx_images(6, &pixels)).unwrap();
        std::fs::write(&lab, idx_labels(&[4, 9, 1, 4, 9, 4])).unwrap();
        let ds = load_mnist_idx(&img, &lab, &[4, 9], 4).unwrap();
        assert_eq!(ds.labels.as_deref(), Some(&[4, 9, 4, 9][..]));
        assert_eq!(ds.dim(), 4);
        assert_eq!(
            ds.points[1],
            vec![40.0 / 255.0, 50.0 / 255.0, 60.0 / 255.0, 70.0 / 255.0]
        );
        assert!(load_mnist_idx(&img, &lab, &[], 4).is_err());
        assert_eq!(read_u32(&idx_images(1, &[0; 4]), 0).unwrap(), 0x0000_0803);

        let bad = dir.path().join("bad");
        std::fs::write(&bad, idx_labels(&[1])).unwrap();
        assert!(matches!(
            load_mnist_idx(&bad, &lab, &[4], 2),
            Err(Error::Format(_))
        ));
        std::fs::write(&bad, idx_images(6, &pixels[..20])).unwrap();
        assert!(matches!(
            load_mnist_idx(&bad, &lab, &[4], 2),
            Err(Error::Format(_))
        ));
        std::fs::write(&bad, idx_labels(&[4, 9])).unwrap();
        assert!(matches!(
            load_mnist_idx(&img, &bad, &[4], 2),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn pca_orders_axes_by_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                vec![
                    0.5 * normal.sample(&mut rng),
                    3.0 * normal.sample(&mut rng),
                    1.5 * normal.sample(&mut rng),
                ]
            })
            .collect();
        let ds = Dataset {
            points: pts,
            labels: None,
            provenance: Provenance::Csv,
            rescale: Rescale::identity(3),
        };
        let pca = pca_project(&ds, 3).unwrap();
        assert!(pca.variances.windows(2).all(|w| w[0] >= w[1]));
        let dominant: Vec<usize> = pca
            .components
            .iter()
            .map(|c| {
                (0..3)
                    .max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()))
                    .unwrap()
            })
            .collect();
        assert_eq!(dominant, vec![1, 2, 0]);
        for p in &pca.data.points {
            assert!(p
                .iter()
                .all(|&c| (0.02 - 1e-12..=0.98 + 1e-12).contains(&c)));
        }
        // round trip back to the PCA scores
        let p = &pca.data.points[7];
        let back = pca.data.rescale.apply(&pca.data.rescale.invert(p));
        for (a, b) in back.iter().zip(p) {
            assert!((a - b).abs() < 1e-12);
        }
        let flat = Dataset {
            points: vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]],
            labels: None,
            provenance: Provenance::Csv,
            rescale: Rescale::identity(2),
        };
        assert!(matches!(pca_project(&flat, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn csv_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "x,y,label\n0.1,0.2,1\n0.3,0.4,-1\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.points, vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert_eq!(ds.labels, Some(vec![1, -1]));
        let ds = rescale_to_margin(ds).unwrap();
        assert!((ds.points[0][0] - 0.02).abs() < 1e-12 && (ds.points[1][1] - 0.98).abs() < 1e-12);
        std::fs::write(&path, "x\nfoo\n").unwrap();
        assert!(matches!(load_csv(&path), Err(Error::Format(_))));
    }
}
