//! IDX container parsing and the MNIST small-data split.
//!
//! ```text
//! images: magic 2051 (u32 BE) | count | rows | cols | count*rows*cols bytes
//! labels: magic 2049 (u32 BE) | count | count bytes
//! ```
//!
//! Files may be gzip-compressed; [`read_idx_file`] inflates them when the
//! gzip magic is present.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;
pub const NUM_CLASSES: usize = 10;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImageSet {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl RawImageSet {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }

    /// First `n` images, file order.
    pub fn take(&self, n: usize) -> Result<RawImageSet> {
        if n > self.count {
            return Err(Error::SubsetTooLarge {
                requested: n,
                available: self.count,
            });
        }
        Ok(RawImageSet {
            count: n,
            rows: self.rows,
            cols: self.cols,
            pixels: self.pixels[..n * self.pixels_per_image()].to_vec(),
        })
    }

    pub fn to_idx_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for word in [IMAGE_MAGIC, self.count as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&word.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    pub labels: Vec<u8>,
}

impl LabelSet {
    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn histogram(&self) -> [usize; NUM_CLASSES] {
        let mut h = [0; NUM_CLASSES];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }

    pub fn to_idx_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.labels.len());
        out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        out.extend_from_slice(&(self.labels.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.labels);
        out
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::TruncatedPayload {
            expected: offset + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

pub fn load_idx_images(bytes: &[u8]) -> Result<RawImageSet> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .and_then(|v| v.checked_add(16))
        .ok_or(Error::TruncatedPayload {
            expected: usize::MAX,
            found: bytes.len(),
        })?;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    Ok(RawImageSet {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn load_idx_labels(bytes: &[u8]) -> Result<LabelSet> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let expected = count + 8;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    let labels = bytes[8..].to_vec();
    if let Some((index, &label)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= NUM_CLASSES)
    {
        return Err(Error::LabelOutOfRange { index, label });
    }
    Ok(LabelSet { labels })
}

/// Reads a file, inflating it if it carries the gzip magic.
pub fn read_idx_file(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&bytes[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        return Ok(out);
    }
    Ok(bytes)
}

/// Resolves `name` or `name.gz` inside `dir`.
pub fn locate(dir: &Path, name: &str) -> Result<PathBuf> {
    let plain = dir.join(name);
    if plain.is_file() {
        return Ok(plain);
    }
    let gz = dir.join(format!("{name}.gz"));
    if gz.is_file() {
        return Ok(gz);
    }
    Err(Error::io(
        plain,
        std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found (also tried .gz)"),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NormMode {
    /// One scalar mean over every pixel of the statistics source.
    #[default]
    Global,
    /// One mean per pixel position.
    PerPixel,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormStats {
    Global(f64),
    PerPixel(Vec<f64>),
}

impl NormStats {
    /// Means of `pixel / 255` over `raw`.
    pub fn compute(raw: &RawImageSet, mode: NormMode) -> NormStats {
        let n = raw.pixels_per_image();
        match mode {
            NormMode::Global => {
                let total = raw.pixels.len().max(1) as f64;
                let sum: f64 = raw.pixels.iter().map(|&p| p as f64 / 255.0).sum();
                NormStats::Global(sum / total)
            }
            NormMode::PerPixel => {
                let mut sums = vec![0.0; n];
                for i in 0..raw.count {
                    for (s, &p) in sums.iter_mut().zip(raw.image(i)) {
                        *s += p as f64 / 255.0;
                    }
                }
                let count = raw.count.max(1) as f64;
                NormStats::PerPixel(sums.into_iter().map(|s| s / count).collect())
            }
        }
    }

    /// The scalar offset (mean of the per-pixel offsets in per-pixel mode).
    pub fn mean_offset(&self) -> f64 {
        match self {
            NormStats::Global(m) => *m,
            NormStats::PerPixel(v) => v.iter().sum::<f64>() / v.len().max(1) as f64,
        }
    }

    fn offset(&self, pixel: usize) -> f64 {
        match self {
            NormStats::Global(m) => *m,
            NormStats::PerPixel(v) => v[pixel],
        }
    }
}

/// Normalized, flattened examples ready for the network.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    dim: usize,
    inputs: Vec<f64>,
    labels: Vec<u8>,
    stats: NormStats,
}

impl DataSet {
    pub fn new(dim: usize, inputs: Vec<f64>, labels: Vec<u8>, stats: NormStats) -> Result<Self> {
        if inputs.len() != dim * labels.len() {
            return Err(Error::ShapeMismatch {
                what: "dataset inputs",
                expected: dim * labels.len(),
                got: inputs.len(),
            });
        }
        Ok(Self {
            dim,
            inputs,
            labels,
            stats,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn all_inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn stats(&self) -> &NormStats {
        &self.stats
    }

    pub fn mean_offset(&self) -> f64 {
        self.stats.mean_offset()
    }

    pub fn histogram(&self) -> [usize; NUM_CLASSES] {
        let mut h = [0; NUM_CLASSES];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }
}

/// Unpacks each image row-major, scales by 1/255 and subtracts the mean from
/// `stats` (or from `raw` itself, global mode, when `stats` is `None`).
pub fn normalize(raw: &RawImageSet, labels: &LabelSet, stats: Option<&NormStats>) -> Result<DataSet> {
    if labels.count() != raw.count {
        return Err(Error::ShapeMismatch {
            what: "label count",
            expected: raw.count,
            got: labels.count(),
        });
    }
    let stats = match stats {
        Some(s) => s.clone(),
        None => NormStats::compute(raw, NormMode::Global),
    };
    let n = raw.pixels_per_image();
    if let NormStats::PerPixel(v) = &stats {
        if v.len() != n {
            return Err(Error::ShapeMismatch {
                what: "per-pixel statistics",
                expected: n,
                got: v.len(),
            });
        }
    }
    let inputs = raw
        .pixels
        .iter()
        .enumerate()
        .map(|(k, &p)| p as f64 / 255.0 - stats.offset(k % n))
        .collect();
    DataSet::new(n, inputs, labels.labels.clone(), stats)
}

/// First `n` examples in file order.
pub fn take_subset(data: &DataSet, n: usize) -> Result<DataSet> {
    if n > data.len() {
        return Err(Error::SubsetTooLarge {
            requested: n,
            available: data.len(),
        });
    }
    Ok(DataSet {
        dim: data.dim,
        inputs: data.inputs[..n * data.dim].to_vec(),
        labels: data.labels[..n].to_vec(),
        stats: data.stats.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StatsSource {
    /// Statistics from the training subset actually used.
    #[default]
    Subset,
    /// Statistics from the whole training file.
    FullTrain,
}

#[derive(Clone, Debug)]
pub struct MnistSplit {
    pub train: DataSet,
    pub test: DataSet,
}

/// Loads the four IDX files from `dir`, keeps the first `subset` training
/// examples and normalizes both splits with training statistics.
pub fn load_split(dir: &Path, subset: usize, mode: NormMode, source: StatsSource) -> Result<MnistSplit> {
    let read = |name: &str| -> Result<Vec<u8>> { read_idx_file(&locate(dir, name)?) };
    let train_images = load_idx_images(&read(TRAIN_IMAGES)?)?;
    let train_labels = load_idx_labels(&read(TRAIN_LABELS)?)?;
    let test_images = load_idx_images(&read(TEST_IMAGES)?)?;
    let test_labels = load_idx_labels(&read(TEST_LABELS)?)?;

    let subset_images = train_images.take(subset)?;
    let stats = match source {
        StatsSource::Subset => NormStats::compute(&subset_images, mode),
        StatsSource::FullTrain => NormStats::compute(&train_images, mode),
    };
    let subset_labels = LabelSet {
        labels: train_labels.labels[..subset].to_vec(),
    };
    Ok(MnistSplit {
        train: normalize(&subset_images, &subset_labels, Some(&stats))?,
        test: normalize(&test_images, &test_labels, Some(&stats))?,
    })
}
