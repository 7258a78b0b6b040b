use std::path::Path;

use crate::dataset::fnv1a;
use crate::{Dataset, Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Loads a paired big-endian IDX image/label file set.
///
/// Image file: magic `0x00000803`, then count, rows, cols (all big-endian
/// `u32`), then `count * rows * cols` unsigned bytes. Label file: magic
/// `0x00000801`, then count, then `count` bytes. Pixels are scaled to
/// `[0, 1]` by division with 255. The two counts must agree.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let image_bytes = std::fs::read(images_path)?;
    let label_bytes = std::fs::read(labels_path)?;

    let mut cursor = Cursor::new(&image_bytes);
    let magic = cursor.u32_be("image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format {
            field: "image magic",
            offset: 0,
            details: format!("expected {IMAGE_MAGIC:#010x}, found {magic:#010x}"),
        });
    }
    let n_images = cursor.u32_be("image count")? as usize;
    let rows = cursor.u32_be("image rows")? as usize;
    let cols = cursor.u32_be("image cols")? as usize;
    let pixels = cursor.bytes(n_images * rows * cols, "image data")?;

    let mut cursor = Cursor::new(&label_bytes);
    let magic = cursor.u32_be("label magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format {
            field: "label magic",
            offset: 0,
            details: format!("expected {LABEL_MAGIC:#010x}, found {magic:#010x}"),
        });
    }
    let n_labels = cursor.u32_be("label count")? as usize;
    if n_labels != n_images {
        return Err(Error::Format {
            field: "label count",
            offset: 4,
            details: format!("{n_labels} labels for {n_images} images"),
        });
    }
    let raw_labels = cursor.bytes(n_labels, "label data")?;

    let inputs: Vec<f64> = pixels.iter().map(|&b| f64::from(b) / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().max().map_or(1, |&m| m + 1).max(2);
    let checksum = fnv1a(&image_bytes) ^ fnv1a(&label_bytes).rotate_left(1);
    let name = images_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    Dataset::new(inputs, labels, rows * cols, classes, name, checksum)
}

struct Cursor<'a> {
    data: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, offset: 0 }
    }

    fn u32_be(&mut self, field: &'static str) -> Result<u32> {
        let bytes = self.bytes(4, field)?;
        let mut buf = [0u8; 4];
        buf.copy_from_slice(bytes);
        Ok(u32::from_be_bytes(buf))
    }

    fn bytes(&mut self, len: usize, field: &'static str) -> Result<&'a [u8]> {
        if self.offset + len > self.data.len() {
            return Err(Error::Format {
                field,
                offset: self.offset as u64,
                details: format!(
                    "needs {len} bytes, file has {} remaining",
                    self.data.len() - self.offset
                ),
            });
        }
        let out = &self.data[self.offset..self.offset + len];
        self.offset += len;
        Ok(out)
    }
}

/// Builds IDX byte images for fixtures and tests.
pub mod fixture {
    /// Image file bytes for `images` of shape `rows x cols`.
    pub fn image_bytes(images: &[Vec<u8>], rows: u32, cols: u32) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        out.extend_from_slice(&(images.len() as u32).to_be_bytes());
        out.extend_from_slice(&rows.to_be_bytes());
        out.extend_from_slice(&cols.to_be_bytes());
        for img in images {
            out.extend_from_slice(img);
        }
        out
    }

    /// Label file bytes.
    pub fn label_bytes(labels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        out.extend_from_slice(labels);
        out
    }
}
