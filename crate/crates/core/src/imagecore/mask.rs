use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::display::Gray8;
use crate::{Error, Result};

/// One boolean per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn at(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn same_size(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    fn zip(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert!(self.same_size(other), "mask size mismatch");
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn and(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a && !b)
    }

    pub fn not(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Dilation by a disk of the given radius. Out-of-image pixels are ignored.
    pub fn dilate(&self, radius: usize) -> BinaryMask {
        self.morph(radius, true)
    }

    /// Erosion by a disk of the given radius. Out-of-image pixels are ignored.
    pub fn erode(&self, radius: usize) -> BinaryMask {
        self.morph(radius, false)
    }

    /// Erosion followed by dilation with the same disk.
    pub fn open(&self, radius: usize) -> BinaryMask {
        self.erode(radius).dilate(radius)
    }

    fn morph(&self, radius: usize, dilate: bool) -> BinaryMask {
        if radius == 0 {
            return self.clone();
        }
        let offsets = disk_offsets(radius);
        let (w, h) = (self.width as isize, self.height as isize);
        let bits = crate::par::fill_rows(self.width, self.height, false, |y, line| {
            for (x, out) in line.iter_mut().enumerate() {
                let mut acc = !dilate;
                for &(dx, dy) in &offsets {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let v = self.bits[ny as usize * self.width + nx as usize];
                    if dilate && v {
                        acc = true;
                        break;
                    }
                    if !dilate && !v {
                        acc = false;
                        break;
                    }
                }
                *out = acc;
            }
        });
        BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Set pixels with at least one unset 4-neighbour inside `within`.
    ///
    /// On a sun-visibility mask, `outer_boundary` of the complement gives the
    /// one-pixel-wide band of shadowed pixels touching lit ones.
    pub fn boundary_against(&self, other: &BinaryMask, within: &BinaryMask) -> BinaryMask {
        let (w, h) = (self.width, self.height);
        BinaryMask::from_fn(w, h, |x, y| {
            if !self.get(x, y) || !within.get(x, y) {
                return false;
            }
            neighbours4(x, y, w, h).any(|(nx, ny)| other.get(nx, ny) && within.get(nx, ny))
        })
    }

    /// Connected components with 8-connectivity. Returns one label per pixel
    /// (0 = background, components numbered from 1 in scan order) and the
    /// area of each component (index 0 unused).
    pub fn label_components(&self) -> (Vec<u32>, Vec<usize>) {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![0u32; w * h];
        let mut areas = vec![0usize];
        let mut stack = Vec::new();
        for start in 0..w * h {
            if !self.bits[start] || labels[start] != 0 {
                continue;
            }
            let label = areas.len() as u32;
            let mut area = 0usize;
            labels[start] = label;
            stack.push(start);
            while let Some(p) = stack.pop() {
                area += 1;
                let (x, y) = ((p % w) as isize, (p / w) as isize);
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let q = ny as usize * w + nx as usize;
                        if self.bits[q] && labels[q] == 0 {
                            labels[q] = label;
                            stack.push(q);
                        }
                    }
                }
            }
            areas.push(area);
        }
        (labels, areas)
    }

    /// Drops 8-connected components smaller than `min_area` pixels.
    pub fn remove_small_blobs(&self, min_area: usize) -> BinaryMask {
        if min_area <= 1 {
            return self.clone();
        }
        let (labels, areas) = self.label_components();
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: labels
                .iter()
                .map(|&l| l != 0 && areas[l as usize] >= min_area)
                .collect(),
        }
    }

    /// Number of 8-connected components.
    pub fn blob_count(&self) -> usize {
        self.label_components().1.len() - 1
    }

    /// Intersection over union; 1 when both are empty.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        let inter = self.and(other).count();
        let union = self.or(other).count();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

pub(crate) fn neighbours4(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let (x, y) = (x as isize, y as isize);
    [(-1, 0), (1, 0), (0, -1), (0, 1)]
        .into_iter()
        .map(move |(dx, dy)| (x + dx, y + dy))
        .filter(move |&(nx, ny)| nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize)
        .map(|(nx, ny)| (nx as usize, ny as usize))
}

fn disk_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Writes a 1-bit grayscale PNG (set = white).
pub fn write_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let row_bytes = mask.width.div_ceil(8);
    let mut packed = vec![0u8; row_bytes * mask.height];
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                packed[y * row_bytes + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    write_png(path, mask.width, mask.height, png::BitDepth::One, &packed)
}

/// Writes an 8-bit grayscale PNG preview.
pub fn write_gray8_png(img: &Gray8, path: impl AsRef<Path>) -> Result<()> {
    write_png(path.as_ref(), img.width, img.height, png::BitDepth::Eight, &img.data)
}

fn write_png(path: &Path, w: usize, h: usize, depth: png::BitDepth, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encode_err = |e: png::EncodingError| Error::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut enc = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(depth);
    let mut writer = enc.write_header().map_err(encode_err)?;
    writer.write_image_data(data).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

/// Reads a grayscale PNG as a mask (nonzero = set).
pub fn read_mask_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let decode_err = |e: png::DecodingError| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dec = png::Decoder::new(BufReader::new(file));
    dec.set_transformations(png::Transformations::EXPAND);
    let mut reader = dec.read_info().map_err(decode_err)?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        path: path.to_path_buf(),
        message: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(decode_err)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let stride = info.line_size;
    let samples = info.color_type.samples();
    let bytes_per_sample = if info.bit_depth == png::BitDepth::Sixteen { 2 } else { 1 };
    let bits = (0..h)
        .flat_map(|y| {
            let row = &buf[y * stride..];
            (0..w).map(move |x| row[x * samples * bytes_per_sample] != 0)
        })
        .collect();
    BinaryMask::new(w, h, bits)
}
