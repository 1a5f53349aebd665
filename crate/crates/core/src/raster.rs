//! Dense row-major 2D buffers shared by depth images, masks and per-pixel maps.

use std::io::{self, Read, Write};

/// A `width × height` row-major buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Binary per-pixel mask.
pub type Mask = Raster<bool>;

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Raster<T> {
    /// Wraps an existing buffer. Panics if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "raster buffer size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Iterates `(x, y, &value)` in row-major order.
    pub fn iter_pixels(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i % w, i / w, v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl Mask {
    pub fn count_on(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

const FDEP_MAGIC: &[u8; 4] = b"FDEP";

/// Writes a float raster in the FDEP layout: `FDEP`, u32 width, u32 height,
/// u32 reserved, then little-endian f32 samples row-major. Infinite samples
/// stay `+inf`.
pub fn write_fdep<W: Write>(out: &mut W, raster: &Raster<f64>) -> io::Result<()> {
    out.write_all(FDEP_MAGIC)?;
    out.write_all(&(raster.width() as u32).to_le_bytes())?;
    out.write_all(&(raster.height() as u32).to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(raster.len() * 4);
    for &v in raster.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_fdep<R: Read>(input: &mut R) -> io::Result<Raster<f64>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[0..4] != FDEP_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "missing FDEP magic"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
    let (width, height) = (word(4), word(8));
    let mut body = vec![0u8; width * height * 4];
    input.read_exact(&mut body)?;
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Raster::from_vec(width, height, data))
}

/// Binary PGM (P5, maxval 255).
pub fn write_pgm<W: Write>(out: &mut W, raster: &Raster<u8>) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", raster.width(), raster.height())?;
    out.write_all(raster.data())
}

pub fn mask_to_gray(mask: &Mask) -> Raster<u8> {
    mask.map(|&b| if b { 255 } else { 0 })
}
