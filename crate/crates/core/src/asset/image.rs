use serde::{Deserialize, Serialize};

use super::AssetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ColorSpace {
    #[default]
    Srgb,
}

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextureImage {
    width: u32,
    height: u32,
    channels: u8,
    colorspace: ColorSpace,
    data: Vec<u8>,
}

impl TextureImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, AssetError> {
        if width == 0 || height == 0 {
            return Err(AssetError::InvalidDimensions { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(AssetError::InvalidChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(AssetError::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            colorspace: ColorSpace::Srgb,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self::new(width, height, 3, data).expect("valid dimensions")
    }

    pub fn from_fn_rgb(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data).expect("valid dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Sample at (x, y) as RGB; gray images replicate their single channel.
    pub fn rgb(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * self.channels as usize;
        if self.channels == 1 {
            let g = self.data[i];
            [g, g, g]
        } else {
            [self.data[i], self.data[i + 1], self.data[i + 2]]
        }
    }

    pub fn to_rgb(&self) -> TextureImage {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&g| [g, g, g]).collect();
        Self::new(self.width, self.height, 3, data).expect("same dimensions")
    }

    /// Rec.601 luma for every pixel, unrounded.
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.data.iter().map(|&g| g as f64).collect(),
            _ => self
                .data
                .chunks_exact(3)
                .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
                .collect(),
        }
    }
}

/// Per-pixel stimulus flag: `true` where rendered geometry covers the pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl CoverageMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self, AssetError> {
        if data.len() != width as usize * height as usize {
            return Err(AssetError::DataLength {
                expected: width as usize * height as usize,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self::from_fn(width, height, |_, _| true)
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
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

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn matches(&self, image: &TextureImage) -> bool {
        self.width == image.width() && self.height == image.height()
    }

    /// Single-channel image with 255 for covered pixels and 0 elsewhere.
    pub fn to_image(&self) -> TextureImage {
        let data = self.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
        TextureImage::new(self.width, self.height, 1, data).expect("valid mask dimensions")
    }

    /// Any nonzero sample counts as covered.
    pub fn from_image(image: &TextureImage) -> Self {
        let c = image.channels() as usize;
        let data = image
            .data()
            .chunks_exact(c)
            .map(|p| p.iter().any(|&v| v != 0))
            .collect();
        Self {
            width: image.width(),
            height: image.height(),
            data,
        }
    }
}

/// Decodes PGM (P5), PPM (P6) or baseline JPEG, dispatching on the leading magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<TextureImage, AssetError> {
    match bytes {
        [b'P', b'5', ..] => decode_pnm(bytes, 1),
        [b'P', b'6', ..] => decode_pnm(bytes, 3),
        [0xFF, 0xD8, ..] => super::jpeg::decode_jpeg(bytes),
        _ => Err(AssetError::UnsupportedFormat),
    }
}

fn decode_pnm(bytes: &[u8], channels: u8) -> Result<TextureImage, AssetError> {
    let mut pos = 2;
    let mut header = [0u32; 3];
    for field in header.iter_mut() {
        *field = read_header_uint(bytes, &mut pos)?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(AssetError::UnsupportedFormat);
    }
    if width == 0 || height == 0 {
        return Err(AssetError::InvalidDimensions { width, height });
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(AssetError::TruncatedStream);
    }
    pos += 1;
    let len = width as usize * height as usize * channels as usize;
    let payload = bytes
        .get(pos..pos + len)
        .ok_or(AssetError::TruncatedStream)?;
    let data = if maxval == 255 {
        payload.to_vec()
    } else {
        payload
            .iter()
            .map(|&v| ((v as u32 * 255 + maxval / 2) / maxval).min(255) as u8)
            .collect()
    };
    TextureImage::new(width, height, channels, data)
}

fn read_header_uint(bytes: &[u8], pos: &mut usize) -> Result<u32, AssetError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(AssetError::TruncatedStream),
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(if *pos >= bytes.len() {
            AssetError::TruncatedStream
        } else {
            AssetError::UnsupportedFormat
        });
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(AssetError::UnsupportedFormat)
}

/// Binary PPM for RGB images, PGM for gray ones.
pub fn encode_ppm(image: &TextureImage) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}
