use super::tables::{dct_basis, ZIGZAG};
use crate::asset::{AssetError, TextureImage};

const LOOKUP_BITS: u32 = 9;

struct HuffmanTable {
    maxcode: [i32; 18],
    valptr: [i32; 17],
    mincode: [i32; 17],
    values: Vec<u8>,
    /// Indexed by the next `LOOKUP_BITS` bits: `(code length, symbol)`, length 0 when longer.
    lookup: Vec<(u8, u8)>,
}

impl HuffmanTable {
    fn new(bits: &[u8; 16], values: Vec<u8>) -> Result<Self, AssetError> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total > values.len() || total > 256 {
            return Err(AssetError::TruncatedStream);
        }
        let mut t = HuffmanTable {
            maxcode: [-1; 18],
            valptr: [0; 17],
            mincode: [0; 17],
            values,
            lookup: vec![(0, 0); 1 << LOOKUP_BITS],
        };
        let mut code = 0i32;
        let mut k = 0i32;
        for l in 1..=16 {
            let n = bits[l - 1] as i32;
            if n > 0 {
                t.valptr[l] = k;
                t.mincode[l] = code;
                for i in 0..n {
                    let c = (code + i) as u32;
                    if l as u32 <= LOOKUP_BITS {
                        let shift = LOOKUP_BITS - l as u32;
                        for fill in 0..(1u32 << shift) {
                            t.lookup[((c << shift) | fill) as usize] =
                                (l as u8, t.values[(k + i) as usize]);
                        }
                    }
                }
                code += n;
                k += n;
                t.maxcode[l] = code - 1;
            }
            code <<= 1;
        }
        t.maxcode[17] = i32::MAX;
        Ok(t)
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    n: u32,
    /// A marker hit inside entropy-coded data; further reads yield zero bits.
    marker: Option<u8>,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self {
            data,
            pos,
            acc: 0,
            n: 0,
            marker: None,
        }
    }

    fn fill(&mut self) -> Result<(), AssetError> {
        while self.n <= 56 {
            let byte = if self.marker.is_some() {
                0
            } else {
                let b = *self.data.get(self.pos).ok_or(AssetError::TruncatedStream)?;
                if b == 0xFF {
                    let next = *self.data.get(self.pos + 1).ok_or(AssetError::TruncatedStream)?;
                    if next == 0 {
                        self.pos += 2;
                        0xFF
                    } else if next == 0xFF {
                        // Fill byte before a marker.
                        self.pos += 1;
                        continue;
                    } else {
                        self.marker = Some(next);
                        self.pos += 2;
                        0
                    }
                } else {
                    self.pos += 1;
                    b
                }
            };
            self.acc |= (byte as u64) << (56 - self.n);
            self.n += 8;
        }
        Ok(())
    }

    fn peek(&mut self, bits: u32) -> Result<u32, AssetError> {
        if self.n < bits {
            self.fill()?;
        }
        Ok((self.acc >> (64 - bits)) as u32)
    }

    fn consume(&mut self, bits: u32) {
        self.acc <<= bits;
        self.n -= bits;
    }

    fn bits(&mut self, count: u32) -> Result<u32, AssetError> {
        if count == 0 {
            return Ok(0);
        }
        let v = self.peek(count)?;
        self.consume(count);
        Ok(v)
    }

    fn decode(&mut self, table: &HuffmanTable) -> Result<u8, AssetError> {
        let head = self.peek(LOOKUP_BITS)?;
        let (len, sym) = table.lookup[head as usize];
        if len > 0 {
            self.consume(len as u32);
            return Ok(sym);
        }
        let mut code = self.bits(1)? as i32;
        let mut l = 1;
        while code > table.maxcode[l] {
            code = (code << 1) | self.bits(1)? as i32;
            l += 1;
            if l > 16 {
                return Err(AssetError::TruncatedStream);
            }
        }
        let idx = table.valptr[l] + code - table.mincode[l];
        table
            .values
            .get(idx as usize)
            .copied()
            .ok_or(AssetError::TruncatedStream)
    }

    /// Discards buffered bits and consumes the expected restart marker.
    fn restart(&mut self) -> Result<(), AssetError> {
        self.acc = 0;
        self.n = 0;
        match self.marker.take() {
            Some(m) if (0xD0..=0xD7).contains(&m) => Ok(()),
            Some(_) => Err(AssetError::TruncatedStream),
            None => {
                while self.data.get(self.pos) == Some(&0xFF) && self.data.get(self.pos + 1) == Some(&0xFF) {
                    self.pos += 1;
                }
                match self.data.get(self.pos..self.pos + 2) {
                    Some([0xFF, m]) if (0xD0..=0xD7).contains(m) => {
                        self.pos += 2;
                        Ok(())
                    }
                    _ => Err(AssetError::TruncatedStream),
                }
            }
        }
    }

    /// Byte position after the entropy-coded segment, at the start of the next marker.
    fn end_position(&self) -> usize {
        if self.marker.is_some() {
            return self.pos - 2;
        }
        let mut p = self.pos;
        while p + 1 < self.data.len() && !(self.data[p] == 0xFF && self.data[p + 1] != 0 && !(0xD0..=0xD7).contains(&self.data[p + 1])) {
            p += 1;
        }
        p
    }
}

fn extend(v: u32, size: u32) -> i32 {
    if size == 0 {
        0
    } else if v < (1 << (size - 1)) {
        v as i32 - (1 << size) + 1
    } else {
        v as i32
    }
}

struct Component {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    /// Blocks per line/column in the sample plane (covering whole MCUs).
    bw: usize,
    bh: usize,
    /// Dequantized coefficients per block, natural order.
    coeffs: Vec<[i32; 64]>,
    pred: i32,
    dc_table: usize,
    ac_table: usize,
}

struct Frame {
    width: usize,
    height: usize,
    hmax: usize,
    vmax: usize,
    components: Vec<Component>,
}

fn segment(data: &[u8], pos: usize) -> Result<&[u8], AssetError> {
    let len = data
        .get(pos..pos + 2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]) as usize)
        .ok_or(AssetError::TruncatedStream)?;
    if len < 2 {
        return Err(AssetError::TruncatedStream);
    }
    data.get(pos + 2..pos + len).ok_or(AssetError::TruncatedStream)
}

pub fn decode(data: &[u8]) -> Result<TextureImage, AssetError> {
    if data.get(..2) != Some(&[0xFF, 0xD8]) {
        return Err(AssetError::UnsupportedFormat);
    }
    let mut quant = [[0u16; 64]; 4];
    let mut dc_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut frame: Option<Frame> = None;
    let mut restart_interval = 0usize;
    let mut pos = 2;

    loop {
        // Skip fill bytes in front of a marker.
        while data.get(pos) == Some(&0xFF) && data.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        let marker = match data.get(pos..pos + 2) {
            Some([0xFF, m]) => *m,
            Some(_) => return Err(AssetError::UnsupportedFormat),
            None => return Err(AssetError::TruncatedStream),
        };
        pos += 2;
        match marker {
            0xD9 => break,
            0xD0..=0xD7 | 0x01 => continue,
            0xC0 | 0xC1 => {
                let seg = segment(data, pos)?;
                frame = Some(parse_frame(seg)?);
                pos += 2 + seg.len();
            }
            0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(AssetError::UnsupportedJpegFeature(sof_name(marker)));
            }
            0xCC => return Err(AssetError::UnsupportedJpegFeature("arithmetic coding")),
            0xDB => {
                let seg = segment(data, pos)?;
                let mut i = 0;
                while i < seg.len() {
                    let pq = seg[i] >> 4;
                    let tq = (seg[i] & 15) as usize;
                    if tq > 3 || pq > 1 {
                        return Err(AssetError::UnsupportedJpegFeature("quantization table id"));
                    }
                    i += 1;
                    let size = if pq == 0 { 64 } else { 128 };
                    let body = seg.get(i..i + size).ok_or(AssetError::TruncatedStream)?;
                    for k in 0..64 {
                        quant[tq][ZIGZAG[k]] = if pq == 0 {
                            body[k] as u16
                        } else {
                            u16::from_be_bytes([body[2 * k], body[2 * k + 1]])
                        };
                    }
                    i += size;
                }
                pos += 2 + seg.len();
            }
            0xC4 => {
                let seg = segment(data, pos)?;
                let mut i = 0;
                while i < seg.len() {
                    let class = seg[i] >> 4;
                    let id = (seg[i] & 15) as usize;
                    if class > 1 || id > 3 {
                        return Err(AssetError::UnsupportedJpegFeature("huffman table id"));
                    }
                    let bits: [u8; 16] = seg
                        .get(i + 1..i + 17)
                        .ok_or(AssetError::TruncatedStream)?
                        .try_into()
                        .expect("16 bytes");
                    let n: usize = bits.iter().map(|&b| b as usize).sum();
                    let values = seg
                        .get(i + 17..i + 17 + n)
                        .ok_or(AssetError::TruncatedStream)?
                        .to_vec();
                    let table = HuffmanTable::new(&bits, values)?;
                    if class == 0 {
                        dc_tables[id] = Some(table);
                    } else {
                        ac_tables[id] = Some(table);
                    }
                    i += 17 + n;
                }
                pos += 2 + seg.len();
            }
            0xDD => {
                let seg = segment(data, pos)?;
                if seg.len() < 2 {
                    return Err(AssetError::TruncatedStream);
                }
                restart_interval = u16::from_be_bytes([seg[0], seg[1]]) as usize;
                pos += 2 + seg.len();
            }
            0xDA => {
                let seg = segment(data, pos)?;
                let frame = frame.as_mut().ok_or(AssetError::UnsupportedFormat)?;
                let scan = parse_scan(seg, frame)?;
                pos += 2 + seg.len();
                pos = decode_scan(data, pos, frame, &scan, &dc_tables, &ac_tables, &quant, restart_interval)?;
            }
            0xDC => return Err(AssetError::UnsupportedJpegFeature("DNL marker")),
            _ => {
                // APPn, COM and other segments with a length field.
                let seg = segment(data, pos)?;
                pos += 2 + seg.len();
            }
        }
    }
    let frame = frame.ok_or(AssetError::TruncatedStream)?;
    Ok(reconstruct(&frame))
}

fn sof_name(marker: u8) -> &'static str {
    match marker {
        0xC2 | 0xC6 | 0xCA | 0xCE => "progressive DCT",
        0xC3 | 0xC7 | 0xCB | 0xCF => "lossless",
        0xC9 => "arithmetic coding",
        _ => "hierarchical",
    }
}

fn parse_frame(seg: &[u8]) -> Result<Frame, AssetError> {
    if seg.len() < 6 {
        return Err(AssetError::TruncatedStream);
    }
    if seg[0] != 8 {
        return Err(AssetError::UnsupportedJpegFeature("sample precision other than 8 bits"));
    }
    let height = u16::from_be_bytes([seg[1], seg[2]]) as usize;
    let width = u16::from_be_bytes([seg[3], seg[4]]) as usize;
    if width == 0 || height == 0 {
        return Err(AssetError::InvalidDimensions {
            width: width as u32,
            height: height as u32,
        });
    }
    let nc = seg[5] as usize;
    if nc != 1 && nc != 3 {
        return Err(AssetError::InvalidChannels(nc as u8));
    }
    let body = seg.get(6..6 + 3 * nc).ok_or(AssetError::TruncatedStream)?;
    let mut components: Vec<Component> = body
        .chunks_exact(3)
        .map(|c| Component {
            id: c[0],
            h: (c[1] >> 4) as usize,
            v: (c[1] & 15) as usize,
            tq: (c[2] & 3) as usize,
            bw: 0,
            bh: 0,
            coeffs: Vec::new(),
            pred: 0,
            dc_table: 0,
            ac_table: 0,
        })
        .collect();
    if components.iter().any(|c| !(1..=4).contains(&c.h) || !(1..=4).contains(&c.v)) {
        return Err(AssetError::UnsupportedJpegFeature("sampling factor"));
    }
    let hmax = components.iter().map(|c| c.h).max().unwrap();
    let vmax = components.iter().map(|c| c.v).max().unwrap();
    let mcux = width.div_ceil(8 * hmax);
    let mcuy = height.div_ceil(8 * vmax);
    for c in components.iter_mut() {
        c.bw = mcux * c.h;
        c.bh = mcuy * c.v;
        c.coeffs = vec![[0; 64]; c.bw * c.bh];
    }
    Ok(Frame {
        width,
        height,
        hmax,
        vmax,
        components,
    })
}

struct Scan {
    components: Vec<usize>,
}

fn parse_scan(seg: &[u8], frame: &mut Frame) -> Result<Scan, AssetError> {
    let ns = *seg.first().ok_or(AssetError::TruncatedStream)? as usize;
    let body = seg.get(1..1 + 2 * ns).ok_or(AssetError::TruncatedStream)?;
    let mut components = Vec::with_capacity(ns);
    for c in body.chunks_exact(2) {
        let idx = frame
            .components
            .iter()
            .position(|fc| fc.id == c[0])
            .ok_or(AssetError::UnsupportedFormat)?;
        frame.components[idx].dc_table = (c[1] >> 4) as usize & 3;
        frame.components[idx].ac_table = (c[1] & 15) as usize & 3;
        components.push(idx);
    }
    let tail = seg.get(1 + 2 * ns..1 + 2 * ns + 3).ok_or(AssetError::TruncatedStream)?;
    if tail != [0, 63, 0] {
        return Err(AssetError::UnsupportedJpegFeature("spectral selection"));
    }
    Ok(Scan { components })
}

#[allow(clippy::too_many_arguments)]
fn decode_scan(
    data: &[u8],
    pos: usize,
    frame: &mut Frame,
    scan: &Scan,
    dc_tables: &[Option<HuffmanTable>; 4],
    ac_tables: &[Option<HuffmanTable>; 4],
    quant: &[[u16; 64]; 4],
    restart_interval: usize,
) -> Result<usize, AssetError> {
    let mut reader = BitReader::new(data, pos);
    for &ci in &scan.components {
        frame.components[ci].pred = 0;
    }
    // A single-component scan is non-interleaved and covers only that component's own extent.
    let (mcux, mcuy) = if scan.components.len() == 1 {
        let c = &frame.components[scan.components[0]];
        let cw = (frame.width * c.h).div_ceil(frame.hmax);
        let chh = (frame.height * c.v).div_ceil(frame.vmax);
        (cw.div_ceil(8), chh.div_ceil(8))
    } else {
        (
            frame.width.div_ceil(8 * frame.hmax),
            frame.height.div_ceil(8 * frame.vmax),
        )
    };
    let single = scan.components.len() == 1;
    let total = mcux * mcuy;
    for m in 0..total {
        if restart_interval > 0 && m > 0 && m % restart_interval == 0 {
            reader.restart()?;
            for &ci in &scan.components {
                frame.components[ci].pred = 0;
            }
        }
        let (mx, my) = (m % mcux, m / mcux);
        for &ci in &scan.components {
            let c = &mut frame.components[ci];
            let dc = dc_tables[c.dc_table]
                .as_ref()
                .ok_or(AssetError::UnsupportedFormat)?;
            let ac = ac_tables[c.ac_table]
                .as_ref()
                .ok_or(AssetError::UnsupportedFormat)?;
            let q = &quant[c.tq];
            let (bh, bv) = if single { (1, 1) } else { (c.h, c.v) };
            for by in 0..bv {
                for bx in 0..bh {
                    let (x, y) = if single {
                        (mx, my)
                    } else {
                        (mx * c.h + bx, my * c.v + by)
                    };
                    let mut block = [0i32; 64];
                    let s = reader.decode(dc)? as u32;
                    if s > 11 {
                        return Err(AssetError::TruncatedStream);
                    }
                    let diff = extend(reader.bits(s)?, s);
                    c.pred += diff;
                    block[0] = c.pred * q[0] as i32;
                    let mut k = 1;
                    while k < 64 {
                        let rs = reader.decode(ac)?;
                        let (r, s) = ((rs >> 4) as usize, (rs & 15) as u32);
                        if s == 0 {
                            if r == 15 {
                                k += 16;
                                continue;
                            }
                            break;
                        }
                        k += r;
                        if k > 63 {
                            return Err(AssetError::TruncatedStream);
                        }
                        let nat = ZIGZAG[k];
                        block[nat] = extend(reader.bits(s)?, s) * q[nat] as i32;
                        k += 1;
                    }
                    if x < c.bw && y < c.bh {
                        c.coeffs[y * c.bw + x] = block;
                    }
                }
            }
        }
    }
    Ok(reader.end_position())
}

fn reconstruct(frame: &Frame) -> TextureImage {
    let basis = dct_basis();
    let planes: Vec<(usize, usize, Vec<f32>)> = frame
        .components
        .iter()
        .map(|c| {
            let pw = c.bw * 8;
            let mut plane = vec![0f32; pw * c.bh * 8];
            for by in 0..c.bh {
                for bx in 0..c.bw {
                    let block = inverse_dct(&c.coeffs[by * c.bw + bx], &basis);
                    for y in 0..8 {
                        let row = (by * 8 + y) * pw + bx * 8;
                        plane[row..row + 8].copy_from_slice(&block[y * 8..y * 8 + 8]);
                    }
                }
            }
            (pw, c.bh * 8, plane)
        })
        .collect();

    let (w, h) = (frame.width, frame.height);
    let sample = |ci: usize, x: usize, y: usize| -> f32 {
        let c = &frame.components[ci];
        let (pw, _, plane) = &planes[ci];
        if c.h == frame.hmax && c.v == frame.vmax {
            return plane[y * pw + x];
        }
        // Centered bilinear upsampling within the component's own sample extent.
        let cw = (w * c.h).div_ceil(frame.hmax);
        let chh = (h * c.v).div_ceil(frame.vmax);
        let fx = ((x as f32 + 0.5) * c.h as f32 / frame.hmax as f32 - 0.5).clamp(0.0, (cw - 1) as f32);
        let fy = ((y as f32 + 0.5) * c.v as f32 / frame.vmax as f32 - 0.5).clamp(0.0, (chh - 1) as f32);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(cw - 1), (y0 + 1).min(chh - 1));
        let (tx, ty) = (fx - x0 as f32, fy - y0 as f32);
        let top = plane[y0 * pw + x0] * (1.0 - tx) + plane[y0 * pw + x1] * tx;
        let bottom = plane[y1 * pw + x0] * (1.0 - tx) + plane[y1 * pw + x1] * tx;
        top * (1.0 - ty) + bottom * ty
    };
    let to_u8 = |v: f32| v.round().clamp(0.0, 255.0) as u8;

    if frame.components.len() == 1 {
        let mut out = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                out.push(to_u8(sample(0, x, y)));
            }
        }
        return TextureImage::new(w as u32, h as u32, 1, out).expect("valid frame");
    }
    let mut out = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let yy = sample(0, x, y);
            let cb = sample(1, x, y) - 128.0;
            let cr = sample(2, x, y) - 128.0;
            out.push(to_u8(yy + 1.402 * cr));
            out.push(to_u8(yy - 0.344_136 * cb - 0.714_136 * cr));
            out.push(to_u8(yy + 1.772 * cb));
        }
    }
    TextureImage::new(w as u32, h as u32, 3, out).expect("valid frame")
}

fn inverse_dct(coeffs: &[i32; 64], basis: &[[f32; 8]; 8]) -> [f32; 64] {
    let mut tmp = [0f32; 64];
    // Rows of coefficients (v fixed), transform along u.
    for v in 0..8 {
        let row = &coeffs[v * 8..v * 8 + 8];
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        for x in 0..8 {
            tmp[v * 8 + x] = (0..8).map(|u| basis[u][x] * row[u] as f32).sum();
        }
    }
    let mut out = [0f32; 64];
    for y in 0..8 {
        for x in 0..8 {
            out[y * 8 + x] = (0..8).map(|v| basis[v][y] * tmp[v * 8 + x]).sum::<f32>() + 128.0;
        }
    }
    out
}
