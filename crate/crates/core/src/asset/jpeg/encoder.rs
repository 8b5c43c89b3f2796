use super::tables::*;
use super::HuffmanSpec;
use crate::asset::{AssetError, TextureImage};

struct HuffmanCodes {
    code: [u16; 256],
    len: [u8; 256],
}

impl HuffmanCodes {
    fn new(spec: &HuffmanSpec) -> Self {
        let mut out = HuffmanCodes {
            code: [0; 256],
            len: [0; 256],
        };
        let mut code = 0u16;
        let mut k = 0;
        for (l, &count) in spec.bits.iter().enumerate() {
            for _ in 0..count {
                let sym = spec.values[k] as usize;
                out.code[sym] = code;
                out.len[sym] = l as u8 + 1;
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        out
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    n: u32,
}

impl BitWriter {
    fn put(&mut self, bits: u32, len: u32) {
        debug_assert!(len <= 16);
        self.acc = (self.acc << len) | (bits & ((1 << len) - 1));
        self.n += len;
        while self.n >= 8 {
            let byte = (self.acc >> (self.n - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0);
            }
            self.n -= 8;
        }
        self.acc &= (1 << self.n) - 1;
    }

    fn flush(&mut self) {
        if self.n > 0 {
            let pad = 8 - self.n;
            self.put((1 << pad) - 1, pad);
        }
    }
}

fn magnitude(v: i32) -> (u32, u32) {
    let size = 32 - v.unsigned_abs().leading_zeros();
    let bits = if v < 0 { v - 1 } else { v } as u32;
    (size, bits & ((1u32 << size) - 1))
}

fn forward_dct(block: &mut [f32; 64], basis: &[[f32; 8]; 8]) {
    let mut tmp = [0f32; 64];
    for y in 0..8 {
        for u in 0..8 {
            tmp[y * 8 + u] = (0..8).map(|x| basis[u][x] * block[y * 8 + x]).sum();
        }
    }
    for v in 0..8 {
        for u in 0..8 {
            block[v * 8 + u] = (0..8).map(|y| basis[v][y] * tmp[y * 8 + u]).sum();
        }
    }
}

/// A padded sample plane of one component.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Plane {
    fn block(&self, bx: usize, by: usize) -> [f32; 64] {
        let mut b = [0f32; 64];
        for y in 0..8 {
            let row = (by * 8 + y) * self.width + bx * 8;
            for x in 0..8 {
                b[y * 8 + x] = self.data[row + x] - 128.0;
            }
        }
        b
    }

    /// 2x2 box average; dimensions must be even.
    fn halve(&self) -> Plane {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let i = 2 * y * self.width + 2 * x;
                let s = self.data[i] + self.data[i + 1] + self.data[i + self.width] + self.data[i + self.width + 1];
                data.push(0.25 * s);
            }
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }
}

struct ComponentCoder<'a> {
    quant: [u8; 64],
    dc: &'a HuffmanCodes,
    ac: &'a HuffmanCodes,
    pred: i32,
}

impl ComponentCoder<'_> {
    fn encode_block(&mut self, mut block: [f32; 64], basis: &[[f32; 8]; 8], w: &mut BitWriter) {
        forward_dct(&mut block, basis);
        let mut zz = [0i32; 64];
        for (k, &nat) in ZIGZAG.iter().enumerate() {
            zz[k] = (block[nat] / self.quant[nat] as f32).round() as i32;
        }
        let diff = zz[0] - self.pred;
        self.pred = zz[0];
        let (size, bits) = magnitude(diff);
        w.put(self.dc.code[size as usize] as u32, self.dc.len[size as usize] as u32);
        if size > 0 {
            w.put(bits, size);
        }
        let mut run = 0;
        for &c in &zz[1..] {
            if c == 0 {
                run += 1;
                continue;
            }
            while run > 15 {
                w.put(self.ac.code[0xF0] as u32, self.ac.len[0xF0] as u32);
                run -= 16;
            }
            let (size, bits) = magnitude(c);
            let sym = (run << 4 | size) as usize;
            w.put(self.ac.code[sym] as u32, self.ac.len[sym] as u32);
            w.put(bits, size);
            run = 0;
        }
        if run > 0 {
            w.put(self.ac.code[0] as u32, self.ac.len[0] as u32);
        }
    }
}

fn push_marker_segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

pub fn encode(image: &TextureImage, quality: u8, restart_interval: u16) -> Result<Vec<u8>, AssetError> {
    if !(1..=100).contains(&quality) {
        return Err(AssetError::InvalidQuality(quality));
    }
    let color = image.channels() == 3;
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(AssetError::InvalidDimensions {
            width: image.width(),
            height: image.height(),
        });
    }
    let mcu = if color { 16 } else { 8 };
    let pw = w.div_ceil(mcu) * mcu;
    let ph = h.div_ceil(mcu) * mcu;

    // Color conversion with edge replication into the padded area.
    let mut planes: Vec<Plane> = (0..image.channels())
        .map(|_| Plane {
            width: pw,
            height: ph,
            data: vec![0.0; pw * ph],
        })
        .collect();
    let src = image.data();
    for y in 0..ph {
        let sy = y.min(h - 1);
        for x in 0..pw {
            let sx = x.min(w - 1);
            let i = y * pw + x;
            if color {
                let p = (sy * w + sx) * 3;
                let (r, g, b) = (src[p] as f32, src[p + 1] as f32, src[p + 2] as f32);
                planes[0].data[i] = 0.299 * r + 0.587 * g + 0.114 * b;
                planes[1].data[i] = -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0;
                planes[2].data[i] = 0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0;
            } else {
                planes[0].data[i] = src[sy * w + sx] as f32;
            }
        }
    }
    if color {
        planes[1] = planes[1].halve();
        planes[2] = planes[2].halve();
    }

    let luma_q = scaled_table(&BASE_LUMA, quality);
    let chroma_q = scaled_table(&BASE_CHROMA, quality);
    let dc_l = HuffmanSpec::dc_luma();
    let ac_l = HuffmanSpec::ac_luma();
    let dc_c = HuffmanSpec::dc_chroma();
    let ac_c = HuffmanSpec::ac_chroma();

    let mut out = Vec::with_capacity(w * h / 4 + 1024);
    out.extend_from_slice(&[0xFF, 0xD8]);
    push_marker_segment(
        &mut out,
        0xE0,
        &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0],
    );
    let mut dqt = vec![0u8];
    dqt.extend(ZIGZAG.iter().map(|&i| luma_q[i]));
    if color {
        dqt.push(1);
        dqt.extend(ZIGZAG.iter().map(|&i| chroma_q[i]));
    }
    push_marker_segment(&mut out, 0xDB, &dqt);

    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    if color {
        sof.extend_from_slice(&[3, 1, 0x22, 0, 2, 0x11, 1, 3, 0x11, 1]);
    } else {
        sof.extend_from_slice(&[1, 1, 0x11, 0]);
    }
    push_marker_segment(&mut out, 0xC0, &sof);

    let mut dht = Vec::new();
    let mut tables = vec![(0x00, &dc_l), (0x10, &ac_l)];
    if color {
        tables.push((0x01, &dc_c));
        tables.push((0x11, &ac_c));
    }
    for (class_id, spec) in tables {
        dht.push(class_id);
        dht.extend_from_slice(&spec.bits);
        dht.extend_from_slice(spec.values);
    }
    push_marker_segment(&mut out, 0xC4, &dht);

    if restart_interval > 0 {
        push_marker_segment(&mut out, 0xDD, &restart_interval.to_be_bytes());
    }
    if color {
        push_marker_segment(&mut out, 0xDA, &[3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0]);
    } else {
        push_marker_segment(&mut out, 0xDA, &[1, 1, 0x00, 0, 63, 0]);
    }

    let codes_dc_l = HuffmanCodes::new(&dc_l);
    let codes_ac_l = HuffmanCodes::new(&ac_l);
    let codes_dc_c = HuffmanCodes::new(&dc_c);
    let codes_ac_c = HuffmanCodes::new(&ac_c);
    let basis = dct_basis();
    let mut writer = BitWriter {
        out,
        acc: 0,
        n: 0,
    };
    let mut luma = ComponentCoder {
        quant: luma_q,
        dc: &codes_dc_l,
        ac: &codes_ac_l,
        pred: 0,
    };
    let mut cb = ComponentCoder {
        quant: chroma_q,
        dc: &codes_dc_c,
        ac: &codes_ac_c,
        pred: 0,
    };
    let mut cr = ComponentCoder {
        quant: chroma_q,
        dc: &codes_dc_c,
        ac: &codes_ac_c,
        pred: 0,
    };
    let mcus_x = pw / mcu;
    for m in 0..mcus_x * (ph / mcu) {
        let (mx, my) = (m % mcus_x, m / mcus_x);
        let ri = restart_interval as usize;
        if ri > 0 && m > 0 && m % ri == 0 {
            writer.flush();
            writer.out.extend_from_slice(&[0xFF, 0xD0 + ((m / ri - 1) % 8) as u8]);
            luma.pred = 0;
            cb.pred = 0;
            cr.pred = 0;
        }
        {
            if color {
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    luma.encode_block(planes[0].block(2 * mx + dx, 2 * my + dy), &basis, &mut writer);
                }
                cb.encode_block(planes[1].block(mx, my), &basis, &mut writer);
                cr.encode_block(planes[2].block(mx, my), &basis, &mut writer);
            } else {
                luma.encode_block(planes[0].block(mx, my), &basis, &mut writer);
            }
        }
    }
    writer.flush();
    let mut out = writer.out;
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}
