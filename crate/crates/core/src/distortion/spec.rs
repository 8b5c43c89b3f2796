use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DistortionError;

pub const LOD_LEVELS: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
pub const QP_LEVELS: [u8; 5] = [11, 10, 9, 8, 7];
pub const QT_LEVELS: [u8; 5] = [10, 9, 8, 7, 6];
pub const TS_LEVELS: [u32; 5] = [2048, 1440, 1024, 712, 512];
pub const TQ_LEVELS: [u8; 5] = [90, 75, 50, 25, 10];

/// One hypothetical reference circuit: simplification level, position bits, UV bits,
/// texture side and JPEG quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub lod: u8,
    pub qp: u8,
    pub qt: u8,
    pub ts: u32,
    pub tq: u8,
}

impl DistortionSpec {
    pub fn new(lod: u8, qp: u8, qt: u8, ts: u32, tq: u8) -> Result<Self, DistortionError> {
        let bad = |what: String| Err(DistortionError::InvalidLevel(what));
        if !LOD_LEVELS.contains(&lod) {
            return bad(format!("lod L{lod}"));
        }
        if !QP_LEVELS.contains(&qp) {
            return bad(format!("qp {qp}"));
        }
        if !QT_LEVELS.contains(&qt) {
            return bad(format!("qt {qt}"));
        }
        if !TS_LEVELS.contains(&ts) {
            return bad(format!("ts {ts}"));
        }
        if !TQ_LEVELS.contains(&tq) {
            return bad(format!("tq {tq}"));
        }
        Ok(Self { lod, qp, qt, ts, tq })
    }

    /// Gentlest setting of every dimension.
    pub fn best() -> Self {
        Self::new(1, 11, 10, 2048, 90).unwrap()
    }

    /// Harshest setting of every dimension.
    pub fn worst() -> Self {
        Self::new(10, 7, 6, 512, 10).unwrap()
    }

    /// 0-based level index per dimension (0 = gentlest), in the order lod, qp, qt, ts, tq.
    pub fn level_indices(&self) -> [usize; 5] {
        [
            LOD_LEVELS.iter().position(|&v| v == self.lod).unwrap(),
            QP_LEVELS.iter().position(|&v| v == self.qp).unwrap(),
            QT_LEVELS.iter().position(|&v| v == self.qt).unwrap(),
            TS_LEVELS.iter().position(|&v| v == self.ts).unwrap(),
            TQ_LEVELS.iter().position(|&v| v == self.tq).unwrap(),
        ]
    }

    /// Short identifier usable in file names, e.g. `L3_qp9_qt8_ts1024_tq50`.
    pub fn tag(&self) -> String {
        format!("L{}_qp{}_qt{}_ts{}_tq{}", self.lod, self.qp, self.qt, self.ts, self.tq)
    }
}

impl fmt::Display for DistortionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{},{},{},{},{}", self.lod, self.qp, self.qt, self.ts, self.tq)
    }
}

impl FromStr for DistortionSpec {
    type Err = DistortionError;

    /// Parses `L<lod>,<qp>,<qt>,<ts>,<tq>`; the leading `L` is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || DistortionError::InvalidLevel(s.to_owned());
        let [lod, qp, qt, ts, tq] = parts.as_slice() else {
            return Err(bad());
        };
        let lod = lod.strip_prefix(['L', 'l']).unwrap_or(lod);
        Self::new(
            lod.parse().map_err(|_| bad())?,
            qp.parse().map_err(|_| bad())?,
            qt.parse().map_err(|_| bad())?,
            ts.parse().map_err(|_| bad())?,
            tq.parse().map_err(|_| bad())?,
        )
    }
}

/// The full 10×5×5×5×5 cross product, lod outermost and JPEG quality innermost,
/// each dimension from gentlest to harshest.
pub fn enumerate_hrcs() -> Vec<DistortionSpec> {
    let mut out = Vec::with_capacity(6250);
    for &lod in &LOD_LEVELS {
        for &qp in &QP_LEVELS {
            for &qt in &QT_LEVELS {
                for &ts in &TS_LEVELS {
                    for &tq in &TQ_LEVELS {
                        out.push(DistortionSpec { lod, qp, qt, ts, tq });
                    }
                }
            }
        }
    }
    out
}
