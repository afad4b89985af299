//! `PHSRAST1` float rasters and binary PGM masks.

use crate::error::{Error, Result};
use crate::geometry::{DepthRaster, Mask, PointMap, Vec3};

pub const RASTER_MAGIC: &[u8; 8] = b"PHSRAST1";
const HEADER_LEN: usize = 20;

/// Row-major float32 samples, `channels` per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRaster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl RawRaster {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(RASTER_MAGIC);
        for n in [self.width, self.height, self.channels] {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        const CTX: &str = "raster";
        if bytes.len() < HEADER_LEN || &bytes[..8] != RASTER_MAGIC {
            return Err(Error::parse(CTX, "missing PHSRAST1 header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
        let (width, height, channels) = (word(0), word(1), word(2));
        let count = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::parse(CTX, "dimensions overflow"))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != 4 * count {
            return Err(Error::parse(
                CTX,
                format!("{width}x{height}x{channels} needs {} payload bytes, found {}", 4 * count, payload.len()),
            ));
        }
        let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { width, height, channels, data })
    }

    fn expect_channels(&self, channels: usize) -> Result<()> {
        if self.channels != channels {
            return Err(Error::parse("raster", format!("expected {channels} channel(s), found {}", self.channels)));
        }
        Ok(())
    }
}

pub fn encode_depth(depth: &DepthRaster) -> Vec<u8> {
    RawRaster {
        width: depth.width(),
        height: depth.height(),
        channels: 1,
        data: depth.values().iter().map(|&z| z as f32).collect(),
    }
    .encode()
}

pub fn decode_depth(bytes: &[u8]) -> Result<DepthRaster> {
    let raw = RawRaster::decode(bytes)?;
    raw.expect_channels(1)?;
    DepthRaster::from_values(raw.width, raw.height, raw.data.iter().map(|&z| z as f64).collect())
}

pub fn encode_point_map(map: &PointMap) -> Vec<u8> {
    RawRaster {
        width: map.width(),
        height: map.height(),
        channels: 3,
        data: map.raw().iter().flat_map(|p| [p.x as f32, p.y as f32, p.z as f32]).collect(),
    }
    .encode()
}

pub fn decode_point_map(bytes: &[u8]) -> Result<PointMap> {
    let raw = RawRaster::decode(bytes)?;
    raw.expect_channels(3)?;
    let points = raw.data.chunks_exact(3).map(|c| Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)).collect();
    PointMap::from_points(raw.width, raw.height, points)
}

pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Any sample above half the maximum counts as inside.
pub fn decode_pgm(bytes: &[u8]) -> Result<Mask> {
    const CTX: &str = "pgm";
    let mut pos = 0;
    let mut fields = [0usize; 3];
    if bytes.get(..2) != Some(b"P5") {
        return Err(Error::parse(CTX, "not a binary PGM (P5)"));
    }
    pos += 2;
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(CTX, "malformed header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::parse(CTX, "malformed header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(CTX, format!("unsupported maxval {maxval}")));
    }
    let payload = &bytes[pos..];
    if payload.len() != width * height {
        return Err(Error::parse(CTX, format!("{width}x{height} needs {} bytes, found {}", width * height, payload.len())));
    }
    let bits = payload.iter().map(|&v| 2 * v as usize > maxval).collect();
    Mask::from_bits(width, height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let raw = RawRaster { width: 2, height: 1, channels: 1, data: vec![1.5, f32::NAN] };
        let bytes = raw.encode();
        assert_eq!(&bytes[..8], b"PHSRAST1");
        assert_eq!(&bytes[8..20], &[2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[20..24], &1.5f32.to_le_bytes());
        assert_eq!(bytes.len(), 28);
    }

    #[test]
    fn nan_marks_invalid_depth() {
        let mut d = DepthRaster::invalid(3, 2);
        d.set(1, 1, Some(2.25));
        let back = decode_depth(&encode_depth(&d)).unwrap();
        assert_eq!(back.get(1, 1), Some(2.25));
        assert_eq!(back.get(0, 0), None);
        assert_eq!(encode_depth(&back), encode_depth(&d));
    }

    #[test]
    fn point_map_round_trip() {
        let mut m = PointMap::invalid(2, 2);
        m.set(0, 1, Some(Vec3::new(0.25, -1.0, 3.5)));
        let bytes = encode_point_map(&m);
        let back = decode_point_map(&bytes).unwrap();
        assert_eq!(back.get(0, 1), Some(Vec3::new(0.25, -1.0, 3.5)));
        assert_eq!(back.valid_count(), 1);
        assert_eq!(encode_point_map(&back), bytes);
    }

    #[test]
    fn rejects_bad_rasters() {
        assert!(matches!(decode_depth(b"PHSRAST2aaaaaaaaaaaa"), Err(Error::Parse { .. })));
        let mut bytes = encode_depth(&DepthRaster::invalid(2, 2));
        bytes.pop();
        assert!(decode_depth(&bytes).is_err());
        let pm = encode_point_map(&PointMap::invalid(2, 2));
        assert!(decode_depth(&pm).is_err());
    }

    #[test]
    fn pgm_with_comment() {
        let mut bytes = b"P5\n# made by hand\n3 1\n255\n".to_vec();
        bytes.extend([0, 255, 200]);
        let m = decode_pgm(&bytes).unwrap();
        assert_eq!(m.bits(), &[false, true, true]);
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\0").is_err());
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let bits: Vec<bool> = (0..w * h).map(|i| (seed.rotate_left(i as u32 % 64) & 1) == 1).collect();
            let m = Mask::from_bits(w, h, bits).unwrap();
            let bytes = encode_pgm(&m);
            let back = decode_pgm(&bytes).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(encode_pgm(&back), bytes);
        }

        #[test]
        fn raster_round_trip(values in proptest::collection::vec(prop_oneof![Just(f32::NAN), -1e3f32..1e3], 1..40)) {
            let raw = RawRaster { width: values.len(), height: 1, channels: 1, data: values };
            let bytes = raw.encode();
            prop_assert_eq!(RawRaster::decode(&bytes).unwrap().encode(), bytes);
        }
    }
}
