//! Raw float container: `"ABIM" | u32 version | u32 W | u32 H | u32 C | u8 kind | f32 payload`,
//! little-endian, row-major; the payload holds the lower array, then the upper
//! array when `kind = 1`.

use std::io::{Read, Write};

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"ABIM";
pub const VERSION: u32 = 1;
const CHANNELS: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Abim {
    pub width: u32,
    pub height: u32,
    pub lower: Vec<f32>,
    pub upper: Option<Vec<f32>>,
}

impl Abim {
    pub fn single(width: u32, height: u32, data: Vec<f32>) -> Self {
        Self { width, height, lower: data, upper: None }
    }

    pub fn pair(width: u32, height: u32, lower: Vec<f32>, upper: Vec<f32>) -> Self {
        Self { width, height, lower, upper: Some(upper) }
    }

    fn len(&self) -> usize {
        self.width as usize * self.height as usize * CHANNELS as usize
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        assert_eq!(self.lower.len(), self.len(), "payload size does not match dimensions");
        w.write_all(MAGIC)?;
        for v in [VERSION, self.width, self.height, CHANNELS] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[u8::from(self.upper.is_some())])?;
        for arr in std::iter::once(&self.lower).chain(&self.upper) {
            assert_eq!(arr.len(), self.len(), "payload size does not match dimensions");
            let bytes: Vec<u8> = arr.iter().flat_map(|v| v.to_le_bytes()).collect();
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::input(format!("bad ABIM data: {m}"));
        let mut head = [0u8; 21];
        r.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
        if &head[..4] != MAGIC {
            return Err(bad("wrong magic"));
        }
        let word = |i: usize| u32::from_le_bytes(head[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        let (version, width, height, channels) = (word(0), word(1), word(2), word(3));
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        if channels != CHANNELS {
            return Err(bad(&format!("expected 3 channels, found {channels}")));
        }
        let kind = head[20];
        if kind > 1 {
            return Err(bad(&format!("unknown kind {kind}")));
        }
        let n = width as usize * height as usize * CHANNELS as usize;
        let mut read_arr = || -> Result<Vec<f32>, CliError> {
            let mut buf = vec![0u8; n * 4];
            r.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
            Ok(buf.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let lower = read_arr()?;
        let upper = if kind == 1 { Some(read_arr()?) } else { None };
        Ok(Self { width, height, lower, upper })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::read_from(&mut &bytes[..])
    }
}

/// Largest `f32` not above `v`.
pub fn f32_down(v: f64) -> f32 {
    let f = v as f32;
    if f as f64 > v {
        f.next_down()
    } else {
        f
    }
}

/// Smallest `f32` not below `v`.
pub fn f32_up(v: f64) -> f32 {
    let f = v as f32;
    if (f as f64) < v {
        f.next_up()
    } else {
        f
    }
}
