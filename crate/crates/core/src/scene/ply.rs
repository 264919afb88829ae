//! Reader for binary little-endian PLY files in the common 3DGS vertex layout.

use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{cholesky3, mat_mul_transpose, Gaussian3D, Mat3, Scene};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SH_C0: f64 = 0.282_094_791_773_878_14;

#[derive(Debug, Clone, Copy)]
enum Ty {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Ty {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn load_ply<S: Scalar>(path: impl AsRef<Path>) -> Result<Scene<S>> {
    read_ply(BufReader::new(std::fs::File::open(path)?))
}

pub(crate) fn read_ply<S: Scalar, R: BufRead>(mut r: R) -> Result<Scene<S>> {
    let mut line_no = 0;
    let mut next_line = |r: &mut R| -> Result<String> {
        let mut s = String::new();
        if r.read_line(&mut s)? == 0 {
            return Err(perr(line_no + 1, "unexpected end of header"));
        }
        line_no += 1;
        Ok(s.trim_end().to_string())
    };
    if next_line(&mut r)? != "ply" {
        return Err(perr(1, "missing ply magic"));
    }
    let mut count = None;
    let mut props: Vec<(String, Ty)> = Vec::new();
    let mut in_vertex = false;
    let mut ln = 1;
    loop {
        let line = next_line(&mut r)?;
        ln += 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", _] => {}
            ["format", other, ..] => return Err(perr(ln, format!("unsupported format {other}"))),
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, n] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    count = Some(n.parse::<usize>().map_err(|_| perr(ln, "bad vertex count"))?);
                } else if count.is_none() {
                    return Err(perr(ln, "elements before vertex are not supported"));
                }
            }
            ["property", "list", ..] if in_vertex => return Err(perr(ln, "list properties are not supported")),
            ["property", ty, name] if in_vertex => {
                let ty = Ty::parse(ty).ok_or_else(|| perr(ln, format!("unknown type {ty}")))?;
                props.push((name.to_string(), ty));
            }
            ["property", ..] => {}
            _ => return Err(perr(ln, format!("unrecognized header line: {line}"))),
        }
    }
    let count = count.ok_or_else(|| perr(ln, "no vertex element"))?;
    let col = |name: &str| -> Result<(usize, Ty)> {
        let mut off = 0;
        for (n, t) in &props {
            if n == name {
                return Ok((off, *t));
            }
            off += t.size();
        }
        Err(perr(ln, format!("missing vertex property {name}")))
    };
    let names = [
        "x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1",
        "rot_2", "rot_3",
    ];
    let cols = names.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;
    if props.iter().any(|(n, _)| n.starts_with("f_rest_")) {
        log::warn!("higher-order spherical harmonic coefficients are ignored");
    }
    let stride: usize = props.iter().map(|(_, t)| t.size()).sum();
    let mut buf = vec![0u8; stride];
    let mut gaussians = Vec::with_capacity(count);
    for i in 0..count {
        r.read_exact(&mut buf)?;
        let v: Vec<f64> = cols.iter().map(|&(off, t)| t.read(&buf[off..])).collect();
        gaussians.push(vertex_to_gaussian(&v, i)?);
    }
    Scene::new(gaussians)
}

fn vertex_to_gaussian<S: Scalar>(v: &[f64], index: usize) -> Result<Gaussian3D<S>> {
    let color = [v[3], v[4], v[5]].map(|dc| (0.5 + SH_C0 * dc).clamp(0.0, 1.0));
    let opacity = 1.0 / (1.0 + (-v[6]).exp());
    let s = [v[7].exp(), v[8].exp(), v[9].exp()];
    let qn = (v[10] * v[10] + v[11] * v[11] + v[12] * v[12] + v[13] * v[13]).sqrt();
    if !(qn > 0.0) {
        return Err(Error::NonPsdCovariance { index });
    }
    let [w, x, y, z] = [v[10] / qn, v[11] / qn, v[12] / qn, v[13] / qn];
    let rot: Mat3<f64> = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ];
    let mut rs = rot;
    for row in rs.iter_mut() {
        for (c, e) in row.iter_mut().enumerate() {
            *e *= s[c];
        }
    }
    let chol = cholesky3(&mat_mul_transpose(&rs, &rs)).ok_or(Error::NonPsdCovariance { index })?;
    let conv = |a: [f64; 3]| a.map(S::lit);
    Ok(Gaussian3D {
        mean: conv([v[0], v[1], v[2]]),
        chol: chol.map(conv),
        opacity: S::lit(opacity),
        color: conv(color),
    })
}
