//! Portable float map I/O.
//!
//! Writes single-channel little-endian maps (`Pf`, scale `-1.0`). Reads
//! either endianness; three-channel `PF` files are averaged to gray. Rows
//! are stored bottom to top.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::RadianceMap;
use crate::error::{Error, Result};

pub fn write_pfm(path: &Path, map: &RadianceMap) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_pfm_to(&mut out, map)?;
    out.flush()?;
    Ok(())
}

pub fn write_pfm_to<W: Write>(out: &mut W, map: &RadianceMap) -> Result<()> {
    write!(out, "Pf\n{} {}\n-1.0\n", map.width(), map.height())?;
    let mut row_bytes = Vec::with_capacity(map.width() * 4);
    for r in (0..map.height()).rev() {
        row_bytes.clear();
        for c in 0..map.width() {
            row_bytes.extend_from_slice(&(map.get(r, c) as f32).to_le_bytes());
        }
        out.write_all(&row_bytes)?;
    }
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<RadianceMap> {
    read_pfm_from(&mut BufReader::new(File::open(path)?))
}

fn header_token<R: BufRead>(input: &mut R) -> Result<String> {
    let mut token = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        if input.read(&mut byte)? == 0 {
            break;
        }
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(byte[0]);
        if token.len() > 64 {
            return Err(Error::Format("PFM header token too long".into()));
        }
    }
    if token.is_empty() {
        return Err(Error::Format("truncated PFM header".into()));
    }
    String::from_utf8(token).map_err(|_| Error::Format("PFM header is not ASCII".into()))
}

pub fn read_pfm_from<R: BufRead>(input: &mut R) -> Result<RadianceMap> {
    let channels = match header_token(input)?.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(Error::Format(format!("unknown PFM magic '{other}'"))),
    };
    let parse_dim = |s: String| {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0 && d <= 1 << 16)
            .ok_or_else(|| Error::Format(format!("bad PFM dimension '{s}'")))
    };
    let width = parse_dim(header_token(input)?)?;
    let height = parse_dim(header_token(input)?)?;
    let scale: f64 = header_token(input)?.parse().map_err(|_| Error::Format("bad PFM scale".into()))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format("PFM scale must be non-zero".into()));
    }
    let little_endian = scale < 0.0;

    let mut raw = vec![0u8; width * height * channels * 4];
    input.read_exact(&mut raw).map_err(|_| Error::Format("PFM pixel data is truncated".into()))?;
    let floats: Vec<f32> = raw
        .chunks_exact(4)
        .map(|b| {
            let b = [b[0], b[1], b[2], b[3]];
            if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();

    let mut values = vec![0.0; width * height];
    for (file_row, chunk) in floats.chunks_exact(width * channels).enumerate() {
        let r = height - 1 - file_row;
        for c in 0..width {
            let px = &chunk[c * channels..(c + 1) * channels];
            values[r * width + c] = px.iter().map(|&v| f64::from(v)).sum::<f64>() / channels as f64;
        }
    }
    RadianceMap::new(width, height, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_values_and_orientation() {
        let map = RadianceMap::from_fn(5, 3, |r, c| (r * 10 + c) as f64 + 0.5).unwrap();
        let mut buf = Vec::new();
        write_pfm_to(&mut buf, &map).unwrap();
        assert!(buf.starts_with(b"Pf\n5 3\n-1.0\n"));
        // first stored row is the bottom one
        assert_eq!(&buf[12..16], &20.5f32.to_le_bytes());
        let back = read_pfm_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn reads_big_endian_color() {
        let mut buf = b"PF\n1 1\n1.0\n".to_vec();
        for v in [1.0f32, 2.0, 6.0] {
            buf.extend_from_slice(&v.to_be_bytes());
        }
        let map = read_pfm_from(&mut buf.as_slice()).unwrap();
        assert_eq!(map.get(0, 0), 3.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_pfm_from(&mut b"P6\n1 1\n255\n".as_slice()).is_err());
        assert!(read_pfm_from(&mut b"Pf\n2 2\n-1.0\n\0\0\0\0".as_slice()).is_err());
        assert!(read_pfm_from(&mut b"Pf\n0 2\n-1.0\n".as_slice()).is_err());
        let mut neg = b"Pf\n1 1\n-1.0\n".to_vec();
        neg.extend_from_slice(&(-1.0f32).to_le_bytes());
        assert!(matches!(read_pfm_from(&mut neg.as_slice()), Err(Error::InvalidRadiance(_))));
    }
}
