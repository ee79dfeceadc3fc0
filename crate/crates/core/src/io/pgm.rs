//! 8-bit portable graymaps: binary `P5` is written, `P5` and ASCII `P2` are
//! read. Image rows run top to bottom, so the first row is the highest `y`.

use crate::error::{Error, Result};
use crate::geometry::RasterMask;
use crate::grid::Field;

/// Decoded graymap, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        message: message.into(),
    }
}

/// Header tokens, skipping `#` comments; returns the offset after the last token.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            return Err(parse_err("truncated graymap header"));
        }
        if bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
            i += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i))
}

fn dimension(token: &str, what: &str) -> Result<usize> {
    let v: usize = token
        .parse()
        .map_err(|_| parse_err(format!("bad {what} `{token}`")))?;
    if v == 0 || v > 1 << 14 {
        return Err(parse_err(format!("{what} {v} out of range")));
    }
    Ok(v)
}

pub fn read_pgm(bytes: &[u8]) -> Result<Graymap> {
    let (tokens, end) = header_tokens(bytes, 4)?;
    let binary = match tokens[0].as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(parse_err(format!("unsupported magic `{other}`"))),
    };
    let width = dimension(&tokens[1], "width")?;
    let height = dimension(&tokens[2], "height")?;
    let maxval: u16 = tokens[3]
        .parse()
        .ok()
        .filter(|&m| m > 0)
        .ok_or_else(|| parse_err(format!("bad maxval `{}`", tokens[3])))?;
    let count = width * height;
    let pixels = if binary {
        // Exactly one whitespace byte separates header and raster.
        let body = bytes.get(end + 1..).unwrap_or(&[]);
        let wide = maxval > 255;
        let need = if wide { 2 * count } else { count };
        if body.len() < need {
            return Err(parse_err(format!(
                "raster has {} bytes, expected {need}",
                body.len()
            )));
        }
        if wide {
            body[..need]
                .chunks(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        } else {
            body[..need].iter().map(|&b| b as u16).collect()
        }
    } else {
        let text = std::str::from_utf8(&bytes[end..]).map_err(|_| parse_err("non-text P2 body"))?;
        let values: Vec<u16> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<u16>()
                    .map_err(|_| parse_err(format!("bad pixel `{t}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() != count {
            return Err(parse_err(format!(
                "found {} pixels, expected {count}",
                values.len()
            )));
        }
        values
    };
    if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
        return Err(parse_err(format!("pixel {p} exceeds maxval {maxval}")));
    }
    Ok(Graymap {
        width,
        height,
        maxval,
        pixels,
    })
}

/// Square graymap to an obstacle mask over `[-halfwidth, halfwidth]^2`;
/// nonzero pixels belong to the obstacle.
pub fn raster_from_pgm(bytes: &[u8], halfwidth: f64) -> Result<RasterMask> {
    let map = read_pgm(bytes)?;
    if map.width != map.height {
        return Err(parse_err(format!(
            "mask must be square, got {}x{}",
            map.width, map.height
        )));
    }
    let n = map.width;
    let mut cells = vec![false; n * n];
    for row in 0..n {
        let iy = n - 1 - row;
        for ix in 0..n {
            cells[iy * n + ix] = map.pixels[row * n + ix] != 0;
        }
    }
    RasterMask::new(halfwidth, n, cells)
}

/// Binary graymap of `field`, `[0, 1] -> [0, 255]`; obstacle cells are black.
pub fn field_to_pgm(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let n = grid.n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for row in 0..n {
        let iy = n - 1 - row;
        for ix in 0..n {
            let k = grid.index(ix, iy);
            let v = if grid.is_exterior(k) {
                field.get(k).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push((v * 255.0).round() as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use std::sync::Arc;

    #[test]
    fn ascii_and_binary_agree() {
        let ascii = b"P2\n# mask\n3 2\n9\n0 9 0\n1 0 0\n";
        let binary = b"P5 3 2 9\n\x00\x09\x00\x01\x00\x00";
        let a = read_pgm(ascii).unwrap();
        let b = read_pgm(binary).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pixels, vec![0, 9, 0, 1, 0, 0]);
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in [
            &b"P6 1 1 255\n\x00"[..],
            b"P5 2 2 255\n\x00",
            b"P2 1 1 3\n7\n",
            b"P5 0 1 255\n",
            b"P2",
        ] {
            assert!(read_pgm(bad).is_err());
        }
    }

    #[test]
    fn mask_rows_are_flipped() {
        let m = raster_from_pgm(b"P2 2 2 1\n1 0\n0 0\n", 1.0).unwrap();
        // Top-left pixel is the cell with the highest y and lowest x.
        assert_eq!(m.cells, vec![false, false, true, false]);
    }

    #[test]
    fn field_image_round_trips_through_reader() {
        let g = Arc::new(Grid2D::new(1.0, 4).unwrap());
        let f = Field::from_fn(g, 0.0, |x| if x[1] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let img = read_pgm(&field_to_pgm(&f)).unwrap();
        assert_eq!(&img.pixels[..4], &[255; 4]);
        assert_eq!(&img.pixels[12..], &[0; 4]);
    }
}
