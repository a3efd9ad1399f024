//! The `UDPACK 1` text format.
//!
//! ```text
//! UDPACK 1
//! dim=<n> window=<R_w>
//! # tag: <optional provenance>
//! <n whitespace-separated coordinates per point>
//! ```
//!
//! `#` starts a comment. Numbers are written with 17 significant digits, so
//! reading a written file and writing it again reproduces the same bytes.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::udset::UdSet;

const MAGIC: &str = "UDPACK";
const VERSION: &str = "1";
const TAG_PREFIX: &str = "# tag: ";

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_packing<W: Write>(mut w: W, set: &UdSet) -> Result<()> {
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "dim={} window={}", set.dim(), fmt17(set.window_radius()))?;
    if let Some(tag) = set.tag() {
        writeln!(w, "{TAG_PREFIX}{}", tag.replace('\n', " "))?;
    }
    for p in set.points() {
        let line: Vec<String> = p.coords().iter().map(|&c| fmt17(c)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn packing_to_string(set: &UdSet) -> String {
    let mut buf = Vec::new();
    write_packing(&mut buf, set).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_packing_file(path: impl AsRef<Path>, set: &UdSet) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_packing(&mut w, set)?;
    w.flush()?;
    Ok(())
}

pub fn read_packing_file(path: impl AsRef<Path>) -> Result<UdSet> {
    read_packing(fs::File::open(path)?)
}

fn fmt_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

pub fn read_packing<R: Read>(r: R) -> Result<UdSet> {
    let mut lines = BufReader::new(r).lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "empty file"))?;
    let header = header?;
    let mut parts = header.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(MAGIC), Some(VERSION), None) => {}
        (Some(MAGIC), Some(v), None) => return Err(fmt_err(1, format!("unsupported UDPACK version {v}"))),
        _ => return Err(fmt_err(1, format!("expected '{MAGIC} {VERSION}' header"))),
    }

    let (_, meta) = lines.next().ok_or_else(|| fmt_err(2, "missing dim/window line"))?;
    let meta = meta?;
    let (mut dim, mut window) = (None, None);
    for tok in meta.split('#').next().unwrap_or("").split_whitespace() {
        match tok.split_once('=') {
            Some(("dim", v)) => dim = Some(v.parse::<usize>().map_err(|_| fmt_err(2, format!("bad dim '{v}'")))?),
            Some(("window", v)) => {
                window = Some(v.parse::<f64>().map_err(|_| fmt_err(2, format!("bad window '{v}'")))?)
            }
            _ => return Err(fmt_err(2, format!("unexpected token '{tok}'"))),
        }
    }
    let dim = dim.ok_or_else(|| fmt_err(2, "missing dim="))?;
    let window = window.ok_or_else(|| fmt_err(2, "missing window="))?;
    if dim == 0 {
        return Err(fmt_err(2, "dim must be >= 1"));
    }

    let mut tag = None;
    let mut points = Vec::new();
    let mut line_of = Vec::new();
    for (no, line) in lines {
        let line = line?;
        if let Some(t) = line.strip_prefix(TAG_PREFIX) {
            if points.is_empty() && tag.is_none() {
                tag = Some(t.to_string());
                continue;
            }
        }
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let coords = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| fmt_err(no, format!("bad coordinate '{t}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if coords.len() != dim {
            return Err(fmt_err(no, format!("expected {dim} coordinates, found {}", coords.len())));
        }
        points.push(Point::new(coords));
        line_of.push(no);
    }

    let set = UdSet::validate(points, dim, window).map_err(|e| match e {
        Error::MinDistanceViolation { first, second, distance, .. } => fmt_err(
            line_of[first],
            format!("point is at distance {distance} < 1 from the point on line {}", line_of[second]),
        ),
        Error::OutOfWindow { index, norm, window, .. } => {
            fmt_err(line_of[index], format!("point norm {norm} exceeds window {window}"))
        }
        Error::Domain(msg) if !line_of.is_empty() => fmt_err(line_of[0], msg),
        other => other,
    })?;
    Ok(match tag {
        Some(t) => set.with_tag(t),
        None => set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udset::{gen_lattice, gen_rsa, Lattice};

    #[test]
    fn round_trip_is_byte_identical() {
        let hex = gen_lattice(&Lattice::Hexagonal.basis(), 6.0).unwrap().with_tag("hex");
        let text = packing_to_string(&hex);
        let back = read_packing(text.as_bytes()).unwrap();
        assert_eq!(back, hex);
        assert_eq!(back.tag(), Some("hex"));
        assert_eq!(packing_to_string(&back), text);

        let rsa = gen_rsa(3, 3.0, 5, 100).unwrap();
        let text = packing_to_string(&rsa);
        assert_eq!(packing_to_string(&read_packing(text.as_bytes()).unwrap()), text);
    }

    #[test]
    fn rejects_bad_version_and_header() {
        let e = read_packing("UDPACK 2\ndim=2 window=1\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("version"), "{e}");
        assert!(read_packing("PACK 1\n".as_bytes()).is_err());
        assert!(read_packing("UDPACK 1\ndim=2\n".as_bytes()).is_err());
        assert!(read_packing("UDPACK 1\ndim=2 window=3 extra=1\n".as_bytes()).is_err());
    }

    #[test]
    fn validation_errors_name_lines() {
        let text = "UDPACK 1\ndim=2 window=5\n# a comment\n0 0\n\n3 0 # trailing\n0.5 0\n";
        match read_packing(text.as_bytes()) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("line 7"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        match read_packing("UDPACK 1\ndim=2 window=5\n1 2 3\n".as_bytes()) {
            Err(Error::Format { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match read_packing("UDPACK 1\ndim=2 window=1\n0 0\n4 0\n".as_bytes()) {
            Err(Error::Format { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_hand_written_numbers() {
        let text = "UDPACK 1\ndim=1 window=3 # header comment\n# nothing\n-2\n0.5\n";
        let set = read_packing(text.as_bytes()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.points()[0][0], -2.0);
    }
}
