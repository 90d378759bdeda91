//! Line-oriented expansion files.
//!
//! ```text
//! hg-expansion v1 w0=0.001
//! # n m re im
//! 1 0 7.0710678118654757e-1 0.0000000000000000e0
//! 0 1 0.0000000000000000e0 7.0710678118654757e-1
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{BeamGeometry, HGIndex, ModeExpansion};
use crate::error::{Error, Result};

const HEADER: &str = "hg-expansion";
const VERSION: &str = "v1";

pub fn format_expansion(e: &ModeExpansion) -> String {
    let mut out = format!("{HEADER} {VERSION} w0={}\n", e.geometry().w0());
    for (idx, c) in e.terms() {
        writeln!(out, "{} {} {:.16e} {:.16e}", idx.n, idx.m, c.re, c.im).unwrap();
    }
    out
}

pub fn parse_expansion(text: &str) -> Result<ModeExpansion> {
    let mut expansion: Option<ModeExpansion> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match expansion.as_mut() {
            None => expansion = Some(parse_header(&fields, line_no)?),
            Some(e) => {
                if fields.len() != 4 {
                    return Err(Error::parse(
                        line_no,
                        format!("expected `n m re im`, got {} fields", fields.len()),
                    ));
                }
                let n = parse_num::<u32>(fields[0], line_no, "n")?;
                let m = parse_num::<u32>(fields[1], line_no, "m")?;
                let re = parse_num::<f64>(fields[2], line_no, "re")?;
                let im = parse_num::<f64>(fields[3], line_no, "im")?;
                e.add_term(HGIndex::new(n, m), Complex64::new(re, im))
                    .map_err(|err| Error::parse(line_no, err.to_string()))?;
            }
        }
    }
    expansion.ok_or_else(|| Error::parse(1, "missing `hg-expansion v1 w0=<meters>` header"))
}

fn parse_header(fields: &[&str], line_no: usize) -> Result<ModeExpansion> {
    if fields.len() < 3 || fields[0] != HEADER || fields[1] != VERSION {
        return Err(Error::parse(
            line_no,
            "expected header `hg-expansion v1 w0=<meters>`",
        ));
    }
    let mut w0 = None;
    let mut wavelength = BeamGeometry::DEFAULT_WAVELENGTH;
    for kv in &fields[2..] {
        match kv.split_once('=') {
            Some(("w0", v)) => w0 = Some(parse_num::<f64>(v, line_no, "w0")?),
            Some(("wavelength", v)) => wavelength = parse_num::<f64>(v, line_no, "wavelength")?,
            _ => {
                return Err(Error::parse(
                    line_no,
                    format!("unknown header field `{kv}`"),
                ))
            }
        }
    }
    let w0 = w0.ok_or_else(|| Error::parse(line_no, "header is missing w0"))?;
    let geom =
        BeamGeometry::new(w0, wavelength).map_err(|e| Error::parse(line_no, e.to_string()))?;
    Ok(ModeExpansion::new(geom))
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str, line_no: usize, what: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::parse(line_no, format!("invalid {what} `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_missing_header_and_bad_lines() {
        assert!(parse_expansion("").is_err());
        assert!(parse_expansion("1 0 1 0\n").is_err());
        let err = parse_expansion("hg-expansion v1 w0=1e-3\n1 0 nope 0\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
        let err = parse_expansion("hg-expansion v1 w0=1e-3\n# fine\n1 0 1\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let e = parse_expansion("# a beam\nhg-expansion v1 w0=0.002\n\n1 1 0.5 -0.5 # trailing\n")
            .unwrap();
        assert_eq!(e.geometry().w0(), 0.002);
        assert_eq!(e.coefficient(HGIndex::new(1, 1)), Complex64::new(0.5, -0.5));
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(terms in proptest::collection::vec((0u32..6, 0u32..6, -1.0f64..1.0, -1.0f64..1.0), 0..12),
                                   w0 in 1e-5f64..1e-2) {
            let geom = BeamGeometry::with_waist(w0).unwrap();
            let mut e = ModeExpansion::new(geom);
            for (n, m, re, im) in terms {
                e.add_term(HGIndex::new(n, m), Complex64::new(re, im)).unwrap();
            }
            let back = parse_expansion(&format_expansion(&e)).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
