//! Biphoton coefficient tables.
//!
//! ```text
//! biphoton v1
//! # j k s t re im
//! 0 0 0 0 8.0e-2 0
//! 1 0 1 0 4.0e-2 0
//! ```
//!
//! Each line is one amplitude c_{jk,st} of |HG_jk>|HG_st>. The pair is taken
//! to be in the (HV + VH)/sqrt2 polarization state.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{BiphotonExpansion, PolarizationPair};
use crate::error::{Error, Result};
use crate::modes::io::parse_num;
use crate::modes::{BeamGeometry, HGIndex};

const HEADER: &str = "biphoton";
const VERSION: &str = "v1";

#[derive(Debug, Clone)]
pub struct ParsedTable {
    pub expansion: BiphotonExpansion,
    pub warnings: Vec<String>,
}

pub fn format_biphoton_table(b: &BiphotonExpansion) -> String {
    let mut out = format!("{HEADER} {VERSION} w0={}\n", b.geometry().w0());
    for (x, y, c) in b.terms() {
        writeln!(
            out,
            "{} {} {} {} {:.16e} {:.16e}",
            x.n, x.m, y.n, y.m, c.re, c.im
        )
        .unwrap();
    }
    out
}

pub fn parse_biphoton_table(text: &str) -> Result<ParsedTable> {
    let mut expansion: Option<BiphotonExpansion> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let Some(b) = expansion.as_mut() else {
            if f.len() < 2 || f[0] != HEADER || f[1] != VERSION {
                return Err(Error::parse(line_no, "expected header `biphoton v1`"));
            }
            let mut w0 = None;
            for kv in &f[2..] {
                match kv.split_once('=') {
                    Some(("w0", v)) => w0 = Some(parse_num::<f64>(v, line_no, "w0")?),
                    _ => {
                        return Err(Error::parse(
                            line_no,
                            format!("unknown header field `{kv}`"),
                        ))
                    }
                }
            }
            let g = match w0 {
                Some(w) => {
                    BeamGeometry::with_waist(w).map_err(|e| Error::parse(line_no, e.to_string()))?
                }
                None => BeamGeometry::default(),
            };
            expansion = Some(BiphotonExpansion::new(g, PolarizationPair::psi_plus())?);
            continue;
        };
        if f.len() != 6 {
            return Err(Error::parse(
                line_no,
                format!("expected `j k s t re im`, got {} fields", f.len()),
            ));
        }
        let j = parse_num::<u32>(f[0], line_no, "j")?;
        let k = parse_num::<u32>(f[1], line_no, "k")?;
        let s = parse_num::<u32>(f[2], line_no, "s")?;
        let t = parse_num::<u32>(f[3], line_no, "t")?;
        let re = parse_num::<f64>(f[4], line_no, "re")?;
        let im = parse_num::<f64>(f[5], line_no, "im")?;
        b.add_term(
            HGIndex::new(j, k),
            HGIndex::new(s, t),
            Complex64::new(re, im),
        )
        .map_err(|e| Error::parse(line_no, e.to_string()))?;
    }
    let mut warnings = Vec::new();
    let expansion = match expansion {
        Some(b) => b,
        None => BiphotonExpansion::new(BeamGeometry::default(), PolarizationPair::psi_plus())?,
    };
    if expansion.is_empty() {
        warnings.push("biphoton table holds no terms".to_string());
    }
    Ok(ParsedTable {
        expansion,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::spdc_hg00;

    #[test]
    fn round_trip() {
        let b = spdc_hg00();
        let parsed = parse_biphoton_table(&format_biphoton_table(&b)).unwrap();
        assert_eq!(parsed.expansion, b);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn empty_file_warns() {
        for text in ["", "biphoton v1\n", "# nothing\n"] {
            let p = parse_biphoton_table(text).unwrap();
            assert!(p.expansion.is_empty());
            assert_eq!(p.warnings.len(), 1);
        }
    }

    #[test]
    fn malformed_line_named() {
        match parse_biphoton_table("biphoton v1\n0 0 0 0 1 0\n1 0 1 x 0.5 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_biphoton_table("bogus\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_biphoton_table("biphoton v1\n99 0 0 0 1 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
