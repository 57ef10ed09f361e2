//! CSV and JSON emitters. Floats are written with 17 significant digits so
//! that values round-trip exactly.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::density_flow::{DensityGrid, TransportResidual};
use crate::error::{Error, Result};
use crate::hopf::Characteristic;
use crate::measure::{Atom, EmpiricalMeasure};
use crate::polycore::RootSet;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_roots_csv(out: &mut impl Write, roots: &RootSet) -> Result<()> {
    writeln!(out, "re,im,multiplicity")?;
    for r in roots.distinct() {
        writeln!(out, "{},{},{}", fmt_float(r.z.re), fmt_float(r.z.im), r.multiplicity)?;
    }
    Ok(())
}

pub fn write_empirical_csv(out: &mut impl Write, m: &EmpiricalMeasure) -> Result<()> {
    writeln!(out, "re,im,weight")?;
    for a in m.atoms() {
        writeln!(out, "{},{},{}", fmt_float(a.z.re), fmt_float(a.z.im), fmt_float(a.weight))?;
    }
    Ok(())
}

fn parse_field(field: Option<&str>, line: usize) -> Result<f64> {
    let text = field.ok_or_else(|| Error::Parse(format!("line {line}: missing column")))?;
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: not a number: {text:?}")))
}

/// Reads `re,im,weight` (empirical) or `re,im,multiplicity` (roots, weights
/// normalized to unit mass) tables.
pub fn read_empirical_csv(input: impl BufRead) -> Result<EmpiricalMeasure> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))??;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    let counts = match columns.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["re", "im", "weight"] => false,
        ["re", "im", "multiplicity"] => true,
        _ => return Err(Error::Parse(format!("unexpected header {header:?}"))),
    };
    let mut atoms = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let re = parse_field(fields.next(), i + 2)?;
        let im = parse_field(fields.next(), i + 2)?;
        let w = parse_field(fields.next(), i + 2)?;
        atoms.push(Atom::new(Complex64::new(re, im), w));
    }
    if counts {
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        for a in &mut atoms {
            a.weight /= total;
        }
    }
    EmpiricalMeasure::new(atoms)
}

/// One solved grid point of the Hopf equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HopfRow {
    pub z: Complex64,
    pub t: f64,
    pub solution: Characteristic,
}

pub fn write_hopf_csv(out: &mut impl Write, rows: &[HopfRow]) -> Result<()> {
    writeln!(out, "re_z,im_z,t,re_u,im_u,residual,iterations")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(r.z.re),
            fmt_float(r.z.im),
            fmt_float(r.t),
            fmt_float(r.solution.u.re),
            fmt_float(r.solution.u.im),
            fmt_float(r.solution.residual),
            r.solution.iterations
        )?;
    }
    Ok(())
}

/// Rows `x,t,f,h,residual`; the residual column is empty where undefined.
pub fn write_density_csv(out: &mut impl Write, g: &DensityGrid, residual: Option<&TransportResidual>) -> Result<()> {
    writeln!(out, "x,t,f,h,residual")?;
    for (it, t) in g.t.iter().enumerate() {
        for (ix, x) in g.x.iter().enumerate() {
            let r = residual
                .and_then(|r| r.values[it][ix])
                .map(fmt_float)
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(*x),
                fmt_float(*t),
                fmt_float(g.f[it][ix]),
                fmt_float(g.h[it][ix]),
                r
            )?;
        }
    }
    Ok(())
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_flow::uniform_grid;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empirical_round_trip() {
        let m = EmpiricalMeasure::new(vec![
            Atom::new(Complex64::new(0.1, -0.2), 0.25),
            Atom::new(Complex64::new(1.0 / 3.0, 0.0), 0.75),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_empirical_csv(&mut buf, &m).unwrap();
        let back = read_empirical_csv(buf.as_slice()).unwrap();
        assert_eq!(back.atoms(), m.atoms());
    }

    #[test]
    fn roots_table_reads_as_normalized_measure() {
        let roots = RootSet::from_real([-1.0, -1.0, 2.0, 0.5]);
        let mut buf = Vec::new();
        write_roots_csv(&mut buf, &roots).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("re,im,multiplicity\n"));
        assert_eq!(text.lines().count(), 4);
        let m = read_empirical_csv(buf.as_slice()).unwrap();
        let w: Vec<f64> = m.atoms().iter().map(|a| a.weight).collect();
        assert_eq!(w, vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(read_empirical_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(read_empirical_csv("re,im,weight\n1,x,3\n".as_bytes()).is_err());
        assert!(read_empirical_csv("".as_bytes()).is_err());
    }

    #[test]
    fn density_table_shape() {
        let x = uniform_grid(0.0, 1.0, 3);
        let t = uniform_grid(0.1, 0.2, 2);
        let g = DensityGrid::from_fn(&x, &t, |x, _| x, |_, _| 0.0);
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &g, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = to_sorted_json(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }
}
