//! Text dump of coefficient tables, one record per key:
//! `k1 .. kn | m1 .. mn | (j:qj)* | (j:qbarj)* | re im`.

use super::hamiltonian::{AlgebraError, TaylorHamiltonian};
use super::monomial::Monomial;
use crate::scalar::*;
use std::fmt::Write;

const HEADER: &str = "# taylor-hamiltonian";

pub fn write_dump<T: Real>(h: &TaylorHamiltonian<T>) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER} n={} J={} K={} D={}", h.n, h.modes, h.cutoff, h.degree_cap).unwrap();
    for (key, c) in h.iter() {
        let ks: Vec<String> = key.k.iter().map(|x| x.to_string()).collect();
        let ms: Vec<String> = key.m.iter().map(|x| x.to_string()).collect();
        let qs: Vec<String> = key.q_powers().iter().map(|(j, p)| format!("{j}:{p}")).collect();
        let qb: Vec<String> = key.qbar_powers().iter().map(|(j, p)| format!("{j}:{p}")).collect();
        writeln!(
            s,
            "{} | {} | {} | {} | {} {}",
            ks.join(" "),
            ms.join(" "),
            qs.join(" "),
            qb.join(" "),
            fmt_roundtrip(c.re),
            fmt_roundtrip(c.im)
        )
        .unwrap();
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str) -> Result<[usize; 4], AlgebraError> {
    let rest = line.strip_prefix(HEADER).ok_or_else(|| perr(1, "missing header"))?;
    let mut vals = [None; 4];
    for tok in rest.split_whitespace() {
        let (name, v) = tok.split_once('=').ok_or_else(|| perr(1, format!("bad header token {tok}")))?;
        let v: usize = v.parse().map_err(|_| perr(1, format!("bad header value {tok}")))?;
        let idx = match name {
            "n" => 0,
            "J" => 1,
            "K" => 2,
            "D" => 3,
            _ => return Err(perr(1, format!("unknown header field {name}"))),
        };
        vals[idx] = Some(v);
    }
    let mut out = [0; 4];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v.ok_or_else(|| perr(1, "incomplete header"))?;
    }
    Ok(out)
}

fn parse_powers(field: &str, line: usize) -> Result<Vec<u32>, AlgebraError> {
    let mut out = Vec::new();
    for tok in field.split_whitespace() {
        let (j, p) = tok.split_once(':').ok_or_else(|| perr(line, format!("bad power token {tok}")))?;
        let j: u32 = j.parse().map_err(|_| perr(line, format!("bad mode {tok}")))?;
        let p: u32 = p.parse().map_err(|_| perr(line, format!("bad power {tok}")))?;
        out.extend(std::iter::repeat(j).take(p as usize));
    }
    Ok(out)
}

pub fn read_dump<T: Real>(text: &str) -> Result<TaylorHamiltonian<T>, AlgebraError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let [n, jm, kk, d] = parse_header(header.trim())?;
    let mut h = TaylorHamiltonian::new(n, jm, kk, d);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 5 {
            return Err(perr(ln, "expected five '|'-separated fields"));
        }
        let k: Vec<i32> = fields[0]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad k entry {t}"))))
            .collect::<Result<_, _>>()?;
        let m: Vec<u32> = fields[1]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad m entry {t}"))))
            .collect::<Result<_, _>>()?;
        if k.len() != n || m.len() != n {
            return Err(perr(ln, "wrong number of angle entries"));
        }
        let q = parse_powers(fields[2], ln)?;
        let qb = parse_powers(fields[3], ln)?;
        let c: Vec<&str> = fields[4].split_whitespace().collect();
        if c.len() != 2 {
            return Err(perr(ln, "expected re im"));
        }
        let re: T = c[0].parse().map_err(|_| perr(ln, "bad real part"))?;
        let im: T = c[1].parse().map_err(|_| perr(ln, "bad imaginary part"))?;
        h.set(Monomial::new(&k, &m, &q, &qb), cplx(re, im)).map_err(|e| perr(ln, e.to_string()))?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut h = TaylorHamiltonian::<f64>::new(2, 5, 3, 4);
        h.add_term(Monomial::new(&[1, -3], &[1, 0], &[2], &[]), cplx(0.1 + 0.2, -1e-300)).unwrap();
        h.add_term(Monomial::new(&[0, 0], &[0, 0], &[5, 5, 1], &[4]), cplx(std::f64::consts::PI * 1e20, 7.0)).unwrap();
        h.add_term(Monomial::new(&[0, 2], &[0, 0], &[], &[]), cplx(-2.5e-17, 1.0 / 3.0)).unwrap();
        let text = write_dump(&h);
        let back: TaylorHamiltonian<f64> = read_dump(&text).unwrap();
        assert_eq!(back.n, 2);
        assert_eq!(back.cutoff, 3);
        assert_eq!(h.len(), back.len());
        for ((ka, ca), (kb, cb)) in h.iter().zip(back.iter()) {
            assert_eq!(ka, kb);
            assert_eq!(ca.re.to_bits(), cb.re.to_bits());
            assert_eq!(ca.im.to_bits(), cb.im.to_bits());
        }
        assert_eq!(write_dump(&back), text);
    }

    #[test]
    fn single_precision_round_trip() {
        let mut h = TaylorHamiltonian::<f32>::new(1, 2, 1, 2);
        h.add_term(Monomial::new(&[1], &[0], &[1], &[2]), cplx(0.1f32, 3.3e-9)).unwrap();
        let back: TaylorHamiltonian<f32> = read_dump(&write_dump(&h)).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump::<f64>("nonsense").is_err());
        assert!(read_dump::<f64>("# taylor-hamiltonian n=1 J=1 K=1 D=2\n1 | 0 | | re im").is_err());
        assert!(read_dump::<f64>("# taylor-hamiltonian n=1 J=1 K=1 D=2\n2 | 0 | | | 1 0").is_err());
    }
}
