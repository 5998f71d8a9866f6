//! Line-oriented text form of a [`ConeProgram`]:
//!
//! ```text
//! CONEPROG v1
//! VAR 2
//! OBJ 0 1e0
//! ROW 0 0 -1e0
//! RHS 0 0e0
//! CONE nonneg 0 1
//! ```
//!
//! Values are written in shortest round-trip exponent form, so parsing a
//! dump reproduces the program bit for bit. `RHS` lines are written only
//! for nonzero entries. Cone lines are ordered by start row.

use std::fmt::Write;

use super::program::{ConeBlock, ConeKind, ConeProgram};
use crate::error::{Error, Result};

const HEADER: &str = "CONEPROG v1";

pub fn to_text(p: &ConeProgram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "VAR {}", p.n_vars);
    for &(c, v) in &p.objective {
        let _ = writeln!(s, "OBJ {c} {v:e}");
    }
    for &(r, c, v) in &p.entries {
        let _ = writeln!(s, "ROW {r} {c} {v:e}");
    }
    for (r, &v) in p.rhs.iter().enumerate() {
        if v.to_bits() != 0 {
            let _ = writeln!(s, "RHS {r} {v:e}");
        }
    }
    for c in &p.cones {
        let _ = writeln!(s, "CONE {} {} {}", c.kind.token(), c.start, c.len);
    }
    s
}

fn side_of(len: usize) -> Option<usize> {
    let side = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (side * (side + 1) / 2 == len).then_some(side)
}

pub fn from_text(text: &str) -> Result<ConeProgram> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => return Err(Error::Parse(format!("line 1: expected '{HEADER}'"))),
    }
    let mut p = ConeProgram::default();
    let mut rhs: Vec<(usize, f64)> = Vec::new();
    let mut saw_var = false;
    for (no, line) in lines {
        let bad = |what: &str| Error::Parse(format!("line {}: {what}: '{line}'", no + 1));
        let tok: Vec<&str> = line.split_whitespace().collect();
        let int = |k: usize| tok.get(k).and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| bad("bad integer"));
        let num = |k: usize| tok.get(k).and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| bad("bad number"));
        let arity = |n: usize| if tok.len() == n { Ok(()) } else { Err(bad("wrong field count")) };
        match tok[0] {
            "VAR" => {
                arity(2)?;
                p.n_vars = int(1)?;
                saw_var = true;
            }
            "OBJ" => {
                arity(3)?;
                p.objective.push((int(1)?, num(2)?));
            }
            "ROW" => {
                arity(4)?;
                p.entries.push((int(1)?, int(2)?, num(3)?));
            }
            "RHS" => {
                arity(3)?;
                rhs.push((int(1)?, num(2)?));
            }
            "CONE" => {
                arity(4)?;
                let (start, len) = (int(2)?, int(3)?);
                let kind = match tok[1] {
                    "zero" => ConeKind::Zero,
                    "nonneg" => ConeKind::Nonneg,
                    "soc" => ConeKind::SecondOrder,
                    "psd" => ConeKind::Psd { side: side_of(len).ok_or_else(|| bad("psd length is not triangular"))? },
                    _ => return Err(bad("unknown cone kind")),
                };
                p.cones.push(ConeBlock { kind, start, len });
            }
            _ => return Err(bad("unknown record")),
        }
    }
    if !saw_var {
        return Err(Error::Parse("missing VAR record".into()));
    }
    let n_rows = p.cones.iter().map(|c| c.start + c.len).max().unwrap_or(0);
    p.rhs = vec![0.0; n_rows];
    for (r, v) in rhs {
        *p.rhs.get_mut(r).ok_or_else(|| Error::Parse(format!("RHS row {r} outside the cones")))? = v;
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn value() -> impl Strategy<Value = f64> {
        prop_oneof![
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            (-8i32..8, 1i32..64).prop_map(|(a, b)| a as f64 / b as f64),
        ]
    }

    fn program() -> impl Strategy<Value = ConeProgram> {
        (1usize..6, prop::collection::vec((0usize..4, 1usize..4), 1..5)).prop_flat_map(|(n_vars, blocks)| {
            let mut cones = Vec::new();
            let mut start = 0;
            for (k, size) in blocks {
                let kind = match k {
                    0 => ConeKind::Zero,
                    1 => ConeKind::Nonneg,
                    2 => ConeKind::SecondOrder,
                    _ => ConeKind::Psd { side: size },
                };
                let len = if let ConeKind::Psd { side } = kind { side * (side + 1) / 2 } else { size };
                cones.push(ConeBlock { kind, start, len });
                start += len;
            }
            let rows = start;
            (
                prop::collection::vec((0..n_vars, value()), 0..6),
                prop::collection::vec((0..rows, 0..n_vars, value()), 0..20),
                prop::collection::vec(value(), rows),
            )
                .prop_map(move |(objective, entries, rhs)| ConeProgram {
                    n_vars,
                    objective,
                    entries,
                    rhs,
                    cones: cones.clone(),
                })
        })
    }

    fn bits(p: &ConeProgram) -> (Vec<(usize, u64)>, Vec<(usize, usize, u64)>, Vec<u64>) {
        (
            p.objective.iter().map(|&(c, v)| (c, v.to_bits())).collect(),
            p.entries.iter().map(|&(r, c, v)| (r, c, v.to_bits())).collect(),
            p.rhs.iter().map(|v| v.to_bits()).collect(),
        )
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(p in program()) {
            let q = from_text(&to_text(&p)).unwrap();
            prop_assert_eq!(q.n_vars, p.n_vars);
            prop_assert_eq!(&q.cones, &p.cones);
            prop_assert_eq!(bits(&q), bits(&p));
        }
    }

    #[test]
    fn golden() {
        let mut p = ConeProgram::new(1);
        p.objective.push((0, 1.0));
        p.push_block(ConeKind::Nonneg, vec![(vec![(0, -1.0)], 0.0)]);
        p.push_block(ConeKind::Psd { side: 2 }, vec![(vec![(0, -1.0)], -1.0), (vec![], 0.0), (vec![(0, -1.0)], -2.5)]);
        let text = to_text(&p);
        assert_eq!(
            text,
            "CONEPROG v1\nVAR 1\nOBJ 0 1e0\nROW 0 0 -1e0\nROW 1 0 -1e0\nROW 3 0 -1e0\nRHS 1 -1e0\nRHS 3 -2.5e0\nCONE nonneg 0 1\nCONE psd 1 3\n"
        );
        assert_eq!(from_text(&text).unwrap(), p);
    }

    #[test]
    fn malformed_input() {
        assert!(from_text("VAR 1\n").is_err());
        assert!(from_text("CONEPROG v1\nVAR 1\nCONE psd 0 2\n").is_err());
        assert!(from_text("CONEPROG v1\nVAR 1\nROW 0 0 x\nCONE zero 0 1\n").is_err());
        assert!(from_text("CONEPROG v1\nVAR 1\nROW 5 0 1\nCONE zero 0 1\n").is_err());
    }
}
