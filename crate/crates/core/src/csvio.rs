//! CSV interchange: rate tables, built sequences and form sequences.

use std::io::{Read, Write};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::multiform::{FormSequence, LinearForm, Provenance};
use crate::rational::{fmt_rational, parse_int, parse_rational};
use crate::seq::{ApproxSequenceEntry, RateRow};

fn index(s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| Error::Parse {
        what: "index",
        input: s.to_string(),
    })
}

/// Header `n,Q,eps`.
pub fn read_rate_table(r: impl Read) -> Result<Vec<RateRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let cols: Vec<&str> = h.iter().map(str::trim).collect();
    if cols != ["n", "Q", "eps"] {
        return Err(Error::pre(format!(
            "rate table header must be n,Q,eps, got {}",
            cols.join(",")
        )));
    }
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(RateRow {
                n: index(&rec[0])?,
                q: parse_rational(&rec[1])?,
                eps: parse_rational(&rec[2])?,
            })
        })
        .collect()
}

pub fn write_rate_table(w: impl Write, rows: &[RateRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "Q", "eps"])?;
    for r in rows {
        wr.write_record([r.n.to_string(), fmt_rational(&r.q), fmt_rational(&r.eps)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_entries(w: impl Write, entries: &[ApproxSequenceEntry]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "n", "u", "v", "case", "ratio_u", "res_lo", "res_hi", "eta", "in_band",
    ])?;
    for e in entries {
        let res = e.residual.round_out(128);
        wr.write_record([
            e.n.to_string(),
            e.u.to_string(),
            e.v.to_string(),
            e.case_taken.as_str().to_string(),
            fmt_rational(&e.ratio_u),
            fmt_rational(&res.lo),
            fmt_rational(&res.hi),
            fmt_rational(&e.eta),
            e.in_band.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Header `n,l0,...,lr`. Also takes any CSV with `n,u,v` columns, read as forms `(-v, u)`.
pub fn read_forms(r: impl Read, provenance: Provenance) -> Result<FormSequence> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let cols: Vec<&str> = h.iter().map(str::trim).collect();
    let pos = |name: &str| cols.iter().position(|c| *c == name);
    let n_col = pos("n").ok_or_else(|| Error::pre("form CSV needs an n column"))?;
    let l_cols: Vec<usize> = (0..).map_while(|i| pos(&format!("l{i}"))).collect();
    let mut forms = Vec::new();
    if l_cols.len() >= 2 {
        for rec in rd.records() {
            let rec = rec?;
            let coeffs = l_cols
                .iter()
                .map(|&c| parse_int(&rec[c]))
                .collect::<Result<Vec<BigInt>>>()?;
            forms.push((index(&rec[n_col])?, LinearForm::new(coeffs)?));
        }
    } else if let (Some(u), Some(v)) = (pos("u"), pos("v")) {
        for rec in rd.records() {
            let rec = rec?;
            let coeffs = vec![-parse_int(&rec[v])?, parse_int(&rec[u])?];
            forms.push((index(&rec[n_col])?, LinearForm::new(coeffs)?));
        }
    } else {
        return Err(Error::pre("form CSV needs columns l0,l1,... or u,v"));
    }
    Ok(FormSequence::new(forms, provenance))
}

pub fn write_forms(w: impl Write, seq: &FormSequence) -> Result<()> {
    let width = seq
        .forms
        .iter()
        .map(|(_, f)| f.coeffs.len())
        .max()
        .unwrap_or(2);
    if seq.forms.iter().any(|(_, f)| f.coeffs.len() != width) {
        return Err(Error::pre("forms of mixed length"));
    }
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["n".to_string()];
    header.extend((0..width).map(|i| format!("l{i}")));
    wr.write_record(&header)?;
    for (n, f) in &seq.forms {
        let mut row = vec![n.to_string()];
        row.extend(f.coeffs.iter().map(|c| c.to_string()));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// One integer column, by header name.
pub fn read_int_column(r: impl Read, name: &str) -> Result<Vec<BigInt>> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let col = h
        .iter()
        .position(|c| c.trim() == name)
        .ok_or_else(|| Error::pre(format!("CSV has no {name} column")))?;
    rd.records().map(|rec| parse_int(&rec?[col])).collect()
}
