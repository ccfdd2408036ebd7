use std::fmt::Write as _;
use std::io::Write;

use super::fit::Fit;
use super::study::{ConvergenceRecord, EigenError};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "run,dofs,h,abscissa,eig_index,ref_value,computed_value,rel_error,walltime_s";

fn row_fields(r: &ConvergenceRecord, e: &EigenError) -> [String; 9] {
    // `{:?}` on f64 is the shortest representation that parses back exactly
    [
        r.run.to_string(),
        r.dofs.to_string(),
        format!("{:?}", r.h),
        format!("{:?}", r.abscissa),
        e.index.to_string(),
        format!("{:?}", e.reference),
        format!("{:?}", e.computed),
        format!("{:?}", e.rel_error),
        format!("{:?}", r.walltime_s),
    ]
}

/// Writes the rows of one record, one per tracked eigenvalue, and flushes.
pub fn write_csv_rows<W: Write>(w: &mut csv::Writer<W>, r: &ConvergenceRecord) -> Result<()> {
    for e in &r.errors {
        w.write_record(row_fields(r, e)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV writer with the header already written.
pub fn csv_writer<W: Write>(inner: W) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(inner);
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    Ok(w)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub fn emit_csv(records: &[ConvergenceRecord]) -> String {
    let mut w = csv_writer(Vec::new()).expect("in-memory write");
    for r in records {
        write_csv_rows(&mut w, r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii")
}

pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_error)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: "missing or unexpected CSV header".into(),
        });
    }
    let mut out: Vec<ConvergenceRecord> = Vec::new();
    for row in rdr.records() {
        let f = row.map_err(csv_error)?;
        let line = f.position().map_or(0, |p| p.line() as usize);
        let fail = |k: usize| Error::Parse {
            line,
            reason: format!("field {} is malformed", k + 1),
        };
        let int = |k: usize| f[k].trim().parse::<usize>().map_err(|_| fail(k));
        let num = |k: usize| f[k].trim().parse::<f64>().map_err(|_| fail(k));
        let run = int(0)?;
        let entry = EigenError {
            index: int(4)?,
            reference: num(5)?,
            computed: num(6)?,
            rel_error: num(7)?,
        };
        match out.last_mut() {
            Some(r) if r.run == run => r.errors.push(entry),
            _ => out.push(ConvergenceRecord {
                run,
                dofs: int(1)?,
                h: num(2)?,
                abscissa: num(3)?,
                errors: vec![entry],
                walltime_s: num(8)?,
                degrees: None,
            }),
        }
    }
    Ok(out)
}

/// Human-readable table plus one line per fit.
pub fn summary(title: &str, records: &[ConvergenceRecord], fits: &[Fit]) -> String {
    let mut s = String::new();
    writeln!(s, "{title}").unwrap();
    let n_eigs = records.first().map_or(0, |r| r.errors.len());
    write!(
        s,
        "{:>4} {:>9} {:>11} {:>11} {:>7}",
        "run", "dofs", "h", "abscissa", "p"
    )
    .unwrap();
    for k in 1..=n_eigs {
        write!(s, " {:>11}", format!("err{k}")).unwrap();
    }
    writeln!(s).unwrap();
    for r in records {
        let p = r.degrees.map_or("-".to_string(), |(lo, hi)| {
            if lo == hi {
                lo.to_string()
            } else {
                format!("{lo}-{hi}")
            }
        });
        write!(
            s,
            "{:>4} {:>9} {:>11.4e} {:>11.4e} {:>7}",
            r.run, r.dofs, r.h, r.abscissa, p
        )
        .unwrap();
        for e in &r.errors {
            write!(s, " {:>11.4e}", e.rel_error).unwrap();
        }
        writeln!(s).unwrap();
    }
    for f in fits {
        writeln!(
            s,
            "fit eig {}: {} rate {:.4} (slope {:.4}, R^2 {:.4}, {} points)",
            f.eig_index, f.model, f.rate, f.slope, f.r_squared, f.n_points
        )
        .unwrap();
    }
    s
}
