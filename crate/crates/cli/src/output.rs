//! Plot-ready CSV files.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), `-inf`/`inf`
//! for infinities and an empty field for undefined values. Lines end in `\n`.

use std::fs::File;
use std::io;
use std::path::Path;

use oeb_core::bounds::BoundsTrace;
use oeb_core::{ComparisonReport, IterationTrace, RateReport};

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> io::Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(File::create(path)?))
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Writes a header and rows of already formatted fields.
pub fn write_rows<I>(path: &Path, header: &[String], rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

fn coord_headers(name: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![name.to_string()]
    } else {
        (0..dim).map(|i| format!("{name}_{i}")).collect()
    }
}

/// `n, x_n, y_n, err_n, log10_err_n`; vector iterates get one column per
/// coordinate and `y_n` is blank where it does not exist.
pub fn write_trace(path: &Path, t: &IterationTrace) -> io::Result<()> {
    let dim = t.x0.len();
    let mut header = vec!["n".to_string()];
    header.extend(coord_headers("x_n", dim));
    header.extend(coord_headers("y_n", dim));
    header.push("err_n".into());
    header.push("log10_err_n".into());
    let rows = (0..t.x.len()).map(|n| {
        let mut row = vec![n.to_string()];
        row.extend(t.x[n].iter().map(|v| fmt_f64(*v)));
        match t.y.get(n) {
            Some(y) => row.extend(y.iter().map(|v| fmt_f64(*v))),
            None => row.extend(std::iter::repeat(String::new()).take(dim)),
        }
        row.push(fmt_f64(t.err[n]));
        row.push(fmt_f64(t.log10_err[n]));
        row
    });
    write_rows(path, &header, rows)
}

/// `n, U_n, L_n, u_factor, l_factor, A_k`; `L_n` is blank when the lower
/// bound is undefined and `A_k` for schemes without it.
pub fn write_bounds(path: &Path, b: &BoundsTrace) -> io::Result<()> {
    let header: Vec<String> = ["n", "U_n", "L_n", "u_factor", "l_factor", "A_k"].map(String::from).to_vec();
    let rows = (0..b.upper.len()).map(|n| {
        vec![
            n.to_string(),
            fmt_f64(b.upper[n]),
            opt(b.lower.as_ref().map(|l| l[n])),
            opt(b.u_factors.get(n).copied()),
            opt(b.l_factors.get(n).copied()),
            opt(b.a_aux.get(n).copied()),
        ]
    });
    write_rows(path, &header, rows)
}

fn flags(r: &RateReport) -> String {
    let h = &r.hypotheses;
    let mut f = Vec::new();
    if h.cond_ra_1 {
        f.push("epsilon-positive");
    }
    if h.remark_delta {
        f.push("delta-branch");
    }
    if h.cond_ra_im {
        f.push("epsilon12-positive");
    }
    if r.beta_max_guaranteed.is_none() {
        f.push("no-beta-max");
    }
    f.join(";")
}

/// `n, err_next, denom, sigma_n, beta_min, beta_max_guaranteed,
/// beta_max_paper, flags`.
pub fn write_rate(path: &Path, r: &RateReport) -> io::Result<()> {
    let header: Vec<String> = [
        "n",
        "err_next",
        "denom",
        "sigma_n",
        "beta_min",
        "beta_max_guaranteed",
        "beta_max_paper",
        "flags",
    ]
    .map(String::from)
    .to_vec();
    let fl = flags(r);
    let rows = (0..r.sigma.len()).map(|n| {
        vec![
            n.to_string(),
            fmt_f64(r.err_next[n]),
            fmt_f64(r.denominator[n]),
            opt(r.sigma[n]),
            fmt_f64(r.beta_min),
            opt(r.beta_max_guaranteed),
            opt(r.beta_max_paper),
            fl.clone(),
        ]
    });
    write_rows(path, &header, rows)
}

/// `n, err_I, err_IM, ratio, log10_ratio`.
pub fn write_compare(path: &Path, c: &ComparisonReport) -> io::Result<()> {
    let header: Vec<String> = ["n", "err_I", "err_IM", "ratio", "log10_ratio"].map(String::from).to_vec();
    let rows = (0..c.ratio.len()).map(|n| {
        vec![
            n.to_string(),
            fmt_f64(c.err_i[n]),
            fmt_f64(c.err_im[n]),
            fmt_f64(c.ratio[n]),
            fmt_f64(c.log10_ratio[n]),
        ]
    });
    write_rows(path, &header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -2.5e-300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(f64::NAN), "");
    }
}
