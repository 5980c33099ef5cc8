//! CSV input and output. Numbers are written in shortest round-trip form, so
//! a write followed by a read reproduces every entry exactly.
//!
//! Matrix files have no header and hold `re,im` pairs per column. All writes
//! go to a temporary sibling first and are renamed into place.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{C64, Matrix};
use crate::spectral::{DecayTable, SpectralReport};
use crate::symbols::{GridSymbol, SymbolGrid};

/// Shortest decimal that parses back to `x`; exponent form outside
/// `[1e-5, 1e16)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn matrix_to_csv(m: &Matrix) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.rows() {
        let rec: Vec<String> = m.row(i).iter().flat_map(|z| [format_f64(z.re), format_f64(z.im)]).collect();
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn matrix_from_csv(reader: impl Read) -> Result<Matrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() % 2 != 0 {
            return Err(Error::Parse(format!("row {} has an odd number of fields", rows + 1)));
        }
        let c = rec.len() / 2;
        if *cols.get_or_insert(c) != c {
            return Err(Error::Parse(format!("row {} has {c} entries, expected {}", rows + 1, cols.unwrap())));
        }
        for k in 0..c {
            data.push(C64::new(parse_f64(&rec[2 * k])?, parse_f64(&rec[2 * k + 1])?));
        }
        rows += 1;
    }
    Matrix::from_vec(rows, cols.unwrap_or(0), data)
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    write_atomic(path, &matrix_to_csv(m)?)
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    matrix_from_csv(fs::File::open(path)?)
}

fn grid_header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = if d == 1 {
        vec!["x".into(), "theta".into()]
    } else {
        (1..=d).map(|l| format!("x{l}")).chain((1..=d).map(|l| format!("theta{l}"))).collect()
    };
    h.extend(["block_row", "block_col", "re", "im"].map(String::from));
    h
}

/// One line per node and block entry.
pub fn grid_symbol_to_csv(g: &GridSymbol) -> Result<Vec<u8>> {
    let d = g.d();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(grid_header(d))?;
    for (idx, block) in g.values.iter().enumerate() {
        let (x, t) = g.grid.node(idx);
        let coords: Vec<String> = x.iter().chain(&t).map(|&v| format_f64(v)).collect();
        for i in 0..g.r {
            for j in 0..g.r {
                let z = block[(i, j)];
                let mut rec = coords.clone();
                rec.extend([i.to_string(), j.to_string(), format_f64(z.re), format_f64(z.im)]);
                w.write_record(&rec)?;
            }
        }
    }
    finish(w)
}

pub fn grid_symbol_from_csv(reader: impl Read) -> Result<GridSymbol> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    let d = (header.len().saturating_sub(4)) / 2;
    if d == 0 || header.iter().collect::<Vec<_>>() != grid_header(d) {
        return Err(Error::Parse("unrecognized grid symbol header".into()));
    }
    let mut rows: Vec<(Vec<f64>, usize, usize, C64)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let coords = (0..2 * d).map(|k| parse_f64(&rec[k])).collect::<Result<Vec<_>>>()?;
        let bi = rec[2 * d].parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
        let bj = rec[2 * d + 1].parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
        let z = C64::new(parse_f64(&rec[2 * d + 2])?, parse_f64(&rec[2 * d + 3])?);
        rows.push((coords, bi, bj, z));
    }
    let r_order = rows.iter().map(|x| x.1.max(x.2) + 1).max().unwrap_or(0);
    if r_order == 0 || !rows.len().is_multiple_of(r_order * r_order) {
        return Err(Error::Parse("grid symbol file has an incomplete block".into()));
    }
    let distinct = |k: usize| {
        let mut v: Vec<f64> = rows.iter().map(|x| x.0[k]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    let grid = SymbolGrid::new((0..d).map(distinct).collect(), (d..2 * d).map(distinct).collect())?;
    let per = r_order * r_order;
    if grid.node_count() * per != rows.len() {
        return Err(Error::Parse("grid symbol nodes do not form a full grid".into()));
    }
    let mut values = Vec::with_capacity(grid.node_count());
    for (idx, chunk) in rows.chunks(per).enumerate() {
        let (x, t) = grid.node(idx);
        let expect: Vec<f64> = x.into_iter().chain(t).collect();
        let mut b = Matrix::zeros(r_order, r_order);
        for (c, bi, bj, z) in chunk {
            if c.iter().zip(&expect).any(|(a, e)| (a - e).abs() > 1e-12) {
                return Err(Error::Parse(format!("node {idx} is not on the midpoint grid")));
            }
            b[(*bi, *bj)] = *z;
        }
        values.push(b);
    }
    let nonconverged = vec![false; values.len()];
    Ok(GridSymbol { r: r_order, grid, values, nonconverged })
}

pub fn write_grid_symbol_csv(path: &Path, g: &GridSymbol) -> Result<()> {
    write_atomic(path, &grid_symbol_to_csv(g)?)
}

pub fn read_grid_symbol_csv(path: &Path) -> Result<GridSymbol> {
    grid_symbol_from_csv(fs::File::open(path)?)
}

/// `n,lambda_min,lambda_max,sup_dist,l1_dist,frac_below`.
pub fn reports_to_csv(reports: &[SpectralReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "lambda_min", "lambda_max", "sup_dist", "l1_dist", "frac_below"])?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            format_f64(r.lambda_min),
            format_f64(r.lambda_max),
            format_f64(r.sup_distance),
            format_f64(r.l1_distance),
            format_f64(r.below_threshold_fraction),
        ])?;
    }
    finish(w)
}

/// `eigenvalue,symbol_quantile` per index, for plotting.
pub fn overlay_to_csv(r: &SpectralReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eigenvalue", "symbol_quantile"])?;
    for (l, q) in r.sorted_eigenvalues.iter().zip(&r.symbol_quantiles) {
        w.write_record([format_f64(*l), format_f64(*q)])?;
    }
    finish(w)
}

/// `n,value,tau,alpha`; the last row and flagged rows leave `alpha` empty.
pub fn decay_to_csv(t: &DecayTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "value", "tau", "alpha"])?;
    for row in &t.rows {
        w.write_record([
            row.n.to_string(),
            format_f64(row.value),
            format_f64(row.tau),
            row.alpha.map(format_f64).unwrap_or_default(),
        ])?;
    }
    finish(w)
}

pub fn write_reports_csv(path: &Path, reports: &[SpectralReport]) -> Result<()> {
    write_atomic(path, &reports_to_csv(reports)?)
}

pub fn write_overlay_csv(path: &Path, r: &SpectralReport) -> Result<()> {
    write_atomic(path, &overlay_to_csv(r)?)
}

pub fn write_decay_csv(path: &Path, t: &DecayTable) -> Result<()> {
    write_atomic(path, &decay_to_csv(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{decay_table_from_values, Extremum, LogBase};
    use crate::symbols::{sample_symbol, SymbolFn};

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, -2.5e-7, 6.02e23, 12345.678, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(2.0), "2");
        assert_eq!(format_f64(1e-7), "1e-7");
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = Matrix::from_fn(3, 4, |i, j| C64::new((i as f64 + 0.1).sin() * 1e-9, (j as f64 / 7.0).exp()));
        let back = matrix_from_csv(&matrix_to_csv(&m).unwrap()[..]).unwrap();
        assert_eq!(back, m);
        let text = String::from_utf8(matrix_to_csv(&Matrix::identity(2)).unwrap()).unwrap();
        assert_eq!(text, "1,0,0,0\n0,0,1,0\n");
    }

    #[test]
    fn ragged_matrix_rejected() {
        assert!(matrix_from_csv("1,0,2,0\n3,0\n".as_bytes()).is_err());
        assert!(matrix_from_csv("1,0,2\n".as_bytes()).is_err());
        assert!(matrix_from_csv("1,0,x,0\n".as_bytes()).is_err());
    }

    #[test]
    fn grid_symbol_round_trip() {
        let s = SymbolFn::new(2, 2, |x, t| {
            Ok(Matrix::from_fn(2, 2, |i, j| C64::new(x[0] + t[1] * (i + j) as f64, if i == j { 0.0 } else { x[1] })))
        });
        let g = sample_symbol(&s, &SymbolGrid::new(vec![3, 2], vec![2, 4]).unwrap()).unwrap();
        let bytes = grid_symbol_to_csv(&g).unwrap();
        assert!(String::from_utf8_lossy(&bytes).starts_with("x1,x2,theta1,theta2,block_row,block_col,re,im\n"));
        assert_eq!(grid_symbol_from_csv(&bytes[..]).unwrap(), g);
    }

    #[test]
    fn report_and_decay_headers() {
        let t = decay_table_from_values(&[4, 8], &[0.5, 0.25], 0.0, Extremum::Min, LogBase::Base2).unwrap();
        let s = String::from_utf8(decay_to_csv(&t).unwrap()).unwrap();
        assert_eq!(s, "n,value,tau,alpha\n4,0.5,0.5,1\n8,0.25,0.25,\n");
        let s = String::from_utf8(reports_to_csv(&[]).unwrap()).unwrap();
        assert_eq!(s, "n,lambda_min,lambda_max,sup_dist,l1_dist,frac_below\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/m.csv");
        write_matrix_csv(&p, &Matrix::identity(2)).unwrap();
        write_matrix_csv(&p, &Matrix::identity(3)).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), Matrix::identity(3));
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
