//! Plain-text matrix interchange following Matrix Market conventions.
//!
//! Readers accept the `array` and `coordinate` formats for `real` and
//! `complex` fields (`general` and `symmetric` symmetry). The writer emits
//! dense `array ... general` files with full-precision floats so that a
//! write/read round trip is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// A parsed matrix file: real or complex entries.
#[derive(Debug, Clone)]
pub enum MatrixData {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

impl MatrixData {
    pub fn nrows(&self) -> usize {
        match self {
            MatrixData::Real(m) => m.nrows(),
            MatrixData::Complex(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            MatrixData::Real(m) => m.ncols(),
            MatrixData::Complex(m) => m.ncols(),
        }
    }

    /// The real matrix, or an error for complex data.
    pub fn into_real(self) -> Result<DMatrix<f64>> {
        match self {
            MatrixData::Real(m) => Ok(m),
            MatrixData::Complex(_) => Err(Error::Parse {
                line: 1,
                msg: "expected a real matrix, file holds complex entries".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(Format, Field, Symmetry)> {
    let mut words = line.split_whitespace();
    if words.next() != Some("%%MatrixMarket") {
        return Err(parse_err(1, "header must start with %%MatrixMarket"));
    }
    if words.next() != Some("matrix") {
        return Err(parse_err(1, "header object must be \"matrix\""));
    }
    let fmt = match words.next() {
        Some("array") => Format::Array,
        Some("coordinate") => Format::Coordinate,
        other => {
            return Err(parse_err(
                1,
                format!("unsupported format {other:?}; expected array or coordinate"),
            ))
        }
    };
    let field = match words.next() {
        Some("real") => Field::Real,
        Some("complex") => Field::Complex,
        other => {
            return Err(parse_err(
                1,
                format!("unsupported field {other:?}; expected real or complex"),
            ))
        }
    };
    let sym = match words.next() {
        Some("general") | None => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        other => {
            return Err(parse_err(
                1,
                format!("unsupported symmetry {other:?}; expected general or symmetric"),
            ))
        }
    };
    Ok((fmt, field, sym))
}

struct Lines {
    inner: std::iter::Enumerate<std::io::Lines<BufReader<File>>>,
}

impl Lines {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(Lines {
            inner: BufReader::new(file).lines().enumerate(),
        })
    }

    /// Next non-comment, non-empty line with its 1-based number.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        for (idx, line) in self.inner.by_ref() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || (idx > 0 && trimmed.starts_with('%')) {
                continue;
            }
            return Ok(Some((idx + 1, trimmed.to_string())));
        }
        Ok(None)
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

/// Read a matrix file (array or coordinate, real or complex).
pub fn read_matrix_data(path: impl AsRef<Path>) -> Result<MatrixData> {
    let path = path.as_ref();
    let mut lines = Lines::open(path)?;
    let (hline, header) = lines
        .next_data()?
        .ok_or_else(|| parse_err(1, "empty file"))?;
    if hline != 1 {
        return Err(parse_err(hline, "header must be the first line"));
    }
    let (fmt, field, sym) = parse_header(&header)?;

    let (sline, size) = lines
        .next_data()?
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let toks: Vec<&str> = size.split_whitespace().collect();
    match fmt {
        Format::Array => {
            if toks.len() != 2 {
                return Err(parse_err(sline, "array size line must be \"rows cols\""));
            }
            let nrows = parse_usize(toks[0], sline, "row count")?;
            let ncols = parse_usize(toks[1], sline, "column count")?;
            if nrows == 0 || ncols == 0 {
                return Err(parse_err(sline, "matrix dimensions must be positive"));
            }
            let total = nrows * ncols;
            let mut re = Vec::with_capacity(total);
            let mut im = Vec::with_capacity(total);
            let mut last_line = sline;
            while re.len() < total {
                let (lno, data) = lines
                    .next_data()?
                    .ok_or_else(|| {
                        parse_err(
                            last_line,
                            format!("expected {} entries, file ended after {}", total, re.len()),
                        )
                    })?;
                last_line = lno;
                let t: Vec<&str> = data.split_whitespace().collect();
                match field {
                    Field::Real => {
                        if t.len() != 1 {
                            return Err(parse_err(lno, "array real entries are one value per line"));
                        }
                        re.push(parse_f64(t[0], lno, "entry")?);
                        im.push(0.0);
                    }
                    Field::Complex => {
                        if t.len() != 2 {
                            return Err(parse_err(
                                lno,
                                "array complex entries are \"re im\" per line",
                            ));
                        }
                        re.push(parse_f64(t[0], lno, "real part")?);
                        im.push(parse_f64(t[1], lno, "imaginary part")?);
                    }
                }
            }
            if let Some((lno, _)) = lines.next_data()? {
                return Err(parse_err(lno, "trailing data after the advertised entries"));
            }
            if sym == Symmetry::Symmetric && nrows != ncols {
                return Err(parse_err(sline, "symmetric matrices must be square"));
            }
            // column-major fill per the array format
            let build = |vals: &[f64]| {
                DMatrix::from_fn(nrows, ncols, |r, c| vals[c * nrows + r])
            };
            match field {
                Field::Real => {
                    let mut m = build(&re);
                    if sym == Symmetry::Symmetric {
                        mirror_real(&mut m);
                    }
                    Ok(MatrixData::Real(m))
                }
                Field::Complex => {
                    let mr = build(&re);
                    let mi = build(&im);
                    let mut m =
                        DMatrix::from_fn(nrows, ncols, |r, c| Complex::new(mr[(r, c)], mi[(r, c)]));
                    if sym == Symmetry::Symmetric {
                        mirror_complex(&mut m);
                    }
                    Ok(MatrixData::Complex(m))
                }
            }
        }
        Format::Coordinate => {
            if toks.len() != 3 {
                return Err(parse_err(sline, "coordinate size line must be \"rows cols nnz\""));
            }
            let nrows = parse_usize(toks[0], sline, "row count")?;
            let ncols = parse_usize(toks[1], sline, "column count")?;
            let nnz = parse_usize(toks[2], sline, "nonzero count")?;
            if nrows == 0 || ncols == 0 {
                return Err(parse_err(sline, "matrix dimensions must be positive"));
            }
            let mut mr = DMatrix::zeros(nrows, ncols);
            let mut mi = DMatrix::zeros(nrows, ncols);
            let mut seen = 0usize;
            let mut last_line = sline;
            while seen < nnz {
                let (lno, data) = lines.next_data()?.ok_or_else(|| {
                    parse_err(
                        last_line,
                        format!("expected {nnz} entries, file ended after {seen}"),
                    )
                })?;
                last_line = lno;
                let t: Vec<&str> = data.split_whitespace().collect();
                let want = match field {
                    Field::Real => 3,
                    Field::Complex => 4,
                };
                if t.len() != want {
                    return Err(parse_err(
                        lno,
                        format!("coordinate entries need {want} fields, found {}", t.len()),
                    ));
                }
                let i = parse_usize(t[0], lno, "row index")?;
                let j = parse_usize(t[1], lno, "column index")?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(lno, format!("index ({i}, {j}) out of bounds")));
                }
                let re = parse_f64(t[2], lno, "value")?;
                let im = if field == Field::Complex {
                    parse_f64(t[3], lno, "imaginary part")?
                } else {
                    0.0
                };
                mr[(i - 1, j - 1)] = re;
                mi[(i - 1, j - 1)] = im;
                if sym == Symmetry::Symmetric && i != j {
                    mr[(j - 1, i - 1)] = re;
                    mi[(j - 1, i - 1)] = im;
                }
                seen += 1;
            }
            if let Some((lno, _)) = lines.next_data()? {
                return Err(parse_err(lno, "trailing data after the advertised entries"));
            }
            match field {
                Field::Real => Ok(MatrixData::Real(mr)),
                Field::Complex => Ok(MatrixData::Complex(DMatrix::from_fn(
                    nrows,
                    ncols,
                    |r, c| Complex::new(mr[(r, c)], mi[(r, c)]),
                ))),
            }
        }
    }
}

fn mirror_real(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
}

fn mirror_complex(m: &mut DMatrix<Complex<f64>>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
}

/// Read a square real operator matrix. Non-square or complex files are
/// rejected.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let m = read_matrix_data(&path)?.into_real()?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator file is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

/// Write a real matrix in array format with round-trip exact precision.
pub fn write_matrix(a: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path.as_ref())?;
    writeln!(f, "%%MatrixMarket matrix array real general")?;
    writeln!(f, "{} {}", a.nrows(), a.ncols())?;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            writeln!(f, "{:.17e}", a[(i, j)])?;
        }
    }
    Ok(())
}

/// Write a complex matrix in array format, entries as `re im` pairs.
pub fn write_matrix_complex(a: &DMatrix<Complex<f64>>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path.as_ref())?;
    writeln!(f, "%%MatrixMarket matrix array complex general")?;
    writeln!(f, "{} {}", a.nrows(), a.ncols())?;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            writeln!(f, "{:.17e} {:.17e}", a[(i, j)].re, a[(i, j)].im)?;
        }
    }
    Ok(())
}

/// Read a vector stored as a single-column array file.
pub fn read_vector(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let m = read_matrix_data(&path)?.into_real()?;
    if m.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "vector file is {}x{}, expected a single column",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(DVector::from_column_slice(m.column(0).as_slice()))
}

/// Write a vector as a single-column array file.
pub fn write_vector(v: &DVector<f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path.as_ref())?;
    writeln!(f, "%%MatrixMarket matrix array real general")?;
    writeln!(f, "{} 1", v.len())?;
    for x in v.iter() {
        writeln!(f, "{x:.17e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gen_toh, TohParams};

    fn tmpfile(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("wcgmres-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn round_trip_is_exact() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let path = tmpfile("toh.mtx");
        write_matrix(&a, &path).unwrap();
        let b = read_matrix(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_complex() {
        let a = DMatrix::from_fn(3, 3, |i, j| Complex::new(i as f64 + 0.25, j as f64 - 1.5));
        let path = tmpfile("cplx.mtx");
        write_matrix_complex(&a, &path).unwrap();
        match read_matrix_data(&path).unwrap() {
            MatrixData::Complex(b) => assert_eq!(a, b),
            MatrixData::Real(_) => panic!("expected complex data"),
        }
    }

    #[test]
    fn vector_round_trip() {
        let v = DVector::from_vec(vec![1.0, -0.5, 3.25]);
        let path = tmpfile("vec.mtx");
        write_vector(&v, &path).unwrap();
        let w = read_vector(&path).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn coordinate_format_reads() {
        let path = tmpfile("coord.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix coordinate real general").unwrap();
        writeln!(f, "% a comment").unwrap();
        writeln!(f, "2 2 3").unwrap();
        writeln!(f, "1 1 2.0").unwrap();
        writeln!(f, "1 2 -1.0").unwrap();
        writeln!(f, "2 2 4.0").unwrap();
        drop(f);
        let m = read_matrix(&path).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.0, 4.0]));
    }

    #[test]
    fn nonsquare_operator_rejected() {
        let path = tmpfile("rect.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix array real general").unwrap();
        writeln!(f, "2 1").unwrap();
        writeln!(f, "1.0").unwrap();
        writeln!(f, "2.0").unwrap();
        drop(f);
        assert!(matches!(
            read_matrix(&path),
            Err(Error::DimensionMismatch(_))
        ));
        // but it is a fine vector file
        assert!(read_vector(&path).is_ok());
    }

    #[test]
    fn zero_dimension_rejected() {
        let path = tmpfile("zero.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix array real general").unwrap();
        writeln!(f, "0 0").unwrap();
        drop(f);
        assert!(matches!(read_matrix(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_entry_count_reports_line() {
        let path = tmpfile("short.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix coordinate real general").unwrap();
        writeln!(f, "2 2 3").unwrap();
        writeln!(f, "1 1 2.0").unwrap();
        drop(f);
        match read_matrix(&path) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("expected 3"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_reports_first_line() {
        let path = tmpfile("hdr.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "MatrixMarket matrix array real general").unwrap();
        drop(f);
        assert!(matches!(
            read_matrix(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn trailing_entries_rejected() {
        let path = tmpfile("extra.mtx");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix array real general").unwrap();
        writeln!(f, "1 1").unwrap();
        writeln!(f, "1.0").unwrap();
        writeln!(f, "2.0").unwrap();
        drop(f);
        assert!(matches!(read_matrix(&path), Err(Error::Parse { .. })));
    }
}
