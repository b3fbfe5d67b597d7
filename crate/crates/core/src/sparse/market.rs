//! Matrix Market coordinate format (`real`, `integer`, `pattern`;
//! `general` or `symmetric`).

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CscMatrix, TripletList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::format(1, "first line must start with %%MatrixMarket"));
    }
    if words.len() != 5 {
        return Err(Error::format(1, "header must have exactly five words"));
    }
    if words[1] != "matrix" {
        return Err(Error::format(1, format!("unsupported object '{}'", words[1])));
    }
    if words[2] != "coordinate" {
        return Err(Error::format(
            1,
            format!("unsupported format '{}', only coordinate is read", words[2]),
        ));
    }
    let field = match words[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(Error::format(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::format(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| Error::format(line, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| Error::format(line, format!("invalid {what}")))
}

/// Read a coordinate Matrix Market stream into canonical CSC form.
///
/// Symmetric files are expanded to both triangles, pattern entries become
/// `1.0`, and duplicate coordinates are summed.
pub fn read_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<CscMatrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (field, symmetry) = match lines.next() {
        Some((_, l)) => parse_header(&l?)?,
        None => return Err(Error::format(1, "empty input")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Option<TripletList<T>> = None;
    let mut read = 0usize;

    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((nrows, ncols, nnz)) = size else {
            let m = parse_index(toks.next(), lineno, "row count")?;
            let n = parse_index(toks.next(), lineno, "column count")?;
            let k = parse_index(toks.next(), lineno, "entry count")?;
            if toks.next().is_some() {
                return Err(Error::format(lineno, "size line must have three fields"));
            }
            if symmetry == Symmetry::Symmetric && m != n {
                return Err(Error::format(lineno, "symmetric matrix must be square"));
            }
            size = Some((m, n, k));
            triplets = Some(TripletList::new(m, n));
            continue;
        };

        if read == nnz {
            return Err(Error::format(
                lineno,
                format!("more entries than the declared {nnz}"),
            ));
        }
        let i = parse_index(toks.next(), lineno, "row index")?;
        let j = parse_index(toks.next(), lineno, "column index")?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::format(
                lineno,
                format!("entry ({i}, {j}) outside 1..={nrows} x 1..={ncols}"),
            ));
        }
        let value = match field {
            Field::Pattern => T::one(),
            Field::Real | Field::Integer => {
                let tok = toks
                    .next()
                    .ok_or_else(|| Error::format(lineno, "missing value"))?;
                T::parse_decimal(tok)
                    .ok_or_else(|| Error::format(lineno, format!("invalid value '{tok}'")))?
            }
        };
        if toks.next().is_some() {
            return Err(Error::format(lineno, "trailing tokens after entry"));
        }

        let t = triplets.as_mut().expect("size line precedes entries");
        let (r, c) = (i - 1, j - 1);
        t.push(r, c, value)?;
        if symmetry == Symmetry::Symmetric && r != c {
            t.push(c, r, value)?;
        }
        read += 1;
    }

    let Some((_, _, nnz)) = size else {
        return Err(Error::format(0, "missing size line"));
    };
    if read != nnz {
        return Err(Error::format(
            0,
            format!("declared {nnz} entries but found {read}"),
        ));
    }
    CscMatrix::from_triplets(&triplets.expect("set with size"))
}

pub fn read_matrix_market_str<T: Scalar>(text: &str) -> Result<CscMatrix<T>> {
    read_matrix_market(text.as_bytes())
}

/// Write as `coordinate real general`, one entry per line in storage order.
pub fn write_matrix_market<T: Scalar>(m: &CscMatrix<T>) -> String {
    let mut out = String::with_capacity(32 + 24 * m.nnz());
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz());
    for j in 0..m.ncols() {
        let (rows, vals) = m.col(j);
        for (&r, v) in rows.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {}", r + 1, j + 1, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<CscMatrix<f64>> {
        read_matrix_market_str(text)
    }

    #[test]
    fn real_general_single_entry() {
        let m = read("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 5.0\n").unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.col(0), (&[0usize][..], &[5.0][..]));
    }

    #[test]
    fn pattern_symmetric_is_mirrored() {
        let m = read("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n").unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense().get(1, 0), 1.0);
        assert_eq!(m.to_dense().get(0, 1), 1.0);
    }

    #[test]
    fn symmetric_diagonal_not_duplicated() {
        let m = read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 3.0\n").unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.values(), &[3.0]);
    }

    #[test]
    fn comments_and_integer_field() {
        let text = "%%MatrixMarket matrix coordinate integer general\n% a comment\n\n3 2 2\n3 2 -4\n1 1 7\n";
        let m = read(text).unwrap();
        assert_eq!(m.to_dense().get(2, 1), -4.0);
        assert_eq!(m.to_dense().get(0, 0), 7.0);
    }

    #[test]
    fn unsupported_headers_are_format_errors() {
        for header in [
            "%%MatrixMarket matrix array real general",
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate real skew-symmetric",
            "%%MatrixMarket matrix coordinate real hermitian",
            "%MatrixMarket matrix coordinate real general",
        ] {
            let text = format!("{header}\n1 1 0\n");
            assert!(
                matches!(read(&text), Err(Error::Format { .. })),
                "{header}"
            );
        }
    }

    #[test]
    fn count_mismatch_is_format_error() {
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        let long = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 1.0\n";
        assert!(matches!(read(short), Err(Error::Format { .. })));
        assert!(matches!(read(long), Err(Error::Format { .. })));
    }

    #[test]
    fn bad_index_is_format_error() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read(text), Err(Error::Format { line: 3, .. })));
        let zero = "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n";
        assert!(matches!(read(zero), Err(Error::Format { .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let a = crate::sparse::fixtures::worked_a::<f64>();
        let text = write_matrix_market(&a);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n4 4 6\n"));
        assert_eq!(read(&text).unwrap(), a);
    }
}
