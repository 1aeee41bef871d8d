//! Matrix Market exchange-format I/O and on-disk system bundles.
//!
//! Supports the `coordinate` and `array` formats with `real` (or
//! `integer`) fields and `general` or `symmetric` storage. Symmetric
//! files store the lower triangle and are expanded on load. Values are
//! written with 17 significant digits, which round-trips every finite
//! `f64` exactly.
//!
//! A system bundle is a directory holding `A.mtx`, `B.mtx`, an optional
//! `C.mtx` (absent means `C = 0`), `f.mtx`, `h.mtx`, and a
//! `manifest.json` with `{name, n, m, params, c_zero}`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{DenseVector, SparseMatrix};
use crate::system::SaddleSystem;

/// Result of reading a Matrix Market file: a sparse matrix for
/// coordinate files and general arrays, a dense vector for single-column
/// arrays.
#[derive(Clone, Debug, PartialEq)]
pub enum MmObject {
    Matrix(SparseMatrix),
    Vector(DenseVector),
}

impl MmObject {
    /// The contents as a sparse matrix (vectors become a single column).
    pub fn into_matrix(self) -> Result<SparseMatrix> {
        match self {
            MmObject::Matrix(m) => Ok(m),
            MmObject::Vector(v) => {
                let triplets: Vec<(usize, usize, f64)> = v
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (i, 0, x))
                    .collect();
                SparseMatrix::from_triplets(v.len(), 1, &triplets)
            }
        }
    }

    /// The contents as a dense vector; fails unless single-column.
    pub fn into_vector(self) -> Result<DenseVector> {
        match self {
            MmObject::Vector(v) => Ok(v),
            MmObject::Matrix(m) => {
                if m.ncols() != 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "expected a single-column vector, found a {}x{} matrix",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let mut v = vec![0.0; m.nrows()];
                for (i, _, value) in m.iter() {
                    v[i] = value;
                }
                Ok(v)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_usize(path: &Path, line: usize, token: &str, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{token}'")))
}

fn parse_f64(path: &Path, line: usize, token: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid numeric value '{token}'")))
}

/// Reads one Matrix Market file.
pub fn mm_read(path: impl AsRef<Path>) -> Result<MmObject> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    // Banner: %%MatrixMarket matrix <format> <field> <symmetry>
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let banner = banner?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            path,
            1,
            "expected banner '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(parse_err(path, 1, format!("unsupported format '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other @ ("complex" | "pattern") => {
            return Err(parse_err(path, 1, format!("unsupported field '{other}'")))
        }
        other => return Err(parse_err(path, 1, format!("unknown field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("unsupported symmetry '{other}' (expected general or symmetric)"),
            ))
        }
    };

    // Size line: first non-comment line after the banner.
    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx + 1, trimmed.to_string()));
        break;
    }
    let (size_lineno, size) =
        size_line.ok_or_else(|| parse_err(path, 1, "missing size line after banner"))?;
    let size_tokens: Vec<&str> = size.split_whitespace().collect();

    match format {
        MmFormat::Coordinate => {
            if size_tokens.len() != 3 {
                return Err(parse_err(
                    path,
                    size_lineno,
                    "coordinate size line must be 'nrows ncols nnz'",
                ));
            }
            let nrows = parse_usize(path, size_lineno, size_tokens[0], "row count")?;
            let ncols = parse_usize(path, size_lineno, size_tokens[1], "column count")?;
            let nnz = parse_usize(path, size_lineno, size_tokens[2], "entry count")?;
            let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * nnz);
            let mut seen = 0usize;
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("expected 'row col value', found {} tokens", toks.len()),
                    ));
                }
                let r = parse_usize(path, lineno, toks[0], "row index")?;
                let c = parse_usize(path, lineno, toks[1], "column index")?;
                let v = parse_f64(path, lineno, toks[2])?;
                if r < 1 || r > nrows || c < 1 || c > ncols {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("index ({r}, {c}) outside {nrows}x{ncols}"),
                    ));
                }
                if symmetry == MmSymmetry::Symmetric && c > r {
                    return Err(parse_err(
                        path,
                        lineno,
                        "symmetric storage requires row >= col (lower triangle)",
                    ));
                }
                triplets.push((r - 1, c - 1, v));
                if symmetry == MmSymmetry::Symmetric && r != c {
                    triplets.push((c - 1, r - 1, v));
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    path,
                    size_lineno,
                    format!("size line promises {nnz} entries, file holds {seen}"),
                ));
            }
            Ok(MmObject::Matrix(SparseMatrix::from_triplets(
                nrows, ncols, &triplets,
            )?))
        }
        MmFormat::Array => {
            if size_tokens.len() != 2 {
                return Err(parse_err(
                    path,
                    size_lineno,
                    "array size line must be 'nrows ncols'",
                ));
            }
            let nrows = parse_usize(path, size_lineno, size_tokens[0], "row count")?;
            let ncols = parse_usize(path, size_lineno, size_tokens[1], "column count")?;
            if symmetry == MmSymmetry::Symmetric && nrows != ncols {
                return Err(parse_err(
                    path,
                    size_lineno,
                    "symmetric array storage requires a square matrix",
                ));
            }
            let expected = match symmetry {
                MmSymmetry::General => nrows * ncols,
                MmSymmetry::Symmetric => nrows * (nrows + 1) / 2,
            };
            let mut values = Vec::with_capacity(expected);
            let mut last_lineno = size_lineno;
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                // Array format: one value per line by convention; accept
                // several whitespace-separated values per line.
                for tok in trimmed.split_whitespace() {
                    values.push(parse_f64(path, lineno, tok)?);
                }
                last_lineno = lineno;
            }
            if values.len() != expected {
                return Err(parse_err(
                    path,
                    last_lineno,
                    format!(
                        "array of {nrows}x{ncols} expects {expected} values, file holds {}",
                        values.len()
                    ),
                ));
            }
            if symmetry == MmSymmetry::General && ncols == 1 {
                return Ok(MmObject::Vector(values));
            }
            // Column-major for general; packed lower-triangle column-major
            // for symmetric.
            let mut triplets = Vec::with_capacity(2 * values.len());
            match symmetry {
                MmSymmetry::General => {
                    for c in 0..ncols {
                        for r in 0..nrows {
                            triplets.push((r, c, values[c * nrows + r]));
                        }
                    }
                }
                MmSymmetry::Symmetric => {
                    let mut k = 0;
                    for c in 0..ncols {
                        for r in c..nrows {
                            let v = values[k];
                            k += 1;
                            triplets.push((r, c, v));
                            if r != c {
                                triplets.push((c, r, v));
                            }
                        }
                    }
                }
            }
            Ok(MmObject::Matrix(SparseMatrix::from_triplets(
                nrows, ncols, &triplets,
            )?))
        }
    }
}

/// Writes a sparse matrix in coordinate/real/general format.
pub fn mm_write_matrix(path: impl AsRef<Path>, matrix: &SparseMatrix) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), matrix.nnz());
    for (r, c, v) in matrix.iter() {
        let _ = writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a dense vector in array/real/general format (n x 1).
pub fn mm_write_vector(path: impl AsRef<Path>, vector: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} 1", vector.len());
    for v in vector {
        let _ = writeln!(out, "{v:.16e}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Bundle metadata stored alongside the matrix files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BundleManifest {
    pub name: String,
    pub n: usize,
    pub m: usize,
    /// Generator parameters or provenance notes; free-form JSON.
    pub params: serde_json::Value,
    /// True when `C = 0` and `C.mtx` is omitted.
    pub c_zero: bool,
}

/// Writes a system bundle directory. Refuses to overwrite an existing
/// bundle unless `force` is set.
pub fn write_system(
    sys: &SaddleSystem,
    dir: impl AsRef<Path>,
    name: &str,
    params: serde_json::Value,
    force: bool,
) -> Result<()> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() && !force {
        return Err(Error::BundleExists(dir.to_path_buf()));
    }
    std::fs::create_dir_all(dir)?;
    let (n, m) = sys.dims();
    let c_zero = sys.c().nnz() == 0;
    mm_write_matrix(dir.join("A.mtx"), sys.a())?;
    mm_write_matrix(dir.join("B.mtx"), sys.b())?;
    let c_path = dir.join("C.mtx");
    if c_zero {
        if c_path.exists() {
            std::fs::remove_file(&c_path)?;
        }
    } else {
        mm_write_matrix(&c_path, sys.c())?;
    }
    mm_write_vector(dir.join("f.mtx"), sys.f())?;
    mm_write_vector(dir.join("h.mtx"), sys.h())?;
    let manifest = BundleManifest {
        name: name.to_string(),
        n,
        m,
        params,
        c_zero,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    std::fs::write(manifest_path, json)?;
    Ok(())
}

/// Reads a system bundle directory written by [`write_system`] (or
/// assembled externally with the same layout).
pub fn read_system(dir: impl AsRef<Path>) -> Result<(SaddleSystem, BundleManifest)> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(Error::BundleInvalid(format!(
            "{}: missing manifest.json",
            dir.display()
        )));
    }
    let mut manifest_text = String::new();
    std::fs::File::open(&manifest_path)?.read_to_string(&mut manifest_text)?;
    let manifest: BundleManifest = serde_json::from_str(&manifest_text)?;

    let a = mm_read(dir.join("A.mtx"))?.into_matrix()?;
    let b = mm_read(dir.join("B.mtx"))?.into_matrix()?;
    let f = mm_read(dir.join("f.mtx"))?.into_vector()?;
    let h = mm_read(dir.join("h.mtx"))?.into_vector()?;
    let (n, m) = (a.nrows(), b.nrows());
    let c_path = dir.join("C.mtx");
    let c = if c_path.exists() {
        mm_read(c_path)?.into_matrix()?
    } else {
        SparseMatrix::zeros(m, m)
    };
    if manifest.n != n || manifest.m != m {
        return Err(Error::BundleInvalid(format!(
            "{}: manifest says n = {}, m = {}, files hold n = {}, m = {}",
            dir.display(),
            manifest.n,
            manifest.m,
            n,
            m
        )));
    }
    let sys = SaddleSystem::new(a, b, c, f, h)
        .map_err(|e| Error::BundleInvalid(format!("{}: {e}", dir.display())))?;
    Ok((sys, manifest))
}

/// Canonical bundle file list, for diagnostics.
pub fn bundle_files(dir: impl AsRef<Path>) -> Vec<PathBuf> {
    let dir = dir.as_ref();
    ["manifest.json", "A.mtx", "B.mtx", "C.mtx", "f.mtx", "h.mtx"]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_gen::{gen_linear_vi, gen_oseen, OseenGenConfig, VIGenConfig};
    use proptest::prelude::*;

    fn write_temp(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    fn expect_parse_error(content: &str) -> (usize, String) {
        let (_dir, path) = write_temp(content);
        match mm_read(&path).unwrap_err() {
            Error::Parse { line, msg, .. } => (line, msg),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn coordinate_identity_loads() {
        let (_dir, path) = write_temp(
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n",
        );
        let m = mm_read(&path).unwrap().into_matrix().unwrap();
        assert_eq!(m, SparseMatrix::identity(2));
    }

    #[test]
    fn symmetric_lower_triangle_expands() {
        let (_dir, path) = write_temp(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2.0\n2 1 1.0\n2 2 2.0\n",
        );
        let m = mm_read(&path).unwrap().into_matrix().unwrap();
        let want =
            SparseMatrix::from_row_major(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn symmetric_upper_entry_is_rejected_with_line_number() {
        let (line, msg) = expect_parse_error(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 5.0\n",
        );
        assert_eq!(line, 3);
        assert!(msg.contains("lower triangle"), "{msg}");
    }

    #[test]
    fn array_vector_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.mtx");
        let v = vec![1.5, -2.25e-300, 3.0e300, 0.1, -0.0];
        mm_write_vector(&path, &v).unwrap();
        let back = mm_read(&path).unwrap().into_vector().unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn array_general_matrix_is_column_major() {
        let (_dir, path) = write_temp(
            "%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n4.0\n",
        );
        let m = mm_read(&path).unwrap().into_matrix().unwrap();
        let want = SparseMatrix::from_row_major(2, 2, &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn array_symmetric_packed_lower_triangle() {
        // Columns of the lower triangle: (a11, a21), (a22).
        let (_dir, path) = write_temp(
            "%%MatrixMarket matrix array real symmetric\n2 2\n2.0\n1.0\n5.0\n",
        );
        let m = mm_read(&path).unwrap().into_matrix().unwrap();
        let want = SparseMatrix::from_row_major(2, 2, &[2.0, 1.0, 1.0, 5.0]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn pattern_and_complex_fields_are_rejected() {
        let (line, msg) =
            expect_parse_error("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
        assert_eq!(line, 1);
        assert!(msg.contains("pattern"), "{msg}");
        let (line, msg) =
            expect_parse_error("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
        assert_eq!(line, 1);
        assert!(msg.contains("complex"), "{msg}");
    }

    #[test]
    fn malformed_content_reports_line_numbers() {
        // Bad banner.
        let (line, _) = expect_parse_error("%%NotMatrixMarket\n1 1 0\n");
        assert_eq!(line, 1);
        // Garbled value on line 3.
        let (line, msg) = expect_parse_error(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 twelve\n",
        );
        assert_eq!(line, 3);
        assert!(msg.contains("twelve"), "{msg}");
        // Index out of range on line 4 (comments count toward numbering).
        let (line, msg) = expect_parse_error(
            "%%MatrixMarket matrix coordinate real general\n% note\n2 2 1\n3 1 1.0\n",
        );
        assert_eq!(line, 4);
        assert!(msg.contains("outside"), "{msg}");
        // Entry-count mismatch points at the size line.
        let (line, msg) = expect_parse_error(
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n",
        );
        assert_eq!(line, 2);
        assert!(msg.contains("promises 3"), "{msg}");
        // Wrong token count in an entry.
        let (line, _) = expect_parse_error(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n",
        );
        assert_eq!(line, 3);
    }

    #[test]
    fn duplicate_coordinate_entries_accumulate() {
        let (_dir, path) = write_temp(
            "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2.5\n",
        );
        let m = mm_read(&path).unwrap().into_matrix().unwrap();
        assert_eq!(m.get(0, 0), 4.0);
    }

    #[test]
    fn bundle_round_trip_is_exact() {
        let sys = gen_linear_vi(&VIGenConfig::new(12)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("vi");
        write_system(&sys, &bundle, "vi-12", serde_json::json!({"n": 12}), false).unwrap();
        let (back, manifest) = read_system(&bundle).unwrap();
        assert_eq!(manifest.name, "vi-12");
        assert_eq!((manifest.n, manifest.m), (12, 6));
        assert!(manifest.c_zero);
        assert!(!bundle.join("C.mtx").exists());
        assert_eq!(sys.a(), back.a());
        assert_eq!(sys.b(), back.b());
        assert_eq!(sys.c(), back.c());
        assert_eq!(sys.f(), back.f());
        assert_eq!(sys.h(), back.h());
    }

    #[test]
    fn bundle_with_stabilization_keeps_c() {
        let sys = gen_oseen(&OseenGenConfig {
            stabilization: 0.5,
            ..OseenGenConfig::new(4, 4)
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("flow");
        write_system(&sys, &bundle, "flow", serde_json::Value::Null, false).unwrap();
        assert!(bundle.join("C.mtx").exists());
        let (back, manifest) = read_system(&bundle).unwrap();
        assert!(!manifest.c_zero);
        assert_eq!(sys.c(), back.c());
    }

    #[test]
    fn bundle_overwrite_requires_force() {
        let sys = gen_linear_vi(&VIGenConfig::new(6)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("b");
        write_system(&sys, &bundle, "first", serde_json::Value::Null, false).unwrap();
        match write_system(&sys, &bundle, "second", serde_json::Value::Null, false) {
            Err(Error::BundleExists(p)) => assert_eq!(p, bundle),
            other => panic!("expected BundleExists, got {other:?}"),
        }
        write_system(&sys, &bundle, "third", serde_json::Value::Null, true).unwrap();
        let (_, manifest) = read_system(&bundle).unwrap();
        assert_eq!(manifest.name, "third");
    }

    #[test]
    fn bundle_manifest_dimension_mismatch_is_detected() {
        let sys = gen_linear_vi(&VIGenConfig::new(6)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("b");
        write_system(&sys, &bundle, "x", serde_json::Value::Null, false).unwrap();
        // Corrupt the manifest's n.
        let mpath = bundle.join("manifest.json");
        let text = std::fs::read_to_string(&mpath)
            .unwrap()
            .replace("\"n\": 6", "\"n\": 7");
        std::fs::write(&mpath, text).unwrap();
        match read_system(&bundle) {
            Err(Error::BundleInvalid(msg)) => assert!(msg.contains("manifest says"), "{msg}"),
            other => panic!("expected BundleInvalid, got {other:?}"),
        }
    }

    #[test]
    fn bundle_member_dimension_mismatch_is_detected() {
        let sys = gen_linear_vi(&VIGenConfig::new(6)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("b");
        write_system(&sys, &bundle, "x", serde_json::Value::Null, false).unwrap();
        // Replace f with one of the wrong length.
        mm_write_vector(bundle.join("f.mtx"), &[1.0, 2.0]).unwrap();
        match read_system(&bundle) {
            Err(Error::BundleInvalid(msg)) => assert!(msg.contains("f has length"), "{msg}"),
            other => panic!("expected BundleInvalid, got {other:?}"),
        }
    }

    #[test]
    fn bundle_missing_manifest_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        match read_system(dir.path()) {
            Err(Error::BundleInvalid(msg)) => assert!(msg.contains("manifest"), "{msg}"),
            other => panic!("expected BundleInvalid, got {other:?}"),
        }
    }

    #[test]
    fn identical_systems_write_identical_bytes() {
        let sys = gen_oseen(&OseenGenConfig::new(5, 4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (b1, b2) = (dir.path().join("x"), dir.path().join("y"));
        write_system(&sys, &b1, "same", serde_json::Value::Null, false).unwrap();
        write_system(&sys, &b2, "same", serde_json::Value::Null, false).unwrap();
        for f in ["manifest.json", "A.mtx", "B.mtx", "f.mtx", "h.mtx"] {
            let x = std::fs::read(b1.join(f)).unwrap();
            let y = std::fs::read(b2.join(f)).unwrap();
            assert_eq!(x, y, "{f} differs between identical writes");
        }
    }

    proptest! {
        #[test]
        fn matrix_write_read_round_trip_is_exact(
            entries in proptest::collection::vec(
                (0usize..7, 0usize..5, -1e6f64..1e6), 0..30),
        ) {
            let m = SparseMatrix::from_triplets(7, 5, &entries).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.mtx");
            mm_write_matrix(&path, &m).unwrap();
            let back = mm_read(&path).unwrap().into_matrix().unwrap();
            prop_assert_eq!(m, back);
        }
    }
}
