//! Model persistence.
//!
//! Text format: optional `V D` header line, then one `token v1 .. vD` row
//! per word, space-separated — the layout common pretrained-vector
//! distributions use. Only input vectors travel in text form.
//!
//! Binary format: magic, version, V, D, the vocabulary (length-prefixed
//! UTF-8 tokens with counts), then the input and output tables as row-major
//! little-endian f32.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{EmbeddingError, EmbeddingModel, Matrix, Vocabulary};

const MAGIC: &[u8; 4] = b"RKEV";
const VERSION: u32 = 1;

/// How many vocabulary rows a pretrained file actually covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PretrainedCoverage {
    pub loaded: usize,
    pub missing: usize,
    pub file_rows: usize,
}

pub fn save_text_vectors(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let mut out = Vec::new();
    writeln!(out, "{} {}", model.vocab().len(), model.dim())?;
    for i in 0..model.vocab().len() {
        out.extend_from_slice(model.vocab().token(i).as_bytes());
        for v in model.input().row(i) {
            write!(out, " {v:.8}")?;
        }
        out.push(b'\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parse a text vector file into (token, vector) rows. A first line of
/// exactly two integers is treated as a header and skipped.
pub fn load_text_vectors(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<f64>)>, EmbeddingError> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line").to_string();
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = values.map_err(|e| EmbeddingError::MalformedLine {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if lineno == 0 && values.len() == 1 && token.parse::<usize>().is_ok() {
            continue; // "V D" header
        }
        if values.is_empty() {
            return Err(EmbeddingError::MalformedLine {
                line: lineno + 1,
                message: "no vector components".into(),
            });
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(EmbeddingError::MalformedLine {
                    line: lineno + 1,
                    message: format!("expected {d} components, found {}", values.len()),
                })
            }
            _ => {}
        }
        rows.push((token, values));
    }
    Ok(rows)
}

/// Overwrite input rows for vocabulary tokens present in the file. Rows for
/// absent tokens keep their random initialization; output vectors are not
/// touched.
pub fn init_pretrained(
    model: &mut EmbeddingModel,
    path: impl AsRef<Path>,
) -> Result<PretrainedCoverage, EmbeddingError> {
    let rows = load_text_vectors(path)?;
    let mut loaded = 0;
    let file_rows = rows.len();
    for (token, values) in rows {
        if values.len() != model.dim() {
            return Err(EmbeddingError::DimensionMismatch {
                model: model.dim(),
                file: values.len(),
            });
        }
        if let Some(i) = model.vocab().get(&token) {
            let (input, _) = model.tables_mut();
            input.row_mut(i).copy_from_slice(&values);
            loaded += 1;
        }
    }
    Ok(PretrainedCoverage {
        loaded,
        missing: model.vocab().len() - loaded,
        file_rows,
    })
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let vocab = model.vocab();
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(vocab.len() as u64).to_le_bytes());
    out.extend_from_slice(&(model.dim() as u64).to_le_bytes());
    for i in 0..vocab.len() {
        let token = vocab.token(i).as_bytes();
        out.extend_from_slice(&(token.len() as u32).to_le_bytes());
        out.extend_from_slice(token);
        out.extend_from_slice(&vocab.count(i).to_le_bytes());
    }
    for table in [model.input(), model.output()] {
        for v in table.data() {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        if self.pos + n > self.bytes.len() {
            return Err(EmbeddingError::BadModelFile("truncated file".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, EmbeddingError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, EmbeddingError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, EmbeddingError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel, EmbeddingError> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
    };
    if r.take(4)? != MAGIC {
        return Err(EmbeddingError::BadModelFile("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(EmbeddingError::BadModelFile(format!(
            "unsupported version {version}"
        )));
    }
    let v = r.u64()? as usize;
    let dim = r.u64()? as usize;
    let mut entries = Vec::with_capacity(v);
    for _ in 0..v {
        let len = r.u32()? as usize;
        let token = std::str::from_utf8(r.take(len)?)
            .map_err(|e| EmbeddingError::BadModelFile(e.to_string()))?
            .to_string();
        let count = r.u64()?;
        entries.push((token, count));
    }
    let vocab = Vocabulary::from_entries(entries);
    let mut tables = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut m = Matrix::zeros(v, dim);
        for val in m.data_mut() {
            *val = r.f32()? as f64;
        }
        tables.push(m);
    }
    if r.pos != bytes.len() {
        return Err(EmbeddingError::BadModelFile("trailing bytes".into()));
    }
    let output = tables.pop().unwrap();
    let input = tables.pop().unwrap();
    EmbeddingModel::from_parts(vocab, input, output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_model(v: usize, dim: usize, seed: u64) -> EmbeddingModel {
        let vocab = Vocabulary::from_entries(
            (0..v).map(|i| (format!("t{i}"), (v - i) as u64)).collect(),
        );
        let mut model = EmbeddingModel::new(vocab, dim, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 77);
        let (input, output) = model.tables_mut();
        for x in input.data_mut().iter_mut().chain(output.data_mut()) {
            *x = rng.gen_range(-1.0..1.0);
        }
        model
    }

    #[test]
    fn binary_round_trip_is_stable_after_one_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.bin");
        let p2 = dir.path().join("m2.bin");
        let model = random_model(20, 12, 5);
        save_model(&model, &p1).unwrap();
        let loaded = load_model(&p1).unwrap();
        save_model(&loaded, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        assert_eq!(loaded.vocab(), model.vocab());
        // One f32 quantization step, well inside 1e-6 for unit-scale values.
        for (a, b) in model.input().data().iter().zip(loaded.input().data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn text_format_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let model = random_model(7, 5, 2);
        save_text_vectors(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "7 5");
        assert_eq!(lines.len(), 8);
        for line in &lines[1..] {
            assert_eq!(line.split_whitespace().count(), 6);
        }
    }

    #[test]
    fn text_round_trip_within_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let model = random_model(15, 9, 3);
        save_text_vectors(&model, &path).unwrap();
        let rows = load_text_vectors(&path).unwrap();
        assert_eq!(rows.len(), 15);
        for (i, (token, values)) in rows.iter().enumerate() {
            assert_eq!(token, model.vocab().token(i));
            for (a, b) in values.iter().zip(model.input().row(i)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pretrained_rows_overwrite_only_matches() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("glove.txt");
        fs::write(&path, "hello 0.25 -0.5\nworld 1.0 2.0\nunused 9.0 9.0\n").unwrap();
        let vocab = Vocabulary::from_entries(vec![
            ("hello".into(), 3),
            ("fresh".into(), 2),
            ("world".into(), 1),
        ]);
        let mut model = EmbeddingModel::new(vocab, 2, 8);
        let cov = init_pretrained(&mut model, &path).unwrap();
        assert_eq!(cov, PretrainedCoverage { loaded: 2, missing: 1, file_rows: 3 });
        assert_eq!(model.vector("hello").unwrap(), &[0.25, -0.5]);
        assert_eq!(model.vector("world").unwrap(), &[1.0, 2.0]);
        let bound = 0.5 / 2.0;
        assert!(model.vector("fresh").unwrap().iter().all(|v| v.abs() <= bound));
        // Output table still zero.
        assert!(model.output().data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pretrained_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "hello 0.25 0.5 0.75\n").unwrap();
        let vocab = Vocabulary::from_entries(vec![("hello".into(), 1)]);
        let mut model = EmbeddingModel::new(vocab, 2, 8);
        assert!(matches!(
            init_pretrained(&mut model, &path),
            Err(EmbeddingError::DimensionMismatch { model: 2, file: 3 })
        ));
    }

    #[test]
    fn malformed_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "hello 0.25 oops\n").unwrap();
        assert!(matches!(
            load_text_vectors(&path),
            Err(EmbeddingError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let model = random_model(6, 4, 9);
        save_model(&model, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(EmbeddingError::BadModelFile(_))
        ));
    }

    #[test]
    fn bad_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let model = random_model(2, 2, 9);
        save_model(&model, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[4] = 0xEE;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(EmbeddingError::BadModelFile(_))
        ));
    }
}
