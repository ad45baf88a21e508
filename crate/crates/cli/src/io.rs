//! JSON schemas for channels and Gram frames, and matrix serialization.
//!
//! Channel: `{"dim_in": n, "dim_out": m, "kraus": [[[entry, ...], ...], ...]}`
//! (each Kraus operator is a list of `m` rows of `n` entries).
//! Frame: `{"vectors": [[entry, ...], ...], "gram": [[entry, ...], ...]}`.
//! An entry is `[re, im]`, a bare real number, or a string holding an exact
//! Gaussian rational such as `"1/2"` or `"3/5-4/5*i"`.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use opgraph_core::channels::{GramFrame, KrausChannel};
use opgraph_core::scalar::parse_gaussian;
use opgraph_core::{CMatrix, GaussianRational, Scalar};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
    Exact(String),
}

impl Entry {
    fn exact(&self) -> Option<Result<GaussianRational, CliError>> {
        match self {
            Entry::Exact(s) => {
                Some(parse_gaussian(s).map_err(|e| CliError::Input(format!("entry \"{s}\": {e}"))))
            }
            _ => None,
        }
    }

    fn complex(&self) -> Result<Complex64, CliError> {
        match self {
            Entry::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            Entry::Real(re) => Ok(Complex64::new(*re, 0.0)),
            Entry::Exact(_) => self.exact().expect("exact entry").map(|g| g.to_complex()),
        }
    }
}

type RawMatrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Deserialize)]
struct ChannelFile {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<RawMatrix>,
}

#[derive(Debug, Clone, Deserialize)]
struct FrameFile {
    vectors: Vec<Vec<Entry>>,
    gram: RawMatrix,
}

/// Kraus data as read from disk, before the trace-preservation check.
pub enum LoadedChannel {
    Exact(KrausChannel<GaussianRational>),
    Float(KrausChannel<Complex64>),
    Frame(GramFrame),
}

fn shaped<S: Scalar>(
    raw: &RawMatrix,
    rows: usize,
    cols: usize,
    convert: impl Fn(&Entry) -> Result<S, CliError>,
) -> Result<CMatrix<S>, CliError> {
    if raw.len() != rows || raw.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input(format!("expected a {rows}x{cols} matrix")));
    }
    let rows: Vec<Vec<S>> = raw
        .iter()
        .map(|r| r.iter().map(&convert).collect::<Result<Vec<S>, CliError>>())
        .collect::<Result<_, _>>()?;
    Ok(CMatrix::from_rows(rows))
}

/// Reads a channel or a frame. Channels whose entries are all exact strings
/// load on the exact backend unless `force_float` is set.
pub fn load_channel(text: &str, force_float: bool) -> Result<LoadedChannel, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))?;
    if value.get("kraus").is_some() {
        let file: ChannelFile = serde_json::from_value(value)
            .map_err(|e| CliError::Input(format!("invalid channel: {e}")))?;
        if file.kraus.is_empty() || file.dim_in == 0 || file.dim_out == 0 {
            return Err(CliError::Input(
                "invalid channel: empty Kraus list or zero dimension".into(),
            ));
        }
        let all_exact = file
            .kraus
            .iter()
            .flatten()
            .flatten()
            .all(|e| matches!(e, Entry::Exact(_)));
        let (m, n) = (file.dim_out, file.dim_in);
        let build_err = |e: opgraph_core::Error| CliError::Input(format!("invalid channel: {e}"));
        if all_exact && !force_float {
            let kraus = file
                .kraus
                .iter()
                .map(|k| shaped(k, m, n, |e| e.exact().expect("exact entry")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedChannel::Exact(
                KrausChannel::without_trace_check(kraus).map_err(build_err)?,
            ))
        } else {
            let kraus = file
                .kraus
                .iter()
                .map(|k| shaped(k, m, n, Entry::complex))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedChannel::Float(
                KrausChannel::without_trace_check(kraus).map_err(build_err)?,
            ))
        }
    } else if value.get("vectors").is_some() {
        let file: FrameFile = serde_json::from_value(value)
            .map_err(|e| CliError::Input(format!("invalid frame: {e}")))?;
        let vectors = file
            .vectors
            .iter()
            .map(|v| v.iter().map(Entry::complex).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let m = vectors.len();
        let gram = shaped(&file.gram, m, m, Entry::complex)?;
        Ok(LoadedChannel::Frame(
            GramFrame::new(vectors, gram, 1e-9).map_err(|e| CliError::Input(e.to_string()))?,
        ))
    } else {
        Err(CliError::Input(
            "expected a channel (\"kraus\") or a frame (\"vectors\", \"gram\")".into(),
        ))
    }
}

/// Exact entries as canonical strings, float entries as `[re, im]`.
pub fn scalar_json<S: Scalar>(s: &S) -> Value {
    if S::is_exact() {
        Value::String(s.to_string())
    } else {
        let c = s.to_complex();
        json!([c.re, c.im])
    }
}

pub fn matrix_json<S: Scalar>(m: &CMatrix<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| scalar_json(m.get(i, j))).collect()))
            .collect(),
    )
}

pub fn channel_json<S: Scalar>(ch: &KrausChannel<S>) -> Value {
    json!({
        "dim_in": ch.dim_in(),
        "dim_out": ch.dim_out(),
        "kraus": ch.kraus().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_channel_round_trip() {
        let text = r#"{"dim_in": 2, "dim_out": 2, "kraus": [[["1","0"],["0","0"]], [["0","1"],["0","0"]]]}"#;
        let LoadedChannel::Exact(ch) = load_channel(text, false).unwrap() else {
            panic!("expected exact channel");
        };
        assert_eq!(ch.env_dim(), 2);
        let again = channel_json(&ch).to_string();
        assert!(matches!(load_channel(&again, false).unwrap(), LoadedChannel::Exact(c) if c == ch));
    }

    #[test]
    fn mixed_entries_load_as_float() {
        let text = r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[[0.6, 0.0]]], [["4/5"]]]}"#;
        assert!(matches!(
            load_channel(text, false).unwrap(),
            LoadedChannel::Float(_)
        ));
    }

    #[test]
    fn rejects_bad_shapes_and_json() {
        let text = r#"{"dim_in": 2, "dim_out": 2, "kraus": [[["1","0"]]]}"#;
        assert!(matches!(load_channel(text, false), Err(CliError::Input(_))));
        assert!(matches!(load_channel("{", false), Err(CliError::Input(_))));
        assert!(matches!(load_channel("{}", false), Err(CliError::Input(_))));
    }

    #[test]
    fn dephasing_frame_loads() {
        let text = r#"{"vectors": [[1, 0], [0, 1]], "gram": [[1, 0], [0, 1]]}"#;
        assert!(matches!(
            load_channel(text, false).unwrap(),
            LoadedChannel::Frame(_)
        ));
    }
}
