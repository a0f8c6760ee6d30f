//! Model files: a TOML header, a `---` line, then one parameter per line.
//!
//! Parameters are written with Rust's shortest round-trip float formatting,
//! so reading a file back reproduces every bit. The header records the
//! feature hashing scheme so a model can be checked against the featurizer
//! that reads it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use tifti_core::exprclass::ExprModel;
use tifti_core::features::{FeatureConfig, FNV_OFFSET, FNV_PRIME};
use tifti_core::linear::LinearSoftmax;
use tifti_core::seqlabel::{Birnn, BirnnLayout, LabelerParams, SequenceLabelerModel, TimelineKind};

use crate::error::{Error, Result};

const FORMAT: &str = "tifti-model";
const VERSION: u32 = 1;
const SEPARATOR: &str = "---";
const HASH: &str = "fnv1a-64";
const NGRAM_KEY: &str = "byte(order) ++ tokens joined by ' '; index = hash mod dim; vectors L2-normalized";
const TOKENIZER: &str =
    "split on chars other than alphanumeric and '-'; placeholders kept; other tokens split on '-' and lowercased";

pub const SEQ_ORIGINAL_FILE: &str = "seq_original.model";
pub const SEQ_SIMULATED_FILE: &str = "seq_simulated.model";
pub const EXPR_FILE: &str = "expr.model";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    kind: String,
    variant: String,
    trained_on: Option<String>,
    seed: String,
    delta_days: Option<u32>,
    dim: usize,
    ngram_orders: Vec<usize>,
    lowercase: bool,
    hash: String,
    fnv_offset: String,
    fnv_prime: String,
    ngram_key: String,
    tokenizer: String,
    input: Option<usize>,
    hidden: Option<usize>,
    shapes: String,
    n_params: usize,
}

fn linear_shapes(dim: usize) -> String {
    format!("weights:3x{dim},bias:3")
}

fn common_header(out: &mut String, kind: &str, variant: &str, fc: &FeatureConfig) {
    let orders: Vec<String> = fc.ngram_orders.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "format = \"{FORMAT}\"");
    let _ = writeln!(out, "version = {VERSION}");
    let _ = writeln!(out, "kind = \"{kind}\"");
    let _ = writeln!(out, "variant = \"{variant}\"");
    let _ = writeln!(out, "dim = {}", fc.dim);
    let _ = writeln!(out, "ngram_orders = [{}]", orders.join(", "));
    let _ = writeln!(out, "lowercase = {}", fc.lowercase);
    let _ = writeln!(out, "hash = \"{HASH}\"");
    let _ = writeln!(out, "fnv_offset = \"{FNV_OFFSET:#018x}\"");
    let _ = writeln!(out, "fnv_prime = \"{FNV_PRIME:#018x}\"");
    let _ = writeln!(out, "ngram_key = \"{NGRAM_KEY}\"");
    let _ = writeln!(out, "tokenizer = \"{TOKENIZER}\"");
}

fn push_params(out: &mut String, params: &[f64]) -> std::result::Result<(), String> {
    let _ = writeln!(out, "n_params = {}", params.len());
    let _ = writeln!(out, "{SEPARATOR}");
    for p in params {
        if !p.is_finite() {
            return Err("refusing to write a non-finite parameter".into());
        }
        let _ = writeln!(out, "{p:?}");
    }
    Ok(())
}

pub fn seq_model_to_string(model: &SequenceLabelerModel) -> std::result::Result<String, String> {
    let mut out = String::new();
    common_header(&mut out, "SEQ", model.variant().name(), &model.feature_config);
    let _ = writeln!(out, "trained_on = \"{}\"", model.trained_on.name());
    let _ = writeln!(out, "seed = \"{}\"", model.seed);
    let shapes = match &model.params {
        LabelerParams::Logistic(m) => linear_shapes(m.dim),
        LabelerParams::Birnn(b) => {
            let _ = writeln!(out, "input = {}", b.layout.input);
            let _ = writeln!(out, "hidden = {}", b.layout.hidden);
            b.layout.shape_description()
        }
    };
    let _ = writeln!(out, "shapes = \"{shapes}\"");
    push_params(&mut out, &model.to_flat())?;
    Ok(out)
}

pub fn expr_model_to_string(model: &ExprModel) -> std::result::Result<String, String> {
    let mut out = String::new();
    common_header(&mut out, "EXPR", "EXPR", &model.feature_config);
    let _ = writeln!(out, "seed = \"0\"");
    let _ = writeln!(out, "delta_days = {}", model.delta_days);
    let _ = writeln!(out, "shapes = \"{}\"", linear_shapes(model.linear.dim));
    push_params(&mut out, &model.linear.to_flat())?;
    Ok(out)
}

fn split_file(text: &str) -> std::result::Result<(Header, Vec<f64>), String> {
    let marker = format!("\n{SEPARATOR}\n");
    let cut = text.find(&marker).ok_or("missing '---' separator")?;
    let header: Header = toml::from_str(&text[..cut]).map_err(|e| e.to_string())?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(format!("unsupported format {} v{}", header.format, header.version));
    }
    if header.hash != HASH
        || header.fnv_offset != format!("{FNV_OFFSET:#018x}")
        || header.fnv_prime != format!("{FNV_PRIME:#018x}")
        || header.ngram_key != NGRAM_KEY
        || header.tokenizer != TOKENIZER
    {
        return Err("feature hashing scheme differs from this build".into());
    }
    let body = &text[cut + marker.len()..];
    let params = body
        .lines()
        .enumerate()
        .map(|(i, l)| l.trim().parse::<f64>().map_err(|e| format!("parameter {}: {e}", i + 1)))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if params.len() != header.n_params {
        return Err(format!("header promises {} parameters, found {}", header.n_params, params.len()));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err("non-finite parameter".into());
    }
    Ok((header, params))
}

fn feature_config(h: &Header) -> std::result::Result<FeatureConfig, String> {
    let fc = FeatureConfig { ngram_orders: h.ngram_orders.clone(), dim: h.dim, lowercase: h.lowercase };
    fc.validate().map_err(|e| e.to_string())?;
    Ok(fc)
}

fn check_shapes(h: &Header, want: &str) -> std::result::Result<(), String> {
    if h.shapes != want {
        return Err(format!("shapes {:?} do not match {:?}", h.shapes, want));
    }
    Ok(())
}

pub fn parse_seq_model(text: &str) -> std::result::Result<SequenceLabelerModel, String> {
    let (h, params) = split_file(text)?;
    if h.kind != "SEQ" {
        return Err(format!("expected a SEQ model, found {}", h.kind));
    }
    let fc = feature_config(&h)?;
    let trained_on = match h.trained_on.as_deref() {
        Some("ORIGINAL") => TimelineKind::Original,
        Some("SIMULATED") => TimelineKind::Simulated,
        other => return Err(format!("bad trained_on {other:?}")),
    };
    let seed: u64 = h.seed.parse().map_err(|_| format!("bad seed {:?}", h.seed))?;
    let params = match h.variant.as_str() {
        "INDEPENDENT-LOGISTIC" => {
            check_shapes(&h, &linear_shapes(fc.dim))?;
            LabelerParams::Logistic(LinearSoftmax::from_flat(fc.dim, &params).ok_or("parameter count")?)
        }
        "BIRNN" => {
            let (Some(input), Some(hidden)) = (h.input, h.hidden) else {
                return Err("BIRNN header needs input and hidden".into());
            };
            let layout = BirnnLayout { dim: fc.dim, input, hidden };
            check_shapes(&h, &layout.shape_description())?;
            LabelerParams::Birnn(Birnn::from_flat(layout, params).ok_or("parameter count")?)
        }
        v => return Err(format!("unknown variant {v:?}")),
    };
    Ok(SequenceLabelerModel { feature_config: fc, trained_on, seed, params })
}

pub fn parse_expr_model(text: &str) -> std::result::Result<ExprModel, String> {
    let (h, params) = split_file(text)?;
    if h.kind != "EXPR" || h.variant != "EXPR" {
        return Err(format!("expected an EXPR model, found {}", h.kind));
    }
    let fc = feature_config(&h)?;
    check_shapes(&h, &linear_shapes(fc.dim))?;
    let delta_days = h.delta_days.ok_or("EXPR header needs delta_days")?;
    let linear = LinearSoftmax::from_flat(fc.dim, &params).ok_or("parameter count")?;
    Ok(ExprModel { linear, feature_config: fc, delta_days })
}

fn write_text(path: &Path, text: std::result::Result<String, String>) -> Result<()> {
    let text = text.map_err(|message| Error::Format { path: path.to_path_buf(), message })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_with<T>(path: &Path, parse: fn(&str) -> std::result::Result<T, String>) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(|message| Error::Format { path: path.to_path_buf(), message })
}

pub fn write_seq_model(path: &Path, model: &SequenceLabelerModel) -> Result<()> {
    write_text(path, seq_model_to_string(model))
}

pub fn write_expr_model(path: &Path, model: &ExprModel) -> Result<()> {
    write_text(path, expr_model_to_string(model))
}

pub fn read_seq_model(path: &Path) -> Result<SequenceLabelerModel> {
    read_with(path, parse_seq_model)
}

pub fn read_expr_model(path: &Path) -> Result<ExprModel> {
    read_with(path, parse_expr_model)
}
