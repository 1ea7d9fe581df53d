//! Result envelopes, input hashing and error mapping.

use std::fs;
use std::path::Path;

use cfnet::{Error, NetworkSpec};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::{Common, Format};

pub const TOOL: &str = "cfnet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    /// Bad invocation or unreadable input file: exit status 2.
    Usage(String),
    /// The analysis itself failed: exit status 1 with an error document.
    Domain(Value),
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Alphabet { .. } | Error::AlphabetMismatch { .. } => "alphabet",
        Error::Parse(_) => "parse",
        Error::Domain(_) => "domain",
        Error::InvalidNode { .. } => "invalid_node",
        Error::SubgraphBudget { .. } => "subgraph_budget",
        Error::Condition(_) => "condition",
        Error::Truncation { .. } => "truncation",
        Error::Model(_) => "model",
        Error::NoConvergence { .. } => "no_convergence",
    }
}

pub fn domain(kind: &str, message: impl Into<String>) -> Failure {
    Failure::Domain(json!({
        "tool": TOOL,
        "version": VERSION,
        "error": { "kind": kind, "message": message.into() },
    }))
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // Node indices are 1-based outside the library.
        let message = match &e {
            Error::InvalidNode { index, nodes } => {
                format!("node {} does not exist (network has {nodes} nodes)", index + 1)
            }
            other => other.to_string(),
        };
        domain(error_kind(&e), message)
    }
}

pub struct Input {
    pub net: NetworkSpec,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_net(path: &Path) -> Outcome<Input> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| domain("parse", format!("{} is not UTF-8", path.display())))?;
    let net: NetworkSpec = serde_json::from_str(text).map_err(|e| domain("parse", format!("{}: {e}", path.display())))?;
    Ok(Input {
        net,
        sha256: sha256_hex(&bytes),
    })
}

/// Converts a 1-based node index from the command line.
pub fn node_index(net: &NetworkSpec, one_based: usize, flag: &str) -> Outcome<usize> {
    if one_based == 0 || one_based > net.node_count() {
        return Err(domain(
            "invalid_node",
            format!("--{flag} {one_based} is outside 1..={}", net.node_count()),
        ));
    }
    Ok(one_based - 1)
}

pub fn envelope(command: &str, input_sha256: Option<&str>, parameters: Value, result: Value) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "input_sha256": input_sha256,
        "parameters": parameters,
        "result": result,
    })
}

/// Comment lines that carry the provenance of a CSV file.
pub fn csv_header(command: &str, input_sha256: Option<&str>, parameters: &Value) -> String {
    format!(
        "# {TOOL} {VERSION} {command}\n# input_sha256: {}\n# parameters: {}\n",
        input_sha256.unwrap_or("none"),
        parameters
    )
}

pub fn format_of(common: &Common, default: Format) -> Format {
    common.format.unwrap_or(default)
}

pub fn emit(common: &Common, text: &str) -> Outcome {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json(common: &Common, doc: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable output");
    text.push('\n');
    emit(common, &text)
}

pub fn require_json(common: &Common, command: &str) -> Outcome {
    if common.format == Some(Format::Csv) {
        return Err(Failure::Usage(format!("{command} has no CSV output")));
    }
    Ok(())
}
