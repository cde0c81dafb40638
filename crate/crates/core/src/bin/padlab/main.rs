mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Map, Value};

use args::{Cli, Format};
use commands::{error_kind, exit_code, run};

const SCHEMA: &str = "padlab/1";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mut doc, code) = match run(&cli) {
        Ok(outcome) => (outcome.doc, outcome.exit),
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            let mut m = Map::new();
            m.insert("error".into(), json!({ "kind": error_kind(&e), "message": e.to_string() }));
            (m, code)
        }
    };
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("exit_code".into(), json!(code));
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable")),
        Format::Text => print!("{}", render_text(&doc)),
    }
    ExitCode::from(code as u8)
}

/// One `key: value` line per field; nested values stay compact JSON.
fn render_text(doc: &Map<String, Value>) -> String {
    doc.iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}: {s}\n"),
            other => format!("{k}: {other}\n"),
        })
        .collect()
}
