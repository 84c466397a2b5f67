//! Runs a config through the CLI entry point and renders the stored world tree.

use worldsim::cli::{execute, export_tree, load_config, parse_config, Style};

fn main() {
    let text = "scenario = \"mzi\"\n[params]\nmode = \"PI\"\ntheta = 1.5707963267948966\n";
    let cfg = load_config(parse_config("inline", text).unwrap()).unwrap();
    let report = execute(&cfg).unwrap();
    print!("{}", export_tree(&report.text, Style::Graphviz).unwrap());
}
