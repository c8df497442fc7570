use clap::Parser;
use fixwit::commands::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let json = cli.json;
    let out = run(cli);
    if json {
        println!("{}", serde_json::to_string_pretty(&out.json).expect("json output"));
    } else if out.code == 2 {
        eprint!("{}", if out.text.ends_with('\n') { out.text.clone() } else { format!("{}\n", out.text) });
    } else {
        print!("{}", out.text);
    }
    std::process::exit(out.code);
}
