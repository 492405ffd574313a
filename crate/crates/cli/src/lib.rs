pub mod args;
pub mod commands;
pub mod manifest;

use std::path::Path;

use args::{Cli, Command};
use manifest::Run;

fn out_dir(command: &Command) -> &Path {
    match command {
        Command::Ingest(a) => &a.out,
        Command::Fetch(a) => &a.out,
        Command::Prestige(a) => &a.out,
        Command::Solve(a) => &a.out,
        Command::Score(a) => &a.out,
        Command::Segment(a) => &a.out,
        Command::Report(a) => &a.out,
        Command::Synth(a) => &a.out,
    }
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Ingest(_) => "ingest",
        Command::Fetch(_) => "fetch",
        Command::Prestige(_) => "prestige",
        Command::Solve(_) => "solve",
        Command::Score(_) => "score",
        Command::Segment(_) => "segment",
        Command::Report(_) => "report",
        Command::Synth(_) => "synth",
    }
}

/// Run one subcommand and write its manifest, also on failure.
/// Returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let command = &cli.command;
    let mut run = Run::new(name(command), out_dir(command));
    let result = match command {
        Command::Ingest(a) => commands::ingest(&mut run, a),
        Command::Fetch(a) => commands::fetch(&mut run, a),
        Command::Prestige(a) => commands::prestige(&mut run, a),
        Command::Solve(a) => commands::solve(&mut run, a),
        Command::Score(a) => commands::score(&mut run, a),
        Command::Segment(a) => commands::segment(&mut run, a),
        Command::Report(a) => commands::report(&mut run, a),
        Command::Synth(a) => commands::synth(&mut run, a),
    };
    let error = result.err();
    if let Err(e) = run.finish(error.as_ref()) {
        eprintln!("error[manifest]: {e:#}");
        return 2;
    }
    match error {
        None => 0,
        Some(e) => {
            eprintln!("error[{}]: {e:#}", run.current_stage());
            1
        }
    }
}
