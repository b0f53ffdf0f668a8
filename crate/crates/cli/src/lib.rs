//! Command-line driver for `eastlab`: one subcommand per experiment, each
//! writing a CSV table or a single JSON object whose first line identifies
//! the tool version, the run hash and the seed.

pub mod acceptance;
pub mod args;
pub mod config;
pub mod output;

mod commands;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command, Common};

pub use output::{RunSpec, Table};

/// Run the tool on `argv` (without the program name) and return the exit
/// code: 0 on success, 1 on a runtime failure, 2 on invalid arguments.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", Cli::command().render_usage());
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("eastlab")).chain(argv)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Simulate(a) => &a.common,
        Command::Fpp(a) => &a.common,
        Command::PercCrossing(a) => &a.common,
        Command::PercPc(a) => &a.common,
        Command::PercSurvival(a) => &a.common,
        Command::Constants(a) => &a.common,
        Command::MixExact(a) => &a.common,
        Command::MixCouple(a) => &a.common,
        Command::Rho(a) => &a.common,
        Command::Front(a) => &a.common,
        Command::Accept(a) => &a.common,
    }
}

fn dispatch(cmd: &Command) -> anyhow::Result<i32> {
    let go = || match cmd {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fpp(a) => commands::fpp(a),
        Command::PercCrossing(a) => commands::perc_crossing(a),
        Command::PercPc(a) => commands::perc_pc(a),
        Command::PercSurvival(a) => commands::perc_survival(a),
        Command::Constants(a) => commands::constants(a),
        Command::MixExact(a) => commands::mix_exact(a),
        Command::MixCouple(a) => commands::mix_couple(a),
        Command::Rho(a) => commands::rho(a),
        Command::Front(a) => commands::front(a),
        Command::Accept(a) => commands::accept(a),
    };
    match common(cmd).jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()?
            .install(go),
        None => go(),
    }
}
