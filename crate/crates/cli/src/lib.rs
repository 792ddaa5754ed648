//! The `foldcons` command-line harness: ingest datasets, build graphs, train
//! models, print recommendations and run evaluation sweeps and studies.
//! Every run writes a JSON manifest with its resolved configuration and
//! input checksums.

pub mod args;
pub mod commands;
pub mod manifest;

use std::io::Write;

use anyhow::Result;

use args::{Cli, Command};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => commands::cmd_ingest(cli, a, out),
        Command::Graph(a) => commands::cmd_graph(cli, a, out),
        Command::Train(a) => commands::cmd_train(cli, a, out),
        Command::Recommend(a) => commands::cmd_recommend(cli, a, out),
        Command::Evaluate(a) => commands::cmd_evaluate(cli, a, out),
        Command::Study(a) => commands::cmd_study(cli, a, out),
        Command::Synth(a) => commands::cmd_synth(cli, a, out),
    }
}
