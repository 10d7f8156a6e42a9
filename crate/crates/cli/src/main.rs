use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(mes_topology_cli::dispatch(std::env::args_os()).code())
}
