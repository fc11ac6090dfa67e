fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(revtherm::main_with_args(std::env::args_os()) as u8)
}
