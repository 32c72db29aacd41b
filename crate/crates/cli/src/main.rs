fn main() {
    let code = quest_cli::run(
        std::env::args_os(),
        &|key| std::env::var(key).ok(),
        &mut quest_cli::Io::std(),
    );
    std::process::exit(code);
}
