fn main() {
    // Placeholder during bring-up; the CLI is wired once the solver stack exists.
    eprintln!("rhosum: not yet wired");
    std::process::exit(4);
}
