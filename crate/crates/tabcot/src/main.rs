fn main() {
    // Restore the default SIGPIPE disposition so `tabcot ... | head` dies
    // quietly like other Unix tools instead of panicking on a closed pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(tabcot::cli::run());
}
