use std::io::Write;

fn main() {
    pin_blas_kernels();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = capbound::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}

/// OpenBLAS 0.3.20 picks AVX-512 kernels on recent Intel parts that break
/// the solver's factorizations. The choice is made when the library loads,
/// so pin a safe kernel set and restart once. `OPENBLAS_CORETYPE` set by the
/// caller is respected.
#[cfg(all(unix, target_arch = "x86_64"))]
fn pin_blas_kernels() {
    use std::os::unix::process::CommandExt;
    const VAR: &str = "OPENBLAS_CORETYPE";
    if std::env::var_os(VAR).is_some() || !std::arch::is_x86_feature_detected!("avx512f") {
        return;
    }
    let Ok(exe) = std::env::current_exe() else { return };
    let mut args = std::env::args_os();
    let argv0 = args.next().unwrap_or_default();
    // Only returns on failure, in which case we carry on unpinned.
    let _ = std::process::Command::new(exe).arg0(argv0).args(args).env(VAR, "Haswell").exec();
}

#[cfg(not(all(unix, target_arch = "x86_64")))]
fn pin_blas_kernels() {}
