use std::process::Command;

// Bakes `git describe` into the binary so every metadata sidecar names the
// exact tree that produced it. Falls back to "unknown" outside a checkout.
fn main() {
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .map(|out| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=DRONECELL_GIT_DESCRIBE={describe}");
}
