use std::process::Command;

fn main() {
    let describe = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    let version = env!("CARGO_PKG_VERSION");
    let full = match describe {
        // Untagged repositories describe as a bare hash.
        Some(d) if d.starts_with('v') => d,
        Some(d) => format!("v{version}-g{d}"),
        None => format!("v{version}"),
    };
    println!("cargo:rustc-env=MODBISECT_VERSION={full}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
}
