use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lkss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lkss")).args(args).output().expect("run lkss")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SCHEME: [&str; 8] = ["-T", "4", "--tau", "3", "-z", "2", "--alpha", "1/4"];

fn split(dir: &Path, data: &[u8], seed: &str, extra: &[&str]) -> Output {
    let input = dir.join("input.bin");
    fs::write(&input, data).unwrap();
    let out = dir.join("shares");
    let mut args = vec!["split", input.to_str().unwrap()];
    args.extend(SCHEME);
    args.extend(extra);
    args.extend(["-o", out.to_str().unwrap(), "--seed", seed, "--insecure-seed-ok"]);
    lkss(&args)
}

fn share(dir: &Path, t: usize) -> PathBuf {
    dir.join("shares").join(format!("share_{t}.lkss"))
}

fn recover(dir: &Path, servers: &[usize]) -> (Output, PathBuf) {
    let out = dir.join("recovered.bin");
    let paths: Vec<String> = servers.iter().map(|&t| share(dir, t).display().to_string()).collect();
    let mut args = vec!["recover"];
    args.extend(paths.iter().map(String::as_str));
    args.extend(["-o", out.to_str().unwrap()]);
    (lkss(&args), out)
}

#[test]
fn split_then_recover_from_any_three() {
    let dir = TempDir::new().unwrap();
    let data: Vec<u8> = (0..5000u32).map(|i| (i * 37 % 251) as u8).collect();
    let o = split(dir.path(), &data, "7", &[]);
    assert_eq!(code(&o), 0, "{o:?}");
    for servers in [[1, 2, 3], [2, 3, 4], [4, 1, 3]] {
        let (o, out) = recover(dir.path(), &servers);
        assert_eq!(code(&o), 0, "{o:?}");
        assert_eq!(fs::read(out).unwrap(), data);
    }
}

#[test]
fn empty_file_round_trips() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&split(dir.path(), &[], "1", &[])), 0);
    let (o, out) = recover(dir.path(), &[1, 2, 4]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(fs::read(out).unwrap().is_empty());
}

#[test]
fn share_size_follows_the_plan() {
    // 16 bytes at q = 65537 are 8 symbols of 16 bits; one superblock of
    // 8 symbols puts 6 four-byte symbols on each server.
    let dir = TempDir::new().unwrap();
    let o = split(dir.path(), &[0xab; 16], "2", &["-q", "65537"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let want = lkss::sharefile::HEADER_LEN as u64 + 6 * 4;
    for t in 1..=4 {
        assert_eq!(fs::metadata(share(dir.path(), t)).unwrap().len(), want);
    }
    assert!(stdout(&o).contains(&format!("{want} bytes each")));
}

#[test]
fn same_seed_same_shares() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let data = b"the same bytes, split three times";
    split(a.path(), data, "11", &[]);
    split(b.path(), data, "11", &[]);
    split(c.path(), data, "12", &[]);
    for t in 1..=4 {
        let (x, y, z) = (
            fs::read(share(a.path(), t)).unwrap(),
            fs::read(share(b.path(), t)).unwrap(),
            fs::read(share(c.path(), t)).unwrap(),
        );
        assert_eq!(x, y);
        assert_ne!(x, z);
    }
}

#[test]
fn two_shares_are_not_enough() {
    let dir = TempDir::new().unwrap();
    split(dir.path(), b"secret", "3", &[]);
    let (o, out) = recover(dir.path(), &[1, 4]);
    assert_eq!(code(&o), 2, "{o:?}");
    assert!(!out.exists());
}

#[test]
fn corrupted_share_is_rejected() {
    let dir = TempDir::new().unwrap();
    split(dir.path(), b"some bytes worth keeping", "4", &[]);
    let path = share(dir.path(), 2);
    let mut bytes = fs::read(&path).unwrap();
    bytes[0] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    let (o, _) = recover(dir.path(), &[1, 2, 3]);
    assert_eq!(code(&o), 1, "{o:?}");

    let path = share(dir.path(), 3);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    let (o, _) = recover(dir.path(), &[1, 3, 4]);
    assert_eq!(code(&o), 1, "{o:?}");
}

#[test]
fn seed_needs_acknowledgement() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in");
    fs::write(&input, b"x").unwrap();
    let mut args = vec!["split", input.to_str().unwrap()];
    args.extend(SCHEME);
    args.extend(["-o", dir.path().to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code(&lkss(&args)), 1);
}

#[test]
fn missing_input_is_an_io_error() {
    let mut args = vec!["split", "/nonexistent/input"];
    args.extend(SCHEME);
    args.extend(["-o", "/tmp"]);
    let o = lkss(&args);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/input"));
}

#[test]
fn plan_reports_ratios() {
    let o = lkss(&["plan", "-T", "12", "--tau", "7", "-z", "6", "--alpha", "0"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let s = stdout(&o);
    assert!(s.contains("lambda/H(F) = 1/1"), "{s}");
    assert!(s.contains("lambda_sum/H(F) = 12/1"), "{s}");
    assert!(s.contains("rho/H(F) = 6/1"), "{s}");
}

#[test]
fn plan_writes_access_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("g.csv");
    let mut args = vec!["plan"];
    args.extend(SCHEME);
    args.extend(["--access-csv", csv.to_str().unwrap()]);
    assert_eq!(code(&lkss(&args)), 0);
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 6, "{text}");
}

#[test]
fn sweep_emits_one_row_per_point() {
    let o = lkss(&["sweep", "-T", "5", "--tau", "3", "--alpha-den", "4"]);
    assert_eq!(code(&o), 0, "{o:?}");
    // Header plus z in {1, 2} times alpha in {0, 1/4, ..., 1}.
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 5);
}

#[test]
fn verify_passes_on_a_small_scheme() {
    let mut args = vec!["verify"];
    args.extend(SCHEME);
    args.extend(["-q", "11"]);
    let o = lkss(&args);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn converse_certifies_the_bound() {
    let o = lkss(&["converse", "-z", "2", "--tau", "3", "--alpha", "1/4", "-D", "8"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let s = stdout(&o);
    assert!(s.contains("min = 3/4"), "{s}");
    assert!(s.trim_end().ends_with("PASS"));
}

#[test]
fn bad_parameters_exit_one() {
    assert_eq!(code(&lkss(&["plan", "-T", "4", "--tau", "3", "-z", "3", "--alpha", "0"])), 1);
    assert_eq!(code(&lkss(&["plan", "-T", "4", "--tau", "3", "-z", "1", "--alpha", "3/2"])), 1);
    assert_eq!(code(&lkss(&["frobnicate"])), 1);
    assert_eq!(code(&lkss(&["--help"])), 0);
}
