use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrsteg_core::elgamal::keyfile::read_public;
use qrsteg_core::videoio::read_y4m;

fn qrsteg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrsteg"))
        .args(args)
        .env_remove("QRSTEG_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qrsteg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code plus the parsed machine-readable error line.
fn fails(args: &[&str]) -> (i32, serde_json::Value) {
    let out = qrsteg(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no error line: {stderr}"));
    (out.status.code().unwrap(), serde_json::from_str(line).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    /// 64x48 natural clip with QR images and a key pair.
    fn new(frames: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let f = frames.to_string();
        ok(&["keygen", "--pub", s(&root.join("k.pub")), "--priv", s(&root.join("k.priv")), "--seed", "3"]);
        ok(&[
            "synth", "--width", "64", "--height", "48", "--frames", &f, "--seed", "4", "--output",
            s(&root.join("cover.y4m")), "--qr-dir", s(&root.join("qr")),
        ]);
        Fixture { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn qr_args(&self) -> Vec<String> {
        ["l", "m", "q", "h"]
            .iter()
            .flat_map(|l| {
                [format!("--qr-{l}"), s(&self.path(&format!("qr/qr_{}.pgm", l.to_uppercase()))).to_string()]
            })
            .collect()
    }

    fn embed(&self, input: &str, output: &str, seed: &str, extra: &[&str]) -> Output {
        let key = self.path("k.pub");
        let qr = self.qr_args();
        let mut args = vec!["embed", "--input", input, "--output", output, "--pub", s(&key), "--seed", seed];
        args.extend(qr.iter().map(String::as_str));
        args.extend_from_slice(extra);
        qrsteg(&args)
    }

    fn extract(&self, input: &Path, seed: &str, out: &str) -> Output {
        let sidecar = format!("{}.sidecar.json", s(&self.path("stego.y4m")));
        let mut args: Vec<String> = [
            "extract", "--input", s(input), "--sidecar", &sidecar, "--pub", s(&self.path("k.pub")), "--priv",
            s(&self.path("k.priv")), "--seed", seed, "--output", s(&self.path(out)),
        ]
        .iter()
        .map(|a| a.to_string())
        .collect();
        args.extend(self.qr_args());
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        qrsteg(&args)
    }
}

#[test]
fn keygen_paper_fidelity_forced_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let (pubk, privk) = (dir.path().join("a.pub"), dir.path().join("a.priv"));
    let out = ok(&["keygen", "--paper-fidelity", "--x", "420", "--pub", s(&pubk), "--priv", s(&privk)]);
    assert!(out.contains("y = 12"), "{out}");
    let public = read_public(&pubk).unwrap();
    assert_eq!((public.p.to_string(), public.alpha.to_string(), public.y.to_string()), ("997".into(), "809".into(), "12".into()));

    let (code, err) = fails(&["keygen", "--paper-fidelity", "--pub", s(&pubk), "--priv", s(&privk)]);
    assert_eq!(code, 2);
    assert_eq!(err["error"], "usage");
    ok(&["keygen", "--paper-fidelity", "--pub", s(&pubk), "--priv", s(&privk), "--force"]);

    let (code, err) = fails(&["keygen", "--paper-fidelity", "--x", "996", "--pub", s(&pubk), "--priv", s(&privk), "--force"]);
    assert_eq!((code, err["code"].as_i64()), (4, Some(4)));
}

#[test]
fn keygen_unseeded_runs_differ() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["keygen", "--pub", s(&d.join("1.pub")), "--priv", s(&d.join("1.priv"))]);
    ok(&["keygen", "--pub", s(&d.join("2.pub")), "--priv", s(&d.join("2.priv"))]);
    assert_ne!(fs::read(d.join("1.priv")).unwrap(), fs::read(d.join("2.priv")).unwrap());
}

#[test]
fn keygen_fresh_safe_prime() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(&["keygen", "--bits", "64", "--seed", "1", "--pub", s(&d.join("k.pub")), "--priv", s(&d.join("k.priv"))]);
    assert!(out.starts_with("wrote 64-bit"), "{out}");
    // loading re-validates primality and the generator
    read_public(&d.join("k.pub")).unwrap();
}

#[test]
fn embed_extract_and_wrong_key() {
    let fx = Fixture::new(4);
    let out = fx.embed(s(&fx.path("cover.y4m")), s(&fx.path("stego.y4m")), "77", &["--report", s(&fx.path("q.csv"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("capacity: 1.000000 bpp (12288 bits)"), "{stdout}");
    let csv = fs::read_to_string(fx.path("q.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("frame_index,mse,psnr\n"));

    let good = fx.extract(&fx.path("stego.y4m"), "77", "out");
    assert!(good.status.success());
    assert!(String::from_utf8(good.stdout).unwrap().contains("1.0000 1.0000 1.0000 1.0000"));
    assert!(fx.path("out/frame00003_Q.pgm").exists());

    let bad = fx.extract(&fx.path("stego.y4m"), "78", "bad");
    assert!(bad.status.success());
    assert!(String::from_utf8(bad.stderr).unwrap().contains("warning: stego key fingerprint"));
    let line = String::from_utf8(bad.stdout).unwrap();
    let ssim: Vec<f64> = line.split(':').nth(2).unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!(ssim.iter().all(|v| v.abs() < 0.2), "{ssim:?}");
}

#[test]
fn passphrase_and_env_seed() {
    let fx = Fixture::new(1);
    let stego = s(&fx.path("stego.y4m")).to_string();
    let out = fx.embed(s(&fx.path("cover.y4m")), &stego, "5", &["--passphrase", "x"]);
    assert_eq!(out.status.code(), Some(2));

    let mut args: Vec<String> = ["embed", "--input", s(&fx.path("cover.y4m")), "--output", &stego, "--pub", s(&fx.path("k.pub"))]
        .iter()
        .map(|a| a.to_string())
        .collect();
    args.extend(fx.qr_args());
    let out = Command::new(env!("CARGO_BIN_EXE_qrsteg")).args(&args).env("QRSTEG_SEED", "5").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(&stego).unwrap();
    let out = fx.embed(s(&fx.path("cover.y4m")), &stego, "5", &[]);
    assert!(out.status.success());
    assert_eq!(fs::read(&stego).unwrap(), first);

    let out = Command::new(env!("CARGO_BIN_EXE_qrsteg")).args(&args).env_remove("QRSTEG_SEED").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fresh_exponents_vary_between_runs() {
    let fx = Fixture::new(2);
    for name in ["a.y4m", "b.y4m"] {
        let out = fx.embed(s(&fx.path("cover.y4m")), s(&fx.path(name)), "9", &["--fresh-exponents"]);
        assert!(out.status.success());
    }
    assert_ne!(fs::read(fx.path("a.y4m")).unwrap(), fs::read(fx.path("b.y4m")).unwrap());
}

#[test]
fn capacity_mismatch_exit_code() {
    let fx = Fixture::new(1);
    ok(&["synth", "--width", "32", "--height", "32", "--frames", "1", "--output", s(&fx.path("small.y4m"))]);
    let out = fx.embed(s(&fx.path("small.y4m")), s(&fx.path("x.y4m")), "1", &[]);
    assert_eq!(out.status.code(), Some(5));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(v["error"], "capacity");
}

#[test]
fn format_and_usage_errors() {
    let fx = Fixture::new(1);
    // zero frames
    ok(&["synth", "--width", "64", "--height", "48", "--frames", "0", "--output", s(&fx.path("empty.y4m"))]);
    let out = fx.embed(s(&fx.path("empty.y4m")), s(&fx.path("x.y4m")), "1", &[]);
    assert_eq!(out.status.code(), Some(3));

    // not a Y4M file and no raw dimensions
    fs::write(fx.path("junk.bin"), b"hello").unwrap();
    let out = fx.embed(s(&fx.path("junk.bin")), s(&fx.path("x.y4m")), "1", &[]);
    assert_eq!(out.status.code(), Some(2));

    // missing sidecar
    let out = fx.extract(&fx.path("cover.y4m"), "1", "o");
    assert_eq!(out.status.code(), Some(3));

    // missing --pub
    let (code, err) = fails(&["embed", "--input", "a", "--output", "b", "--seed", "1", "--qr-l", "1", "--qr-m", "2", "--qr-q", "3", "--qr-h", "4"]);
    assert_eq!((code, err["error"].as_str()), (2, Some("usage")));

    // clap-level errors still emit the machine line
    let (code, _) = fails(&["embed", "--bogus"]);
    assert_eq!(code, 2);
    let (code, _) = fails(&["attack", "--input", "a", "--output", "b", "--attack", "blur:3"]);
    assert_eq!(code, 2);
}

#[test]
fn raw_input_matches_y4m_input() {
    let fx = Fixture::new(2);
    let (_, frames) = read_y4m(std::io::BufReader::new(fs::File::open(fx.path("cover.y4m")).unwrap())).unwrap();
    let mut raw = Vec::new();
    for f in frames {
        for p in f.unwrap().planes() {
            raw.extend_from_slice(p);
        }
    }
    fs::write(fx.path("cover.yuv"), &raw).unwrap();
    assert!(fx.embed(s(&fx.path("cover.y4m")), s(&fx.path("a.y4m")), "3", &[]).status.success());
    let out = fx.embed(s(&fx.path("cover.yuv")), s(&fx.path("b.y4m")), "3", &["--width", "64", "--height", "48"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(fx.path("a.y4m")).unwrap(), fs::read(fx.path("b.y4m")).unwrap());

    fs::write(fx.path("short.yuv"), &raw[..raw.len() - 1]).unwrap();
    let out = fx.embed(s(&fx.path("short.yuv")), s(&fx.path("c.y4m")), "3", &["--width", "64", "--height", "48"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn attack_identity_is_byte_identical_and_seeded() {
    let fx = Fixture::new(3);
    let cover = s(&fx.path("cover.y4m")).to_string();
    ok(&["attack", "--input", &cover, "--output", s(&fx.path("same.y4m")), "--attack", "none", "--attack", "none", "--seed", "1"]);
    assert_eq!(fs::read(&cover).unwrap(), fs::read(fx.path("same.y4m")).unwrap());

    for name in ["n1.y4m", "n2.y4m"] {
        ok(&["attack", "--input", &cover, "--output", s(&fx.path(name)), "--attack", "sp:0.1", "--attack", "gauss:0:0.01", "--seed", "8"]);
    }
    let n1 = fs::read(fx.path("n1.y4m")).unwrap();
    assert_eq!(n1, fs::read(fx.path("n2.y4m")).unwrap());
    assert_eq!(n1.len(), fs::read(&cover).unwrap().len());
    assert_ne!(n1, fs::read(&cover).unwrap());
}

#[test]
fn attacked_stego_degrades_gracefully() {
    let fx = Fixture::new(2);
    assert!(fx.embed(s(&fx.path("cover.y4m")), s(&fx.path("stego.y4m")), "6", &[]).status.success());
    ok(&["attack", "--input", s(&fx.path("stego.y4m")), "--output", s(&fx.path("noisy.y4m")), "--attack", "sp:0.01", "--seed", "2"]);
    let out = fx.extract(&fx.path("noisy.y4m"), "6", "noisy");
    let line = String::from_utf8(out.stdout).unwrap();
    let ssim: Vec<f64> = line.split(':').nth(2).unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!(ssim.iter().all(|&v| v > 0.85 && v < 1.0), "{ssim:?}");
}

#[test]
fn bench_empty_and_noise_free() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (t1, t2) = (d.join("t1.csv"), d.join("t2.csv"));
    ok(&["bench", "--input", s(d), "--report", s(&t1), "--ssim-report", s(&t2)]);
    assert_eq!(
        fs::read_to_string(&t1).unwrap(),
        "video,frames,width,height,psnr_db,psnr_y_db,mse,clip_mse,capacity_bpp,bp_bytes_per_frame\n"
    );
    assert_eq!(fs::read_to_string(&t2).unwrap(), "video,attack,ssim_l,ssim_m,ssim_q,ssim_h\n");

    for (name, pattern) in [("a.y4m", "gradient"), ("b.y4m", "moving-block")] {
        ok(&["synth", "--pattern", pattern, "--width", "64", "--height", "64", "--frames", "3", "--output", s(&d.join(name))]);
    }
    let out = ok(&["bench", "--input", s(d), "--seed", "4", "--attack", "none", "--attack", "sp:0.01", "--seeds", "2"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 1 + 2 * 3, "{out}");
    assert!(lines[1].starts_with("a,3,64,64,") && lines[1].contains(",1.000000,"), "{}", lines[1]);
    for row in lines.iter().filter(|l| l.contains(",none,")) {
        assert!(row.ends_with("1.0000,1.0000,1.0000,1.0000"), "{row}");
    }
    let again = ok(&["bench", "--input", s(d), "--seed", "4", "--attack", "none", "--attack", "sp:0.01", "--seeds", "2"]);
    assert_eq!(out, again);
}
