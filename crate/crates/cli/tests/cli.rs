use std::fs;
use std::process::{Command, Output};

use motkip_core::codec::dump::{decode_dump, encode_dump};
use motkip_core::codec::KeyMaterial;
use motkip_core::sim::forgery::crc_bitflip;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn motkip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motkip")).args(args).output().expect("running motkip")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Scratch(tempfile::TempDir);

impl Scratch {
    fn new(name: &str) -> Self {
        Scratch(tempfile::Builder::new().prefix(&format!("motkip-cli-{name}-")).tempdir().unwrap())
    }

    fn path(&self, f: &str) -> String {
        self.0.path().join(f).to_str().unwrap().to_string()
    }
}

fn keyfile(dir: &Scratch, name: &str, seed: u64) -> String {
    let p = dir.path(name);
    fs::write(&p, KeyMaterial::from_seed(seed).to_key_file()).unwrap();
    p
}

fn random_file(path: &str, len: usize, seed: u64) -> Vec<u8> {
    let mut data = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut data);
    fs::write(path, &data).unwrap();
    data
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(text: &str, name: &str) -> Vec<(String, f64)> {
    let header: Vec<&str> = text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    csv_rows(text).into_iter().map(|r| (r[0].clone(), r[idx].parse().unwrap())).collect()
}

#[test]
fn keymix_p1_and_p2_lines() {
    let o = motkip(&["keymix", "p1", "--tk", "000102030405060708090a0b0c0d0e0f", "--ta", "102233445566", "--iv32", "00000000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "P1 tk=000102030405060708090a0b0c0d0e0f ta=102233445566 iv32=00000000 -> p1k=3dd2016e76f48697b2e8\n"
    );
    let o = motkip(&["keymix", "p2", "--p1k", "3dd2016e76f48697b2e8", "--tk", "000102030405060708090a0b0c0d0e0f", "--iv16", "0001"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("-> seed=00200190ffdc314389a9d9d074fd20aa\n"));
}

#[test]
fn keymix_bad_hex_is_usage_error() {
    let o = motkip(&["keymix", "p1", "--tk", "zz", "--ta", "102233445566", "--iv32", "00000000"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn keymix_check_annex_and_corrupted_file() {
    let dir = Scratch::new("check");
    let good = motkip_core::vectors::KEYMIX_VECTORS;
    let p = dir.path("good.txt");
    fs::write(&p, good).unwrap();
    assert_eq!(code(&motkip(&["keymix", "--check", &p])), 0);

    let bad = good.replacen("p1k=7c6749d79724b5e9b4f1", "p1k=7c6749d79724b5e9b4f0", 1);
    let line = bad.lines().position(|l| l.contains("b4f0")).unwrap() + 1;
    fs::write(&p, bad).unwrap();
    let o = motkip(&["keymix", "--check", &p]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains(&format!(":{line}: P1 FAILED")), "{}", stderr(&o));
}

#[test]
fn encap_decap_five_megabytes_under_motkip() {
    let dir = Scratch::new("5mb");
    let keys = keyfile(&dir, "keys.txt", 1);
    let input = dir.path("in.bin");
    let data = random_file(&input, 5 * 1024 * 1024, 1);
    let (dump, back) = (dir.path("frames.mtkp"), dir.path("out.bin"));
    let o = motkip(&["encap", "--scheme", "motkip", "--keys", &keys, "--in", &input, "--out", &dump]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = motkip(&["decap", "--scheme", "motkip", "--keys", &keys, "--in", &dump, "--out", &back]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&back).unwrap(), data);
}

#[test]
fn encap_decap_every_scheme_with_fragmentation() {
    let dir = Scratch::new("schemes");
    let keys = keyfile(&dir, "keys.txt", 2);
    let input = dir.path("in.bin");
    let data = random_file(&input, 20_000, 2);
    for scheme in ["plain", "wep", "tkip", "motkip"] {
        let (dump, back) = (dir.path(&format!("{scheme}.mtkp")), dir.path(&format!("{scheme}.out")));
        let o = motkip(&[
            "encap", "--scheme", scheme, "--keys", &keys, "--in", &input, "--out", &dump, "--msdu", "3000", "--max-fragment", "700",
        ]);
        assert_eq!(code(&o), 0, "{scheme}: {}", stderr(&o));
        let o = motkip(&["decap", "--scheme", scheme, "--keys", &keys, "--in", &dump, "--out", &back]);
        assert_eq!(code(&o), 0, "{scheme}: {}", stderr(&o));
        assert_eq!(fs::read(&back).unwrap(), data, "{scheme}");
    }
}

fn encap_small(dir: &Scratch, keys: &str, scheme: &str) -> String {
    let input = dir.path("small.bin");
    random_file(&input, 4000, 3);
    let dump = dir.path("small.mtkp");
    let o = motkip(&["encap", "--scheme", scheme, "--keys", keys, "--in", &input, "--out", &dump, "--msdu", "500"]);
    assert_eq!(code(&o), 0);
    dump
}

#[test]
fn decap_with_wrong_session_key_is_integrity_failure() {
    let dir = Scratch::new("wrongks");
    let keys = keyfile(&dir, "keys.txt", 4);
    let dump = encap_small(&dir, &keys, "motkip");
    let mut wrong = KeyMaterial::from_seed(4);
    wrong.ks[2] ^= 0x10;
    let wrong_path = dir.path("wrong.txt");
    fs::write(&wrong_path, wrong.to_key_file()).unwrap();
    let o = motkip(&["decap", "--scheme", "motkip", "--keys", &wrong_path, "--in", &dump, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("frame 1:"), "{}", stderr(&o));
}

#[test]
fn decap_truncated_dump_is_format_error() {
    let dir = Scratch::new("trunc");
    let keys = keyfile(&dir, "keys.txt", 5);
    let dump = encap_small(&dir, &keys, "tkip");
    let bytes = fs::read(&dump).unwrap();
    fs::write(&dump, &bytes[..bytes.len() - 5]).unwrap();
    let o = motkip(&["decap", "--scheme", "tkip", "--keys", &keys, "--in", &dump, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("malformed frame"), "{}", stderr(&o));
}

#[test]
fn decap_replayed_record_exits_3() {
    let dir = Scratch::new("replay");
    let keys = keyfile(&dir, "keys.txt", 6);
    let dump = encap_small(&dir, &keys, "tkip");
    let mut frames = decode_dump(&fs::read(&dump).unwrap()).unwrap();
    frames.push(frames[2].clone());
    fs::write(&dump, encode_dump(&frames)).unwrap();
    let o = motkip(&["decap", "--scheme", "tkip", "--keys", &keys, "--in", &dump, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn decap_forged_frames_exit_2_then_4() {
    let dir = Scratch::new("forged");
    let keys = keyfile(&dir, "keys.txt", 7);
    let dump = encap_small(&dir, &keys, "motkip");
    let mut frames = decode_dump(&fs::read(&dump).unwrap()).unwrap();
    frames[1] = crc_bitflip(&frames[1], 0, 0x01);
    let one = dir.path("one.mtkp");
    fs::write(&one, encode_dump(&frames)).unwrap();
    let o = motkip(&["decap", "--scheme", "motkip", "--keys", &keys, "--in", &one, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("frame 2: MIC failure"), "{}", stderr(&o));

    frames[3] = crc_bitflip(&frames[3], 5, 0x01);
    let two = dir.path("two.mtkp");
    fs::write(&two, encode_dump(&frames)).unwrap();
    let o = motkip(&["decap", "--scheme", "motkip", "--keys", &keys, "--in", &two, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("blackout"), "{}", stderr(&o));
}

#[test]
fn bad_key_file_is_usage_error() {
    let dir = Scratch::new("badkey");
    let p = dir.path("keys.txt");
    fs::write(&p, KeyMaterial::from_seed(1).to_key_file().replace("key_id=0", "key_id=0\nks=00")).unwrap();
    let input = dir.path("in");
    fs::write(&input, b"x").unwrap();
    let o = motkip(&["encap", "--scheme", "tkip", "--keys", &p, "--in", &input, "--out", &dir.path("o")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_table1_ordering() {
    let o = motkip(&["bench", "--table1", "--msdu", "1500", "--count", "1000", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(csv_rows(&text).len(), 4);
    let g: std::collections::HashMap<_, _> = column(&text, "goodput").into_iter().collect();
    assert!(g["plain"] > g["wep"] && g["wep"] > g["motkip"] && g["motkip"] > g["tkip"], "{g:?}");
    assert!(text.contains("# derived scheme=wep goodput_degradation_pct="));
}

#[test]
fn bench_table2_ordering() {
    let o = motkip(&["bench", "--table2", "--bytes", "5242880"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let c: std::collections::HashMap<_, _> = column(&text, "crypto_octets").into_iter().collect();
    assert!(c["tkip"] > c["motkip"] && c["motkip"] > c["wep"] && c["wep"] > c["plain"], "{c:?}");
    assert!(text.contains("# config msdu_count=3496"));
}

#[test]
fn bench_is_deterministic_and_replayable() {
    let dir = Scratch::new("bench");
    let args = ["bench", "--seed", "3", "--count", "300", "--msdu", "700", "--loss", "0.05", "--reorder", "8", "--corrupt", "0.0005"];
    let a = motkip(&args);
    let b = motkip(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let report = dir.path("r.csv");
    fs::write(&report, &a.stdout).unwrap();
    let again = motkip(&["bench", "--replay", &report]);
    assert_eq!(again.stdout, a.stdout);

    let json = motkip(&["bench", "--seed", "3", "--count", "300", "--msdu", "700", "--loss", "0.05", "--reorder", "8", "--corrupt", "0.0005", "--format", "json", "--out", &dir.path("r.json")]);
    assert_eq!(code(&json), 0);
    let again = motkip(&["bench", "--replay", &dir.path("r.json")]);
    assert_eq!(again.stdout, a.stdout);

    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path("r.json")).unwrap()).unwrap();
    let text = stdout(&a);
    let header: Vec<&str> = text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').collect();
    let row = v["rows"][0].as_object().unwrap();
    for col in header {
        assert!(row.contains_key(col), "{col}");
    }
    assert_eq!(v["header"]["seed"], 3);
}

#[test]
fn bench_config_file_and_errors() {
    let dir = Scratch::new("cfg");
    let cfg = dir.path("run.cfg");
    fs::write(&cfg, "# small run\nseed=9\nmsdu_octets=200\nmsdu_count=50\nschemes=tkip,motkip\n").unwrap();
    let o = motkip(&["bench", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][..5], ["tkip", "9", "0", "200", "50"]);

    let o = motkip(&["bench", "--config", &cfg, "--seed", "10"]);
    assert_eq!(csv_rows(&stdout(&o))[0][1], "10");

    fs::write(&cfg, "reorder_depth=17\n").unwrap();
    assert_eq!(code(&motkip(&["bench", "--config", &cfg])), 1);
    fs::write(&cfg, "warp=9\n").unwrap();
    assert_eq!(code(&motkip(&["bench", "--config", &cfg])), 1);
    assert_eq!(code(&motkip(&["bench", "--loss", "2"])), 1);
}

#[test]
fn bench_events_and_wallclock() {
    let dir = Scratch::new("events");
    let ev = dir.path("events.jsonl");
    let o = motkip(&["bench", "--count", "70000", "--msdu", "20", "--schemes", "tkip", "--events", &ev, "--wallclock"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("non-normative"));
    let text = fs::read_to_string(&ev).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["event"], "RekeyRecommended");
    assert_eq!(first["scheme"], "tkip");
}

#[test]
fn selftest_passes_and_flags_tampered_vectors() {
    let o = motkip(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("selftest ") && l.contains(": ok")));

    let dir = Scratch::new("selftest");
    let p = dir.path("v.txt");
    let tampered = motkip_core::vectors::CRYPTO_VECTORS.replacen("2639f4cb", "2639f4cc", 1);
    assert_ne!(tampered, motkip_core::vectors::CRYPTO_VECTORS);
    fs::write(&p, tampered).unwrap();
    let o = motkip(&["selftest", "--vectors", &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL") && stdout(&o).contains("CRC32"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&motkip(&["frobnicate"])), 1);
    assert_eq!(code(&motkip(&["keymix"])), 1);
    assert_eq!(code(&motkip(&["--help"])), 0);
}
