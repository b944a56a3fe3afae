mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::{fixture, stub_afm, stub_tree};
use texfm::cli::{main_with, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use texfm_core::optical::{ew_squared, OpticalParams};
use texfm_core::tfm::parse_tfm;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn texfm(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("texfm").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn afm_tfm(dir: &Path, name: &str) -> std::path::PathBuf {
    let afm = dir.join(format!("{name}.afm"));
    fs::write(&afm, stub_afm(name, 1000)).unwrap();
    let tfm = dir.join(format!("{name}.tfm"));
    let r = texfm(&["afm2tfm", p(&afm), "-o", p(&tfm)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    tfm
}

#[test]
fn tftopl_octal_mirrors_the_classic_command() {
    let dir = tempfile::tempdir().unwrap();
    let tfm = afm_tfm(dir.path(), "rtxmi");
    let pl = dir.path().join("rtxmi.pl");
    let r = texfm(&["tftopl", "--charcode-format=octal", p(&tfm), p(&pl)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let text = fs::read_to_string(&pl).unwrap();
    assert!(text.contains("(CHARACTER O 141"));
    assert!(!text.contains("(CHARACTER C"));
    let back = dir.path().join("back.tfm");
    assert_eq!(texfm(&["pltotf", p(&pl), p(&back)]).code, EXIT_OK);
    assert_eq!(parse_tfm(&fs::read(&back).unwrap()).unwrap(), parse_tfm(&fs::read(&tfm).unwrap()).unwrap());
    let stdout = texfm(&["tftopl", p(&tfm)]);
    assert!(stdout.out.contains("(CHARACTER C a"));
}

#[test]
fn tftopl_names_through_declared_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let tfm = afm_tfm(dir.path(), "rtxmi");
    let r = texfm(&[
        "tftopl",
        "--charcode-format=names",
        "--enc",
        p(&fixture("oml.enc")),
        "--declare",
        "FONTSPECIFIC=oml",
        p(&tfm),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("(CHARACTER O 101 (COMMENT A)"));
    let undeclared = texfm(&["tftopl", "--charcode-format=names", "--enc", p(&fixture("oml.enc")), p(&tfm)]);
    assert_eq!(undeclared.code, EXIT_DATA);
    assert!(undeclared.err.contains("FontSpecific"), "{}", undeclared.err);
}

#[test]
fn afm2tfm_prints_the_reencoded_map_line() {
    let dir = tempfile::tempdir().unwrap();
    let vpl = dir.path().join("fxlri-alt.vpl");
    let tfm = dir.path().join("rfxlri-alt.tfm");
    let r = texfm(&[
        "afm2tfm",
        p(&fixture("fxlri.afm")),
        "-T",
        p(&fixture("libertinealt.enc")),
        "-v",
        p(&vpl),
        "-o",
        p(&tfm),
        "--map",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out, "rfxlri-alt LinLibertineI \" LibertineAltEncoding ReEncodeFont \" <libertinealt.enc\n");
    let m = parse_tfm(&fs::read(&tfm).unwrap()).unwrap();
    assert_eq!(m.chars.len(), 34);
    assert_eq!(m.coding_scheme, "LibertineAltEncoding");
    let text = fs::read_to_string(&vpl).unwrap();
    assert!(text.contains("(MAPFONT D 0"));
    assert!(text.contains("(FONTNAME rfxlri-alt)"));

    let vf = dir.path().join("fxlri-alt.vf");
    let vtfm = dir.path().join("fxlri-alt.tfm");
    assert_eq!(texfm(&["vptovf", p(&vpl), p(&vf), p(&vtfm)]).code, EXIT_OK);
    let again = texfm(&["vftovp", p(&vf), p(&vtfm)]);
    assert_eq!(again.code, EXIT_OK, "{}", again.err);
    assert_eq!(again.out, text);
}

#[test]
fn afm2tfm_octal_vpl() {
    let dir = tempfile::tempdir().unwrap();
    let afm = dir.path().join("f.afm");
    fs::write(&afm, stub_afm("F", 1000)).unwrap();
    let vpl = dir.path().join("f.vpl");
    let r = texfm(&["afm2tfm", p(&afm), "-O", "-v", p(&vpl), "-o", p(&dir.path().join("rf.tfm"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let text = fs::read_to_string(&vpl).unwrap();
    assert!(!text.contains("(CHARACTER C"));
    assert!(dir.path().join("rf.tfm").is_file());
}

#[test]
fn optical_ew2_equals_library() {
    let dir = tempfile::tempdir().unwrap();
    let tfm = afm_tfm(dir.path(), "rtxmi");
    let out = dir.path().join("rtxmi5.tfm");
    let r = texfm(&["optical", "--preset", "ew2", p(&tfm), p(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let src = parse_tfm(&fs::read(&tfm).unwrap()).unwrap();
    let want = ew_squared(&src, &OpticalParams::ew());
    assert_eq!(parse_tfm(&fs::read(&out).unwrap()).unwrap(), want);

    let flat = dir.path().join("flat.tfm");
    let r = texfm(&["optical", "--no-kern-scale", "--lsb", "-10", "--width-scale", "107/100", p(&tfm), p(&flat)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let m = parse_tfm(&fs::read(&flat).unwrap()).unwrap();
    assert_eq!(m.kerns, src.kerns);

    let bad = texfm(&["optical", "--width-scale", "3", p(&tfm), p(&flat)]);
    assert_eq!(bad.code, EXIT_DATA);
    assert!(bad.err.contains("width_scale"), "{}", bad.err);
}

#[test]
fn unslant_zeroes_slant() {
    let dir = tempfile::tempdir().unwrap();
    let tfm = afm_tfm(dir.path(), "rtxmi");
    let out = dir.path().join("rtxmio.tfm");
    assert_eq!(texfm(&["unslant", p(&tfm), p(&out)]).code, EXIT_OK);
    let pl = texfm(&["tftopl", p(&out)]);
    assert!(pl.out.contains("(SLANT R 0.0)"), "{}", pl.out);
}

#[test]
fn compose_from_plan() {
    let dir = tempfile::tempdir().unwrap();
    afm_tfm(dir.path(), "rtxmi7");
    afm_tfm(dir.path(), "letters");
    let plan = dir.path().join("nxlmi7.plan");
    fs::write(&plan, "default = rtxmi7\nfonts = letters\ntitle = nxlmi7\n[slots]\nC a = letters C b\n").unwrap();
    let (vf, tfm, vpl) = (dir.path().join("n.vf"), dir.path().join("n.tfm"), dir.path().join("n.vpl"));
    let r = texfm(&["compose", p(&plan), "--vf", p(&vf), "--tfm", p(&tfm), "--vpl", p(&vpl)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let text = fs::read_to_string(&vpl).unwrap();
    assert!(text.contains("(FONTNAME letters)"));
    let missing = texfm(&["compose", p(&plan), "--fonts-dir", "/nonexistent", "--vf", p(&vf), "--tfm", p(&tfm)]);
    assert_eq!(missing.code, EXIT_DATA);
}

#[test]
fn map_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let afm = dir.path().join("fxlzi-jv.afm");
    fs::write(&afm, stub_afm("fxlzi-Jv", 1000)).unwrap();
    let r = texfm(&["map", p(&afm), "--pfb", "fxlzi-jv.pfb"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out, "fxlzi-jv fxlzi-Jv <fxlzi-jv.pfb\n");
}

#[test]
fn build_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = stub_tree(dir.path());
    let dry = texfm(&["build", "--dry-run", p(&manifest)]);
    assert_eq!(dry.code, EXIT_OK, "{}", dry.err);
    assert!(dry.out.contains("planned"));
    assert!(!dir.path().join(".cache").exists());
    let first = texfm(&["build", "--jobs", "4", p(&manifest)]);
    assert_eq!(first.code, EXIT_OK, "{}{}", first.out, first.err);
    assert!(first.out.contains("8 executed, 0 cached"), "{}", first.out);
    assert!(dir.path().join(".cache/objects").is_dir());
    let second = texfm(&["build", "--verify", p(&manifest)]);
    assert!(second.out.contains("0 executed, 8 cached"), "{}", second.out);
    assert!(second.out.contains("verified 8 hits, 0 digest mismatches"), "{}", second.out);
    let custom = dir.path().join("elsewhere");
    let third = texfm(&["build", "--cache", p(&custom), p(&manifest)]);
    assert!(third.out.contains("8 executed, 0 cached"), "{}", third.out);
    assert!(custom.join("entries").is_dir());

    fs::remove_file(dir.path().join("rtxmi7.afm")).unwrap();
    let broken = texfm(&["build", p(&manifest)]);
    assert_eq!(broken.code, EXIT_DATA);
    assert!(broken.out.contains("FAILED"), "{}", broken.out);
}

#[test]
fn bad_manifest_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.manifest");
    fs::write(&path, "[step]\nop = sharpen\nin = a\nout = b\n").unwrap();
    let r = texfm(&["build", p(&path)]);
    assert_eq!(r.code, EXIT_DATA);
    assert!(r.err.contains("unknown op \"sharpen\""), "{}", r.err);
}

#[test]
fn inspect_files() {
    let dir = tempfile::tempdir().unwrap();
    let tfm = afm_tfm(dir.path(), "rtxmi");
    let r = texfm(&["inspect", p(&tfm)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("characters 53"), "{}", r.out);
    let enc = texfm(&["inspect", p(&fixture("oml.enc"))]);
    assert!(enc.out.contains("vector TeXMathItalicEncoding"));
    let unknown = texfm(&["inspect", p(&fixture("fxlri.afm")).replace(".afm", ".xyz").as_str()]);
    assert_eq!(unknown.code, EXIT_DATA);
}

#[test]
fn exit_codes_from_the_binary() {
    let bin = env!("CARGO_BIN_EXE_texfm");
    let usage = Command::new(bin).args(["tftopl", "--charcode-fmt=octal", "x.tfm"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("--charcode-fmt"));
    let data = Command::new(bin).args(["pltotf", "/nonexistent.pl", "/tmp/never.tfm"]).output().unwrap();
    assert_eq!(data.status.code(), Some(EXIT_DATA));
    assert!(String::from_utf8_lossy(&data.stderr).contains("/nonexistent.pl"));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&help.stdout).contains("inspect"));
    let none = Command::new(bin).output().unwrap();
    assert_eq!(none.status.code(), Some(EXIT_USAGE));
    let jobs = Command::new(bin).args(["build", "--jobs", "0", "m"]).output().unwrap();
    assert_eq!(jobs.status.code(), Some(EXIT_USAGE));
}
