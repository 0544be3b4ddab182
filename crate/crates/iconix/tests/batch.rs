mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use iconix::batch::{run_batch, BatchError, BatchSpec};
use iconix::codec::decode_png;
use iconix::env::BackendConfig;
use iconix::model_server;
use iconix_core::backend::{BackendSet, StyleVariant};

use common::{all_remote, dead_url, raw_server, serve, tree};

fn mock_spec(concept: &str, out: impl AsRef<std::path::Path>) -> BatchSpec {
    BatchSpec {
        mock: true,
        ..BatchSpec::new(concept, out.as_ref())
    }
}

#[test]
fn repeated_mock_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_batch(&mock_spec("fast food", a.path()), &BackendConfig::default()).unwrap();
    let mb = run_batch(&mock_spec("fast food", b.path()), &BackendConfig::default()).unwrap();
    assert_eq!(ma, mb);
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta, tb);
    for name in [
        "candidate_table.json",
        "scaffold.json",
        "prompt_chain.json",
        "exemplars/macroscopic.png",
        "sequences/microscopic.json",
        "clustering/comparative.json",
        "scatter/macroscopic.json",
        "layers/macroscopic.json",
        "grid/manifest.json",
        "grid/outline.png",
        "grid/filled.png",
        "grid/color.png",
    ] {
        assert!(ta.contains_key(name), "{name} missing");
    }
    assert_eq!(ma.concept, "hamburger");
    assert_eq!(ma.variants, StyleVariant::ALL);
}

#[test]
fn seed_reaches_the_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_batch(&mock_spec("hope", a.path()), &BackendConfig::default()).unwrap();
    let mb = run_batch(
        &BatchSpec {
            seed: Some(7),
            ..mock_spec("hope", b.path())
        },
        &BackendConfig::default(),
    )
    .unwrap();
    assert_eq!(ma.concept, mb.concept);
    assert_ne!(tree(a.path()), tree(b.path()));
}

#[test]
fn remote_backends_reproduce_the_mock_run() {
    let served = serve(model_server::router(Arc::new(BackendSet::mock())));
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_batch(&mock_spec("sunrise", a.path()), &BackendConfig::default()).unwrap();
    let remote = BatchSpec::new("sunrise", b.path());
    run_batch(&remote, &all_remote(&served.url, 30)).unwrap();
    assert_eq!(tree(a.path()), tree(b.path()));
}

#[test]
fn sheets_on_disk_decode_to_the_stored_cells() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BatchSpec {
        columns: Some(4),
        styles: BTreeSet::from([StyleVariant::Outline]),
        ..mock_spec("hope", dir.path())
    };
    let manifest = run_batch(&spec, &BackendConfig::default()).unwrap();
    assert_eq!(manifest.variants, [StyleVariant::Outline]);
    assert_eq!(manifest.cells.len(), 12);
    let sheet = decode_png(&std::fs::read(dir.path().join("grid/outline.png")).unwrap()).unwrap();
    let store = iconix::store::ArtifactStore::new(dir.path());
    for cell in &manifest.cells {
        let r = cell.rect;
        let tile = sheet.crop(r.x, r.y, r.w, r.h).unwrap();
        let original = store.get_png(&cell.png_ref).unwrap();
        let tile = match original.channels() {
            iconix_core::Channels::Gray8 => tile.to_gray(),
            iconix_core::Channels::Rgba8 => tile.to_rgba(),
        };
        assert_eq!(tile, original, "cell {},{}", cell.row, cell.col);
    }
}

#[test]
fn batch_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |spec: &BatchSpec, cfg: &BackendConfig| run_batch(spec, cfg).unwrap_err().exit_code();

    let too_wide = BatchSpec {
        columns: Some(12),
        ..mock_spec("hope", dir.path())
    };
    assert_eq!(code(&too_wide, &BackendConfig::default()), 2);

    let bad_file = dir.path().join("config.json");
    std::fs::write(&bad_file, r#"{"k": "nine"}"#).unwrap();
    let bad_config = BatchSpec {
        config_file: Some(bad_file),
        ..mock_spec("hope", dir.path())
    };
    assert_eq!(code(&bad_config, &BackendConfig::default()), 2);

    let offline = BatchSpec::new("hope", dir.path().join("remote"));
    assert_eq!(code(&offline, &all_remote(&dead_url(), 1)), 3);

    let err = run_batch(&mock_spec("xyzzy", dir.path().join("xyzzy")), &BackendConfig::default()).unwrap_err();
    assert!(matches!(err, BatchError::Stage(_)));
    assert_eq!(err.exit_code(), 4);

    let file = dir.path().join("occupied");
    std::fs::write(&file, b"x").unwrap();
    assert_eq!(code(&mock_spec("hope", file.as_path()), &BackendConfig::default()), 5);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iconix"))
}

#[test]
fn mock_cli_never_touches_the_network() {
    let trap = raw_server(Some("HTTP/1.1 500 Internal Server Error\r\ncontent-length: 0\r\n\r\n"));
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = cli();
    cmd.args(["--concept", "hope", "--mock", "--out"]).arg(dir.path());
    for kind in iconix_core::backend::BackendKind::ALL {
        cmd.env(format!("ICONIX_{}_URL", kind.env_name()), &trap.url);
    }
    cmd.env("ICONIX_RELATIONS_URL", &trap.url);
    let started = std::time::Instant::now();
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(started.elapsed().as_secs() < 60);
    assert_eq!(trap.connections.load(Ordering::SeqCst), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("3x3 grid"));
    assert!(dir.path().join("grid/manifest.json").is_file());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| {
        cli()
            .args(args)
            .env_clear()
            .env("RUST_LOG", "off")
            .output()
            .unwrap()
            .status
            .code()
    };
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(status(&["--concept", "hope", "--mock", "--columns", "12", "--out", out]), Some(2));
    assert_eq!(status(&["--concept", "hope", "--mock", "--styles", "sepia", "--out", out]), Some(2));
    assert_eq!(status(&["--concept", "xyzzy", "--mock", "--out", out]), Some(4));

    let unreachable = cli()
        .args(["--concept", "hope", "--out", out])
        .env_clear()
        .env("ICONIX_GENERATE_URL", dead_url())
        .env("ICONIX_TIMEOUT_SECS", "1")
        .output()
        .unwrap();
    assert_eq!(unreachable.status.code(), Some(3));

    let bad_timeout = cli()
        .args(["--concept", "hope", "--out", out])
        .env_clear()
        .env("ICONIX_TIMEOUT_SECS", "soon")
        .output()
        .unwrap();
    assert_eq!(bad_timeout.status.code(), Some(2));
}
