//! Keeps the committed replay fixture in lockstep with the transcripts in
//! `common`. The ignored test rewrites the file; the always-on test fails
//! when the two drift apart.

mod common;

use std::path::PathBuf;

use tabcot::backend::FixtureStore;

fn replay_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay/desk-numeral.jsonl")
}

/// Rebuilds the committed replay store from the desk transcripts:
/// `cargo test -p tabcot --test fixtures -- --ignored`
#[test]
#[ignore = "rewrites the committed replay fixture"]
fn regenerate_desk_replay_file() {
    let path = replay_path();
    std::fs::create_dir_all(path.parent().expect("fixture path has a parent"))
        .expect("create fixture directory");
    if path.exists() {
        std::fs::remove_file(&path).expect("remove stale fixture file");
    }
    let store = FixtureStore::open(&path).expect("open writable fixture store");
    common::populate_desk_store(&store);
    assert_eq!(store.len(), 20, "ten questions, two stages each");
}

#[test]
fn committed_replay_file_matches_the_transcripts() {
    let committed = FixtureStore::load(&replay_path())
        .expect("committed replay fixture loads; regenerate it with the ignored test");
    let fresh = common::desk_store();

    let mut on_disk = committed.records();
    let mut expected = fresh.records();
    on_disk.sort_by(|a, b| a.digest.cmp(&b.digest));
    expected.sort_by(|a, b| a.digest.cmp(&b.digest));
    assert_eq!(
        on_disk, expected,
        "replay file out of date; rerun the ignored regenerate test"
    );
}
