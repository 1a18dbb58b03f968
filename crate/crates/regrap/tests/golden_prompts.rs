//! Byte-for-byte golden checks for every rendered prompt.
//!
//! Regenerate the checked-in files with:
//!
//! ```text
//! UPDATE_GOLDENS=1 cargo test -p regrap --test golden_prompts
//! ```

mod common;

use std::fs;

fn check(name: &str, rendered: &str) {
    let path = common::goldens_dir().join(name);
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        fs::create_dir_all(common::goldens_dir()).unwrap();
        fs::write(&path, rendered).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
    assert_eq!(
        rendered,
        expected,
        "rendered prompt differs from golden {name}"
    );
}

#[test]
fn template_renderings_match_goldens() {
    for (name, rendered) in common::template_renderings() {
        check(name, &rendered);
    }
}

#[test]
fn hard_prompt_rendering_matches_golden() {
    let report = common::hard_prompt_rendering();
    assert!(report.empty_entity_descriptions.is_empty());
    assert!(report.empty_relation_descriptions.is_empty());
    check("hard_prompt.txt", &report.prompt);
}
