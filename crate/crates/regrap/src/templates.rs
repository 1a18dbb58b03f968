//! Prompt templates.
//!
//! The template files under `templates/` are embedded at compile time and can
//! be overridden per file by pointing a [`TemplateSet`] at a directory.
//! Placeholders use `{{name}}` syntax; rendering substitutes each placeholder
//! in a single pass (substituted values are never re-scanned) and fails on
//! placeholders that are left unresolved.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("unresolved placeholder {{{{{0}}}}}")]
    Unresolved(String),
    #[error("unterminated placeholder at byte {0}")]
    Unterminated(usize),
    #[error("cannot read template override {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Relation graph construction from relational knowledge and images.
    Builder,
    /// Graph enrichment with attribute knowledge.
    Enricher,
    /// CoT question generation from reasoning steps.
    Question,
    /// CoT answer refinement for a generated question.
    Answer,
    /// Per-entity knowledge descriptions.
    Describe,
    /// Reference answer generation for open-ended grading.
    Reference,
    /// Open-ended answer assessment with a 1-10 score.
    Assessment,
    /// Binary QA-pair validation questions.
    PairValidation,
    /// Key-point coverage judgment.
    PointMatch,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 9] = [
        TemplateKind::Builder,
        TemplateKind::Enricher,
        TemplateKind::Question,
        TemplateKind::Answer,
        TemplateKind::Describe,
        TemplateKind::Reference,
        TemplateKind::Assessment,
        TemplateKind::PairValidation,
        TemplateKind::PointMatch,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateKind::Builder => "builder.txt",
            TemplateKind::Enricher => "enricher.txt",
            TemplateKind::Question => "question.txt",
            TemplateKind::Answer => "answer.txt",
            TemplateKind::Describe => "describe.txt",
            TemplateKind::Reference => "reference.txt",
            TemplateKind::Assessment => "assessment.txt",
            TemplateKind::PairValidation => "pair_validation.txt",
            TemplateKind::PointMatch => "point_match.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateKind::Builder => include_str!("../templates/builder.txt"),
            TemplateKind::Enricher => include_str!("../templates/enricher.txt"),
            TemplateKind::Question => include_str!("../templates/question.txt"),
            TemplateKind::Answer => include_str!("../templates/answer.txt"),
            TemplateKind::Describe => include_str!("../templates/describe.txt"),
            TemplateKind::Reference => include_str!("../templates/reference.txt"),
            TemplateKind::Assessment => include_str!("../templates/assessment.txt"),
            TemplateKind::PairValidation => include_str!("../templates/pair_validation.txt"),
            TemplateKind::PointMatch => include_str!("../templates/point_match.txt"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    override_dir: Option<PathBuf>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        TemplateSet { override_dir: None }
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        TemplateSet {
            override_dir: Some(dir.into()),
        }
    }

    /// Template text: the override file when the directory has one, otherwise
    /// the embedded default.
    pub fn text(&self, kind: TemplateKind) -> Result<Cow<'static, str>, TemplateError> {
        if let Some(dir) = &self.override_dir {
            let path = dir.join(kind.file_name());
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                return Ok(Cow::Owned(text));
            }
        }
        Ok(Cow::Borrowed(kind.builtin()))
    }

    pub fn render(
        &self,
        kind: TemplateKind,
        vars: &[(&str, &str)],
    ) -> Result<String, TemplateError> {
        render(&self.text(kind)?, vars)
    }
}

/// Substitutes `{{name}}` placeholders. Every placeholder in the template
/// must have a binding; unused bindings are fine.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
    let map: BTreeMap<&str, &str> = vars.iter().copied().collect();
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    let mut offset = 0;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or(TemplateError::Unterminated(offset + start))?;
        let name = &after[..end];
        match map.get(name.trim()) {
            Some(value) => out.push_str(value),
            None => return Err(TemplateError::Unresolved(name.trim().to_string())),
        }
        offset += start + 2 + end + 2;
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Renders an entity list the way the prompts reference personalized
/// concepts: `<name>` tokens joined by commas.
pub fn entity_listing(entities: &[String]) -> String {
    entities
        .iter()
        .map(|e| format!("<{e}>"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_placeholders_in_one_pass() {
        let out = render("a {{x}} b {{y}}", &[("x", "{{y}}"), ("y", "2")]).unwrap();
        assert_eq!(out, "a {{y}} b 2");
    }

    #[test]
    fn unresolved_placeholders_fail() {
        let err = render("hello {{who}}", &[]).unwrap_err();
        assert!(matches!(err, TemplateError::Unresolved(name) if name == "who"));
    }

    #[test]
    fn unterminated_placeholders_fail() {
        let err = render("hello {{who", &[]).unwrap_err();
        assert!(matches!(err, TemplateError::Unterminated(6)));
    }

    #[test]
    fn builtin_templates_have_expected_placeholders() {
        let set = TemplateSet::builtin();
        let builder = set.text(TemplateKind::Builder).unwrap();
        assert!(builder.contains("{{K_R}}"));
        assert!(builder.contains("{{entities}}"));
        let enricher = set.text(TemplateKind::Enricher).unwrap();
        assert!(enricher.contains("{{KG}}"));
        assert!(enricher.contains("{{K_A}}"));
        let assessment = set.text(TemplateKind::Assessment).unwrap();
        for name in ["{{question}}", "{{knowledge}}", "{{reference}}", "{{answer}}"] {
            assert!(assessment.contains(name), "missing {name}");
        }
    }

    #[test]
    fn directory_overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("builder.txt"), "custom {{K_R}} {{entities}}").unwrap();
        let set = TemplateSet::with_dir(dir.path());
        let out = set
            .render(
                TemplateKind::Builder,
                &[("K_R", "facts"), ("entities", "<a>")],
            )
            .unwrap();
        assert_eq!(out, "custom facts <a>");
        assert!(set.text(TemplateKind::Enricher).unwrap().contains("KG Enricher"));
    }

    #[test]
    fn entity_listing_wraps_names() {
        let listing = entity_listing(&["Bocchi".into(), "Kessoku Band".into()]);
        assert_eq!(listing, "<Bocchi>, <Kessoku Band>");
    }
}
