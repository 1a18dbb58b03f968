//! On-disk layout for personalized sets, plus corpus-level statistics.
//!
//! A set saves as `root/<name>/` with `graph.json`, `pairs.jsonl` (one
//! four-field record per line), `meta.json`, and optionally copied images
//! under `images/train` and `images/test`. Nothing in the layout depends on
//! wall-clock time, so replaying a pipeline with the same fixtures produces
//! byte-identical output. A `.lock` file guards concurrent writers.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::builder::{EntityList, ImageSet, TextualKnowledge};
use crate::kg::KnowledgeGraph;
use crate::llm::BackendKind;
use crate::qa::{count_steps, CoTQAPair};
use crate::rat::Rat;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("set name {0:?} is not directory-safe (use letters, digits, '-', '_')")]
    BadSetName(String),
    #[error("set is locked by another writer: {0}")]
    Locked(PathBuf),
    #[error("set already exists at {0} (pass overwrite to replace it)")]
    AlreadyExists(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON in {file}: {detail}")]
    Json { file: String, detail: String },
    #[error("stored graph fails validation: {0}")]
    InvalidGraph(String),
    #[error("pair {index} is inconsistent: {detail}")]
    BadPair { index: usize, detail: String },
    #[error("image listed in meta.json is missing: {0}")]
    MissingImage(String),
    #[error("manifest has no entries to summarize")]
    EmptyManifest,
}

/// How a set's content was produced: which backend ran and the digests of
/// every chat exchange involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub backend: BackendKind,
    pub fixture_digests: Vec<String>,
}

/// A complete personalized set: inputs, derived graph, and QA pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonalSet {
    pub name: String,
    pub entities: EntityList,
    pub knowledge: TextualKnowledge,
    pub images: ImageSet,
    pub graph: KnowledgeGraph,
    pub pairs: Vec<CoTQAPair>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy)]
pub struct SaveOptions {
    /// Copy image files into the set directory (otherwise meta.json keeps
    /// the original paths).
    pub copy_images: bool,
    pub overwrite: bool,
}

impl Default for SaveOptions {
    fn default() -> Self {
        SaveOptions {
            copy_images: true,
            overwrite: false,
        }
    }
}

fn check_set_name(name: &str) -> Result<(), StoreError> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadSetName(name.to_string()))
    }
}

/// Exclusive advisory lock on a set directory, released on drop.
pub struct SetLock {
    path: PathBuf,
}

impl SetLock {
    pub fn acquire(dir: &Path) -> Result<SetLock, StoreError> {
        let path = dir.join(".lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(SetLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(StoreError::Locked(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for SetLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ImageMeta {
    file: String,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaFile {
    name: String,
    entities: EntityList,
    knowledge: TextualKnowledge,
    provenance: Provenance,
    train_images: Vec<ImageMeta>,
    test_images: Vec<ImageMeta>,
    pair_count: usize,
}

fn sha256_file(path: &Path) -> Result<String, StoreError> {
    let bytes = std::fs::read(path)
        .map_err(|e| StoreError::MissingImage(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn place_images(
    set_dir: &Path,
    split: &str,
    sources: &[PathBuf],
    copy: bool,
) -> Result<Vec<ImageMeta>, StoreError> {
    let mut out = Vec::with_capacity(sources.len());
    let mut used_names = BTreeSet::new();
    if copy && !sources.is_empty() {
        std::fs::create_dir_all(set_dir.join("images").join(split))?;
    }
    for source in sources {
        let sha256 = sha256_file(source)?;
        let file = if copy {
            let base = source
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "image".to_string());
            let mut name = base.clone();
            let mut counter = 1;
            while !used_names.insert(name.clone()) {
                name = format!("{counter}_{base}");
                counter += 1;
            }
            let rel = format!("images/{split}/{name}");
            std::fs::copy(source, set_dir.join(&rel))?;
            rel
        } else {
            source.display().to_string()
        };
        out.push(ImageMeta { file, sha256 });
    }
    Ok(out)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), StoreError> {
    let mut text = crate::kg::pretty_json(value);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes the set layout under `root/<name>` and returns that directory.
pub fn save_set(
    root: impl AsRef<Path>,
    set: &PersonalSet,
    options: &SaveOptions,
) -> Result<PathBuf, StoreError> {
    check_set_name(&set.name)?;
    let dir = root.as_ref().join(&set.name);
    std::fs::create_dir_all(&dir)?;
    let _lock = SetLock::acquire(&dir)?;
    if dir.join("meta.json").exists() && !options.overwrite {
        return Err(StoreError::AlreadyExists(dir));
    }
    if options.overwrite {
        for stale in ["graph.json", "pairs.jsonl", "meta.json"] {
            let p = dir.join(stale);
            if p.exists() {
                std::fs::remove_file(p)?;
            }
        }
        let images = dir.join("images");
        if images.exists() {
            std::fs::remove_dir_all(images)?;
        }
    }

    let report = set.graph.validate();
    if !report.ok() {
        return Err(StoreError::InvalidGraph(report.to_string()));
    }
    for (index, pair) in set.pairs.iter().enumerate() {
        verify_pair(&set.graph, index, pair)?;
    }

    let mut graph_text = set.graph.to_json();
    graph_text.push('\n');
    std::fs::write(dir.join("graph.json"), graph_text)?;

    let mut pairs_file = std::fs::File::create(dir.join("pairs.jsonl"))?;
    for pair in &set.pairs {
        let line = serde_json::to_string(pair).map_err(|e| StoreError::Json {
            file: "pairs.jsonl".into(),
            detail: e.to_string(),
        })?;
        writeln!(pairs_file, "{line}")?;
    }

    let train_images = place_images(&dir, "train", &set.images.train, options.copy_images)?;
    let test_images = place_images(&dir, "test", &set.images.test, options.copy_images)?;
    let meta = MetaFile {
        name: set.name.clone(),
        entities: set.entities.clone(),
        knowledge: set.knowledge.clone(),
        provenance: set.provenance.clone(),
        train_images,
        test_images,
        pair_count: set.pairs.len(),
    };
    let meta_value = serde_json::to_value(&meta).map_err(|e| StoreError::Json {
        file: "meta.json".into(),
        detail: e.to_string(),
    })?;
    write_json(&dir.join("meta.json"), &meta_value)?;
    Ok(dir)
}

fn verify_pair(
    graph: &KnowledgeGraph,
    index: usize,
    pair: &CoTQAPair,
) -> Result<(), StoreError> {
    crate::routes::route_to_subgraph(&pair.route, graph).map_err(|e| StoreError::BadPair {
        index,
        detail: format!("route does not fit the graph: {e}"),
    })?;
    let recomputed = count_steps(&pair.answer);
    if recomputed != pair.step_count {
        return Err(StoreError::BadPair {
            index,
            detail: format!(
                "step_count {} does not match the answer ({recomputed} sentences)",
                pair.step_count
            ),
        });
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, file: &str) -> Result<T, StoreError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| StoreError::Json {
        file: file.into(),
        detail: e.to_string(),
    })
}

fn resolve_images(dir: &Path, metas: &[ImageMeta]) -> Result<Vec<PathBuf>, StoreError> {
    let mut out = Vec::with_capacity(metas.len());
    for meta in metas {
        let path = {
            let raw = PathBuf::from(&meta.file);
            if raw.is_absolute() {
                raw
            } else {
                dir.join(raw)
            }
        };
        if !path.exists() {
            return Err(StoreError::MissingImage(path.display().to_string()));
        }
        out.push(path);
    }
    Ok(out)
}

/// Reads a set back, re-validating the graph, every pair's route and step
/// count, and the presence of every image named in meta.json.
pub fn load_set(root: impl AsRef<Path>, name: &str) -> Result<PersonalSet, StoreError> {
    check_set_name(name)?;
    let dir = root.as_ref().join(name);
    let meta: MetaFile = read_json(&dir.join("meta.json"), "meta.json")?;
    let graph_text = std::fs::read_to_string(dir.join("graph.json"))?;
    let graph = KnowledgeGraph::from_json(&graph_text)
        .map_err(|e| StoreError::InvalidGraph(e.to_string()))?;
    let report = graph.validate();
    if !report.ok() {
        return Err(StoreError::InvalidGraph(report.to_string()));
    }
    let pairs_file = std::fs::File::open(dir.join("pairs.jsonl"))?;
    let mut pairs = Vec::new();
    for (index, line) in std::io::BufReader::new(pairs_file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: CoTQAPair = serde_json::from_str(&line).map_err(|e| StoreError::Json {
            file: format!("pairs.jsonl line {}", index + 1),
            detail: e.to_string(),
        })?;
        verify_pair(&graph, index, &pair)?;
        pairs.push(pair);
    }
    if pairs.len() != meta.pair_count {
        return Err(StoreError::BadPair {
            index: pairs.len(),
            detail: format!(
                "meta.json records {} pairs, pairs.jsonl holds {}",
                meta.pair_count,
                pairs.len()
            ),
        });
    }
    let images = ImageSet {
        train: resolve_images(&dir, &meta.train_images)?,
        test: resolve_images(&dir, &meta.test_images)?,
    };
    Ok(PersonalSet {
        name: meta.name,
        entities: meta.entities,
        knowledge: meta.knowledge,
        images,
        graph,
        pairs,
        provenance: meta.provenance,
    })
}

/// Corpus-level row describing one set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub object_count: usize,
    pub train_images: usize,
    pub test_images: usize,
    pub pair_count: usize,
    pub avg_steps: Rat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

/// Summarizes one set for the manifest.
pub fn manifest_entry(set: &PersonalSet) -> ManifestEntry {
    let avg_steps = if set.pairs.is_empty() {
        Rat::zero()
    } else {
        let total: usize = set.pairs.iter().map(|p| p.step_count).sum();
        Rat::from_ratio(total as i64, set.pairs.len() as i64)
    };
    ManifestEntry {
        name: set.name.clone(),
        object_count: set.entities.len(),
        train_images: set.images.train.len(),
        test_images: set.images.test.len(),
        pair_count: set.pairs.len(),
        avg_steps,
    }
}

/// Corpus statistics over a manifest. All averages are exact rationals;
/// [`DatasetStats::merge`] recombines partial statistics without drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total_sets: usize,
    pub single_object_sets: usize,
    pub multi_object_sets: usize,
    pub total_pairs: usize,
    /// Mean object count over multi-object sets; zero when there are none.
    pub avg_objects_multi: Rat,
    pub avg_images_per_set: Rat,
    /// Pair-count-weighted mean step count; zero when there are no pairs.
    pub avg_steps: Rat,
}

pub fn compute_stats(manifest: &Manifest) -> Result<DatasetStats, StoreError> {
    if manifest.entries.is_empty() {
        return Err(StoreError::EmptyManifest);
    }
    let total_sets = manifest.entries.len();
    let mut single = 0;
    let mut multi = 0;
    let mut multi_objects = Rat::zero();
    let mut images = Rat::zero();
    let mut steps_weighted = Rat::zero();
    let mut total_pairs = 0usize;
    for entry in &manifest.entries {
        if entry.object_count >= 2 {
            multi += 1;
            multi_objects = multi_objects + Rat::from_int(entry.object_count as i64);
        } else {
            single += 1;
        }
        images = images + Rat::from_int((entry.train_images + entry.test_images) as i64);
        steps_weighted =
            steps_weighted + entry.avg_steps.clone() * Rat::from_int(entry.pair_count as i64);
        total_pairs += entry.pair_count;
    }
    let avg_objects_multi = if multi == 0 {
        Rat::zero()
    } else {
        multi_objects / Rat::from_int(multi as i64)
    };
    let avg_steps = if total_pairs == 0 {
        Rat::zero()
    } else {
        steps_weighted / Rat::from_int(total_pairs as i64)
    };
    Ok(DatasetStats {
        total_sets,
        single_object_sets: single,
        multi_object_sets: multi,
        total_pairs,
        avg_objects_multi,
        avg_images_per_set: images / Rat::from_int(total_sets as i64),
        avg_steps,
    })
}

impl DatasetStats {
    /// Exact recombination: merging stats over two disjoint manifests equals
    /// computing stats over their concatenation.
    pub fn merge(&self, other: &DatasetStats) -> DatasetStats {
        let weighted_mean = |a: &Rat, wa: usize, b: &Rat, wb: usize| {
            if wa + wb == 0 {
                Rat::zero()
            } else {
                (a.clone() * Rat::from_int(wa as i64) + b.clone() * Rat::from_int(wb as i64))
                    / Rat::from_int((wa + wb) as i64)
            }
        };
        DatasetStats {
            total_sets: self.total_sets + other.total_sets,
            single_object_sets: self.single_object_sets + other.single_object_sets,
            multi_object_sets: self.multi_object_sets + other.multi_object_sets,
            total_pairs: self.total_pairs + other.total_pairs,
            avg_objects_multi: weighted_mean(
                &self.avg_objects_multi,
                self.multi_object_sets,
                &other.avg_objects_multi,
                other.multi_object_sets,
            ),
            avg_images_per_set: weighted_mean(
                &self.avg_images_per_set,
                self.total_sets,
                &other.avg_images_per_set,
                other.total_sets,
            ),
            avg_steps: weighted_mean(
                &self.avg_steps,
                self.total_pairs,
                &other.avg_steps,
                other.total_pairs,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Edge, Node, NodeId};
    use crate::routes::ReasoningRoute;

    fn sample_set(dir: &Path, name: &str) -> PersonalSet {
        let mut graph = KnowledgeGraph::new(name);
        for id in ["Ryo", "Kita", "Bocchi"] {
            graph.add_node(Node::concept(NodeId::new(id).unwrap()));
        }
        graph.add_edge(Edge::new(
            NodeId::new("Ryo").unwrap(),
            "is senior of",
            NodeId::new("Kita").unwrap(),
        ));
        graph.add_edge(Edge::new(
            NodeId::new("Kita").unwrap(),
            "is close to",
            NodeId::new("Bocchi").unwrap(),
        ));
        let route = ReasoningRoute::new(
            vec![
                NodeId::new("Ryo").unwrap(),
                NodeId::new("Kita").unwrap(),
                NodeId::new("Bocchi").unwrap(),
            ],
            vec!["is senior of".into(), "is close to".into()],
        )
        .unwrap();
        let answer = "Ryo mentors Kita. Kita bonds with Bocchi.";
        let image = dir.join("input.png");
        std::fs::write(&image, b"not really a png but bytes are bytes").unwrap();
        PersonalSet {
            name: name.into(),
            entities: EntityList::new(["Ryo", "Kita", "Bocchi"]).unwrap(),
            knowledge: TextualKnowledge::new("Ryo mentors Kita.", "Bocchi has pink hair."),
            images: ImageSet {
                train: vec![image],
                test: vec![],
            },
            graph,
            pairs: vec![CoTQAPair {
                question: "Who does Kita bond with?".into(),
                answer: answer.into(),
                step_count: count_steps(answer),
                route,
            }],
            provenance: Provenance {
                backend: BackendKind::Mock,
                fixture_digests: vec!["abc123".into()],
            },
        }
    }

    #[test]
    fn save_then_load_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "bocchi_the_rock");
        let dir = save_set(tmp.path().join("data"), &set, &SaveOptions::default()).unwrap();
        assert!(dir.join("graph.json").exists());
        assert!(dir.join("pairs.jsonl").exists());
        assert!(dir.join("meta.json").exists());
        assert!(dir.join("images/train/input.png").exists());
        assert!(!dir.join(".lock").exists(), "lock must be released");

        let loaded = load_set(tmp.path().join("data"), "bocchi_the_rock").unwrap();
        assert_eq!(loaded.name, set.name);
        assert_eq!(loaded.graph, set.graph);
        assert_eq!(loaded.pairs, set.pairs);
        assert_eq!(loaded.provenance, set.provenance);
        assert_eq!(loaded.images.train.len(), 1);
    }

    #[test]
    fn pairs_file_has_exactly_four_fields_per_line() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "fields");
        let dir = save_set(tmp.path().join("data"), &set, &SaveOptions::default()).unwrap();
        let line = std::fs::read_to_string(dir.join("pairs.jsonl"))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["question", "answer", "route", "step_count"]);
    }

    #[test]
    fn meta_has_no_timestamps_and_saving_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "deterministic");
        let dir_a = save_set(tmp.path().join("a"), &set, &SaveOptions::default()).unwrap();
        let dir_b = save_set(tmp.path().join("b"), &set, &SaveOptions::default()).unwrap();
        for file in ["graph.json", "pairs.jsonl", "meta.json"] {
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical saves");
        }
    }

    #[test]
    fn overwrite_flag_controls_replacement() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "again");
        let root = tmp.path().join("data");
        save_set(&root, &set, &SaveOptions::default()).unwrap();
        assert!(matches!(
            save_set(&root, &set, &SaveOptions::default()),
            Err(StoreError::AlreadyExists(_))
        ));
        save_set(
            &root,
            &set,
            &SaveOptions {
                overwrite: true,
                ..SaveOptions::default()
            },
        )
        .unwrap();
    }

    #[test]
    fn lock_file_blocks_concurrent_writers() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "locked");
        let root = tmp.path().join("data");
        let dir = root.join("locked");
        std::fs::create_dir_all(&dir).unwrap();
        let guard = SetLock::acquire(&dir).unwrap();
        assert!(matches!(
            save_set(&root, &set, &SaveOptions::default()),
            Err(StoreError::Locked(_))
        ));
        drop(guard);
        save_set(&root, &set, &SaveOptions::default()).unwrap();
    }

    #[test]
    fn load_rejects_tampered_step_counts() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "tampered");
        let root = tmp.path().join("data");
        let dir = save_set(&root, &set, &SaveOptions::default()).unwrap();
        let pairs = std::fs::read_to_string(dir.join("pairs.jsonl")).unwrap();
        std::fs::write(
            dir.join("pairs.jsonl"),
            pairs.replace("\"step_count\":2", "\"step_count\":9"),
        )
        .unwrap();
        assert!(matches!(
            load_set(&root, "tampered"),
            Err(StoreError::BadPair { .. })
        ));
    }

    #[test]
    fn load_rejects_routes_that_left_the_graph() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "offroute");
        let root = tmp.path().join("data");
        let dir = save_set(&root, &set, &SaveOptions::default()).unwrap();
        let pairs = std::fs::read_to_string(dir.join("pairs.jsonl")).unwrap();
        std::fs::write(
            dir.join("pairs.jsonl"),
            pairs.replace("is senior of", "is junior of"),
        )
        .unwrap();
        assert!(matches!(
            load_set(&root, "offroute"),
            Err(StoreError::BadPair { .. })
        ));
    }

    #[test]
    fn bad_set_names_are_rejected() {
        for bad in ["", "a/b", "..", "a b", "nul\u{0}"] {
            assert!(matches!(
                check_set_name(bad),
                Err(StoreError::BadSetName(_))
            ));
        }
        assert!(check_set_name("ROG_mouse-2").is_ok());
    }

    fn entry(name: &str, objects: usize, images: usize, pairs: usize, avg: Rat) -> ManifestEntry {
        ManifestEntry {
            name: name.into(),
            object_count: objects,
            train_images: images / 2,
            test_images: images - images / 2,
            pair_count: pairs,
            avg_steps: avg,
        }
    }

    fn reference_manifest() -> Manifest {
        let mut entries = Vec::new();
        for i in 0..80 {
            entries.push(entry(
                &format!("single_{i}"),
                1,
                20,
                20,
                Rat::from_ratio(26, 5),
            ));
        }
        for i in 0..20 {
            entries.push(entry(
                &format!("five_{i}"),
                5,
                20,
                20,
                Rat::from_ratio(26, 5),
            ));
        }
        for i in 0..20 {
            entries.push(entry(
                &format!("six_{i}"),
                6,
                20,
                20,
                Rat::from_ratio(26, 5),
            ));
        }
        Manifest { entries }
    }

    #[test]
    fn reference_corpus_statistics_are_exact() {
        let stats = compute_stats(&reference_manifest()).unwrap();
        assert_eq!(stats.total_sets, 120);
        assert_eq!(stats.single_object_sets, 80);
        assert_eq!(stats.multi_object_sets, 40);
        assert_eq!(stats.total_pairs, 2400);
        assert_eq!(stats.avg_objects_multi.to_decimal_string(3), "5.500");
        assert_eq!(stats.avg_images_per_set.to_decimal_string(3), "20.000");
        assert_eq!(stats.avg_steps.to_decimal_string(3), "5.200");
    }

    #[test]
    fn merged_partial_stats_equal_whole_corpus_stats() {
        let manifest = reference_manifest();
        let whole = compute_stats(&manifest).unwrap();
        for split_at in [1, 60, 80, 100, 119] {
            let left = Manifest {
                entries: manifest.entries[..split_at].to_vec(),
            };
            let right = Manifest {
                entries: manifest.entries[split_at..].to_vec(),
            };
            let merged = compute_stats(&left)
                .unwrap()
                .merge(&compute_stats(&right).unwrap());
            assert_eq!(merged, whole, "split at {split_at}");
        }
    }

    #[test]
    fn zero_denominators_collapse_to_zero() {
        let manifest = Manifest {
            entries: vec![entry("only", 1, 0, 0, Rat::zero())],
        };
        let stats = compute_stats(&manifest).unwrap();
        assert_eq!(stats.avg_objects_multi, Rat::zero());
        assert_eq!(stats.avg_steps, Rat::zero());
        assert!(matches!(
            compute_stats(&Manifest::default()),
            Err(StoreError::EmptyManifest)
        ));
    }

    #[test]
    fn manifest_entry_summarizes_a_set() {
        let tmp = tempfile::tempdir().unwrap();
        let set = sample_set(tmp.path(), "sum");
        let entry = manifest_entry(&set);
        assert_eq!(entry.object_count, 3);
        assert_eq!(entry.train_images, 1);
        assert_eq!(entry.pair_count, 1);
        assert_eq!(entry.avg_steps, Rat::from_int(2));
    }
}
