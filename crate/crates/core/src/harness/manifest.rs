use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_FOLDS: u8 = 10;

/// Dataset labels in class-id order.
pub const CLASS_NAMES: [&str; 10] = [
    "air_conditioner",
    "car_horn",
    "children_playing",
    "dog_bark",
    "drilling",
    "engine_idling",
    "gun_shot",
    "jackhammer",
    "siren",
    "street_music",
];

pub const CLASS_ABBREVIATIONS: [&str; 10] = ["AI", "CA", "CH", "DO", "DR", "EN", "GU", "JA", "SI", "ST"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file_path: PathBuf,
    pub fold: u8,
    pub class_id: usize,
    pub class_name: String,
}

impl ManifestEntry {
    /// Stable identifier used in reports and disjointness checks.
    pub fn clip_id(&self) -> String {
        self.file_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.file_path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub class_names: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct MetadataRow {
    slice_file_name: String,
    fold: i64,
    #[serde(rename = "classID")]
    class_id: i64,
    class: String,
}

impl DatasetManifest {
    /// Validates fold and class ranges and path uniqueness.
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Manifest("empty manifest".into()));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !(1..=N_FOLDS).contains(&e.fold) {
                return Err(Error::Manifest(format!("fold {} out of range for {}", e.fold, e.file_path.display())));
            }
            if e.class_id >= CLASS_NAMES.len() {
                return Err(Error::Manifest(format!(
                    "class_id out of range: {} for {}",
                    e.class_id,
                    e.file_path.display()
                )));
            }
            if !seen.insert(e.file_path.clone()) {
                return Err(Error::Manifest(format!("duplicate entry {}", e.file_path.display())));
            }
        }
        Ok(Self {
            entries,
            class_names: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fold(&self, fold: u8) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.fold == fold)
    }

    pub fn fold_sizes(&self) -> [usize; N_FOLDS as usize] {
        let mut sizes = [0; N_FOLDS as usize];
        for e in &self.entries {
            sizes[(e.fold - 1) as usize] += 1;
        }
        sizes
    }

    /// Writes the metadata CSV in the dataset's own column layout, with
    /// paths relative to `audio_root`.
    pub fn to_metadata_csv(&self, audio_root: &Path) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["slice_file_name", "fold", "classID", "class"])?;
        for e in &self.entries {
            let rel = e.file_path.strip_prefix(audio_root).unwrap_or(&e.file_path);
            let name = rel
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            w.write_record([name, e.fold.to_string(), e.class_id.to_string(), e.class_name.clone()])?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// A loaded manifest plus the rows whose audio files were not found.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: DatasetManifest,
    pub missing: Vec<PathBuf>,
}

/// Reads a metadata CSV with columns `slice_file_name, fold, classID, class`
/// and resolves each row to `audio_root/fold<k>/<file>`. Rows whose file is
/// missing are dropped and listed in [`LoadedManifest::missing`].
pub fn load_manifest(metadata_csv: &Path, audio_root: &Path) -> Result<LoadedManifest> {
    let bytes = std::fs::read(metadata_csv)?;
    load_manifest_from_reader(&bytes[..], audio_root, true)
}

pub(crate) fn load_manifest_from_reader<R: std::io::Read>(reader: R, audio_root: &Path, check_files: bool) -> Result<LoadedManifest> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["slice_file_name", "fold", "classID", "class"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Manifest(format!("missing column {col}")));
        }
    }
    let root = if audio_root.is_absolute() || !check_files {
        audio_root.to_path_buf()
    } else {
        std::fs::canonicalize(audio_root)?
    };
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for row in rdr.deserialize::<MetadataRow>() {
        let row = row?;
        if !(1..=N_FOLDS as i64).contains(&row.fold) {
            return Err(Error::Manifest(format!("fold {} out of range for {}", row.fold, row.slice_file_name)));
        }
        if !(0..CLASS_NAMES.len() as i64).contains(&row.class_id) {
            return Err(Error::Manifest(format!(
                "class_id out of range: {} for {}",
                row.class_id, row.slice_file_name
            )));
        }
        let path = root.join(format!("fold{}", row.fold)).join(&row.slice_file_name);
        if check_files && !path.is_file() {
            log::warn!("rejecting manifest row: missing audio file {}", path.display());
            missing.push(path);
            continue;
        }
        entries.push(ManifestEntry {
            file_path: path,
            fold: row.fold as u8,
            class_id: row.class_id as usize,
            class_name: row.class,
        });
    }
    Ok(LoadedManifest {
        manifest: DatasetManifest::new(entries)?,
        missing,
    })
}
