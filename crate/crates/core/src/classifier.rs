//! Classification by sparse representation over measured training
//! features: build a dictionary of projected, unit-normalized training
//! vectors, sparse-code a measured test vector against it, and pick the
//! class whose coefficients reconstruct the measurement best.

use std::path::Path;

use crate::features::FeatureVector;
use crate::solver::{
    self, coordinate_sampling_matrix, gaussian_matrix, ista_l1, normalize_l2, omp, project,
    Matrix, MeasurementMatrix, SolverError, SparseSolution,
};
use crate::util::fmt_f64;

/// Which sparse solver codes the test vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverBackend {
    Omp,
    Ista { lambda: f64, max_iter: usize },
}

/// How features are measured down to `measured_dim` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    /// Dense Gaussian projection (default).
    Gaussian,
    /// Keep a random subset of coordinates.
    CoordinateSubsample,
}

/// Classifier parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Measured dimension (rows of the projection).
    pub measured_dim: usize,
    /// Sparsity budget handed to the solver.
    pub k_max: usize,
    /// Relative residual tolerance for the solver.
    pub tol: f64,
    pub backend: SolverBackend,
    pub measurement: MeasurementMode,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            measured_dim: 35,
            k_max: 10,
            tol: 1e-6,
            backend: SolverBackend::Omp,
            measurement: MeasurementMode::Gaussian,
        }
    }
}

impl ClassifierConfig {
    /// Canonical `key=value` rendering used for report snapshots.
    pub fn snapshot(&self) -> String {
        let backend = match self.backend {
            SolverBackend::Omp => "omp".to_string(),
            SolverBackend::Ista { lambda, max_iter } => {
                format!("ista(lambda={lambda},max_iter={max_iter})")
            }
        };
        let measurement = match self.measurement {
            MeasurementMode::Gaussian => "gaussian",
            MeasurementMode::CoordinateSubsample => "coordinate_subsample",
        };
        format!(
            "measured_dim={};k_max={};tol={};solver={};measurement={}",
            self.measured_dim, self.k_max, self.tol, backend, measurement
        )
    }
}

/// Measured training features, one unit-norm column per training clip,
/// grouped contiguously by class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    /// `measured_dim` x `n_atoms`, unit-norm columns.
    pub atoms: Matrix,
    /// Class index of each column.
    pub labels: Vec<usize>,
    /// Per-class `(start, len)` column ranges, in class order.
    pub class_offsets: Vec<(usize, usize)>,
    /// The projection used for training; tests must reuse it.
    pub phi: MeasurementMatrix,
    /// Fingerprint of the feature configuration the atoms came from.
    pub config_fingerprint: String,
    /// Class labels, sorted lexicographically.
    pub classes: Vec<String>,
}

/// Outcome of classifying one feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    /// Label of the class with the smallest residual (lowest class index
    /// on exact ties).
    pub predicted: String,
    pub predicted_index: usize,
    /// Per-class reconstruction residuals, in class order.
    pub residuals: Vec<f64>,
    pub solution: SparseSolution,
    /// Second-smallest residual minus smallest; 0 for a single class.
    pub margin: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("class {class:?} has no training features")]
    EmptyClass { class: String },
    #[error("feature of {clip_id:?} measures to the zero vector")]
    ZeroFeature { clip_id: String },
    #[error("feature dimension {got} does not match expected {expected} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },
    #[error("need at least one class and measured_dim < feature dim: {0}")]
    BadSetup(String),
    #[error("model file {path}: {detail}")]
    ModelFormat { path: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn make_measurement(
    mode: MeasurementMode,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<MeasurementMatrix, SolverError> {
    match mode {
        MeasurementMode::Gaussian => gaussian_matrix(m, n, seed),
        MeasurementMode::CoordinateSubsample => coordinate_sampling_matrix(m, n, seed),
    }
}

/// Measure a feature and scale it to unit l2 norm.
fn measure(
    phi: &MeasurementMatrix,
    feature: &FeatureVector,
) -> Result<Vec<f64>, ClassifierError> {
    let projected = project(phi, &feature.values).map_err(|e| match e {
        SolverError::DimensionMismatch { expected, got } => ClassifierError::DimensionMismatch {
            expected,
            got,
            context: feature.clip_id.clone(),
        },
        other => ClassifierError::Solver(other),
    })?;
    normalize_l2(&projected).map_err(|_| ClassifierError::ZeroFeature {
        clip_id: feature.clip_id.clone(),
    })
}

/// Build a dictionary from training features.
///
/// `classes` fixes the class order (sorted label list); every class must
/// own at least one feature. A fresh projection is generated from
/// `(measured_dim, feature dim, seed)` and every feature is measured and
/// unit-normalized into a column, grouped by class.
pub fn build_dictionary(
    features: &[FeatureVector],
    labels: &[String],
    classes: &[String],
    config: &ClassifierConfig,
    seed: u64,
    config_fingerprint: &str,
) -> Result<Dictionary, ClassifierError> {
    assert_eq!(features.len(), labels.len(), "features/labels length mismatch");
    if classes.is_empty() || features.is_empty() {
        return Err(ClassifierError::BadSetup(
            "no classes or no training features".into(),
        ));
    }
    let n = features[0].dim();
    for f in features {
        if f.dim() != n {
            return Err(ClassifierError::DimensionMismatch {
                expected: n,
                got: f.dim(),
                context: f.clip_id.clone(),
            });
        }
    }
    if config.measured_dim >= n {
        return Err(ClassifierError::BadSetup(format!(
            "measured_dim {} must be below the feature dimension {n}",
            config.measured_dim
        )));
    }
    let phi = make_measurement(config.measurement, config.measured_dim, n, seed)?;

    let mut columns = Vec::with_capacity(features.len());
    let mut column_labels = Vec::with_capacity(features.len());
    let mut class_offsets = Vec::with_capacity(classes.len());
    for (class_idx, class) in classes.iter().enumerate() {
        let start = columns.len();
        for (f, label) in features.iter().zip(labels) {
            if label != class {
                continue;
            }
            columns.push(measure(&phi, f)?);
            column_labels.push(class_idx);
        }
        let len = columns.len() - start;
        if len == 0 {
            return Err(ClassifierError::EmptyClass {
                class: class.clone(),
            });
        }
        class_offsets.push((start, len));
    }

    Ok(Dictionary {
        atoms: Matrix::from_columns(columns),
        labels: column_labels,
        class_offsets,
        phi,
        config_fingerprint: config_fingerprint.to_string(),
        classes: classes.to_vec(),
    })
}

/// Measure the feature with the dictionary's projection and sparse-code
/// it against the atoms.
pub fn sparse_code(
    dict: &Dictionary,
    feature: &FeatureVector,
    config: &ClassifierConfig,
) -> Result<SparseSolution, ClassifierError> {
    let y = measure(&dict.phi, feature)?;
    let sol = match config.backend {
        SolverBackend::Omp => omp(&dict.atoms, &y, config.k_max, config.tol)?,
        SolverBackend::Ista { lambda, max_iter } => {
            ista_l1(&dict.atoms, &y, lambda, max_iter, config.tol)?
        }
    };
    Ok(sol)
}

/// Residual `||y - atoms * delta_i(x)||` per class, where `delta_i`
/// keeps only the coefficients belonging to class `i`.
pub fn class_residuals(
    dict: &Dictionary,
    y: &[f64],
    sol: &SparseSolution,
) -> Result<Vec<f64>, ClassifierError> {
    if sol.coefficients.len() != dict.atoms.cols() {
        return Err(ClassifierError::DimensionMismatch {
            expected: dict.atoms.cols(),
            got: sol.coefficients.len(),
            context: "solution coefficients".into(),
        });
    }
    if y.len() != dict.atoms.rows() {
        return Err(ClassifierError::DimensionMismatch {
            expected: dict.atoms.rows(),
            got: y.len(),
            context: "measured vector".into(),
        });
    }
    let mut residuals = Vec::with_capacity(dict.class_offsets.len());
    for &(start, len) in &dict.class_offsets {
        let mut r = y.to_vec();
        for j in start..start + len {
            let c = sol.coefficients[j];
            if c == 0.0 {
                continue;
            }
            for (ri, ai) in r.iter_mut().zip(dict.atoms.col(j)) {
                *ri -= c * ai;
            }
        }
        residuals.push(solver::norm2(&r));
    }
    Ok(residuals)
}

/// Full decision: measure, sparse-code, compute per-class residuals,
/// and take the argmin (lowest class index on ties).
pub fn classify(
    dict: &Dictionary,
    feature: &FeatureVector,
    config: &ClassifierConfig,
) -> Result<ClassificationResult, ClassifierError> {
    let y = measure(&dict.phi, feature)?;
    let sol = match config.backend {
        SolverBackend::Omp => omp(&dict.atoms, &y, config.k_max, config.tol)?,
        SolverBackend::Ista { lambda, max_iter } => {
            ista_l1(&dict.atoms, &y, lambda, max_iter, config.tol)?
        }
    };
    let residuals = class_residuals(dict, &y, &sol)?;
    let predicted_index = residuals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("residuals are finite"))
        .map(|(i, _)| i)
        .expect("at least one class");
    let mut sorted = residuals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let margin = if sorted.len() > 1 {
        sorted[1] - sorted[0]
    } else {
        0.0
    };
    Ok(ClassificationResult {
        predicted: dict.classes[predicted_index].clone(),
        predicted_index,
        residuals,
        solution: sol,
        margin,
    })
}

// ---------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------

const MODEL_VERSION: u32 = 1;

/// Everything needed to classify later: the dictionary plus the solver
/// parameters it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub dict: Dictionary,
    pub k_max: usize,
    pub tol: f64,
}

/// Serialize a model as versioned text. Floats carry 18 significant
/// digits so a round trip is bit-faithful.
pub fn save_model(model: &Model, path: &Path) -> Result<(), ClassifierError> {
    let d = &model.dict;
    let m = d.atoms.rows();
    let n_atoms = d.atoms.cols();
    let mut out = String::new();
    out.push_str(&format!("srcm {MODEL_VERSION}\n"));
    out.push_str(&format!("m {m}\n"));
    out.push_str(&format!("n {}\n", d.phi.cols()));
    out.push_str(&format!("atoms {n_atoms}\n"));
    out.push_str(&format!("classes {}\n", d.classes.join(",")));
    out.push_str(&format!("seed {}\n", d.phi.seed));
    out.push_str(&format!("k_max {}\n", model.k_max));
    out.push_str(&format!("tol {}\n", fmt_f64(model.tol)));
    out.push_str(&format!("config_fingerprint {}\n", d.config_fingerprint));
    out.push_str("phi\n");
    for i in 0..d.phi.rows() {
        let row: Vec<String> = d.phi.row(i).iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("atoms_matrix\n");
    for i in 0..m {
        let row: Vec<String> = (0..n_atoms).map(|j| fmt_f64(d.atoms.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("labels\n");
    out.push_str("atom_index,class\n");
    for (j, &class_idx) in d.labels.iter().enumerate() {
        out.push_str(&format!("{j},{}\n", d.classes[class_idx]));
    }
    out.push_str("end\n");
    std::fs::write(path, out).map_err(|e| ClassifierError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<Model, ClassifierError> {
    let text = std::fs::read_to_string(path).map_err(|e| ClassifierError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let bad = |detail: String| ClassifierError::ModelFormat {
        path: path.display().to_string(),
        detail,
    };
    let mut lines = text.lines().enumerate();
    let mut header = std::collections::BTreeMap::new();
    loop {
        let (no, line) = lines
            .next()
            .ok_or_else(|| bad("unexpected end of header".into()))?;
        let line = line.trim();
        if line == "phi" {
            break;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("line {}: expected 'key value'", no + 1)))?;
        header.insert(key.to_string(), value.to_string());
    }
    let get = |key: &str| -> Result<&String, ClassifierError> {
        header.get(key).ok_or_else(|| ClassifierError::ModelFormat {
            path: path.display().to_string(),
            detail: format!("missing header field {key:?}"),
        })
    };
    let version: u32 = get("srcm")?.parse().map_err(|_| bad("bad version".into()))?;
    if version != MODEL_VERSION {
        return Err(bad(format!("unsupported model version {version}")));
    }
    let m: usize = get("m")?.parse().map_err(|_| bad("bad m".into()))?;
    let n: usize = get("n")?.parse().map_err(|_| bad("bad n".into()))?;
    let n_atoms: usize = get("atoms")?.parse().map_err(|_| bad("bad atoms".into()))?;
    let classes: Vec<String> = get("classes")?.split(',').map(str::to_string).collect();
    let seed: u64 = get("seed")?.parse().map_err(|_| bad("bad seed".into()))?;
    let k_max: usize = get("k_max")?.parse().map_err(|_| bad("bad k_max".into()))?;
    let tol: f64 = get("tol")?.parse().map_err(|_| bad("bad tol".into()))?;
    let config_fingerprint = get("config_fingerprint")?.clone();

    let parse_row = |line: &str, want: usize, what: &str| -> Result<Vec<f64>, ClassifierError> {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ClassifierError::ModelFormat {
                path: path.display().to_string(),
                detail: format!("bad float in {what}"),
            })?;
        if row.len() != want {
            return Err(ClassifierError::ModelFormat {
                path: path.display().to_string(),
                detail: format!("{what}: expected {want} values, got {}", row.len()),
            });
        }
        Ok(row)
    };

    let mut phi_data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (_, line) = lines.next().ok_or_else(|| bad("phi rows truncated".into()))?;
        phi_data.extend(parse_row(line, n, "phi")?);
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "atoms_matrix" => {}
        _ => return Err(bad("expected atoms_matrix section".into())),
    }
    let mut atom_rows = Vec::with_capacity(m);
    for _ in 0..m {
        let (_, line) = lines.next().ok_or_else(|| bad("atom rows truncated".into()))?;
        atom_rows.push(parse_row(line, n_atoms, "atoms")?);
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "labels" => {}
        _ => return Err(bad("expected labels section".into())),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "atom_index,class" => {}
        _ => return Err(bad("expected labels header".into())),
    }
    let mut labels = Vec::with_capacity(n_atoms);
    for _ in 0..n_atoms {
        let (no, line) = lines.next().ok_or_else(|| bad("labels truncated".into()))?;
        let (idx, class) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("line {}: bad label row", no + 1)))?;
        let idx: usize = idx.parse().map_err(|_| bad("bad atom index".into()))?;
        if idx != labels.len() {
            return Err(bad(format!("label rows out of order at {idx}")));
        }
        let class_idx = classes
            .iter()
            .position(|c| c == class)
            .ok_or_else(|| bad(format!("unknown class {class:?} in labels")))?;
        labels.push(class_idx);
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "end" => {}
        _ => return Err(bad("missing end marker".into())),
    }

    // Reassemble the column-major atom matrix.
    let mut columns = vec![vec![0.0; m]; n_atoms];
    for (i, row) in atom_rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            columns[j][i] = v;
        }
    }
    // Recover contiguous class ranges from the labels.
    let mut class_offsets = Vec::with_capacity(classes.len());
    let mut cursor = 0usize;
    for class_idx in 0..classes.len() {
        let start = cursor;
        while cursor < labels.len() && labels[cursor] == class_idx {
            cursor += 1;
        }
        if cursor == start {
            return Err(bad(format!("class {:?} has no atoms", classes[class_idx])));
        }
        class_offsets.push((start, cursor - start));
    }
    if cursor != labels.len() {
        return Err(bad("atom labels are not grouped by class".into()));
    }

    Ok(Model {
        dict: Dictionary {
            atoms: Matrix::from_columns(columns),
            labels,
            class_offsets,
            phi: MeasurementMatrix::from_rows_data(m, n, seed, phi_data),
            config_fingerprint,
            classes,
        },
        k_max,
        tol,
    })
}
