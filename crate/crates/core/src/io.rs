//! File formats: dense states (binary or JSON), tree descriptions and the
//! two-file TTNS container (JSON manifest next to a binary tensor blob).

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::network::{Ttns, TtnsTensor};
use crate::state::{DenseState, SchmidtSpectrum};
use crate::tree::{Relabeling, TreeGraph};
use crate::Error;

pub const STATE_MAGIC: &[u8; 4] = b"TTNS";
pub const STATE_VERSION: u32 = 1;
pub const CONTAINER_FORMAT: &str = "ttns-container";
pub const CONTAINER_VERSION: u32 = 1;

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset, message: message.into() }
}

/// Byte offset of a serde_json error inside `text`.
fn json_offset(text: &str, err: &serde_json::Error) -> usize {
    let line = err.line().max(1);
    let before: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    before + err.column().saturating_sub(1)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| format_err(json_offset(text, &e), e.to_string()))
}

pub fn encode_state(state: &DenseState) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * state.n_sites() + 16 * state.amplitudes().len());
    out.extend_from_slice(STATE_MAGIC);
    out.extend_from_slice(&STATE_VERSION.to_le_bytes());
    out.extend_from_slice(&(state.n_sites() as u32).to_le_bytes());
    for &d in state.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    push_complex(&mut out, state.amplitudes());
    out
}

fn push_complex(out: &mut Vec<u8>, data: &[C64]) {
    for a in data {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], Error> {
        if self.bytes.len() - self.pos < n {
            return Err(format_err(self.pos, format!("truncated input while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn complex(&mut self, count: usize) -> Result<Vec<C64>, Error> {
        let need = count.checked_mul(16).ok_or_else(|| format_err(self.pos, "amplitude count overflows"))?;
        let have = self.bytes.len() - self.pos;
        if have < need {
            let at = self.pos + have / 16 * 16;
            return Err(format_err(at, format!("truncated input: {} of {count} complex entries", have / 16)));
        }
        let raw = self.take(need, "amplitudes")?;
        Ok(raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect())
    }
}

fn decode_binary_state(bytes: &[u8]) -> Result<DenseState, Error> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != STATE_MAGIC {
        return Err(format_err(0, "bad magic"));
    }
    let version = r.u32("version")?;
    if version != STATE_VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let n = r.u32("site count")? as usize;
    if n == 0 {
        return Err(format_err(8, "zero sites"));
    }
    let mut dims = Vec::with_capacity(n.min(64));
    let mut len = 1usize;
    for _ in 0..n {
        let at = r.pos;
        let d = r.u32("local dimension")? as usize;
        if d == 0 {
            return Err(format_err(at, "zero local dimension"));
        }
        len = len.checked_mul(d).ok_or_else(|| format_err(at, "state size overflows"))?;
        dims.push(d);
    }
    let amps = r.complex(len)?;
    if r.pos != bytes.len() {
        return Err(format_err(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    DenseState::new(dims, amps)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    dims: Vec<usize>,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

/// Reads either format; binary is recognised by its magic bytes.
pub fn decode_state(bytes: &[u8]) -> Result<DenseState, Error> {
    if bytes.starts_with(STATE_MAGIC) {
        return decode_binary_state(bytes);
    }
    if bytes.iter().find(|b| !b.is_ascii_whitespace()) != Some(&b'{') {
        return Err(format_err(0, "bad magic: expected \"TTNS\" or a JSON object"));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| format_err(e.valid_up_to(), "JSON input is not UTF-8"))?;
    let js: StateJson = parse_json(text)?;
    let im = js.im.unwrap_or_else(|| vec![0.0; js.re.len()]);
    if im.len() != js.re.len() {
        return Err(format_err(0, format!("re has {} entries, im has {}", js.re.len(), im.len())));
    }
    DenseState::new(js.dims, js.re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect())
}

pub fn state_to_json(state: &DenseState) -> String {
    let js = StateJson {
        dims: state.dims().to_vec(),
        re: state.amplitudes().iter().map(|a| a.re).collect(),
        im: Some(state.amplitudes().iter().map(|a| a.im).collect()),
    };
    serde_json::to_string(&js).expect("state serializes")
}

pub fn read_state(path: &Path) -> Result<DenseState, Error> {
    decode_state(&fs::read(path)?)
}

/// Binary unless the path ends in `.json`.
pub fn write_state(path: &Path, state: &DenseState) -> Result<(), Error> {
    if path.extension().is_some_and(|e| e == "json") {
        fs::write(path, state_to_json(state))?;
    } else {
        fs::write(path, encode_state(state))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub n: usize,
    pub dims: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeling: Option<Vec<usize>>,
}

impl TreeFile {
    pub fn parse(text: &str) -> Result<TreeFile, Error> {
        let tf: TreeFile = parse_json(text)?;
        if tf.dims.len() != tf.n {
            return Err(Error::DimMismatch(format!("n = {} but {} dims", tf.n, tf.dims.len())));
        }
        Ok(tf)
    }

    pub fn build(&self) -> Result<(TreeGraph, Relabeling), Error> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Ok(TreeGraph::from_edge_list(&edges, &self.dims, self.root)?)
    }

    /// Canonical description; `labeling` maps original labels to canonical ones.
    pub fn canonical(tree: &TreeGraph, relabeling: &Relabeling) -> TreeFile {
        TreeFile {
            n: tree.n(),
            dims: tree.dims().to_vec(),
            edges: tree.edges().map(|i| [i, tree.parent(i)]).collect(),
            root: Some(tree.root()),
            labeling: Some(relabeling.old_to_new.clone()),
        }
    }
}

pub fn read_tree(path: &Path) -> Result<(TreeGraph, Relabeling), Error> {
    TreeFile::parse(&fs::read_to_string(path)?)?.build()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    vertex: usize,
    shape: Vec<usize>,
    /// Offset into the blob, counted in complex entries.
    offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    blob: String,
    tree: TreeFile,
    bond_dims: Vec<usize>,
    tensors: Vec<TensorEntry>,
    #[serde(default)]
    spectra: Option<Vec<Vec<f64>>>,
}

/// Blob path belonging to a manifest path.
pub fn blob_path(manifest: &Path) -> PathBuf {
    manifest.with_extension("bin")
}

/// Writes `manifest` and its blob next to it.
pub fn write_ttns(manifest: &Path, ttns: &Ttns) -> Result<PathBuf, Error> {
    let blob = blob_path(manifest);
    let mut bytes = Vec::new();
    let mut tensors = Vec::with_capacity(ttns.tensors.len());
    let mut offset = 0;
    for t in &ttns.tensors {
        tensors.push(TensorEntry { vertex: t.vertex, shape: t.shape.clone(), offset });
        offset += t.data.len();
        push_complex(&mut bytes, &t.data);
    }
    let m = Manifest {
        format: CONTAINER_FORMAT.into(),
        version: CONTAINER_VERSION,
        blob: blob.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        tree: TreeFile::canonical(&ttns.tree, &Relabeling::identity(ttns.tree.n())),
        bond_dims: ttns.bond_dims.clone(),
        tensors,
        spectra: ttns.spectra.as_ref().map(|s| s.iter().map(|sp| sp.coefficients.clone()).collect()),
    };
    fs::write(&blob, bytes)?;
    fs::write(manifest, serde_json::to_string_pretty(&m)?)?;
    Ok(blob)
}

pub fn read_ttns(manifest: &Path) -> Result<Ttns, Error> {
    let m: Manifest = parse_json(&fs::read_to_string(manifest)?)?;
    if m.format != CONTAINER_FORMAT || m.version != CONTAINER_VERSION {
        return Err(format_err(0, format!("unsupported container {} v{}", m.format, m.version)));
    }
    let (tree, relabeling) = m.tree.build()?;
    if !relabeling.is_identity() {
        return Err(Error::ShapeInconsistent("manifest tree is not in canonical labels".into()));
    }
    let blob_file = manifest.with_file_name(&m.blob);
    let bytes = fs::read(&blob_file)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    let mut tensors = Vec::with_capacity(m.tensors.len());
    for (k, e) in m.tensors.iter().enumerate() {
        if e.vertex != k + 1 || e.offset * 16 != r.pos {
            return Err(format_err(r.pos, format!("tensor entry {k} out of order")));
        }
        let len = e.shape.iter().product();
        tensors.push(TtnsTensor { vertex: e.vertex, shape: e.shape.clone(), data: r.complex(len)? });
    }
    if r.pos != bytes.len() {
        return Err(format_err(r.pos, "trailing bytes in tensor blob"));
    }
    let spectra = m.spectra.map(|s| {
        s.into_iter().enumerate().map(|(k, c)| SchmidtSpectrum::new(Some(k + 1), c)).collect()
    });
    let ttns = Ttns { tree, tensors, bond_dims: m.bond_dims, spectra };
    ttns.validate()?;
    Ok(ttns)
}
