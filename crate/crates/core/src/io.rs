//! File formats.
//!
//! Matrices and vectors are flat row-major arrays of `[re, im]` pairs.
//!
//! * State JSON: `{dimA, dimB, kind: "pure"|"mixed", data, provenance?,
//!   ensemble?}`. The optional ensemble is a list of `{weight, data}` pure
//!   members, used as a decomposition hint.
//! * State binary: the magic `SCHMLAB1` zero-padded to 16 bytes, `u32 dimA`,
//!   `u32 dimB`, `u8 kind` (0 pure, 1 mixed), then little-endian `f64`
//!   re/im pairs.
//! * Channel JSON: `{dim_in, dim_out, kraus: [matrix, ...]}` or
//!   `{choi: matrix, dims: [dim_out, dim_in]}`; Choi states are read
//!   relative to the maximally entangled reference.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::linalg::{self, BipartiteDims, CMat, CVec, C64, DIMENSION_CAP};
use crate::schmidt::WitnessOperator;
use crate::states::{DensityMatrix, Ensemble, EnsembleMember, PureState};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SCHMLAB1";
const HEADER_LEN: usize = 16 + 4 + 4 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberRecord {
    pub weight: f64,
    pub data: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub kind: StateKind,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Vec<MemberRecord>>,
}

/// A state read from disk.
#[derive(Debug, Clone)]
pub enum StateData {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateData {
    pub fn dims(&self) -> BipartiteDims {
        match self {
            StateData::Pure(p) => p.dims(),
            StateData::Mixed(m) => m.dims(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            StateData::Pure(p) => p.density(),
            StateData::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateDocument {
    pub state: StateData,
    pub provenance: Option<serde_json::Value>,
    pub hint: Option<Ensemble>,
}

fn pairs_of(values: impl IntoIterator<Item = C64>) -> Vec<[f64; 2]> {
    values.into_iter().map(|z| [z.re, z.im]).collect()
}

fn complex_of(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|p| C64::new(p[0], p[1])).collect()
}

pub fn matrix_pairs(m: &CMat) -> Vec<[f64; 2]> {
    pairs_of(linalg::to_row_major(m))
}

fn matrix_of(pairs: &[[f64; 2]], rows: usize, cols: usize, field: &str) -> Result<CMat> {
    if pairs.len() != rows * cols {
        return Err(Error::Parse(format!("field `{field}`: expected {} entries for {rows}x{cols}, got {}", rows * cols, pairs.len())));
    }
    if pairs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("field `{field}`: non-finite entry")));
    }
    linalg::from_row_major(rows, cols, &complex_of(pairs))
}

fn checked_dims(a: usize, b: usize) -> Result<BipartiteDims> {
    let dims = BipartiteDims::new(a, b).map_err(|e| Error::Parse(format!("fields `dimA`/`dimB`: {e}")))?;
    if dims.total() > DIMENSION_CAP {
        return Err(Error::DimensionLimit { requested: dims.total(), cap: DIMENSION_CAP });
    }
    Ok(dims)
}

impl StateRecord {
    pub fn from_pure(psi: &PureState) -> Self {
        let d = psi.dims();
        Self { dim_a: d.a, dim_b: d.b, kind: StateKind::Pure, data: pairs_of(psi.amplitudes().iter().copied()), provenance: None, ensemble: None }
    }

    pub fn from_mixed(rho: &DensityMatrix) -> Self {
        let d = rho.dims();
        Self { dim_a: d.a, dim_b: d.b, kind: StateKind::Mixed, data: matrix_pairs(rho.matrix()), provenance: None, ensemble: None }
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn with_ensemble(mut self, ensemble: &Ensemble) -> Self {
        self.ensemble = Some(
            ensemble
                .members
                .iter()
                .map(|m| MemberRecord { weight: m.weight, data: pairs_of(m.state.amplitudes().iter().copied()) })
                .collect(),
        );
        self
    }

    pub fn into_document(self) -> Result<StateDocument> {
        let dims = checked_dims(self.dim_a, self.dim_b)?;
        let n = dims.total();
        let state = match self.kind {
            StateKind::Pure => StateData::Pure(PureState::new(CVec::from_vec(vector_of(&self.data, n, "data")?), dims)?),
            StateKind::Mixed => StateData::Mixed(DensityMatrix::new(matrix_of(&self.data, n, n, "data")?, dims)?),
        };
        let hint = match self.ensemble {
            None => None,
            Some(members) => Some(Ensemble {
                members: members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let v = vector_of(&m.data, n, &format!("ensemble[{i}].data"))?;
                        Ok(EnsembleMember { weight: m.weight, state: PureState::normalized(CVec::from_vec(v), dims)? })
                    })
                    .collect::<Result<Vec<_>>>()?,
            }),
        };
        Ok(StateDocument { state, provenance: self.provenance, hint })
    }
}

fn vector_of(pairs: &[[f64; 2]], n: usize, field: &str) -> Result<Vec<C64>> {
    if pairs.len() != n {
        return Err(Error::Parse(format!("field `{field}`: expected {n} amplitudes, got {}", pairs.len())));
    }
    if pairs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("field `{field}`: non-finite entry")));
    }
    Ok(complex_of(pairs))
}

pub fn parse_state_json(text: &str) -> Result<StateDocument> {
    let record: StateRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    record.into_document()
}

pub fn state_to_json(record: &StateRecord) -> Result<String> {
    serde_json::to_string_pretty(record).map_err(|e| Error::Parse(e.to_string()))
}

pub fn encode_state_binary(state: &StateData) -> Vec<u8> {
    let dims = state.dims();
    let (kind, values) = match state {
        StateData::Pure(p) => (0u8, p.amplitudes().iter().copied().collect::<Vec<_>>()),
        StateData::Mixed(m) => (1u8, linalg::to_row_major(m.matrix())),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[0u8; 8]);
    out.extend_from_slice(&(dims.a as u32).to_le_bytes());
    out.extend_from_slice(&(dims.b as u32).to_le_bytes());
    out.push(kind);
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_state_binary(bytes: &[u8]) -> Result<StateData> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC || bytes[8..16].iter().any(|&b| b != 0) {
        return Err(Error::Parse("missing SCHMLAB1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let dims = checked_dims(word(16), word(20))?;
    let n = dims.total();
    let kind = bytes[24];
    let count = match kind {
        0 => n,
        1 => n * n,
        k => return Err(Error::Parse(format!("byte 24: unknown state kind {k}"))),
    };
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * count {
        return Err(Error::Parse(format!("expected {} payload bytes, got {}", 16 * count, body.len())));
    }
    let values: Vec<C64> = body
        .chunks_exact(16)
        .map(|c| C64::new(f64::from_le_bytes(c[..8].try_into().expect("8 bytes")), f64::from_le_bytes(c[8..].try_into().expect("8 bytes"))))
        .collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse("non-finite entry in payload".into()));
    }
    Ok(match kind {
        0 => StateData::Pure(PureState::new(CVec::from_vec(values), dims)?),
        _ => StateData::Mixed(DensityMatrix::new(linalg::from_row_major(n, n, &values)?, dims)?),
    })
}

/// Read a state file, detecting the binary format by its magic.
pub fn read_state(path: &Path) -> Result<StateDocument> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        return Ok(StateDocument { state: decode_state_binary(&bytes)?, provenance: None, hint: None });
    }
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(format!("not UTF-8 and no binary header: {e}")))?;
    parse_state_json(&text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelRecord {
    Kraus { dim_in: usize, dim_out: usize, kraus: Vec<Vec<[f64; 2]>> },
    Choi { choi: Vec<[f64; 2]>, dims: [usize; 2] },
}

impl ChannelRecord {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        ChannelRecord::Kraus { dim_in: ch.dim_in(), dim_out: ch.dim_out(), kraus: ch.kraus().iter().map(matrix_pairs).collect() }
    }

    pub fn into_channel(self) -> Result<QuantumChannel> {
        match self {
            ChannelRecord::Kraus { dim_in, dim_out, kraus } => {
                if dim_in == 0 || dim_out == 0 {
                    return Err(Error::Parse("fields `dim_in`/`dim_out` must be positive".into()));
                }
                if dim_in * dim_out > DIMENSION_CAP {
                    return Err(Error::DimensionLimit { requested: dim_in * dim_out, cap: DIMENSION_CAP });
                }
                let ops = kraus
                    .iter()
                    .enumerate()
                    .map(|(i, k)| matrix_of(k, dim_out, dim_in, &format!("kraus[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                QuantumChannel::new(ops)
            }
            ChannelRecord::Choi { choi, dims } => {
                let d = checked_dims(dims[0], dims[1])?;
                let n = d.total();
                let rho = DensityMatrix::new(matrix_of(&choi, n, n, "choi")?, d)?;
                QuantumChannel::from_choi(&rho, &PureState::maximally_entangled(d.b)?)
            }
        }
    }
}

pub fn parse_channel_json(text: &str) -> Result<QuantumChannel> {
    let record: ChannelRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    record.into_channel()
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    parse_channel_json(&std::fs::read_to_string(path)?)
}

/// `{order, margin, dims, matrix, recipe, seeds}`.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessRecord<'a> {
    pub order: usize,
    pub margin: f64,
    pub dims: BipartiteDims,
    pub matrix: Vec<[f64; 2]>,
    pub recipe: &'a crate::schmidt::Recipe,
    pub seeds: Vec<u64>,
}

impl<'a> WitnessRecord<'a> {
    pub fn new(w: &'a WitnessOperator) -> Self {
        Self { order: w.order, margin: w.margin, dims: w.dims, matrix: matrix_pairs(&w.matrix), recipe: &w.recipe, seeds: vec![w.seed] }
    }
}

pub fn witness_to_json(w: &WitnessOperator) -> Result<String> {
    serde_json::to_string_pretty(&WitnessRecord::new(w)).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_round_trip_mixed_with_hint() {
        let mut g = ChaCha8Rng::seed_from_u64(1);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = DensityMatrix::new(random::density(&mut g, 6, 3), dims).unwrap();
        let ens = rho.eigen_ensemble(1e-10).unwrap();
        let text = state_to_json(&StateRecord::from_mixed(&rho).with_ensemble(&ens)).unwrap();
        let doc = parse_state_json(&text).unwrap();
        assert!((doc.state.density().matrix() - rho.matrix()).norm() < 1e-15);
        assert_eq!(doc.hint.unwrap().len(), ens.len());
    }

    #[test]
    fn binary_round_trip() {
        let psi = PureState::maximally_entangled(3).unwrap();
        let bytes = encode_state_binary(&StateData::Pure(psi.clone()));
        assert_eq!(&bytes[..8], MAGIC);
        let StateData::Pure(back) = decode_state_binary(&bytes).unwrap() else { panic!() };
        assert_eq!(back.amplitudes(), psi.amplitudes());
        assert!(decode_state_binary(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = parse_state_json(r#"{"dimA": 2, "dimB": 2, "kind": "pure", "data": [[1, 0]]}"#).unwrap_err();
        assert!(err.to_string().contains("`data`"), "{err}");
        let err = parse_state_json("{\"dimA\": 2,\n \"dimB\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let non_psd = r#"{"dimA": 1, "dimB": 2, "kind": "mixed", "data": [[1.5,0],[0,0],[0,0],[-0.5,0]]}"#;
        assert!(matches!(parse_state_json(non_psd), Err(Error::Validation(_))));
    }

    #[test]
    fn channel_formats() {
        let id = QuantumChannel::identity(2).unwrap();
        let text = serde_json::to_string(&ChannelRecord::from_channel(&id)).unwrap();
        assert_eq!(parse_channel_json(&text).unwrap().kraus().len(), 1);
        let choi = ChannelRecord::Choi { choi: matrix_pairs(id.choi().unwrap().matrix()), dims: [2, 2] };
        let back = choi.into_channel().unwrap();
        let rho = random::density(&mut ChaCha8Rng::seed_from_u64(2), 2, 2);
        assert!((back.apply(&rho).unwrap() - rho).norm() < 1e-10);
        let bad = r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[0.5, 0]]]}"#;
        assert!(matches!(parse_channel_json(bad), Err(Error::Validation(_))));
    }
}
