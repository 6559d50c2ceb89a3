//! Sparse multi-factor tensors with operator-space role metadata.
//!
//! A [`LabeledTensor`] stores an element of a tensor product of finitely many
//! factors, each tagged with the role it plays under duality: row/column
//! vectors, trace-class/full matrix spaces, and the diagonal `l1`/`l_inf`
//! spaces. Vector-like factors may carry a composite label shape (for
//! example a `Z_n^4` label of total dimension `n^4` stored as a 4-tuple);
//! flattening only happens when a tensor is written out or assembled into a
//! dense matrix.
//!
//! Entries live in a `BTreeMap`, so iteration and merge order are
//! index-sorted and floating-point results are reproducible. Stored values
//! with magnitude at or below [`crate::PRUNE_THRESHOLD`] are pruned.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Error;
use crate::linalg::{C64, ZERO};
use crate::{Result, PRUNE_THRESHOLD};

/// Operator-space role of a tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum FactorKind {
    RowVec,
    ColVec,
    TraceClass,
    FullOperator,
    DiagL1,
    DiagLinf,
}

impl FactorKind {
    /// The role this kind pairs with under the bilinear duality bracket.
    pub fn dual(self) -> FactorKind {
        match self {
            FactorKind::RowVec => FactorKind::ColVec,
            FactorKind::ColVec => FactorKind::RowVec,
            FactorKind::TraceClass => FactorKind::FullOperator,
            FactorKind::FullOperator => FactorKind::TraceClass,
            FactorKind::DiagL1 => FactorKind::DiagLinf,
            FactorKind::DiagLinf => FactorKind::DiagL1,
        }
    }

    /// Matrix-like kinds are indexed by an `(i, j)` pair.
    pub fn is_matrix(self) -> bool {
        matches!(self, FactorKind::TraceClass | FactorKind::FullOperator)
    }

    pub fn name(self) -> &'static str {
        match self {
            FactorKind::RowVec => "RowVec",
            FactorKind::ColVec => "ColVec",
            FactorKind::TraceClass => "TraceClass",
            FactorKind::FullOperator => "FullOperator",
            FactorKind::DiagL1 => "DiagL1",
            FactorKind::DiagLinf => "DiagLinf",
        }
    }

    pub fn from_name(s: &str) -> Option<FactorKind> {
        Some(match s {
            "RowVec" => FactorKind::RowVec,
            "ColVec" => FactorKind::ColVec,
            "TraceClass" => FactorKind::TraceClass,
            "FullOperator" => FactorKind::FullOperator,
            "DiagL1" => FactorKind::DiagL1,
            "DiagLinf" => FactorKind::DiagLinf,
            _ => return None,
        })
    }
}

/// One tensor factor: a role plus its index shape.
///
/// For matrix kinds `axes` holds the single side length; for vector-like
/// kinds it holds the per-axis extents of the (possibly composite) label,
/// whose product is the factor dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub axes: Vec<usize>,
}

impl FactorSpec {
    pub fn new(kind: FactorKind, axes: Vec<usize>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|&a| a == 0) {
            return Err(Error::ZeroDimension);
        }
        if kind.is_matrix() && axes.len() != 1 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { kind, axes })
    }

    pub fn row(dim: usize) -> Self {
        Self {
            kind: FactorKind::RowVec,
            axes: vec![dim],
        }
    }

    pub fn col(dim: usize) -> Self {
        Self {
            kind: FactorKind::ColVec,
            axes: vec![dim],
        }
    }

    pub fn row_label(axes: Vec<usize>) -> Self {
        Self {
            kind: FactorKind::RowVec,
            axes,
        }
    }

    pub fn col_label(axes: Vec<usize>) -> Self {
        Self {
            kind: FactorKind::ColVec,
            axes,
        }
    }

    pub fn trace_class(n: usize) -> Self {
        Self {
            kind: FactorKind::TraceClass,
            axes: vec![n],
        }
    }

    pub fn full_operator(n: usize) -> Self {
        Self {
            kind: FactorKind::FullOperator,
            axes: vec![n],
        }
    }

    pub fn diag_l1(axes: Vec<usize>) -> Self {
        Self {
            kind: FactorKind::DiagL1,
            axes,
        }
    }

    pub fn diag_linf(axes: Vec<usize>) -> Self {
        Self {
            kind: FactorKind::DiagLinf,
            axes,
        }
    }

    /// Total dimension (product of axes; matrix side for matrix kinds).
    pub fn dim(&self) -> usize {
        self.axes.iter().product()
    }

    /// True when `self` and `other` pair under the bilinear bracket.
    pub fn is_dual_to(&self, other: &FactorSpec) -> bool {
        self.kind.dual() == other.kind && self.dim() == other.dim()
    }

    fn accepts(&self, idx: &FactorIndex) -> bool {
        match idx {
            FactorIndex::Label(components) => {
                !self.kind.is_matrix()
                    && components.len() == self.axes.len()
                    && components
                        .iter()
                        .zip(&self.axes)
                        .all(|(&c, &a)| (c as usize) < a)
            }
            FactorIndex::Pair(i, j) => {
                self.kind.is_matrix()
                    && (*i as usize) < self.axes[0]
                    && (*j as usize) < self.axes[0]
            }
        }
    }
}

/// Index into one factor: a (possibly composite) label for vector-like
/// factors, or a matrix-entry pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorIndex {
    Label(Vec<u32>),
    Pair(u32, u32),
}

impl FactorIndex {
    pub fn label(components: &[usize]) -> Self {
        FactorIndex::Label(components.iter().map(|&c| c as u32).collect())
    }

    pub fn pair(i: usize, j: usize) -> Self {
        FactorIndex::Pair(i as u32, j as u32)
    }

    pub fn components(&self) -> Vec<u32> {
        match self {
            FactorIndex::Label(c) => c.clone(),
            FactorIndex::Pair(i, j) => vec![*i, *j],
        }
    }
}

/// Full multi-index of one stored entry: one [`FactorIndex`] per factor.
pub type MultiIndex = Vec<FactorIndex>;

/// Sparse element of a tensor product of labeled factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTensor {
    factors: Vec<FactorSpec>,
    entries: BTreeMap<MultiIndex, C64>,
}

impl LabeledTensor {
    /// Empty (zero) tensor over the given factors.
    pub fn zero(factors: Vec<FactorSpec>) -> Self {
        Self {
            factors,
            entries: BTreeMap::new(),
        }
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.entries.iter()
    }

    pub fn get(&self, key: &MultiIndex) -> C64 {
        self.entries.get(key).copied().unwrap_or(ZERO)
    }

    /// Adds `value` at `key`, merging with any present entry and pruning
    /// results at or below the threshold.
    pub fn add(&mut self, key: MultiIndex, value: C64) -> Result<()> {
        if key.len() != self.factors.len() {
            return Err(Error::InvalidIndex {
                position: key.len().min(self.factors.len()),
            });
        }
        for (pos, (idx, spec)) in key.iter().zip(&self.factors).enumerate() {
            if !spec.accepts(idx) {
                return Err(Error::InvalidIndex { position: pos });
            }
        }
        let merged = self.entries.get(&key).copied().unwrap_or(ZERO) + value;
        if merged.norm() <= PRUNE_THRESHOLD {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, merged);
        }
        Ok(())
    }

    /// Scales every entry.
    pub fn scale(&mut self, c: C64) {
        if c.norm() == 0.0 {
            self.entries.clear();
            return;
        }
        for v in self.entries.values_mut() {
            *v *= c;
        }
        self.entries.retain(|_, v| v.norm() > PRUNE_THRESHOLD);
    }

    /// Largest entry magnitude (0 for the zero tensor).
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Bilinear duality bracket `sum_idx t[idx] * s[idx]` over shared indices.
///
/// Requires the factor sequences to be dual-compatible position by position;
/// no conjugation is applied (the convention under which both the eta/P and
/// the beta/Q pairings evaluate to `n`).
pub fn pair(t: &LabeledTensor, s: &LabeledTensor) -> Result<C64> {
    if t.factors.len() != s.factors.len() {
        return Err(Error::FactorMismatch {
            position: t.factors.len().min(s.factors.len()),
        });
    }
    for (pos, (a, b)) in t.factors.iter().zip(&s.factors).enumerate() {
        if !a.is_dual_to(b) {
            return Err(Error::FactorMismatch { position: pos });
        }
    }
    let (small, large) = if t.len() <= s.len() { (t, s) } else { (s, t) };
    let mut acc = ZERO;
    for (key, v) in small.entries() {
        let w = large.get(key);
        if w != ZERO {
            acc += v * w;
        }
    }
    Ok(acc)
}

/// Permutes the factor sequence: output factor `i` is input factor
/// `perm[i]`. Applying `perm` and then its inverse is the identity.
pub fn swap_factors(t: &LabeledTensor, perm: &[usize]) -> Result<LabeledTensor> {
    let k = t.factors.len();
    if perm.len() != k {
        return Err(Error::InvalidPermutation);
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::InvalidPermutation);
        }
        seen[p] = true;
    }
    let factors: Vec<FactorSpec> = perm.iter().map(|&p| t.factors[p].clone()).collect();
    let mut out = LabeledTensor::zero(factors);
    for (key, &v) in t.entries() {
        let new_key: MultiIndex = perm.iter().map(|&p| key[p].clone()).collect();
        out.add(new_key, v)?;
    }
    Ok(out)
}

/// Exchanges the last two factors as whole blocks (the tail transpose
/// `a ⊗ x ⊗ y -> a ⊗ y ⊗ x`); involutive.
pub fn transpose_tail(t: &LabeledTensor) -> Result<LabeledTensor> {
    let k = t.factors.len();
    if k < 2 {
        return Err(Error::InvalidPermutation);
    }
    let mut perm: Vec<usize> = (0..k).collect();
    perm.swap(k - 2, k - 1);
    swap_factors(t, &perm)
}

/// A linear map given on the basis entries of a single factor, used by
/// [`apply_factorwise`]. Each basis index of the input factor maps to a
/// sparse fragment over the output factor sequence.
#[derive(Debug, Clone)]
pub struct FactorMap {
    pub input: FactorSpec,
    pub outputs: Vec<FactorSpec>,
    images: BTreeMap<FactorIndex, Vec<(MultiIndex, C64)>>,
}

impl FactorMap {
    pub fn new(input: FactorSpec, outputs: Vec<FactorSpec>) -> Self {
        Self {
            input,
            outputs,
            images: BTreeMap::new(),
        }
    }

    /// Registers the image of one basis index.
    pub fn set_image(
        &mut self,
        basis: FactorIndex,
        fragment: Vec<(MultiIndex, C64)>,
    ) -> Result<()> {
        if !self.input.accepts(&basis) {
            return Err(Error::BasisMismatch { position: 0 });
        }
        for (key, _) in &fragment {
            if key.len() != self.outputs.len() {
                return Err(Error::BasisMismatch { position: 0 });
            }
            for (pos, (idx, spec)) in key.iter().zip(&self.outputs).enumerate() {
                if !spec.accepts(idx) {
                    return Err(Error::InvalidIndex { position: pos });
                }
            }
        }
        self.images.insert(basis, fragment);
        Ok(())
    }

    /// Identity map on a factor.
    pub fn identity(spec: FactorSpec) -> Self {
        Self::scalar(spec, crate::linalg::ONE)
    }

    /// Multiplication by a scalar on a factor.
    pub fn scalar(spec: FactorSpec, c: C64) -> Self {
        let mut m = Self::new(spec.clone(), vec![spec.clone()]);
        for basis in enumerate_indices(&spec) {
            m.set_image(basis.clone(), vec![(vec![basis], c)])
                .expect("basis indices of a spec always fit it");
        }
        m
    }

    fn image(&self, basis: &FactorIndex) -> Option<&[(MultiIndex, C64)]> {
        self.images.get(basis).map(|v| v.as_slice())
    }
}

/// All basis indices of a factor, in sorted order.
pub fn enumerate_indices(spec: &FactorSpec) -> Vec<FactorIndex> {
    let mut out = Vec::new();
    if spec.kind.is_matrix() {
        let n = spec.axes[0];
        for i in 0..n {
            for j in 0..n {
                out.push(FactorIndex::pair(i, j));
            }
        }
        return out;
    }
    let mut current = vec![0u32; spec.axes.len()];
    loop {
        out.push(FactorIndex::Label(current.clone()));
        let mut axis = spec.axes.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            current[axis] += 1;
            if (current[axis] as usize) < spec.axes[axis] {
                break;
            }
            current[axis] = 0;
        }
    }
}

/// Applies the linear extension of `m` to the factor at `position`,
/// replacing it by `m`'s output factors.
pub fn apply_factorwise(
    t: &LabeledTensor,
    position: usize,
    m: &FactorMap,
) -> Result<LabeledTensor> {
    if position >= t.factors.len() || t.factors[position] != m.input {
        return Err(Error::BasisMismatch { position });
    }
    let mut factors: Vec<FactorSpec> = Vec::with_capacity(t.factors.len() - 1 + m.outputs.len());
    factors.extend_from_slice(&t.factors[..position]);
    factors.extend(m.outputs.iter().cloned());
    factors.extend_from_slice(&t.factors[position + 1..]);
    let mut out = LabeledTensor::zero(factors);
    for (key, &v) in t.entries() {
        let fragment = m
            .image(&key[position])
            .ok_or(Error::BasisMismatch { position })?;
        for (frag_key, c) in fragment {
            let mut new_key: MultiIndex = Vec::with_capacity(key.len() - 1 + frag_key.len());
            new_key.extend_from_slice(&key[..position]);
            new_key.extend(frag_key.iter().cloned());
            new_key.extend_from_slice(&key[position + 1..]);
            out.add(new_key, v * c)?;
        }
    }
    Ok(out)
}

/// Writes a tensor in the sparse coordinate dump format: a header naming
/// the factor specs, then one record per entry with all index components
/// followed by the real and imaginary parts.
pub fn dump(t: &LabeledTensor) -> String {
    let mut s = String::new();
    s.push_str("# sparse-coordinate v1\n");
    for (i, f) in t.factors.iter().enumerate() {
        let axes: Vec<String> = f.axes.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(s, "# factor {} {} {}", i, f.kind.name(), axes.join("x"));
    }
    let _ = writeln!(s, "# entries {}", t.len());
    for (key, v) in t.entries() {
        let mut cols: Vec<String> = Vec::new();
        for idx in key {
            for c in idx.components() {
                cols.push(c.to_string());
            }
        }
        cols.push(format!("{:.17e}", v.re));
        cols.push(format!("{:.17e}", v.im));
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

/// Parses the sparse coordinate dump format produced by [`dump`].
pub fn parse_dump(text: &str) -> Result<LabeledTensor> {
    let mut factors: Vec<FactorSpec> = Vec::new();
    let mut body: Vec<(usize, &str)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.first() == Some(&"factor") {
                if fields.len() != 4 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "factor header needs index, kind, axes".into(),
                    });
                }
                let kind = FactorKind::from_name(fields[2]).ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown factor kind `{}`", fields[2]),
                })?;
                let axes: Vec<usize> = fields[3]
                    .split('x')
                    .map(|a| a.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: e.to_string(),
                    })?;
                factors.push(FactorSpec::new(kind, axes).map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })?);
            }
            continue;
        }
        body.push((lineno + 1, line));
    }
    if factors.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no factor headers found".into(),
        });
    }
    let expected: usize = factors
        .iter()
        .map(|f| if f.kind.is_matrix() { 2 } else { f.axes.len() })
        .sum::<usize>()
        + 2;
    let mut t = LabeledTensor::zero(factors.clone());
    for (lineno, line) in body {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} columns, got {}", expected, cols.len()),
            });
        }
        let mut cursor = 0usize;
        let mut key: MultiIndex = Vec::with_capacity(factors.len());
        for f in &factors {
            if f.kind.is_matrix() {
                let i: u32 = parse_col(cols[cursor], lineno)?;
                let j: u32 = parse_col(cols[cursor + 1], lineno)?;
                cursor += 2;
                key.push(FactorIndex::Pair(i, j));
            } else {
                let mut comps = Vec::with_capacity(f.axes.len());
                for _ in 0..f.axes.len() {
                    comps.push(parse_col(cols[cursor], lineno)?);
                    cursor += 1;
                }
                key.push(FactorIndex::Label(comps));
            }
        }
        let re: f64 = cols[cursor].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: "bad real part".into(),
        })?;
        let im: f64 = cols[cursor + 1].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: "bad imaginary part".into(),
        })?;
        t.add(key, C64::new(re, im)).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
    }
    Ok(t)
}

fn parse_col(s: &str, line: usize) -> Result<u32> {
    s.parse::<u32>().map_err(|_| Error::Parse {
        line,
        message: format!("bad index column `{s}`"),
    })
}
