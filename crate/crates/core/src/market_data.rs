//! Gross-return ingestion and the H-partite period structure.
//!
//! Every value is a *gross* return: the end-of-half-period value of one unit
//! invested at its start (`1.05` is a 5% gain, `0.5` halves the money, `0`
//! wipes the position out). Net returns must be converted before loading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// One half-period's gross returns across the `m` assets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReturnVector<F> {
    values: Vec<F>,
}

impl<F: Scalar> ReturnVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidReturnVector("no assets".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < F::zero()) {
            return Err(Error::InvalidReturnVector(format!(
                "entries must be finite and nonnegative, found {v}"
            )));
        }
        if values.iter().all(|v| *v == F::zero()) {
            return Err(Error::InvalidReturnVector("all entries are zero".into()));
        }
        Ok(Self { values })
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| F::lit(v)).collect())
    }

    /// The all-ones vector: every asset returns its stake unchanged.
    pub fn ones(dim: usize) -> Self {
        Self {
            values: vec![F::one(); dim],
        }
    }

    /// Unit basis vector `e_index`.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut values = vec![F::zero(); dim];
        values[index] = F::one();
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn sum(&self) -> F {
        self.values.iter().copied().sum()
    }

    /// Multiplies every entry by `factor > 0`.
    pub fn scaled(&self, factor: F) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| v * factor).collect())
    }

    /// Index of the single positive entry, if this is a positive multiple of a basis vector.
    pub fn basis_index(&self) -> Option<usize> {
        let mut positive = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > F::zero());
        let (i, _) = positive.next()?;
        positive.next().is_none().then_some(i)
    }
}

/// Rescales `v` onto the unit simplex. Growth ratios only depend on the
/// direction of each return vector, so this loses nothing for them.
pub fn normalize_half<F: Scalar>(v: &ReturnVector<F>) -> ReturnVector<F> {
    let total = v.sum();
    ReturnVector {
        values: v.values.iter().map(|&x| x / total).collect(),
    }
}

/// A sequence of half-period return vectors grouped into periods of `order` halves.
///
/// Half `k` (0-based) belongs to period `k / order` as sub-period `k % order`.
/// Trailing halves that do not fill a period form an incomplete period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketHistory<F> {
    assets: Vec<String>,
    order: usize,
    halves: Vec<ReturnVector<F>>,
}

impl<F: Scalar> MarketHistory<F> {
    pub fn new(assets: Vec<String>, order: usize, halves: Vec<ReturnVector<F>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if assets.is_empty() {
            return Err(Error::InvalidReturnVector("no assets".into()));
        }
        for h in &halves {
            if h.dim() != assets.len() {
                return Err(Error::DimensionMismatch {
                    expected: assets.len(),
                    found: h.dim(),
                });
            }
        }
        Ok(Self {
            assets,
            order,
            halves,
        })
    }

    /// History with generated labels `asset1..assetm`.
    pub fn unlabeled(dim: usize, order: usize, halves: Vec<ReturnVector<F>>) -> Result<Self> {
        Self::new(default_labels(dim), order, halves)
    }

    /// A Kelly (horse-race) history: in each half-period exactly one asset pays.
    /// `periods[t][h]` is the asset paying in sub-period `h` of period `t`.
    pub fn kelly(dim: usize, order: usize, periods: &[Vec<usize>]) -> Result<Self> {
        let mut halves = Vec::with_capacity(periods.len() * order);
        for p in periods {
            if p.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: p.len(),
                });
            }
            for &i in p {
                if i >= dim {
                    return Err(Error::InvalidReturnVector(format!(
                        "asset index {i} out of range for {dim} assets"
                    )));
                }
                halves.push(ReturnVector::unit(dim, i));
            }
        }
        Self::unlabeled(dim, order, halves)
    }

    pub fn empty(dim: usize, order: usize) -> Result<Self> {
        Self::unlabeled(dim, order, Vec::new())
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn dim(&self) -> usize {
        self.assets.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn halves(&self) -> &[ReturnVector<F>] {
        &self.halves
    }

    /// Number `T` of complete periods.
    pub fn complete_periods(&self) -> usize {
        self.halves.len() / self.order
    }

    /// Number of trailing halves in the incomplete final period (`0 ≤ r < H`).
    pub fn remainder(&self) -> usize {
        self.halves.len() % self.order
    }

    pub fn is_complete(&self) -> bool {
        self.remainder() == 0
    }

    /// Complete periods, each a slice of `order` half-period vectors.
    pub fn periods(&self) -> impl Iterator<Item = &[ReturnVector<F>]> + '_ {
        self.halves.chunks_exact(self.order)
    }

    /// The first `t` complete periods.
    pub fn prefix(&self, t: usize) -> Self {
        let t = t.min(self.complete_periods());
        Self {
            assets: self.assets.clone(),
            order: self.order,
            halves: self.halves[..t * self.order].to_vec(),
        }
    }

    /// Same halves regrouped into periods of a different order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(self.assets.clone(), order, self.halves.clone())
    }

    pub fn push_half(&mut self, half: ReturnVector<F>) -> Result<()> {
        if half.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: half.dim(),
            });
        }
        self.halves.push(half);
        Ok(())
    }

    /// Maps every half-period vector through `f`, keeping the grouping.
    pub fn map_halves(
        &self,
        mut f: impl FnMut(usize, &ReturnVector<F>) -> ReturnVector<F>,
    ) -> Self {
        Self {
            assets: self.assets.clone(),
            order: self.order,
            halves: self
                .halves
                .iter()
                .enumerate()
                .map(|(k, h)| f(k, h))
                .collect(),
        }
    }

    /// Writes the history back out in the CSV input format.
    pub fn to_csv(&self) -> String {
        let mut out = self.assets.join(",");
        out.push('\n');
        for h in &self.halves {
            let row: Vec<String> = h.as_slice().iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Completes a trailing partial period with all-ones half-periods, which
/// leave every strategy's wealth unchanged. Complete histories pass through.
pub fn pad_incomplete<F: Scalar>(h: &MarketHistory<F>) -> MarketHistory<F> {
    let r = h.remainder();
    let mut out = h.clone();
    if r > 0 {
        for _ in r..h.order {
            out.halves.push(ReturnVector::ones(h.dim()));
        }
    }
    out
}

pub(crate) fn default_labels(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("asset{i}")).collect()
}

/// Parses a comma-separated gross-return table.
///
/// The first row holds asset labels; an optional leading column headed `t`
/// is ignored. Each further row is one half-period, assigned to periods in
/// chronological order. Row and column numbers in errors are 1-based file
/// positions.
pub fn parse_history<F: Scalar>(raw: &str, order: usize) -> Result<MarketHistory<F>> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(1, e))?,
        None => return Err(Error::EmptyTable),
    };
    let skip_index = header.get(0).is_some_and(|c| c == "t");
    let assets: Vec<String> = header
        .iter()
        .skip(usize::from(skip_index))
        .map(str::to_string)
        .collect();
    if assets.is_empty() || assets.iter().all(String::is_empty) && header.len() == 1 {
        return Err(Error::EmptyTable);
    }

    let width = header.len();
    let mut halves = Vec::new();
    for (k, rec) in records.enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        let mut values = Vec::with_capacity(assets.len());
        for (c, cell) in rec.iter().enumerate().skip(usize::from(skip_index)) {
            let col = c + 1;
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                col,
                msg: format!("cannot parse {cell:?} as a decimal number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    col,
                    msg: format!("non-finite value {cell:?}"),
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeReturn { row, col, value: v });
            }
            values.push(F::lit(v));
        }
        if values.iter().all(|v| *v == F::zero()) {
            return Err(Error::AllZeroRow { row });
        }
        halves.push(ReturnVector::new(values)?);
    }
    if halves.is_empty() {
        return Err(Error::EmptyTable);
    }
    MarketHistory::new(assets, order, halves)
}

fn csv_error(row: usize, e: csv::Error) -> Error {
    Error::Parse {
        row,
        col: 0,
        msg: e.to_string(),
    }
}
