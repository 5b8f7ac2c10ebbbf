//! Real-field (n, k) MDS code built from a Vandermonde generator.
//!
//! Source piece `i` is the coefficient of `g^i` in a polynomial evaluated at
//! node `g_r` for coded piece `r`. Any k coded pieces determine the
//! polynomial, so any k finished coded convolutions determine the k source
//! piece convolutions (convolution is linear).
//!
//! All indices are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported code length.
pub const MAX_CODE_LEN: usize = 64;

/// Decoders whose 1-norm condition number exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// How the evaluation nodes g_r are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeScheme {
    /// `cos((2r−1)π/(2n))`, r = 1..n.
    #[default]
    Chebyshev,
    /// n equispaced points on [−1, 1].
    Uniform,
    /// 0, 1, …, n−1.
    IntegerGrid,
}

impl NodeScheme {
    pub fn nodes(self, n: usize) -> Vec<f64> {
        match self {
            NodeScheme::Chebyshev => (1..=n)
                .map(|r| ((2 * r - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
                .collect(),
            NodeScheme::Uniform if n == 1 => vec![0.0],
            NodeScheme::Uniform => (0..n)
                .map(|r| -1.0 + 2.0 * r as f64 / (n - 1) as f64)
                .collect(),
            NodeScheme::IntegerGrid => (0..n).map(|r| r as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeCode {
    n: usize,
    k: usize,
    nodes: Vec<f64>,
    /// n×k, row r = [1, g_r, g_r², …, g_r^{k−1}].
    generator: Vec<Vec<f64>>,
}

/// Build an (n, k) code with nodes placed by `scheme`.
pub fn make_code(n: usize, k: usize, scheme: NodeScheme) -> Result<VandermondeCode> {
    if k == 0 || k > n {
        return invalid(format!("code needs 1 <= k <= n, got n={n}, k={k}"));
    }
    if n > MAX_CODE_LEN {
        return invalid(format!("code length {n} exceeds the supported maximum {MAX_CODE_LEN}"));
    }
    let nodes = scheme.nodes(n);
    let generator = nodes
        .iter()
        .map(|&g| {
            std::iter::successors(Some(1.0), |p| Some(p * g))
                .take(k)
                .collect()
        })
        .collect();
    Ok(VandermondeCode {
        n,
        k,
        nodes,
        generator,
    })
}

impl VandermondeCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn generator(&self) -> &[Vec<f64>] {
        &self.generator
    }

    /// Coded piece r = Σ_i g_r^i · piece_i, entrywise.
    pub fn encode<P: AsRef<[f64]>>(&self, pieces: &[P]) -> Result<Vec<Vec<f64>>> {
        if pieces.len() != self.k {
            return invalid(format!("expected {} source pieces, got {}", self.k, pieces.len()));
        }
        let len = pieces[0].as_ref().len();
        if pieces.iter().any(|p| p.as_ref().len() != len) {
            return invalid("source pieces must have equal lengths");
        }
        Ok(self
            .generator
            .iter()
            .map(|row| {
                let mut coded = vec![0.0; len];
                for (coef, piece) in row.iter().zip(pieces) {
                    for (c, v) in coded.iter_mut().zip(piece.as_ref()) {
                        *c += coef * v;
                    }
                }
                coded
            })
            .collect())
    }

    /// k×k submatrix of the generator made of the rows in `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices.iter().map(|&l| self.generator[l].clone()).collect()
    }

    /// Inverse of the generator rows selected by `finished`.
    pub fn make_decoder(&self, finished: &[usize]) -> Result<DecoderMatrix> {
        if finished.len() != self.k {
            return invalid(format!(
                "decoder needs exactly {} indices, got {}",
                self.k,
                finished.len()
            ));
        }
        let mut indices = finished.to_vec();
        indices.sort_unstable();
        if let Some(&bad) = indices.iter().find(|&&l| l >= self.n) {
            return invalid(format!("index {bad} out of range for code length {}", self.n));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return invalid("decoder indices must be distinct");
        }

        let sub = self.submatrix(&indices);
        let inverse = invert(&sub)?;
        let condition = norm1(&sub) * norm1(&inverse);
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                condition,
                limit: CONDITION_LIMIT,
            });
        }
        Ok(DecoderMatrix {
            indices,
            inverse,
            condition,
        })
    }
}

/// `B = [G_L]^{-1}` for a sorted index set L of finished coded pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderMatrix {
    indices: Vec<usize>,
    inverse: Vec<Vec<f64>>,
    condition: f64,
}

impl DecoderMatrix {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn inverse(&self) -> &[Vec<f64>] {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Recover the k source-piece convolutions from the coded outputs, which
    /// must be ordered like [`DecoderMatrix::indices`].
    pub fn decode_group<P: AsRef<[f64]>>(&self, coded_outputs: &[P]) -> Result<Vec<Vec<f64>>> {
        let k = self.indices.len();
        if coded_outputs.len() != k {
            return invalid(format!("expected {k} coded outputs, got {}", coded_outputs.len()));
        }
        let len = coded_outputs[0].as_ref().len();
        if coded_outputs.iter().any(|c| c.as_ref().len() != len) {
            return invalid("coded outputs must have equal lengths");
        }
        Ok(self
            .inverse
            .iter()
            .map(|row| {
                let mut out = vec![0.0; len];
                for (coef, coded) in row.iter().zip(coded_outputs) {
                    for (o, v) in out.iter_mut().zip(coded.as_ref()) {
                        *o += coef * v;
                    }
                }
                out
            })
            .collect())
    }

    /// Copy with `delta` added to the top-left entry. Used to check that a
    /// bad decoder is detected downstream.
    #[doc(hidden)]
    pub fn perturbed(&self, delta: f64) -> Self {
        let mut copy = self.clone();
        copy.inverse[0][0] += delta;
        copy
    }
}

fn norm1(m: &[Vec<f64>]) -> f64 {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| m.iter().map(|row| row[c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse via LU decomposition with partial pivoting.
fn invert(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = m.len();
    let mut lu: Vec<Vec<f64>> = m.to_vec();
    let mut perm: Vec<usize> = (0..k).collect();

    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| lu[a][col].abs().total_cmp(&lu[b][col].abs()))
            .unwrap_or(col);
        if lu[pivot][col] == 0.0 {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
                limit: CONDITION_LIMIT,
            });
        }
        lu.swap(col, pivot);
        perm.swap(col, pivot);
        for row in col + 1..k {
            let factor = lu[row][col] / lu[col][col];
            lu[row][col] = factor;
            for c in col + 1..k {
                lu[row][c] -= factor * lu[col][c];
            }
        }
    }

    // Solve A·X = I column by column: P·A = L·U.
    let mut inverse = vec![vec![0.0; k]; k];
    for target in 0..k {
        let mut y: Vec<f64> = perm.iter().map(|&p| if p == target { 1.0 } else { 0.0 }).collect();
        for row in 0..k {
            for c in 0..row {
                y[row] -= lu[row][c] * y[c];
            }
        }
        for row in (0..k).rev() {
            for c in row + 1..k {
                y[row] -= lu[row][c] * y[c];
            }
            y[row] /= lu[row][row];
        }
        for (row, v) in y.into_iter().enumerate() {
            inverse[row][target] = v;
        }
    }
    Ok(inverse)
}
