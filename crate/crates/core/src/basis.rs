//! Linear-in-weights feature maps with analytic gradients.
//!
//! Feature ordering is fixed and exposed through [`BasisSet::labels`], so
//! weight vectors logged by different runs line up column by column.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One scalar feature.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    /// `Π xᵢ^{kᵢ}`.
    Monomial(Vec<u32>),
    /// `Π xᵢ^{kᵢ} · cos(freq · x_var)`.
    CosModulated { exponents: Vec<u32>, var: usize, freq: f64 },
}

fn monomial(exps: &[u32], x: &DVector<f64>) -> f64 {
    exps.iter()
        .zip(x.iter())
        .map(|(&k, &xi)| xi.powi(k as i32))
        .product()
}

/// `∂/∂x_i` of the monomial.
fn monomial_partial(exps: &[u32], x: &DVector<f64>, i: usize) -> f64 {
    if exps[i] == 0 {
        return 0.0;
    }
    let mut acc = exps[i] as f64;
    for (j, (&k, &xj)) in exps.iter().zip(x.iter()).enumerate() {
        let k = if j == i { k - 1 } else { k };
        acc *= xj.powi(k as i32);
    }
    acc
}

impl Feature {
    fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Feature::Monomial(e) => monomial(e, x),
            Feature::CosModulated { exponents, var, freq } => {
                monomial(exponents, x) * (freq * x[*var]).cos()
            }
        }
    }

    fn partial(&self, x: &DVector<f64>, i: usize) -> f64 {
        match self {
            Feature::Monomial(e) => monomial_partial(e, x, i),
            Feature::CosModulated { exponents, var, freq } => {
                let c = (freq * x[*var]).cos();
                let mut d = monomial_partial(exponents, x, i) * c;
                if i == *var {
                    d -= monomial(exponents, x) * freq * (freq * x[*var]).sin();
                }
                d
            }
        }
    }

    fn label(&self) -> String {
        let mono = |e: &[u32]| -> String {
            let parts: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            if parts.is_empty() {
                "1".into()
            } else {
                parts.join("*")
            }
        };
        match self {
            Feature::Monomial(e) => mono(e),
            Feature::CosModulated { exponents, var, freq } => {
                format!("{}*cos({}*x{})", mono(exponents), freq, var + 1)
            }
        }
    }
}

/// A feature map `φ: Rⁿ → R^N` with its Jacobian `∇φ: Rⁿ → R^(N×n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub name: String,
    dim_in: usize,
    features: Vec<Feature>,
}

impl BasisSet {
    pub fn new(name: impl Into<String>, dim_in: usize, features: Vec<Feature>) -> Result<Self> {
        if dim_in == 0 || features.is_empty() {
            return Err(Error::config("basis needs at least one input and one feature"));
        }
        for f in &features {
            let (len, var) = match f {
                Feature::Monomial(e) => (e.len(), 0),
                Feature::CosModulated { exponents, var, .. } => (exponents.len(), *var),
            };
            if len != dim_in || var >= dim_in {
                return Err(Error::config(format!(
                    "feature {} does not match input dimension {dim_in}",
                    f.label()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim_in,
            features,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn labels(&self) -> Vec<String> {
        self.features.iter().map(Feature::label).collect()
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.dim_in {
            Ok(())
        } else {
            Err(Error::config(format!(
                "basis `{}` expects input of length {}, got {}",
                self.name,
                self.dim_in,
                x.len()
            )))
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(DMatrix::from_fn(self.dim_out(), self.dim_in, |r, c| {
            self.features[r].partial(x, c)
        }))
    }

    /// Evaluation without the length check, for the simulation hot loop.
    pub(crate) fn eval_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.features.len(), self.features.iter().map(|f| f.eval(x)))
    }
}

/// Free-function form of [`BasisSet::eval`].
pub fn eval_basis(basis: &BasisSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    basis.eval(x)
}

/// Free-function form of [`BasisSet::gradient`].
pub fn eval_basis_gradient(basis: &BasisSet, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    basis.gradient(x)
}

/// Exponent vectors of total degree `d` in `n` variables, lexicographically
/// descending (`x₁²`, `x₁x₂`, `x₂²` for n = d = 2).
fn exponents_of_degree(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k);
            rec(n, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Symmetry-reduced quadratic monomials, `n(n+1)/2` features.
pub fn quadratic_basis(n: usize) -> Result<BasisSet> {
    if n == 0 {
        return Err(Error::config("quadratic basis needs n >= 1"));
    }
    let feats = exponents_of_degree(n, 2).into_iter().map(Feature::Monomial).collect();
    BasisSet::new("quadratic", n, feats)
}

/// All monomials of total degree `1..=degree`, grouped by degree.
pub fn polynomial_basis(n: usize, degree: u32) -> Result<BasisSet> {
    if n == 0 || degree == 0 {
        return Err(Error::config("polynomial basis needs n >= 1 and degree >= 1"));
    }
    let feats = (1..=degree)
        .flat_map(|d| exponents_of_degree(n, d))
        .map(Feature::Monomial)
        .collect();
    BasisSet::new(format!("poly:{degree}"), n, feats)
}

/// `[x₁cos(2x₁), x₁, x₂cos(2x₁), x₂]`: exact actor features for the benchmark.
pub fn case1_actor_basis() -> BasisSet {
    let cos = |e: Vec<u32>| Feature::CosModulated {
        exponents: e,
        var: 0,
        freq: 2.0,
    };
    BasisSet::new(
        "case1_actor",
        2,
        vec![
            cos(vec![1, 0]),
            Feature::Monomial(vec![1, 0]),
            cos(vec![0, 1]),
            Feature::Monomial(vec![0, 1]),
        ],
    )
    .expect("static basis")
}

/// `[x₁, x₁², …, x₁⁵, x₂, x₁x₂, …, x₁⁴x₂]`.
pub fn case2_actor_basis() -> BasisSet {
    let pure = (1..=5).map(|k| Feature::Monomial(vec![k, 0]));
    let mixed = (0..=4).map(|k| Feature::Monomial(vec![k, 1]));
    BasisSet::new("case2_actor", 2, pure.chain(mixed).collect()).expect("static basis")
}

/// Resolves a config name: `quadratic`, `linear`, `case1_actor`,
/// `case2_actor` or `poly:<degree>`.
pub fn basis_by_name(name: &str, n: usize) -> Result<BasisSet> {
    let fixed_2d = |b: BasisSet| {
        if n == 2 {
            Ok(b)
        } else {
            Err(Error::config(format!("basis `{name}` is defined for n = 2 only, got n = {n}")))
        }
    };
    match name {
        "quadratic" => quadratic_basis(n),
        "linear" => polynomial_basis(n, 1),
        "case1_actor" => fixed_2d(case1_actor_basis()),
        "case2_actor" => fixed_2d(case2_actor_basis()),
        other => match other.strip_prefix("poly:").map(str::parse::<u32>) {
            Some(Ok(d)) => polynomial_basis(n, d),
            _ => Err(Error::config(format!("unknown basis `{other}`"))),
        },
    }
}

/// Maps quadratic-basis weights to the symmetric `P` with `wᵀφ(x) = xᵀPx`
/// (off-diagonal weights are halved).
pub fn quadratic_weights_to_matrix(w: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    if w.len() != n * (n + 1) / 2 {
        return Err(Error::config(format!(
            "expected {} quadratic weights for n = {n}, got {}",
            n * (n + 1) / 2,
            w.len()
        )));
    }
    let mut p = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                p[(i, i)] = w[k];
            } else {
                p[(i, j)] = 0.5 * w[k];
                p[(j, i)] = 0.5 * w[k];
            }
            k += 1;
        }
    }
    Ok(p)
}

/// Inverse of [`quadratic_weights_to_matrix`] for symmetric `P`.
pub fn matrix_to_quadratic_weights(p: &DMatrix<f64>) -> DVector<f64> {
    let n = p.nrows();
    let mut w = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            w.push(if i == j { p[(i, i)] } else { p[(i, j)] + p[(j, i)] });
        }
    }
    DVector::from_vec(w)
}
