use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{HoldOut, Learner, TrainedModel};
use crate::linalg::{cholesky_solve, dot};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// How the intercept `b` is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intercept<T> {
    /// A constant feature of value `sqrt(c)` appended to every unit and
    /// penalized like the other weights, i.e. the kernel `x.z + c`.
    /// `Penalized(0)` fits no intercept.
    Penalized(T),
    /// Unpenalized: features and targets are centered on the training means.
    Centered,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RidgeConfig<T> {
    pub lambda: T,
    pub intercept: Intercept<T>,
}

impl<T: Scalar> RidgeConfig<T> {
    pub fn new(lambda: T) -> Self {
        Self {
            lambda,
            intercept: Intercept::Penalized(T::one()),
        }
    }

    pub fn centered(lambda: T) -> Self {
        Self {
            lambda,
            intercept: Intercept::Centered,
        }
    }
}

impl<T: Scalar> Default for RidgeConfig<T> {
    fn default() -> Self {
        Self::new(T::one())
    }
}

/// Linear model `f(x) = w.x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel<T> {
    pub weights: Vec<T>,
    pub intercept: T,
}

impl<T: Scalar> TrainedModel<T> for RidgeModel<T> {
    fn predict(&self, x: &[T]) -> T {
        dot(&self.weights, x) + self.intercept
    }
}

fn check_config<T: Scalar>(cfg: &RidgeConfig<T>) -> Result<()> {
    if !(cfg.lambda.is_finite() && cfg.lambda >= T::zero()) {
        return Err(Error::Config(format!("ridge lambda must be >= 0, got {}", cfg.lambda)));
    }
    if let Intercept::Penalized(c) = cfg.intercept {
        if !(c.is_finite() && c >= T::zero()) {
            return Err(Error::Config(format!("ridge intercept constant must be >= 0, got {c}")));
        }
    }
    Ok(())
}

/// The design the solvers see: shifted features `xs` (with the constant
/// column appended when the intercept is penalized) and shifted targets.
struct Design<T> {
    x_shift: Vec<T>,
    xs: Vec<T>,
    /// Columns of `xs`.
    cols: usize,
    y_shift: T,
    ys: Vec<T>,
    /// `sqrt(c)` when the last column is the constant feature.
    constant: Option<T>,
}

impl<T: Scalar> Design<T> {
    fn new(ds: &Dataset<T>, intercept: Intercept<T>) -> Self {
        let (n, d) = (ds.len(), ds.dim());
        let y: Vec<T> = ds.labels().iter().map(|l| l.sign()).collect();
        match intercept {
            Intercept::Centered => {
                let inv_n = T::one() / T::of_usize(n);
                let mut x_shift = vec![T::zero(); d];
                for row in ds.rows() {
                    for (m, &v) in x_shift.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                x_shift.iter_mut().for_each(|m| *m *= inv_n);
                let mut xs = Vec::with_capacity(n * d);
                for row in ds.rows() {
                    xs.extend(row.iter().zip(&x_shift).map(|(&v, &m)| v - m));
                }
                let y_shift = y.iter().copied().sum::<T>() * inv_n;
                let ys = y.iter().map(|&v| v - y_shift).collect();
                Self {
                    x_shift,
                    xs,
                    cols: d,
                    y_shift,
                    ys,
                    constant: None,
                }
            }
            Intercept::Penalized(c) => {
                let root = c.sqrt();
                let mut xs = Vec::with_capacity(n * (d + 1));
                for row in ds.rows() {
                    xs.extend_from_slice(row);
                    xs.push(root);
                }
                Self {
                    x_shift: vec![T::zero(); d],
                    xs,
                    cols: d + 1,
                    y_shift: T::zero(),
                    ys: y,
                    constant: Some(root),
                }
            }
        }
    }

    fn row(&self, r: usize) -> &[T] {
        &self.xs[r * self.cols..(r + 1) * self.cols]
    }

    /// Maps weights over the design columns back to `f(x) = w.x + b`.
    fn model(&self, mut w: Vec<T>) -> RidgeModel<T> {
        let b = match self.constant {
            Some(root) => w.pop().expect("constant column") * root,
            None => T::zero(),
        };
        let intercept = self.y_shift + b - dot(&w, &self.x_shift);
        RidgeModel { weights: w, intercept }
    }
}

/// Solves `(Z^T Z + lambda I) w = Z^T t` over the design `Z`, `t`.
pub fn ridge_fit_primal<T: Scalar>(ds: &Dataset<T>, cfg: &RidgeConfig<T>) -> Result<RidgeModel<T>> {
    check_config(cfg)?;
    let z = Design::new(ds, cfg.intercept);
    let d = z.cols;
    let mut gram = vec![T::zero(); d * d];
    let mut rhs = vec![T::zero(); d];
    for r in 0..ds.len() {
        let row = z.row(r);
        for i in 0..d {
            rhs[i] += row[i] * z.ys[r];
            for j in 0..=i {
                gram[i * d + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        gram[i * d + i] += cfg.lambda;
        for j in 0..i {
            gram[j * d + i] = gram[i * d + j];
        }
    }
    cholesky_solve(&mut gram, d, &mut rhs)?;
    Ok(z.model(rhs))
}

/// Solves `(Z Z^T + lambda I) a = t`, `w = Z^T a`. Same model as the primal
/// form; cheaper when `d > n`.
pub fn ridge_fit_dual<T: Scalar>(ds: &Dataset<T>, cfg: &RidgeConfig<T>) -> Result<RidgeModel<T>> {
    check_config(cfg)?;
    let n = ds.len();
    let z = Design::new(ds, cfg.intercept);
    let mut kernel = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = dot(z.row(i), z.row(j));
            kernel[i * n + j] = v;
            kernel[j * n + i] = v;
        }
        kernel[i * n + i] += cfg.lambda;
    }
    let mut alpha = z.ys.clone();
    cholesky_solve(&mut kernel, n, &mut alpha)?;
    let mut weights = vec![T::zero(); z.cols];
    for (r, &a) in alpha.iter().enumerate() {
        for (w, &v) in weights.iter_mut().zip(z.row(r)) {
            *w += a * v;
        }
    }
    Ok(z.model(weights))
}

/// Ridge regression on ±1 targets. Uses the dual system when there are more
/// features than training units.
pub fn ridge_fit<T: Scalar>(ds: &Dataset<T>, cfg: &RidgeConfig<T>) -> Result<RidgeModel<T>> {
    if ds.dim() > ds.len() {
        ridge_fit_dual(ds, cfg)
    } else {
        ridge_fit_primal(ds, cfg)
    }
}

#[derive(Clone, Debug)]
pub struct Ridge<T> {
    cfg: RidgeConfig<T>,
}

impl<T: Scalar> Ridge<T> {
    pub fn new(cfg: RidgeConfig<T>) -> Result<Self> {
        check_config(&cfg)?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &RidgeConfig<T> {
        &self.cfg
    }
}

impl<T: Scalar> Learner<T> for Ridge<T> {
    fn name(&self) -> &'static str {
        match self.cfg.intercept {
            Intercept::Penalized(_) => "ridge",
            Intercept::Centered => "ridge-centered",
        }
    }

    fn fit(&self, train: &Dataset<T>, _seed: u64) -> Result<Box<dyn TrainedModel<T>>> {
        Ok(Box::new(ridge_fit(train, &self.cfg)?))
    }

    fn hold_out<'a>(&'a self, ds: &'a Dataset<T>) -> Result<Box<dyn HoldOut<T> + 'a>> {
        if ds.dim() > ds.len() {
            Ok(Box::new(GramHoldOut::new(ds, self.cfg)))
        } else {
            Ok(Box::new(super::Retrain::new(self, ds)))
        }
    }
}

/// Dual ridge over a precomputed Gram matrix of the full sample.
///
/// For the centered intercept, features are centered once on the full-sample
/// mean (predictions are invariant to that shift) and each round re-centers
/// the Gram matrix on its own training mean.
struct GramHoldOut<'a, T> {
    ds: &'a Dataset<T>,
    gram: Vec<T>,
    cfg: RidgeConfig<T>,
}

impl<'a, T: Scalar> GramHoldOut<'a, T> {
    fn new(ds: &'a Dataset<T>, cfg: RidgeConfig<T>) -> Self {
        let z = Design::new(ds, cfg.intercept);
        let m = ds.len();
        let mut gram = vec![T::zero(); m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = dot(z.row(i), z.row(j));
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        Self { ds, gram, cfg }
    }
}

impl<T: Scalar> HoldOut<T> for GramHoldOut<'_, T> {
    fn predict_held_out(&self, held_out: &[usize], _seed: u64) -> Result<Vec<T>> {
        let m = self.ds.len();
        let mut excluded = vec![false; m];
        for &u in held_out {
            if u >= m {
                return Err(Error::IndexOutOfRange { index: u, m });
            }
            excluded[u] = true;
        }
        let train: Vec<usize> = (0..m).filter(|&u| !excluded[u]).collect();
        let n = train.len();
        if n == 0 {
            return Err(Error::ExcludeAll(m));
        }
        let raw = |a: usize, b: usize| self.gram[a * m + b];
        let inv_n = T::one() / T::of_usize(n);

        // Row means over the training set; zero when nothing is centered.
        let centered = self.cfg.intercept == Intercept::Centered;
        let row_mean: Vec<T> = if centered {
            (0..m).map(|a| train.iter().map(|&c| raw(a, c)).sum::<T>() * inv_n).collect()
        } else {
            vec![T::zero(); m]
        };
        let grand = train.iter().map(|&a| row_mean[a]).sum::<T>() * inv_n;
        let k = |a: usize, b: usize| raw(a, b) - row_mean[a] - row_mean[b] + grand;

        let mut system = vec![T::zero(); n * n];
        for (p, &a) in train.iter().enumerate() {
            for (q, &b) in train.iter().enumerate().take(p + 1) {
                let v = k(a, b);
                system[p * n + q] = v;
                system[q * n + p] = v;
            }
            system[p * n + p] += self.cfg.lambda;
        }
        let y: Vec<T> = train.iter().map(|&a| self.ds.label(a).sign()).collect();
        let y_shift = if centered {
            y.iter().copied().sum::<T>() * inv_n
        } else {
            T::zero()
        };
        let mut alpha: Vec<T> = y.iter().map(|&v| v - y_shift).collect();
        cholesky_solve(&mut system, n, &mut alpha)?;

        Ok(held_out
            .iter()
            .map(|&t| y_shift + train.iter().zip(&alpha).map(|(&a, &al)| al * k(a, t)).sum::<T>())
            .collect())
    }
}
